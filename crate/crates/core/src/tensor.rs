//! Exact linear operators on `V^{⊗n}` with `dim V = N`.
//!
//! An operator is a square matrix of size `N^n` whose rows are indexed by the
//! lower multi-index `(i_1, ..., i_n)` and whose columns are indexed by the upper
//! multi-index `(j_1, ..., j_n)`. Composition contracts the upper index of the
//! left factor with the lower index of the right factor:
//! `(AB)_i^j = sum_k A_i^k B_k^j`, which is the ordinary matrix product.
//!
//! Multi-indices are flattened little-endian in slot order, so slot `s`
//! (1-based) carries weight `N^(s-1)`. All public multi-indices are 0-based.
//!
//! Storage is row-compressed and sparse: each row keeps its nonzero entries
//! sorted by column, with no stored zeros.

use std::collections::BTreeMap;

use crate::error::TensorError;
use crate::field::Field;

type Row<E> = Vec<(usize, E)>;

#[derive(Clone, Debug)]
pub struct TensorOperator<F: Field> {
    field: F,
    dim: usize,
    arity: usize,
    rows: Vec<Row<F::Elem>>,
}

impl<F: Field> PartialEq for TensorOperator<F> {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.arity == other.arity && self.rows == other.rows
    }
}

/// First differing entry: row multi-index, column multi-index, difference.
pub type Difference<F> = (Vec<usize>, Vec<usize>, <F as Field>::Elem);

/// Flattens a 0-based multi-index.
pub fn flatten(dim: usize, multi: &[usize]) -> usize {
    multi.iter().rev().fold(0, |acc, &i| acc * dim + i)
}

/// Inverse of [`flatten`].
pub fn unflatten(dim: usize, arity: usize, mut idx: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(arity);
    for _ in 0..arity {
        out.push(idx % dim);
        idx /= dim;
    }
    out
}

impl<F: Field> TensorOperator<F> {
    pub fn zero(field: &F, dim: usize, arity: usize) -> Self {
        let size = dim.pow(arity as u32);
        TensorOperator { field: field.clone(), dim, arity, rows: vec![Vec::new(); size] }
    }

    pub fn identity(field: &F, dim: usize, arity: usize) -> Self {
        Self::scalar(field, dim, arity, field.one())
    }

    /// `c` times the identity.
    pub fn scalar(field: &F, dim: usize, arity: usize, c: F::Elem) -> Self {
        let mut op = Self::zero(field, dim, arity);
        if !field.is_zero(&c) {
            for (i, row) in op.rows.iter_mut().enumerate() {
                row.push((i, c.clone()));
            }
        }
        op
    }

    /// Builds an operator from `(row, col, value)` triples over flattened
    /// indices; repeated positions are summed.
    pub fn from_flat_entries<I>(field: &F, dim: usize, arity: usize, entries: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, F::Elem)>,
    {
        let size = dim.pow(arity as u32);
        let mut acc: Vec<BTreeMap<usize, F::Elem>> = vec![BTreeMap::new(); size];
        for (r, c, v) in entries {
            assert!(r < size && c < size, "index out of range");
            let slot = acc[r].entry(c).or_insert_with(|| field.zero());
            *slot = field.add(slot, &v);
        }
        let rows = acc.into_iter().map(|m| m.into_iter().filter(|(_, v)| !field.is_zero(v)).collect()).collect();
        TensorOperator { field: field.clone(), dim, arity, rows }
    }

    /// Builds an operator from multi-index triples.
    pub fn from_entries<I>(field: &F, dim: usize, arity: usize, entries: I) -> Self
    where
        I: IntoIterator<Item = (Vec<usize>, Vec<usize>, F::Elem)>,
    {
        let flat = entries.into_iter().map(|(r, c, v)| {
            assert!(r.len() == arity && c.len() == arity, "multi-index length must equal arity");
            (flatten(dim, &r), flatten(dim, &c), v)
        });
        Self::from_flat_entries(field, dim, arity, flat)
    }

    /// Builds an operator by evaluating `f(row, col)` at every position.
    pub fn from_fn(field: &F, dim: usize, arity: usize, mut f: impl FnMut(&[usize], &[usize]) -> F::Elem) -> Self {
        let size = dim.pow(arity as u32);
        let mut entries = Vec::new();
        for r in 0..size {
            let rm = unflatten(dim, arity, r);
            for c in 0..size {
                let cm = unflatten(dim, arity, c);
                let v = f(&rm, &cm);
                if !field.is_zero(&v) {
                    entries.push((r, c, v));
                }
            }
        }
        Self::from_flat_entries(field, dim, arity, entries)
    }

    /// The flip `P(e_a ⊗ e_b) = e_b ⊗ e_a` on `V^{⊗2}`.
    pub fn permutation(field: &F, dim: usize) -> Self {
        let entries = (0..dim).flat_map(|a| (0..dim).map(move |b| (vec![a, b], vec![b, a])));
        Self::from_entries(field, dim, 2, entries.map(|(r, c)| (r, c, field.one())))
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Side length `N^n` of the matrix.
    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(Vec::is_empty)
    }

    pub fn row(&self, r: usize) -> &[(usize, F::Elem)] {
        &self.rows[r]
    }

    pub fn get_flat(&self, r: usize, c: usize) -> F::Elem {
        match self.rows[r].binary_search_by_key(&c, |(k, _)| *k) {
            Ok(pos) => self.rows[r][pos].1.clone(),
            Err(_) => self.field.zero(),
        }
    }

    pub fn get(&self, row: &[usize], col: &[usize]) -> F::Elem {
        self.get_flat(flatten(self.dim, row), flatten(self.dim, col))
    }

    /// Nonzero entries as `(row, col, value)` over flattened indices, in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &F::Elem)> + '_ {
        self.rows.iter().enumerate().flat_map(|(r, row)| row.iter().map(move |(c, v)| (r, *c, v)))
    }

    fn check_same_shape(&self, other: &Self) -> Result<(), TensorError> {
        if self.dim != other.dim || self.arity != other.arity {
            return Err(TensorError::ShapeMismatch(format!("(N={}, n={}) vs (N={}, n={})", self.dim, self.arity, other.dim, other.arity)));
        }
        Ok(())
    }

    pub fn compose(&self, other: &Self) -> Result<Self, TensorError> {
        self.check_same_shape(other)?;
        let f = &self.field;
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut acc: BTreeMap<usize, F::Elem> = BTreeMap::new();
                for (k, a) in row {
                    for (c, b) in &other.rows[*k] {
                        let prod = f.mul(a, b);
                        match acc.get_mut(c) {
                            Some(slot) => *slot = f.add(slot, &prod),
                            None => {
                                acc.insert(*c, prod);
                            }
                        }
                    }
                }
                acc.into_iter().filter(|(_, v)| !f.is_zero(v)).collect()
            })
            .collect();
        Ok(TensorOperator { field: f.clone(), dim: self.dim, arity: self.arity, rows })
    }

    /// Composes a sequence of operators left to right. Panics on an empty list.
    pub fn product<'a>(ops: impl IntoIterator<Item = &'a Self>) -> Result<Self, TensorError>
    where
        F: 'a,
    {
        let mut it = ops.into_iter();
        let first = it.next().expect("empty product").clone();
        it.try_fold(first, |acc, op| acc.compose(op))
    }

    fn zip_rows(&self, other: &Self, mut op: impl FnMut(Option<&F::Elem>, Option<&F::Elem>) -> F::Elem) -> Self {
        let f = &self.field;
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| {
                let mut out = Vec::with_capacity(a.len().max(b.len()));
                let (mut i, mut j) = (0, 0);
                while i < a.len() || j < b.len() {
                    let (col, v) = match (a.get(i), b.get(j)) {
                        (Some((ca, va)), Some((cb, _))) if ca < cb => {
                            i += 1;
                            (*ca, op(Some(va), None))
                        }
                        (Some((ca, va)), Some((cb, vb))) if ca == cb => {
                            i += 1;
                            j += 1;
                            (*ca, op(Some(va), Some(vb)))
                        }
                        (_, Some((cb, vb))) => {
                            j += 1;
                            (*cb, op(None, Some(vb)))
                        }
                        (Some((ca, va)), None) => {
                            i += 1;
                            (*ca, op(Some(va), None))
                        }
                        (None, None) => unreachable!(),
                    };
                    if !f.is_zero(&v) {
                        out.push((col, v));
                    }
                }
                out
            })
            .collect();
        TensorOperator { field: f.clone(), dim: self.dim, arity: self.arity, rows }
    }

    pub fn add(&self, other: &Self) -> Result<Self, TensorError> {
        self.check_same_shape(other)?;
        let f = self.field.clone();
        Ok(self.zip_rows(other, |a, b| match (a, b) {
            (Some(a), Some(b)) => f.add(a, b),
            (Some(a), None) => a.clone(),
            (None, Some(b)) => b.clone(),
            (None, None) => f.zero(),
        }))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, TensorError> {
        self.check_same_shape(other)?;
        let f = self.field.clone();
        Ok(self.zip_rows(other, |a, b| match (a, b) {
            (Some(a), Some(b)) => f.sub(a, b),
            (Some(a), None) => a.clone(),
            (None, Some(b)) => f.neg(b),
            (None, None) => f.zero(),
        }))
    }

    pub fn scale(&self, c: &F::Elem) -> Self {
        let f = &self.field;
        if f.is_zero(c) {
            return Self::zero(f, self.dim, self.arity);
        }
        let rows = self.rows.iter().map(|row| row.iter().map(|(k, v)| (*k, f.mul(c, v))).collect()).collect();
        TensorOperator { field: f.clone(), dim: self.dim, arity: self.arity, rows }
    }

    pub fn neg(&self) -> Self {
        self.scale(&self.field.neg(&self.field.one()))
    }

    /// First position where `self` and `other` differ, with the residual `self - other`.
    pub fn first_difference(&self, other: &Self) -> Result<Option<Difference<F>>, TensorError> {
        let diff = self.sub(other)?;
        let first = diff.entries().next().map(|(r, c, v)| (r, c, v.clone()));
        Ok(first.map(|(r, c, v)| (unflatten(self.dim, self.arity, r), unflatten(self.dim, self.arity, c), v)))
    }

    /// Places `self` (arity `m`) on slots `slot..slot+m-1` (1-based) of
    /// `V^{⊗total}`, acting as the identity elsewhere.
    pub fn embed(&self, slot: usize, total: usize) -> Result<Self, TensorError> {
        if slot == 0 || slot + self.arity - 1 > total {
            return Err(TensorError::BadSlot(format!("cannot place an arity-{} operator at slot {slot} of {total}", self.arity)));
        }
        let n = self.dim;
        let low_size = n.pow(slot as u32 - 1);
        let mid_size = self.size();
        let high_size = n.pow((total - (slot + self.arity - 1)) as u32);
        let mut rows = Vec::with_capacity(low_size * mid_size * high_size);
        for high in 0..high_size {
            for mid in 0..mid_size {
                for low in 0..low_size {
                    let row = self.rows[mid].iter().map(|(c, v)| (low + low_size * (c + mid_size * high), v.clone())).collect::<Vec<_>>();
                    rows.push(row);
                }
            }
        }
        // columns stay sorted: for fixed (low, high) the map c -> index is increasing
        Ok(TensorOperator { field: self.field.clone(), dim: n, arity: total, rows })
    }

    /// Transpose in the first tensor factor: the result's entry
    /// `(i1 i2; j1 j2)` is the entry `(j1 i2; i1 j2)` of `self`.
    pub fn partial_transpose_slot1(&self) -> Result<Self, TensorError> {
        if self.arity != 2 {
            return Err(TensorError::ShapeMismatch(format!("partial transpose needs arity 2, got {}", self.arity)));
        }
        let n = self.dim;
        let entries = self.entries().map(|(r, c, v)| {
            let (j1, i2) = (r % n, r / n);
            let (i1, j2) = (c % n, c / n);
            (i1 + n * i2, j1 + n * j2, v.clone())
        });
        let entries: Vec<_> = entries.collect();
        Ok(Self::from_flat_entries(&self.field, n, 2, entries))
    }

    /// Ordinary transpose (swap lower and upper multi-indices).
    pub fn transpose(&self) -> Self {
        let entries: Vec<_> = self.entries().map(|(r, c, v)| (c, r, v.clone())).collect();
        Self::from_flat_entries(&self.field, self.dim, self.arity, entries)
    }

    /// Inverse by Gauss-Jordan elimination over the working field.
    pub fn invert(&self) -> Result<Self, TensorError> {
        let f = &self.field;
        let size = self.size();
        let mut a: Vec<Vec<F::Elem>> = (0..size)
            .map(|r| {
                let mut dense = vec![f.zero(); 2 * size];
                for (c, v) in &self.rows[r] {
                    dense[*c] = v.clone();
                }
                dense[size + r] = f.one();
                dense
            })
            .collect();
        for col in 0..size {
            let pivot = (col..size).find(|&r| !f.is_zero(&a[r][col])).ok_or(TensorError::NotInvertible)?;
            a.swap(col, pivot);
            let inv = f.inv(&a[col][col]).ok_or(TensorError::NotInvertible)?;
            for x in a[col].iter_mut() {
                if !f.is_zero(x) {
                    *x = f.mul(x, &inv);
                }
            }
            let pivot_row = a[col].clone();
            for (r, row) in a.iter_mut().enumerate() {
                if r == col || f.is_zero(&row[col]) {
                    continue;
                }
                let factor = row[col].clone();
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    if !f.is_zero(p) {
                        *x = f.sub(x, &f.mul(&factor, p));
                    }
                }
            }
        }
        let entries: Vec<_> = a
            .into_iter()
            .enumerate()
            .flat_map(|(r, row)| row.into_iter().skip(size).enumerate().map(move |(c, v)| (r, c, v)).collect::<Vec<_>>())
            .collect();
        Ok(Self::from_flat_entries(f, self.dim, self.arity, entries))
    }

    pub fn trace_full(&self) -> F::Elem {
        let f = &self.field;
        (0..self.size()).fold(f.zero(), |acc, r| f.add(&acc, &self.get_flat(r, r)))
    }

    /// Ordinary partial trace over the given 1-based slots.
    pub fn trace_slots(&self, slots: &[usize]) -> Result<Self, TensorError> {
        let mut traced = vec![false; self.arity];
        for &s in slots {
            if s == 0 || s > self.arity || traced[s - 1] {
                return Err(TensorError::BadSlot(format!("bad slot list {slots:?} for arity {}", self.arity)));
            }
            traced[s - 1] = true;
        }
        let kept: Vec<usize> = (0..self.arity).filter(|&s| !traced[s]).collect();
        let n = self.dim;
        let mut entries = Vec::new();
        for (r, c, v) in self.entries() {
            let rm = unflatten(n, self.arity, r);
            let cm = unflatten(n, self.arity, c);
            if (0..self.arity).all(|s| !traced[s] || rm[s] == cm[s]) {
                let rr: Vec<usize> = kept.iter().map(|&s| rm[s]).collect();
                let cc: Vec<usize> = kept.iter().map(|&s| cm[s]).collect();
                entries.push((flatten(n, &rr), flatten(n, &cc), v.clone()));
            }
        }
        Ok(Self::from_flat_entries(&self.field, n, kept.len(), entries))
    }

    pub fn is_idempotent(&self) -> bool {
        self.compose(self).map(|sq| sq == *self).unwrap_or(false)
    }

    /// Rank of an idempotent, read off from its trace.
    pub fn idempotent_rank(&self) -> Result<i64, TensorError> {
        if !self.is_idempotent() {
            return Err(TensorError::NotIdempotent);
        }
        let t = self.trace_full();
        match self.field.as_integer(&t) {
            Some(k) if k >= 0 && (k as u128) <= self.size() as u128 => Ok(k),
            _ => Err(TensorError::NotAnInteger(self.field.render(&t))),
        }
    }

    /// Factors a rank-one idempotent as `u v` with `v·u = 1`.
    ///
    /// `u` is the first nonzero column scaled so its first nonzero entry is 1;
    /// `v` is the matching row.
    pub fn rank1_factor(&self) -> Result<(CoTensor<F>, ContraTensor<F>), TensorError> {
        let rank = self.idempotent_rank()?;
        if rank != 1 {
            return Err(TensorError::RankNotOne(rank));
        }
        let f = &self.field;
        let col = self.entries().map(|(_, c, _)| c).min().expect("rank one operator is nonzero");
        let column: Vec<F::Elem> = (0..self.size()).map(|r| self.get_flat(r, col)).collect();
        let lead = column.iter().position(|x| !f.is_zero(x)).expect("nonzero column");
        let inv = f.inv(&column[lead]).expect("nonzero pivot");
        let u: Vec<F::Elem> = column.iter().map(|x| f.mul(x, &inv)).collect();
        let mut v = vec![f.zero(); self.size()];
        for (c, x) in &self.rows[lead] {
            v[*c] = x.clone();
        }
        let u = CoTensor { field: f.clone(), dim: self.dim, rank: self.arity, data: u };
        let v = ContraTensor { field: f.clone(), dim: self.dim, rank: self.arity, data: v };
        if u.outer(&v) != *self {
            return Err(TensorError::RankNotOne(rank));
        }
        let pairing = v.pair(&u)?;
        if !f.is_one(&pairing) {
            // trace is 1, so this only happens for inconsistent input
            return Err(TensorError::NotAnInteger(f.render(&pairing)));
        }
        Ok((u, v))
    }

    /// `A u` for a column vector `u`.
    pub fn apply(&self, u: &CoTensor<F>) -> Result<CoTensor<F>, TensorError> {
        if u.dim != self.dim || u.rank != self.arity {
            return Err(TensorError::ShapeMismatch("operator/vector".into()));
        }
        let f = &self.field;
        let data = self.rows.iter().map(|row| row.iter().fold(f.zero(), |acc, (c, a)| f.add(&acc, &f.mul(a, &u.data[*c])))).collect();
        Ok(CoTensor { field: f.clone(), dim: self.dim, rank: self.arity, data })
    }
}

/// A column vector `u_{i_1...i_p}` (lower indices).
#[derive(Clone, Debug)]
pub struct CoTensor<F: Field> {
    field: F,
    dim: usize,
    rank: usize,
    data: Vec<F::Elem>,
}

/// A row vector `v^{j_1...j_p}` (upper indices).
#[derive(Clone, Debug)]
pub struct ContraTensor<F: Field> {
    field: F,
    dim: usize,
    rank: usize,
    data: Vec<F::Elem>,
}

impl<F: Field> PartialEq for CoTensor<F> {
    fn eq(&self, o: &Self) -> bool {
        self.dim == o.dim && self.rank == o.rank && self.data == o.data
    }
}

impl<F: Field> PartialEq for ContraTensor<F> {
    fn eq(&self, o: &Self) -> bool {
        self.dim == o.dim && self.rank == o.rank && self.data == o.data
    }
}

macro_rules! vector_common {
    ($t:ident) => {
        impl<F: Field> $t<F> {
            pub fn new(field: &F, dim: usize, rank: usize, data: Vec<F::Elem>) -> Self {
                assert_eq!(data.len(), dim.pow(rank as u32), "vector length must be N^p");
                $t { field: field.clone(), dim, rank, data }
            }

            pub fn dim(&self) -> usize {
                self.dim
            }

            pub fn rank(&self) -> usize {
                self.rank
            }

            /// Entries indexed by flattened multi-index.
            pub fn data(&self) -> &[F::Elem] {
                &self.data
            }

            pub fn get(&self, multi: &[usize]) -> &F::Elem {
                &self.data[flatten(self.dim, multi)]
            }

            pub fn scale(&self, c: &F::Elem) -> Self {
                let data = self.data.iter().map(|x| self.field.mul(c, x)).collect();
                $t { field: self.field.clone(), dim: self.dim, rank: self.rank, data }
            }

            pub fn is_zero(&self) -> bool {
                self.data.iter().all(|x| self.field.is_zero(x))
            }

            /// Nonzero entries with their multi-indices.
            pub fn support(&self) -> Vec<(Vec<usize>, F::Elem)> {
                self.data
                    .iter()
                    .enumerate()
                    .filter(|(_, x)| !self.field.is_zero(x))
                    .map(|(i, x)| (unflatten(self.dim, self.rank, i), x.clone()))
                    .collect()
            }
        }
    };
}
vector_common!(CoTensor);
vector_common!(ContraTensor);

impl<F: Field> CoTensor<F> {
    /// The operator `u v` with entries `u_i v^j`.
    pub fn outer(&self, v: &ContraTensor<F>) -> TensorOperator<F> {
        let f = &self.field;
        let rows = self
            .data
            .iter()
            .map(|a| {
                if f.is_zero(a) {
                    Vec::new()
                } else {
                    v.data.iter().enumerate().filter(|(_, b)| !f.is_zero(b)).map(|(c, b)| (c, f.mul(a, b))).collect()
                }
            })
            .collect();
        TensorOperator { field: f.clone(), dim: self.dim, arity: self.rank, rows }
    }
}

impl<F: Field> ContraTensor<F> {
    /// `v u = sum_i v^i u_i`.
    pub fn pair(&self, u: &CoTensor<F>) -> Result<F::Elem, TensorError> {
        if self.dim != u.dim || self.rank != u.rank {
            return Err(TensorError::ShapeMismatch("pairing".into()));
        }
        let f = &self.field;
        Ok(self.data.iter().zip(&u.data).fold(f.zero(), |acc, (a, b)| f.add(&acc, &f.mul(a, b))))
    }

    /// `v A` for an operator `A`.
    pub fn apply(&self, op: &TensorOperator<F>) -> Result<Self, TensorError> {
        if op.dim != self.dim || op.arity != self.rank {
            return Err(TensorError::ShapeMismatch("vector/operator".into()));
        }
        let f = &self.field;
        let mut data = vec![f.zero(); self.data.len()];
        for (r, a) in self.data.iter().enumerate() {
            if f.is_zero(a) {
                continue;
            }
            for (c, x) in op.row(r) {
                data[*c] = f.add(&data[*c], &f.mul(a, x));
            }
        }
        Ok(ContraTensor { field: f.clone(), dim: self.dim, rank: self.rank, data })
    }
}
