//! Noncommutative polynomials in the generators `L_i^j` of the reflection
//! equation algebra, and exact membership in the two-sided ideal generated by
//! the reflection equation `R L_1 R L_1 = L_1 R L_1 R`.
//!
//! The relations are homogeneous of degree two, so the ideal is graded and an
//! identity of degree `d` holds in the quotient exactly when its defect lies in
//! the span of `m_L r m_R` with `deg m_L + deg m_R = d - 2`. That span is
//! computed in reduced row-echelon form over the monomial basis of degree `d`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use crate::error::AlgebraError;
use crate::field::Field;
use crate::hecke::HeckeSymmetry;
use crate::tensor::{flatten, unflatten, CoTensor, ContraTensor, TensorOperator};

/// The generator `L_row^col` (0-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Generator {
    pub row: usize,
    pub col: usize,
}

impl Generator {
    pub fn index(self, dim: usize) -> u8 {
        (self.row * dim + self.col) as u8
    }

    pub fn from_index(idx: u8, dim: usize) -> Self {
        Generator { row: idx as usize / dim, col: idx as usize % dim }
    }
}

/// A word in the generators; the empty word is the unit.
///
/// Ordered degree-lexicographically on row-major generator indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct NCMonomial(Vec<u8>);

impl NCMonomial {
    pub fn unit() -> Self {
        NCMonomial(Vec::new())
    }

    pub fn from_letters(letters: Vec<u8>) -> Self {
        NCMonomial(letters)
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut w = Vec::with_capacity(self.0.len() + other.0.len());
        w.extend_from_slice(&self.0);
        w.extend_from_slice(&other.0);
        NCMonomial(w)
    }

    /// Position in the basis of degree-`len` words over `gens` letters.
    fn rank_in_degree(&self, gens: usize) -> usize {
        self.0.iter().fold(0, |acc, &g| acc * gens + g as usize)
    }

    fn from_rank(mut idx: usize, gens: usize, degree: usize) -> Self {
        let mut w = vec![0u8; degree];
        for slot in w.iter_mut().rev() {
            *slot = (idx % gens) as u8;
            idx /= gens;
        }
        NCMonomial(w)
    }
}

impl Ord for NCMonomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for NCMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A noncommutative polynomial with coefficients in `F`.
#[derive(Clone, Debug)]
pub struct NCPoly<F: Field> {
    field: F,
    dim: usize,
    terms: BTreeMap<NCMonomial, F::Elem>,
}

impl<F: Field> PartialEq for NCPoly<F> {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.terms == other.terms
    }
}

impl<F: Field> NCPoly<F> {
    pub fn zero(field: &F, dim: usize) -> Self {
        NCPoly { field: field.clone(), dim, terms: BTreeMap::new() }
    }

    pub fn constant(field: &F, dim: usize, c: F::Elem) -> Self {
        Self::term(field, dim, NCMonomial::unit(), c)
    }

    pub fn one(field: &F, dim: usize) -> Self {
        Self::constant(field, dim, field.one())
    }

    pub fn term(field: &F, dim: usize, m: NCMonomial, c: F::Elem) -> Self {
        let mut p = Self::zero(field, dim);
        if !field.is_zero(&c) {
            p.terms.insert(m, c);
        }
        p
    }

    /// The generator `L_row^col` (0-based).
    pub fn generator(field: &F, dim: usize, row: usize, col: usize) -> Self {
        assert!(row < dim && col < dim, "generator index out of range");
        let g = Generator { row, col }.index(dim);
        Self::term(field, dim, NCMonomial(vec![g]), field.one())
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&NCMonomial, &F::Elem)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &NCMonomial) -> F::Elem {
        self.terms.get(m).cloned().unwrap_or_else(|| self.field.zero())
    }

    /// `Some(d)` if every term has degree `d`; `None` for mixed degrees.
    /// The zero polynomial is homogeneous of every degree and reports `Some(0)`.
    pub fn homogeneous_degree(&self) -> Option<usize> {
        let mut degs = self.terms.keys().map(NCMonomial::degree);
        match degs.next() {
            None => Some(0),
            Some(d) => degs.all(|e| e == d).then_some(d),
        }
    }

    fn check_dim(&self, other: &Self) {
        assert_eq!(self.dim, other.dim, "polynomials over different generator sets");
    }

    fn add_term(&mut self, m: NCMonomial, c: F::Elem) {
        if self.field.is_zero(&c) {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(slot) => {
                let s = self.field.add(slot, &c);
                if self.field.is_zero(&s) {
                    self.terms.remove(&m);
                } else {
                    *slot = s;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        self.check_dim(other);
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c.clone());
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let f = &self.field;
        NCPoly { field: f.clone(), dim: self.dim, terms: self.terms.iter().map(|(m, c)| (m.clone(), f.neg(c))).collect() }
    }

    pub fn scale(&self, c: &F::Elem) -> Self {
        let f = &self.field;
        if f.is_zero(c) {
            return Self::zero(f, self.dim);
        }
        NCPoly { field: f.clone(), dim: self.dim, terms: self.terms.iter().map(|(m, x)| (m.clone(), f.mul(c, x))).collect() }
    }

    /// Concatenation product; not commutative.
    pub fn mul(&self, other: &Self) -> Self {
        self.check_dim(other);
        let f = &self.field;
        let mut out = Self::zero(f, self.dim);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.concat(mb), f.mul(ca, cb));
            }
        }
        out
    }

    /// `self * other - other * self`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    /// Maps coefficients through a field homomorphism.
    pub fn map_field<G: Field>(&self, target: &G, mut f: impl FnMut(&F::Elem) -> G::Elem) -> NCPoly<G> {
        let mut out = NCPoly::zero(target, self.dim);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    pub fn render(&self) -> String {
        self.to_string()
    }
}

impl<F: Field> fmt::Display for NCPoly<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({})", self.field.render(c))?;
            for &g in &m.0 {
                let g = Generator::from_index(g, self.dim);
                write!(f, "*L{}{}", g.row + 1, g.col + 1)?;
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------

/// An operator on `V^{⊗n}` whose entries are noncommutative polynomials.
///
/// Products multiply entries in the order of the factors:
/// `(XY)_i^j = sum_k X_i^k Y_k^j`.
#[derive(Clone, Debug)]
pub struct NcOperator<F: Field> {
    field: F,
    dim: usize,
    arity: usize,
    rows: Vec<BTreeMap<usize, NCPoly<F>>>,
}

impl<F: Field> PartialEq for NcOperator<F> {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.arity == other.arity && self.rows == other.rows
    }
}

impl<F: Field> NcOperator<F> {
    pub fn zero(field: &F, dim: usize, arity: usize) -> Self {
        NcOperator { field: field.clone(), dim, arity, rows: vec![BTreeMap::new(); dim.pow(arity as u32)] }
    }

    /// The generator matrix `L` (arity 1) placed on slot 1 of `V^{⊗arity}`.
    pub fn generators_on_first(field: &F, dim: usize, arity: usize) -> Self {
        let mut op = Self::zero(field, dim, arity);
        let rest = dim.pow(arity as u32 - 1);
        for high in 0..rest {
            for i in 0..dim {
                for j in 0..dim {
                    op.rows[i + dim * high].insert(j + dim * high, NCPoly::generator(field, dim, i, j));
                }
            }
        }
        op
    }

    /// Builds an operator from `(row, col, entry)` triples; repeated positions add.
    pub fn from_entries(field: &F, dim: usize, arity: usize, entries: impl IntoIterator<Item = (usize, usize, NCPoly<F>)>) -> Self {
        let mut op = Self::zero(field, dim, arity);
        for (r, c, p) in entries {
            Self::insert_add(&mut op.rows[r], c, p);
        }
        op
    }

    /// A scalar operator viewed as having constant polynomial entries.
    pub fn from_scalar(op: &TensorOperator<F>) -> Self {
        let f = op.field();
        let mut out = Self::zero(f, op.dim(), op.arity());
        for (r, c, v) in op.entries() {
            out.rows[r].insert(c, NCPoly::constant(f, op.dim(), v.clone()));
        }
        out
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

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn get_flat(&self, r: usize, c: usize) -> NCPoly<F> {
        self.rows[r].get(&c).cloned().unwrap_or_else(|| NCPoly::zero(&self.field, self.dim))
    }

    pub fn get(&self, row: &[usize], col: &[usize]) -> NCPoly<F> {
        self.get_flat(flatten(self.dim, row), flatten(self.dim, col))
    }

    /// Nonzero entries with flattened positions.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &NCPoly<F>)> + '_ {
        self.rows.iter().enumerate().flat_map(|(r, row)| row.iter().map(move |(c, p)| (r, *c, p)))
    }

    fn insert_add(row: &mut BTreeMap<usize, NCPoly<F>>, c: usize, p: NCPoly<F>) {
        if p.is_zero() {
            return;
        }
        match row.get_mut(&c) {
            Some(slot) => {
                slot.add_assign(&p);
                if slot.is_zero() {
                    row.remove(&c);
                }
            }
            None => {
                row.insert(c, p);
            }
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert!(self.dim == other.dim && self.arity == other.arity, "shape mismatch");
        let rows = self
            .rows
            .par_iter()
            .map(|row| {
                let mut acc = BTreeMap::new();
                for (k, a) in row {
                    for (c, b) in &other.rows[*k] {
                        Self::insert_add(&mut acc, *c, a.mul(b));
                    }
                }
                acc
            })
            .collect();
        NcOperator { field: self.field.clone(), dim: self.dim, arity: self.arity, rows }
    }

    /// `self * op` for a scalar operator.
    pub fn mul_scalar_right(&self, op: &TensorOperator<F>) -> Self {
        assert!(self.dim == op.dim() && self.arity == op.arity(), "shape mismatch");
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut acc = BTreeMap::new();
                for (k, a) in row {
                    for (c, s) in op.row(*k) {
                        Self::insert_add(&mut acc, *c, a.scale(s));
                    }
                }
                acc
            })
            .collect();
        NcOperator { field: self.field.clone(), dim: self.dim, arity: self.arity, rows }
    }

    /// `op * self` for a scalar operator.
    pub fn mul_scalar_left(&self, op: &TensorOperator<F>) -> Self {
        assert!(self.dim == op.dim() && self.arity == op.arity(), "shape mismatch");
        let rows = (0..self.size())
            .map(|r| {
                let mut acc = BTreeMap::new();
                for (k, s) in op.row(r) {
                    for (c, a) in &self.rows[*k] {
                        Self::insert_add(&mut acc, *c, a.scale(s));
                    }
                }
                acc
            })
            .collect();
        NcOperator { field: self.field.clone(), dim: self.dim, arity: self.arity, rows }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (r, row) in other.rows.iter().enumerate() {
            for (c, p) in row {
                Self::insert_add(&mut out.rows[r], *c, p.neg());
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (r, row) in other.rows.iter().enumerate() {
            for (c, p) in row {
                Self::insert_add(&mut out.rows[r], *c, p.clone());
            }
        }
        out
    }

    pub fn scale(&self, s: &F::Elem) -> Self {
        let mut out = Self::zero(&self.field, self.dim, self.arity);
        for (r, c, p) in self.entries() {
            Self::insert_add(&mut out.rows[r], c, p.scale(s));
        }
        out
    }

    /// The diagonal operator with every diagonal entry equal to `p`.
    pub fn diagonal(field: &F, dim: usize, arity: usize, p: &NCPoly<F>) -> Self {
        let mut out = Self::zero(field, dim, arity);
        for (r, row) in out.rows.iter_mut().enumerate() {
            if !p.is_zero() {
                row.insert(r, p.clone());
            }
        }
        out
    }

    pub fn identity(field: &F, dim: usize, arity: usize) -> Self {
        Self::diagonal(field, dim, arity, &NCPoly::one(field, dim))
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(BTreeMap::is_empty)
    }
}

/// A row vector `w^{j_1...j_p}` with polynomial entries.
#[derive(Clone, Debug, PartialEq)]
pub struct NcRow<F: Field>(pub Vec<NCPoly<F>>);

/// A column vector `w_{i_1...i_p}` with polynomial entries.
#[derive(Clone, Debug, PartialEq)]
pub struct NcColumn<F: Field>(pub Vec<NCPoly<F>>);

impl<F: Field> NcRow<F> {
    pub fn from_contra(v: &ContraTensor<F>, field: &F) -> Self {
        NcRow(v.data().iter().map(|x| NCPoly::constant(field, v.dim(), x.clone())).collect())
    }

    /// `w X`, entries multiplied as `w^k X_k^j`.
    pub fn mul_op(&self, op: &NcOperator<F>) -> Self {
        let f = &op.field;
        let mut out: Vec<NCPoly<F>> = vec![NCPoly::zero(f, op.dim); op.size()];
        for (k, w) in self.0.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            for (c, x) in &op.rows[k] {
                out[*c].add_assign(&w.mul(x));
            }
        }
        NcRow(out)
    }

    pub fn mul_scalar_op(&self, op: &TensorOperator<F>) -> Self {
        let f = op.field();
        let mut out: Vec<NCPoly<F>> = vec![NCPoly::zero(f, op.dim()); op.size()];
        for (k, w) in self.0.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            for (c, s) in op.row(k) {
                out[*c].add_assign(&w.scale(s));
            }
        }
        NcRow(out)
    }

    /// `w u`.
    pub fn pair(&self, u: &CoTensor<F>) -> NCPoly<F> {
        let mut acc = NCPoly::zero(self.0[0].field(), u.dim());
        for (w, x) in self.0.iter().zip(u.data()) {
            acc.add_assign(&w.scale(x));
        }
        acc
    }

    pub fn add(&self, other: &Self) -> Self {
        NcRow(self.0.iter().zip(&other.0).map(|(a, b)| a.add(b)).collect())
    }

    pub fn scale(&self, s: &F::Elem) -> Self {
        NcRow(self.0.iter().map(|a| a.scale(s)).collect())
    }
}

impl<F: Field> NcColumn<F> {
    pub fn from_co(u: &CoTensor<F>, field: &F) -> Self {
        NcColumn(u.data().iter().map(|x| NCPoly::constant(field, u.dim(), x.clone())).collect())
    }

    /// `X w`, entries multiplied as `X_i^k w_k`.
    pub fn op_mul(op: &NcOperator<F>, w: &Self) -> Self {
        NcColumn(
            op.rows
                .iter()
                .map(|row| {
                    let mut acc = NCPoly::zero(&op.field, op.dim);
                    for (k, x) in row {
                        acc.add_assign(&x.mul(&w.0[*k]));
                    }
                    acc
                })
                .collect(),
        )
    }

    pub fn scalar_op_mul(op: &TensorOperator<F>, w: &Self) -> Self {
        NcColumn(
            (0..op.size())
                .map(|r| {
                    let mut acc = NCPoly::zero(op.field(), op.dim());
                    for (k, s) in op.row(r) {
                        acc.add_assign(&w.0[*k].scale(s));
                    }
                    acc
                })
                .collect(),
        )
    }

    /// `v w`.
    pub fn pair(v: &ContraTensor<F>, w: &Self) -> NCPoly<F> {
        let mut acc = NCPoly::zero(w.0[0].field(), v.dim());
        for (x, p) in v.data().iter().zip(&w.0) {
            acc.add_assign(&p.scale(x));
        }
        acc
    }

    pub fn add(&self, other: &Self) -> Self {
        NcColumn(self.0.iter().zip(&other.0).map(|(a, b)| a.add(b)).collect())
    }

    pub fn scale(&self, s: &F::Elem) -> Self {
        NcColumn(self.0.iter().map(|a| a.scale(s)).collect())
    }
}

// ---------------------------------------------------------------------------

/// The `N^4` entries of `R L_1 R L_1 - L_1 R L_1 R`, zero entries dropped.
pub fn re_relations<F: Field>(h: &HeckeSymmetry<F>) -> Vec<NCPoly<F>> {
    re_relations_for(h.r())
}

/// Reflection-equation relations for an arbitrary arity-2 operator.
pub fn re_relations_for<F: Field>(r: &TensorOperator<F>) -> Vec<NCPoly<F>> {
    let f = r.field();
    let l1 = NcOperator::generators_on_first(f, r.dim(), 2);
    let l1r = l1.mul_scalar_right(r);
    let lhs = l1r.mul(&l1).mul_scalar_left(r);
    let rhs = l1r.mul(&l1r);
    let diff = lhs.sub(&rhs);
    let size = diff.size();
    let mut out = Vec::new();
    for row in 0..size {
        for col in 0..size {
            let p = diff.get_flat(row, col);
            if !p.is_zero() {
                out.push(p);
            }
        }
    }
    out
}

/// Default cap on the number of degree-`d` monomials an ideal component may use.
pub const DEFAULT_COLUMN_CAP: usize = 20_000;

type SparseRow<E> = Vec<(usize, E)>;

/// Reduced row-echelon basis of the degree-`d` component of a graded ideal.
#[derive(Clone, Debug)]
pub struct IdealBasisAtDegree<F: Field> {
    field: F,
    dim: usize,
    degree: usize,
    columns: usize,
    rows: Vec<SparseRow<F::Elem>>,
    /// `pivot_row[c]` is the row whose leading column is `c`.
    pivot_row: Vec<Option<usize>>,
}

/// Result of a membership query.
#[derive(Clone, Debug)]
pub struct Membership<F: Field> {
    pub member: bool,
    /// Normal form of the query modulo the ideal component; zero iff `member`.
    pub residual: NCPoly<F>,
}

impl<F: Field> IdealBasisAtDegree<F> {
    fn empty(field: &F, dim: usize, degree: usize) -> Self {
        let columns = (dim * dim).pow(degree as u32);
        IdealBasisAtDegree { field: field.clone(), dim, degree, columns, rows: Vec::new(), pivot_row: vec![None; columns] }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Dimension of the ideal component.
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Number of degree-`d` monomials.
    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn pivots(&self) -> Vec<usize> {
        let mut p: Vec<usize> = self.rows.iter().map(|r| r[0].0).collect();
        p.sort_unstable();
        p
    }

    /// Row `i` of the echelon form as a polynomial.
    pub fn row_poly(&self, i: usize) -> NCPoly<F> {
        self.vector_to_poly(self.rows[i].iter().map(|(c, v)| (*c, v.clone())))
    }

    fn gens(&self) -> usize {
        self.dim * self.dim
    }

    fn vector_to_poly(&self, entries: impl Iterator<Item = (usize, F::Elem)>) -> NCPoly<F> {
        let mut p = NCPoly::zero(&self.field, self.dim);
        for (c, v) in entries {
            p.add_term(NCMonomial::from_rank(c, self.gens(), self.degree), v);
        }
        p
    }

    fn poly_to_dense(&self, p: &NCPoly<F>) -> Result<Vec<F::Elem>, AlgebraError> {
        if p.dim != self.dim {
            return Err(AlgebraError::DimensionMismatch(p.dim, self.dim));
        }
        let mut dense = vec![self.field.zero(); self.columns];
        for (m, c) in p.terms() {
            if m.degree() != self.degree {
                return Err(AlgebraError::DegreeMismatch { expected: self.degree, found: m.degree().to_string() });
            }
            dense[m.rank_in_degree(self.gens())] = c.clone();
        }
        Ok(dense)
    }

    /// Reduces a dense vector to normal form in place.
    fn reduce(&self, v: &mut [F::Elem]) {
        let f = &self.field;
        for c in 0..self.columns {
            if f.is_zero(&v[c]) {
                continue;
            }
            if let Some(ri) = self.pivot_row[c] {
                let coef = v[c].clone();
                for (cc, x) in &self.rows[ri] {
                    v[*cc] = f.sub(&v[*cc], &f.mul(&coef, x));
                }
            }
        }
    }

    /// Adds a vector to the span, keeping the basis fully reduced. Returns true
    /// if the span grew.
    fn insert(&mut self, mut v: Vec<F::Elem>) -> bool {
        self.reduce(&mut v);
        let f = self.field.clone();
        let Some(pivot) = v.iter().position(|x| !f.is_zero(x)) else {
            return false;
        };
        let inv = f.inv(&v[pivot]).expect("nonzero pivot");
        let new_row: SparseRow<F::Elem> =
            v.iter().enumerate().skip(pivot).filter(|(_, x)| !f.is_zero(x)).map(|(c, x)| (c, f.mul(x, &inv))).collect();
        for row in self.rows.iter_mut() {
            if let Ok(pos) = row.binary_search_by_key(&pivot, |(c, _)| *c) {
                let coef = row[pos].1.clone();
                *row = axpy_sparse(&f, row, &coef, &new_row);
            }
        }
        self.pivot_row[pivot] = Some(self.rows.len());
        self.rows.push(new_row);
        true
    }

    /// Exact membership test with a normal-form certificate.
    pub fn is_member(&self, p: &NCPoly<F>) -> Result<Membership<F>, AlgebraError> {
        if p.is_zero() {
            return Ok(Membership { member: true, residual: p.clone() });
        }
        let mut dense = self.poly_to_dense(p)?;
        self.reduce(&mut dense);
        let f = &self.field;
        let residual = self.vector_to_poly(dense.into_iter().enumerate().filter(|(_, x)| !f.is_zero(x)));
        Ok(Membership { member: residual.is_zero(), residual })
    }
}

/// `row - coef * other` for sparse rows sorted by column.
fn axpy_sparse<F: Field>(f: &F, row: &[(usize, F::Elem)], coef: &F::Elem, other: &[(usize, F::Elem)]) -> SparseRow<F::Elem> {
    let mut out = Vec::with_capacity(row.len() + other.len());
    let (mut i, mut j) = (0, 0);
    while i < row.len() || j < other.len() {
        match (row.get(i), other.get(j)) {
            (Some((a, x)), Some((b, _))) if a < b => {
                out.push((*a, x.clone()));
                i += 1;
            }
            (Some((a, x)), Some((b, y))) if a == b => {
                let v = f.sub(x, &f.mul(coef, y));
                if !f.is_zero(&v) {
                    out.push((*a, v));
                }
                i += 1;
                j += 1;
            }
            (_, Some((b, y))) => {
                out.push((*b, f.neg(&f.mul(coef, y))));
                j += 1;
            }
            (Some((a, x)), None) => {
                out.push((*a, x.clone()));
                i += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

/// Echelon basis of the degree-`degree` component of the two-sided ideal
/// generated by homogeneous quadratic `relations`.
///
/// `column_cap` bounds the number of degree-`degree` monomials.
pub fn ideal_component<F: Field>(
    field: &F,
    dim: usize,
    relations: &[NCPoly<F>],
    degree: usize,
    column_cap: usize,
) -> Result<IdealBasisAtDegree<F>, AlgebraError> {
    if degree < 2 {
        return Err(AlgebraError::OutOfRange(format!("ideal components start at degree 2, got {degree}")));
    }
    let gens = dim * dim;
    let columns = (gens as u128).pow(degree as u32);
    if columns > column_cap as u128 {
        return Err(AlgebraError::Resource { degree, columns, cap: column_cap });
    }
    for r in relations {
        if r.dim != dim {
            return Err(AlgebraError::DimensionMismatch(r.dim, dim));
        }
        if r.homogeneous_degree() != Some(2) {
            return Err(AlgebraError::DegreeMismatch { expected: 2, found: format!("{:?}", r.homogeneous_degree()) });
        }
    }
    let mut base = IdealBasisAtDegree::empty(field, dim, 2);
    for r in relations {
        let v = base.poly_to_dense(r)?;
        base.insert(v);
    }
    if degree == 2 {
        return Ok(base);
    }
    let quad: Vec<Vec<(usize, F::Elem)>> = base.rows.clone();
    let mut out = IdealBasisAtDegree::empty(field, dim, degree);
    let outer = degree - 2;
    // m_L r m_R with deg m_L = a, deg m_R = outer - a
    let jobs: Vec<(usize, usize, usize)> =
        (0..quad.len()).flat_map(|ri| (0..=outer).flat_map(move |a| (0..gens.pow(outer as u32)).map(move |w| (ri, a, w)))).collect();
    let vectors: Vec<Vec<F::Elem>> = jobs
        .par_iter()
        .map(|&(ri, a, w)| {
            let b = outer - a;
            let left = w / gens.pow(b as u32);
            let right = w % gens.pow(b as u32);
            let mut dense = vec![field.zero(); out.columns];
            for (c, x) in &quad[ri] {
                // index of left · m · right in big-endian word order
                let idx = (left * gens * gens + c) * gens.pow(b as u32) + right;
                dense[idx] = x.clone();
            }
            dense
        })
        .collect();
    for v in vectors {
        out.insert(v);
    }
    Ok(out)
}

/// Ideal components for several degrees sharing one relation set.
pub fn ideal_components<F: Field>(
    field: &F,
    dim: usize,
    relations: &[NCPoly<F>],
    degrees: &[usize],
    column_cap: usize,
) -> Result<BTreeMap<usize, IdealBasisAtDegree<F>>, AlgebraError> {
    degrees.par_iter().map(|&d| ideal_component(field, dim, relations, d, column_cap).map(|b| (d, b))).collect()
}

/// Components of a quadratic graded ideal at a chosen set of degrees.
///
/// Below degree 2 the ideal is zero, so membership there is equality with 0.
#[derive(Clone, Debug)]
pub struct GradedIdeal<F: Field> {
    field: F,
    dim: usize,
    components: BTreeMap<usize, IdealBasisAtDegree<F>>,
}

impl<F: Field> GradedIdeal<F> {
    /// Builds the components for `degrees`; degrees below 2 need no storage.
    pub fn new(field: &F, dim: usize, relations: &[NCPoly<F>], degrees: &[usize], column_cap: usize) -> Result<Self, AlgebraError> {
        let mut wanted: Vec<usize> = degrees.iter().copied().filter(|&d| d >= 2).collect();
        wanted.sort_unstable();
        wanted.dedup();
        let components = ideal_components(field, dim, relations, &wanted, column_cap)?;
        Ok(GradedIdeal { field: field.clone(), dim, components })
    }

    /// The ideal generated by the reflection equation of `h`.
    pub fn reflection_equation(h: &HeckeSymmetry<F>, degrees: &[usize], column_cap: usize) -> Result<Self, AlgebraError> {
        Self::new(h.field(), h.dim(), &re_relations(h), degrees, column_cap)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn component(&self, degree: usize) -> Option<&IdealBasisAtDegree<F>> {
        self.components.get(&degree)
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.components.keys().copied().collect()
    }

    /// Membership of a homogeneous polynomial.
    pub fn contains(&self, p: &NCPoly<F>) -> Result<Membership<F>, AlgebraError> {
        if p.is_zero() {
            return Ok(Membership { member: true, residual: p.clone() });
        }
        let d = p.homogeneous_degree().ok_or_else(|| AlgebraError::DegreeMismatch { expected: 0, found: "mixed".into() })?;
        if d < 2 {
            return Ok(Membership { member: false, residual: p.clone() });
        }
        match self.components.get(&d) {
            Some(b) => b.is_member(p),
            None => Err(AlgebraError::OutOfRange(format!("no ideal component built for degree {d}"))),
        }
    }

    pub fn field(&self) -> &F {
        &self.field
    }
}

/// Multi-index helper for callers that walk operator entries.
pub fn multi_index(dim: usize, arity: usize, flat: usize) -> Vec<usize> {
    unflatten(dim, arity, flat)
}
