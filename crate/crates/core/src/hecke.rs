//! Hecke symmetries and the structure they carry: antisymmetrizers, rank,
//! Levi-Civita tensors, the matrices `C` and `B`, and the quantum trace.
//!
//! A Hecke symmetry is an operator `R` on `V^{⊗2}` satisfying the braid
//! relation `R_12 R_23 R_12 = R_23 R_12 R_23` and `R^2 = I + λR` with
//! `λ = q - 1/q`. It is closed when the partial transpose of `P R` is
//! invertible, and even of rank `p` when the `(p+1)`-st antisymmetrizer
//! vanishes while the `p`-th has a one-dimensional image.

use crate::error::{HeckeError, TensorError};
use crate::field::Field;
use crate::tensor::{CoTensor, ContraTensor, TensorOperator};

type Op<F> = TensorOperator<F>;
type Residual = (Vec<usize>, Vec<usize>, String);

/// A validated R-matrix together with whatever structure has been derived so far.
#[derive(Clone, Debug)]
pub struct HeckeSymmetry<F: Field> {
    field: F,
    r: Op<F>,
    r_inv: Op<F>,
    q: F::Elem,
    lambda: F::Elem,
    closed: Option<Op<F>>,
    rank: Option<usize>,
    antisym: Vec<Op<F>>,
}

/// Quantum-trace data of a closed even symmetry.
#[derive(Clone, Debug)]
pub struct TraceData<F: Field> {
    pub c: Op<F>,
    pub b: Op<F>,
    pub u: CoTensor<F>,
    pub v: ContraTensor<F>,
}

/// Outcome of one identity check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityCheck {
    pub name: String,
    pub holds: bool,
    pub detail: Option<String>,
}

impl IdentityCheck {
    fn from_diff<F: Field>(name: &str, lhs: &Op<F>, rhs: &Op<F>) -> Result<Self, HeckeError> {
        let detail = lhs.first_difference(rhs)?.map(|(r, c, res)| {
            format!("first mismatch at row {:?}, column {:?}: residual {}", one_based(&r), one_based(&c), lhs.field().render(&res))
        });
        Ok(IdentityCheck { name: name.to_string(), holds: detail.is_none(), detail })
    }

    fn scalar<F: Field>(name: &str, f: &F, lhs: &F::Elem, rhs: &F::Elem) -> Self {
        let holds = lhs == rhs;
        let detail = (!holds).then(|| format!("{} != {}", f.render(lhs), f.render(rhs)));
        IdentityCheck { name: name.to_string(), holds, detail }
    }

    fn fold(name: &str, parts: Vec<IdentityCheck>) -> Self {
        let failed = parts.into_iter().find(|c| !c.holds);
        IdentityCheck {
            name: name.to_string(),
            holds: failed.is_none(),
            detail: failed.map(|c| format!("{}: {}", c.name, c.detail.unwrap_or_default())),
        }
    }
}

fn one_based(m: &[usize]) -> Vec<usize> {
    m.iter().map(|i| i + 1).collect()
}

/// The recursions that each produce the antisymmetrizer chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AntisymRecipe {
    /// `P^k = (1/k_q)(q^{k-1} - q^{k-2} R_{k-1} + ... ± R_1...R_{k-1}) P^{k-1}`
    Left,
    /// `P^k = (1/k_q) P^{k-1} (q^{k-1} - q^{k-2} R_{k-1} + ... ± R_{k-1}...R_1)`
    Right,
    /// `P^k = (1/k_q)(q^{k-1} - q^{k-2} R_1 + ... ± R_{k-1}...R_1) P^{k-1}_2`
    Shifted,
    /// `P^k = (q^{k-1} P^{k-1} - (k-1)_q P^{k-1} R_{k-1} P^{k-1}) / k_q`
    SandwichLast,
    /// `P^k = (q^{k-1} P^{k-1}_2 - (k-1)_q P^{k-1}_2 R_1 P^{k-1}_2) / k_q`
    SandwichFirst,
}

impl AntisymRecipe {
    pub const ALL: [AntisymRecipe; 5] =
        [AntisymRecipe::Left, AntisymRecipe::Right, AntisymRecipe::Shifted, AntisymRecipe::SandwichLast, AntisymRecipe::SandwichFirst];
}

/// Standard Drinfeld-Jimbo R-matrix of `GL_q(N)` in braid form, over `field`.
///
/// `R (e_i ⊗ e_i) = q e_i ⊗ e_i`; for `i != j` the entry at row `(i,j)`,
/// column `(j,i)` is 1; for `i < j` the entry at row `(i,j)`, column `(i,j)` is
/// `λ = q - 1/q`. Its eigenvalues are `q` and `-1/q`.
pub fn builtin_standard<F: Field>(field: &F, n: usize) -> Result<Op<F>, HeckeError> {
    if !(2..=4).contains(&n) {
        return Err(HeckeError::Unsupported(format!("standard R-matrix needs 2 <= N <= 4, got {n}")));
    }
    let q = field.q();
    let lambda = field.sub(&q, &field.q_pow(-1)?);
    let mut entries = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                entries.push((vec![i, i], vec![i, i], q.clone()));
            } else {
                entries.push((vec![i, j], vec![j, i], field.one()));
                if i < j {
                    entries.push((vec![i, j], vec![i, j], lambda.clone()));
                }
            }
        }
    }
    Ok(Op::from_entries(field, n, 2, entries))
}

/// The flip operator, a Hecke symmetry at `q = 1`.
pub fn builtin_permutation<F: Field>(field: &F, n: usize) -> Result<Op<F>, HeckeError> {
    if !(2..=4).contains(&n) {
        return Err(HeckeError::Unsupported(format!("permutation needs 2 <= N <= 4, got {n}")));
    }
    Ok(Op::permutation(field, n))
}

impl<F: Field> HeckeSymmetry<F> {
    /// Checks the braid relation and the Hecke condition with `λ = q - 1/q`,
    /// where `q` is the working field's deformation parameter.
    pub fn validate(r: Op<F>) -> Result<Self, HeckeError> {
        let [braid, hecke] = Self::axiom_residuals(&r)?;
        if let Some((row, col, residual)) = braid {
            return Err(HeckeError::YbeViolation { row, col, residual });
        }
        if let Some((row, col, residual)) = hecke {
            return Err(HeckeError::HeckeViolation { row, col, residual });
        }
        let field = r.field().clone();
        let q = field.q();
        let lambda = field.sub(&q, &field.q_pow(-1)?);
        // R^{-1} = R - λ from the Hecke condition
        let r_inv = r.sub(&Op::identity(&field, r.dim(), 2).scale(&lambda))?;
        Ok(HeckeSymmetry { field, r, r_inv, q, lambda, closed: None, rank: None, antisym: Vec::new() })
    }

    /// Both axioms checked independently, as named identity checks.
    pub fn axiom_checks(r: &Op<F>) -> Result<Vec<IdentityCheck>, HeckeError> {
        let [braid, hecke] = Self::axiom_residuals(r)?;
        let mk = |name: &str, res: Option<Residual>| IdentityCheck {
            name: name.to_string(),
            holds: res.is_none(),
            detail: res.map(|(row, col, residual)| format!("first mismatch at row {row:?}, column {col:?}: residual {residual}")),
        };
        Ok(vec![mk("R_12 R_23 R_12 = R_23 R_12 R_23", braid), mk("R^2 = I + (q - 1/q) R", hecke)])
    }

    fn axiom_residuals(r: &Op<F>) -> Result<[Option<Residual>; 2], HeckeError> {
        if r.arity() != 2 {
            return Err(TensorError::ShapeMismatch(format!("R must have arity 2, got {}", r.arity())).into());
        }
        let field = r.field().clone();
        let q = field.q();
        let lambda = field.sub(&q, &field.q_pow(-1)?);

        let n = r.dim();
        let r12 = r.embed(1, 3)?;
        let r23 = r.embed(2, 3)?;
        let lhs = Op::product([&r12, &r23, &r12])?;
        let rhs = Op::product([&r23, &r12, &r23])?;
        let render =
            |d: Option<(Vec<usize>, Vec<usize>, F::Elem)>| d.map(|(row, col, res)| (one_based(&row), one_based(&col), field.render(&res)));
        let braid = render(lhs.first_difference(&rhs)?);
        let id = Op::identity(&field, n, 2);
        let hecke_rhs = id.add(&r.scale(&lambda))?;
        let hecke = render(r.compose(r)?.first_difference(&hecke_rhs)?);
        Ok([braid, hecke])
    }

    /// Validation, closedness and rank detection in one go.
    pub fn prepare(r: Op<F>, rank_bound: usize) -> Result<Self, HeckeError> {
        let mut h = Self::validate(r)?.check_closed()?;
        h.detect_rank(rank_bound)?;
        Ok(h)
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.r.dim()
    }

    pub fn r(&self) -> &Op<F> {
        &self.r
    }

    pub fn r_inverse(&self) -> &Op<F> {
        &self.r_inv
    }

    pub fn q(&self) -> &F::Elem {
        &self.q
    }

    pub fn lambda(&self) -> &F::Elem {
        &self.lambda
    }

    pub fn rank(&self) -> Option<usize> {
        self.rank
    }

    pub fn is_closed(&self) -> bool {
        self.closed.is_some()
    }

    /// `𝓡 = P R`.
    pub fn braided_flip(&self) -> Op<F> {
        Op::permutation(&self.field, self.dim()).compose(&self.r).expect("same shape")
    }

    /// Caches the inverse of `(P R)^{t_1}`; fails if it is singular.
    pub fn check_closed(mut self) -> Result<Self, HeckeError> {
        let t = self.braided_flip().partial_transpose_slot1()?;
        match t.invert() {
            Ok(inv) => {
                self.closed = Some(inv);
                Ok(self)
            }
            Err(TensorError::NotInvertible) => Err(HeckeError::NotClosed),
            Err(e) => Err(e.into()),
        }
    }

    /// Cached inverse of `(P R)^{t_1}`.
    pub fn closed_inverse(&self) -> Result<&Op<F>, HeckeError> {
        self.closed.as_ref().ok_or(HeckeError::NotClosed)
    }

    /// `R_i` acting on `V^{⊗k}`, 1-based.
    pub fn r_at(&self, i: usize, k: usize) -> Result<Op<F>, HeckeError> {
        Ok(self.r.embed(i, k)?)
    }

    fn inv_q_number(&self, k: usize) -> Result<F::Elem, HeckeError> {
        let kq = self.field.q_number(k as i64);
        self.field.inv(&kq).ok_or_else(|| crate::error::FieldError::NotInvertible(format!("{k}_q"), self.field.spec().to_string()).into())
    }

    /// `sum_m (-1)^m q^{k-1-m} T_m` for the given word generator.
    fn alternating_sum(&self, k: usize, word: impl Fn(usize) -> Vec<usize>) -> Result<Op<F>, HeckeError> {
        let f = &self.field;
        let mut acc = Op::zero(f, self.dim(), k);
        for m in 0..k {
            let mut term = Op::identity(f, self.dim(), k);
            for i in word(m) {
                term = term.compose(&self.r_at(i, k)?)?;
            }
            let mut c = f.q_pow((k - 1 - m) as i64)?;
            if m % 2 == 1 {
                c = f.neg(&c);
            }
            acc = acc.add(&term.scale(&c))?;
        }
        Ok(acc)
    }

    /// One step of a recursion: builds `P^k` from `P^{k-1}` (`k >= 2`).
    pub fn antisymmetrizer_step(&self, recipe: AntisymRecipe, prev: &Op<F>, k: usize) -> Result<Op<F>, HeckeError> {
        let f = &self.field;
        let inv_k = self.inv_q_number(k)?;
        let step = match recipe {
            AntisymRecipe::Left => {
                let s = self.alternating_sum(k, |m| ((k - m)..k).collect())?;
                s.compose(&prev.embed(1, k)?)?
            }
            AntisymRecipe::Right => {
                let s = self.alternating_sum(k, |m| ((k - m)..k).rev().collect())?;
                prev.embed(1, k)?.compose(&s)?
            }
            AntisymRecipe::Shifted => {
                let s = self.alternating_sum(k, |m| (1..=m).rev().collect())?;
                s.compose(&prev.embed(2, k)?)?
            }
            AntisymRecipe::SandwichLast | AntisymRecipe::SandwichFirst => {
                let (p, r) = if recipe == AntisymRecipe::SandwichLast {
                    (prev.embed(1, k)?, self.r_at(k - 1, k)?)
                } else {
                    (prev.embed(2, k)?, self.r_at(1, k)?)
                };
                let sandwich = Op::product([&p, &r, &p])?;
                let a = p.scale(&f.q_pow(k as i64 - 1)?);
                let b = sandwich.scale(&f.q_number(k as i64 - 1));
                a.sub(&b)?
            }
        };
        Ok(step.scale(&inv_k))
    }

    /// The chain `P^1, ..., P^k` computed with a single recipe throughout.
    pub fn antisymmetrizer_chain(&self, recipe: AntisymRecipe, k: usize) -> Result<Vec<Op<F>>, HeckeError> {
        let mut chain = vec![Op::identity(&self.field, self.dim(), 1)];
        for j in 2..=k {
            let next = self.antisymmetrizer_step(recipe, chain.last().unwrap(), j)?;
            chain.push(next);
        }
        chain.truncate(k.max(1));
        Ok(chain)
    }

    /// `P^k`, from the cache when rank detection already produced it.
    pub fn antisymmetrizer(&self, k: usize) -> Result<Op<F>, HeckeError> {
        if k == 0 {
            return Err(HeckeError::Postcondition("antisymmetrizers start at k = 1".into()));
        }
        if let Some(p) = self.antisym.get(k - 1) {
            return Ok(p.clone());
        }
        Ok(self.antisymmetrizer_chain(AntisymRecipe::Left, k)?.pop().unwrap())
    }

    /// Smallest `p` with `P^{p+1} = 0`, searching `k <= bound`; also requires
    /// `P^p` to have rank one.
    pub fn detect_rank(&mut self, bound: usize) -> Result<usize, HeckeError> {
        if !self.is_closed() {
            return Err(HeckeError::NotClosed);
        }
        let mut chain = vec![Op::identity(&self.field, self.dim(), 1)];
        for k in 2..=bound {
            let next = self.antisymmetrizer_step(AntisymRecipe::Left, chain.last().unwrap(), k)?;
            let rank = next.idempotent_rank()?;
            chain.push(next);
            if rank == 0 {
                let p = k - 1;
                let top = chain[p - 1].idempotent_rank()?;
                if top != 1 {
                    return Err(HeckeError::RankImageNotOneDimensional { rank: p, found: top });
                }
                self.rank = Some(p);
                self.antisym = chain;
                return Ok(p);
            }
        }
        Err(HeckeError::NotEven { bound })
    }

    fn require_rank(&self) -> Result<usize, HeckeError> {
        self.rank.ok_or(HeckeError::RankUnknown)
    }

    /// Rank-one factorization `P^p = u v`, checked against
    /// `R_i u = -u/q` and `v R_i = -v/q`.
    pub fn levi_civita(&self) -> Result<(CoTensor<F>, ContraTensor<F>), HeckeError> {
        let p = self.require_rank()?;
        let (u, v) = self.antisymmetrizer(p)?.rank1_factor()?;
        let f = &self.field;
        let minus_inv_q = f.neg(&f.q_pow(-1)?);
        for i in 1..p {
            let ri = self.r_at(i, p)?;
            if ri.apply(&u)? != u.scale(&minus_inv_q) || v.apply(&ri)? != v.scale(&minus_inv_q) {
                return Err(HeckeError::Postcondition(format!("Levi-Civita eigen-relation fails for R_{i}")));
            }
        }
        Ok((u, v))
    }

    /// `C_i^j = sum_k ((𝓡^{t_1})^{-1})_{j i}^{k k}`.
    pub fn matrix_c(&self) -> Result<Op<F>, HeckeError> {
        let inv = self.closed_inverse()?;
        let n = self.dim();
        let f = &self.field;
        Ok(Op::from_fn(f, n, 1, |i, j| (0..n).fold(f.zero(), |acc, k| f.add(&acc, &inv.get(&[j[0], i[0]], &[k, k])))))
    }

    /// `B_i^j = sum_k ((𝓡^{t_1})^{-1})_{k k}^{i j}`.
    pub fn matrix_b(&self) -> Result<Op<F>, HeckeError> {
        let inv = self.closed_inverse()?;
        let n = self.dim();
        let f = &self.field;
        Ok(Op::from_fn(f, n, 1, |i, j| (0..n).fold(f.zero(), |acc, k| f.add(&acc, &inv.get(&[k, k], &[i[0], j[0]])))))
    }

    /// `C`, `B`, `u`, `v`, with `BC = CB` checked to be scalar.
    pub fn trace_data(&self) -> Result<TraceData<F>, HeckeError> {
        let c = self.matrix_c()?;
        let b = self.matrix_b()?;
        let bc = b.compose(&c)?;
        let cb = c.compose(&b)?;
        let s = bc.get_flat(0, 0);
        if bc != cb || bc != Op::scalar(&self.field, self.dim(), 1, s) {
            return Err(HeckeError::Postcondition("BC = CB is not a scalar matrix".into()));
        }
        let (u, v) = self.levi_civita()?;
        Ok(TraceData { c, b, u, v })
    }

    /// `p_q / q^p`.
    pub fn trace_of_c_expected(&self) -> Result<F::Elem, HeckeError> {
        let p = self.require_rank()?;
        let f = &self.field;
        Ok(f.mul(&f.q_number(p as i64), &f.q_pow(-(p as i64))?))
    }

    /// `Tr(C M)` for an operator on `V`.
    pub fn quantum_trace(&self, c: &Op<F>, m: &Op<F>) -> Result<F::Elem, HeckeError> {
        Ok(c.compose(m)?.trace_full())
    }

    /// Inserts `C` on each named slot, then takes the ordinary partial trace there.
    pub fn quantum_trace_slots(&self, c: &Op<F>, a: &Op<F>, slots: &[usize]) -> Result<Op<F>, HeckeError> {
        let mut weighted = a.clone();
        for &s in slots {
            if s == 0 || s > a.arity() {
                return Err(TensorError::BadSlot(format!("slot {s} for arity {}", a.arity())).into());
            }
            weighted = c.embed(s, a.arity())?.compose(&weighted)?;
        }
        Ok(weighted.trace_slots(slots)?)
    }

    /// `S_+^k(X) = X_1 + R_1 X_1 R_1 + ... + R_{k-1}...R_1 X_1 R_1...R_{k-1}`.
    pub fn symmetrize(&self, x: &Op<F>, k: usize) -> Result<Op<F>, HeckeError> {
        if x.arity() != 1 || k == 0 {
            return Err(TensorError::ShapeMismatch("symmetrize needs an arity-1 operator and k >= 1".into()).into());
        }
        let mut term = x.embed(1, k)?;
        let mut acc = term.clone();
        for m in 1..k {
            let rm = self.r_at(m, k)?;
            term = Op::product([&rm, &term, &rm])?;
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }

    // -----------------------------------------------------------------------
    // identity suite

    /// Absorption and sandwich identities of the antisymmetrizers for
    /// `k <= p + 1`, and agreement of all recursions.
    pub fn antisymmetrizer_checks(&self) -> Result<Vec<IdentityCheck>, HeckeError> {
        let p = self.require_rank()?;
        let f = &self.field;
        let top = p + 1;
        let chain = self.antisymmetrizer_chain(AntisymRecipe::Left, top)?;
        let minus_inv_q = f.neg(&f.q_pow(-1)?);

        let mut recipes = Vec::new();
        for recipe in AntisymRecipe::ALL {
            let other = self.antisymmetrizer_chain(recipe, top)?;
            let parts = chain
                .iter()
                .zip(&other)
                .enumerate()
                .map(|(k, (a, b))| IdentityCheck::from_diff(&format!("k={}", k + 1), b, a))
                .collect::<Result<Vec<_>, _>>()?;
            recipes.push(IdentityCheck::fold(&format!("antisymmetrizer recursion {recipe:?} agrees"), parts));
        }

        let mut prop1 = Vec::new();
        let mut prop2 = Vec::new();
        let mut idem = Vec::new();
        for (idx, pk) in chain.iter().enumerate() {
            let k = idx + 1;
            idem.push(IdentityCheck::from_diff(&format!("k={k}"), &pk.compose(pk)?, pk)?);
            for i in 1..k {
                let ri = self.r_at(i, k)?;
                let expect = pk.scale(&minus_inv_q);
                prop1.push(IdentityCheck::from_diff(&format!("P^{k} R_{i}"), &pk.compose(&ri)?, &expect)?);
                prop1.push(IdentityCheck::from_diff(&format!("R_{i} P^{k}"), &ri.compose(pk)?, &expect)?);
            }
            for i in 1..=k {
                for j in 1..=(k + 1 - i) {
                    let pij = chain[i - 1].embed(j, k)?;
                    prop2.push(IdentityCheck::from_diff(&format!("P^{k} P^{i}_{j}"), &pk.compose(&pij)?, pk)?);
                    prop2.push(IdentityCheck::from_diff(&format!("P^{i}_{j} P^{k}"), &pij.compose(pk)?, pk)?);
                }
            }
        }

        // sandwich recursions on the last and on the first slot
        let mut prop3 = Vec::new();
        let mut prop4 = Vec::new();
        for k in 1..top {
            let kq_inv = self.inv_q_number(k)?;
            let coef_next = f.neg(&f.mul(&f.q_number(k as i64 + 1), &kq_inv));
            let coef_self = f.mul(&f.q_pow(k as i64)?, &kq_inv);
            let next = &chain[k];
            let p_last = chain[k - 1].embed(1, k + 1)?;
            let lhs = Op::product([&p_last, &self.r_at(k, k + 1)?, &p_last])?;
            let rhs = next.scale(&coef_next).add(&p_last.scale(&coef_self))?;
            prop3.push(IdentityCheck::from_diff(&format!("k={k}"), &lhs, &rhs)?);
            let p_first = chain[k - 1].embed(2, k + 1)?;
            let lhs = Op::product([&p_first, &self.r_at(1, k + 1)?, &p_first])?;
            let rhs = next.scale(&coef_next).add(&p_first.scale(&coef_self))?;
            prop4.push(IdentityCheck::from_diff(&format!("k={k}"), &lhs, &rhs)?);
        }

        let mut out = vec![
            IdentityCheck::fold("antisymmetrizers are idempotent", idem),
            IdentityCheck::fold("P^k R_i = R_i P^k = -P^k/q", prop1),
            IdentityCheck::fold("P^k P^i_j = P^i_j P^k = P^k", prop2),
            IdentityCheck::fold("P^k R_k P^k = (q^k P^k - (k+1)_q P^(k+1)) / k_q", prop3),
            IdentityCheck::fold("P^k_2 R_1 P^k_2 = (q^k P^k_2 - (k+1)_q P^(k+1)) / k_q", prop4),
        ];
        out.extend(recipes);
        Ok(out)
    }

    /// The quantum-trace identities: Levi-Civita relations, factorization of
    /// `C` and `B`, trace values, `R C_1 C_2 = C_1 C_2 R`, invariance of the
    /// quantum trace under conjugation by `R`, and the symmetrizer relations.
    ///
    /// `xs` are arity-1 test operators; `xs12` are arity-2 test operators.
    pub fn trace_checks(&self, data: &TraceData<F>, xs: &[Op<F>], xs12: &[Op<F>]) -> Result<Vec<IdentityCheck>, HeckeError> {
        let p = self.require_rank()?;
        let f = &self.field;
        let n = self.dim();
        let (c, b, u, v) = (&data.c, &data.b, &data.u, &data.v);
        let mut out = Vec::new();

        // Levi-Civita tensors
        let minus_inv_q = f.neg(&f.q_pow(-1)?);
        let mut eps = vec![IdentityCheck::scalar("v u = 1", f, &v.pair(u)?, &f.one())];
        for i in 1..p {
            let ri = self.r_at(i, p)?;
            let ok_u = ri.apply(u)? == u.scale(&minus_inv_q);
            let ok_v = v.apply(&ri)? == v.scale(&minus_inv_q);
            eps.push(IdentityCheck {
                name: format!("R_{i}"),
                holds: ok_u && ok_v,
                detail: (!(ok_u && ok_v)).then(|| format!("u ok: {ok_u}, v ok: {ok_v}")),
            });
        }
        let pp = self.antisymmetrizer(p)?;
        eps.push(IdentityCheck::from_diff("P^p = u v", &u.outer(v), &pp)?);
        eps.push(IdentityCheck { name: "P^p u = u".into(), holds: pp.apply(u)? == *u, detail: None });
        out.push(IdentityCheck::fold("Levi-Civita: R_i u = -u/q, v R_i = -v/q, v u = 1", eps));

        // C and B from u, v
        let pq_over_qp = self.trace_of_c_expected()?;
        let uv = u.outer(v);
        let c_from_uv = if p == 1 { uv.clone() } else { uv.trace_slots(&(2..=p).collect::<Vec<_>>())? }.scale(&pq_over_qp);
        let b_from_uv = if p == 1 { uv.clone() } else { uv.trace_slots(&(1..p).collect::<Vec<_>>())? }.scale(&pq_over_qp);
        out.push(IdentityCheck::fold(
            "C and B factor through the Levi-Civita tensors",
            vec![IdentityCheck::from_diff("C", c, &c_from_uv)?, IdentityCheck::from_diff("B", b, &b_from_uv)?],
        ));

        // C via the traced form Tr_(1)[((𝓡^{t1})^{-1})^{t1} P] and B via Tr_(2)
        let inv = self.closed_inverse()?;
        let flip = Op::permutation(f, n);
        let m = inv.partial_transpose_slot1()?.compose(&flip)?;
        out.push(IdentityCheck::fold(
            "C = Tr_(1)[((𝓡^t1)^-1)^t1 P], B = Tr_(2)[...]",
            vec![IdentityCheck::from_diff("C", &m.trace_slots(&[1])?, c)?, IdentityCheck::from_diff("B", &m.trace_slots(&[2])?, b)?],
        ));

        let bc = b.compose(c)?;
        let scalar_bc = Op::scalar(f, n, 1, bc.get_flat(0, 0));
        out.push(IdentityCheck::fold(
            "BC = CB is scalar",
            vec![IdentityCheck::from_diff("BC = CB", &bc, &c.compose(b)?)?, IdentityCheck::from_diff("scalar", &bc, &scalar_bc)?],
        ));

        let id2 = Op::identity(f, n, 1);
        let r_c2 = self.quantum_trace_slots(c, &self.r, &[2])?;
        let b1 = b.embed(1, 2)?.compose(&self.r)?.trace_slots(&[1])?;
        out.push(IdentityCheck::fold(
            "Tr C = Tr B = p_q/q^p, Tr_q(2) R = Tr_(1) B_1 R = I",
            vec![
                IdentityCheck::scalar("Tr C", f, &c.trace_full(), &pq_over_qp),
                IdentityCheck::scalar("Tr B", f, &b.trace_full(), &pq_over_qp),
                IdentityCheck::scalar("Tr_q I", f, &self.quantum_trace(c, &id2)?, &pq_over_qp),
                IdentityCheck::from_diff("Tr_q(2) R", &r_c2, &id2)?,
                IdentityCheck::from_diff("Tr_(1) B_1 R", &b1, &id2)?,
            ],
        ));

        let c1c2 = c.embed(1, 2)?.compose(&c.embed(2, 2)?)?;
        out.push(IdentityCheck::from_diff("R C_1 C_2 = C_1 C_2 R", &self.r.compose(&c1c2)?, &c1c2.compose(&self.r)?)?);

        let mut scal_r = Vec::new();
        for (idx, x) in xs.iter().enumerate() {
            let x1 = x.embed(1, 2)?;
            let expect = Op::scalar(f, n, 1, self.quantum_trace(c, x)?);
            let a = Op::product([&self.r, &x1, &self.r_inv])?;
            let b_ = Op::product([&self.r_inv, &x1, &self.r])?;
            scal_r.push(IdentityCheck::from_diff(&format!("X#{idx} R X R^-1"), &self.quantum_trace_slots(c, &a, &[2])?, &expect)?);
            scal_r.push(IdentityCheck::from_diff(&format!("X#{idx} R^-1 X R"), &self.quantum_trace_slots(c, &b_, &[2])?, &expect)?);
        }
        out.push(IdentityCheck::fold(&format!("Tr_q(2)(R X_1 R^-1) = Tr_q(2)(R^-1 X_1 R) = Tr_q(X) I [{} samples]", xs.len()), scal_r));

        let mut scal_r2 = Vec::new();
        for (idx, x) in xs12.iter().enumerate() {
            let a = Op::product([&self.r, x, &self.r_inv])?;
            let lhs = self.quantum_trace_slots(c, &a, &[1, 2])?;
            let rhs = self.quantum_trace_slots(c, x, &[1, 2])?;
            scal_r2.push(IdentityCheck::from_diff(&format!("X#{idx}"), &lhs, &rhs)?);
        }
        out.push(IdentityCheck::fold(&format!("Tr_q(12)(R X_12 R^-1) = Tr_q(12) X_12 [{} samples]", xs12.len()), scal_r2));

        let mut useful = Vec::new();
        let q = f.q();
        for (idx, x) in xs.iter().enumerate() {
            let s = self.symmetrize(x, p)?;
            let qtr = f.mul(&q, &self.quantum_trace(c, x)?);
            let ok_v = v.apply(&s)? == v.scale(&qtr);
            let ok_u = s.apply(u)? == u.scale(&qtr);
            let mut commute = true;
            for i in 1..p {
                let ri = self.r_at(i, p)?;
                commute &= s.compose(&ri)? == ri.compose(&s)?;
            }
            let lhs = pp.compose(&s)?;
            let rhs = Op::product([&pp, &x.embed(1, p)?, &pp])?.scale(&f.mul(&f.q_number(p as i64), &f.q_pow(1 - p as i64)?));
            let sandwich = lhs == rhs && s.compose(&pp)? == rhs;
            let holds = ok_u && ok_v && commute && sandwich;
            useful.push(IdentityCheck {
                name: format!("X#{idx}"),
                holds,
                detail: (!holds).then(|| format!("v: {ok_v}, u: {ok_u}, commutes: {commute}, P S P: {sandwich}")),
            });
        }
        out.push(IdentityCheck::fold(&format!("v S_+^p(X) = q Tr_q(X) v, S_+^p(X) u = q Tr_q(X) u [{} samples]", xs.len()), useful));

        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{PrimeField, RationalFunctions, Rationals, DEFAULT_PRIME};
    use crate::qscalar::{QScalar, Rat};

    fn std_symbolic(n: usize) -> HeckeSymmetry<RationalFunctions> {
        HeckeSymmetry::prepare(builtin_standard(&RationalFunctions, n).unwrap(), 8).unwrap()
    }

    #[test]
    fn standard_two_is_hecke() {
        let h = HeckeSymmetry::validate(builtin_standard(&RationalFunctions, 2).unwrap()).unwrap();
        assert_eq!(h.lambda(), &QScalar::lambda());
        let r = h.r();
        let id = TensorOperator::identity(&RationalFunctions, 2, 2);
        assert_eq!(r.compose(r).unwrap(), id.add(&r.scale(&QScalar::lambda())).unwrap());
        assert_eq!(r.compose(h.r_inverse()).unwrap(), id);
    }

    #[test]
    fn permutation_at_classical_point() {
        let f = Rationals::classical();
        let h = HeckeSymmetry::prepare(builtin_permutation(&f, 2).unwrap(), 8).unwrap();
        assert_eq!(h.lambda(), &Rat::from_integer(0.into()));
        assert_eq!(h.rank(), Some(2));
        let data = h.trace_data().unwrap();
        assert_eq!(data.c, TensorOperator::identity(&f, 2, 1));
        assert_eq!(data.b, TensorOperator::identity(&f, 2, 1));
        let u = data.u.support();
        assert_eq!(u.len(), 2);
        assert_eq!(u[0].0, vec![1, 0]);
        assert_eq!(u[1].0, vec![0, 1]);
        assert_eq!(u[0].1, f.neg(&u[1].1));
    }

    #[test]
    fn perturbed_entry_breaks_an_axiom() {
        let f = RationalFunctions;
        let r = builtin_standard(&f, 2).unwrap();
        let bump = TensorOperator::from_entries(&f, 2, 2, [(vec![0, 1], vec![1, 0], QScalar::one())]);
        let bad = r.add(&bump).unwrap();
        assert!(matches!(HeckeSymmetry::validate(bad), Err(HeckeError::YbeViolation { .. })));
    }

    #[test]
    fn trace_of_c_for_standard_two() {
        let h = std_symbolic(2);
        let c = h.matrix_c().unwrap();
        assert_eq!(c.trace_full(), QScalar::q_pow(-1) + QScalar::q_pow(-3));
        assert_eq!(h.trace_of_c_expected().unwrap(), QScalar::q_pow(-1) + QScalar::q_pow(-3));
    }

    #[test]
    fn antisymmetrizer_first_steps() {
        let h = std_symbolic(2);
        let f = RationalFunctions;
        assert_eq!(h.antisymmetrizer(1).unwrap(), TensorOperator::identity(&f, 2, 1));
        let expect = TensorOperator::identity(&f, 2, 2)
            .scale(&QScalar::q())
            .sub(h.r())
            .unwrap()
            .scale(&crate::qscalar::q_number(2).inverse().unwrap());
        assert_eq!(h.antisymmetrizer(2).unwrap(), expect);
        assert_eq!(h.antisymmetrizer(2).unwrap().idempotent_rank().unwrap(), 1);
        assert_eq!(h.antisymmetrizer(3).unwrap().idempotent_rank().unwrap(), 0);
    }

    #[test]
    fn ranks() {
        assert_eq!(std_symbolic(2).rank(), Some(2));
        assert_eq!(std_symbolic(3).rank(), Some(3));
        let mut h = HeckeSymmetry::validate(builtin_standard(&RationalFunctions, 3).unwrap()).unwrap().check_closed().unwrap();
        assert_eq!(h.detect_rank(3), Err(HeckeError::NotEven { bound: 3 }));
        let mut unclosed = HeckeSymmetry::validate(builtin_standard(&RationalFunctions, 2).unwrap()).unwrap();
        assert_eq!(unclosed.detect_rank(8), Err(HeckeError::NotClosed));
    }

    #[test]
    fn levi_civita_standard_two() {
        let h = std_symbolic(2);
        let (u, v) = h.levi_civita().unwrap();
        assert!(v.pair(&u).unwrap().is_one());
        let p2 = h.antisymmetrizer(2).unwrap();
        assert_eq!(p2.apply(&u).unwrap(), u);
    }

    #[test]
    fn symmetrize_single_term() {
        let h = std_symbolic(2);
        let x = TensorOperator::from_flat_entries(&RationalFunctions, 2, 1, [(0, 1, QScalar::from_int(3)), (1, 1, QScalar::q())]);
        assert_eq!(h.symmetrize(&x, 1).unwrap(), x);
    }

    #[test]
    fn full_suite_standard_two() {
        let h = std_symbolic(2);
        let f = RationalFunctions;
        for c in h.antisymmetrizer_checks().unwrap() {
            assert!(c.holds, "{c:?}");
        }
        let data = h.trace_data().unwrap();
        let xs: Vec<_> = (0..3)
            .map(|s| TensorOperator::from_fn(&f, 2, 1, |i, j| QScalar::from_int(((i[0] * 3 + j[0] * 5 + s * 7) % 5) as i64 - 2)))
            .collect();
        let xs12: Vec<_> = (0..2)
            .map(|s| {
                TensorOperator::from_fn(&f, 2, 2, |i, j| QScalar::from_int(((i[0] + 2 * i[1] + 3 * j[0] + 5 * j[1] + s) % 4) as i64 - 1))
            })
            .collect();
        for c in h.trace_checks(&data, &xs, &xs12).unwrap() {
            assert!(c.holds, "{c:?}");
        }
    }

    #[test]
    fn modular_standard_four_axioms() {
        let f = PrimeField::new(DEFAULT_PRIME, 987_654_321).unwrap();
        let h = HeckeSymmetry::validate(builtin_standard(&f, 4).unwrap()).unwrap().check_closed().unwrap();
        assert!(h.is_closed());
    }

    #[test]
    fn builtin_bounds() {
        assert!(builtin_standard(&RationalFunctions, 1).is_err());
        assert!(builtin_standard(&RationalFunctions, 5).is_err());
    }
}
