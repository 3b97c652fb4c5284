//! Central elements of the reflection equation algebra: power sums `s_q(i)`,
//! elementary symmetric functions `σ_q(i)`, the characteristic polynomial
//! `Δ(x)`, and the defects of the q-Newton and Cayley-Hamilton identities.

use crate::error::{AlgebraError, HeckeError};
use crate::field::Field;
use crate::hecke::{HeckeSymmetry, TraceData};
use crate::ncalgebra::{GradedIdeal, NCPoly, NcColumn, NcOperator, NcRow};
use crate::qscalar::{q_binomial, q_number, QScalar};
use crate::tensor::{CoTensor, ContraTensor, TensorOperator};

/// The generator matrix `L` with entries `L_i^j`, possibly altered for
/// negative controls.
#[derive(Clone, Debug)]
pub struct LMatrix<F: Field> {
    op: NcOperator<F>,
}

impl<F: Field> LMatrix<F> {
    pub fn generators(field: &F, dim: usize) -> Self {
        LMatrix { op: NcOperator::generators_on_first(field, dim, 1) }
    }

    /// Same matrix with the entry `(row, col)` (0-based) replaced by zero.
    pub fn with_zeroed(&self, row: usize, col: usize) -> Self {
        let entries = self.op.entries().filter(|&(r, c, _)| (r, c) != (row, col)).map(|(r, c, p)| (r, c, p.clone()));
        LMatrix { op: NcOperator::from_entries(&self.field(), self.dim(), 1, entries.collect::<Vec<_>>()) }
    }

    fn field(&self) -> F {
        self.op.field().clone()
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn entry(&self, i: usize, j: usize) -> NCPoly<F> {
        self.op.get_flat(i, j)
    }

    pub fn as_operator(&self) -> &NcOperator<F> {
        &self.op
    }

    /// `L^k` with `(L^{k+1})_i^j = sum_m (L^k)_i^m L_m^j`; `L^0` is the identity.
    pub fn power(&self, k: usize) -> NcOperator<F> {
        let field = self.field();
        let mut acc = NcOperator::identity(&field, self.dim(), 1);
        for _ in 0..k {
            acc = acc.mul(&self.op);
        }
        acc
    }

    /// `w L_1` on `V^{⊗n}`: `(w L_1)^{j rest} = sum_k w^{k rest} L_k^j`.
    fn right_act(&self, w: &NcRow<F>) -> NcRow<F> {
        let n = self.dim();
        let field = w.0[0].field().clone();
        let mut out = vec![NCPoly::zero(&field, n); w.0.len()];
        for (idx, wk) in w.0.iter().enumerate() {
            if wk.is_zero() {
                continue;
            }
            let (k, high) = (idx % n, idx / n);
            for j in 0..n {
                let l = self.op.get_flat(k, j);
                if !l.is_zero() {
                    out[j + n * high].add_assign(&wk.mul(&l));
                }
            }
        }
        NcRow(out)
    }

    /// `L_1 w` on `V^{⊗n}`: `(L_1 w)_{i rest} = sum_k L_i^k w_{k rest}`.
    fn left_act(&self, w: &NcColumn<F>) -> NcColumn<F> {
        let n = self.dim();
        let field = w.0[0].field().clone();
        let mut out = vec![NCPoly::zero(&field, n); w.0.len()];
        for (idx, slot) in out.iter_mut().enumerate() {
            let (i, high) = (idx % n, idx / n);
            for k in 0..n {
                let l = self.op.get_flat(i, k);
                let wk = &w.0[k + n * high];
                if !l.is_zero() && !wk.is_zero() {
                    slot.add_assign(&l.mul(wk));
                }
            }
        }
        NcColumn(out)
    }
}

/// `s_q(i) = q Tr(C L^i)`.
pub fn power_sum<F: Field>(h: &HeckeSymmetry<F>, c: &TensorOperator<F>, l: &LMatrix<F>, i: usize) -> Result<NCPoly<F>, AlgebraError> {
    if i == 0 {
        return Err(AlgebraError::OutOfRange("power sums start at i = 1".into()));
    }
    let f = h.field();
    let n = h.dim();
    let li = l.power(i);
    let mut acc = NCPoly::zero(f, n);
    for (a, b, cab) in c.entries() {
        acc.add_assign(&li.get_flat(b, a).scale(cab));
    }
    Ok(acc.scale(h.q()))
}

/// `α_i = q^{-i(p-i)} [p choose i]_q`.
pub fn alpha(p: usize, i: usize) -> Result<QScalar, AlgebraError> {
    if i == 0 || i > p {
        return Err(AlgebraError::OutOfRange(format!("alpha index {i} outside 1..={p}")));
    }
    let binom = q_binomial(p as i64, i as i64).map_err(|e| AlgebraError::OutOfRange(e.to_string()))?;
    Ok(QScalar::q_pow(-((i * (p - i)) as i64)) * binom)
}

/// `α_i` from `α_1 = p_q / q^{p-1}` and `α_j = q^{2j-1-p} (p-j+1)_q / j_q α_{j-1}`.
pub fn alpha_recurrence(p: usize, i: usize) -> Result<QScalar, AlgebraError> {
    if i == 0 || i > p {
        return Err(AlgebraError::OutOfRange(format!("alpha index {i} outside 1..={p}")));
    }
    let (p, i) = (p as i64, i as i64);
    let mut a = q_number(p) * QScalar::q_pow(1 - p);
    for j in 2..=i {
        let ratio = q_number(p - j + 1) * q_number(j).inverse().map_err(|e| AlgebraError::OutOfRange(e.to_string()))?;
        a = a * QScalar::q_pow(2 * j - 1 - p) * ratio;
    }
    Ok(a)
}

/// `v (L_1 R_1 ... R_{i-1})^i` as a row on `V^{⊗p}`.
fn sigma_row<F: Field>(h: &HeckeSymmetry<F>, v: &ContraTensor<F>, l: &LMatrix<F>, i: usize) -> Result<NcRow<F>, AlgebraError> {
    let p = v.rank();
    let rs: Vec<TensorOperator<F>> = (1..i).map(|k| h.r_at(k, p)).collect::<Result<_, HeckeError>>()?;
    let mut w = NcRow::from_contra(v, h.field());
    for _ in 0..i {
        w = l.right_act(&w);
        for r in &rs {
            w = w.mul_scalar_op(r);
        }
    }
    Ok(w)
}

/// `σ_q(i) = α_i v (L_1 R_1 ... R_{i-1})^i u`; `σ_q(0) = 1`.
pub fn sigma<F: Field>(
    h: &HeckeSymmetry<F>,
    u: &CoTensor<F>,
    v: &ContraTensor<F>,
    l: &LMatrix<F>,
    i: usize,
) -> Result<NCPoly<F>, AlgebraError> {
    let p = u.rank();
    if i > p {
        return Err(AlgebraError::OutOfRange(format!("sigma index {i} exceeds rank {p}")));
    }
    let f = h.field();
    if i == 0 {
        return Ok(NCPoly::one(f, h.dim()));
    }
    let a = f.embed(&alpha(p, i)?)?;
    Ok(sigma_row(h, v, l, i)?.pair(u).scale(&a))
}

/// Both families of central elements for a rank-`p` symmetry.
#[derive(Clone, Debug)]
pub struct CentralSet<F: Field> {
    pub rank: usize,
    /// `s[i-1] = s_q(i)` for `i = 1..=p`.
    pub s: Vec<NCPoly<F>>,
    /// `sigma[i] = σ_q(i)` for `i = 0..=p`, with `sigma[0] = 1`.
    pub sigma: Vec<NCPoly<F>>,
    /// `alpha[i-1] = α_i`.
    pub alpha: Vec<F::Elem>,
}

impl<F: Field> CentralSet<F> {
    pub fn build(h: &HeckeSymmetry<F>, data: &TraceData<F>, l: &LMatrix<F>) -> Result<Self, AlgebraError> {
        let p = data.u.rank();
        let f = h.field();
        let mut s = Vec::with_capacity(p);
        let mut sg = Vec::with_capacity(p + 1);
        let mut al = Vec::with_capacity(p);
        for i in 0..=p {
            sg.push(sigma(h, &data.u, &data.v, l, i)?);
        }
        for i in 1..=p {
            s.push(power_sum(h, &data.c, l, i)?);
            al.push(f.embed(&alpha(p, i)?)?);
        }
        for i in 1..=p {
            for (name, poly) in [("s", &s[i - 1]), ("sigma", &sg[i])] {
                match poly.homogeneous_degree() {
                    Some(d) if d == i || poly.is_zero() => {}
                    other => return Err(AlgebraError::DegreeMismatch { expected: i, found: format!("{name}({i}) has degree {other:?}") }),
                }
            }
        }
        Ok(CentralSet { rank: p, s, sigma: sg, alpha: al })
    }

    pub fn s(&self, i: usize) -> &NCPoly<F> {
        &self.s[i - 1]
    }

    pub fn sigma(&self, i: usize) -> &NCPoly<F> {
        &self.sigma[i]
    }
}

/// `(i_q/q^{i-1}) σ(i) + sum_{j=1}^{i-1} (-1)^j s(j) σ(i-j) + (-1)^i s(i)`.
pub fn newton_defect<F: Field>(h: &HeckeSymmetry<F>, set: &CentralSet<F>, i: usize) -> Result<NCPoly<F>, AlgebraError> {
    if i == 0 || i > set.rank {
        return Err(AlgebraError::OutOfRange(format!("Newton index {i} outside 1..={}", set.rank)));
    }
    let f = h.field();
    let lead = f.mul(&f.q_number(i as i64), &f.q_pow(1 - i as i64)?);
    let mut acc = set.sigma(i).scale(&lead);
    for j in 1..i {
        let term = set.s(j).mul(set.sigma(i - j));
        acc = if j % 2 == 1 { acc.sub(&term) } else { acc.add(&term) };
    }
    Ok(if i % 2 == 1 { acc.sub(set.s(i)) } else { acc.add(set.s(i)) })
}

/// `sum_{i=0}^p (-L)^i σ(p-i)`, with `σ` multiplying each entry on the right.
pub fn cayley_hamilton_defect<F: Field>(h: &HeckeSymmetry<F>, set: &CentralSet<F>, l: &LMatrix<F>) -> NcOperator<F> {
    let f = h.field();
    let n = h.dim();
    let p = set.rank;
    let mut acc = NcOperator::zero(f, n, 1);
    let mut power = NcOperator::identity(f, n, 1);
    for i in 0..=p {
        let sig = NcOperator::diagonal(f, n, 1, set.sigma(p - i));
        let term = power.mul(&sig);
        acc = if i % 2 == 1 { acc.sub(&term) } else { acc.add(&term) };
        power = power.mul(l.as_operator());
    }
    acc
}

/// `Δ(x) = v w(x)` with `w(x) = prod_{i=0}^{p-1} [(L_1 - q^{2i} x) R_1 ... R_{p-1}] u`,
/// stored by powers of the central variable `x`.
#[derive(Clone, Debug)]
pub struct CharPoly<F: Field> {
    /// `coeffs[k]` multiplies `x^k`.
    pub coeffs: Vec<NCPoly<F>>,
    /// Coefficients of the vector `w(x)` on `V^{⊗p}`, by power of `x`.
    pub w: Vec<NcColumn<F>>,
}

impl<F: Field> CharPoly<F> {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }
}

pub fn char_poly<F: Field>(
    h: &HeckeSymmetry<F>,
    u: &CoTensor<F>,
    v: &ContraTensor<F>,
    l: &LMatrix<F>,
) -> Result<CharPoly<F>, AlgebraError> {
    let p = u.rank();
    let f = h.field();
    let n = h.dim();
    let rs: Vec<TensorOperator<F>> = (1..p).map(|k| h.r_at(k, p)).collect::<Result<_, HeckeError>>()?;
    let zero_col = NcColumn(vec![NCPoly::zero(f, n); u.data().len()]);
    let mut w = vec![NcColumn::from_co(u, f)];
    // rightmost factor first
    for i in (0..p).rev() {
        for r in rs.iter().rev() {
            w = w.iter().map(|c| NcColumn::scalar_op_mul(r, c)).collect();
        }
        let shift = f.q_pow(2 * i as i64)?;
        let mut next: Vec<NcColumn<F>> = w.iter().map(|c| l.left_act(c)).collect();
        next.push(zero_col.clone());
        for (k, c) in w.iter().enumerate() {
            next[k + 1] = next[k + 1].add(&c.scale(&f.neg(&shift)));
        }
        w = next;
    }
    let coeffs = w.iter().map(|c| NcColumn::pair(v, c)).collect();
    Ok(CharPoly { coeffs, w })
}

/// Outcome of checking that `w(x)` is q-antisymmetric modulo the ideal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EigenOutcome {
    pub holds: bool,
    /// First failing `(i, power of x)`, with `i` 1-based.
    pub first_failure: Option<(usize, usize)>,
}

/// Checks `(R_i + 1/q) w_k ≡ 0` entrywise for every `i < p` and every
/// coefficient `w_k` of `w(x)`.
pub fn eigen_relation_check<F: Field>(
    h: &HeckeSymmetry<F>,
    cp: &CharPoly<F>,
    ideal: &GradedIdeal<F>,
) -> Result<EigenOutcome, AlgebraError> {
    let f = h.field();
    let p = cp.degree();
    let inv_q = f.q_pow(-1)?;
    for i in 1..p {
        let ri = h.r_at(i, p)?;
        for (k, wk) in cp.w.iter().enumerate() {
            let image = NcColumn::scalar_op_mul(&ri, wk).add(&wk.scale(&inv_q));
            for entry in &image.0 {
                if !ideal.contains(entry)?.member {
                    return Ok(EigenOutcome { holds: false, first_failure: Some((i, k)) });
                }
            }
        }
    }
    Ok(EigenOutcome { holds: true, first_failure: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{RationalFunctions, Rationals};
    use crate::hecke::{builtin_permutation, builtin_standard};
    use crate::ncalgebra::{NCMonomial, DEFAULT_COLUMN_CAP};

    fn std2() -> HeckeSymmetry<RationalFunctions> {
        let f = RationalFunctions;
        HeckeSymmetry::prepare(builtin_standard(&f, 2).unwrap(), 8).unwrap()
    }

    #[test]
    fn alpha_closed_form_matches_recurrence() {
        for p in 1..=5 {
            for i in 1..=p {
                assert_eq!(alpha(p, i).unwrap(), alpha_recurrence(p, i).unwrap(), "p={p} i={i}");
            }
            assert!(alpha(p, p).unwrap().is_one());
            assert_eq!(alpha(p, 1).unwrap(), q_number(p as i64) * QScalar::q_pow(1 - p as i64));
        }
        assert!(alpha(3, 0).is_err());
        assert!(alpha(3, 4).is_err());
    }

    #[test]
    fn classical_trace_and_determinant() {
        let f = Rationals::classical();
        let h = HeckeSymmetry::prepare(builtin_permutation(&f, 2).unwrap(), 8).unwrap();
        let data = h.trace_data().unwrap();
        let l = LMatrix::generators(&f, 2);
        let s1 = power_sum(&h, &data.c, &l, 1).unwrap();
        let tr = l.entry(0, 0).add(&l.entry(1, 1));
        assert_eq!(s1, tr);
        let det = l.entry(0, 0).mul(&l.entry(1, 1)).sub(&l.entry(0, 1).mul(&l.entry(1, 0)));
        let s2 = sigma(&h, &data.u, &data.v, &l, 2).unwrap();
        // at q = 1 the contraction antisymmetrizes over both orderings
        let det_rev = l.entry(1, 1).mul(&l.entry(0, 0)).sub(&l.entry(1, 0).mul(&l.entry(0, 1)));
        let half = f.inv(&f.from_i64(2)).unwrap();
        assert_eq!(s2, det.add(&det_rev).scale(&half));
    }

    #[test]
    fn sigma_one_equals_s_one() {
        let h = std2();
        let data = h.trace_data().unwrap();
        let l = LMatrix::generators(h.field(), 2);
        let set = CentralSet::build(&h, &data, &l).unwrap();
        assert_eq!(set.s(1), set.sigma(1));
        assert!(newton_defect(&h, &set, 1).unwrap().is_zero());
    }

    #[test]
    fn newton_and_cayley_hamilton_symbolic_two() {
        let h = std2();
        let data = h.trace_data().unwrap();
        let l = LMatrix::generators(h.field(), 2);
        let set = CentralSet::build(&h, &data, &l).unwrap();
        let ideal = GradedIdeal::reflection_equation(&h, &[2, 3], DEFAULT_COLUMN_CAP).unwrap();
        let d2 = newton_defect(&h, &set, 2).unwrap();
        assert!(ideal.contains(&d2).unwrap().member);
        let ch = cayley_hamilton_defect(&h, &set, &l);
        for (_, _, e) in ch.entries() {
            assert!(ideal.contains(e).unwrap().member, "entry {e}");
        }
        for i in 1..=2 {
            for a in 0..2 {
                for b in 0..2 {
                    let g = l.entry(a, b);
                    assert!(ideal.contains(&set.s(i).commutator(&g)).unwrap().member);
                    assert!(ideal.contains(&set.sigma(i).commutator(&g)).unwrap().member);
                }
            }
        }
    }

    #[test]
    fn char_poly_matches_sigma_symbolic_two() {
        let h = std2();
        let data = h.trace_data().unwrap();
        let l = LMatrix::generators(h.field(), 2);
        let set = CentralSet::build(&h, &data, &l).unwrap();
        let cp = char_poly(&h, &data.u, &data.v, &l).unwrap();
        let ideal = GradedIdeal::reflection_equation(&h, &[2], DEFAULT_COLUMN_CAP).unwrap();
        assert_eq!(cp.degree(), 2);
        for k in 0..=2 {
            let expected = if k % 2 == 1 { set.sigma(2 - k).neg() } else { set.sigma(2 - k).clone() };
            let diff = cp.coeffs[k].sub(&expected);
            assert!(ideal.contains(&diff).unwrap().member, "x^{k}: {diff}");
        }
        assert_eq!(cp.coeffs[2], NCPoly::one(h.field(), 2));
        assert!(eigen_relation_check(&h, &cp, &ideal).unwrap().holds);
        let broken = char_poly(&h, &data.u, &data.v, &l.with_zeroed(0, 1)).unwrap();
        let out = eigen_relation_check(&h, &broken, &ideal).unwrap();
        assert!(!out.holds);
        assert!(out.first_failure.is_some());
    }

    #[test]
    fn with_zeroed_drops_one_entry() {
        let f = RationalFunctions;
        let l = LMatrix::generators(&f, 2).with_zeroed(1, 0);
        assert!(l.entry(1, 0).is_zero());
        assert_eq!(l.entry(0, 1), NCPoly::generator(&f, 2, 0, 1));
        let m = NCMonomial::from_letters(vec![0]);
        assert_eq!(l.entry(0, 0).coefficient(&m), QScalar::one());
    }
}
