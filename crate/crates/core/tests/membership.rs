use std::collections::BTreeMap;

use hecke_lab::error::HeckeError;
use hecke_lab::field::{Field, PrimeField, RationalFunctions, Rationals, DEFAULT_PRIME};
use hecke_lab::hecke::{builtin_permutation, builtin_standard, HeckeSymmetry};
use hecke_lab::invariants::{cayley_hamilton_defect, char_poly, eigen_relation_check, newton_defect, CentralSet, LMatrix};
use hecke_lab::ncalgebra::{ideal_component, re_relations, GradedIdeal, NCMonomial, NCPoly, DEFAULT_COLUMN_CAP};
use hecke_lab::qscalar::{parse_rat, QScalar, Rat};
use hecke_lab::tensor::TensorOperator;
use num_traits::Zero;
use proptest::prelude::*;

/// Image in the commutative polynomial ring: letters sorted.
fn commutative_image(p: &NCPoly<Rationals>) -> BTreeMap<Vec<u8>, Rat> {
    let mut out: BTreeMap<Vec<u8>, Rat> = BTreeMap::new();
    for (m, c) in p.terms() {
        let mut w = m.letters().to_vec();
        w.sort_unstable();
        *out.entry(w).or_insert_with(Rat::zero) += c;
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn word_poly(f: &Rationals, letters: Vec<u8>, c: i64) -> NCPoly<Rationals> {
    NCPoly::term(f, 2, NCMonomial::from_letters(letters), f.from_i64(c))
}

fn random_poly(degree: usize) -> impl Strategy<Value = (Vec<(Vec<u8>, i64)>, bool)> {
    (proptest::collection::vec((proptest::collection::vec(0u8..4, degree), -3i64..=3), 1..6), any::<bool>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    /// At q = 1 membership must agree with vanishing in the commutative ring.
    #[test]
    fn classical_membership_matches_commutative_reduction(
        degree in 2usize..=3,
        seed in any::<u64>(),
        (terms, symmetrize) in random_poly(3),
    ) {
        let f = Rationals::classical();
        let h = HeckeSymmetry::validate(builtin_permutation(&f, 2).unwrap()).unwrap();
        let ideal = GradedIdeal::reflection_equation(&h, &[2, 3], DEFAULT_COLUMN_CAP).unwrap();
        let mut p = NCPoly::zero(&f, 2);
        for (k, (letters, c)) in terms.iter().enumerate() {
            let letters: Vec<u8> = letters[..degree].to_vec();
            let mut reversed = letters.clone();
            reversed.rotate_left(1 + (seed as usize + k) % degree);
            p.add_assign(&word_poly(&f, letters, *c));
            if symmetrize {
                // subtracting a reordering gives an element of the commutator ideal
                p = p.sub(&word_poly(&f, reversed, *c));
            }
        }
        let member = ideal.contains(&p).unwrap().member;
        prop_assert_eq!(member, commutative_image(&p).is_empty());
    }
}

fn std2_symbolic() -> (HeckeSymmetry<RationalFunctions>, CentralSet<RationalFunctions>, LMatrix<RationalFunctions>) {
    let f = RationalFunctions;
    let h = HeckeSymmetry::prepare(builtin_standard(&f, 2).unwrap(), 8).unwrap();
    let data = h.trace_data().unwrap();
    let l = LMatrix::generators(&f, 2);
    let set = CentralSet::build(&h, &data, &l).unwrap();
    (h, set, l)
}

fn specialize<G: Field>(p: &NCPoly<RationalFunctions>, target: &G) -> NCPoly<G> {
    p.map_field(target, |c: &QScalar| target.embed(c).unwrap())
}

fn defects_are_members_after_specialization<G: Field>(target: &G) {
    let (h, set, l) = std2_symbolic();
    let r: TensorOperator<G> = builtin_standard(target, 2).unwrap();
    let hg = HeckeSymmetry::validate(r).unwrap();
    let ideal = GradedIdeal::reflection_equation(&hg, &[2], DEFAULT_COLUMN_CAP).unwrap();
    let mut defects = vec![newton_defect(&h, &set, 1).unwrap(), newton_defect(&h, &set, 2).unwrap()];
    defects.extend(cayley_hamilton_defect(&h, &set, &l).entries().map(|(_, _, e)| e.clone()));
    for d in &defects {
        assert!(ideal.contains(&specialize(d, target)).unwrap().member);
    }
}

#[test]
fn specialization_preserves_membership() {
    for q in ["2", "3/2", "-5/7", "7/3"] {
        defects_are_members_after_specialization(&Rationals::new(parse_rat(q).unwrap()).unwrap());
    }
    defects_are_members_after_specialization(&PrimeField::new(DEFAULT_PRIME, 123_456_789).unwrap());
    defects_are_members_after_specialization(&PrimeField::new(1_000_003, 17).unwrap());
}

#[test]
fn perturbed_r_matrix_is_rejected() {
    let f = RationalFunctions;
    let r = builtin_standard(&f, 2).unwrap();
    let bump = TensorOperator::from_entries(&f, 2, 2, [(vec![0, 1], vec![1, 0], QScalar::one())]);
    let err = HeckeSymmetry::validate(r.add(&bump).unwrap()).unwrap_err();
    assert!(matches!(err, HeckeError::YbeViolation { .. }), "{err}");
}

/// Removing an independent relation must break at least one identity check.
/// Newton, Cayley-Hamilton and the characteristic polynomial catch most
/// deletions; centrality at degree 3 catches the rest.
#[test]
fn deleting_a_relation_is_detected() {
    let (h, set, l) = std2_symbolic();
    let f = RationalFunctions;
    // the raw entry list repeats relations up to scale, so delete from a reduced set
    let basis = ideal_component(&f, 2, &re_relations(&h), 2, DEFAULT_COLUMN_CAP).unwrap();
    let rels: Vec<_> = (0..basis.rank()).map(|i| basis.row_poly(i)).collect();
    let data = h.trace_data().unwrap();
    let cp = char_poly(&h, &data.u, &data.v, &l).unwrap();
    let mut caught_by_identities = 0;
    for k in 0..rels.len() {
        let mut fewer = rels.clone();
        fewer.remove(k);
        let ideal = GradedIdeal::new(&f, 2, &fewer, &[2, 3], DEFAULT_COLUMN_CAP).unwrap();
        assert_eq!(ideal.component(2).unwrap().rank(), rels.len() - 1);
        let newton_ok = (1..=2).all(|i| ideal.contains(&newton_defect(&h, &set, i).unwrap()).unwrap().member);
        let ch_ok = cayley_hamilton_defect(&h, &set, &l).entries().all(|(_, _, e)| ideal.contains(e).unwrap().member);
        let cp_ok = (0..=2).all(|k| {
            let s = set.sigma(2 - k);
            let expected = if k % 2 == 1 { s.neg() } else { s.clone() };
            ideal.contains(&cp.coeffs[k].sub(&expected)).unwrap().member
        }) && eigen_relation_check(&h, &cp, &ideal).unwrap().holds;
        if !(newton_ok && ch_ok && cp_ok) {
            caught_by_identities += 1;
            continue;
        }
        let central_ok = (0..2).all(|a| {
            (0..2).all(|b| {
                let g = l.entry(a, b);
                ideal.contains(&set.s(2).commutator(&g)).unwrap().member && ideal.contains(&set.sigma(2).commutator(&g)).unwrap().member
            })
        });
        assert!(!central_ok, "deleting relation {k} went unnoticed");
    }
    assert!(caught_by_identities * 2 > rels.len(), "{caught_by_identities} of {}", rels.len());
}
