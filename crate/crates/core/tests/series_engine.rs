mod common;

use common::*;
use proptest::prelude::*;
use std::collections::BTreeMap;
use std::sync::Arc;
use toricgw::series::{grading, invert_map, Grading, Monomial, Relation, RelationKind, Series};
use toricgw::Q;

fn y_grading() -> Arc<Grading> {
    grading(&[("y", q(1))])
}

fn poly(var: &str, g: &Arc<Grading>, order: i64, coeffs: &[(i64, i64, i64)]) -> Series {
    // (exponent numerator, denominator, coefficient)
    let terms = coeffs.iter().map(|&(n, d, c)| (Monomial::from_pairs([(var.to_string(), frac(n, d))]), q(c)));
    Series::from_terms(terms, g.clone(), q(order)).unwrap()
}

fn uni(var: &str, g: &Arc<Grading>, order: i64, coeffs: &[Q]) -> Series {
    let terms = coeffs.iter().enumerate().map(|(k, c)| (Monomial::from_pairs([(var.to_string(), q(k as i64))]), c.clone()));
    Series::from_terms(terms, g.clone(), q(order)).unwrap()
}

#[test]
fn arithmetic_examples() {
    let g = y_grading();
    let a = poly("y", &g, 2, &[(0, 1, 1), (1, 1, 2)]);
    let b = poly("y", &g, 2, &[(0, 1, 1), (1, 1, -2)]);
    assert_eq!(a.mul(&b).unwrap(), poly("y", &g, 2, &[(0, 1, 1), (2, 1, -4)]));
    let c = poly("y", &g, 1, &[(0, 1, 1), (1, 1, 1)]);
    assert_eq!(c.mul(&c).unwrap(), poly("y", &g, 1, &[(0, 1, 1), (1, 1, 2)]));
    let r1 = poly("y", &g, 3, &[(1, 3, 1)]);
    let r2 = poly("y", &g, 3, &[(2, 3, 1)]);
    assert_eq!(r1.mul(&r2).unwrap().coefficient(&Monomial::var("y")), q(1));
}

#[test]
fn grading_mismatch_is_an_error() {
    let a = Series::var("y", y_grading(), q(2)).unwrap();
    let b = Series::var("y", grading(&[("y", q(2))]), q(2)).unwrap();
    assert!(a.add(&b).is_err());
    assert!(a.mul(&b).is_err());
}

#[test]
fn exp_examples() {
    let g = grading(&[("q", q(1))]);
    assert_eq!(Series::zero(g.clone(), q(3)).exp().unwrap(), Series::one(g.clone(), q(3)));
    let s = uni("q", &g, 2, &[q(0), q(-2), q(3)]);
    assert_eq!(s.exp().unwrap(), uni("q", &g, 2, &[q(1), q(-2), q(5)]));
    let y3 = grading(&[("y_3", q(1))]);
    let e = Series::var("y_3", y3.clone(), q(4)).unwrap().exp().unwrap();
    assert_eq!(e, uni("y_3", &y3, 4, &[q(1), q(1), frac(1, 2), frac(1, 6), frac(1, 24)]));
    assert!(Series::one(g, q(2)).exp().is_err());
}

#[test]
fn log_examples() {
    let g = grading(&[("q", q(1))]);
    assert!(Series::zero(g.clone(), q(3)).log_one_plus().unwrap().is_zero());
    let s = uni("q", &g, 3, &[q(0), q(-2)]);
    assert_eq!(s.log_one_plus().unwrap(), uni("q", &g, 3, &[q(0), q(-2), q(-2), frac(-8, 3)]));
}

#[test]
fn substitute_examples() {
    let gy = y_grading();
    let gq = grading(&[("q", q(1))]);
    let g0 = uni("y", &gy, 2, &[q(0), q(2), q(-15)]);
    let img = |c: &[Q], ord: i64| BTreeMap::from([("y".to_string(), uni("q", &gq, ord, c))]);
    assert_eq!(g0.substitute(&img(&[q(0), q(1)], 2), &q(2)).unwrap(), uni("q", &gq, 2, &[q(0), q(2), q(-15)]));
    let two_y = uni("y", &gy, 2, &[q(0), q(2)]);
    assert_eq!(two_y.substitute(&img(&[q(0), q(1), q(6)], 2), &q(2)).unwrap(), uni("q", &gq, 2, &[q(0), q(2), q(12)]));
    let g3 = uni("y", &gy, 3, &[q(0), q(2), q(-15), frac(560, 3)]);
    assert_eq!(
        g3.substitute(&img(&[q(0), q(1), q(6), q(9)], 3), &q(3)).unwrap(),
        uni("q", &gq, 3, &[q(0), q(2), q(-3), frac(74, 3)])
    );
    // unassigned variable
    let w = Series::var("w", grading(&[("w", q(1))]), q(2)).unwrap();
    assert!(w.substitute(&img(&[q(0), q(1)], 2), &q(2)).is_err());
    // image grade below the source grade
    let heavy = Series::var("y", grading(&[("y", q(2))]), q(4)).unwrap();
    assert!(heavy.substitute(&img(&[q(0), q(1)], 4), &q(4)).is_err());
}

#[test]
fn invert_identity() {
    let gy = y_grading();
    let rel = Relation { target: "q".into(), source: "y".into(), kind: RelationKind::Multiplicative, series: Series::zero(gy, q(4)) };
    let inv = invert_map(&[rel], grading(&[("q", q(1))]), &q(4)).unwrap();
    assert_eq!(inv["y"], Series::var("q", grading(&[("q", q(1))]), q(4)).unwrap());
}

#[test]
fn invert_kp2_mirror_map() {
    // q = y·exp(−3 g₀(y)), g₀ = 2y − 15y² + 560/3 y³ − 5775/2 y⁴
    let gy = y_grading();
    let gq = grading(&[("q", q(1))]);
    let f = uni("y", &gy, 4, &[q(0), q(-6), q(45), q(-560), frac(17325, 2)]);
    let rel = Relation { target: "q".into(), source: "y".into(), kind: RelationKind::Multiplicative, series: f };
    let inv = invert_map(&[rel], gq.clone(), &q(4)).unwrap();
    assert_eq!(inv["y"], uni("q", &gq, 4, &[q(0), q(1), q(6), q(9), q(56)]));
}

#[test]
fn invert_additive() {
    let gw = grading(&[("w", frac(1, 3))]);
    let gt = grading(&[("tau", frac(1, 3))]);
    let h = poly("w", &gw, 2, &[(4, 1, 0)]).add(&Series::from_terms([(Monomial::from_pairs([("w".to_string(), q(4))]), frac(-1, 648))], gw.clone(), frac(4, 3)).unwrap()).unwrap();
    let rel = Relation { target: "tau".into(), source: "w".into(), kind: RelationKind::Additive, series: h };
    let inv = invert_map(&[rel], gt.clone(), &frac(4, 3)).unwrap();
    let expect = Series::from_terms(
        [(Monomial::var("tau"), q(1)), (Monomial::from_pairs([("tau".to_string(), q(4))]), frac(1, 648))],
        gt,
        frac(4, 3),
    )
    .unwrap();
    assert_eq!(inv["w"], expect);
}

#[test]
fn non_triangular_system_is_rejected() {
    // t = s + s: linear part 2, the fixed point s ↦ t − s oscillates
    let gs = grading(&[("s", q(1))]);
    let h = Series::var("s", gs.clone(), q(3)).unwrap();
    let rel = Relation { target: "t".into(), source: "s".into(), kind: RelationKind::Additive, series: h };
    assert!(invert_map(&[rel], grading(&[("t", q(1))]), &q(3)).is_err());
}

#[test]
fn serialization_round_trip() {
    let g = grading(&[("q1", q(1)), ("tau_v3", frac(1, 3))]);
    let s = Series::from_terms(
        [
            (Monomial::one(), q(1)),
            (Monomial::from_pairs([("q1".to_string(), q(2)), ("tau_v3".to_string(), q(1))]), frac(-7, 5)),
            (Monomial::from_pairs([("tau_v3".to_string(), frac(3, 2))]), q(4)),
        ],
        g,
        q(3),
    )
    .unwrap();
    let doc = s.to_doc();
    let text = serde_json::to_string(&doc).unwrap();
    let back = Series::from_doc(&serde_json::from_str(&text).unwrap()).unwrap();
    assert_eq!(back, s);
    // canonical order: grade first
    assert_eq!(doc.terms[1].exponents["tau_v3"], "3/2");
}

fn two_var() -> Arc<Grading> {
    grading(&[("a", q(1)), ("b", q(2))])
}

prop_compose! {
    fn arb_series(constant: bool)(coeffs in prop::collection::vec((0i64..4, 0i64..3, -9i64..10, 1i64..4), 0..8), c in -3i64..4) -> Series {
        let g = two_var();
        let mut terms: Vec<(Monomial, Q)> = coeffs
            .into_iter()
            .filter(|(i, j, _, _)| i + j > 0)
            .map(|(i, j, n, d)| (Monomial::from_pairs([("a".to_string(), q(i)), ("b".to_string(), q(j))]), frac(n, d)))
            .collect();
        if constant {
            terms.push((Monomial::one(), q(c)));
        }
        Series::from_terms(terms, g, q(6)).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn ring_axioms(a in arb_series(true), b in arb_series(true), c in arb_series(true)) {
        prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
        prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
        prop_assert_eq!(a.mul(&b).unwrap().mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
        prop_assert_eq!(a.add(&b).unwrap().add(&c).unwrap(), a.add(&b.add(&c).unwrap()).unwrap());
        let lhs = a.mul(&b.add(&c).unwrap()).unwrap();
        let rhs = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
        prop_assert!(lhs.agrees_with(&rhs));
    }

    #[test]
    fn exp_log_round_trip(s in arb_series(false)) {
        let one = Series::one(s.grading().clone(), q(6));
        let e = s.exp().unwrap();
        prop_assert_eq!(e.sub(&one).unwrap().log_one_plus().unwrap(), s.clone());
        prop_assert_eq!(s.log_one_plus().unwrap().exp().unwrap().sub(&one).unwrap(), s);
    }
}
