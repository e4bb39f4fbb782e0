mod common;

use common::*;
use toricgw::compactify::Disk;
use toricgw::enumerate::{enumerate_effective, make_class};
use toricgw::ifunction::{
    hyper_factor, hyper_factor_closed_form, hyper_factor_direct, relative_ifunction_oracle, z_extract, FactorExpansion,
};
use toricgw::series::Monomial;

#[test]
fn hyper_factor_examples() {
    assert_eq!(hyper_factor(&q(0)), FactorExpansion { z_exponent: 0, scalar: q(1), forced_divisor: 0 });
    assert_eq!(hyper_factor(&q(-3)), FactorExpansion { z_exponent: 2, scalar: q(2), forced_divisor: 1 });
    assert_eq!(hyper_factor(&frac(-4, 3)), FactorExpansion { z_exponent: 1, scalar: frac(-1, 3), forced_divisor: 0 });
    assert_eq!(hyper_factor(&q(3)), FactorExpansion { z_exponent: -3, scalar: frac(1, 6), forced_divisor: 0 });
}

#[test]
fn hyper_factor_agrees_with_direct_products() {
    for num in -40..=40 {
        for den in [1, 2, 3, 5] {
            let p = frac(num, den);
            assert_eq!(hyper_factor(&p), hyper_factor_direct(&p), "p = {p}");
        }
    }
    for p in -12..=12 {
        assert_eq!(hyper_factor(&q(p)), hyper_factor_closed_form(p));
    }
}

#[test]
fn z_extract_examples() {
    let kp2 = data("kp2");
    let d = make_class(&kp2, ints(&[-3, 1, 1, 1])).unwrap();
    let x = z_extract(&kp2, &d, None).unwrap();
    assert_eq!(x.z1_divisor_linear(), Some((0, &q(2))));

    let c3z3 = data("c3z3");
    let d = make_class(&c3z3, qs(&[(-1, 3), (-1, 3), (-1, 3), (1, 1)])).unwrap();
    let x = z_extract(&c3z3, &d, None).unwrap();
    assert_eq!(x.z1_scalar(), Some((&[0i64, 0, 1][..], &q(1))));

    let cd = compactified("kp2", Disk::Ray(0));
    let d = make_class(&cd.bar, cd.d_infinity.clone()).unwrap();
    let x = z_extract(&cd.bar, &d, Some(cd.infinity)).unwrap();
    assert_eq!(x.z2_h0(), Some(&q(1)));
}

#[test]
fn z_power_balances_age() {
    for name in ["conifold", "kp2", "c3z3"] {
        let d = data(name);
        for c in enumerate_effective(&d, &q(4)).unwrap() {
            let x = z_extract(&d, &c, None).unwrap();
            assert_eq!(q(x.z_exponent + x.forced.len() as i64), -c.sector.age.clone(), "{name}");
        }
    }
}

#[test]
fn relative_oracle_z2_is_single_monomial() {
    for (name, disk) in [("c3", Disk::Ray(2)), ("kp2", Disk::Ray(0)), ("c3z3", Disk::Box(3))] {
        let cd = compactified(name, disk);
        for bound in 1..=6 {
            let o = relative_ifunction_oracle(&cd, &q(bound)).unwrap();
            let terms = o.z2_h0.terms();
            assert_eq!(terms.len(), 1, "{name} bound {bound}");
            assert_eq!(terms[0].0, o.coords.y_monomial(&cd.d_infinity).unwrap());
            assert_eq!(terms[0].1, q(1));
        }
    }
}

#[test]
fn kp2_divisor_piece_is_g0() {
    let cd = compactified("kp2", Disk::Ray(0));
    let o = relative_ifunction_oracle(&cd, &q(4)).unwrap();
    let g = &o.z1_pieces[&0];
    assert!(!o.z1_pieces.contains_key(&cd.infinity));
    let y = |k: i64| Monomial::from_pairs([("y1".to_string(), q(k))]);
    assert_eq!(g.coefficient(&y(1)), q(2));
    assert_eq!(g.coefficient(&y(2)), q(-15));
    assert_eq!(g.coefficient(&y(3)), frac(560, 3));
}
