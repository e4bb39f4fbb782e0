mod common;

use common::*;
use toricgw::compactify::Disk;
use toricgw::invariants::{compare_with_oracle, disk_potential, extract_invariants, Normalization};
use toricgw::series::Monomial;
use toricgw::ErrorKind;

fn mono(pairs: &[(&str, i64)]) -> Monomial {
    Monomial::from_pairs(pairs.iter().map(|(v, e)| (v.to_string(), q(*e))))
}

#[test]
fn kp2_smooth_disk_potential() {
    let dp = disk_potential(&data("kp2"), Disk::Ray(0), &q(4)).unwrap();
    assert_eq!(dp.normalization, Normalization::Smooth);
    let want = [1, -2, 5, -32, 286];
    for (k, c) in want.iter().enumerate() {
        assert_eq!(dp.series.coefficient(&mono(&[("q1", k as i64)])), q(*c), "q^{k}");
    }
    let table = extract_invariants(&dp).unwrap();
    assert_eq!(table.get(&[3], &[]), Some(&q(-32)));
    assert_eq!(table.entries.len(), 5);
}

#[test]
fn c3_disk_potential_is_trivial() {
    let dp = disk_potential(&data("c3"), Disk::Ray(2), &q(6)).unwrap();
    assert_eq!(dp.series.terms().len(), 1);
    assert!(dp.series.constant_term() == q(1));
}

#[test]
fn c3z3_orbi_disk_potential() {
    let d = data("c3z3");
    let dp = disk_potential(&d, Disk::Box(3), &q(4)).unwrap();
    assert_eq!(dp.normalization, Normalization::Orbi);
    assert_eq!(dp.series.coefficient(&mono(&[("tau_v3", 1)])), q(1));
    assert_eq!(dp.series.coefficient(&mono(&[("tau_v3", 4)])), frac(1, 648));
    assert_eq!(dp.series.coefficient(&mono(&[("tau_v3", 7)])), frac(-29, 3674160));
    assert_eq!(dp.series.terms().len(), 4);
    let table = extract_invariants(&dp).unwrap();
    assert_eq!(table.get(&[], &[("v3", 4)]), Some(&frac(1, 27)));
    assert_eq!(table.get(&[], &[("v3", 1)]), Some(&q(1)));
    assert_eq!(table.get(&[], &[("v3", 7)]), Some(&frac(-29, 729)));
}

#[test]
fn disk_potentials_match_relative_oracle() {
    for (name, disk, order) in [("c3", Disk::Ray(2), q(5)), ("kp2", Disk::Ray(0), q(4)), ("c3z3", Disk::Box(3), frac(13, 3))] {
        let cd = compactified(name, disk);
        let report = compare_with_oracle(&cd, &order).unwrap();
        assert!(report.matches(), "{name}: {:?}", report.first_difference);
        assert!(!report.oracle_potential.is_zero());
    }
}

#[test]
fn invalid_disk_is_rejected() {
    let err = disk_potential(&data("kp2"), Disk::Ray(9), &q(2)).unwrap_err();
    assert_eq!(err.kind, ErrorKind::Validation);
    let err = disk_potential(&data("kp2"), Disk::Box(0), &q(2)).unwrap_err();
    assert_eq!(err.kind, ErrorKind::Validation);
}
