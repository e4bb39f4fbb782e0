mod common;

use common::*;
use toricgw::boxes::{box_elements, box_elements_oracle, check_extra_vectors};
use toricgw::compactify::{validate_compactification, Disk};
use toricgw::error::ErrorKind;
use toricgw::toric::verify_semi_fano;
use toricgw::{kernel_data, parse_stacky_fan, verify_calabi_yau};

const ALL: [&str; 8] = ["c3", "conifold", "kp2", "c3z3", "kf0", "c3_bar", "kp2_bar", "c3z3_bar"];

#[test]
fn parses_bundled_fans() {
    assert_eq!(fan("c3").m_ext(), 3);
    assert_eq!(fan("kp2").m(), 4);
    let f = fan("c3z3");
    assert_eq!((f.m(), f.m_ext()), (3, 4));
}

#[test]
fn rejects_bad_fans() {
    let cases = [
        r#"{"rank": 2, "rays": [[2,0],[0,1]], "cones": [[0,1]]}"#,
        r#"{"rank": 2, "rays": [[1,0],[1,0]], "cones": [[0],[1]]}"#,
        r#"{"rank": 2, "rays": [[1,0],[0,1],[1,1]], "cones": [[0,1,2]]}"#,
        r#"{"rank": 2, "rays": [[1,0],[0,1]], "cones": [[0,1]], "extra_vectors": [[-1,0]]}"#,
        r#"{"rank": 2, "rays": [[1,0],[1,2]], "cones": [[0,1]]}"#,
        r#"{"rank": 2, "rays": [[1,0]"#,
        r#"{"rank": 2, "rays": [[1,0],[0,1],[1,1]], "cones": [[0,1],[0,2]]}"#,
    ];
    for c in cases {
        let e = parse_stacky_fan(c).unwrap_err();
        assert_eq!(e.kind, ErrorKind::Validation, "{c}");
    }
}

#[test]
fn kernel_examples() {
    assert_eq!(data("c3").r(), 0);
    let kp2 = data("kp2");
    assert_eq!(kp2.kernel_basis, vec![ints(&[-3, 1, 1, 1])]);
    let con = data("conifold");
    assert_eq!(con.kernel_basis.len(), 1);
    let g = &con.kernel_basis[0];
    assert!(g == &ints(&[1, -1, -1, 1]) || g == &ints(&[-1, 1, 1, -1]));
    let z3 = data("c3z3");
    assert_eq!(z3.r(), 1);
    assert_eq!(z3.r_h2, 0);
}

#[test]
fn kernel_relations_hold_everywhere() {
    for name in ALL {
        let d = data(name);
        for g in &d.kernel_basis {
            assert!(d.boundary(g).iter().all(|x| x == &q(0)), "{name}");
        }
        for gen in &d.generators {
            assert!(d.grade(&gen.pairings) > q(0), "{name}");
        }
    }
}

#[test]
fn user_basis_is_checked() {
    let ok = r#"{"rank": 3, "rays": [[0,0,1],[1,0,1],[0,1,1],[-1,-1,1]], "cones": [[0,1,2],[0,2,3],[0,1,3]],
        "basis_p": [["0","1","0","0"]]}"#;
    let d = kernel_data(&parse_stacky_fan(ok).unwrap()).unwrap();
    assert_eq!(d.kernel_basis, vec![ints(&[-3, 1, 1, 1])]);
    let bad = ok.replace(r#"["0","1","0","0"]"#, r#"["0","2","0","0"]"#);
    assert!(kernel_data(&parse_stacky_fan(&bad).unwrap()).is_err());
    // D_0 = -3 p is not nef
    let neg = ok.replace(r#"["0","1","0","0"]"#, r#"["0","-1","0","0"]"#);
    assert!(kernel_data(&parse_stacky_fan(&neg).unwrap()).is_err());
}

#[test]
fn box_examples() {
    assert!(box_elements(&fan("c3")).elements.is_empty());
    assert!(box_elements(&fan("conifold")).elements.is_empty());
    let b = box_elements(&fan("c3z3"));
    assert_eq!(b.elements.len(), 2);
    assert_eq!(b.elements[0].vector, vec![0, 0, 1]);
    assert_eq!(b.elements[0].coefficients, qs(&[(1, 3), (1, 3), (1, 3)]));
    assert_eq!(b.elements[0].age, q(1));
    assert_eq!(b.elements[1].vector, vec![0, 0, 2]);
    assert_eq!(b.elements[1].age, q(2));
    assert_eq!(b.age_one.len(), 1);
    check_extra_vectors(&fan("c3z3"), &b).unwrap();
    let missing = parse_stacky_fan(r#"{"rank": 3, "rays": [[1,0,1],[0,1,1],[-1,-1,1]], "cones": [[0,1,2]], "extra_vectors": [[0,0,2]]}"#).unwrap();
    assert!(check_extra_vectors(&missing, &box_elements(&missing)).is_err());
}

#[test]
fn boxes_match_brute_force() {
    for name in ALL {
        let f = fan(name);
        let fast: Vec<Vec<i64>> = box_elements(&f).elements.into_iter().map(|e| e.vector).collect();
        let mut fast_sorted = fast.clone();
        fast_sorted.sort();
        assert_eq!(fast_sorted, box_elements_oracle(&f), "{name}");
        for e in box_elements(&f).elements {
            let mut v = vec![q(0); f.rank];
            for (k, c) in e.cone.iter().zip(&e.coefficients) {
                for (x, b) in v.iter_mut().zip(&f.rays[*k]) {
                    *x += c * q(*b);
                }
            }
            assert_eq!(v, ints(&e.vector));
        }
    }
}

#[test]
fn dual_class_examples() {
    let z3 = data("c3z3");
    let dc = z3.dual_class(3).unwrap();
    assert_eq!(dc.pairings, qs(&[(-1, 3), (-1, 3), (-1, 3), (1, 1)]));
    assert!(z3.dual_class(2).is_err());
    let on_ray = parse_stacky_fan(
        r#"{"rank": 2, "rays": [[1,0],[1,2]], "cones": [[0,1]], "extra_vectors": [[1,1]]}"#,
    )
    .unwrap();
    let d = kernel_data(&on_ray).unwrap();
    assert_eq!(d.dual_classes[0].pairings, qs(&[(-1, 2), (-1, 2), (1, 1)]));
}

#[test]
fn calabi_yau_examples() {
    assert_eq!(verify_calabi_yau(&fan("c3")), Some(vec![1, 1, 1]));
    assert_eq!(verify_calabi_yau(&fan("kp2")), Some(vec![0, 0, 1]));
    let line = parse_stacky_fan(r#"{"rank": 1, "rays": [[1],[-1]], "cones": [[0],[1]]}"#).unwrap();
    assert_eq!(verify_calabi_yau(&line), None);
    assert!(kernel_data(&line).unwrap().require_calabi_yau().is_err());
}

#[test]
fn semi_fano_examples() {
    for name in ["c3", "conifold", "kp2", "c3z3"] {
        assert!(verify_semi_fano(&data(name)).holds(), "{name}");
    }
    let o4 = parse_stacky_fan(
        r#"{"rank": 3, "rays": [[0,0,1],[1,0,1],[0,1,1],[-1,-2,1]], "cones": [[0,1,2],[0,2,3],[0,1,3]]}"#,
    );
    // (−1,−2,1) with these cones: the fan is still CY; semi-Fano decided by feasibility
    if let Ok(f) = o4 {
        if let Ok(d) = kernel_data(&f) {
            assert!(d.cy_covector.is_some());
            let _ = verify_semi_fano(&d);
        }
    }
}

#[test]
fn anticones_are_upward_closed() {
    for name in ALL {
        let d = data(name);
        for a in &d.anticones {
            for extra in 0..d.m_ext() {
                if !a.contains(&extra) {
                    let mut b = a.clone();
                    b.push(extra);
                    assert!(d.is_anticone(&b), "{name}: {b:?}");
                }
            }
        }
    }
}

#[test]
fn compactification_examples() {
    let kp2 = compactified("kp2", Disk::Ray(0));
    assert_eq!(kp2.beta_bar[kp2.infinity], q(1));
    assert_eq!(kp2.d_infinity, ints(&[1, 0, 0, 0, 1]));
    let c3 = compactified("c3", Disk::Ray(2));
    assert_eq!(c3.beta_bar, ints(&[0, 0, 1, 1]));
    let z3 = compactified("c3z3", Disk::Box(3));
    assert_eq!(z3.beta_bar, qs(&[(1, 3), (1, 3), (1, 3), (1, 1), (0, 1)]));
}

#[test]
fn compactification_errors() {
    let incomplete = parse_stacky_fan(
        r#"{"rank": 3, "rays": [[0,0,1],[1,0,1],[0,1,1],[-1,-1,1],[0,0,-1]], "cones": [[0,1,2],[0,2,3],[0,1,3],[1,2,4]]}"#,
    )
    .unwrap();
    let e = validate_compactification(&data("kp2"), &incomplete, Disk::Ray(0)).unwrap_err();
    assert!(e.message.contains("incomplete"), "{e}");
    let no_inf = fan("kp2");
    assert!(validate_compactification(&data("kp2"), &no_inf, Disk::Ray(0)).is_err());
    assert!(validate_compactification(&data("kp2"), &fan("kp2_bar"), Disk::Ray(1)).is_err());
    assert!(validate_compactification(&data("kp2"), &fan("kp2_bar"), Disk::Box(4)).is_err());
}
