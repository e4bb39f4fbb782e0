//! Box elements: lattice points Σ c_k b_k with 0 ≤ c_k < 1 over a cone.

use crate::error::{Error, Result};
use crate::fan::StackyFan;
use crate::lattice;
use crate::rational::{fract, q, Q};
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use std::collections::BTreeMap;

const MODULE: &str = "fan-core";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct BoxElement {
    pub vector: Vec<i64>,
    /// Rays of the minimal cone containing `vector`.
    pub cone: Vec<usize>,
    #[serde(serialize_with = "ser_qs")]
    pub coefficients: Vec<Q>,
    #[serde(with = "crate::rational::serde_q")]
    pub age: Q,
}

fn ser_qs<S: serde::Serializer>(xs: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(xs.iter().map(crate::rational::format_q))
}

impl BoxElement {
    pub fn is_zero(&self) -> bool {
        self.vector.iter().all(|x| *x == 0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxSet {
    /// Nonzero box elements, sorted by (age, vector).
    pub elements: Vec<BoxElement>,
    pub age_one: Vec<BoxElement>,
}

fn cone_matrix(fan: &StackyFan, cone: &[usize]) -> Vec<Vec<Q>> {
    (0..fan.rank).map(|r| cone.iter().map(|&k| q(fan.rays[k][r])).collect()).collect()
}

fn element_from(fan: &StackyFan, cone: &[usize], c: Vec<Q>) -> BoxElement {
    let mut vector = vec![0i64; fan.rank];
    // accumulate exactly, then convert
    let mut exact = vec![Q::zero(); fan.rank];
    for (k, ck) in cone.iter().zip(&c) {
        for (v, b) in exact.iter_mut().zip(&fan.rays[*k]) {
            *v += ck * q(*b);
        }
    }
    for (v, e) in vector.iter_mut().zip(&exact) {
        *v = crate::rational::to_i64(e).expect("box element is a lattice point");
    }
    let (face, coefficients): (Vec<usize>, Vec<Q>) = cone.iter().zip(c).filter(|(_, x)| !x.is_zero()).map(|(&i, x)| (i, x)).unzip();
    let age = coefficients.iter().sum();
    BoxElement { vector, cone: face, coefficients, age }
}

/// Box of a full-dimensional simplicial cone via the Smith form of its ray
/// matrix B: with P B Q = D, the coefficients of the group elements are
/// Q·(t_i / s_i) taken modulo 1.
fn cone_box(fan: &StackyFan, cone: &[usize]) -> Vec<BoxElement> {
    let k = cone.len();
    let b: Vec<Vec<i128>> = (0..fan.rank).map(|r| cone.iter().map(|&i| fan.rays[i][r] as i128).collect()).collect();
    let s = lattice::smith(&b, fan.rank, k);
    let inv = &s.invariants;
    let mut out = Vec::new();
    let total: i128 = inv.iter().product();
    for idx in 0..total {
        let mut t = Vec::with_capacity(k);
        let mut rest = idx;
        for &si in inv {
            t.push(rest % si);
            rest /= si;
        }
        let c: Vec<Q> = (0..k)
            .map(|row| {
                let x: Q = (0..k).map(|col| q(s.q[row][col] as i64) * Q::new((t[col] as i64).into(), (inv[col] as i64).into())).sum();
                fract(&x)
            })
            .collect();
        out.push(element_from(fan, cone, c));
    }
    out
}

/// All nonzero box elements of the fan, over every listed cone.
pub fn box_elements(fan: &StackyFan) -> BoxSet {
    let mut seen: BTreeMap<Vec<i64>, BoxElement> = BTreeMap::new();
    for cone in &fan.cones {
        for e in cone_box(fan, cone) {
            if !e.is_zero() {
                seen.entry(e.vector.clone()).or_insert(e);
            }
        }
    }
    let mut elements: Vec<BoxElement> = seen.into_values().collect();
    elements.sort_by(|a, b| (&a.age, &a.vector).cmp(&(&b.age, &b.vector)));
    let age_one = elements.iter().filter(|e| e.age.is_one()).cloned().collect();
    BoxSet { elements, age_one }
}

/// CY mode: the declared extra vectors must be exactly the age-1 box elements.
pub fn check_extra_vectors(fan: &StackyFan, boxes: &BoxSet) -> Result<()> {
    let mut declared: Vec<Vec<i64>> = fan.extra_vectors.clone();
    declared.sort();
    let mut computed: Vec<Vec<i64>> = boxes.age_one.iter().map(|e| e.vector.clone()).collect();
    computed.sort();
    if declared != computed {
        return Err(Error::validation(MODULE, "box_elements", "declared extra_vectors differ from the age-1 box elements")
            .with_datum(format!("declared {declared:?}, computed {computed:?}")));
    }
    Ok(())
}

/// Brute-force oracle: scans the bounding box of each cone's fundamental
/// parallelepiped and keeps the points with coefficients in [0,1).
pub fn box_elements_oracle(fan: &StackyFan) -> Vec<Vec<i64>> {
    let mut found = std::collections::BTreeSet::new();
    for cone in &fan.cones {
        let a = cone_matrix(fan, cone);
        let (lo, hi): (Vec<i64>, Vec<i64>) = (0..fan.rank)
            .map(|r| {
                let neg: i64 = cone.iter().map(|&k| fan.rays[k][r].min(0)).sum();
                let pos: i64 = cone.iter().map(|&k| fan.rays[k][r].max(0)).sum();
                (neg, pos)
            })
            .unzip();
        let mut point = lo.clone();
        loop {
            let b: Vec<Q> = point.iter().map(|&x| q(x)).collect();
            if let Some(c) = lattice::solve(&a, &b) {
                let inside = c.iter().all(|x| !x.is_negative() && x < &Q::one());
                if inside && point.iter().any(|&x| x != 0) && lattice::rank(&a) == cone.len() {
                    found.insert(point.clone());
                }
            }
            let mut d = 0;
            loop {
                if d == point.len() {
                    break;
                }
                if point[d] < hi[d] {
                    point[d] += 1;
                    break;
                }
                point[d] = lo[d];
                d += 1;
            }
            if d == point.len() {
                break;
            }
        }
    }
    found.into_iter().collect()
}
