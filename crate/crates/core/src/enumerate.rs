//! Effective classes d ∈ K_eff up to a grade bound, their sectors v(d) and
//! the index filters of the g-series.

use crate::boxes::BoxElement;
use crate::error::{Error, Result};
use crate::rational::{fract, is_integer, q, Q};
use crate::toric::ToricData;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use std::collections::BTreeMap;

const MODULE: &str = "class-enumerator";

#[derive(Debug, Clone, PartialEq)]
pub struct EffClass {
    /// (D_0·d, …, D_{m'-1}·d).
    pub pairings: Vec<Q>,
    /// Coordinates in the γ-basis.
    pub coords: Vec<Q>,
    pub grade: Q,
    pub sector: BoxElement,
}

impl EffClass {
    pub fn is_integral(&self) -> bool {
        self.pairings.iter().all(is_integer)
    }

    /// Indices with D_i·d a negative integer.
    pub fn negative_integral(&self) -> Vec<usize> {
        self.pairings.iter().enumerate().filter(|(_, x)| is_integer(x) && x.is_negative()).map(|(i, _)| i).collect()
    }
}

/// v(d) = Σ ⟨−D_i·d⟩ b_i with its minimal cone.
pub fn sector(data: &ToricData, pairings: &[Q]) -> Result<BoxElement> {
    let mut cone = Vec::new();
    let mut coefficients = Vec::new();
    for (i, x) in pairings.iter().enumerate() {
        let c = fract(&-x);
        if !c.is_zero() {
            cone.push(i);
            coefficients.push(c);
        }
    }
    if !cone.is_empty() && !data.fan.faces().contains(&cone) {
        return Err(Error::validation(MODULE, "sector", "fractional support does not span a cone; class is not in K")
            .with_datum(format!("{cone:?}")));
    }
    let mut exact = vec![Q::zero(); data.n()];
    for (i, c) in cone.iter().zip(&coefficients) {
        for (v, b) in exact.iter_mut().zip(data.fan.vector(*i)) {
            *v += c * q(*b);
        }
    }
    let vector = exact.iter().map(|x| crate::rational::to_i64(x).expect("box vector is integral")).collect();
    let age = coefficients.iter().sum();
    Ok(BoxElement { vector, cone, coefficients, age })
}

/// Builds the class with the given pairing vector; validates K_eff membership.
pub fn make_class(data: &ToricData, pairings: Vec<Q>) -> Result<EffClass> {
    if data.boundary(&pairings).iter().any(|x| !x.is_zero()) {
        return Err(Error::validation(MODULE, "make_class", "pairings violate the fan relation"));
    }
    let nonneg: Vec<usize> =
        pairings.iter().enumerate().filter(|(_, x)| is_integer(x) && !x.is_negative()).map(|(i, _)| i).collect();
    if !data.anticones.iter().any(|a| a.iter().all(|i| nonneg.contains(i))) {
        return Err(Error::validation(MODULE, "make_class", "class is not effective"));
    }
    let coords = data.coords(&pairings);
    let grade = coords.iter().sum();
    let sector = sector(data, &pairings)?;
    Ok(EffClass { pairings, coords, grade, sector })
}

/// All d ∈ K_eff with 0 < grade(d) ≤ bound, sorted by (grade, pairings).
///
/// For each maximal cone σ the classes with D_i·d = x_i ∈ Z≥0 on the
/// complement I of σ are Σ x_i d^{σ,i}; the grade is linear and positive on
/// these generators, so the walk over x_I is finite.
pub fn enumerate_effective(data: &ToricData, bound: &Q) -> Result<Vec<EffClass>> {
    let mut by_cone: BTreeMap<usize, Vec<(&[Q], Q)>> = BTreeMap::new();
    for g in &data.generators {
        let grade = data.grade(&g.pairings);
        if !grade.is_positive() {
            return Err(Error::validation(MODULE, "enumerate_effective", "grading is not positive on a K_eff generator")
                .with_datum(format!("cone {} index {}", g.cone, g.index)));
        }
        by_cone.entry(g.cone).or_default().push((&g.pairings, grade));
    }
    let me = data.m_ext();
    let found: Vec<Vec<Vec<Q>>> = by_cone
        .values()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|gens| {
            let mut out = Vec::new();
            walk(gens, 0, &vec![Q::zero(); me], &Q::zero(), bound, &mut out);
            out
        })
        .collect();
    let mut unique: BTreeMap<Vec<Q>, ()> = BTreeMap::new();
    for p in found.into_iter().flatten() {
        unique.insert(p, ());
    }
    let mut classes = unique
        .into_keys()
        .filter(|p| p.iter().any(|x| !x.is_zero()))
        .map(|p| make_class(data, p))
        .collect::<Result<Vec<_>>>()?;
    classes.sort_by(|a, b| (&a.grade, &a.pairings).cmp(&(&b.grade, &b.pairings)));
    Ok(classes)
}

fn walk(gens: &[(&[Q], Q)], k: usize, acc: &[Q], grade: &Q, bound: &Q, out: &mut Vec<Vec<Q>>) {
    if k == gens.len() {
        out.push(acc.to_vec());
        return;
    }
    let (dir, step) = &gens[k];
    let mut cur = acc.to_vec();
    let mut g = grade.clone();
    loop {
        walk(gens, k + 1, &cur, &g, bound, out);
        g += step;
        if g > *bound {
            break;
        }
        for (c, d) in cur.iter_mut().zip(dir.iter()) {
            *c += d;
        }
    }
}

/// g_j for a ray j: v(d) = 0, D_j·d a negative integer, every other pairing
/// a nonnegative integer.
pub fn filter_g_smooth(classes: &[EffClass], j: usize) -> Vec<EffClass> {
    classes
        .iter()
        .filter(|d| {
            d.sector.vector.iter().all(|x| *x == 0)
                && d.pairings.iter().enumerate().all(|(i, x)| is_integer(x) && (x.is_negative() == (i == j)))
        })
        .cloned()
        .collect()
}

/// g_j for an extra vector j: v(d) = b_j and no pairing is a negative integer.
pub fn filter_g_orbi(data: &ToricData, classes: &[EffClass], j: usize) -> Vec<EffClass> {
    let bj = data.fan.vector(j);
    classes.iter().filter(|d| d.sector.vector == bj && d.negative_integral().is_empty()).cloned().collect()
}

/// Independent grid scan over γ-coordinates in (1/L)Z≥0 with Σ coords ≤ bound,
/// L the lcm of box denominators. Returns sorted pairing vectors.
pub fn enumerate_brute_force(data: &ToricData, bound: &Q) -> Vec<Vec<Q>> {
    let boxes = crate::boxes::box_elements(&data.fan);
    let mut l = num_bigint::BigInt::from(1);
    for e in &boxes.elements {
        for c in &e.coefficients {
            l = l.lcm(c.denom());
        }
    }
    let step = Q::new(1.into(), l);
    let r = data.r();
    let mut out = Vec::new();
    let mut coords = vec![Q::zero(); r];
    fn rec(data: &ToricData, k: usize, coords: &mut Vec<Q>, used: &Q, step: &Q, bound: &Q, out: &mut Vec<Vec<Q>>) {
        if k == coords.len() {
            if used.is_zero() {
                return;
            }
            let p = data.from_coords(coords);
            let nonneg: Vec<usize> =
                p.iter().enumerate().filter(|(_, x)| is_integer(x) && !x.is_negative()).map(|(i, _)| i).collect();
            if data.anticones.iter().any(|a| a.iter().all(|i| nonneg.contains(i))) {
                out.push(p);
            }
            return;
        }
        let mut c = Q::zero();
        while &(used + &c) <= bound {
            coords[k] = c.clone();
            rec(data, k + 1, coords, &(used + &c), step, bound, out);
            c += step;
        }
        coords[k] = Q::zero();
    }
    rec(data, 0, &mut coords, &Q::zero(), &step, bound, &mut out);
    out.sort();
    out
}
