//! Toric compactification data: the fan Σ̄ obtained by adjoining
//! b_∞ = −b_{i₀}, the classes d_∞ and β̄′, and validation of a supplied Σ̄.

use crate::error::{Error, Result};
use crate::fan::{FanDocument, StackyFan};
use crate::lattice;
use crate::rational::{q, Q};
use crate::toric::{kernel_data_with_basis, ToricData};
use num_traits::{One, Signed, Zero};
use std::fmt;

const MODULE: &str = "fan-core";

/// Basic disk class selector: a ray `b_i` or an age-1 extra vector `b_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Disk {
    Ray(usize),
    Box(usize),
}

impl Disk {
    pub fn index(&self) -> usize {
        match *self {
            Disk::Ray(i) | Disk::Box(i) => i,
        }
    }

    /// Checks the selector against a fan with `m` rays and `m_ext` vectors.
    pub fn check(&self, m: usize, m_ext: usize) -> Result<()> {
        let ok = match *self {
            Disk::Ray(i) => i < m,
            Disk::Box(j) => (m..m_ext).contains(&j),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::validation("invariants", "disk_potential", "disk selector out of range").with_datum(self))
        }
    }
}

impl fmt::Display for Disk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Disk::Ray(i) => write!(f, "ray:{i}"),
            Disk::Box(j) => write!(f, "box:{j}"),
        }
    }
}

impl std::str::FromStr for Disk {
    type Err = Error;
    fn from_str(s: &str) -> Result<Disk> {
        let err = || Error::validation("cli", "parse_disk", "expected ray:<i> or box:<j>").with_datum(s);
        let (kind, idx) = s.split_once(':').ok_or_else(err)?;
        let idx: usize = idx.trim().parse().map_err(|_| err())?;
        match kind.trim() {
            "ray" => Ok(Disk::Ray(idx)),
            "box" => Ok(Disk::Box(idx)),
            _ => Err(err()),
        }
    }
}

/// Σ̄ together with its relation to Σ. Bar-fan vectors are indexed as the
/// base rays, then b_∞ (index m), then the base extra vectors shifted by one.
#[derive(Debug, Clone)]
pub struct CompactifiedData {
    pub base: ToricData,
    pub bar: ToricData,
    pub disk: Disk,
    /// Index of D_∞ among the bar vectors.
    pub infinity: usize,
    /// Pairings of d_∞ = e_{i₀} + e_∞ (bar indexing).
    pub d_infinity: Vec<Q>,
    /// Pairings of β̄′ = β′ + β_∞ (bar indexing).
    pub beta_bar: Vec<Q>,
}

impl CompactifiedData {
    /// Position of base vector `i` among the bar vectors.
    pub fn bar_index(&self, i: usize) -> usize {
        bar_index(self.base.m(), i)
    }

    /// Extends a base pairing vector by D_∞·d = 0.
    pub fn extend(&self, pairings: &[Q]) -> Vec<Q> {
        extend(self.base.m(), pairings)
    }

    /// Restricts a bar pairing vector with D_∞·d = 0 to the base.
    pub fn restrict(&self, pairings: &[Q]) -> Option<Vec<Q>> {
        if !pairings[self.infinity].is_zero() {
            return None;
        }
        let m = self.base.m();
        Some(pairings.iter().enumerate().filter(|(i, _)| *i != m).map(|(_, x)| x.clone()).collect())
    }
}

fn bar_index(m: usize, i: usize) -> usize {
    if i < m {
        i
    } else {
        i + 1
    }
}

fn extend(m: usize, pairings: &[Q]) -> Vec<Q> {
    let mut out = pairings.to_vec();
    out.insert(m, Q::zero());
    out
}

/// Reorders a supplied Σ̄ into the canonical bar indexing and validates it.
fn normalize_bar(base: &StackyFan, bar: &StackyFan, b_inf: &[i64]) -> Result<StackyFan> {
    let op = "validate_compactification";
    if bar.rank != base.rank {
        return Err(Error::validation(MODULE, op, "bar fan has a different rank"));
    }
    let inf_pos = bar
        .rays
        .iter()
        .position(|r| r == b_inf)
        .ok_or_else(|| Error::validation(MODULE, op, "missing ray -b for the disk class").with_datum(format!("{b_inf:?}")))?;
    let m = base.m();
    if bar.rays.len() != m + 1 {
        return Err(Error::validation(MODULE, op, "bar fan must have exactly the base rays plus b_inf"));
    }
    // old bar index -> new index
    let mut perm = vec![usize::MAX; m + 1];
    perm[inf_pos] = m;
    for (old, ray) in bar.rays.iter().enumerate() {
        if old == inf_pos {
            continue;
        }
        perm[old] = base.rays.iter().position(|r| r == ray).ok_or_else(|| {
            Error::validation(MODULE, op, "bar fan ray is not a base ray").with_datum(format!("{ray:?}"))
        })?;
    }
    let mut bar_extras = bar.extra_vectors.clone();
    let mut base_extras = base.extra_vectors.clone();
    bar_extras.sort();
    base_extras.sort();
    if bar_extras != base_extras {
        return Err(Error::validation(MODULE, op, "bar fan must carry the same extra vectors as the base"));
    }
    let mut rays = base.rays.clone();
    rays.push(b_inf.to_vec());
    let cones: Vec<Vec<usize>> = bar.cones.iter().map(|c| c.iter().map(|&i| perm[i]).collect()).collect();
    let mut labels: Vec<String> = (0..m).map(|i| base.label(i)).collect();
    labels.push("inf".into());
    labels.extend((m..base.m_ext()).map(|j| base.label(j)));
    let doc = FanDocument {
        rank: base.rank,
        rays,
        cones,
        extra_vectors: base.extra_vectors.clone(),
        basis_p: None,
        labels: Some(labels),
    };
    StackyFan::from_document(doc)
}

/// Rational normal of the hyperplane spanned by `vectors` (n−1 of them).
fn facet_normal(vectors: &[&[i64]], n: usize) -> Vec<Q> {
    let a: Vec<Vec<Q>> = vectors.iter().map(|v| v.iter().map(|&x| q(x)).collect()).collect();
    let zero = vec![Q::zero(); vectors.len()];
    let (_, ker) = if a.is_empty() {
        (vec![], (0..n).map(|i| (0..n).map(|k| if i == k { Q::one() } else { Q::zero() }).collect()).collect())
    } else {
        lattice::solve_affine(&a, &zero).expect("homogeneous system")
    };
    ker.into_iter().next().expect("facet spans a hyperplane")
}

fn pairing(u: &[Q], v: &[i64]) -> Q {
    u.iter().zip(v).map(|(a, &b)| a * q(b)).sum()
}

/// Exact check that |Σ̄| equals the convex cone C = |Σ| + R·b_{i₀}. Every
/// facet of a maximal cone is either shared by exactly two maximal cones on
/// opposite sides or lies on a supporting hyperplane of C. When b_{i₀} is
/// interior to |Σ|, C is all of N_R and this is completeness.
pub fn check_completeness(bar: &StackyFan, base: &StackyFan, direction: &[i64]) -> Result<()> {
    let op = "validate_compactification";
    let n = bar.rank;
    let neg: Vec<i64> = direction.iter().map(|x| -x).collect();
    let generators: Vec<&[i64]> =
        base.rays.iter().map(|r| r.as_slice()).chain([direction, neg.as_slice()]).collect();
    for (ci, cone) in bar.cones.iter().enumerate() {
        if cone.len() != n {
            return Err(Error::validation(MODULE, op, "incomplete fan: maximal cone of lower dimension").with_datum(format!("{cone:?}")));
        }
        for &k in cone {
            let facet: Vec<usize> = cone.iter().copied().filter(|&x| x != k).collect();
            let u = facet_normal(&facet.iter().map(|&i| bar.rays[i].as_slice()).collect::<Vec<_>>(), n);
            let side = pairing(&u, &bar.rays[k]).signum();
            let others: Vec<(usize, Q)> = bar
                .cones
                .iter()
                .enumerate()
                .filter(|(cj, c)| *cj != ci && facet.iter().all(|f| c.contains(f)))
                .map(|(cj, c)| {
                    let apex = c.iter().find(|x| !facet.contains(x)).expect("maximal cone");
                    (cj, pairing(&u, &bar.rays[*apex]).signum())
                })
                .collect();
            match others.as_slice() {
                [] => {
                    let signs: Vec<Q> = generators.iter().map(|g| pairing(&u, g)).collect();
                    let supporting = signs.iter().all(|s| !s.is_negative()) || signs.iter().all(|s| !s.is_positive());
                    if !supporting {
                        return Err(Error::validation(MODULE, op, "incomplete fan: unmatched facet inside the support")
                            .with_datum(format!("{facet:?}")));
                    }
                }
                [(_, s)] if *s == -side.clone() => {}
                _ => {
                    return Err(Error::validation(MODULE, op, "incomplete fan: facet shared inconsistently")
                        .with_datum(format!("{facet:?}")));
                }
            }
        }
    }
    // coverage of the test vectors lying in C
    for v in &generators {
        if bar.locate(v).is_none() {
            return Err(Error::validation(MODULE, op, "incomplete fan").with_datum(format!("{v:?} lies in no cone")));
        }
    }
    for r in &base.rays {
        for t in [direction, neg.as_slice()] {
            let v: Vec<i64> = r.iter().zip(t).map(|(a, b)| a + b).collect();
            if bar.locate(&v).is_none() {
                return Err(Error::validation(MODULE, op, "incomplete fan").with_datum(format!("{v:?} lies in no cone")));
            }
        }
    }
    Ok(())
}

/// Validates Σ̄ for the chosen disk class and builds the compactified data.
pub fn validate_compactification(base: &ToricData, bar_fan: &StackyFan, disk: Disk) -> Result<CompactifiedData> {
    let op = "validate_compactification";
    let (m, me) = (base.m(), base.m_ext());
    disk.check(m, me).map_err(|e| Error::validation(MODULE, op, e.message))?;
    let i0 = disk.index();
    let b_inf: Vec<i64> = base.fan.vector(i0).iter().map(|x| -x).collect();
    let bar = normalize_bar(&base.fan, bar_fan, &b_inf)?;
    for cone in &base.fan.cones {
        if !bar.cones.iter().any(|c| cone.iter().all(|i| c.contains(i))) {
            return Err(Error::validation(MODULE, op, "bar fan does not contain the cones of the base").with_datum(format!("{cone:?}")));
        }
    }
    check_completeness(&bar, &base.fan, base.fan.vector(i0))?;

    let inf = m;
    let mut d_inf = vec![Q::zero(); me + 1];
    d_inf[bar_index(m, i0)] = Q::one();
    d_inf[inf] = Q::one();
    let beta_bar = match disk {
        Disk::Ray(_) => d_inf.clone(),
        Disk::Box(j) => {
            let dual = extend(m, &base.dual_class(j)?.pairings);
            d_inf.iter().zip(&dual).map(|(a, b)| a - b).collect()
        }
    };
    // kernel basis of L̄: base γ's extended by 0 (H₂ part first), then d_∞
    let mut basis: Vec<Vec<Q>> = base.kernel_basis[..base.r_h2].iter().map(|g| extend(m, g)).collect();
    basis.push(d_inf.clone());
    basis.extend(base.kernel_basis[base.r_h2..].iter().map(|g| extend(m, g)));
    let bar_data = kernel_data_with_basis(&bar, basis, base.r_h2 + 1).map_err(|e| {
        Error::validation(MODULE, op, format!("decomposition check fails: {}", e.message))
    })?;
    let cd = CompactifiedData { base: base.clone(), bar: bar_data, disk, infinity: inf, d_infinity: d_inf, beta_bar };
    cd.check_decomposition()?;
    Ok(cd)
}

impl CompactifiedData {
    fn check_decomposition(&self) -> Result<()> {
        let op = "validate_compactification";
        let fail = |msg: &str| Error::consistency(MODULE, op, msg.to_string());
        if !self.bar.boundary(&self.beta_bar).iter().all(|x| x.is_zero()) {
            return Err(fail("beta_bar is not a relation"));
        }
        if !self.beta_bar[self.infinity].is_one() {
            return Err(fail("D_inf . beta_bar != 1"));
        }
        // c₁·β̄′ = Σ over rays and D_∞
        let c1: Q = (0..=self.base.m()).map(|i| self.beta_bar[i].clone()).sum();
        if c1 != q(2) {
            return Err(fail("c_1 . beta_bar != 2"));
        }
        if self.base.cy_covector.is_some() {
            for g in &self.base.kernel_basis[..self.base.r_h2] {
                let e = self.extend(g);
                let c1: Q = (0..=self.base.m()).map(|i| e[i].clone()).sum();
                if !c1.is_zero() || !e[self.infinity].is_zero() {
                    return Err(fail("H_2(X) class with nonzero c_1 or D_inf pairing"));
                }
            }
        }
        Ok(())
    }
}
