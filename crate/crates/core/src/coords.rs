//! Mirror coordinates. A class d is written d = h + Σ_j (D_j·d) D_j^∨ with h
//! in the span of an H₂ basis; y^d is then ∏ y_a^{h_a} ∏ w_j^{D_j·d}, where
//! w_j = y^{D_j^∨}. The q/τ side uses the same weights.

use crate::compactify::CompactifiedData;
use crate::error::{Error, Result};
use crate::lattice;
use crate::rational::Q;
use crate::series::{Grading, Monomial};
use crate::toric::ToricData;
use num_traits::Zero;
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct MirrorCoords {
    /// Pairing vectors of the H₂ basis (γ_1..γ_{r'}, then β̄′ in relative mode).
    pub h_basis: Vec<Vec<Q>>,
    pub y_vars: Vec<String>,
    pub q_vars: Vec<String>,
    /// Extra-vector indices (in the fan's own indexing).
    pub extras: Vec<usize>,
    pub w_vars: Vec<String>,
    pub tau_vars: Vec<String>,
    dual_pairings: Vec<Vec<Q>>,
    h_functionals: Vec<Vec<Q>>,
    pub y_grading: Arc<Grading>,
    pub q_grading: Arc<Grading>,
}

pub fn h_name(a: usize) -> String {
    format!("{}", a + 1)
}

impl MirrorCoords {
    fn build(data: &ToricData, h_basis: Vec<Vec<Q>>, h_names: Vec<String>, extras: Vec<(usize, Vec<Q>)>) -> Result<Self> {
        let op = "mirror_coordinates";
        let weight = |p: &[Q]| -> Result<Q> {
            let g = data.grade(p);
            if g <= Q::zero() {
                return Err(Error::validation("mirror-maps", op, "coordinate class has non-positive grade"));
            }
            Ok(g)
        };
        let mut yw = Vec::new();
        let mut qw = Vec::new();
        for (h, name) in h_basis.iter().zip(&h_names) {
            let w = weight(h)?;
            yw.push((format!("y{name}"), w.clone()));
            qw.push((format!("q{name}"), w));
        }
        let mut w_vars = Vec::new();
        let mut tau_vars = Vec::new();
        for (j, p) in &extras {
            let w = weight(p)?;
            let label = data.fan.label(*j);
            w_vars.push(format!("y_{label}"));
            tau_vars.push(format!("tau_{label}"));
            yw.push((format!("y_{label}"), w.clone()));
            qw.push((format!("tau_{label}"), w));
        }
        let h_functionals = if h_basis.is_empty() {
            vec![]
        } else {
            dual_rows(&h_basis).ok_or_else(|| Error::consistency("mirror-maps", op, "H2 basis is dependent"))?
        };
        Ok(MirrorCoords {
            y_vars: yw[..h_basis.len()].iter().map(|(v, _)| v.clone()).collect(),
            q_vars: qw[..h_basis.len()].iter().map(|(v, _)| v.clone()).collect(),
            h_basis,
            extras: extras.iter().map(|(j, _)| *j).collect(),
            w_vars,
            tau_vars,
            dual_pairings: extras.into_iter().map(|(_, p)| p).collect(),
            h_functionals,
            y_grading: Arc::new(Grading::new(yw)?),
            q_grading: Arc::new(Grading::new(qw)?),
        })
    }

    pub fn base(data: &ToricData) -> Result<Self> {
        let h: Vec<Vec<Q>> = data.kernel_basis[..data.r_h2].to_vec();
        let names = (0..h.len()).map(h_name).collect();
        let extras = data.dual_classes.iter().map(|dc| (dc.j, dc.pairings.clone())).collect();
        Self::build(data, h, names, extras)
    }

    pub fn relative(cd: &CompactifiedData) -> Result<Self> {
        let base = &cd.base;
        let mut h: Vec<Vec<Q>> = base.kernel_basis[..base.r_h2].iter().map(|g| cd.extend(g)).collect();
        let mut names: Vec<String> = (0..h.len()).map(h_name).collect();
        h.push(cd.beta_bar.clone());
        names.push("_inf".into());
        let extras = cd.bar.dual_classes.iter().map(|dc| (dc.j, dc.pairings.clone())).collect();
        Self::build(&cd.bar, h, names, extras)
    }

    /// (h-coordinates, extra pairings) of a class.
    pub fn decompose(&self, pairings: &[Q]) -> Result<(Vec<Q>, Vec<Q>)> {
        let w: Vec<Q> = self.extras.iter().map(|&j| pairings[j].clone()).collect();
        let mut rest = pairings.to_vec();
        for (x, dual) in w.iter().zip(&self.dual_pairings) {
            for (r, d) in rest.iter_mut().zip(dual) {
                *r -= x * d;
            }
        }
        let h: Vec<Q> = self.h_functionals.iter().map(|f| lattice::dot(f, &rest)).collect();
        // the residual must lie in the H₂ span
        let mut check = vec![Q::zero(); rest.len()];
        for (c, b) in h.iter().zip(&self.h_basis) {
            for (x, y) in check.iter_mut().zip(b) {
                *x += c * y;
            }
        }
        if check != rest {
            return Err(Error::consistency("mirror-maps", "decompose", "class is not in the span of the coordinate basis"));
        }
        Ok((h, w))
    }

    pub fn y_monomial(&self, pairings: &[Q]) -> Result<Monomial> {
        let (h, w) = self.decompose(pairings)?;
        Ok(Monomial::from_pairs(
            self.y_vars.iter().cloned().zip(h).chain(self.w_vars.iter().cloned().zip(w)),
        ))
    }

    /// q^h τ^w for a class given by (h, w) coordinates.
    pub fn q_monomial(&self, h: &[Q], w: &[Q]) -> Monomial {
        Monomial::from_pairs(
            self.q_vars.iter().cloned().zip(h.iter().cloned()).chain(self.tau_vars.iter().cloned().zip(w.iter().cloned())),
        )
    }

    pub fn w_var(&self, j: usize) -> Option<&str> {
        self.extras.iter().position(|&x| x == j).map(|k| self.w_vars[k].as_str())
    }

    pub fn tau_var(&self, j: usize) -> Option<&str> {
        self.extras.iter().position(|&x| x == j).map(|k| self.tau_vars[k].as_str())
    }

    /// Reads (h, w) back from a q/τ monomial.
    pub fn read_q_monomial(&self, m: &Monomial) -> Result<(Vec<Q>, Vec<Q>)> {
        for (v, _) in m.entries() {
            if !self.q_vars.contains(v) && !self.tau_vars.contains(v) {
                return Err(Error::consistency("invariants", "extract_invariants", "non-representable exponent").with_datum(v));
            }
        }
        Ok((
            self.q_vars.iter().map(|v| m.exponent(v)).collect(),
            self.tau_vars.iter().map(|v| m.exponent(v)).collect(),
        ))
    }
}

/// Rows f_a with f_a·b_c = δ_ac for independent rows b_c.
fn dual_rows(basis: &[Vec<Q>]) -> Option<Vec<Vec<Q>>> {
    let width = basis[0].len();
    let mut m = basis.to_vec();
    let pivots = lattice::rref(&mut m);
    if pivots.len() < basis.len() {
        return None;
    }
    let sub: Vec<Vec<Q>> = basis.iter().map(|g| pivots.iter().map(|&c| g[c].clone()).collect()).collect();
    let inv = lattice::rat_inverse(&sub)?;
    Some(
        (0..basis.len())
            .map(|a| {
                let mut f = vec![Q::zero(); width];
                for (t, &c) in pivots.iter().enumerate() {
                    f[c] = inv[t][a].clone();
                }
                f
            })
            .collect(),
    )
}
