//! Linear-algebra data attached to a stacky fan: the kernel lattice L of the
//! fan sequence, divisor pairings, the p-basis, anticones and dual classes.

use crate::error::{Error, Result};
use crate::fan::StackyFan;
use crate::lattice::{self, IMat};
use crate::rational::{q, Q};
use num_traits::{One, Signed, Zero};
use std::collections::BTreeSet;

const MODULE: &str = "fan-core";

/// D_j^∨ for an extra vector b_j.
#[derive(Debug, Clone, PartialEq)]
pub struct DualClass {
    pub j: usize,
    /// Pairings (D_0·D_j^∨, …, D_{m'-1}·D_j^∨).
    pub pairings: Vec<Q>,
    /// Rays of the minimal cone containing b_j, with b_j = Σ c_{ji} b_i.
    pub face: Vec<usize>,
    pub coefficients: Vec<Q>,
    /// The anticone I_j (complement of the minimal cone).
    pub anticone: Vec<usize>,
}

/// Generator of K_eff attached to a maximal cone σ and an index i ∉ σ: the
/// class with D_i·d = 1, D_k·d = 0 for other k ∉ σ.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeGenerator {
    pub cone: usize,
    pub index: usize,
    pub pairings: Vec<Q>,
}

#[derive(Debug, Clone)]
pub struct ToricData {
    pub fan: StackyFan,
    /// γ_1..γ_r as pairing vectors in Z^{m'}; the first `r_h2` have zero entries on extra vectors.
    pub kernel_basis: Vec<Vec<Q>>,
    pub r_h2: usize,
    /// Row a: p_a written as a functional on Z^{m'} (coefficients over D_i), dual to γ.
    pub p_functionals: Vec<Vec<Q>>,
    pub anticones: Vec<Vec<usize>>,
    pub generators: Vec<ConeGenerator>,
    pub cy_covector: Option<Vec<i64>>,
    pub dual_classes: Vec<DualClass>,
    /// True when the basis came from the fan file.
    pub user_basis: bool,
}

impl ToricData {
    pub fn n(&self) -> usize {
        self.fan.rank
    }
    pub fn m(&self) -> usize {
        self.fan.m()
    }
    pub fn m_ext(&self) -> usize {
        self.fan.m_ext()
    }
    pub fn r(&self) -> usize {
        self.kernel_basis.len()
    }

    /// m_{ia} = D_i·γ_a.
    pub fn pairing_matrix(&self) -> Vec<Vec<Q>> {
        (0..self.m_ext()).map(|i| self.kernel_basis.iter().map(|g| g[i].clone()).collect()).collect()
    }

    /// Coordinates of a class (given by its pairing vector) in the γ-basis.
    pub fn coords(&self, pairings: &[Q]) -> Vec<Q> {
        self.p_functionals.iter().map(|p| lattice::dot(p, pairings)).collect()
    }

    /// Σ_a p_a·d.
    pub fn grade(&self, pairings: &[Q]) -> Q {
        self.coords(pairings).into_iter().sum()
    }

    pub fn from_coords(&self, coords: &[Q]) -> Vec<Q> {
        let mut x = vec![Q::zero(); self.m_ext()];
        for (c, g) in coords.iter().zip(&self.kernel_basis) {
            for (xi, gi) in x.iter_mut().zip(g) {
                *xi += c * gi;
            }
        }
        x
    }

    /// Σ_i (D_i·d) b_i, which vanishes exactly on L⊗Q.
    pub fn boundary(&self, pairings: &[Q]) -> Vec<Q> {
        let mut out = vec![Q::zero(); self.n()];
        for (x, b) in pairings.iter().zip(self.fan.vectors()) {
            for (o, &bk) in out.iter_mut().zip(b) {
                *o += x * q(bk);
            }
        }
        out
    }

    pub fn is_anticone(&self, set: &[usize]) -> bool {
        let mut s = set.to_vec();
        s.sort_unstable();
        s.dedup();
        self.anticones.binary_search(&s).is_ok()
    }

    pub fn dual_class(&self, j: usize) -> Result<&DualClass> {
        if j < self.m() || j >= self.m_ext() {
            return Err(Error::validation(MODULE, "dual_class", format!("index {j} is not an extra vector")));
        }
        Ok(&self.dual_classes[j - self.m()])
    }

    pub fn require_calabi_yau(&self) -> Result<&[i64]> {
        self.cy_covector
            .as_deref()
            .ok_or_else(|| Error::validation(MODULE, "verify_calabi_yau", "fan is not Calabi-Yau: no covector v with <v,b_i> = 1"))
    }
}

fn ray_matrix(fan: &StackyFan, upto: usize) -> IMat {
    (0..fan.rank).map(|r| (0..upto).map(|i| fan.vector(i)[r] as i128).collect()).collect()
}

fn to_q(v: &[i128]) -> Vec<Q> {
    v.iter().map(|&x| q(x as i64)).collect()
}

/// Kernel basis ordered as [H₂ part (zero on extras), lifts of the extra part].
fn structured_kernel(fan: &StackyFan) -> Vec<Vec<i128>> {
    let (n, m, me) = (fan.rank, fan.m(), fan.m_ext());
    let full = lattice::kernel_basis(&ray_matrix(fan, me), n, me);
    let e = me - m;
    if e == 0 {
        return full;
    }
    let r = full.len();
    let proj: IMat = full.iter().map(|g| g[m..].to_vec()).collect();
    let (h, u) = lattice::hermite_rows(&proj, r, e);
    let basis: Vec<Vec<i128>> = (0..r)
        .map(|a| (0..me).map(|i| (0..r).map(|b| u[a][b] * full[b][i]).sum()).collect())
        .collect();
    let (mut h2, mut lifts) = (Vec::new(), Vec::new());
    for (a, g) in basis.into_iter().enumerate() {
        if h[a].iter().all(|&x| x == 0) {
            h2.push(g);
        } else {
            lifts.push(g);
        }
    }
    h2.extend(lifts);
    h2
}

/// p-functionals dual to a kernel basis: rows p_a with p_a·γ_b = δ_ab and p_a
/// vanishing on the complement of L (chosen via pivot columns).
fn dual_functionals(basis: &[Vec<Q>], width: usize) -> Option<Vec<Vec<Q>>> {
    let r = basis.len();
    if r == 0 {
        return Some(vec![]);
    }
    let mut m: Vec<Vec<Q>> = basis.to_vec();
    let pivots = lattice::rref(&mut m.clone());
    if pivots.len() < r {
        return None;
    }
    // G restricted to pivot columns is invertible; p_a supported on those columns.
    let sub: Vec<Vec<Q>> = basis.iter().map(|g| pivots.iter().map(|&c| g[c].clone()).collect()).collect();
    let inv = lattice::rat_inverse(&sub)?; // sub * inv = I, rows of sub are γ
    m = (0..r)
        .map(|a| {
            let mut p = vec![Q::zero(); width];
            for (t, &c) in pivots.iter().enumerate() {
                p[c] = inv[t][a].clone();
            }
            p
        })
        .collect();
    Some(m)
}

fn generators_for(fan: &StackyFan) -> Result<Vec<ConeGenerator>> {
    let me = fan.m_ext();
    let mut out = Vec::new();
    for (ci, cone) in fan.cones.iter().enumerate() {
        if cone.len() != fan.rank {
            return Err(Error::validation(MODULE, "kernel_data", "maximal cone is not full-dimensional")
                .with_datum(format!("{cone:?}")));
        }
        let a: Vec<Vec<Q>> =
            (0..fan.rank).map(|r| cone.iter().map(|&k| q(fan.rays[k][r])).collect()).collect();
        for i in (0..me).filter(|i| !cone.contains(i)) {
            let b: Vec<Q> = fan.vector(i).iter().map(|&x| q(x)).collect();
            let c = lattice::solve(&a, &b).expect("full-dimensional cone");
            let mut x = vec![Q::zero(); me];
            x[i] = Q::one();
            for (k, ck) in cone.iter().zip(c) {
                x[*k] = -ck;
            }
            out.push(ConeGenerator { cone: ci, index: i, pairings: x });
        }
    }
    Ok(out)
}

/// Small integral vectors, ordered by L1 norm then lexicographically.
fn small_vectors(dim: usize, bound: i64) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = vec![vec![]];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|v| {
                (-bound..=bound).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out.retain(|v| v.iter().any(|&x| x != 0));
    out.sort_by_key(|v| (v.iter().map(|x| x.abs()).sum::<i64>(), v.iter().map(|x| -x).collect::<Vec<_>>()));
    out
}

/// Picks `k` rows from `cands` (restricted to columns `cols`) forming a unimodular block.
fn pick_unimodular(cands: &[Vec<i64>], cols: &[usize], k: usize, budget: &mut usize) -> Option<Vec<usize>> {
    fn rec(cands: &[Vec<i64>], cols: &[usize], k: usize, start: usize, chosen: &mut Vec<usize>, budget: &mut usize) -> bool {
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        let rows: Vec<Vec<Q>> = chosen.iter().map(|&i| cols.iter().map(|&c| q(cands[i][c])).collect()).collect();
        if chosen.len() == k {
            return lattice::det(&rows).abs() == Q::one();
        }
        if lattice::rank(&rows) < chosen.len() {
            return false;
        }
        for i in start..cands.len() {
            chosen.push(i);
            if rec(cands, cols, k, i + 1, chosen, budget) {
                return true;
            }
            chosen.pop();
        }
        false
    }
    let mut chosen = Vec::new();
    rec(cands, cols, k, 0, &mut chosen, budget).then_some(chosen)
}

/// Chooses a basis of L whose dual p-basis is nonnegative on every K_eff generator.
fn nef_basis(base: &[Vec<Q>], r_h2: usize, gens: &[ConeGenerator], me: usize) -> Result<Vec<Vec<Q>>> {
    let r = base.len();
    if r == 0 {
        return Ok(vec![]);
    }
    let p0 = dual_functionals(base, me).expect("independent kernel basis");
    let gc: Vec<Vec<Q>> = gens.iter().map(|g| p0.iter().map(|p| lattice::dot(p, &g.pairings)).collect()).collect();
    let ok = |v: &Vec<i64>| gc.iter().all(|c| !c.iter().zip(v).map(|(x, &y)| x * q(y)).sum::<Q>().is_negative());
    let bound = if r <= 2 { 4 } else if r <= 4 { 2 } else { 1 };
    let cands: Vec<Vec<i64>> = small_vectors(r, bound).into_iter().filter(ok).collect();
    let h2_cands: Vec<Vec<i64>> = cands.clone();
    let extra_cands: Vec<Vec<i64>> = cands.iter().filter(|v| v[..r_h2].iter().all(|&x| x == 0)).cloned().collect();
    let mut budget = 200_000;
    let h2_cols: Vec<usize> = (0..r_h2).collect();
    let ex_cols: Vec<usize> = (r_h2..r).collect();
    let fail = || {
        Error::validation(MODULE, "kernel_data", "could not find a nef integral basis of L^v; supply basis_p in the fan file")
    };
    let h2 = pick_unimodular(&h2_cands, &h2_cols, r_h2, &mut budget).ok_or_else(fail)?;
    let ex = pick_unimodular(&extra_cands, &ex_cols, r - r_h2, &mut budget).ok_or_else(fail)?;
    let pmat: Vec<Vec<Q>> = h2
        .iter()
        .map(|&i| &h2_cands[i])
        .chain(ex.iter().map(|&i| &extra_cands[i]))
        .map(|v| v.iter().map(|&x| q(x)).collect())
        .collect();
    // new γ'_a = Σ_b (P^{-1})_{ba} γ_b
    let inv = lattice::rat_inverse(&pmat).ok_or_else(fail)?;
    Ok((0..r)
        .map(|a| (0..me).map(|i| (0..r).map(|b| &inv[b][a] * &base[b][i]).sum()).collect())
        .collect())
}

/// Solves <v, b_i> = 1 for all rays and extra vectors.
pub fn verify_calabi_yau(fan: &StackyFan) -> Option<Vec<i64>> {
    let a: Vec<Vec<Q>> = fan.vectors().map(|b| b.iter().map(|&x| q(x)).collect()).collect();
    let ones = vec![Q::one(); fan.m_ext()];
    let (x, ker) = lattice::solve_affine(&a, &ones)?;
    if !ker.is_empty() {
        return None;
    }
    x.iter().map(crate::rational::to_i64).collect()
}

fn dual_classes_for(fan: &StackyFan) -> Result<Vec<DualClass>> {
    let me = fan.m_ext();
    (fan.m()..me)
        .map(|j| {
            let loc = fan.locate(fan.vector(j)).ok_or_else(|| {
                Error::consistency(MODULE, "dual_class", "extra vector left the support").with_datum(j)
            })?;
            let mut x = vec![Q::zero(); me];
            x[j] = Q::one();
            for (k, c) in loc.face.iter().zip(&loc.coefficients) {
                x[*k] -= c;
            }
            let anticone = (0..me).filter(|i| !loc.face.contains(i)).collect();
            Ok(DualClass { j, pairings: x, face: loc.face, coefficients: loc.coefficients, anticone })
        })
        .collect()
}

fn anticones_for(fan: &StackyFan) -> Vec<Vec<usize>> {
    let me = fan.m_ext();
    fan.faces().into_iter().map(|f| (0..me).filter(|i| !f.contains(i)).collect()).collect::<BTreeSet<_>>().into_iter().collect()
}

/// Builds [`ToricData`] for a validated fan. With `basis_p` absent from the
/// fan, a nef basis is searched for and checked against every K_eff generator.
pub fn kernel_data(fan: &StackyFan) -> Result<ToricData> {
    let me = fan.m_ext();
    let generators = generators_for(fan)?;
    let structured = structured_kernel(fan);
    let r_h2 = structured.iter().filter(|g| g[fan.m()..].iter().all(|&x| x == 0)).count();
    let base: Vec<Vec<Q>> = structured.iter().map(|g| to_q(g)).collect();
    let (kernel_basis, user_basis) = match &fan.basis_p {
        None => (nef_basis(&base, r_h2, &generators, me)?, false),
        Some(rows) => (basis_from_user(rows, &base, r_h2, fan)?, true),
    };
    assemble(fan, kernel_basis, r_h2, generators, user_basis)
}

/// Builds [`ToricData`] from an explicitly chosen kernel basis; all
/// invariants (saturation, duality, positivity on K_eff) are re-checked.
pub fn kernel_data_with_basis(fan: &StackyFan, kernel_basis: Vec<Vec<Q>>, r_h2: usize) -> Result<ToricData> {
    let generators = generators_for(fan)?;
    if kernel_basis.len() != fan.m_ext() - fan.rank {
        return Err(Error::validation(MODULE, "kernel_data", "kernel basis has the wrong size"));
    }
    assemble(fan, kernel_basis, r_h2, generators, true)
}

fn assemble(
    fan: &StackyFan,
    kernel_basis: Vec<Vec<Q>>,
    r_h2: usize,
    generators: Vec<ConeGenerator>,
    user_basis: bool,
) -> Result<ToricData> {
    let p_functionals = dual_functionals(&kernel_basis, fan.m_ext())
        .ok_or_else(|| Error::validation(MODULE, "kernel_data", "kernel basis is not independent"))?;
    let data = ToricData {
        fan: fan.clone(),
        kernel_basis,
        r_h2,
        p_functionals,
        anticones: anticones_for(fan),
        generators,
        cy_covector: verify_calabi_yau(fan),
        dual_classes: dual_classes_for(fan)?,
        user_basis,
    };
    data.check_invariants()?;
    Ok(data)
}

fn basis_from_user(rows: &[Vec<Q>], base: &[Vec<Q>], r_h2: usize, fan: &StackyFan) -> Result<Vec<Vec<Q>>> {
    let me = fan.m_ext();
    let r = base.len();
    let err = |msg: &str| Error::validation(MODULE, "kernel_data", msg.to_string());
    if rows.len() != r || rows.iter().any(|p| p.len() != me) {
        return Err(err("basis_p must have r rows, each with one coefficient per D_i"));
    }
    // P_ab = p_a·κ_b must be unimodular
    let pm: Vec<Vec<Q>> = rows.iter().map(|p| base.iter().map(|k| lattice::dot(p, k)).collect()).collect();
    if pm.iter().flatten().any(|x| !x.is_integer()) || lattice::det(&pm).abs() != Q::one() {
        return Err(err("supplied basis is not unimodular over L^v"));
    }
    let inv = lattice::rat_inverse(&pm).expect("unimodular");
    let gammas: Vec<Vec<Q>> =
        (0..r).map(|a| (0..me).map(|i| (0..r).map(|b| &inv[b][a] * &base[b][i]).sum()).collect()).collect();
    if gammas[..r_h2].iter().any(|g| g[fan.m()..].iter().any(|x| !x.is_zero())) {
        return Err(err("basis_p: p_{r'+1..r} must lie in the span of the extra divisors"));
    }
    Ok(gammas)
}

/// Certificate for the semi-Fano condition.
#[derive(Debug, Clone, PartialEq)]
pub enum SemiFano {
    /// Multipliers λ_i ≥ 0 with ρ̂ = Σ_{i∈I} λ_i D_i, one entry per minimal anticone.
    Holds(Vec<(Vec<usize>, Vec<Q>)>),
    Violated(Vec<usize>),
}

impl SemiFano {
    pub fn holds(&self) -> bool {
        matches!(self, SemiFano::Holds(_))
    }
}

pub fn verify_semi_fano(data: &ToricData) -> SemiFano {
    let me = data.m_ext();
    let rho: Vec<Q> = vec![Q::one(); me];
    let mut witnesses = Vec::new();
    for anticone in &data.anticones {
        let a: Vec<Vec<Q>> =
            data.kernel_basis.iter().map(|g| anticone.iter().map(|&i| g[i].clone()).collect()).collect();
        let b: Vec<Q> = data.kernel_basis.iter().map(|g| lattice::dot(&rho, g)).collect();
        match lattice::nonneg_feasible(&a, &b) {
            None => return SemiFano::Violated(anticone.clone()),
            Some(lambda) => {
                let minimal = !data.anticones.iter().any(|o| o.len() < anticone.len() && o.iter().all(|i| anticone.contains(i)));
                if minimal {
                    witnesses.push((anticone.clone(), lambda));
                }
            }
        }
    }
    SemiFano::Holds(witnesses)
}

impl ToricData {
    fn check_invariants(&self) -> Result<()> {
        let op = "kernel_data";
        for g in &self.kernel_basis {
            if self.boundary(g).iter().any(|x| !x.is_zero()) {
                return Err(Error::consistency(MODULE, op, "kernel vector fails the fan relation").with_datum(format!("{g:?}")));
            }
        }
        // saturation: the γ span Z^{m'} ∩ L, i.e. the integer kernel has the same lattice
        let ints: Option<Vec<Vec<i128>>> = self
            .kernel_basis
            .iter()
            .map(|g| g.iter().map(|x| crate::rational::to_i64(x).map(i128::from)).collect())
            .collect();
        let ints = ints.ok_or_else(|| Error::consistency(MODULE, op, "kernel basis is not integral"))?;
        if !ints.is_empty() {
            let s = lattice::smith(&ints, ints.len(), self.m_ext());
            if s.invariants.iter().any(|&x| x != 1) {
                return Err(Error::consistency(MODULE, op, "kernel basis is not saturated"));
            }
        }
        for (a, p) in self.p_functionals.iter().enumerate() {
            for (b, g) in self.kernel_basis.iter().enumerate() {
                let expect = if a == b { Q::one() } else { Q::zero() };
                if lattice::dot(p, g) != expect {
                    return Err(Error::consistency(MODULE, op, "p-basis is not dual to the kernel basis"));
                }
            }
        }
        for dc in &self.dual_classes {
            if self.boundary(&dc.pairings).iter().any(|x| !x.is_zero()) {
                return Err(Error::consistency(MODULE, "dual_class", "D_j^v is not in L⊗Q").with_datum(dc.j));
            }
        }
        for g in &self.generators {
            if self.grade(&g.pairings) <= Q::zero() {
                return Err(Error::validation(MODULE, op, "grading is not positive on a K_eff generator; supply a nef basis_p")
                    .with_datum(format!("cone {} index {}", g.cone, g.index)));
            }
        }
        if let Some(v) = &self.cy_covector {
            for b in self.fan.vectors() {
                if b.iter().zip(v).map(|(x, y)| x * y).sum::<i64>() != 1 {
                    return Err(Error::consistency(MODULE, "verify_calabi_yau", "covector check failed"));
                }
            }
        }
        Ok(())
    }
}
