//! Coefficient relations and the instanton-corrected mirror potential.

use crate::compactify::Disk;
use crate::coords::MirrorCoords;
use crate::error::{Error, Result};
use crate::invariants::{disk_potential_from, DiskPotential};
use crate::lattice::{dot, rank, solve_affine, unimodular_completion};
use crate::mirror::toric_mirror_map;
use crate::rational::{format_q, is_integer, q, Q};
use crate::series::{Monomial, SeriesDoc};
use crate::toric::ToricData;
use num_traits::Zero;
use serde::Serialize;
use std::collections::BTreeMap;

const MODULE: &str = "syz-builder";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GaugeChoice {
    pub cone: usize,
    pub fixed: Vec<usize>,
}

impl GaugeChoice {
    pub fn new(data: &ToricData, cone: usize) -> Result<Self> {
        let fan = &data.fan;
        let fixed = fan.cones.get(cone).ok_or_else(|| {
            Error::validation(MODULE, "gauge", format!("no maximal cone {cone}")).with_datum(cone)
        })?;
        if fixed.len() != fan.rank {
            return Err(Error::validation(MODULE, "gauge", "gauge cone is not full-dimensional").with_datum(cone));
        }
        Ok(GaugeChoice { cone, fixed: fixed.clone() })
    }

    pub fn default_for(data: &ToricData) -> Result<Self> {
        Self::new(data, 0)
    }
}

/// q-exponent vectors of C_0..C_{m'-1}, indexed like the fan vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    pub gauge: GaugeChoice,
    pub exponents: Vec<Vec<Q>>,
    pub q_vars: Vec<String>,
}

impl Coefficients {
    pub fn monomial(&self, i: usize) -> Monomial {
        Monomial::from_pairs(self.q_vars.iter().cloned().zip(self.exponents[i].iter().cloned()))
    }

    pub fn has_roots(&self) -> bool {
        self.exponents.iter().flatten().any(|x| !is_integer(x))
    }
}

/// Right-hand side of the relation for column a of the kernel basis.
fn relation_rhs(data: &ToricData, a: usize) -> Result<Vec<Q>> {
    let r1 = data.r_h2;
    if a < r1 {
        let mut e = vec![Q::zero(); r1];
        e[a] = q(1);
        return Ok(e);
    }
    // ∏_j (q^{D_j^∨})^{−m_{ja}}
    let mut e = vec![Q::zero(); r1];
    for j in data.m()..data.m_ext() {
        let m_ja = &data.kernel_basis[a][j];
        let dual = data.coords(&data.dual_class(j)?.pairings);
        for (x, d) in e.iter_mut().zip(&dual[..r1]) {
            *x -= m_ja * d;
        }
    }
    Ok(e)
}

pub fn solve_coefficient_system(data: &ToricData, gauge: &GaugeChoice) -> Result<Coefficients> {
    let op = "solve_coefficient_system";
    data.require_calabi_yau()?;
    let m_ext = data.m_ext();
    let r1 = data.r_h2;
    // Rows: one per kernel column a, then one per gauge-fixed ray.
    let mut rows: Vec<Vec<Q>> = data.kernel_basis.clone();
    for &i in &gauge.fixed {
        let mut row = vec![Q::zero(); m_ext];
        row[i] = q(1);
        rows.push(row);
    }
    if rank(&rows) < m_ext {
        let (_, kernel) = solve_affine(&rows, &vec![Q::zero(); rows.len()]).expect("homogeneous system");
        let witness: Vec<String> = kernel[0].iter().map(format_q).collect();
        return Err(Error::consistency(MODULE, op, "residual gauge freedom after fixing")
            .with_datum(format!("[{}]", witness.join(", "))));
    }
    let rhs: Vec<Vec<Q>> = (0..data.r()).map(|a| relation_rhs(data, a)).collect::<Result<_>>()?;
    let mut exponents = vec![vec![Q::zero(); r1]; m_ext];
    for c in 0..r1 {
        let mut b: Vec<Q> = rhs.iter().map(|e| e[c].clone()).collect();
        b.extend(gauge.fixed.iter().map(|_| Q::zero()));
        let (x, _) = solve_affine(&rows, &b)
            .ok_or_else(|| Error::consistency(MODULE, op, "coefficient relations are inconsistent").with_datum(c))?;
        for (i, v) in x.into_iter().enumerate() {
            exponents[i][c] = v;
        }
    }
    let coords = MirrorCoords::base(data)?;
    let out = Coefficients { gauge: gauge.clone(), exponents, q_vars: coords.q_vars[..r1].to_vec() };
    verify_relations(data, &out)?;
    Ok(out)
}

/// Substitutes the solved C's back and compares exponent vectors.
pub fn verify_relations(data: &ToricData, c: &Coefficients) -> Result<()> {
    let op = "verify_relations";
    for a in 0..data.r() {
        let mut lhs = Monomial::one();
        for (i, m_ia) in data.kernel_basis[a].iter().enumerate() {
            lhs = lhs.mul(&c.monomial(i).pow(m_ia));
        }
        let want = Monomial::from_pairs(c.q_vars.iter().cloned().zip(relation_rhs(data, a)?));
        if lhs != want {
            return Err(Error::consistency(MODULE, op, format!("relation {a} fails: {lhs} != {want}")).with_datum(a));
        }
    }
    for &i in &c.gauge.fixed {
        if !c.monomial(i).is_one() {
            return Err(Error::consistency(MODULE, op, "gauge-fixed coefficient is not 1").with_datum(i));
        }
    }
    Ok(())
}

/// Lattice basis of M whose first row is the CY covector; the remaining rows
/// give the reduced coordinates z_1..z_{n-1}.
#[derive(Debug, Clone, Serialize)]
pub struct CovectorBasis {
    pub covector: Vec<i64>,
    pub rows: Vec<Vec<i64>>,
}

impl CovectorBasis {
    pub fn new(data: &ToricData) -> Result<Self> {
        let v = data.require_calabi_yau()?.to_vec();
        let wide: Vec<i128> = v.iter().map(|&x| x as i128).collect();
        let u = unimodular_completion(&wide).ok_or_else(|| {
            Error::consistency(MODULE, "covector_basis", "covector is not primitive").with_datum(format!("{v:?}"))
        })?;
        let rows = u.iter().map(|r| r.iter().map(|&x| x as i64).collect()).collect();
        Ok(CovectorBasis { covector: v, rows })
    }

    /// (⟨v, b⟩, reduced exponent).
    pub fn reduce(&self, b: &[i64]) -> (i64, Vec<i64>) {
        let pair = |r: &[i64]| r.iter().zip(b).map(|(x, y)| x * y).sum::<i64>();
        (pair(&self.rows[0]), self.rows[1..].iter().map(|r| pair(r)).collect())
    }
}

#[derive(Debug, Clone)]
pub struct PotentialTerm {
    /// Index into the fan vectors (rays then extras).
    pub index: usize,
    pub label: String,
    pub exponent: Vec<i64>,
    pub reduced: Vec<i64>,
    pub coefficient: Monomial,
    pub potential: DiskPotential,
}

#[derive(Debug, Clone)]
pub struct MirrorPotential {
    pub terms: Vec<PotentialTerm>,
    pub coefficients: Coefficients,
    pub basis: CovectorBasis,
    pub order: Q,
}

/// Disk potentials for every ray and every extra vector, from one mirror map.
pub fn all_disk_potentials(data: &ToricData, order: &Q) -> Result<BTreeMap<Disk, DiskPotential>> {
    let mut mm = toric_mirror_map(data, order)?;
    let disks = (0..data.m()).map(Disk::Ray).chain((data.m()..data.m_ext()).map(Disk::Box));
    disks.map(|d| Ok((d, disk_potential_from(data, &mut mm, d)?))).collect()
}

pub fn mirror_potential(
    data: &ToricData,
    potentials: &BTreeMap<Disk, DiskPotential>,
    gauge: &GaugeChoice,
    order: &Q,
) -> Result<MirrorPotential> {
    let op = "mirror_potential";
    let coefficients = solve_coefficient_system(data, gauge)?;
    let basis = CovectorBasis::new(data)?;
    let mut terms = Vec::new();
    for i in 0..data.m_ext() {
        let disk = if i < data.m() { Disk::Ray(i) } else { Disk::Box(i) };
        let potential = potentials
            .get(&disk)
            .ok_or_else(|| Error::validation(MODULE, op, "missing disk potential").with_datum(disk))?;
        let exponent = data.fan.vector(i).to_vec();
        let (level, reduced) = basis.reduce(&exponent);
        if level != 1 {
            return Err(Error::consistency(MODULE, op, "exponent off the CY hyperplane").with_datum(i));
        }
        terms.push(PotentialTerm {
            index: i,
            label: data.fan.label(i),
            exponent,
            reduced,
            coefficient: coefficients.monomial(i),
            potential: DiskPotential { series: potential.series.truncate(order), ..potential.clone() },
        });
    }
    Ok(MirrorPotential { terms, coefficients, basis, order: order.clone() })
}

/// Mirror potential for `gauge`, with disk potentials computed at `order`.
pub fn syz_mirror(data: &ToricData, gauge: &GaugeChoice, order: &Q) -> Result<MirrorPotential> {
    let potentials = all_disk_potentials(data, order)?;
    mirror_potential(data, &potentials, gauge, order)
}

/// Character χ (one n-vector per q variable) with C'_i = C_i q^{⟨χ, b_i⟩} for
/// every fan vector. Errors if the two potentials are not related this way.
pub fn gauge_character(data: &ToricData, a: &MirrorPotential, b: &MirrorPotential) -> Result<Vec<Vec<Q>>> {
    let op = "gauge_covariance";
    let n = data.n();
    let vecs: Vec<Vec<Q>> = data.fan.vectors().map(|v| v.iter().map(|&x| q(x)).collect()).collect();
    let qa = &a.coefficients.exponents;
    let qb = &b.coefficients.exponents;
    let mut chi = Vec::new();
    for c in 0..a.coefficients.q_vars.len() {
        let diff: Vec<Q> = (0..vecs.len()).map(|i| &qb[i][c] - &qa[i][c]).collect();
        let (x, _) = solve_affine(&vecs, &diff)
            .ok_or_else(|| Error::consistency(MODULE, op, "coefficient change is not a character").with_datum(c))?;
        debug_assert_eq!(x.len(), n);
        chi.push(x);
    }
    for (ta, tb) in a.terms.iter().zip(&b.terms) {
        let shift = Monomial::from_pairs(
            a.coefficients.q_vars.iter().cloned().zip(chi.iter().map(|x| dot(x, &vecs[ta.index]))),
        );
        if ta.index != tb.index || ta.coefficient.mul(&shift) != tb.coefficient || ta.potential.series != tb.potential.series {
            return Err(Error::consistency(MODULE, op, "terms differ after the z-coordinate change").with_datum(&ta.label));
        }
    }
    Ok(chi)
}

#[derive(Debug, Clone, Serialize)]
pub struct TermDoc {
    pub label: String,
    pub exponent: Vec<i64>,
    pub reduced_exponent: Vec<i64>,
    #[serde(rename = "C")]
    pub c: BTreeMap<String, String>,
    pub series: SeriesDoc,
}

#[derive(Debug, Clone, Serialize)]
pub struct LgDocument {
    pub equation: String,
    #[serde(rename = "G")]
    pub g: Vec<TermDoc>,
    #[serde(rename = "W")]
    pub w: String,
    pub order: String,
    pub gauge: GaugeChoice,
    pub roots_of_q: bool,
    pub covector_basis: CovectorBasis,
}

pub fn emit_lg_model(mp: &MirrorPotential) -> LgDocument {
    let g = mp
        .terms
        .iter()
        .map(|t| TermDoc {
            label: t.label.clone(),
            exponent: t.exponent.clone(),
            reduced_exponent: t.reduced.clone(),
            c: t.coefficient.entries().map(|(v, e)| (v.to_string(), format_q(e))).collect(),
            series: t.potential.series.to_doc(),
        })
        .collect();
    LgDocument {
        equation: "uv = G".into(),
        g,
        w: "u".into(),
        order: format_q(&mp.order),
        gauge: mp.coefficients.gauge.clone(),
        roots_of_q: mp.coefficients.has_roots(),
        covector_basis: mp.basis.clone(),
    }
}
