//! Disk potentials, invariant tables and the relative oracle path.

use crate::compactify::{CompactifiedData, Disk};
use crate::coords::MirrorCoords;
use crate::error::{Error, Result};
use crate::mirror::{relative_mirror_map, toric_mirror_map, MirrorMap};
use crate::rational::{factorial, format_q, to_i64, Q};
use crate::series::{Monomial, Series, SeriesDoc};
use crate::toric::ToricData;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use std::collections::BTreeMap;

const MODULE: &str = "invariants";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Normalization {
    #[serde(rename = "1+delta")]
    Smooth,
    #[serde(rename = "tau+delta")]
    Orbi,
}

#[derive(Debug, Clone)]
pub struct DiskPotential {
    pub disk: Disk,
    pub series: Series,
    pub normalization: Normalization,
    pub coords: MirrorCoords,
}

/// Series whose exponential gives the correction: g_{i₀} for a smooth disk,
/// Σ_{i ∈ I_{j₀}^c} c_{j₀i} g_i for an orbi-disk.
fn correction_exponent(data: &ToricData, mm: &MirrorMap, disk: Disk) -> Result<Series> {
    let zero = Series::zero(mm.coords.y_grading.clone(), mm.order.clone());
    let g = |i: usize| mm.g_list.get(&i).cloned().unwrap_or_else(|| zero.clone());
    match disk {
        Disk::Ray(i) => Ok(g(i)),
        Disk::Box(j) => {
            let dc = data.dual_class(j)?;
            let mut s = zero.clone();
            for (i, c) in dc.face.iter().zip(&dc.coefficients) {
                s = s.add(&g(*i).scale(c))?;
            }
            Ok(s)
        }
    }
}

/// exp(−g_{i₀}(y(q,τ))) or y^{D_{j₀}^∨}·exp(−Σ c_{j₀i} g_i(y(q,τ))).
pub fn disk_potential_from(data: &ToricData, mm: &mut MirrorMap, disk: Disk) -> Result<DiskPotential> {
    disk.check(data.m(), data.m_ext())?;
    let exponent = correction_exponent(data, mm, disk)?;
    let pulled = mm.pull_back(&exponent)?;
    let unit = pulled.neg().exp()?;
    let (series, normalization) = match disk {
        Disk::Ray(_) => (unit, Normalization::Smooth),
        Disk::Box(j) => {
            let w = mm.coords.w_var(j).expect("extra vector has a coordinate").to_string();
            let wy = Series::var(&w, mm.coords.y_grading.clone(), mm.order.clone())?;
            (mm.pull_back(&wy)?.mul(&unit)?, Normalization::Orbi)
        }
    };
    let dp = DiskPotential { disk, series: series.truncate(&mm.order), normalization, coords: mm.coords.clone() };
    dp.check_normalization()?;
    Ok(dp)
}

pub fn disk_potential(data: &ToricData, disk: Disk, order: &Q) -> Result<DiskPotential> {
    disk.check(data.m(), data.m_ext())?;
    let mut mm = toric_mirror_map(data, order)?;
    disk_potential_from(data, &mut mm, disk)
}

impl DiskPotential {
    fn check_normalization(&self) -> Result<()> {
        let fail = |msg: &str| Error::consistency(MODULE, "disk_potential", msg.to_string()).with_datum(self.disk);
        let s = &self.series;
        match self.normalization {
            Normalization::Smooth => {
                if !s.constant_term().is_one() {
                    return Err(fail("constant term is not 1"));
                }
            }
            Normalization::Orbi => {
                let Disk::Box(j) = self.disk else { unreachable!() };
                let tau = Monomial::var(self.coords.tau_var(j).expect("tau variable"));
                let g = s.grade(&tau);
                if g <= *s.order() {
                    if !s.coefficient(&tau).is_one() {
                        return Err(fail("leading term is not tau"));
                    }
                    if s.terms().iter().any(|(m, _)| s.grade(m) < g) {
                        return Err(fail("term below the leading tau"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_doc(&self) -> DiskPotentialDoc {
        DiskPotentialDoc { disk: self.disk.to_string(), normalization: self.normalization.clone(), series: self.series.to_doc() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DiskPotentialDoc {
    pub disk: String,
    pub normalization: Normalization,
    pub series: SeriesDoc,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct InvariantKey {
    /// α in the γ-basis of H₂.
    pub alpha: Vec<i64>,
    /// Insertion multiplicities keyed by box label, sorted.
    pub insertions: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, Default)]
pub struct InvariantTable {
    pub entries: BTreeMap<InvariantKey, Q>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantDoc {
    pub alpha: Vec<i64>,
    pub insertions: BTreeMap<String, u64>,
    pub value: String,
}

impl InvariantTable {
    pub fn get(&self, alpha: &[i64], insertions: &[(&str, u64)]) -> Option<&Q> {
        let key = InvariantKey {
            alpha: alpha.to_vec(),
            insertions: insertions.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        };
        self.entries.get(&key)
    }

    pub fn to_doc(&self) -> Vec<InvariantDoc> {
        self.entries
            .iter()
            .map(|(k, v)| InvariantDoc { alpha: k.alpha.clone(), insertions: k.insertions.clone(), value: format_q(v) })
            .collect()
    }
}

/// Coefficient of q^α ∏ τ_v^{k_v} times ∏ k_v!.
pub fn extract_invariants(dp: &DiskPotential) -> Result<InvariantTable> {
    let op = "extract_invariants";
    let coords = &dp.coords;
    let mut table = InvariantTable::default();
    for (m, c) in dp.series.terms() {
        let (h, w) = coords.read_q_monomial(&m)?;
        let alpha = h
            .iter()
            .map(|x| to_i64(x).ok_or_else(|| Error::consistency(MODULE, op, "non-integral curve class").with_datum(&m)))
            .collect::<Result<Vec<_>>>()?;
        let mut insertions = BTreeMap::new();
        let mut value = c.clone();
        for (k, x) in w.iter().enumerate() {
            let n = to_i64(x)
                .filter(|n| *n >= 0)
                .ok_or_else(|| Error::consistency(MODULE, op, "non-representable insertion exponent").with_datum(&m))?;
            if n > 0 {
                let label = coords.tau_vars[k].trim_start_matches("tau_").to_string();
                insertions.insert(label, n as u64);
                value *= Q::from_integer(factorial(n as u64));
            }
        }
        table.entries.insert(InvariantKey { alpha, insertions }, value);
    }
    Ok(table)
}

/// y^{d_∞} q^{−β̄′} through the relative mirror map, at grade `order` on the
/// base side. The relative map runs at `order` + grade(β̄′).
pub fn oracle_potential(cd: &CompactifiedData, order: &Q) -> Result<Series> {
    let op = "oracle_potential";
    let probe = MirrorCoords::relative(cd)?;
    let shift = probe.q_grading.weight("q_inf").cloned().expect("q_inf present");
    let rel_order = order + &shift;
    let mut mm = relative_mirror_map(cd, &rel_order)?;
    let y_dinf = Series::from_terms([(mm.coords.y_monomial(&cd.d_infinity)?, Q::one())], mm.coords.y_grading.clone(), rel_order)?;
    let pulled = mm.pull_back(&y_dinf)?;
    let shifted = pulled.mul_monomial(&Monomial::from_pairs([("q_inf".to_string(), -Q::one())]), &Q::one())?;
    if let Some((m, _)) = shifted.terms().into_iter().find(|(m, _)| !m.exponent("q_inf").is_zero()) {
        return Err(Error::consistency(MODULE, op, "q_inf survives in y^{d_inf} q^{-beta_bar}").with_datum(m));
    }
    // view in the base alphabet
    let base = MirrorCoords::base(&cd.base)?;
    let terms = shifted.terms();
    if terms.iter().any(|(m, _)| m.entries().any(|(_, e)| e.is_negative())) {
        return Err(Error::consistency(MODULE, op, "negative exponent in the oracle series"));
    }
    Ok(Series::from_terms(terms, base.q_grading.clone(), shifted.order().clone())?.truncate(order))
}

/// Oracle comparison result.
#[derive(Debug, Clone)]
pub struct OracleReport {
    pub disk_potential: Series,
    pub oracle_potential: Series,
    pub first_difference: Option<(Monomial, Q, Q)>,
}

impl OracleReport {
    pub fn matches(&self) -> bool {
        self.first_difference.is_none() && self.disk_potential.order() == self.oracle_potential.order()
    }
}

pub fn compare_with_oracle(cd: &CompactifiedData, order: &Q) -> Result<OracleReport> {
    let dp = disk_potential(&cd.base, cd.disk, order)?;
    let oracle = oracle_potential(cd, order)?;
    let first_difference = dp.series.first_difference(&oracle);
    Ok(OracleReport { disk_potential: dp.series, oracle_potential: oracle, first_difference })
}
