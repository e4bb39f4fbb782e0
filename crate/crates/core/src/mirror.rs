//! g-series, the toric and relative mirror maps, and their formal inverse.

use crate::compactify::CompactifiedData;
use crate::coords::MirrorCoords;
use crate::enumerate::{enumerate_effective, filter_g_orbi, filter_g_smooth, EffClass};
use crate::error::{Error, Result};
use crate::ifunction::{relative_ifunction_oracle, z_extract};
use crate::rational::{factorial, format_q, to_i64, Q};
use crate::series::{invert_map, Monomial, Relation, RelationKind, Series, SeriesDoc};
use crate::toric::{verify_semi_fano, ToricData};
use num_traits::{One, Zero};
use serde::Serialize;
use std::collections::BTreeMap;

const MODULE: &str = "mirror-maps";

/// (−1)^{−D_j·d−1}(−D_j·d−1)! / ∏_{i≠j}(D_i·d)!
pub fn smooth_closed_form(pairings: &[Q], j: usize) -> Option<Q> {
    let pj = to_i64(&pairings[j])?;
    if pj >= 0 {
        return None;
    }
    let k = (-pj - 1) as u64;
    let mut c = Q::from_integer(factorial(k));
    if k % 2 == 1 {
        c = -c;
    }
    for (i, p) in pairings.iter().enumerate() {
        if i != j {
            let n = to_i64(p).filter(|n| *n >= 0)?;
            c /= Q::from_integer(factorial(n as u64));
        }
    }
    Some(c)
}

/// g_j(y) summed through the I-function factors; smooth terms are asserted
/// against the closed form.
pub fn g_series(data: &ToricData, coords: &MirrorCoords, classes: &[EffClass], j: usize, order: &Q) -> Result<Series> {
    let op = "g_series";
    if j >= data.m_ext() {
        return Err(Error::validation(MODULE, op, "index out of range").with_datum(j));
    }
    let mut terms = Vec::new();
    if j < data.m() {
        for d in filter_g_smooth(classes, j) {
            let e = z_extract(data, &d, None)?;
            let (i, c) = e
                .z1_divisor_linear()
                .ok_or_else(|| Error::consistency(MODULE, op, "filtered class has no z^-1 divisor term"))?;
            let closed = smooth_closed_form(&d.pairings, j);
            if i != j || closed.as_ref() != Some(c) {
                return Err(Error::consistency(MODULE, op, "I-function coefficient differs from the closed form")
                    .with_datum(format!("j={j} d={:?}", d.pairings.iter().map(format_q).collect::<Vec<_>>())));
            }
            terms.push((coords.y_monomial(&d.pairings)?, c.clone()));
        }
    } else {
        for d in filter_g_orbi(data, classes, j) {
            let e = z_extract(data, &d, None)?;
            let (_, c) = e
                .z1_scalar()
                .ok_or_else(|| Error::consistency(MODULE, op, "filtered class has no z^-1 sector term"))?;
            terms.push((coords.y_monomial(&d.pairings)?, c.clone()));
        }
    }
    Series::from_terms(terms, coords.y_grading.clone(), order.clone())
}

/// All z⁻¹ pieces of the I-function without the g-filters: D̄_i-linear terms
/// keyed by i and 1_{b_j} terms keyed by j. Must reproduce [`g_series`].
pub fn unfiltered_z1(data: &ToricData, coords: &MirrorCoords, classes: &[EffClass], order: &Q) -> Result<BTreeMap<usize, Series>> {
    let mut out: BTreeMap<usize, Vec<(Monomial, Q)>> = BTreeMap::new();
    for d in classes {
        let e = z_extract(data, d, None)?;
        if let Some((i, c)) = e.z1_divisor_linear() {
            out.entry(i).or_default().push((coords.y_monomial(&d.pairings)?, c.clone()));
        }
        if let Some((sector, c)) = e.z1_scalar() {
            if let Some(j) = (data.m()..data.m_ext()).find(|&j| data.fan.vector(j) == sector) {
                out.entry(j).or_default().push((coords.y_monomial(&d.pairings)?, c.clone()));
            }
        }
    }
    out.into_iter().map(|(i, t)| Ok((i, Series::from_terms(t, coords.y_grading.clone(), order.clone())?))).collect()
}

#[derive(Debug, Clone)]
pub struct MirrorMap {
    pub coords: MirrorCoords,
    pub order: Q,
    /// g_j keyed by vector index (bar indexing in relative mode).
    pub g_list: BTreeMap<usize, Series>,
    pub forward: Vec<Relation>,
    pub inverse: Option<BTreeMap<String, Series>>,
}

fn assemble(coords: MirrorCoords, order: &Q, g_list: BTreeMap<usize, Series>, rays: &[usize]) -> Result<MirrorMap> {
    let zero = Series::zero(coords.y_grading.clone(), order.clone());
    let g = |i: usize| g_list.get(&i).cloned().unwrap_or_else(|| zero.clone());
    let mut forward = Vec::new();
    for (a, h) in coords.h_basis.iter().enumerate() {
        let mut s = zero.clone();
        for &i in rays {
            if !h[i].is_zero() {
                s = s.add(&g(i).scale(&h[i]))?;
            }
        }
        forward.push(Relation {
            target: coords.q_vars[a].clone(),
            source: coords.y_vars[a].clone(),
            kind: RelationKind::Multiplicative,
            series: s,
        });
    }
    for (k, &j) in coords.extras.iter().enumerate() {
        let w = Series::var(&coords.w_vars[k], coords.y_grading.clone(), order.clone())?;
        let gj = g(j);
        if gj.coefficient(&Monomial::var(&coords.w_vars[k])) != Q::one() {
            return Err(Error::consistency(MODULE, "toric_mirror_map", "g_j does not start with y^{D_j^v}").with_datum(j));
        }
        forward.push(Relation {
            target: coords.tau_vars[k].clone(),
            source: coords.w_vars[k].clone(),
            kind: RelationKind::Additive,
            series: gj.sub(&w)?,
        });
    }
    Ok(MirrorMap { coords, order: order.clone(), g_list, forward, inverse: None })
}

/// Forward toric mirror map: log q_a = log y_a + Σ_{i<m} (D_i·γ_a) g_i(y),
/// τ_j = g_j(y).
pub fn toric_mirror_map(data: &ToricData, order: &Q) -> Result<MirrorMap> {
    data.require_calabi_yau()?;
    if !verify_semi_fano(data).holds() {
        return Err(Error::validation(MODULE, "toric_mirror_map", "fan is not semi-Fano"));
    }
    let coords = MirrorCoords::base(data)?;
    let classes = enumerate_effective(data, order)?;
    let mut g_list = BTreeMap::new();
    for j in 0..data.m_ext() {
        g_list.insert(j, g_series(data, &coords, &classes, j, order)?);
    }
    let rays: Vec<usize> = (0..data.m()).collect();
    assemble(coords, order, g_list, &rays)
}

impl MirrorMap {
    /// Solves for y(q, τ); the round trip is checked inside `invert_map`.
    pub fn invert(&mut self) -> Result<&BTreeMap<String, Series>> {
        if self.inverse.is_none() {
            let inv = if self.forward.is_empty() {
                BTreeMap::new()
            } else {
                invert_map(&self.forward, self.coords.q_grading.clone(), &self.order)?
            };
            self.inverse = Some(inv);
        }
        Ok(self.inverse.as_ref().expect("just set"))
    }

    /// Evaluates a y-series at y(q, τ).
    pub fn pull_back(&mut self, s: &Series) -> Result<Series> {
        let order = self.order.clone();
        let q_grading = self.coords.q_grading.clone();
        let inv = self.invert()?;
        if inv.is_empty() {
            return Ok(Series::constant(s.constant_term(), q_grading, order));
        }
        s.substitute(inv, &order)
    }

    pub fn relation(&self, target: &str) -> Option<&Relation> {
        self.forward.iter().find(|r| r.target == target)
    }

    /// Forward∘inverse = identity, re-checked from scratch.
    pub fn check_round_trip(&mut self) -> Result<()> {
        let order = self.order.clone();
        let q_grading = self.coords.q_grading.clone();
        let forward = self.forward.clone();
        let inv = self.invert()?.clone();
        for r in &forward {
            let lhs = r.forward()?.substitute(&inv, &order)?;
            let t = Series::var(&r.target, q_grading.clone(), order.clone())?;
            if let Some((m, _, _)) = lhs.first_difference(&t) {
                return Err(Error::consistency(MODULE, "inverse_mirror_map", "forward after inverse is not the identity")
                    .with_datum(format!("{}: {m}", r.target)));
            }
        }
        Ok(())
    }

    pub fn to_doc(&mut self) -> Result<MirrorMapDoc> {
        let labels: BTreeMap<usize, String> = self.g_list.keys().map(|&i| (i, format!("g{i}"))).collect();
        let relations = self
            .forward
            .iter()
            .map(|r| RelationDoc {
                target: r.target.clone(),
                source: r.source.clone(),
                form: match r.kind {
                    RelationKind::Multiplicative => format!("log {} = log {} + series", r.target, r.source),
                    RelationKind::Additive => format!("{} = {} + series", r.target, r.source),
                },
                series: r.series.to_doc(),
            })
            .collect();
        let g = self.g_list.iter().map(|(i, s)| (labels[i].clone(), s.to_doc())).collect();
        let inverse = self.invert()?.iter().map(|(v, s)| (v.clone(), s.to_doc())).collect();
        Ok(MirrorMapDoc { order: format_q(&self.order), g, relations, inverse })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RelationDoc {
    pub target: String,
    pub source: String,
    pub form: String,
    pub series: SeriesDoc,
}

#[derive(Debug, Clone, Serialize)]
pub struct MirrorMapDoc {
    pub order: String,
    pub g: BTreeMap<String, SeriesDoc>,
    pub relations: Vec<RelationDoc>,
    pub inverse: BTreeMap<String, SeriesDoc>,
}

pub fn inverse_mirror_map(mm: &mut MirrorMap) -> Result<BTreeMap<String, Series>> {
    Ok(mm.invert()?.clone())
}

/// Relative mirror map of (X̄, D_∞): log q^e = log y^e + Σ (D_i·e) g_i(y)
/// over rays and D_∞ for e in {γ_1..γ_{r'}, β̄′}, τ_j = g_j(y). The g's come
/// from the relative I-function; the non-∞ relations must agree with the
/// toric mirror map of X.
pub fn relative_mirror_map(cd: &CompactifiedData, order: &Q) -> Result<MirrorMap> {
    let op = "relative_mirror_map";
    let oracle = relative_ifunction_oracle(cd, order)?;
    let rays: Vec<usize> = (0..cd.bar.m()).collect();
    let mm = assemble(oracle.coords, order, oracle.z1_pieces, &rays)?;
    let base = toric_mirror_map(&cd.base, order)?;
    for r in &base.forward {
        let rel = mm
            .relation(&r.target)
            .ok_or_else(|| Error::consistency(MODULE, op, "relation missing in relative map").with_datum(&r.target))?;
        let lifted = r.series.with_grading(mm.coords.y_grading.clone())?;
        if let Some((m, a, b)) = rel.series.first_difference(&lifted) {
            return Err(Error::consistency(MODULE, op, "relative map disagrees with the toric mirror map")
                .with_datum(format!("{}: {m}: {} vs {}", r.target, format_q(&a), format_q(&b))));
        }
    }
    Ok(mm)
}

/// The ∞ relation's exponent series, Σ_i (D_i·β̄′) g_i.
pub fn infinity_series(mm: &MirrorMap) -> Option<&Series> {
    mm.relation("q_inf").map(|r| &r.series)
}
