//! Exact truncated multivariate series with rational exponents.
//!
//! A [`Series`] carries a grading (a positive weight per variable) and an
//! order: terms of grade above the order are unknown and never stored.

use crate::error::{Error, Result};
use crate::rational::{format_q, parse_q, q, to_i64, Q};
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

const MODULE: &str = "series-engine";

/// Exponent map; zero exponents are never stored.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(BTreeMap<String, Q>);

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn var(name: &str) -> Self {
        Self::from_pairs([(name.to_string(), Q::one())])
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (String, Q)>) -> Self {
        let mut m = BTreeMap::new();
        for (v, e) in pairs {
            *m.entry(v).or_insert_with(Q::zero) += e;
        }
        m.retain(|_, e| !e.is_zero());
        Monomial(m)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exponent(&self, var: &str) -> Q {
        self.0.get(var).cloned().unwrap_or_else(Q::zero)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&String, &Q)> {
        self.0.iter()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut m = self.0.clone();
        for (v, e) in &other.0 {
            let x = m.entry(v.clone()).or_insert_with(Q::zero);
            *x += e;
            if x.is_zero() {
                m.remove(v);
            }
        }
        Monomial(m)
    }

    pub fn pow(&self, e: &Q) -> Monomial {
        Monomial::from_pairs(self.0.iter().map(|(v, x)| (v.clone(), x * e)))
    }

    pub fn inverse(&self) -> Monomial {
        self.pow(&-Q::one())
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(v, e)| {
                if e.is_one() {
                    v.clone()
                } else if e.is_integer() && !e.is_negative() {
                    format!("{v}^{}", format_q(e))
                } else {
                    format!("{v}^({})", format_q(e))
                }
            })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// Weight per variable; every weight is strictly positive.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Grading(BTreeMap<String, Q>);

impl Grading {
    pub fn new(weights: impl IntoIterator<Item = (String, Q)>) -> Result<Grading> {
        let map: BTreeMap<String, Q> = weights.into_iter().collect();
        if let Some((v, _)) = map.iter().find(|(_, w)| !w.is_positive()) {
            return Err(Error::validation(MODULE, "grading", "variable weight must be positive").with_datum(v));
        }
        Ok(Grading(map))
    }

    pub fn weight(&self, var: &str) -> Option<&Q> {
        self.0.get(var)
    }

    pub fn weights(&self) -> impl Iterator<Item = (&String, &Q)> {
        self.0.iter()
    }

    pub fn grade(&self, m: &Monomial) -> Result<Q> {
        let mut g = Q::zero();
        for (v, e) in &m.0 {
            let w = self.0.get(v).ok_or_else(|| {
                Error::validation(MODULE, "grading", "variable outside the grading alphabet").with_datum(v)
            })?;
            g += w * e;
        }
        Ok(g)
    }

    fn grade_unchecked(&self, m: &Monomial) -> Q {
        m.0.iter().map(|(v, e)| &self.0[v] * e).sum()
    }

    /// Union of two gradings; a variable with conflicting weights is an error.
    pub fn merge(&self, other: &Grading) -> Result<Grading> {
        let mut m = self.0.clone();
        for (v, w) in &other.0 {
            if let Some(x) = m.get(v) {
                if x != w {
                    return Err(Error::validation(MODULE, "grading", "conflicting weights").with_datum(v));
                }
            }
            m.insert(v.clone(), w.clone());
        }
        Ok(Grading(m))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    terms: BTreeMap<Monomial, Q>,
    grading: Arc<Grading>,
    order: Q,
}

/// Term-pair count above which `mul` splits the work across threads.
const PAR_THRESHOLD: usize = 4096;

impl Series {
    pub fn zero(grading: Arc<Grading>, order: Q) -> Series {
        Series { terms: BTreeMap::new(), grading, order }
    }

    pub fn constant(c: Q, grading: Arc<Grading>, order: Q) -> Series {
        let mut s = Series::zero(grading, order);
        if !c.is_zero() {
            s.terms.insert(Monomial::one(), c);
        }
        s
    }

    pub fn one(grading: Arc<Grading>, order: Q) -> Series {
        Series::constant(Q::one(), grading, order)
    }

    pub fn var(name: &str, grading: Arc<Grading>, order: Q) -> Result<Series> {
        Series::from_terms([(Monomial::var(name), Q::one())], grading, order)
    }

    /// Builds a series, dropping terms above the order. Non-constant
    /// monomials must have positive grade.
    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, Q)>, grading: Arc<Grading>, order: Q) -> Result<Series> {
        let mut s = Series::zero(grading, order);
        for (m, c) in terms {
            let g = s.grading.grade(&m)?;
            if !m.is_one() && !g.is_positive() {
                return Err(Error::validation(MODULE, "series", "non-constant monomial with non-positive grade")
                    .with_datum(m.to_string()));
            }
            if g <= s.order {
                s.add_term(m, c);
            }
        }
        Ok(s)
    }

    fn add_term(&mut self, m: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn like(&self, order: Q) -> Series {
        Series::zero(self.grading.clone(), order)
    }

    pub fn grading(&self) -> &Arc<Grading> {
        &self.grading
    }

    pub fn order(&self) -> &Q {
        &self.order
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn grade(&self, m: &Monomial) -> Q {
        self.grading.grade_unchecked(m)
    }

    pub fn coefficient(&self, m: &Monomial) -> Q {
        self.terms.get(m).cloned().unwrap_or_else(Q::zero)
    }

    pub fn constant_term(&self) -> Q {
        self.coefficient(&Monomial::one())
    }

    /// Terms in canonical order: by grade, then by monomial.
    pub fn terms(&self) -> Vec<(Monomial, Q)> {
        let mut v: Vec<(Q, Monomial, Q)> =
            self.terms.iter().map(|(m, c)| (self.grade(m), m.clone(), c.clone())).collect();
        v.sort_by(|a, b| (&a.0, &a.1).cmp(&(&b.0, &b.1)));
        v.into_iter().map(|(_, m, c)| (m, c)).collect()
    }

    pub fn truncate(&self, order: &Q) -> Series {
        let order = order.min(&self.order).clone();
        let terms = self.terms.iter().filter(|(m, _)| self.grade(m) <= order).map(|(m, c)| (m.clone(), c.clone())).collect();
        Series { terms, grading: self.grading.clone(), order }
    }

    /// Same terms viewed under a larger alphabet.
    pub fn with_grading(&self, grading: Arc<Grading>) -> Result<Series> {
        for m in self.terms.keys() {
            for (v, _) in m.entries() {
                if grading.weight(v) != self.grading.weight(v) {
                    return Err(Error::validation(MODULE, "with_grading", "weight changed").with_datum(v));
                }
            }
        }
        Ok(Series { terms: self.terms.clone(), grading, order: self.order.clone() })
    }

    fn check_compatible(&self, other: &Series, op: &'static str) -> Result<()> {
        if !Arc::ptr_eq(&self.grading, &other.grading) && self.grading != other.grading {
            return Err(Error::validation(MODULE, op, "grading mismatch"));
        }
        Ok(())
    }

    pub fn add(&self, other: &Series) -> Result<Series> {
        self.check_compatible(other, "add")?;
        let order = self.order.clone().min(other.order.clone());
        let mut s = self.truncate(&order);
        for (m, c) in &other.terms {
            if self.grade(m) <= order {
                s.add_term(m.clone(), c.clone());
            }
        }
        Ok(s)
    }

    pub fn neg(&self) -> Series {
        self.scale(&-Q::one())
    }

    pub fn sub(&self, other: &Series) -> Result<Series> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Q) -> Series {
        let mut s = self.like(self.order.clone());
        if !c.is_zero() {
            s.terms = self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect();
        }
        s
    }

    /// Multiplies every term by `c·m`; the order shifts by grade(m).
    pub fn mul_monomial(&self, m: &Monomial, c: &Q) -> Result<Series> {
        let g = self.grading.grade(m)?;
        let mut s = self.like(&self.order + &g);
        for (k, x) in &self.terms {
            let km = k.mul(m);
            if !km.is_one() && !s.grade(&km).is_positive() {
                return Err(Error::validation(MODULE, "mul_monomial", "shift produces a non-positive grade")
                    .with_datum(km.to_string()));
            }
            s.add_term(km, x * c);
        }
        Ok(s)
    }

    pub fn mul(&self, other: &Series) -> Result<Series> {
        self.check_compatible(other, "mul")?;
        // order known: min(a.order + min grade of b, b.order + min grade of a)
        let order = self.product_order(other);
        let mut a: Vec<(Q, &Monomial, &Q)> = self.terms.iter().map(|(m, c)| (self.grade(m), m, c)).collect();
        let mut b: Vec<(Q, &Monomial, &Q)> = other.terms.iter().map(|(m, c)| (self.grade(m), m, c)).collect();
        a.sort_by(|x, y| x.0.cmp(&y.0));
        b.sort_by(|x, y| x.0.cmp(&y.0));
        let row = |(ga, ma, ca): &(Q, &Monomial, &Q)| -> BTreeMap<Monomial, Q> {
            let mut acc = BTreeMap::new();
            for (gb, mb, cb) in &b {
                if ga + gb > order {
                    break;
                }
                let e = acc.entry(ma.mul(mb)).or_insert_with(Q::zero);
                *e += *ca * *cb;
            }
            acc
        };
        let mut s = self.like(order.clone());
        if a.len() * b.len() >= PAR_THRESHOLD {
            let parts: Vec<BTreeMap<Monomial, Q>> = a.par_iter().map(row).collect();
            for part in parts {
                for (m, c) in part {
                    s.add_term(m, c);
                }
            }
        } else {
            for t in &a {
                for (m, c) in row(t) {
                    s.add_term(m, c);
                }
            }
        }
        Ok(s)
    }

    fn min_grade(&self) -> Option<Q> {
        self.terms.keys().map(|m| self.grade(m)).min()
    }

    fn product_order(&self, other: &Series) -> Q {
        let from_a = match other.min_grade() {
            Some(g) => &self.order + g,
            None => &self.order + &other.order,
        };
        let from_b = match self.min_grade() {
            Some(g) => &other.order + g,
            None => &self.order + &other.order,
        };
        from_a.min(from_b)
    }

    pub fn pow(&self, k: u32) -> Result<Series> {
        let mut out = Series::one(self.grading.clone(), self.order.clone());
        for _ in 0..k {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    fn require_no_constant(&self, op: &'static str) -> Result<()> {
        if !self.constant_term().is_zero() {
            return Err(Error::validation(MODULE, op, "argument has a nonzero constant term")
                .with_datum(format_q(&self.constant_term())));
        }
        Ok(())
    }

    /// Σ_k coeff(k)·s^k for k ≥ 1 until the powers vanish below the order.
    fn power_sum(&self, mut coeff: impl FnMut(u64) -> Q) -> Series {
        let mut out = self.like(self.order.clone());
        let mut power = self.clone();
        let mut k = 1u64;
        while !power.is_zero() {
            for (m, c) in &power.terms {
                out.add_term(m.clone(), c * coeff(k));
            }
            power = power.mul(self).expect("same grading").truncate(&self.order);
            k += 1;
        }
        out
    }

    pub fn exp(&self) -> Result<Series> {
        self.require_no_constant("exp_series")?;
        let mut fact = vec![Q::one()];
        let mut out = self.power_sum(|k| {
            while fact.len() as u64 <= k {
                let n = fact.len() as i64;
                let next = fact.last().unwrap() / q(n);
                fact.push(next);
            }
            fact[k as usize].clone()
        });
        out.add_term(Monomial::one(), Q::one());
        Ok(out)
    }

    pub fn log_one_plus(&self) -> Result<Series> {
        self.require_no_constant("log_one_plus")?;
        Ok(self.power_sum(|k| {
            let x = Q::new(1.into(), (k as i64).into());
            if k % 2 == 1 {
                x
            } else {
                -x
            }
        }))
    }

    /// log of a series with constant term 1.
    pub fn log(&self) -> Result<Series> {
        if !self.constant_term().is_one() {
            return Err(Error::validation(MODULE, "log", "constant term must be 1"));
        }
        let one = Series::one(self.grading.clone(), self.order.clone());
        self.sub(&one)?.log_one_plus()
    }

    /// (1 + s)^e for rational e, with s having no constant term.
    pub fn one_plus_pow(&self, e: &Q) -> Result<Series> {
        if e.is_zero() {
            return Ok(Series::one(self.grading.clone(), self.order.clone()));
        }
        self.log_one_plus()?.scale(e).exp()
    }

    /// Simultaneous substitution var → series. The images must share one
    /// target grading, and each image's leading term must have grade at
    /// least the weight of the variable it replaces (equal when the variable
    /// occurs with a negative exponent).
    pub fn substitute(&self, assignment: &BTreeMap<String, Series>, order: &Q) -> Result<Series> {
        let op = "substitute";
        let mut target: Option<Arc<Grading>> = None;
        for img in assignment.values() {
            match &target {
                None => target = Some(img.grading.clone()),
                Some(t) if **t != *img.grading => return Err(Error::validation(MODULE, op, "images use different gradings")),
                _ => {}
            }
        }
        let target = match target {
            Some(t) => t,
            None => {
                if let Some(m) = self.terms.keys().find(|m| !m.is_one()) {
                    return Err(Error::validation(MODULE, op, "unassigned variable").with_datum(m.to_string()));
                }
                return Ok(Series::constant(self.constant_term(), self.grading.clone(), order.min(&self.order).clone()));
            }
        };

        struct Image {
            lead: Monomial,
            lead_grade: Q,
            coeff: Q,
            unit: Series,
            unit_order: Q,
        }
        let mut images: HashMap<&str, Image> = HashMap::new();
        for (v, img) in assignment {
            let Some((lead, coeff)) = img.terms.iter().min_by(|a, b| (img.grade(a.0), a.0).cmp(&(img.grade(b.0), b.0))) else {
                return Err(Error::validation(MODULE, op, "zero image").with_datum(v));
            };
            let lead_grade = img.grade(lead);
            if img.terms.keys().filter(|m| img.grade(m) == lead_grade).count() > 1 {
                return Err(Error::validation(MODULE, op, "image has no unique leading term").with_datum(v));
            }
            let w = self.grading.weight(v).cloned().unwrap_or_else(Q::zero);
            if lead_grade < w {
                return Err(Error::validation(MODULE, op, "grading violation: image grade below source grade").with_datum(v));
            }
            let unit = img.mul_monomial(&lead.inverse(), &coeff.recip())?;
            let unit_order = unit.order.clone();
            images.insert(v.as_str(), Image { lead: lead.clone(), lead_grade, coeff: coeff.clone(), unit, unit_order });
        }

        let mut result_order = order.min(&self.order).clone();
        let bound = result_order.clone();
        let mut out_terms: Vec<(Monomial, Q)> = Vec::new();
        let mut unit_cache: HashMap<(String, Q), Series> = HashMap::new();
        for (m, c) in &self.terms {
            let mut lead = Monomial::one();
            let mut coeff = c.clone();
            let mut lead_grade = Q::zero();
            let mut factors: Vec<Series> = Vec::new();
            let mut min_unit_order: Option<Q> = None;
            for (v, e) in m.entries() {
                let img = images.get(v.as_str()).ok_or_else(|| {
                    Error::validation(MODULE, op, "unassigned variable").with_datum(v)
                })?;
                if e.is_negative() && img.lead_grade != self.grading.weight(v).cloned().unwrap_or_else(Q::zero) {
                    return Err(Error::validation(MODULE, op, "grading violation under a negative exponent").with_datum(v));
                }
                lead = lead.mul(&img.lead.pow(e));
                lead_grade += &img.lead_grade * e;
                coeff *= rational_pow(&img.coeff, e).ok_or_else(|| {
                    Error::validation(MODULE, op, "leading coefficient has no rational power").with_datum(v)
                })?;
                factors.push(unit_power(&mut unit_cache, v, e, &img.unit)?);
                min_unit_order = Some(match min_unit_order {
                    None => img.unit_order.clone(),
                    Some(o) => o.min(img.unit_order.clone()),
                });
            }
            // only grades up to bound − lead_grade of the unit can survive
            let need = &bound - &lead_grade;
            let mut unit: Option<Series> = None;
            for f in factors {
                let f = f.truncate(&need);
                unit = Some(match unit {
                    None => f,
                    Some(u) => u.mul(&f)?,
                });
            }
            if let Some(uo) = min_unit_order {
                result_order = result_order.min(&lead_grade + uo);
            }
            match unit {
                None => out_terms.push((lead, coeff)),
                Some(u) => {
                    for (um, uc) in &u.terms {
                        out_terms.push((lead.mul(um), &coeff * uc));
                    }
                }
            }
        }
        let mut out = Series::zero(target, result_order);
        for (m, c) in out_terms {
            if out.grade(&m) <= out.order {
                out.add_term(m, c);
            }
        }
        Ok(out)
    }

    pub fn variables(&self) -> Vec<String> {
        let mut v: Vec<String> = self.terms.keys().flat_map(|m| m.0.keys().cloned()).collect();
        v.sort();
        v.dedup();
        v
    }

    /// First monomial (canonical order) where the two series differ, up to
    /// the smaller order.
    pub fn first_difference(&self, other: &Series) -> Option<(Monomial, Q, Q)> {
        let order = self.order.clone().min(other.order.clone());
        let mut keys: Vec<(Q, &Monomial)> =
            self.terms.keys().chain(other.terms.keys()).map(|m| (self.grading.grade_unchecked(m), m)).collect();
        keys.sort();
        keys.dedup();
        keys.into_iter()
            .filter(|(g, _)| *g <= order)
            .map(|(_, m)| (m.clone(), self.coefficient(m), other.coefficient(m)))
            .find(|(_, a, b)| a != b)
    }

    pub fn agrees_with(&self, other: &Series) -> bool {
        self.first_difference(other).is_none()
    }
}

/// c^e for rational c, e when the result is rational.
fn rational_pow(c: &Q, e: &Q) -> Option<Q> {
    if c.is_one() {
        return Some(Q::one());
    }
    let n = to_i64(e)?;
    let base = if n < 0 { c.recip() } else { c.clone() };
    Some(num_traits::pow(base, n.unsigned_abs() as usize))
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.terms();
        if terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in terms.iter().enumerate() {
            let (sign, mag) = if c.is_negative() { ("-", -c) } else { ("+", c.clone()) };
            if i == 0 {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            if m.is_one() {
                write!(f, "{}", format_q(&mag))?;
            } else if mag.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}*{m}", format_q(&mag))?;
            }
        }
        Ok(())
    }
}

/// Serialized form of a series: canonical term list plus grading and order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesDoc {
    pub grading: BTreeMap<String, String>,
    pub order: String,
    pub terms: Vec<TermDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermDoc {
    pub exponents: BTreeMap<String, String>,
    pub coeff: String,
}

impl Series {
    pub fn to_doc(&self) -> SeriesDoc {
        SeriesDoc {
            grading: self.grading.0.iter().map(|(v, w)| (v.clone(), format_q(w))).collect(),
            order: format_q(&self.order),
            terms: self
                .terms()
                .into_iter()
                .map(|(m, c)| TermDoc {
                    exponents: m.0.iter().map(|(v, e)| (v.clone(), format_q(e))).collect(),
                    coeff: format_q(&c),
                })
                .collect(),
        }
    }

    pub fn from_doc(doc: &SeriesDoc) -> Result<Series> {
        let bad = |what: &str| Error::validation(MODULE, "from_doc", format!("malformed {what}"));
        let grading = Grading::new(
            doc.grading.iter().map(|(v, w)| Ok((v.clone(), parse_q(w).ok_or_else(|| bad("weight"))?))).collect::<Result<Vec<_>>>()?,
        )?;
        let order = parse_q(&doc.order).ok_or_else(|| bad("order"))?;
        let terms = doc
            .terms
            .iter()
            .map(|t| {
                let m = Monomial::from_pairs(
                    t.exponents
                        .iter()
                        .map(|(v, e)| Ok((v.clone(), parse_q(e).ok_or_else(|| bad("exponent"))?)))
                        .collect::<Result<Vec<_>>>()?,
                );
                Ok((m, parse_q(&t.coeff).ok_or_else(|| bad("coefficient"))?))
            })
            .collect::<Result<Vec<_>>>()?;
        Series::from_terms(terms, Arc::new(grading), order)
    }
}

/// How a relation ties a target variable to its source variable.
#[derive(Debug, Clone)]
pub enum RelationKind {
    /// target = source · exp(series)
    Multiplicative,
    /// target = source + series
    Additive,
}

/// One relation of a formal coordinate change, written in source variables.
#[derive(Debug, Clone)]
pub struct Relation {
    pub target: String,
    pub source: String,
    pub kind: RelationKind,
    pub series: Series,
}

impl Relation {
    /// Value of the target variable as a series in the source variables.
    pub fn forward(&self) -> Result<Series> {
        let s = Series::var(&self.source, self.series.grading.clone(), self.series.order.clone())?;
        match self.kind {
            RelationKind::Multiplicative => s.mul(&self.series.exp()?),
            RelationKind::Additive => s.add(&self.series),
        }
    }
}

/// Inverts a triangular coordinate change by fixed-point iteration. Returns
/// each source variable as a series in the targets over `target_grading`;
/// the round trip is verified before returning.
/// U^e for a unit U (constant term 1), cached per (variable, exponent).
/// Positive integer powers extend the cached e−1 power by one product; other
/// exponents use exp(e·log U), with log U cached under exponent 0.
fn unit_power(cache: &mut HashMap<(String, Q), Series>, v: &str, e: &Q, unit: &Series) -> Result<Series> {
    let key = (v.to_string(), e.clone());
    if let Some(f) = cache.get(&key) {
        return Ok(f.clone());
    }
    let f = if e.is_integer() && e.is_positive() {
        if e.is_one() {
            unit.clone()
        } else {
            unit_power(cache, v, &(e - Q::one()), unit)?.mul(unit)?
        }
    } else {
        let log_key = (v.to_string(), Q::zero());
        let log = match cache.get(&log_key) {
            Some(l) => l.clone(),
            None => {
                let l = unit.sub(&Series::one(unit.grading.clone(), unit.order.clone()))?.log_one_plus()?;
                cache.insert(log_key, l.clone());
                l
            }
        };
        log.scale(e).exp()?
    };
    cache.insert(key, f.clone());
    Ok(f)
}

pub fn invert_map(relations: &[Relation], target_grading: Arc<Grading>, order: &Q) -> Result<BTreeMap<String, Series>> {
    let op = "invert_map";
    for r in relations {
        if target_grading.weight(&r.target) != r.series.grading.weight(&r.source) {
            return Err(Error::validation(MODULE, op, "target and source weights differ").with_datum(&r.target));
        }
        if r.series.order < *order {
            return Err(Error::validation(MODULE, op, "relation known only below the requested order").with_datum(&r.target));
        }
        if matches!(r.kind, RelationKind::Multiplicative) && !r.series.constant_term().is_zero() {
            return Err(Error::validation(MODULE, op, "multiplicative relation with a constant exponent").with_datum(&r.target));
        }
    }
    let min_weight = target_grading.weights().map(|(_, w)| w.clone()).min().unwrap_or_else(Q::one);
    let max_steps = (order / &min_weight).ceil().to_integer().try_into().unwrap_or(64usize) + 3;

    let mut current: BTreeMap<String, Series> = relations
        .iter()
        .map(|r| Ok((r.source.clone(), Series::var(&r.target, target_grading.clone(), order.clone())?)))
        .collect::<Result<_>>()?;
    let mut stable = false;
    for _ in 0..max_steps {
        let mut next = BTreeMap::new();
        for r in relations {
            let t = Series::var(&r.target, target_grading.clone(), order.clone())?;
            let f = r.series.substitute(&current, order)?;
            let value = match r.kind {
                RelationKind::Multiplicative => t.mul(&f.neg().exp()?)?,
                RelationKind::Additive => t.sub(&f)?,
            };
            next.insert(r.source.clone(), value.truncate(order));
        }
        let same = next.iter().all(|(k, v)| current.get(k).is_some_and(|c| c.agrees_with(v) && c.order == v.order));
        current = next;
        if same {
            stable = true;
            break;
        }
    }
    if !stable {
        return Err(Error::consistency(MODULE, op, "fixed-point iteration did not stabilize; system is not triangular"));
    }
    for r in relations {
        let lhs = r.forward()?.substitute(&current, order)?;
        let t = Series::var(&r.target, target_grading.clone(), order.clone())?;
        if let Some((m, a, b)) = lhs.first_difference(&t) {
            return Err(Error::consistency(MODULE, op, "round trip failed")
                .with_datum(format!("{}: {m}: {} vs {}", r.target, format_q(&a), format_q(&b))));
        }
        if lhs.order < *order {
            return Err(Error::consistency(MODULE, op, "round trip lost precision").with_datum(&r.target));
        }
    }
    Ok(current)
}

/// Convenience: a grading with the given (name, weight) pairs.
pub fn grading(weights: &[(&str, Q)]) -> Arc<Grading> {
    Arc::new(Grading::new(weights.iter().map(|(v, w)| (v.to_string(), w.clone()))).expect("positive weights"))
}

