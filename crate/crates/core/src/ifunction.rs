//! Hypergeometric factors of the I-function and the z⁻¹ / z⁻² coefficient
//! data read off from them.

use crate::compactify::CompactifiedData;
use crate::coords::MirrorCoords;
use crate::enumerate::{enumerate_effective, EffClass};
use crate::error::{Error, Result};
use crate::rational::{factorial, fract, is_integer, q, to_i64, Q};
use crate::series::{Monomial, Series};
use crate::toric::ToricData;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use std::collections::BTreeMap;

const MODULE: &str = "ifunction-engine";

/// Leading behaviour of ∏_{a≤0}(D̄+az) / ∏_{a≤p}(D̄+az) over ⟨a⟩ = ⟨p⟩.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorExpansion {
    pub z_exponent: i64,
    pub scalar: Q,
    /// 1 when a bare D̄ factor survives (p a negative integer).
    pub forced_divisor: u8,
}

pub fn hyper_factor(p: &Q) -> FactorExpansion {
    let mut z_exponent = 0i64;
    let mut scalar = Q::one();
    let mut forced_divisor = 0u8;
    if p.is_positive() {
        // denominator: a ∈ (0, p] with ⟨a⟩ = ⟨p⟩
        let mut a = p.clone();
        while a.is_positive() {
            scalar /= &a;
            z_exponent -= 1;
            a -= Q::one();
        }
    } else if p.is_negative() {
        // numerator: a ∈ (p, 0] with ⟨a⟩ = ⟨p⟩; a = 0 leaves D̄ alone
        let mut a = p + Q::one();
        while !a.is_positive() {
            if a.is_zero() {
                forced_divisor = 1;
            } else {
                scalar *= &a;
                z_exponent += 1;
            }
            a += Q::one();
        }
    }
    FactorExpansion { z_exponent, scalar, forced_divisor }
}

/// Closed form of the integral case, used as a cross-check.
pub fn hyper_factor_closed_form(p: i64) -> FactorExpansion {
    if p >= 0 {
        FactorExpansion { z_exponent: -p, scalar: Q::new(1.into(), factorial(p as u64)), forced_divisor: 0 }
    } else {
        let k = (-p - 1) as u64;
        let sign = if k.is_multiple_of(2) { Q::one() } else { -Q::one() };
        FactorExpansion { z_exponent: -p - 1, scalar: sign * Q::from_integer(factorial(k)), forced_divisor: 1 }
    }
}

/// Per-class data extracted from the product of factors.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffExtraction {
    pub z_exponent: i64,
    pub scalar: Q,
    /// Indices whose D̄ survives; two or more means the term is discarded.
    pub forced: Vec<usize>,
    pub sector: Vec<i64>,
}

impl CoeffExtraction {
    fn live(&self) -> bool {
        self.forced.len() <= 1
    }

    /// z⁻¹ coefficient on 1_{v(d)} (including v(d) = 0).
    pub fn z1_scalar(&self) -> Option<(&[i64], &Q)> {
        (self.forced.is_empty() && self.z_exponent == -1).then_some((self.sector.as_slice(), &self.scalar))
    }

    /// z⁻¹ coefficient of D̄_i.
    pub fn z1_divisor_linear(&self) -> Option<(usize, &Q)> {
        (self.live() && self.forced.len() == 1 && self.z_exponent == -1).then(|| (self.forced[0], &self.scalar))
    }

    /// z⁻² coefficient on the identity.
    pub fn z2_h0(&self) -> Option<&Q> {
        (self.forced.is_empty() && self.z_exponent == -2 && self.sector.iter().all(|x| *x == 0)).then_some(&self.scalar)
    }
}

/// Multiplies the factors over every vector of `data`; in relative mode the
/// factor of D_∞ is 1/(D̄_∞ + (D_∞·d) z) instead.
pub fn z_extract(data: &ToricData, d: &EffClass, relative_infinity: Option<usize>) -> Result<CoeffExtraction> {
    let mut z_exponent = 0i64;
    let mut scalar = Q::one();
    let mut forced = Vec::new();
    for (i, p) in d.pairings.iter().enumerate() {
        if Some(i) == relative_infinity {
            let k = to_i64(p).filter(|k| *k >= 0).ok_or_else(|| {
                Error::validation(MODULE, "z_extract", "relative class needs D_inf . d in Z>=0").with_datum(p)
            })?;
            if k > 0 {
                z_exponent -= 1;
                scalar /= q(k);
            }
            continue;
        }
        let f = hyper_factor(p);
        z_exponent += f.z_exponent;
        scalar *= f.scalar;
        if f.forced_divisor == 1 {
            forced.push(i);
        }
    }
    // z-degree balance: E + F = −ρ̂·d − age(v(d)), shifted in relative mode
    let rho: Q = d.pairings.iter().sum();
    let mut expect = -rho - &d.sector.age;
    if let Some(inf) = relative_infinity {
        let k = &d.pairings[inf];
        expect += k;
        if k.is_positive() {
            expect -= Q::one();
        }
    }
    if q(z_exponent + forced.len() as i64) != expect {
        return Err(Error::consistency(MODULE, "z_extract", "z-degree balance violated")
            .with_datum(format!("{:?}", d.pairings.iter().map(crate::rational::format_q).collect::<Vec<_>>())));
    }
    data.fan.locate(&d.sector.vector).ok_or_else(|| Error::consistency(MODULE, "z_extract", "sector outside the fan"))?;
    Ok(CoeffExtraction { z_exponent, scalar, forced, sector: d.sector.vector.clone() })
}

/// Output of the relative I-function oracle.
#[derive(Debug, Clone)]
pub struct RelativeOracle {
    /// g-pieces keyed by bar vector index: D̄_i-linear for rays and D_∞,
    /// 1_{b_j} for extra vectors.
    pub z1_pieces: BTreeMap<usize, Series>,
    pub z2_h0: Series,
    pub coords: MirrorCoords,
}

/// Sums the relative I-function over K̄_eff up to `bound` and asserts that
/// the z⁻² H⁰ part is the single monomial y^{d_∞}.
pub fn relative_ifunction_oracle(cd: &CompactifiedData, bound: &Q) -> Result<RelativeOracle> {
    let coords = MirrorCoords::relative(cd)?;
    let classes: Vec<EffClass> = enumerate_effective(&cd.bar, bound)?
        .into_iter()
        .filter(|d| is_integer(&d.pairings[cd.infinity]) && !d.pairings[cd.infinity].is_negative())
        .collect();
    let extractions: Vec<(EffClass, CoeffExtraction)> = classes
        .into_par_iter()
        .map(|d| z_extract(&cd.bar, &d, Some(cd.infinity)).map(|e| (d, e)))
        .collect::<Result<_>>()?;
    let g = coords.y_grading.clone();
    let mut z1: BTreeMap<usize, Vec<(Monomial, Q)>> = BTreeMap::new();
    let mut z2: Vec<(Monomial, Q)> = Vec::new();
    let me = cd.bar.m_ext();
    for (d, e) in &extractions {
        let mono = coords.y_monomial(&d.pairings)?;
        if let Some((i, c)) = e.z1_divisor_linear() {
            z1.entry(i).or_default().push((mono.clone(), c.clone()));
        }
        if let Some((sector, c)) = e.z1_scalar() {
            if let Some(j) = (cd.bar.m()..me).find(|&j| cd.bar.fan.vector(j) == sector) {
                z1.entry(j).or_default().push((mono.clone(), c.clone()));
            }
        }
        if let Some(c) = e.z2_h0() {
            let ok = d.pairings.iter().all(|x| is_integer(x) && !x.is_negative())
                && d.pairings.iter().sum::<Q>() == q(2)
                && d.pairings[cd.infinity].is_one();
            if !ok {
                return Err(Error::consistency(MODULE, "relative_ifunction_oracle", "z^-2 H^0 term from an inadmissible class")
                    .with_datum(mono));
            }
            z2.push((mono, c.clone()));
        }
    }
    let z1_pieces = z1
        .into_iter()
        .map(|(i, terms)| Ok((i, Series::from_terms(terms, g.clone(), bound.clone())?)))
        .collect::<Result<_>>()?;
    let z2_h0 = Series::from_terms(z2, g.clone(), bound.clone())?;
    let expected_mono = coords.y_monomial(&cd.d_infinity)?;
    let expected = Series::from_terms([(expected_mono.clone(), Q::one())], g, bound.clone())?;
    if let Some((m, a, b)) = z2_h0.first_difference(&expected) {
        return Err(Error::consistency(MODULE, "relative_ifunction_oracle", "z^-2 H^0 part is not y^{d_inf}")
            .with_datum(format!("{m}: {} vs {}", crate::rational::format_q(&a), crate::rational::format_q(&b))));
    }
    Ok(RelativeOracle { z1_pieces, z2_h0, coords })
}

/// Fractional progression check used in tests: direct product over the
/// arithmetic progression, without the case split.
pub fn hyper_factor_direct(p: &Q) -> FactorExpansion {
    let frac_p = fract(p);
    let lo = p.clone().min(Q::zero());
    let hi = p.clone().max(Q::zero());
    let mut a = lo.floor() + &frac_p;
    if a < lo {
        a += Q::one();
    }
    let (mut num, mut den) = (Vec::new(), Vec::new());
    while a <= hi {
        if a <= Q::zero() && a > *p {
            num.push(a.clone());
        }
        if a > Q::zero() && a <= *p {
            den.push(a.clone());
        }
        a += Q::one();
    }
    let forced = num.iter().filter(|x| x.is_zero()).count() as u8;
    let num: Vec<Q> = num.into_iter().filter(|x| !x.is_zero()).collect();
    let scalar = num.iter().fold(Q::one(), |s, x| s * x) / den.iter().fold(Q::one(), |s, x| s * x);
    FactorExpansion { z_exponent: num.len() as i64 - den.len() as i64, scalar, forced_divisor: forced }
}
