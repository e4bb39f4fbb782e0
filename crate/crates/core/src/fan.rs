//! Stacky fans: the JSON fan-file schema and structural validation.

use crate::error::{Error, Result};
use crate::lattice::{self, IMat};
use crate::rational::{parse_q, Q};
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

const MODULE: &str = "fan-core";

/// Raw fan document as it appears on disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FanDocument {
    pub rank: usize,
    pub rays: Vec<Vec<i64>>,
    pub cones: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra_vectors: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis_p: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StackyFan {
    pub rank: usize,
    pub rays: Vec<Vec<i64>>,
    /// Maximal cones, each a sorted list of ray indices.
    pub cones: Vec<Vec<usize>>,
    pub extra_vectors: Vec<Vec<i64>>,
    /// Optional user basis of L^∨, each p_a written as coefficients over D_0..D_{m'-1}.
    pub basis_p: Option<Vec<Vec<Q>>>,
    pub labels: Vec<String>,
}

/// Result of locating a vector in the fan.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeLocation {
    /// Ray indices of the minimal face containing the vector.
    pub face: Vec<usize>,
    /// Coefficients on those rays, all strictly positive.
    pub coefficients: Vec<Q>,
}

impl StackyFan {
    /// Number of rays, `m`.
    pub fn m(&self) -> usize {
        self.rays.len()
    }

    /// Number of rays plus extra vectors, `m'`.
    pub fn m_ext(&self) -> usize {
        self.rays.len() + self.extra_vectors.len()
    }

    /// `b_i` for `i < m'`.
    pub fn vector(&self, i: usize) -> &[i64] {
        if i < self.m() {
            &self.rays[i]
        } else {
            &self.extra_vectors[i - self.m()]
        }
    }

    pub fn vectors(&self) -> impl Iterator<Item = &[i64]> {
        (0..self.m_ext()).map(move |i| self.vector(i))
    }

    pub fn label(&self, i: usize) -> String {
        self.labels.get(i).cloned().unwrap_or_else(|| if i < self.m() { format!("b{i}") } else { format!("v{i}") })
    }

    /// Every face of every listed cone (including the empty face), as sorted index sets.
    pub fn faces(&self) -> BTreeSet<Vec<usize>> {
        let mut out = BTreeSet::new();
        for cone in &self.cones {
            let k = cone.len();
            for mask in 0u64..(1u64 << k) {
                out.insert((0..k).filter(|b| mask >> b & 1 == 1).map(|b| cone[b]).collect());
            }
        }
        out
    }

    /// Locates `v` in the support: the minimal face containing it with its
    /// positive coefficients, or `None` if `v` is outside |Σ|.
    pub fn locate(&self, v: &[i64]) -> Option<ConeLocation> {
        if v.iter().all(|x| *x == 0) {
            return Some(ConeLocation { face: vec![], coefficients: vec![] });
        }
        for cone in &self.cones {
            let a: Vec<Vec<Q>> = (0..self.rank)
                .map(|r| cone.iter().map(|&i| Q::from_integer(self.rays[i][r].into())).collect())
                .collect();
            let b: Vec<Q> = v.iter().map(|&x| Q::from_integer(x.into())).collect();
            if let Some(c) = lattice::solve(&a, &b) {
                if c.iter().all(|x| !x.is_negative()) {
                    let (face, coefficients) =
                        cone.iter().zip(c).filter(|(_, x)| !x.is_zero()).map(|(&i, x)| (i, x)).unzip();
                    return Some(ConeLocation { face, coefficients });
                }
            }
        }
        None
    }

    pub fn to_document(&self) -> FanDocument {
        FanDocument {
            rank: self.rank,
            rays: self.rays.clone(),
            cones: self.cones.clone(),
            extra_vectors: self.extra_vectors.clone(),
            basis_p: self
                .basis_p
                .as_ref()
                .map(|b| b.iter().map(|row| row.iter().map(crate::rational::format_q).collect()).collect()),
            labels: if self.labels.is_empty() { None } else { Some(self.labels.clone()) },
        }
    }

    /// Builds and validates a fan from an in-memory document.
    pub fn from_document(doc: FanDocument) -> Result<StackyFan> {
        let op = "parse_stacky_fan";
        let err = |msg: String| Error::validation(MODULE, op, msg);
        let n = doc.rank;
        if n == 0 {
            return Err(err("rank must be positive".into()));
        }
        for (i, v) in doc.rays.iter().chain(&doc.extra_vectors).enumerate() {
            if v.len() != n {
                return Err(err(format!("vector {i} has length {} but rank is {n}", v.len())).with_datum(format!("{v:?}")));
            }
        }
        for (i, r) in doc.rays.iter().enumerate() {
            let g = lattice::gcd_all(&r.iter().map(|&x| x as i128).collect::<Vec<_>>());
            if g != 1 {
                return Err(err(format!("ray {i} is not primitive")).with_datum(format!("{r:?}")));
            }
        }
        for i in 0..doc.rays.len() {
            for j in i + 1..doc.rays.len() {
                if doc.rays[i] == doc.rays[j] {
                    return Err(err(format!("rays {i} and {j} coincide")).with_datum(format!("{:?}", doc.rays[i])));
                }
            }
        }
        let mut cones = Vec::new();
        for cone in &doc.cones {
            let mut c = cone.clone();
            c.sort_unstable();
            c.dedup();
            if c.len() != cone.len() || c.iter().any(|&i| i >= doc.rays.len()) {
                return Err(err("cone refers to a missing or repeated ray".into()).with_datum(format!("{cone:?}")));
            }
            let cols: Vec<Vec<Q>> =
                c.iter().map(|&i| doc.rays[i].iter().map(|&x| Q::from_integer(x.into())).collect()).collect();
            if lattice::rank(&cols) != c.len() {
                return Err(err("cone is not simplicial".into()).with_datum(format!("{cone:?}")));
            }
            cones.push(c);
        }
        // keep only maximal cones
        let all = cones.clone();
        cones.retain(|c| !all.iter().any(|d| d.len() > c.len() && c.iter().all(|i| d.contains(i))));
        cones.sort();
        cones.dedup();

        let labels = doc.labels.clone().unwrap_or_default();
        if !labels.is_empty() && labels.len() != doc.rays.len() + doc.extra_vectors.len() {
            return Err(err("labels must name every ray and extra vector".into()));
        }
        let basis_p = match &doc.basis_p {
            None => None,
            Some(rows) => Some(
                rows.iter()
                    .map(|row| {
                        row.iter()
                            .map(|s| parse_q(s).ok_or_else(|| err(format!("bad rational {s:?} in basis_p"))))
                            .collect::<Result<Vec<Q>>>()
                    })
                    .collect::<Result<Vec<_>>>()?,
            ),
        };
        let fan = StackyFan { rank: n, rays: doc.rays, cones, extra_vectors: doc.extra_vectors, basis_p, labels };
        fan.check_face_intersections()?;
        for (j, v) in fan.extra_vectors.iter().enumerate() {
            if fan.locate(v).is_none() {
                return Err(err(format!("extra vector {} lies outside the support", fan.m() + j)).with_datum(format!("{v:?}")));
            }
        }
        if !fan.generates_lattice() {
            return Err(err("rays and extra vectors do not generate Z^n".into()));
        }
        Ok(fan)
    }

    /// Two maximal cones must meet in a common face: no point of both cones may
    /// carry weight on a ray outside the shared face.
    fn check_face_intersections(&self) -> Result<()> {
        let n = self.rank;
        for (a, ca) in self.cones.iter().enumerate() {
            for cb in &self.cones[a + 1..] {
                let outside: Vec<usize> = ca.iter().copied().filter(|i| !cb.contains(i)).collect();
                if outside.is_empty() {
                    continue;
                }
                // unknowns: x (rays of ca), y (rays of cb); Σx b − Σy b = 0, Σ_{outside} x = 1
                let cols = ca.len() + cb.len();
                let mut e: Vec<Vec<Q>> = (0..n)
                    .map(|r| {
                        ca.iter()
                            .map(|&i| Q::from_integer(self.rays[i][r].into()))
                            .chain(cb.iter().map(|&j| -Q::from_integer(self.rays[j][r].into())))
                            .collect()
                    })
                    .collect();
                let mut norm = vec![Q::zero(); cols];
                for (k, i) in ca.iter().enumerate() {
                    if outside.contains(i) {
                        norm[k] = Q::from_integer(1.into());
                    }
                }
                e.push(norm);
                let mut f = vec![Q::zero(); n];
                f.push(Q::from_integer(1.into()));
                if lattice::nonneg_feasible(&e, &f).is_some() {
                    return Err(Error::validation(MODULE, "parse_stacky_fan", "cones overlap beyond a common face")
                        .with_datum(format!("{ca:?} / {cb:?}")));
                }
            }
        }
        Ok(())
    }

    /// True when {b_0..b_{m'-1}} spans Z^n over Z.
    pub fn generates_lattice(&self) -> bool {
        let a: IMat = (0..self.rank).map(|r| self.vectors().map(|v| v[r] as i128).collect()).collect();
        let s = lattice::smith(&a, self.rank, self.m_ext());
        s.rank == self.rank && s.invariants.iter().all(|&x| x == 1)
    }
}

pub fn parse_stacky_fan(document: &str) -> Result<StackyFan> {
    let doc: FanDocument = serde_json::from_str(document)
        .map_err(|e| Error::validation(MODULE, "parse_stacky_fan", format!("malformed document: {e}")))?;
    StackyFan::from_document(doc)
}
