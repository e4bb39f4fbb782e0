//! Integer and rational matrix routines: Smith and Hermite normal forms with
//! transforms, saturated kernels, exact rational solves.

#![allow(clippy::needless_range_loop)]

use crate::rational::{q, Q};
use num_traits::{One, Signed, Zero};

pub type IMat = Vec<Vec<i128>>;

pub fn identity(n: usize) -> IMat {
    (0..n).map(|i| (0..n).map(|j| i128::from(i == j)).collect()).collect()
}

pub fn transpose<T: Clone>(a: &[Vec<T>], cols: usize) -> Vec<Vec<T>> {
    (0..cols).map(|j| a.iter().map(|row| row[j].clone()).collect()).collect()
}

pub fn mat_mul(a: &IMat, b: &IMat, inner: usize, cols: usize) -> IMat {
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).map(|k| row[k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn gcd_all(v: &[i128]) -> i128 {
    v.iter().fold(0, |g, &x| gcd(g, x))
}

/// Extended gcd: returns (g, s, t) with s*a + t*b = g >= 0.
fn xgcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let qt = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - qt * r1);
        (s0, s1) = (s1, s0 - qt * s1);
        (t0, t1) = (t1, t0 - qt * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

/// `P * A * Q = diag(invariants)`, with P, Q unimodular.
#[derive(Debug, Clone)]
pub struct Smith {
    pub invariants: Vec<i128>,
    pub p: IMat,
    pub q: IMat,
    pub rank: usize,
}

pub fn smith(a: &IMat, rows: usize, cols: usize) -> Smith {
    let mut m = a.clone();
    let mut p = identity(rows);
    let mut qm = identity(cols);

    let swap_rows = |m: &mut IMat, p: &mut IMat, i: usize, j: usize| {
        m.swap(i, j);
        p.swap(i, j);
    };
    let swap_cols = |m: &mut IMat, qm: &mut IMat, i: usize, j: usize| {
        for row in m.iter_mut() {
            row.swap(i, j);
        }
        for row in qm.iter_mut() {
            row.swap(i, j);
        }
    };

    let mut t = 0;
    while t < rows.min(cols) {
        // pivot: smallest nonzero magnitude in the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if m[i][j] != 0 && best.is_none_or(|(bi, bj)| m[i][j].abs() < m[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        swap_rows(&mut m, &mut p, t, bi);
        swap_cols(&mut m, &mut qm, t, bj);

        loop {
            let mut dirty = false;
            // clear column t below the pivot
            for i in t + 1..rows {
                if m[i][t] != 0 && m[i][t] % m[t][t] == 0 {
                    let f = m[i][t] / m[t][t];
                    for j in 0..cols {
                        m[i][j] -= f * m[t][j];
                    }
                    for j in 0..rows {
                        p[i][j] -= f * p[t][j];
                    }
                } else if m[i][t] != 0 {
                    let (g, s, u) = xgcd(m[t][t], m[i][t]);
                    let (a_t, a_i) = (m[t][t] / g, m[i][t] / g);
                    for j in 0..cols {
                        let (x, y) = (m[t][j], m[i][j]);
                        m[t][j] = s * x + u * y;
                        m[i][j] = -a_i * x + a_t * y;
                    }
                    for j in 0..rows {
                        let (x, y) = (p[t][j], p[i][j]);
                        p[t][j] = s * x + u * y;
                        p[i][j] = -a_i * x + a_t * y;
                    }
                }
            }
            // clear row t right of the pivot
            for j in t + 1..cols {
                if m[t][j] != 0 && m[t][j] % m[t][t] == 0 {
                    let f = m[t][j] / m[t][t];
                    for i in 0..rows {
                        m[i][j] -= f * m[i][t];
                    }
                    for i in 0..cols {
                        qm[i][j] -= f * qm[i][t];
                    }
                    dirty = true;
                } else if m[t][j] != 0 {
                    let (g, s, u) = xgcd(m[t][t], m[t][j]);
                    let (a_t, a_j) = (m[t][t] / g, m[t][j] / g);
                    for i in 0..rows {
                        let (x, y) = (m[i][t], m[i][j]);
                        m[i][t] = s * x + u * y;
                        m[i][j] = -a_j * x + a_t * y;
                    }
                    for i in 0..cols {
                        let (x, y) = (qm[i][t], qm[i][j]);
                        qm[i][t] = s * x + u * y;
                        qm[i][j] = -a_j * x + a_t * y;
                    }
                    dirty = true;
                }
            }
            if dirty && (t + 1..rows).any(|i| m[i][t] != 0) {
                continue;
            }
            // divisibility: pivot must divide the trailing block
            let piv = m[t][t];
            let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| m[i][j] % piv != 0));
            match bad {
                Some(i) => {
                    for j in 0..cols {
                        m[t][j] += m[i][j];
                    }
                    for j in 0..rows {
                        p[t][j] += p[i][j];
                    }
                }
                None => break,
            }
        }
        if m[t][t] < 0 {
            for j in 0..cols {
                m[t][j] = -m[t][j];
            }
            for j in 0..rows {
                p[t][j] = -p[t][j];
            }
        }
        t += 1;
    }
    let rank = (0..rows.min(cols)).take_while(|&i| m[i][i] != 0).count();
    Smith { invariants: (0..rank).map(|i| m[i][i]).collect(), p, q: qm, rank }
}

/// Saturated integer basis of `{x : A x = 0}` (as row vectors).
pub fn kernel_basis(a: &IMat, rows: usize, cols: usize) -> Vec<Vec<i128>> {
    let s = smith(a, rows, cols);
    (s.rank..cols).map(|j| (0..cols).map(|i| s.q[i][j]).collect()).collect()
}

/// Row Hermite form: returns (H, U) with U * A = H, U unimodular, H in row
/// echelon form with positive pivots and reduced entries above pivots.
pub fn hermite_rows(a: &IMat, rows: usize, cols: usize) -> (IMat, IMat) {
    let mut h = a.clone();
    let mut u = identity(rows);
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        for i in r + 1..rows {
            if h[i][c] != 0 {
                let (g, s, t) = xgcd(h[r][c], h[i][c]);
                let (a_r, a_i) = (h[r][c] / g, h[i][c] / g);
                for j in 0..cols {
                    let (x, y) = (h[r][j], h[i][j]);
                    h[r][j] = s * x + t * y;
                    h[i][j] = -a_i * x + a_r * y;
                }
                for j in 0..rows {
                    let (x, y) = (u[r][j], u[i][j]);
                    u[r][j] = s * x + t * y;
                    u[i][j] = -a_i * x + a_r * y;
                }
            }
        }
        if h[r][c] == 0 {
            continue;
        }
        if h[r][c] < 0 {
            h[r].iter_mut().for_each(|x| *x = -*x);
            u[r].iter_mut().for_each(|x| *x = -*x);
        }
        for i in 0..r {
            let f = h[i][c].div_euclid(h[r][c]);
            if f != 0 {
                for j in 0..cols {
                    h[i][j] -= f * h[r][j];
                }
                for j in 0..rows {
                    u[i][j] -= f * u[r][j];
                }
            }
        }
        r += 1;
    }
    (h, u)
}

/// Unimodular integer matrix whose first row is the primitive vector `v`.
pub fn unimodular_completion(v: &[i128]) -> Option<IMat> {
    let n = v.len();
    if gcd_all(v) != 1 {
        return None;
    }
    // U * v^T = e_1  =>  first column of U^{-1} is v; transpose gives a row basis.
    let col: IMat = v.iter().map(|&x| vec![x]).collect();
    let (_, u) = hermite_rows(&col, n, 1);
    let inv = int_inverse(&u)?;
    Some(transpose(&inv, n))
}

pub fn to_q_mat(a: &IMat) -> Vec<Vec<Q>> {
    a.iter().map(|r| r.iter().map(|&x| q(x as i64)).collect()).collect()
}

pub fn int_inverse(a: &IMat) -> Option<IMat> {
    let inv = rat_inverse(&to_q_mat(a))?;
    inv.iter()
        .map(|row| {
            row.iter()
                .map(|x| if x.is_integer() { i128::try_from(x.to_integer()).ok() } else { None })
                .collect()
        })
        .collect()
}

/// Reduced row echelon form; returns pivot columns.
pub fn rref(a: &mut [Vec<Q>]) -> Vec<usize> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, pr);
        let inv = a[r][c].recip();
        a[r].iter_mut().for_each(|x| *x *= &inv);
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..cols {
                    let delta = &f * &a[r][j];
                    a[i][j] -= delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(a: &[Vec<Q>]) -> usize {
    let mut m = a.to_vec();
    rref(&mut m).len()
}

/// Solves `A x = b` exactly; free variables are set to zero. `None` when inconsistent.
pub fn solve(a: &[Vec<Q>], b: &[Q]) -> Option<Vec<Q>> {
    let cols = a.first().map_or(0, |r| r.len());
    let mut aug: Vec<Vec<Q>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| row.iter().cloned().chain(std::iter::once(rhs.clone())).collect())
        .collect();
    let pivots = rref(&mut aug);
    if pivots.last() == Some(&cols) {
        return None;
    }
    let mut x = vec![Q::zero(); cols];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = aug[r][cols].clone();
    }
    Some(x)
}

/// Solution space of `A x = b`: a particular solution and a kernel basis.
pub fn solve_affine(a: &[Vec<Q>], b: &[Q]) -> Option<(Vec<Q>, Vec<Vec<Q>>)> {
    let cols = a.first().map_or(0, |r| r.len());
    let x = solve(a, b)?;
    let mut m = a.to_vec();
    let pivots = rref(&mut m);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let kernel = free
        .iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); cols];
            v[f] = Q::one();
            for (r, &c) in pivots.iter().enumerate() {
                v[c] = -m[r][f].clone();
            }
            v
        })
        .collect();
    Some((x, kernel))
}

pub fn rat_inverse(a: &[Vec<Q>]) -> Option<Vec<Vec<Q>>> {
    let n = a.len();
    let mut aug: Vec<Vec<Q>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() < n || pivots[n - 1] >= n {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn det(a: &[Vec<Q>]) -> Q {
    let n = a.len();
    let mut m = a.to_vec();
    let mut d = Q::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !m[i][c].is_zero()) else { return Q::zero() };
        if p != c {
            m.swap(p, c);
            d = -d;
        }
        d *= &m[c][c];
        for i in c + 1..n {
            let f = &m[i][c] / &m[c][c];
            for j in c..n {
                let delta = &f * &m[c][j];
                m[i][j] -= delta;
            }
        }
    }
    d
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn is_nonneg(x: &Q) -> bool {
    !x.is_negative()
}


/// Exact feasibility of `{z ≥ 0 : E z = f}` by enumerating basic solutions.
/// Returns a feasible point when one exists. Intended for small systems.
pub fn nonneg_feasible(e: &[Vec<Q>], f: &[Q]) -> Option<Vec<Q>> {
    let cols = e.first().map_or(0, |r| r.len());
    // drop redundant rows
    let mut aug: Vec<Vec<Q>> = e
        .iter()
        .zip(f)
        .map(|(row, rhs)| row.iter().cloned().chain(std::iter::once(rhs.clone())).collect())
        .collect();
    let pivots = rref(&mut aug);
    if pivots.last() == Some(&cols) {
        return None;
    }
    let k = pivots.len();
    let rows: Vec<Vec<Q>> = aug[..k].iter().map(|r| r[..cols].to_vec()).collect();
    let rhs: Vec<Q> = aug[..k].iter().map(|r| r[cols].clone()).collect();
    if k == 0 {
        return Some(vec![Q::zero(); cols]);
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let sub: Vec<Vec<Q>> = rows.iter().map(|r| idx.iter().map(|&c| r[c].clone()).collect()).collect();
        if let Some(inv) = rat_inverse(&sub) {
            let z: Vec<Q> = inv.iter().map(|row| dot(row, &rhs)).collect();
            if z.iter().all(is_nonneg) {
                let mut out = vec![Q::zero(); cols];
                for (t, &c) in idx.iter().enumerate() {
                    out[c] = z[t].clone();
                }
                return Some(out);
            }
        }
        // next k-subset of 0..cols
        let mut t = k;
        loop {
            if t == 0 {
                return None;
            }
            t -= 1;
            if idx[t] < cols - k + t {
                idx[t] += 1;
                for u in t + 1..k {
                    idx[u] = idx[u - 1] + 1;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod feasibility_tests {
    use super::*;

    #[test]
    fn feasible_and_infeasible() {
        // z0 - z1 = 1, z ≥ 0: feasible
        assert!(nonneg_feasible(&[vec![q(1), q(-1)]], &[q(1)]).is_some());
        // z0 + z1 = -1: infeasible
        assert!(nonneg_feasible(&[vec![q(1), q(1)]], &[q(-1)]).is_none());
    }
}
