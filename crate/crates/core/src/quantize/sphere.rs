//! Fincke-Pohst enumeration with Schnorr-Euchner ordering.

use crate::error::{Error, Result};
use crate::lattice::Lattice;

/// Squared-distance tolerance below which two candidates count as a tie.
pub const TIE_TOL: f64 = 1e-9;

/// Closest-point search over an LLL-reduced basis of an integer lattice.
#[derive(Clone, Debug)]
pub struct SphereDecoder {
    n: usize,
    /// Reduced basis, column-major: `basis[j]` is the j-th basis vector.
    basis: Vec<Vec<i64>>,
    /// Orthonormal Gram-Schmidt directions, `q[j]`.
    q: Vec<Vec<f64>>,
    /// Upper-triangular `R` with `basis[j] = sum_i r[i][j] q[i]`.
    r: Vec<Vec<f64>>,
    /// Squared covering radius, when known.
    covering2: Option<f64>,
}

impl SphereDecoder {
    pub fn new(lattice: &Lattice) -> Result<Self> {
        let rows = lattice
            .generator()
            .to_i64_rows()
            .ok_or_else(|| Error::BoundExceeded("generator entries exceed 64 bits".into()))?;
        let n = rows.len();
        let mut basis: Vec<Vec<i64>> = (0..n).map(|j| (0..n).map(|i| rows[i][j]).collect()).collect();
        lll_reduce(&mut basis, 0.99);
        let (q, r) = qr(&basis);
        Ok(SphereDecoder { n, basis, q, r, covering2: None })
    }

    /// Caps the initial search radius; every input lies within the
    /// covering radius of some lattice point.
    pub fn with_covering_radius2(mut self, covering2: f64) -> Self {
        self.covering2 = Some(covering2);
        self
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn point(&self, coeffs: &[i64], out: &mut [i64]) {
        out.iter_mut().for_each(|v| *v = 0);
        for (b, &c) in self.basis.iter().zip(coeffs) {
            if c != 0 {
                for (o, &bi) in out.iter_mut().zip(b) {
                    *o += c * bi;
                }
            }
        }
    }

    /// Visits lattice points with `|y - x|^2 <= radius2`. The callback gets
    /// each point and its squared distance and returns the radius to use from
    /// then on.
    pub fn search<F>(&self, y: &[f64], mut radius2: f64, mut visit: F)
    where
        F: FnMut(&[i64], f64) -> f64,
    {
        let n = self.n;
        if n == 0 {
            return;
        }
        // z = Q^T y
        let z: Vec<f64> = self.q.iter().map(|qi| qi.iter().zip(y).map(|(a, b)| a * b).sum()).collect();
        let mut coeffs = vec![0i64; n];
        let mut center = vec![0f64; n];
        let mut step = vec![0i64; n];
        let mut partial = vec![0f64; n + 1];
        let mut point = vec![0i64; n];
        // sig[i * (n + 1) + j] = z[i] - sum_{l >= j} r[i][l] c[l], for j > i.
        let w = n + 1;
        let mut sig = vec![0f64; n * w];
        for i in 0..n {
            sig[i * w + n] = z[i];
        }
        // stale[i]: highest level whose coefficient changed since row i of
        // `sig` was refreshed.
        let mut stale: Vec<usize> = vec![n - 1; n];
        // Slack for rounding in the partial sums.
        let slack = 1e-9 * (1.0 + radius2.abs());

        let r = &self.r;
        let mut enter = |k: usize, coeffs: &mut [i64], center: &mut [f64], step: &mut [i64], stale: &mut [usize]| {
            let h = stale[k];
            for j in ((k + 1)..=h).rev() {
                sig[k * w + j] = sig[k * w + j + 1] - r[k][j] * coeffs[j] as f64;
            }
            if k > 0 {
                stale[k - 1] = stale[k - 1].max(h);
            }
            stale[k] = k;
            center[k] = sig[k * w + k + 1] / r[k][k];
            coeffs[k] = center[k].round() as i64;
            step[k] = if center[k] >= coeffs[k] as f64 { 1 } else { -1 };
        };
        let next_sibling = |k: usize, coeffs: &mut [i64], step: &mut [i64], stale: &mut [usize]| {
            coeffs[k] += step[k];
            step[k] = -step[k] - step[k].signum();
            if k > 0 {
                stale[k - 1] = stale[k - 1].max(k);
            }
        };

        let mut k = n - 1;
        enter(k, &mut coeffs, &mut center, &mut step, &mut stale);
        loop {
            let diff = coeffs[k] as f64 - center[k];
            let d = partial[k + 1] + (r[k][k] * diff).powi(2);
            if d <= radius2 + slack {
                if k == 0 {
                    self.point(&coeffs, &mut point);
                    let dist: f64 = point.iter().zip(y).map(|(&p, &t)| (t - p as f64).powi(2)).sum();
                    if dist <= radius2 + slack {
                        radius2 = visit(&point, dist);
                    }
                    next_sibling(0, &mut coeffs, &mut step, &mut stale);
                } else {
                    partial[k] = d;
                    k -= 1;
                    enter(k, &mut coeffs, &mut center, &mut step, &mut stale);
                }
            } else {
                k += 1;
                if k == n {
                    break;
                }
                next_sibling(k, &mut coeffs, &mut step, &mut stale);
            }
        }
    }

    /// Babai round-off point: rounds the real coordinates in the reduced basis.
    pub fn round_off(&self, y: &[f64]) -> Vec<i64> {
        let n = self.n;
        let z: Vec<f64> = self.q.iter().map(|qi| qi.iter().zip(y).map(|(a, b)| a * b).sum()).collect();
        let mut u = vec![0f64; n];
        for k in (0..n).rev() {
            let mut acc = z[k];
            for j in (k + 1)..n {
                acc -= self.r[k][j] * u[j];
            }
            u[k] = acc / self.r[k][k];
        }
        let coeffs: Vec<i64> = u.iter().map(|v| v.round() as i64).collect();
        let mut out = vec![0; n];
        self.point(&coeffs, &mut out);
        out
    }

    /// Closest lattice point; ties within [`TIE_TOL`] go to the
    /// lexicographically smallest point.
    pub fn closest(&self, y: &[f64]) -> Vec<i64> {
        let mut best = self.round_off(y);
        let mut best_d = dist2(y, &best);
        let start = match self.covering2 {
            Some(c) if c < best_d => c * (1.0 + 1e-9) + TIE_TOL,
            _ => best_d + TIE_TOL,
        };
        self.search(y, start, |x, d| {
            if d < best_d - TIE_TOL || (d <= best_d + TIE_TOL && x < best.as_slice()) {
                best.copy_from_slice(x);
                best_d = best_d.min(d);
            }
            best_d + TIE_TOL
        });
        best
    }

    /// All nonzero lattice vectors of squared norm at most `max_norm2`.
    pub fn short_vectors(&self, max_norm2: f64) -> Vec<Vec<i64>> {
        let origin = vec![0.0; self.n];
        let mut out = Vec::new();
        self.search(&origin, max_norm2, |x, _| {
            if x.iter().any(|&v| v != 0) {
                out.push(x.to_vec());
            }
            max_norm2
        });
        out
    }
}

pub(crate) fn dist2(y: &[f64], x: &[i64]) -> f64 {
    y.iter().zip(x).map(|(&a, &b)| (a - b as f64).powi(2)).sum()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn gram_schmidt(basis: &[Vec<i64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<f64>) {
    let n = basis.len();
    let mut star: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut mu = vec![vec![0f64; n]; n];
    let mut norms = vec![0f64; n];
    for i in 0..n {
        let bi: Vec<f64> = basis[i].iter().map(|&v| v as f64).collect();
        let mut v = bi.clone();
        for j in 0..i {
            mu[i][j] = dot(&bi, &star[j]) / norms[j];
            for (vk, sk) in v.iter_mut().zip(&star[j]) {
                *vk -= mu[i][j] * sk;
            }
        }
        norms[i] = dot(&v, &v);
        star.push(v);
    }
    (star, mu, norms)
}

/// Textbook LLL on integer column vectors.
fn lll_reduce(basis: &mut [Vec<i64>], delta: f64) {
    let n = basis.len();
    if n < 2 {
        return;
    }
    let (_, mut mu, mut norms) = gram_schmidt(basis);
    let mut k = 1;
    while k < n {
        for j in (0..k).rev() {
            let q = mu[k][j].round();
            if q != 0.0 {
                let qi = q as i64;
                let (lo, hi) = basis.split_at_mut(k);
                for (a, b) in hi[0].iter_mut().zip(&lo[j]) {
                    *a -= qi * b;
                }
                for i in 0..j {
                    mu[k][i] -= q * mu[j][i];
                }
                mu[k][j] -= q;
            }
        }
        if norms[k] >= (delta - mu[k][k - 1].powi(2)) * norms[k - 1] {
            k += 1;
        } else {
            basis.swap(k, k - 1);
            let gs = gram_schmidt(basis);
            mu = gs.1;
            norms = gs.2;
            k = (k - 1).max(1);
        }
    }
}

/// Thin QR of the column basis by modified Gram-Schmidt.
fn qr(basis: &[Vec<i64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = basis.len();
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut r = vec![vec![0f64; n]; n];
    for j in 0..n {
        let mut v: Vec<f64> = basis[j].iter().map(|&x| x as f64).collect();
        for i in 0..j {
            r[i][j] = dot(&q[i], &v);
            for (vk, qk) in v.iter_mut().zip(&q[i]) {
                *vk -= r[i][j] * qk;
            }
        }
        r[j][j] = dot(&v, &v).sqrt();
        let inv = 1.0 / r[j][j];
        q.push(v.iter().map(|x| x * inv).collect());
    }
    (q, r)
}
