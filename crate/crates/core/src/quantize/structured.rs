//! Fast decoders for `Z^n`, `D_n` and `2 E8`, and the tie walk that makes
//! them agree with the lexicographic tie rule.

use super::sphere::TIE_TOL;

/// Nearest integer; a tie goes to the smaller integer.
#[inline]
pub(crate) fn round_half_down(y: f64) -> i64 {
    let f = y.floor();
    if y - f <= 0.5 + TIE_TOL / 2.0 {
        f as i64
    } else {
        f as i64 + 1
    }
}

pub(crate) fn zn(y: &[f64], out: &mut [i64]) {
    for (o, &v) in out.iter_mut().zip(y) {
        *o = round_half_down(v);
    }
}

/// Conway-Sloane `D_n` decoder: round, and if the coordinate sum is odd
/// re-round the worst coordinate the other way.
pub(crate) fn dn(y: &[f64], out: &mut [i64]) {
    zn(y, out);
    let sum: i64 = out.iter().sum();
    if sum.rem_euclid(2) == 0 {
        return;
    }
    let mut worst = 0;
    let mut worst_err = -1.0;
    for (i, (&v, &o)) in y.iter().zip(out.iter()).enumerate() {
        let err = (v - o as f64).abs();
        if err > worst_err {
            worst_err = err;
            worst = i;
        }
    }
    let delta = y[worst] - out[worst] as f64;
    out[worst] += if delta > 0.0 { 1 } else { -1 };
}

/// Nearest point of `2 E8 = 2 D8 u (2 D8 + 1)`.
pub(crate) fn e8_int(y: &[f64], out: &mut [i64]) {
    debug_assert_eq!(y.len(), 8);
    let mut half = [0f64; 8];
    let mut a = [0i64; 8];
    let mut b = [0i64; 8];
    for i in 0..8 {
        half[i] = y[i] / 2.0;
    }
    dn(&half, &mut a);
    for i in 0..8 {
        half[i] = y[i] / 2.0 - 0.5;
    }
    dn(&half, &mut b);
    let (mut da, mut db) = (0.0, 0.0);
    for i in 0..8 {
        a[i] *= 2;
        b[i] = 2 * b[i] + 1;
        da += (y[i] - a[i] as f64).powi(2);
        db += (y[i] - b[i] as f64).powi(2);
    }
    let pick_b = db < da - TIE_TOL || (db <= da + TIE_TOL && b < a);
    out.copy_from_slice(if pick_b { &b } else { &a });
}

/// Voronoi-relevant vectors of `Z^n`: `+-e_i`.
#[cfg(test)]
pub(crate) fn relevant_zn(n: usize) -> Vec<Vec<i64>> {
    let mut v = Vec::with_capacity(2 * n);
    for i in 0..n {
        for s in [-1, 1] {
            let mut e = vec![0; n];
            e[i] = s;
            v.push(e);
        }
    }
    v
}

/// Voronoi-relevant vectors of `D_n`: the roots `+-e_i +-e_j`.
pub(crate) fn relevant_dn(n: usize) -> Vec<Vec<i64>> {
    if n == 1 {
        return vec![vec![-2], vec![2]];
    }
    let mut v = Vec::with_capacity(2 * n * (n - 1));
    for i in 0..n {
        for j in (i + 1)..n {
            for (si, sj) in [(-1, -1), (-1, 1), (1, -1), (1, 1)] {
                let mut e = vec![0; n];
                e[i] = si;
                e[j] = sj;
                v.push(e);
            }
        }
    }
    v
}

/// Voronoi-relevant vectors of `2 E8`: twice the 240 roots of E8.
pub(crate) fn relevant_e8_int() -> Vec<Vec<i64>> {
    let mut v: Vec<Vec<i64>> = relevant_dn(8).into_iter().map(|r| r.into_iter().map(|x| 2 * x).collect()).collect();
    for mask in 0u32..256 {
        if mask.count_ones() % 2 == 0 {
            v.push((0..8).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect());
        }
    }
    v
}

/// Moves `p` to the lexicographically smallest nearest point by stepping
/// along Voronoi-relevant vectors. Tied nearest points are the vertices of a
/// Delaunay face whose edges are relevant vectors, so greedy descent in
/// lexicographic order ends at the minimum. A strictly closer neighbour is
/// also taken, so the result is always a nearest point.
pub(crate) fn tie_walk(y: &[f64], p: &mut [i64], relevant: &[Vec<i64>]) {
    let n = p.len();
    let mut err = vec![0f64; n];
    loop {
        for i in 0..n {
            err[i] = y[i] - p[i] as f64;
        }
        let mut improve: Option<(usize, f64)> = None;
        let mut tie: Option<usize> = None;
        for (idx, v) in relevant.iter().enumerate() {
            let mut norm = 0i64;
            let mut ip = 0f64;
            for i in 0..n {
                norm += v[i] * v[i];
                ip += err[i] * v[i] as f64;
            }
            // |y - p - v|^2 - |y - p|^2
            let delta = norm as f64 - 2.0 * ip;
            if delta < -TIE_TOL {
                if improve.is_none_or(|(_, d)| delta < d) {
                    improve = Some((idx, delta));
                }
            } else if delta <= TIE_TOL && is_negative(v) && tie.is_none_or(|t| v < &relevant[t]) {
                tie = Some(idx);
            }
        }
        match improve.map(|(idx, _)| idx).or(tie) {
            Some(idx) => {
                for (pi, vi) in p.iter_mut().zip(&relevant[idx]) {
                    *pi += vi;
                }
            }
            None => return,
        }
    }
}

/// Lexicographically below zero: the first nonzero entry is negative.
fn is_negative(v: &[i64]) -> bool {
    v.iter().find(|&&x| x != 0).is_some_and(|&x| x < 0)
}
