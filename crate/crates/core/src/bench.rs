//! Encoder timing: code encoders plus one fold, against a dense generator
//! multiplication `G_c b` plus the same fold.

use std::hint::black_box;
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix;
use crate::shaping::{Message, VoronoiCodeSpec};

const ROUNDS: usize = 7;

/// Median nanoseconds per encoded message for each stage.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    /// Level code encoders only.
    pub code_ns: f64,
    /// Full coset representative: encoders plus the weighted sum.
    pub representative_ns: f64,
    /// Dense `G_c b`.
    pub dense_ns: f64,
    /// Fold of a coset representative into the Voronoi region.
    pub fold_ns: f64,
    /// Both paths gave the same point for every message.
    pub outputs_match: bool,
}

impl BenchRow {
    /// Share of the representative cost spent in the code encoders.
    pub fn code_share(&self) -> f64 {
        self.code_ns / self.representative_ns
    }

    pub fn dense_over_representative(&self) -> f64 {
        self.dense_ns / self.representative_ns
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn time_per_op(ops: usize, mut f: impl FnMut()) -> f64 {
    let samples = (0..ROUNDS)
        .map(|_| {
            let t = Instant::now();
            f();
            t.elapsed().as_nanos() as f64 / ops as f64
        })
        .collect();
    median(samples)
}

/// Times both encoders on `trials` random messages.
///
/// The dense path receives `b = G_c^{-1} x` precomputed, where `x` is the
/// coset representative of the message and `G_c` the triangular basis of the
/// coding lattice; arithmetic is modulo `2^64`, exact because every `x` fits.
pub fn complexity_bench(spec: &VoronoiCodeSpec, trials: usize, seed: u64) -> Result<BenchRow> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let n = spec.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let msgs: Vec<Message> = (0..trials).map(|_| spec.random_message(&mut rng)).collect();
    let mut code = vec![0u64; n];
    let reps: Vec<Vec<i64>> = msgs
        .iter()
        .map(|m| {
            let mut x = vec![0; n];
            spec.coset_representative_into(m, &mut code, &mut x);
            x
        })
        .collect();

    let gc = spec.coding_lattice().triangular();
    let dense: Vec<i64> = (0..n * n).map(|k| wrap(gc.get(k / n, k % n))).collect();
    let coeffs: Vec<Vec<i64>> = reps
        .iter()
        .map(|x| {
            let v: Vec<BigInt> = x.iter().map(|&t| BigInt::from(t)).collect();
            matrix::solve_lower_integral(gc, &v)
                .map(|b| b.iter().map(wrap).collect())
                .ok_or_else(|| Error::Internal("coset representative outside the coding lattice".into()))
        })
        .collect::<Result<_>>()?;

    let mut out = vec![0i64; n];
    let code_ns = time_per_op(trials, || {
        for m in &msgs {
            for (c, u) in spec.chain().codes().iter().zip(&m.u) {
                c.encode_into(u, &mut code);
                black_box(&code);
            }
        }
    });
    let representative_ns = time_per_op(trials, || {
        for m in &msgs {
            spec.coset_representative_into(m, &mut code, &mut out);
            black_box(&out);
        }
    });
    let dense_ns = time_per_op(trials, || {
        for b in &coeffs {
            dense_mul(&dense, b, &mut out);
            black_box(&out);
        }
    });
    let fold_ns = time_per_op(trials, || {
        for x in &reps {
            black_box(spec.fold(x));
        }
    });

    let outputs_match = reps.iter().zip(&coeffs).all(|(x, b)| {
        dense_mul(&dense, b, &mut out);
        out == *x && spec.fold(&out) == spec.fold(x)
    });
    Ok(BenchRow { n, code_ns, representative_ns, dense_ns, fold_ns, outputs_match })
}

fn wrap(v: &BigInt) -> i64 {
    let m: BigInt = v & BigInt::from(u64::MAX);
    m.to_u64().expect("masked to 64 bits") as i64
}

fn dense_mul(g: &[i64], b: &[i64], out: &mut [i64]) {
    let n = b.len();
    for (i, o) in out.iter_mut().enumerate() {
        let row = &g[i * n..(i + 1) * n];
        *o = row.iter().zip(b).fold(0i64, |acc, (&gij, &bj)| acc.wrapping_add(gij.wrapping_mul(bj)));
    }
}

/// [`complexity_bench`] on `copies`-fold replications of `spec`.
pub fn complexity_sweep(spec: &VoronoiCodeSpec, copies: &[usize], trials: usize, seed: u64) -> Result<Vec<BenchRow>> {
    copies.iter().map(|&c| complexity_bench(&spec.replicated(c)?, trials, seed)).collect()
}
