//! AWGN experiments: constellation energy, noisy transmission, decoding and
//! word-error-rate sweeps.
//!
//! Es/N0 is measured per two dimensions: `Es = 2 E` with `E` the average
//! energy per dimension and `N0 = 2 sigma^2`, so `sigma^2 = E / 10^(dB/10)`.
//! Sweeps transmit the constellation with its mean removed (the receiver
//! adds it back), so `E` there is the centered energy; error rates are
//! unaffected by the translation.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quantize::{SphereDecoder, TIE_TOL};
use crate::shaping::{Message, VoronoiCodeSpec};

/// Largest constellation decoded by exhaustive ML or averaged exactly.
pub const EXHAUSTIVE_MAX_POINTS: u64 = 1 << 20;
/// Exhaustive ML scans the list directly when `M n` is at most this.
const LINEAR_SCAN_WORK: u64 = 1 << 14;
/// Samples used when the constellation is too large to enumerate.
pub const ENERGY_SAMPLES: usize = 100_000;
/// Trials per deterministic batch of a WER point.
pub const BATCH: usize = 1000;
/// 97.5% standard normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Noise level and randomness of a transmission experiment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelConfig {
    pub sigma: f64,
    pub seed: u64,
    pub trials: usize,
}

impl ChannelConfig {
    pub fn new(sigma: f64, seed: u64, trials: usize) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
        }
        if trials == 0 {
            return Err(Error::InvalidParameter("trials must be >= 1".into()));
        }
        Ok(ChannelConfig { sigma, seed, trials })
    }

    /// Noise level for an Es/N0 (per two dimensions) and energy per dimension.
    pub fn sigma_for(es_n0_db: f64, energy_per_dim: f64) -> f64 {
        (energy_per_dim / 10f64.powf(es_n0_db / 10.0)).sqrt()
    }
}

/// Average energy per dimension with its standard error (zero when exact).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Energy {
    /// `E |x'|^2 / n`.
    pub per_dim: f64,
    /// `E |x' - mu|^2 / n` with `mu` the constellation mean.
    pub centered_per_dim: f64,
    pub stderr: f64,
    pub exact: bool,
}

/// Mean of `|x'|^2 / n` over the constellation: exact when `M <= 2^20`,
/// otherwise over [`ENERGY_SAMPLES`] uniform messages.
pub fn average_energy(spec: &VoronoiCodeSpec) -> Result<Energy> {
    match spec.message_count_u64() {
        Some(m) if m <= EXHAUSTIVE_MAX_POINTS => {
            let points = (0..m).into_par_iter().map(|i| spec.encode(&spec.message_from_index(i)).unwrap());
            let (sum, sq) = moments(spec.dim(), points);
            let (per_dim, centered_per_dim) = energies(&sum, sq, m as f64);
            Ok(Energy { per_dim, centered_per_dim, stderr: 0.0, exact: true })
        }
        _ => average_energy_sampled(spec, ENERGY_SAMPLES, 0),
    }
}

/// Energy per dimension averaged over `samples` uniform random messages.
pub fn average_energy_sampled(spec: &VoronoiCodeSpec, samples: usize, seed: u64) -> Result<Energy> {
    if samples < 2 {
        return Err(Error::InvalidParameter("need at least two samples".into()));
    }
    let n = spec.dim() as f64;
    let points = (0..samples).into_par_iter().map(|i| {
        let mut rng = trial_rng(seed, i as u64);
        spec.encode(&spec.random_message(&mut rng)).unwrap()
    });
    let (sum, sq) = moments(spec.dim(), points.clone());
    let k = samples as f64;
    let (per_dim, centered_per_dim) = energies(&sum, sq, k);
    let var = points.map(|x| (norm2(&x) / n - per_dim).powi(2)).sum::<f64>() / (k - 1.0);
    Ok(Energy { per_dim, centered_per_dim, stderr: (var / k).sqrt(), exact: false })
}

/// Coordinate sums and the total squared norm.
fn moments(n: usize, points: impl ParallelIterator<Item = Vec<i64>>) -> (Vec<f64>, f64) {
    points
        .fold(
            || (vec![0.0; n], 0.0),
            |(mut s, q), x| {
                s.iter_mut().zip(&x).for_each(|(a, &b)| *a += b as f64);
                (s, q + norm2(&x))
            },
        )
        .reduce(|| (vec![0.0; n], 0.0), |(mut a, qa), (b, qb)| {
            a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
            (a, qa + qb)
        })
}

fn energies(sum: &[f64], sq: f64, count: f64) -> (f64, f64) {
    let n = sum.len() as f64;
    let per_dim = sq / count / n;
    let mean2: f64 = sum.iter().map(|s| (s / count).powi(2)).sum::<f64>() / n;
    (per_dim, per_dim - mean2)
}

fn norm2(x: &[i64]) -> f64 {
    x.iter().map(|&v| (v * v) as f64).sum()
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// `y = x + sigma z` with `z` drawn from stream `trial` of the seed.
pub fn transmit(x: &[i64], cfg: &ChannelConfig, trial: u64) -> Vec<f64> {
    let mut rng = trial_rng(cfg.seed, trial);
    let z = gaussian(&mut rng, x.len());
    x.iter().zip(&z).map(|(&v, &e)| v as f64 + cfg.sigma * e).collect()
}

/// Decoder choice for [`decode_lattice`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecodeMode {
    /// Nearest constellation point.
    ExhaustiveMl,
    /// Level-by-level hard decisions followed by rounding and a fold.
    Multistage,
}

impl std::str::FromStr for DecodeMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive_ml" | "exhaustive-ml" | "ml" => Ok(DecodeMode::ExhaustiveMl),
            "multistage" => Ok(DecodeMode::Multistage),
            _ => Err(Error::UnknownName(s.to_string())),
        }
    }
}

impl std::fmt::Display for DecodeMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DecodeMode::ExhaustiveMl => "exhaustive_ml",
            DecodeMode::Multistage => "multistage",
        })
    }
}

/// Decoder bound to one spec.
#[derive(Clone, Debug)]
pub struct Decoder<'a> {
    spec: &'a VoronoiCodeSpec,
    mode: DecodeMode,
    coding: Option<SphereDecoder>,
    /// Whole constellation, kept when a linear scan is cheaper than a search.
    points: Option<Vec<Vec<i64>>>,
}

impl<'a> Decoder<'a> {
    pub fn new(spec: &'a VoronoiCodeSpec, mode: DecodeMode) -> Result<Self> {
        let mut points = None;
        let coding = match mode {
            DecodeMode::ExhaustiveMl => {
                if spec.message_count_u64().is_none_or(|m| m > EXHAUSTIVE_MAX_POINTS) {
                    return Err(Error::BoundExceeded(format!(
                        "exhaustive ML needs M <= 2^20, got {}",
                        spec.message_count()
                    )));
                }
                let m = spec.message_count_u64().unwrap_or(u64::MAX);
                if m.saturating_mul(spec.dim() as u64) <= LINEAR_SCAN_WORK {
                    points = Some(spec.constellation(m)?);
                }
                Some(SphereDecoder::new(spec.coding_lattice())?)
            }
            DecodeMode::Multistage => {
                if let Some(c) = spec.chain().codes().iter().find(|c| c.dim() > crate::codes::ML_MAX_K) {
                    return Err(Error::BoundExceeded(format!("multistage decoding needs k <= {}, got {}", crate::codes::ML_MAX_K, c.dim())));
                }
                None
            }
        };
        Ok(Decoder { spec, mode, coding, points })
    }

    pub fn mode(&self) -> DecodeMode {
        self.mode
    }

    pub fn decode(&self, y: &[f64]) -> Vec<i64> {
        if let Some(points) = &self.points {
            return nearest_listed(points, y);
        }
        let guess = self.multistage(y);
        match &self.coding {
            None => guess,
            Some(dec) => self.nearest_member(dec, y, guess),
        }
    }

    fn multistage(&self, y: &[f64]) -> Vec<i64> {
        let spec = self.spec;
        let q = spec.chain().q() as i64;
        let mut r = y.to_vec();
        let mut x = vec![0i64; y.len()];
        let mut w = 1i64;
        for code in spec.chain().codes() {
            // Cost of symbol v: squared distance to the nearest t ≡ v (mod q).
            let metric: Vec<Vec<f64>> = r
                .iter()
                .map(|&rj| {
                    let base = rj.floor() as i64;
                    (0..q)
                        .map(|v| {
                            let t = base + (v - base).rem_euclid(q);
                            let (a, b) = ((rj - t as f64).powi(2), (rj - (t - q) as f64).powi(2));
                            a.min(b)
                        })
                        .collect()
                })
                .collect();
            let c = code.ml_decode(&metric).expect("bound checked at construction");
            for ((rj, xj), &cj) in r.iter_mut().zip(x.iter_mut()).zip(&c) {
                *rj = (*rj - cj as f64) / q as f64;
                *xj += w * cj as i64;
            }
            w *= q;
        }
        for (xj, &rj) in x.iter_mut().zip(&r) {
            *xj += w * rj.round() as i64;
        }
        spec.fold(&x)
    }

    /// Closest constellation point, searching the coding lattice outward
    /// from the distance of a known member.
    fn nearest_member(&self, dec: &SphereDecoder, y: &[f64], start: Vec<i64>) -> Vec<i64> {
        let mut best = start;
        let mut best_d = dist2(y, &best);
        dec.search(y, best_d + TIE_TOL, |x, d| {
            if (d < best_d - TIE_TOL || (d <= best_d + TIE_TOL && x < best.as_slice())) && self.spec.fold(x) == x {
                best.copy_from_slice(x);
                best_d = best_d.min(d);
            }
            best_d + TIE_TOL
        });
        best
    }
}

/// Closest listed point; ties within `TIE_TOL` go to the lexicographic minimum.
fn nearest_listed(points: &[Vec<i64>], y: &[f64]) -> Vec<i64> {
    let mut best = &points[0];
    let mut best_d = dist2(y, best);
    for p in &points[1..] {
        let d = dist2(y, p);
        if d < best_d - TIE_TOL || (d <= best_d + TIE_TOL && p < best) {
            best = p;
            best_d = best_d.min(d);
        }
    }
    best.clone()
}

fn dist2(y: &[f64], x: &[i64]) -> f64 {
    y.iter().zip(x).map(|(&a, &b)| (a - b as f64).powi(2)).sum()
}

/// Decodes one received vector.
pub fn decode_lattice(spec: &VoronoiCodeSpec, y: &[f64], mode: DecodeMode) -> Result<Vec<i64>> {
    if y.len() != spec.dim() {
        return Err(Error::DimensionMismatch { expected: spec.dim(), found: y.len() });
    }
    Ok(Decoder::new(spec, mode)?.decode(y))
}

/// One point of a WER curve with its Wilson 95% interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WerPoint {
    pub es_n0_db: f64,
    pub wer: f64,
    pub errors: u64,
    pub trials: u64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Wilson score interval for `errors` out of `trials` at 95%.
pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if errors == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if errors == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Stopping rule and randomness of a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepConfig {
    pub seed: u64,
    /// Trial cap per point.
    pub max_trials: u64,
    /// A point stops after the batch in which this many errors are reached.
    pub max_errors: u64,
    pub mode: DecodeMode,
}

impl SweepConfig {
    pub fn new(seed: u64, max_trials: u64, mode: DecodeMode) -> Self {
        SweepConfig { seed, max_trials, max_errors: 200, mode }
    }
}

/// Simulates each Es/N0 point. Trial `t` draws its noise and then its message
/// from stream `t` of the seed, so specs swept with the same seed see the
/// same standard-normal noise, and results do not depend on thread count.
pub fn wer_sweep(spec: &VoronoiCodeSpec, es_n0_db: &[f64], cfg: &SweepConfig) -> Result<Vec<WerPoint>> {
    if es_n0_db.is_empty() {
        return Err(Error::InvalidParameter("empty Es/N0 list".into()));
    }
    if cfg.max_trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let energy = average_energy(spec)?.centered_per_dim;
    let decoder = Decoder::new(spec, cfg.mode)?;
    let n = spec.dim();
    es_n0_db
        .iter()
        .map(|&db| {
            let sigma = ChannelConfig::sigma_for(db, energy);
            let (mut errors, mut trials) = (0u64, 0u64);
            while trials < cfg.max_trials && errors < cfg.max_errors {
                let end = (trials + BATCH as u64).min(cfg.max_trials);
                errors += (trials..end)
                    .into_par_iter()
                    .filter(|&t| {
                        let mut rng = trial_rng(cfg.seed, t);
                        let z = gaussian(&mut rng, n);
                        let msg: Message = spec.random_message(&mut rng);
                        let x = spec.encode(&msg).unwrap();
                        let y: Vec<f64> = x.iter().zip(&z).map(|(&v, &e)| v as f64 + sigma * e).collect();
                        decoder.decode(&y) != x
                    })
                    .count() as u64;
                trials = end;
            }
            let (ci_low, ci_high) = wilson_interval(errors, trials);
            Ok(WerPoint { es_n0_db: db, wer: errors as f64 / trials as f64, errors, trials, ci_low, ci_high })
        })
        .collect()
}

/// Es/N0 where the curve crosses `target`, by linear interpolation of
/// `log10 WER` between the bracketing points.
pub fn crossing_db(points: &[WerPoint], target: f64) -> Option<f64> {
    points.windows(2).find_map(|w| {
        let (a, b) = (&w[0], &w[1]);
        if a.wer >= target && b.wer < target && b.wer > 0.0 {
            let (la, lb, lt) = (a.wer.log10(), b.wer.log10(), target.log10());
            Some(a.es_n0_db + (la - lt) / (la - lb) * (b.es_n0_db - a.es_n0_db))
        } else {
            None
        }
    })
}

/// Writes `#`-prefixed header lines and one CSV row per point.
pub fn write_csv<W: Write>(mut out: W, header: &[String], points: &[WerPoint]) -> std::io::Result<()> {
    for h in header {
        writeln!(out, "# {h}")?;
    }
    writeln!(out, "# sigma^2 = E / 10^(es_n0_db/10), E = mean-removed energy per dimension, Es = 2E, N0 = 2 sigma^2")?;
    writeln!(out, "es_n0_db,wer,errors,trials,ci_low,ci_high")?;
    for p in points {
        writeln!(out, "{},{:e},{},{},{:e},{:e}", p.es_n0_db, p.wer, p.errors, p.trials, p.ci_low, p.ci_high)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_search_agrees_with_linear_scan() {
        use rand::Rng;
        for name in ["rep2", "z2-skew"] {
            let spec = VoronoiCodeSpec::builtin(name).unwrap();
            let scan = Decoder::new(&spec, DecodeMode::ExhaustiveMl).unwrap();
            assert!(scan.points.is_some());
            let search = Decoder { points: None, ..scan.clone() };
            let mut rng = ChaCha8Rng::seed_from_u64(6);
            for _ in 0..2000 {
                let y: Vec<f64> = (0..2).map(|_| rng.gen_range(-6.0..6.0)).collect();
                assert_eq!(scan.decode(&y), search.decode(&y), "{name} {y:?}");
            }
            // Exact ties: half-integer grid.
            for a in -8..8 {
                for b in -8..8 {
                    let y = [a as f64 / 2.0, b as f64 / 2.0];
                    assert_eq!(scan.decode(&y), search.decode(&y), "{name} {y:?}");
                }
            }
        }
    }

    #[test]
    fn one_dim_pam_energy() {
        let spec = VoronoiCodeSpec::new(
            crate::codes::CodeChain::empty(2, 1).unwrap(),
            crate::lattice::standard_lattice("Zn(1)").unwrap(),
            4,
            1,
        )
        .unwrap();
        let e = average_energy(&spec).unwrap();
        assert!(e.exact);
        assert_eq!(e.per_dim, 1.5);
        assert_eq!(e.centered_per_dim, 1.25);
    }

    #[test]
    fn trivial_constellation_has_zero_energy() {
        let spec = VoronoiCodeSpec::new(
            crate::codes::CodeChain::empty(2, 2).unwrap(),
            crate::lattice::standard_lattice("Zn(2)").unwrap(),
            1,
            1,
        )
        .unwrap();
        assert_eq!(average_energy(&spec).unwrap().per_dim, 0.0);
    }

    #[test]
    fn noiseless_decoding_is_exact() {
        let spec = VoronoiCodeSpec::builtin("desk-e8").unwrap();
        for mode in [DecodeMode::ExhaustiveMl, DecodeMode::Multistage] {
            let dec = Decoder::new(&spec, mode).unwrap();
            for i in (0..65536).step_by(257) {
                let x = spec.encode(&spec.message_from_index(i)).unwrap();
                let y: Vec<f64> = x.iter().map(|&v| v as f64).collect();
                assert_eq!(dec.decode(&y), x, "{mode}");
            }
        }
    }

    #[test]
    fn wilson_examples() {
        let (lo, hi) = wilson_interval(0, 100);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.0370).abs() < 1e-3);
        let (lo, hi) = wilson_interval(50, 100);
        assert!((lo - 0.4038).abs() < 1e-3 && (hi - 0.5962).abs() < 1e-3);
    }

    #[test]
    fn crossing_interpolates_in_log_domain() {
        let p = |db, wer| WerPoint { es_n0_db: db, wer, errors: 0, trials: 0, ci_low: 0.0, ci_high: 0.0 };
        let pts = [p(0.0, 1e-2), p(1.0, 1e-4)];
        assert!((crossing_db(&pts, 1e-3).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(crossing_db(&pts, 1e-1), None);
    }
}
