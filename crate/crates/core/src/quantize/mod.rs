//! Closest-point quantization, the mod-lattice fold and the mod-parallelotope
//! reduction.
//!
//! Every quantizer follows one tie rule: among lattice points whose squared
//! distance to the input is within [`TIE_TOL`] of the minimum, the
//! lexicographically smallest is returned. The rule is translation
//! invariant, so `Q(y + l) = Q(y) + l` and the fold `x - Q(x)` is idempotent.

mod sphere;
mod structured;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{self, Lattice, Structure};
use crate::matrix::IntMatrix;

pub use sphere::{SphereDecoder, TIE_TOL};

/// Squared covering radius of `sqrt(8) Leech` (2 for the unimodular scaling).
const LEECH_INT_COVERING2: f64 = 16.0;

/// Which algorithm a [`Quantizer`] runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    ExactEnumeration,
    Zn,
    Dn,
    E8Fast,
    LeechEnum,
    DirectSumBlockwise,
    Scaled,
}

#[derive(Clone, Debug)]
enum Kind {
    Exact(SphereDecoder),
    Zn,
    Dn(Vec<Vec<i64>>),
    E8(Vec<Vec<i64>>),
    Leech(SphereDecoder),
    DirectSum { inner: Box<Quantizer> },
    Scaled { inner: Box<Quantizer>, alpha: u64 },
}

/// Nearest-point map `Q` of an integer lattice.
#[derive(Clone, Debug)]
pub struct Quantizer {
    lattice: Lattice,
    kind: Kind,
}

impl Quantizer {
    /// Generic sphere-decoding quantizer for any lattice.
    pub fn exact(lattice: &Lattice) -> Result<Self> {
        Ok(Quantizer { lattice: lattice.clone(), kind: Kind::Exact(SphereDecoder::new(lattice)?) })
    }

    /// Picks the fastest available method from the lattice's structure.
    pub fn for_lattice(lattice: &Lattice) -> Result<Self> {
        let kind = match lattice.structure() {
            Structure::Cubic => Kind::Zn,
            Structure::Checkerboard => Kind::Dn(structured::relevant_dn(lattice.dim())),
            Structure::E8Int => Kind::E8(structured::relevant_e8_int()),
            Structure::LeechInt => Kind::Leech(SphereDecoder::new(lattice)?.with_covering_radius2(LEECH_INT_COVERING2)),
            Structure::Scaled { inner, factor } => {
                return Ok(Quantizer::scaled(Quantizer::for_lattice(inner)?, *factor));
            }
            Structure::DirectSum { block, copies } => {
                return Ok(Quantizer::direct_sum(Quantizer::for_lattice(block)?, *copies));
            }
            Structure::Generic => return Quantizer::exact(lattice),
        };
        Ok(Quantizer { lattice: lattice.clone(), kind })
    }

    /// Quantizer for `alpha * inner.lattice()`.
    pub fn scaled(inner: Quantizer, alpha: u64) -> Self {
        assert!(alpha >= 1);
        if alpha == 1 {
            return inner;
        }
        let lattice = inner.lattice.scaled(alpha);
        Quantizer { lattice, kind: Kind::Scaled { inner: Box::new(inner), alpha } }
    }

    /// Blockwise quantizer for the direct sum of `copies` copies.
    pub fn direct_sum(inner: Quantizer, copies: usize) -> Self {
        assert!(copies >= 1);
        if copies == 1 {
            return inner;
        }
        let lattice = lattice::direct_sum(&inner.lattice, copies, 1).expect("copies >= 1");
        Quantizer { lattice, kind: Kind::DirectSum { inner: Box::new(inner) } }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    pub fn method(&self) -> Method {
        match self.kind {
            Kind::Exact(_) => Method::ExactEnumeration,
            Kind::Zn => Method::Zn,
            Kind::Dn(_) => Method::Dn,
            Kind::E8(_) => Method::E8Fast,
            Kind::Leech(_) => Method::LeechEnum,
            Kind::DirectSum { .. } => Method::DirectSumBlockwise,
            Kind::Scaled { .. } => Method::Scaled,
        }
    }

    /// Nearest lattice point to `y`, written into `out`.
    ///
    /// Panics if the lengths do not match the lattice dimension.
    pub fn quantize_into(&self, y: &[f64], out: &mut [i64]) {
        assert_eq!(y.len(), self.dim(), "input dimension");
        assert_eq!(out.len(), self.dim(), "output dimension");
        match &self.kind {
            Kind::Exact(dec) | Kind::Leech(dec) => out.copy_from_slice(&dec.closest(y)),
            Kind::Zn => structured::zn(y, out),
            Kind::Dn(rel) => {
                structured::dn(y, out);
                structured::tie_walk(y, out, rel);
            }
            Kind::E8(rel) => {
                structured::e8_int(y, out);
                structured::tie_walk(y, out, rel);
            }
            Kind::DirectSum { inner } => {
                let m = inner.dim();
                for (yb, ob) in y.chunks(m).zip(out.chunks_mut(m)) {
                    inner.quantize_into(yb, ob);
                }
            }
            Kind::Scaled { inner, alpha } => {
                let a = *alpha as f64;
                let ys: Vec<f64> = y.iter().map(|v| v / a).collect();
                inner.quantize_into(&ys, out);
                for o in out.iter_mut() {
                    *o *= *alpha as i64;
                }
            }
        }
    }

    pub fn quantize(&self, y: &[f64]) -> Vec<i64> {
        let mut out = vec![0; self.dim()];
        self.quantize_into(y, &mut out);
        out
    }

    /// Quantizes an integer point.
    pub fn quantize_int(&self, x: &[i64]) -> Vec<i64> {
        let y: Vec<f64> = x.iter().map(|&v| v as f64).collect();
        self.quantize(&y)
    }
}

/// `Q(y)`: the nearest lattice point under the tie rule.
pub fn quantize(q: &Quantizer, y: &[f64]) -> Vec<i64> {
    q.quantize(y)
}

/// `Q_{alpha L}(y) = alpha * Q_L(y / alpha)` for a real `alpha > 0`.
pub fn quantize_scaled(inner: &Quantizer, alpha: f64, y: &[f64]) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("scale must be positive, got {alpha}")));
    }
    let ys: Vec<f64> = y.iter().map(|v| v / alpha).collect();
    Ok(inner.quantize(&ys).into_iter().map(|v| alpha * v as f64).collect())
}

/// Blockwise quantization on the direct sum of `copies` copies of `inner`.
pub fn quantize_direct_sum(inner: &Quantizer, copies: usize, y: &[f64]) -> Result<Vec<i64>> {
    let m = inner.dim();
    if y.len() != m * copies {
        return Err(Error::DimensionMismatch { expected: m * copies, found: y.len() });
    }
    let mut out = vec![0; y.len()];
    for (yb, ob) in y.chunks(m).zip(out.chunks_mut(m)) {
        inner.quantize_into(yb, ob);
    }
    Ok(out)
}

/// `x - Q(x)`, the representative of `x + L` in the Voronoi region.
pub fn fold_mod_lattice(q: &Quantizer, x: &[f64]) -> Vec<f64> {
    let p = q.quantize(x);
    x.iter().zip(&p).map(|(&a, &b)| a - b as f64).collect()
}

/// Integer version of [`fold_mod_lattice`].
pub fn fold_mod_lattice_int(q: &Quantizer, x: &[i64]) -> Vec<i64> {
    let p = q.quantize_int(x);
    x.iter().zip(&p).map(|(&a, &b)| a - b).collect()
}

/// Lower-triangular basis prepared for repeated box reductions.
#[derive(Clone, Debug)]
pub struct Parallelotope {
    diag: Vec<i64>,
    /// Below-diagonal nonzeros of each column as `(row, value)`.
    below: Vec<Vec<(usize, i64)>>,
}

impl Parallelotope {
    pub fn new(l: &IntMatrix) -> Result<Self> {
        if !l.is_square() {
            return Err(Error::NotSquare { rows: l.rows(), cols: l.cols() });
        }
        if !l.is_lower_triangular() {
            return Err(Error::InvalidParameter("basis must be lower triangular".into()));
        }
        let rows = l.to_i64_rows().ok_or_else(|| Error::BoundExceeded("basis entries exceed 64 bits".into()))?;
        let n = rows.len();
        let diag: Vec<i64> = (0..n).map(|i| rows[i][i]).collect();
        if diag.iter().any(|&d| d <= 0) {
            return Err(Error::InvalidParameter("diagonal must be positive".into()));
        }
        let below = (0..n).map(|j| ((j + 1)..n).filter(|&i| rows[i][j] != 0).map(|i| (i, rows[i][j])).collect()).collect();
        Ok(Parallelotope { diag, below })
    }

    pub fn diagonal(&self) -> &[i64] {
        &self.diag
    }

    /// Reduces `r` in place so that `0 <= r_i < l_ii`, staying in `r + L`.
    pub fn reduce(&self, r: &mut [i64]) {
        for i in 0..self.diag.len() {
            let f = r[i].div_euclid(self.diag[i]);
            if f != 0 {
                r[i] -= f * self.diag[i];
                for &(row, v) in &self.below[i] {
                    r[row] -= f * v;
                }
            }
        }
    }
}

/// Representative of `r` modulo the lattice of `l` inside the box
/// `0 <= r_i < l_ii`, by a row sweep.
pub fn fold_mod_parallelotope(l: &IntMatrix, r: &[i64]) -> Result<Vec<i64>> {
    let p = Parallelotope::new(l)?;
    if r.len() != p.diag.len() {
        return Err(Error::DimensionMismatch { expected: p.diag.len(), found: r.len() });
    }
    let mut out = r.to_vec();
    p.reduce(&mut out);
    Ok(out)
}

/// Normalized second moment estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SecondMoment {
    pub nsm: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl SecondMoment {
    /// Shaping gain over the cube, `10 log10((1/12) / G)`.
    pub fn gain_db(&self) -> f64 {
        10.0 * ((1.0 / 12.0) / self.nsm).log10()
    }

    pub fn gain_stderr_db(&self) -> f64 {
        10.0 / std::f64::consts::LN_10 * self.stderr / self.nsm
    }
}

const MC_CHUNK: usize = 4096;

/// Monte Carlo estimate of `G = E|e|^2 / (n vol^(2/n))` where `e` is the
/// fold of a uniform point of the fundamental parallelotope.
///
/// Chunk `c` draws from stream `c` of a ChaCha generator keyed by `seed`,
/// so the result does not depend on the thread count.
pub fn second_moment_mc(q: &Quantizer, samples: usize, seed: u64) -> Result<SecondMoment> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be >= 1".into()));
    }
    let n = q.dim();
    let t = q.lattice().triangular().to_f64_rows();
    let chunks = samples.div_ceil(MC_CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = MC_CHUNK.min(samples - c * MC_CHUNK);
            let mut u = vec![0f64; n];
            let mut y = vec![0f64; n];
            let mut x = vec![0i64; n];
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                u.iter_mut().for_each(|v| *v = rng.gen::<f64>());
                for i in 0..n {
                    y[i] = (0..=i).map(|j| t[i][j] * u[j]).sum();
                }
                q.quantize_into(&y, &mut x);
                let e2: f64 = y.iter().zip(&x).map(|(&a, &b)| (a - b as f64).powi(2)).sum();
                s1 += e2;
                s2 += e2 * e2;
            }
            (s1, s2)
        })
        .collect();
    let (s1, s2) = partial.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    let nf = samples as f64;
    let mean = s1 / nf;
    let var = if samples > 1 { ((s2 / nf - mean * mean) * nf / (nf - 1.0)).max(0.0) } else { 0.0 };
    let norm = n as f64 * volume_power(q.lattice().volume(), 2.0 / n as f64);
    Ok(SecondMoment { nsm: mean / norm, stderr: (var / nf).sqrt() / norm, samples })
}

/// `vol^p` without overflowing for huge volumes.
fn volume_power(vol: &BigInt, p: f64) -> f64 {
    match vol.to_f64() {
        Some(v) if v.is_finite() => v.powf(p),
        _ => (lattice::log2_big(vol) * p).exp2(),
    }
}

/// Nonzero vectors of squared norm at most `max_norm2`.
pub fn short_vectors(lattice: &Lattice, max_norm2: f64) -> Result<Vec<Vec<i64>>> {
    Ok(SphereDecoder::new(lattice)?.short_vectors(max_norm2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::standard_lattice;

    fn q(name: &str) -> Quantizer {
        Quantizer::for_lattice(&standard_lattice(name).unwrap()).unwrap()
    }

    #[test]
    fn zn_rounds_per_coordinate() {
        assert_eq!(quantize(&q("Zn(2)"), &[0.4, -1.2]), vec![0, -1]);
    }

    #[test]
    fn lattice_points_are_fixed() {
        for name in ["Zn(3)", "Dn(5)", "E8_int", "Leech_int"] {
            let quant = q(name);
            let g = quant.lattice().generator().to_i64_rows().unwrap();
            let n = quant.dim();
            let x: Vec<i64> = (0..n).map(|i| (0..n).map(|j| g[i][j] * ((j as i64 % 3) - 1)).sum()).collect();
            assert_eq!(quant.quantize_int(&x), x, "{name}");
        }
    }

    #[test]
    fn scaled_composition() {
        let z2 = q("Zn(2)");
        assert_eq!(quantize_scaled(&z2, 4.0, &[3.0, 3.0]).unwrap(), vec![4.0, 4.0]);
        let e8 = q("E8_int");
        assert_eq!(quantize_scaled(&e8, 2.0, &[0.0; 8]).unwrap(), vec![0.0; 8]);
        assert!(quantize_scaled(&z2, 0.0, &[1.0, 1.0]).is_err());
        let s = Quantizer::scaled(z2, 4);
        assert_eq!(s.quantize(&[3.0, 3.0]), vec![4, 4]);
        assert_eq!(s.method(), Method::Scaled);
    }

    #[test]
    fn direct_sum_blockwise() {
        let z2 = q("Zn(2)");
        assert_eq!(quantize_direct_sum(&z2, 2, &[0.4, -1.2, 2.6, 0.0]).unwrap(), vec![0, -1, 3, 0]);
        assert!(matches!(quantize_direct_sum(&z2, 2, &[0.0; 3]), Err(Error::DimensionMismatch { .. })));
        let single = Quantizer::direct_sum(q("Zn(2)"), 1);
        assert_eq!(single.method(), Method::Zn);
    }

    #[test]
    fn fold_examples() {
        let s = Quantizer::scaled(q("Zn(2)"), 4);
        assert_eq!(fold_mod_lattice(&s, &[3.0, 3.0]), vec![-1.0, -1.0]);
        assert_eq!(fold_mod_lattice(&s, &[0.0, 0.0]), vec![0.0, 0.0]);
        assert_eq!(fold_mod_lattice_int(&s, &[3, 3]), vec![-1, -1]);
    }

    #[test]
    fn parallelotope_examples() {
        let d = IntMatrix::diagonal(&[2, 2]);
        assert_eq!(fold_mod_parallelotope(&d, &[5, -1]).unwrap(), vec![1, 1]);
        let l = IntMatrix::from_rows(&[[1, 0], [1, 2]]);
        let r = fold_mod_parallelotope(&l, &[3, 4]).unwrap();
        assert_eq!(r, vec![0, 1]);
        let lat = Lattice::new(l.clone()).unwrap();
        assert!(lat.contains(&[3 - r[0], 4 - r[1]]));
        assert_eq!(fold_mod_parallelotope(&l, &[0, 1]).unwrap(), vec![0, 1]);
        let upper = IntMatrix::from_rows(&[[1, 1], [0, 2]]);
        assert!(fold_mod_parallelotope(&upper, &[0, 0]).is_err());
    }

    #[test]
    fn cube_second_moment_is_one_twelfth() {
        let m = second_moment_mc(&q("Zn(4)"), 20_000, 7).unwrap();
        assert!((m.nsm - 1.0 / 12.0).abs() < 4.0 * m.stderr, "{m:?}");
        assert!(m.gain_db().abs() < 4.0 * m.gain_stderr_db() + 1e-12);
    }

    #[test]
    fn second_moment_is_reproducible() {
        let a = second_moment_mc(&q("E8_int"), 10_000, 3).unwrap();
        let b = second_moment_mc(&q("E8_int"), 10_000, 3).unwrap();
        assert_eq!(a, b);
        assert!(second_moment_mc(&q("E8_int"), 0, 3).is_err());
    }

    #[test]
    fn method_dispatch() {
        assert_eq!(q("Zn(3)").method(), Method::Zn);
        assert_eq!(q("Dn(3)").method(), Method::Dn);
        assert_eq!(q("E8_int").method(), Method::E8Fast);
        assert_eq!(q("Leech_int").method(), Method::LeechEnum);
        let g = Lattice::new(IntMatrix::from_rows(&[[1, 0], [1, 2]])).unwrap();
        assert_eq!(Quantizer::for_lattice(&g).unwrap().method(), Method::ExactEnumeration);
    }
}
