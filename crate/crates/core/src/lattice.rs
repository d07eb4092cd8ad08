//! Integer lattices, nesting tests and the standard lattices used for shaping.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::matrix::{self, IntMatrix};

/// How a lattice was built. Quantizers use this to pick a fast decoder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Structure {
    Generic,
    /// `Z^n`.
    Cubic,
    /// `D_n`, integer vectors with even coordinate sum.
    Checkerboard,
    /// `2 * E8` in the even coordinate system.
    E8Int,
    /// `sqrt(8) * Leech` in the standard integer coordinates.
    LeechInt,
    Scaled { inner: Box<Lattice>, factor: u64 },
    DirectSum { block: Box<Lattice>, copies: usize },
}

/// A full-rank integer lattice `{ G b : b in Z^n }`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lattice {
    generator: IntMatrix,
    triangular: IntMatrix,
    volume: BigInt,
    structure: Structure,
}

impl Lattice {
    /// Lattice spanned by the columns of a square nonsingular integer matrix.
    pub fn new(generator: IntMatrix) -> Result<Self> {
        let triangular = matrix::hnf_lower_triangular(&generator)?;
        let volume = product(&triangular.diagonal_entries());
        Ok(Lattice { generator, triangular, volume, structure: Structure::Generic })
    }

    fn with_structure(generator: IntMatrix, structure: Structure) -> Result<Self> {
        let mut l = Self::new(generator)?;
        l.structure = structure;
        Ok(l)
    }

    /// `K Z^n` for a diagonal scale.
    pub fn from_diagonal(k: &DiagonalScale) -> Self {
        let m = IntMatrix::diagonal(&k.entries().iter().map(|&v| v as i64).collect::<Vec<_>>());
        let volume = k.entries().iter().map(|&v| BigInt::from(v)).product();
        Lattice { generator: m.clone(), triangular: m, volume, structure: Structure::Generic }
    }

    /// Lattice given directly by a lower HNF basis, e.g. from a modular HNF.
    pub(crate) fn from_triangular(triangular: IntMatrix) -> Self {
        debug_assert!(triangular.is_lower_triangular());
        let volume = product(&triangular.diagonal_entries());
        Lattice { generator: triangular.clone(), triangular, volume, structure: Structure::Generic }
    }

    pub fn dim(&self) -> usize {
        self.generator.rows()
    }

    pub fn generator(&self) -> &IntMatrix {
        &self.generator
    }

    /// Lower-triangular HNF basis with positive diagonal.
    pub fn triangular(&self) -> &IntMatrix {
        &self.triangular
    }

    /// `|det G|`, the volume of a fundamental region.
    pub fn volume(&self) -> &BigInt {
        &self.volume
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    /// `k * self`.
    pub fn scaled(&self, k: u64) -> Lattice {
        assert!(k >= 1, "scale must be positive");
        if k == 1 {
            return self.clone();
        }
        let kb = BigInt::from(k);
        let (inner, factor) = match &self.structure {
            Structure::Scaled { inner, factor } => (inner.clone(), factor * k),
            _ => (Box::new(self.clone()), k),
        };
        Lattice {
            generator: self.generator.scaled(&kb),
            triangular: self.triangular.scaled(&kb),
            volume: &self.volume * kb.pow(self.dim() as u32),
            structure: Structure::Scaled { inner, factor },
        }
    }

    /// Contains the integer vector `v`.
    pub fn contains(&self, v: &[i64]) -> bool {
        let v: Vec<BigInt> = v.iter().map(|&x| BigInt::from(x)).collect();
        matrix::solve_lower_integral(&self.triangular, &v).is_some()
    }

    /// Triangular basis as machine integers, if it fits.
    pub fn triangular_i64(&self) -> Option<Vec<Vec<i64>>> {
        self.triangular.to_i64_rows()
    }

    /// Checks that the generator and triangular bases span the same lattice.
    pub fn bases_agree(&self) -> bool {
        let g_in_t = (0..self.dim()).all(|j| matrix::solve_lower_integral(&self.triangular, &self.generator.column(j)).is_some());
        let dg = matrix::det(&self.generator).map(|d| d.abs()).unwrap_or_default();
        let t = &self.triangular;
        let positive = t.diagonal_entries().iter().all(|v| v.is_positive());
        g_in_t && positive && t.is_lower_triangular() && dg == self.volume
    }
}

fn product(v: &[BigInt]) -> BigInt {
    v.iter().fold(BigInt::one(), |acc, x| acc * x).abs()
}

/// Diagonal matrix `K` with positive integer entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagonalScale {
    k: Vec<u64>,
}

impl DiagonalScale {
    pub fn new(k: Vec<u64>) -> Result<Self> {
        if k.contains(&0) {
            return Err(Error::InvalidParameter("diagonal scale entries must be >= 1".into()));
        }
        Ok(DiagonalScale { k })
    }

    pub fn uniform(n: usize, k: u64) -> Result<Self> {
        Self::new(vec![k; n])
    }

    pub fn entries(&self) -> &[u64] {
        &self.k
    }

    pub fn dim(&self) -> usize {
        self.k.len()
    }
}

/// Whether `sub` is a sublattice of `sup`, by exact integral solve.
pub fn is_sublattice(sub: &Lattice, sup: &Lattice) -> Result<bool> {
    if sub.dim() != sup.dim() {
        return Err(Error::DimensionMismatch { expected: sup.dim(), found: sub.dim() });
    }
    // Any basis of `sub` works; the triangular one is usually sparser.
    let t = sub.triangular();
    Ok((0..sub.dim()).all(|j| matrix::solve_lower_integral(sup.triangular(), &t.column(j)).is_some()))
}

/// `|coding / shaping| = vol(shaping) / vol(coding)`.
pub fn quotient_order(coding: &Lattice, shaping: &Lattice) -> Result<BigInt> {
    if !is_sublattice(shaping, coding)? {
        return Err(Error::NotNested("shaping lattice is not a sublattice of the coding lattice".into()));
    }
    let (q, r) = shaping.volume().div_rem(coding.volume());
    if !r.is_zero() {
        return Err(Error::NotNested("volume ratio is not an integer".into()));
    }
    Ok(q)
}

/// Block-diagonal direct sum of `copies` copies of `alpha * base`.
pub fn direct_sum(base: &Lattice, copies: usize, alpha: u64) -> Result<Lattice> {
    if copies == 0 {
        return Err(Error::InvalidParameter("direct sum needs at least one copy".into()));
    }
    if alpha == 0 {
        return Err(Error::InvalidParameter("alpha must be a positive integer".into()));
    }
    let block = base.scaled(alpha);
    if copies == 1 {
        return Ok(block);
    }
    let gens: Vec<&IntMatrix> = std::iter::repeat_n(block.generator(), copies).collect();
    let tris: Vec<&IntMatrix> = std::iter::repeat_n(block.triangular(), copies).collect();
    Ok(Lattice {
        generator: IntMatrix::block_diagonal(&gens),
        triangular: IntMatrix::block_diagonal(&tris),
        volume: block.volume().pow(copies as u32),
        structure: Structure::DirectSum { block: Box::new(block), copies },
    })
}

/// Names accepted by [`standard_lattice`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StandardLattice {
    Zn(usize),
    Dn(usize),
    E8Int,
    LeechInt,
}

impl FromStr for StandardLattice {
    type Err = Error;

    /// Accepts `Zn(3)`, `Z3`, `Dn(4)`, `D4`, `E8_int`, `Leech_int`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let lower = t.to_ascii_lowercase();
        let unknown = || Error::UnknownName(t.to_string());
        let dim = |rest: &str| -> Result<usize> {
            let rest = rest.strip_prefix('(').and_then(|r| r.strip_suffix(')')).unwrap_or(rest);
            let n: usize = rest.parse().map_err(|_| unknown())?;
            if n == 0 {
                return Err(unknown());
            }
            Ok(n)
        };
        match lower.as_str() {
            "e8_int" | "e8int" => Ok(StandardLattice::E8Int),
            "leech_int" | "leechint" => Ok(StandardLattice::LeechInt),
            _ => {
                if let Some(rest) = lower.strip_prefix("zn").or_else(|| lower.strip_prefix('z')) {
                    Ok(StandardLattice::Zn(dim(rest)?))
                } else if let Some(rest) = lower.strip_prefix("dn").or_else(|| lower.strip_prefix('d')) {
                    Ok(StandardLattice::Dn(dim(rest)?))
                } else {
                    Err(unknown())
                }
            }
        }
    }
}

impl fmt::Display for StandardLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StandardLattice::Zn(n) => write!(f, "Zn({n})"),
            StandardLattice::Dn(n) => write!(f, "Dn({n})"),
            StandardLattice::E8Int => write!(f, "E8_int"),
            StandardLattice::LeechInt => write!(f, "Leech_int"),
        }
    }
}

/// Builds one of the standard integer lattices by name.
pub fn standard_lattice(name: &str) -> Result<Lattice> {
    Ok(name.parse::<StandardLattice>()?.build())
}

impl StandardLattice {
    pub fn build(self) -> Lattice {
        match self {
            StandardLattice::Zn(n) => {
                let id = IntMatrix::identity(n);
                Lattice { generator: id.clone(), triangular: id, volume: BigInt::one(), structure: Structure::Cubic }
            }
            StandardLattice::Dn(n) => {
                let cols: Vec<Vec<i64>> = (0..n)
                    .map(|j| {
                        let mut c = vec![0; n];
                        if j + 1 < n {
                            c[j] = 1;
                            c[j + 1] = 1;
                        } else {
                            c[j] = 2;
                        }
                        c
                    })
                    .collect();
                Lattice::with_structure(IntMatrix::from_columns(&cols), Structure::Checkerboard).expect("D_n basis is nonsingular")
            }
            StandardLattice::E8Int => {
                Lattice::with_structure(e8_int_generator(), Structure::E8Int).expect("E8 basis is nonsingular")
            }
            StandardLattice::LeechInt => leech_int(),
        }
    }
}

/// Twice the usual E8 basis: columns `4 e_1`, `2(e_{i+1} - e_i)`, all-ones.
fn e8_int_generator() -> IntMatrix {
    let mut rows = vec![[0i64; 8]; 8];
    rows[0][0] = 4;
    for i in 1..7 {
        rows[i][i - 1] = -2;
        rows[i][i] = 2;
    }
    rows[7] = [1; 8];
    IntMatrix::from_rows(&rows).transpose()
}

/// Generator rows of the extended binary Golay code, from the cyclic
/// quadratic-residue code of length 23 plus an overall parity bit.
pub(crate) fn golay24_rows() -> Vec<[u8; 24]> {
    // g(x) = 1 + x^2 + x^4 + x^5 + x^6 + x^10 + x^11
    const TAPS: [usize; 7] = [0, 2, 4, 5, 6, 10, 11];
    (0..12)
        .map(|shift| {
            let mut row = [0u8; 24];
            for t in TAPS {
                row[t + shift] = 1;
            }
            row[23] = (row[..23].iter().map(|&b| b as u32).sum::<u32>() % 2) as u8;
            row
        })
        .collect()
}

/// `sqrt(8) * Leech`: the vectors `x` in `Z^24` of Conway and Sloane's
/// integer coordinates, spanned by `2c` for Golay words `c`, `4 D_24` and
/// `(-3, 1, ..., 1)`. All of these contain `8 Z^24`.
fn leech_int() -> Lattice {
    let mut cols: Vec<Vec<BigInt>> = Vec::new();
    for row in golay24_rows() {
        cols.push(row.iter().map(|&b| BigInt::from(2 * b as i64)).collect());
    }
    for i in 1..24 {
        let mut c = vec![BigInt::zero(); 24];
        c[0] = BigInt::from(4);
        c[i] = BigInt::from(4);
        cols.push(c);
    }
    let mut odd = vec![BigInt::one(); 24];
    odd[0] = BigInt::from(-3);
    cols.push(odd);
    let t = matrix::hnf_of_span(24, &cols, &BigInt::from(8));
    Lattice { generator: t.clone(), volume: product(&t.diagonal_entries()), triangular: t, structure: Structure::LeechInt }
}

/// Lattice spanned by arbitrary integer columns containing `d Z^n`.
pub(crate) fn lattice_from_span(n: usize, cols: &[Vec<i64>], d: i64) -> Lattice {
    let h = matrix::hnf_of_span_i64(n, cols, d);
    let mut t = IntMatrix::zeros(n, n);
    for (j, col) in h.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            if v != 0 {
                t.set(i, j, BigInt::from(v));
            }
        }
    }
    Lattice::from_triangular(t)
}

/// `log2 |x|` for a positive big integer, accurate for huge values.
pub(crate) fn log2_big(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap().log2();
    }
    let shift = bits - 64;
    let top: BigInt = x >> shift;
    top.to_f64().unwrap().log2() + shift as f64
}
