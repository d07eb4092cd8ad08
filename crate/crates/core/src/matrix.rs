//! Exact integer matrices.
//!
//! Generator matrices store basis vectors as columns, so a lattice point is
//! `G * b` for an integer coefficient column `b`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Dense row-major matrix of arbitrary-precision integers.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn diagonal(diag: &[i64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = BigInt::from(d);
        }
        m
    }

    /// Builds a matrix from rows of machine integers.
    ///
    /// Panics if the rows have unequal lengths.
    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.as_ref().len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            let row = row.as_ref();
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row.iter().map(|&v| BigInt::from(v)));
        }
        IntMatrix { rows: r, cols: c, data }
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns<C: AsRef<[i64]>>(cols: &[C]) -> Self {
        let c = cols.len();
        let r = cols.first().map_or(0, |col| col.as_ref().len());
        let mut m = Self::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            let col = col.as_ref();
            assert_eq!(col.len(), r, "ragged columns");
            for (i, &v) in col.iter().enumerate() {
                m.data[i * c + j] = BigInt::from(v);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        t
    }

    pub fn scaled(&self, k: &BigInt) -> Self {
        IntMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * k).collect() }
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, found: other.rows });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Block-diagonal matrix with the given blocks along the diagonal.
    pub fn block_diagonal(blocks: &[&IntMatrix]) -> IntMatrix {
        let rows: usize = blocks.iter().map(|b| b.rows).sum();
        let cols: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out.data[(r0 + i) * cols + c0 + j] = b.get(i, j).clone();
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    pub fn is_lower_triangular(&self) -> bool {
        (0..self.rows).all(|i| ((i + 1)..self.cols).all(|j| self.get(i, j).is_zero()))
    }

    pub fn diagonal_entries(&self) -> Vec<BigInt> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i).clone()).collect()
    }

    /// Row-major copy as machine integers, if every entry fits.
    pub fn to_i64_rows(&self) -> Option<Vec<Vec<i64>>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).to_i64()).collect())
            .collect()
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).to_f64().unwrap_or(f64::NAN)).collect())
            .collect()
    }

    /// `self * v` for a machine-integer vector.
    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * &v[j]).sum())
            .collect()
    }
}

/// Exact determinant by fraction-free (Bareiss) elimination.
pub fn det(m: &IntMatrix) -> Result<BigInt> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.rows, cols: m.cols });
    }
    let n = m.rows;
    if n == 0 {
        return Ok(BigInt::one());
    }
    let mut a: Vec<Vec<BigInt>> = (0..n).map(|i| (0..n).map(|j| m.get(i, j).clone()).collect()).collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match ((k + 1)..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return Ok(BigInt::zero()),
            }
        }
        for i in (k + 1)..n {
            for j in (k + 1)..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    Ok(sign * &a[n - 1][n - 1])
}

/// Column-style lower Hermite normal form of a square nonsingular matrix.
///
/// Returns `L = G * U` with `U` unimodular, `L` lower triangular with a
/// positive diagonal and `0 <= L[i][j] < L[i][i]` for `j < i`.
pub fn hnf_lower_triangular(g: &IntMatrix) -> Result<IntMatrix> {
    if !g.is_square() {
        return Err(Error::NotSquare { rows: g.rows, cols: g.cols });
    }
    let d = det(g)?.abs();
    if d.is_zero() {
        return Err(Error::DegenerateLattice);
    }
    let cols: Vec<Vec<BigInt>> = (0..g.cols).map(|j| g.column(j)).collect();
    Ok(hnf_of_span(g.rows, &cols, &d))
}

/// Lower HNF of the lattice spanned by `cols`, given a positive integer `d`
/// with `d * Z^n` contained in that lattice.
pub fn hnf_of_span(n: usize, cols: &[Vec<BigInt>], d: &BigInt) -> IntMatrix {
    assert!(d.is_positive());
    let h = match d.to_i128() {
        Some(small) if small < (1i128 << 60) => {
            let cols: Vec<Vec<i128>> =
                cols.iter().map(|c| c.iter().map(|v| v.mod_floor(d).to_i128().unwrap()).collect()).collect();
            hnf_mod(n, cols, small).into_iter().map(|c| c.into_iter().map(BigInt::from).collect()).collect()
        }
        _ => hnf_mod(n, cols.to_vec(), d.clone()),
    };
    let mut out = IntMatrix::zeros(n, n);
    for (j, col) in h.into_iter().enumerate() {
        for (i, v) in col.into_iter().enumerate() {
            out.set(i, j, v);
        }
    }
    out
}

/// Modular HNF over machine integers, for callers that know `d` is small.
pub fn hnf_of_span_i64(n: usize, cols: &[Vec<i64>], d: i64) -> Vec<Vec<i64>> {
    assert!(d > 0);
    let cols: Vec<Vec<i128>> = cols.iter().map(|c| c.iter().map(|&v| (v as i128).rem_euclid(d as i128)).collect()).collect();
    // Entries stay in [0, d) so the narrowing is lossless.
    hnf_mod(n, cols, d as i128).into_iter().map(|c| c.into_iter().map(|v| v as i64).collect()).collect()
}

fn hnf_mod<T>(n: usize, cols: Vec<Vec<T>>, d: T) -> Vec<Vec<T>>
where
    T: Integer + Signed + Clone,
{
    let reduce = |v: &mut Vec<T>, from: usize| {
        for x in v.iter_mut().skip(from) {
            *x = x.mod_floor(&d);
        }
    };
    let mut work: Vec<Vec<T>> = cols
        .into_iter()
        .map(|mut c| {
            reduce(&mut c, 0);
            c
        })
        .filter(|c| c.iter().any(|x| !x.is_zero()))
        .collect();
    let mut h: Vec<Vec<T>> = Vec::with_capacity(n);

    for i in 0..n {
        let mut pivot: Option<Vec<T>> = None;
        let mut keep = Vec::with_capacity(work.len() + 1);
        for w in work.drain(..) {
            if w[i].is_zero() {
                keep.push(w);
                continue;
            }
            pivot = Some(match pivot.take() {
                None => w,
                Some(p) => {
                    let eg = p[i].extended_gcd(&w[i]);
                    let (g, a, b) = (eg.gcd, eg.x, eg.y);
                    let (wi, pi) = (w[i].div_floor(&g), p[i].div_floor(&g));
                    let mut np: Vec<T> = p.iter().zip(&w).map(|(x, y)| a.clone() * x.clone() + b.clone() * y.clone()).collect();
                    let mut other: Vec<T> =
                        p.iter().zip(&w).map(|(x, y)| wi.clone() * x.clone() - pi.clone() * y.clone()).collect();
                    np[i] = g;
                    reduce(&mut np, i + 1);
                    other[i] = T::zero();
                    reduce(&mut other, i + 1);
                    if other.iter().any(|x| !x.is_zero()) {
                        keep.push(other);
                    }
                    np
                }
            });
        }
        // Fold in the implicit generator d * e_i.
        let p = pivot.unwrap_or_else(|| vec![T::zero(); n]);
        let eg = p[i].extended_gcd(&d);
        let g = eg.gcd.abs();
        let a = if eg.gcd.is_negative() { -eg.x } else { eg.x };
        let mut col: Vec<T> = p.iter().map(|x| a.clone() * x.clone()).collect();
        col[i] = g.clone();
        reduce(&mut col, i + 1);
        let cof = d.div_floor(&g);
        let mut other: Vec<T> = p.iter().map(|x| cof.clone() * x.clone()).collect();
        other[i] = T::zero();
        reduce(&mut other, i + 1);
        if other.iter().any(|x| !x.is_zero()) {
            keep.push(other);
        }
        h.push(col);
        work = keep;
    }

    // Reduce off-diagonal entries into [0, h_ii).
    for i in 0..n {
        let (left, right) = h.split_at_mut(i);
        let hi = &right[0];
        for col in left.iter_mut() {
            let f = col[i].div_floor(&hi[i]);
            if !f.is_zero() {
                for r in i..n {
                    col[r] = col[r].clone() - f.clone() * hi[r].clone();
                }
            }
            reduce(col, i + 1);
        }
    }
    h
}

/// Solves `L x = v` for lower-triangular `L`; `None` unless `x` is integral.
pub fn solve_lower_integral(l: &IntMatrix, v: &[BigInt]) -> Option<Vec<BigInt>> {
    let n = l.rows;
    let mut x: Vec<BigInt> = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = v[i].clone();
        for (j, xj) in x.iter().enumerate() {
            let lij = l.get(i, j);
            if !lij.is_zero() {
                acc -= lij * xj;
            }
        }
        let (q, r) = acc.div_rem(l.get(i, i));
        if !r.is_zero() {
            return None;
        }
        x.push(q);
    }
    Some(x)
}

/// Text format: header `rows cols`, then one line per row; `#` starts a
/// comment line.
impl FromStr for IntMatrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(Error::Parse { line: 0, msg: "empty matrix file".into() })?;
        let dims = parse_ints::<usize>(header, hline)?;
        if dims.len() != 2 {
            return Err(Error::Parse { line: hline, msg: "header must be 'rows cols'".into() });
        }
        let (rows, cols) = (dims[0], dims[1]);
        let mut m = IntMatrix::zeros(rows, cols);
        for i in 0..rows {
            let (ln, line) = lines.next().ok_or(Error::Parse { line: hline, msg: format!("expected {rows} rows, found {i}") })?;
            let vals = parse_ints::<BigInt>(line, ln)?;
            if vals.len() != cols {
                return Err(Error::Parse { line: ln, msg: format!("expected {cols} entries, found {}", vals.len()) });
            }
            for (j, v) in vals.into_iter().enumerate() {
                m.set(i, j, v);
            }
        }
        if let Some((ln, _)) = lines.next() {
            return Err(Error::Parse { line: ln, msg: "trailing data after matrix".into() });
        }
        Ok(m)
    }
}

fn parse_ints<T: FromStr>(line: &str, ln: usize) -> Result<Vec<T>> {
    line.split_whitespace()
        .map(|t| t.parse::<T>().map_err(|_| Error::Parse { line: ln, msg: format!("bad integer '{t}'") }))
        .collect()
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}
