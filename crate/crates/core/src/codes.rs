//! Linear block codes over prime fields and nested code chains.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest dimension accepted by [`LinearCode::ml_decode`].
pub const ML_MAX_K: usize = 20;

/// A linear `[n, k]` code over `F_q` with a systematic generator matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearCode {
    q: u64,
    n: usize,
    gen: Vec<Vec<u64>>,
    /// Nonzero entries of each generator row.
    sparse: Vec<Vec<(usize, u64)>>,
    info_positions: Vec<usize>,
}

fn is_prime(q: u64) -> bool {
    q >= 2 && (2..).take_while(|d| d * d <= q).all(|d| !q.is_multiple_of(d))
}

fn inv_mod(a: u64, q: u64) -> u64 {
    // Fermat: a^(q-2) for prime q.
    let (mut base, mut exp, mut acc) = (a % q, q - 2, 1u64);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % q;
        }
        base = base * base % q;
        exp >>= 1;
    }
    acc
}

impl LinearCode {
    /// Row-reduces `rows` to systematic form. Rows must be independent.
    pub fn new(q: u64, n: usize, rows: Vec<Vec<u64>>) -> Result<Self> {
        if !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        if q > u32::MAX as u64 {
            return Err(Error::InvalidParameter("field size too large".into()));
        }
        for row in &rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: row.len() });
            }
            if row.iter().any(|&v| v >= q) {
                return Err(Error::InvalidParameter(format!("symbols must lie in [0, {q})")));
            }
        }
        let mut m = rows;
        let k = m.len();
        let mut info = Vec::with_capacity(k);
        let mut r = 0;
        for col in 0..n {
            if r == k {
                break;
            }
            let Some(p) = (r..k).find(|&i| m[i][col] != 0) else { continue };
            m.swap(r, p);
            let inv = inv_mod(m[r][col], q);
            for v in m[r].iter_mut() {
                *v = *v * inv % q;
            }
            for i in 0..k {
                if i != r && m[i][col] != 0 {
                    let f = m[i][col];
                    for j in 0..n {
                        m[i][j] = (m[i][j] + (q - f) * m[r][j]) % q;
                    }
                }
            }
            info.push(col);
            r += 1;
        }
        if r < k {
            return Err(Error::InvalidParameter("generator rows are linearly dependent".into()));
        }
        let sparse = m.iter().map(|row| row.iter().enumerate().filter(|(_, &v)| v != 0).map(|(j, &v)| (j, v)).collect()).collect();
        Ok(LinearCode { q, n, gen: m, sparse, info_positions: info })
    }

    /// `[n, 1]` repetition code.
    pub fn repetition(q: u64, n: usize) -> Result<Self> {
        Self::new(q, n, vec![vec![1; n]])
    }

    /// Binary `[n, n-1]` single-parity-check code.
    pub fn single_parity_check(n: usize) -> Result<Self> {
        let rows = (0..n - 1)
            .map(|i| {
                let mut r = vec![0; n];
                r[i] = 1;
                r[n - 1] = 1;
                r
            })
            .collect();
        Self::new(2, n, rows)
    }

    /// Binary `[8, 4, 4]` extended Hamming code.
    pub fn extended_hamming8() -> Self {
        let rows = vec![
            vec![1, 0, 0, 0, 0, 1, 1, 1],
            vec![0, 1, 0, 0, 1, 0, 1, 1],
            vec![0, 0, 1, 0, 1, 1, 0, 1],
            vec![0, 0, 0, 1, 1, 1, 1, 0],
        ];
        Self::new(2, 8, rows).expect("valid generator")
    }

    /// Direct sum of `copies` copies: block-diagonal generator.
    pub fn direct_sum(&self, copies: usize) -> Self {
        let n = self.n * copies;
        let mut rows = Vec::with_capacity(self.dim() * copies);
        for c in 0..copies {
            for row in &self.gen {
                let mut r = vec![0; n];
                r[c * self.n..(c + 1) * self.n].copy_from_slice(row);
                rows.push(r);
            }
        }
        Self::new(self.q, n, rows).expect("direct sum of a valid code")
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.gen.len()
    }

    pub fn generator(&self) -> &[Vec<u64>] {
        &self.gen
    }

    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    /// Number of nonzero generator entries; the cost of one encoding.
    pub fn encoding_weight(&self) -> usize {
        self.sparse.iter().map(Vec::len).sum()
    }

    /// `c = u G mod q` without validating `u`.
    pub fn encode_into(&self, u: &[u64], c: &mut [u64]) {
        c.iter_mut().for_each(|v| *v = 0);
        for (row, &ui) in self.sparse.iter().zip(u) {
            if ui != 0 {
                for &(j, g) in row {
                    c[j] = (c[j] + ui * g) % self.q;
                }
            }
        }
    }

    pub fn encode(&self, u: &[u64]) -> Result<Vec<u64>> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: u.len() });
        }
        if u.iter().any(|&v| v >= self.q) {
            return Err(Error::InvalidMessage(format!("symbols must lie in [0, {})", self.q)));
        }
        let mut c = vec![0; self.n];
        self.encode_into(u, &mut c);
        Ok(c)
    }

    /// Recovers the message from a codeword.
    pub fn demap(&self, c: &[u64]) -> Result<Vec<u64>> {
        if c.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: c.len() });
        }
        let u: Vec<u64> = self.info_positions.iter().map(|&j| c[j]).collect();
        if u.iter().any(|&v| v >= self.q) {
            return Err(Error::NotACodeword);
        }
        let mut re = vec![0; self.n];
        self.encode_into(&u, &mut re);
        if re != c {
            return Err(Error::NotACodeword);
        }
        Ok(u)
    }

    pub fn contains(&self, c: &[u64]) -> bool {
        self.demap(c).is_ok()
    }

    /// Minimum-cost codeword for per-symbol costs `metric[j][v]`, by
    /// exhaustive search. Ties go to the lexicographically smallest codeword.
    pub fn ml_decode(&self, metric: &[Vec<f64>]) -> Result<Vec<u64>> {
        let k = self.dim();
        if k > ML_MAX_K {
            return Err(Error::BoundExceeded(format!("ML decoding needs k <= {ML_MAX_K}, got {k}")));
        }
        if metric.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: metric.len() });
        }
        if metric.iter().any(|m| m.len() != self.q as usize) {
            return Err(Error::InvalidParameter("metric needs one cost per field symbol".into()));
        }
        let q = self.q;
        let total = (q as u128).pow(k as u32);
        let mut digits = vec![0u64; k];
        let mut c = vec![0u64; self.n];
        let cost = |c: &[u64]| -> f64 { c.iter().zip(metric).map(|(&v, m)| m[v as usize]).sum() };
        let mut best = c.clone();
        let mut best_cost = cost(&c);
        for _ in 1..total {
            // Mixed-radix increment: each bumped digit adds its row once.
            let mut i = 0;
            loop {
                for &(j, g) in &self.sparse[i] {
                    c[j] = (c[j] + g) % q;
                }
                digits[i] = (digits[i] + 1) % q;
                if digits[i] != 0 {
                    break;
                }
                i += 1;
            }
            let v = cost(&c);
            let eps = 1e-12 * (1.0 + best_cost.abs());
            if v < best_cost - eps || (v <= best_cost + eps && c < best) {
                best_cost = best_cost.min(v);
                best.copy_from_slice(&c);
            }
        }
        Ok(best)
    }
}

/// Whether every generator row of `inner` is a codeword of `outer`.
pub fn is_nested(inner: &LinearCode, outer: &LinearCode) -> bool {
    inner.q == outer.q && inner.n == outer.n && inner.gen.iter().all(|row| outer.contains(row))
}

/// Nested codes `C_0 ⊆ C_1 ⊆ ... ⊆ C_{a-1}` of common length over `F_q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeChain {
    q: u64,
    n: usize,
    codes: Vec<LinearCode>,
}

impl CodeChain {
    pub fn new(q: u64, n: usize, codes: Vec<LinearCode>) -> Result<Self> {
        if !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        for (i, c) in codes.iter().enumerate() {
            if c.q != q || c.n != n {
                return Err(Error::InvalidParameter(format!("level {i} is a code of length {} over F_{}, expected length {n} over F_{q}", c.n, c.q)));
            }
        }
        for i in 1..codes.len() {
            if let Some(r) = codes[i - 1].gen.iter().position(|row| !codes[i].contains(row)) {
                return Err(Error::NotNested(format!(
                    "C_{} is not contained in C_{}: generator row {r} of C_{} is not a codeword of C_{}",
                    i - 1,
                    i,
                    i - 1,
                    i
                )));
            }
        }
        Ok(CodeChain { q, n, codes })
    }

    /// Stocked chains: `rep2`, `rep8-spc8`, `rep8-hamming8-spc8`.
    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "rep2" => Self::new(2, 2, vec![LinearCode::repetition(2, 2)?]),
            "rep8-spc8" => Self::new(2, 8, vec![LinearCode::repetition(2, 8)?, LinearCode::single_parity_check(8)?]),
            "rep8-hamming8-spc8" => Self::new(
                2,
                8,
                vec![LinearCode::repetition(2, 8)?, LinearCode::extended_hamming8(), LinearCode::single_parity_check(8)?],
            ),
            _ => Err(Error::UnknownName(name.to_string())),
        }
    }

    pub const BUILTIN_NAMES: [&'static str; 3] = ["rep2", "rep8-spc8", "rep8-hamming8-spc8"];

    /// Chain with no levels, giving the coding lattice `Z^n`.
    pub fn empty(q: u64, n: usize) -> Result<Self> {
        Self::new(q, n, Vec::new())
    }

    pub fn direct_sum(&self, copies: usize) -> Self {
        CodeChain { q: self.q, n: self.n * copies, codes: self.codes.iter().map(|c| c.direct_sum(copies)).collect() }
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Number of levels `a`.
    pub fn levels(&self) -> usize {
        self.codes.len()
    }

    pub fn codes(&self) -> &[LinearCode] {
        &self.codes
    }

    pub fn level(&self, i: usize) -> &LinearCode {
        &self.codes[i]
    }

    /// `sum_i k_i / n`.
    pub fn rate(&self) -> f64 {
        self.codes.iter().map(|c| c.dim()).sum::<usize>() as f64 / self.n as f64
    }
}

/// Text format: header `q a n`; then per level a line `k` and `k` rows of
/// `n` symbols. Rows may also be written as one run of digits when `q <= 10`.
impl FromStr for CodeChain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let mut next = |what: &str| lines.next().ok_or_else(|| Error::Parse { line: 0, msg: format!("unexpected end of input, expected {what}") });
        let (hl, header) = next("header 'q a n'")?;
        let h: Vec<u64> = parse_nums(header, hl)?;
        if h.len() != 3 {
            return Err(Error::Parse { line: hl, msg: "header must be 'q a n'".into() });
        }
        let (q, a, n) = (h[0], h[1] as usize, h[2] as usize);
        if !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        let mut codes = Vec::with_capacity(a);
        for level in 0..a {
            let (kl, kline) = next("level dimension")?;
            let k: Vec<usize> = parse_nums(kline, kl)?;
            if k.len() != 1 {
                return Err(Error::Parse { line: kl, msg: format!("expected the dimension of level {level}") });
            }
            let mut rows = Vec::with_capacity(k[0]);
            for _ in 0..k[0] {
                let (rl, rline) = next("generator row")?;
                let row: Vec<u64> = if q <= 10 && !rline.contains(char::is_whitespace) && rline.len() == n {
                    rline
                        .chars()
                        .map(|ch| ch.to_digit(10).map(u64::from).ok_or_else(|| Error::Parse { line: rl, msg: format!("bad symbol '{ch}'") }))
                        .collect::<Result<_>>()?
                } else {
                    parse_nums(rline, rl)?
                };
                if row.len() != n {
                    return Err(Error::Parse { line: rl, msg: format!("expected {n} symbols, found {}", row.len()) });
                }
                rows.push(row);
            }
            let code = LinearCode::new(q, n, rows).map_err(|e| Error::Parse { line: kl, msg: format!("level {level}: {e}") })?;
            codes.push(code);
        }
        if let Some((l, _)) = lines.next() {
            return Err(Error::Parse { line: l, msg: "trailing data after last level".into() });
        }
        CodeChain::new(q, n, codes)
    }
}

fn parse_nums<T: FromStr>(line: &str, ln: usize) -> Result<Vec<T>> {
    line.split_whitespace()
        .map(|t| t.parse::<T>().map_err(|_| Error::Parse { line: ln, msg: format!("bad number '{t}'") }))
        .collect()
}

impl fmt::Display for CodeChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {} {}", self.q, self.levels(), self.n)?;
        for c in &self.codes {
            writeln!(f, "{}", c.dim())?;
            for row in c.generator() {
                let s: Vec<String> = row.iter().map(u64::to_string).collect();
                writeln!(f, "{}", s.join(" "))?;
            }
        }
        Ok(())
    }
}
