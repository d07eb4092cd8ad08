//! Voronoi constellations over construction-D coding lattices: coset
//! representatives, encoding by folding, indexing and rate bookkeeping.
//!
//! The coding lattice is `Lc = sum_i q^i C_i + q^a Z^n` and the shaping
//! lattice is `Ls = q^a L'` with `L' = alpha * (base ^ copies)`, so that
//! `Ls ⊆ q^a Z^n ⊆ Lc ⊆ Z^n`. A message `(u_0, ..., u_{a-1}, s)` maps to
//! `x = sum_i q^i c_i + q^a s` with `c_i = u_i G_i mod q` and `s` in the box
//! `S = prod [0, g'_ii)` of the triangular basis of `L'`; the transmitted
//! point is `x - Q_Ls(x)`.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;

use crate::codes::CodeChain;
use crate::error::{Error, Result};
use crate::lattice::{self, is_sublattice, DiagonalScale, Lattice};
use crate::matrix::IntMatrix;
use crate::quantize::{Parallelotope, Quantizer};

/// Largest constellation the brute-force oracle accepts.
pub const ORACLE_MAX_POINTS: u64 = 1_000_000;
/// Largest dimension the brute-force oracle accepts.
pub const ORACLE_MAX_DIM: usize = 8;
/// Largest search box the brute-force oracle will scan.
pub const ORACLE_MAX_BOX: u64 = 50_000_000;

/// Level messages `u_i` (over `F_q`, length `k_i`) and shaping digits `s`
/// with `0 <= s_j < g'_jj`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Message {
    pub u: Vec<Vec<u64>>,
    pub s: Vec<i64>,
}

/// A validated Voronoi code: code chain plus shaping lattice.
#[derive(Clone, Debug)]
pub struct VoronoiCodeSpec {
    chain: CodeChain,
    base: Lattice,
    base_name: String,
    alpha: u64,
    copies: usize,
    /// `q^a`.
    scale: u64,
    coding: Lattice,
    inner: Lattice,
    shaping: Lattice,
    quantizer: Quantizer,
    digits: Parallelotope,
    offset: Vec<f64>,
}

impl VoronoiCodeSpec {
    pub fn new(chain: CodeChain, base: Lattice, alpha: u64, copies: usize) -> Result<Self> {
        Self::named(chain, base, "custom".into(), alpha, copies)
    }

    fn named(chain: CodeChain, base: Lattice, base_name: String, alpha: u64, copies: usize) -> Result<Self> {
        let n = chain.len();
        if alpha == 0 {
            return Err(Error::InvalidParameter("alpha must be a positive integer".into()));
        }
        if copies == 0 || base.dim() * copies != n {
            return Err(Error::InvalidParameter(format!(
                "copies * base dimension must equal the code length: {copies} * {} != {n}",
                base.dim()
            )));
        }
        let q = chain.q();
        let a = chain.levels() as u32;
        let scale = q.checked_pow(a).filter(|s| *s < 1 << 40).ok_or_else(|| Error::BoundExceeded("q^a is too large".into()))?;
        let inner = lattice::direct_sum(&base, copies, alpha)?;
        let shaping = inner.scaled(scale);
        let coding = coding_lattice(&chain, scale)?;
        check_sublattice_chain(&chain, &coding, &shaping, scale)?;
        let quantizer = Quantizer::for_lattice(&shaping)?;
        let digits = Parallelotope::new(inner.triangular())?;
        Ok(VoronoiCodeSpec { chain, base, base_name, alpha, copies, scale, coding, inner, shaping, quantizer, digits, offset: vec![0.0; n] })
    }

    /// Translates the shaping region: points become `x - Q(x + d)`.
    pub fn with_offset(mut self, d: Vec<f64>) -> Result<Self> {
        if d.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: d.len() });
        }
        if d.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("offset must be finite".into()));
        }
        self.offset = d;
        Ok(self)
    }

    /// Stocked instances: `rep2`, `z2`, `z2-skew`, `desk-e8`, `desk-cubic`,
    /// `desk-e8-hamming`, `leech`.
    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "rep2" => Self::from_parts(CodeChain::builtin("rep2")?, "Zn(1)", 2, 2),
            "z2" => Self::from_parts(CodeChain::empty(2, 2)?, "Zn(2)", 2, 1),
            "desk-e8" => Self::from_parts(CodeChain::builtin("rep8-spc8")?, "E8_int", 1, 1),
            "desk-cubic" => Self::from_parts(CodeChain::builtin("rep8-spc8")?, "Zn(1)", 2, 8),
            "desk-e8-hamming" => Self::from_parts(CodeChain::builtin("rep8-hamming8-spc8")?, "E8_int", 1, 1),
            "z2-skew" => {
                let base = Lattice::new(IntMatrix::from_rows(&[[1, 0], [1, 2]]))?;
                Self::named(CodeChain::empty(2, 2)?, base, "[[1,0],[1,2]]".into(), 1, 1)
            }
            "leech" => Self::from_parts(CodeChain::empty(2, 24)?, "Leech_int", 1, 1),
            _ => Err(Error::UnknownName(name.to_string())),
        }
    }

    pub const BUILTIN_NAMES: [&'static str; 7] = ["rep2", "z2", "z2-skew", "desk-e8", "desk-cubic", "desk-e8-hamming", "leech"];

    fn from_parts(chain: CodeChain, base: &str, alpha: u64, copies: usize) -> Result<Self> {
        Self::named(chain, lattice::standard_lattice(base)?, base.to_string(), alpha, copies)
    }

    /// `copies` independent copies of this code side by side.
    pub fn replicated(&self, copies: usize) -> Result<Self> {
        Self::named(self.chain.direct_sum(copies), self.base.clone(), self.base_name.clone(), self.alpha, self.copies * copies)
    }

    /// Reads a spec file. Lines are `key = value` with keys `chain`, `base`,
    /// `alpha`, `copies` and optionally `offset`. `chain` is `builtin:NAME`,
    /// `empty:N` or a chain-file path; `base` is a standard lattice name or
    /// `file:PATH` to a generator matrix. Relative paths resolve against the
    /// spec file's directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Parses spec text; see [`VoronoiCodeSpec::from_file`].
    pub fn parse(text: &str, dir: &Path) -> Result<Self> {
        let (mut chain, mut base, mut alpha, mut copies, mut offset) = (None, None, None, None, None);
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let ln = i + 1;
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse { line: ln, msg: "expected 'key = value'".into() })?;
            let value = value.trim();
            let bad = |what: &str| Error::Parse { line: ln, msg: format!("bad {what} '{value}'") };
            match key.trim() {
                "chain" => chain = Some(load_chain(value, dir).map_err(|e| Error::Parse { line: ln, msg: e.to_string() })?),
                "base" => base = Some(load_base(value, dir).map_err(|e| Error::Parse { line: ln, msg: e.to_string() })?),
                "alpha" => alpha = Some(value.parse::<u64>().map_err(|_| bad("alpha"))?),
                "copies" => copies = Some(value.parse::<usize>().map_err(|_| bad("copies"))?),
                "offset" => {
                    offset = Some(value.split_whitespace().map(|t| t.parse::<f64>()).collect::<std::result::Result<Vec<_>, _>>().map_err(|_| bad("offset"))?)
                }
                other => return Err(Error::Parse { line: ln, msg: format!("unknown key '{other}'") }),
            }
        }
        let missing = |k: &str| Error::Parse { line: 0, msg: format!("missing key '{k}'") };
        let chain = chain.ok_or_else(|| missing("chain"))?;
        let (base, base_name) = base.ok_or_else(|| missing("base"))?;
        let spec = Self::named(chain, base, base_name, alpha.unwrap_or(1), copies.unwrap_or(1))?;
        match offset {
            Some(d) => spec.with_offset(d),
            None => Ok(spec),
        }
    }

    pub fn dim(&self) -> usize {
        self.chain.len()
    }

    pub fn chain(&self) -> &CodeChain {
        &self.chain
    }

    pub fn base(&self) -> &Lattice {
        &self.base
    }

    pub fn base_name(&self) -> &str {
        &self.base_name
    }

    pub fn alpha(&self) -> u64 {
        self.alpha
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    /// `q^a`, the diagonal of `K`.
    pub fn scale(&self) -> u64 {
        self.scale
    }

    pub fn coding_lattice(&self) -> &Lattice {
        &self.coding
    }

    /// `L' = alpha * (base ^ copies)`.
    pub fn inner_lattice(&self) -> &Lattice {
        &self.inner
    }

    pub fn shaping_lattice(&self) -> &Lattice {
        &self.shaping
    }

    pub fn shaping_quantizer(&self) -> &Quantizer {
        &self.quantizer
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    /// Upper bounds `g'_jj` of the shaping digits.
    pub fn digit_bounds(&self) -> &[i64] {
        self.digits.diagonal()
    }

    /// `M = q^(sum k_i) * prod g'_jj`.
    pub fn message_count(&self) -> BigInt {
        let k: usize = self.chain.codes().iter().map(|c| c.dim()).sum();
        let s: BigInt = self.digit_bounds().iter().map(|&g| BigInt::from(g)).product();
        BigInt::from(self.chain.q()).pow(k as u32) * s
    }

    /// `M` as computed from volumes, `vol(Ls) / vol(Lc)`.
    pub fn quotient_order(&self) -> Result<BigInt> {
        let (m, r) = num_integer::Integer::div_rem(self.shaping.volume(), self.coding.volume());
        if !r.is_zero() {
            return Err(Error::NotNested("coding lattice volume does not divide shaping lattice volume".into()));
        }
        Ok(m)
    }

    /// Bits per dimension, `log2 alpha + log2(det base) / n' + R_c log2 q`,
    /// cross-checked against `log2(M) / n`.
    pub fn rate(&self) -> Result<f64> {
        let n = self.dim() as f64;
        let formula = (self.alpha as f64).log2()
            + lattice::log2_big(self.base.volume()) / self.base.dim() as f64
            + self.chain.rate() * (self.chain.q() as f64).log2();
        let m = self.quotient_order()?;
        if m != self.message_count() {
            return Err(Error::Internal(format!("message count {} differs from quotient order {m}", self.message_count())));
        }
        let direct = lattice::log2_big(&m) / n;
        if (formula - direct).abs() > 1e-12 {
            return Err(Error::Internal(format!("rate formula gives {formula}, log2(M)/n gives {direct}")));
        }
        Ok(formula)
    }

    pub fn validate_message(&self, msg: &Message) -> Result<()> {
        let q = self.chain.q();
        if msg.u.len() != self.chain.levels() {
            return Err(Error::InvalidMessage(format!("expected {} level messages, got {}", self.chain.levels(), msg.u.len())));
        }
        for (i, (u, c)) in msg.u.iter().zip(self.chain.codes()).enumerate() {
            if u.len() != c.dim() {
                return Err(Error::InvalidMessage(format!("level {i} message has length {}, expected {}", u.len(), c.dim())));
            }
            if u.iter().any(|&v| v >= q) {
                return Err(Error::InvalidMessage(format!("level {i} symbols must lie in [0, {q})")));
            }
        }
        if msg.s.len() != self.dim() {
            return Err(Error::InvalidMessage(format!("shaping digits have length {}, expected {}", msg.s.len(), self.dim())));
        }
        if let Some(j) = msg.s.iter().zip(self.digit_bounds()).position(|(&s, &g)| s < 0 || s >= g) {
            return Err(Error::InvalidMessage(format!("shaping digit {j} must lie in [0, {})", self.digit_bounds()[j])));
        }
        Ok(())
    }

    /// `x = sum_i q^i c_i + q^a s` into `out`; `code` is scratch of length n.
    /// The message is not validated.
    pub fn coset_representative_into(&self, msg: &Message, code: &mut [u64], out: &mut [i64]) {
        let q = self.chain.q() as i64;
        let mut w = 1i64;
        out.iter_mut().for_each(|v| *v = 0);
        for (c, u) in self.chain.codes().iter().zip(&msg.u) {
            c.encode_into(u, code);
            for (o, &v) in out.iter_mut().zip(code.iter()) {
                *o += w * v as i64;
            }
            w *= q;
        }
        for (o, &s) in out.iter_mut().zip(&msg.s) {
            *o += w * s;
        }
    }

    pub fn coset_representative(&self, msg: &Message) -> Result<Vec<i64>> {
        self.validate_message(msg)?;
        let mut code = vec![0; self.dim()];
        let mut out = vec![0; self.dim()];
        self.coset_representative_into(msg, &mut code, &mut out);
        Ok(out)
    }

    /// `x - Q_Ls(x + d)`, the coset member in the (translated) Voronoi region.
    pub fn fold(&self, x: &[i64]) -> Vec<i64> {
        let y: Vec<f64> = x.iter().zip(&self.offset).map(|(&v, &d)| v as f64 + d).collect();
        let p = self.quantizer.quantize(&y);
        x.iter().zip(&p).map(|(a, b)| a - b).collect()
    }

    pub fn encode(&self, msg: &Message) -> Result<Vec<i64>> {
        Ok(self.fold(&self.coset_representative(msg)?))
    }

    /// Recovers the message of a constellation point by peeling levels.
    pub fn index(&self, p: &[i64]) -> Result<Message> {
        let msg = self.index_coset(p)?;
        let mut code = vec![0; self.dim()];
        let mut x = vec![0; self.dim()];
        self.coset_representative_into(&msg, &mut code, &mut x);
        if self.fold(&x) != p {
            return Err(Error::NotAConstellationPoint("point lies outside the Voronoi region of the shaping lattice".into()));
        }
        Ok(msg)
    }

    /// Message of the coset `p + Ls` for any `p` in the coding lattice.
    pub fn index_coset(&self, p: &[i64]) -> Result<Message> {
        if p.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: p.len() });
        }
        let q = self.chain.q() as i64;
        let mut t = p.to_vec();
        let mut u = Vec::with_capacity(self.chain.levels());
        let mut c = vec![0u64; self.dim()];
        for (i, code) in self.chain.codes().iter().enumerate() {
            for (cj, tj) in c.iter_mut().zip(&t) {
                *cj = tj.rem_euclid(q) as u64;
            }
            let ui = code.demap(&c).map_err(|_| Error::NotAConstellationPoint(format!("level {i} residue is not a codeword of C_{i}")))?;
            u.push(ui);
            for (tj, &cj) in t.iter_mut().zip(&c) {
                *tj = (*tj - cj as i64) / q;
            }
        }
        self.digits.reduce(&mut t);
        Ok(Message { u, s: t })
    }

    /// Whether `p` is in `Lc` and is its own fold.
    pub fn is_constellation_point(&self, p: &[i64]) -> bool {
        p.len() == self.dim() && self.coding.contains(p) && self.fold(p) == p
    }

    /// The `idx`-th message in mixed-radix order (level digits first).
    pub fn message_from_index(&self, mut idx: u64) -> Message {
        let q = self.chain.q();
        let u = self
            .chain
            .codes()
            .iter()
            .map(|c| {
                (0..c.dim())
                    .map(|_| {
                        let d = idx % q;
                        idx /= q;
                        d
                    })
                    .collect()
            })
            .collect();
        let s = self
            .digit_bounds()
            .iter()
            .map(|&g| {
                let d = idx % g as u64;
                idx /= g as u64;
                d as i64
            })
            .collect();
        Message { u, s }
    }

    pub fn random_message<R: Rng + ?Sized>(&self, rng: &mut R) -> Message {
        let q = self.chain.q();
        let u = self.chain.codes().iter().map(|c| (0..c.dim()).map(|_| rng.gen_range(0..q)).collect()).collect();
        let s = self.digit_bounds().iter().map(|&g| rng.gen_range(0..g)).collect();
        Message { u, s }
    }

    /// `M` if it fits in 64 bits.
    pub fn message_count_u64(&self) -> Option<u64> {
        self.message_count().to_u64()
    }

    /// Every constellation point, by encoding all messages, if `M <= limit`.
    pub fn constellation(&self, limit: u64) -> Result<Vec<Vec<i64>>> {
        let m = self.message_count_u64().filter(|&m| m <= limit).ok_or_else(|| {
            Error::BoundExceeded(format!("constellation has {} points, limit is {limit}", self.message_count()))
        })?;
        let mut code = vec![0; self.dim()];
        let mut x = vec![0; self.dim()];
        Ok((0..m)
            .map(|i| {
                self.coset_representative_into(&self.message_from_index(i), &mut code, &mut x);
                self.fold(&x)
            })
            .collect())
    }

    /// Brute force: integer points of `[-B, B]^n` (B the largest diagonal of
    /// the triangular basis of `Ls`) that lie in `Lc` and whose nearest
    /// `Ls` point, by exhaustive enumeration, is the origin.
    pub fn enumerate_constellation_oracle(&self) -> Result<BTreeSet<Vec<i64>>> {
        let n = self.dim();
        let m = self.message_count();
        if n > ORACLE_MAX_DIM || m > BigInt::from(ORACLE_MAX_POINTS) {
            return Err(Error::BoundExceeded(format!(
                "oracle needs n <= {ORACLE_MAX_DIM} and M <= {ORACLE_MAX_POINTS}, got n = {n}, M = {m}"
            )));
        }
        // Nearest-plane bound: the covering radius is at most half the norm of
        // the triangular diagonal, so every region point fits in [-b, b]^n.
        let diag2: f64 = self.shaping.triangular().diagonal_entries().iter().map(|v| v.to_f64().unwrap_or(f64::INFINITY).powi(2)).sum();
        let shift = self.offset.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        let b = (0.5 * diag2.sqrt() + shift).floor();
        if !(b < 1e6) {
            return Err(Error::BoundExceeded(format!("oracle box half-width {b} is too large")));
        }
        let b = b as i64;
        let side = (2 * b + 1) as u64;
        if side.checked_pow(n as u32).is_none_or(|v| v > ORACLE_MAX_BOX) {
            return Err(Error::BoundExceeded(format!("oracle box [-{b}, {b}]^{n} is too large")));
        }
        let exact = Quantizer::exact(&self.shaping)?;
        let mut out = BTreeSet::new();
        let mut x = vec![-b; n];
        loop {
            if self.coding.contains(&x) {
                let y: Vec<f64> = x.iter().zip(&self.offset).map(|(&v, &d)| v as f64 + d).collect();
                if exact.quantize(&y).iter().all(|&v| v == 0) {
                    out.insert(x.clone());
                }
            }
            let Some(j) = (0..n).find(|&j| x[j] < b) else { break };
            x[j] += 1;
            x[..j].iter_mut().for_each(|v| *v = -b);
        }
        Ok(out)
    }
}

impl fmt::Display for VoronoiCodeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n={} q={} a={} k=[{}] base={} alpha={} copies={}",
            self.dim(),
            self.chain.q(),
            self.chain.levels(),
            self.chain.codes().iter().map(|c| c.dim().to_string()).collect::<Vec<_>>().join(","),
            self.base_name,
            self.alpha,
            self.copies
        )
    }
}

fn load_chain(value: &str, dir: &Path) -> Result<CodeChain> {
    if let Some(name) = value.strip_prefix("builtin:") {
        return CodeChain::builtin(name.trim());
    }
    if let Some(n) = value.strip_prefix("empty:") {
        let n = n.trim().parse::<usize>().map_err(|_| Error::InvalidParameter(format!("bad length '{n}'")))?;
        return CodeChain::empty(2, n);
    }
    let path = dir.join(value);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    text.parse()
}

fn load_base(value: &str, dir: &Path) -> Result<(Lattice, String)> {
    if let Some(p) = value.strip_prefix("file:") {
        let path = dir.join(p.trim());
        let text = std::fs::read_to_string(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let g: IntMatrix = text.parse()?;
        return Ok((Lattice::new(g)?, value.to_string()));
    }
    Ok((lattice::standard_lattice(value)?, value.to_string()))
}

/// `Lc`, spanned by `q^i` times the rows of `C_i` and by `q^a Z^n`.
/// Rejects chains whose construction-D set is not closed under addition.
fn coding_lattice(chain: &CodeChain, scale: u64) -> Result<Lattice> {
    let n = chain.len();
    let q = chain.q() as i64;
    let mut cols = Vec::new();
    let mut w = 1i64;
    let mut k_total = 0u32;
    for c in chain.codes() {
        for row in c.generator() {
            cols.push(row.iter().map(|&v| w * v as i64).collect::<Vec<i64>>());
        }
        k_total += c.dim() as u32;
        w *= q;
    }
    let lc = lattice::lattice_from_span(n, &cols, scale as i64);
    let expected = BigInt::from(scale).pow(n as u32) / BigInt::from(chain.q()).pow(k_total);
    if *lc.volume() != expected {
        return Err(Error::NotNested(
            "sum_i q^i C_i + q^a Z^n is not a lattice: the chain is not closed under the construction-D carries".into(),
        ));
    }
    Ok(lc)
}

/// Checks `Ls ⊆ q^a Z^n ⊆ Lc`; `Lc ⊆ Z^n` holds as all bases are integral.
fn check_sublattice_chain(chain: &CodeChain, coding: &Lattice, shaping: &Lattice, scale: u64) -> Result<()> {
    let s = BigInt::from(scale);
    let g = shaping.triangular();
    for i in 0..g.rows() {
        for j in 0..=i {
            if !(g.get(i, j) % &s).is_zero() {
                return Err(Error::NotNested(format!("shaping lattice is not contained in {scale} Z^{}", chain.len())));
            }
        }
    }
    // q^a Z^n ⊆ Lc iff each diagonal entry of Lc's basis divides q^a and the
    // columns reduce; checked on the unit vectors directly for small n.
    let t = coding.triangular();
    if t.diagonal_entries().iter().any(|d| !(&s % d).is_zero()) {
        return Err(Error::NotNested(format!("{scale} Z^n is not contained in the coding lattice")));
    }
    if chain.len() <= 64 {
        let kz = Lattice::from_diagonal(&DiagonalScale::uniform(chain.len(), scale)?);
        if !is_sublattice(&kz, coding)? {
            return Err(Error::NotNested(format!("{scale} Z^n is not contained in the coding lattice")));
        }
    }
    Ok(())
}

/// Theorem-1 representatives of `Lc / Ls` for `Ls ⊆ K Z^n ⊆ Lc` with
/// diagonal `K`: `r + K s` with `r` ranging over `Lc / K Z^n` and
/// `0 <= s_i < g_ii / k_i`, `g_ii` the diagonal of the triangular basis of `Ls`.
pub fn theorem1_representatives(coding: &Lattice, shaping: &Lattice, k: &DiagonalScale, limit: u64) -> Result<Vec<Vec<i64>>> {
    let n = coding.dim();
    if shaping.dim() != n || k.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: if shaping.dim() != n { shaping.dim() } else { k.dim() } });
    }
    let kz = Lattice::from_diagonal(k);
    if !is_sublattice(shaping, &kz)? {
        return Err(Error::NotNested("shaping lattice is not contained in K Z^n".into()));
    }
    if !is_sublattice(&kz, coding)? {
        return Err(Error::NotNested("K Z^n is not contained in the coding lattice".into()));
    }
    let lc = coding.triangular_i64().ok_or_else(|| Error::BoundExceeded("coding basis exceeds 64 bits".into()))?;
    let ls = shaping.triangular_i64().ok_or_else(|| Error::BoundExceeded("shaping basis exceeds 64 bits".into()))?;
    let kv: Vec<i64> = k.entries().iter().map(|&v| v as i64).collect();
    // Inclusions force both divisions below to be exact.
    let r_bounds: Vec<i64> = (0..n).map(|i| kv[i] / lc[i][i]).collect();
    let s_bounds: Vec<i64> = (0..n).map(|i| ls[i][i] / kv[i]).collect();
    let total = r_bounds.iter().chain(&s_bounds).try_fold(1u64, |acc, &b| acc.checked_mul(b as u64));
    if total.is_none_or(|t| t > limit) {
        return Err(Error::BoundExceeded(format!("representative set exceeds {limit} points")));
    }
    let mut reps = Vec::new();
    for_each_in_box(&r_bounds, |b| {
        let r: Vec<i64> = (0..n).map(|i| (0..=i).map(|j| lc[i][j] * b[j]).sum::<i64>().rem_euclid(kv[i])).collect();
        for_each_in_box(&s_bounds, |s| reps.push((0..n).map(|i| r[i] + kv[i] * s[i]).collect()));
    });
    Ok(reps)
}

fn for_each_in_box(bounds: &[i64], mut f: impl FnMut(&[i64])) {
    if bounds.iter().any(|&b| b <= 0) {
        return;
    }
    let mut v = vec![0i64; bounds.len()];
    loop {
        f(&v);
        let Some(j) = (0..v.len()).find(|&j| v[j] + 1 < bounds[j]) else { return };
        v[j] += 1;
        v[..j].iter_mut().for_each(|x| *x = 0);
    }
}

/// `K` for a spec: `q^a I`.
pub fn uniform_scale(spec: &VoronoiCodeSpec) -> DiagonalScale {
    DiagonalScale::uniform(spec.dim(), spec.scale()).expect("q^a >= 1")
}
