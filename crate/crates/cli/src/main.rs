use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use voronoi_core::bench::complexity_sweep;
use voronoi_core::lattice::standard_lattice;
use voronoi_core::quantize::{second_moment_mc, Quantizer};
use voronoi_core::shaping::VoronoiCodeSpec;
use voronoi_core::simulate::{crossing_db, wer_sweep, write_csv, DecodeMode, SweepConfig};

/// Voronoi-shaped lattice constellations: encoding checks and experiments.
#[derive(Parser, Debug)]
#[command(name = "voronoi", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Encode messages, index the points and check the round trip.
    Roundtrip(RoundtripArgs),
    /// Monte Carlo normalized second moment and shaping gain of a lattice.
    ShapingGain(ShapingGainArgs),
    /// Word-error rate over AWGN for one or more specs with shared seeds.
    Wer(WerArgs),
    /// List the constellation with its size and rate.
    Enumerate(EnumerateArgs),
    /// Time the code-based encoder against a dense generator product.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct SpecArg {
    /// Spec file, or `builtin:NAME`.
    #[arg(long)]
    spec: String,
}

#[derive(Args, Debug)]
struct RoundtripArgs {
    #[command(flatten)]
    spec: SpecArg,
    /// Random messages to check; all messages when omitted and M <= 2^24.
    #[arg(long)]
    trials: Option<u64>,
    /// Check every message.
    #[arg(long, conflicts_with = "trials")]
    exhaustive: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args, Debug)]
struct ShapingGainArgs {
    /// Standard lattice: Zn(n), Dn(n), E8_int or Leech_int.
    lattice: String,
    /// Number of samples.
    #[arg(long, default_value_t = 100_000)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct WerArgs {
    /// Spec file or `builtin:NAME`; repeat to sweep several specs on shared noise.
    #[arg(long, required = true)]
    spec: Vec<String>,
    /// Es/N0 points in dB as `start:stop:step`, stop inclusive.
    #[arg(long)]
    sweep: String,
    /// Trial cap per point; a point also stops after 200 errors.
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    /// `exhaustive_ml` or `multistage`.
    #[arg(long, default_value = "exhaustive_ml")]
    mode: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EnumerateArgs {
    #[command(flatten)]
    spec: SpecArg,
    /// Use the brute-force region search instead of encoding all messages.
    #[arg(long)]
    oracle: bool,
    /// Refuse constellations larger than this.
    #[arg(long, default_value_t = 1_000_000)]
    limit: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[command(flatten)]
    spec: SpecArg,
    /// Comma-separated replication counts.
    #[arg(long, default_value = "1,2,4,8,16,32,64")]
    copies: String,
    /// Messages per timing round.
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A run that completed but whose check failed.
#[derive(Debug)]
struct CheckFailed(String);

impl std::fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CheckFailed {}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Roundtrip(a) => roundtrip(a),
        Command::ShapingGain(a) => shaping_gain(a),
        Command::Wer(a) => wer(a),
        Command::Enumerate(a) => enumerate(a),
        Command::Bench(a) => bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<CheckFailed>() => {
            eprintln!("check failed: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn load_spec(arg: &str) -> Result<VoronoiCodeSpec> {
    let spec = match arg.strip_prefix("builtin:") {
        Some(name) => VoronoiCodeSpec::builtin(name),
        None => VoronoiCodeSpec::from_file(Path::new(arg)),
    };
    spec.with_context(|| format!("invalid spec '{arg}'"))
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

/// `start:stop:step`, stop inclusive, strictly increasing.
fn parse_sweep(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|t| t.trim().parse::<f64>().map_err(|_| anyhow!("bad sweep value '{t}'")))
        .collect::<Result<_>>()?;
    let [a, b, step] = parts[..] else { bail!("sweep must be start:stop:step") };
    if step.is_nan() || step <= 0.0 || !a.is_finite() || !b.is_finite() {
        bail!("sweep step must be positive");
    }
    let count = ((b - a) / step + 1e-9).floor();
    if count < 0.0 {
        bail!("empty sweep '{s}'");
    }
    Ok((0..=count as usize).map(|i| a + i as f64 * step).collect())
}

fn roundtrip(a: RoundtripArgs) -> Result<()> {
    let spec = load_spec(&a.spec.spec)?;
    let m = spec.message_count_u64();
    let exhaustive = a.exhaustive || (a.trials.is_none() && m.is_some_and(|m| m <= 1 << 24));
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let total = if exhaustive {
        m.ok_or_else(|| anyhow!("constellation too large for an exhaustive check"))?
    } else {
        a.trials.unwrap_or(10_000)
    };
    let mut ok = 0u64;
    let mut first_failure = None;
    for i in 0..total {
        let msg = if exhaustive { spec.message_from_index(i) } else { spec.random_message(&mut rng) };
        let point = spec.encode(&msg)?;
        match spec.index(&point) {
            Ok(back) if back == msg => ok += 1,
            other => {
                first_failure.get_or_insert_with(|| format!("message {msg:?} -> point {point:?} -> {other:?}"));
            }
        }
    }
    println!("# spec: {spec}");
    println!("# seed: {}", a.seed);
    println!("{ok}/{total} ok");
    match first_failure {
        None => Ok(()),
        Some(f) => Err(CheckFailed(format!("first failure: {f}")).into()),
    }
}

fn shaping_gain(a: ShapingGainArgs) -> Result<()> {
    let lattice = standard_lattice(&a.lattice)?;
    let q = Quantizer::for_lattice(&lattice)?;
    let r = second_moment_mc(&q, a.trials, a.seed)?;
    let mut out = output(&a.out)?;
    writeln!(out, "# lattice: {}", a.lattice)?;
    writeln!(out, "# samples: {}, seed: {}", a.trials, a.seed)?;
    writeln!(out, "lattice,samples,nsm,nsm_stderr,gain_db,gain_stderr_db")?;
    writeln!(out, "{},{},{:.8},{:.8},{:.4},{:.4}", a.lattice, r.samples, r.nsm, r.stderr, r.gain_db(), r.gain_stderr_db())?;
    Ok(())
}

fn wer(a: WerArgs) -> Result<()> {
    let sweep = parse_sweep(&a.sweep)?;
    let mode: DecodeMode = a.mode.parse().with_context(|| format!("unknown mode '{}'", a.mode))?;
    let specs: Vec<(String, VoronoiCodeSpec)> = a.spec.iter().map(|s| Ok((s.clone(), load_spec(s)?))).collect::<Result<_>>()?;
    let cfg = SweepConfig::new(a.seed, a.trials, mode);
    let mut out = output(&a.out)?;
    let mut crossings = Vec::new();
    for (name, spec) in &specs {
        let points = wer_sweep(spec, &sweep, &cfg)?;
        let header = vec![
            format!("spec: {name} ({spec})"),
            format!("rate: {} bits/dim", spec.rate()?),
            format!("mode: {mode}, seed: {}, max trials: {}, max errors: {}", cfg.seed, cfg.max_trials, cfg.max_errors),
        ];
        write_csv(&mut out, &header, &points)?;
        crossings.push((name, crossing_db(&points, 1e-3)));
    }
    if let [(n0, Some(c0)), (n1, Some(c1))] = &crossings[..] {
        writeln!(out, "# gap at WER 1e-3: {n0} minus {n1} = {:.3} dB", c0 - c1)?;
    }
    Ok(())
}

fn enumerate(a: EnumerateArgs) -> Result<()> {
    let spec = load_spec(&a.spec.spec)?;
    let m = spec.message_count();
    if spec.message_count_u64().is_none_or(|v| v > a.limit) {
        bail!("constellation has {m} points, above the limit of {}", a.limit);
    }
    let points: Vec<Vec<i64>> = if a.oracle {
        spec.enumerate_constellation_oracle()?.into_iter().collect()
    } else {
        let mut p = spec.constellation(a.limit)?;
        p.sort();
        p
    };
    let mut out = output(&a.out)?;
    writeln!(out, "# spec: {spec}")?;
    writeln!(out, "# M = {m}")?;
    writeln!(out, "# R = {} bits/dim", spec.rate()?)?;
    writeln!(out, "# points: {}", points.len())?;
    for p in &points {
        let s: Vec<String> = p.iter().map(i64::to_string).collect();
        writeln!(out, "{}", s.join(","))?;
    }
    if points.len() as u64 != spec.message_count_u64().unwrap_or(0) {
        return Err(CheckFailed(format!("found {} points, expected M = {m}", points.len())).into());
    }
    Ok(())
}

fn bench(a: BenchArgs) -> Result<()> {
    let spec = load_spec(&a.spec.spec)?;
    let copies: Vec<usize> = a
        .copies
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| anyhow!("bad copy count '{t}'")))
        .collect::<Result<_>>()?;
    if copies.is_empty() || copies.contains(&0) {
        bail!("copy counts must be positive");
    }
    let rows = complexity_sweep(&spec, &copies, a.trials, a.seed)?;
    let mut out = output(&a.out)?;
    writeln!(out, "# spec: {spec}")?;
    writeln!(out, "# trials: {}, seed: {}; times are median ns per message", a.trials, a.seed)?;
    writeln!(out, "n,code_ns,representative_ns,dense_ns,fold_ns,code_share,dense_over_representative,outputs_match")?;
    for r in &rows {
        writeln!(
            out,
            "{},{:.1},{:.1},{:.1},{:.1},{:.3},{:.2},{}",
            r.n,
            r.code_ns,
            r.representative_ns,
            r.dense_ns,
            r.fold_ns,
            r.code_share(),
            r.dense_over_representative(),
            r.outputs_match
        )?;
    }
    out.flush()?;
    if let Some(r) = rows.iter().find(|r| !r.outputs_match) {
        return Err(CheckFailed(format!("paths disagree at n = {}", r.n)).into());
    }
    // Per-dimension dense cost must not fall, up to 10% timing noise.
    for w in rows.windows(2) {
        let (c0, c1) = (w[0].dense_ns / w[0].n as f64, w[1].dense_ns / w[1].n as f64);
        if w[1].n > w[0].n && c1 < 0.9 * c0 {
            return Err(CheckFailed(format!("dense cost per dimension fell from {c0:.2} ns (n = {}) to {c1:.2} ns (n = {})", w[0].n, w[1].n)).into());
        }
    }
    Ok(())
}
