//! Command-line sweeps. Each subcommand writes one row per
//! (parameter tuple, trial) and exits 0 only if every row passes.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::appgen::{dyson_sequence, trotter_sequence, DysonConfig, Family, JsonMatrix, Sequence, TrotterConfig};
use crate::block_encoding::{
    dilate_general, dilate_hermitian, random_block_encoding_set, random_near_identity_set, wrap_with_ancillas,
    DeviationProfile,
};
use crate::error::{Error, Result};
use crate::linalg::{opnorm, pauli_x, pauli_z, random_gaussian, random_hermitian_with_norm};
use crate::mcm::{
    block_product, ceil_log2, gadget_error_exact, gadget_lw19, gadget_pmacg, lower_bound_probe_stats, macg_bound,
    ErrorReport,
};
use crate::oaa::oaa_ambe;
use crate::report::{fmt_float, write_rows, BoostRow, DeviationRow, Field, Format, ProbeRow, Row, UncomputeRow};
use crate::uncompute::{uncompute_general, uncompute_hermitian};

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "BECHAIN_THREADS";

/// Exactness threshold for compression gadgets.
pub const ECG_TOL: f64 = 1e-11;

#[derive(Clone, Debug, PartialEq)]
pub struct UsizeList(pub Vec<usize>);

#[derive(Clone, Debug, PartialEq)]
pub struct F64List(pub Vec<f64>);

/// Comma-separated integers; `a..b` expands to the inclusive range.
pub fn parse_usize_list(s: &str) -> std::result::Result<UsizeList, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((lo, hi)) = part.split_once("..") {
            let lo: usize = lo.trim().parse().map_err(|e| format!("bad range start '{lo}': {e}"))?;
            let hi: usize = hi.trim().parse().map_err(|e| format!("bad range end '{hi}': {e}"))?;
            if lo > hi {
                return Err(format!("empty range {part}"));
            }
            out.extend(lo..=hi);
        } else {
            out.push(part.parse().map_err(|e| format!("bad integer '{part}': {e}"))?);
        }
    }
    if out.is_empty() {
        return Err("list must not be empty".into());
    }
    Ok(UsizeList(out))
}

pub fn parse_f64_list(s: &str) -> std::result::Result<F64List, String> {
    let out = s
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<f64>().map_err(|e| format!("bad number '{p}': {e}")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if out.is_empty() {
        return Err("list must not be empty".into());
    }
    if out.iter().any(|x| !x.is_finite()) {
        return Err("values must be finite".into());
    }
    Ok(F64List(out))
}

#[derive(Parser, Debug)]
#[command(name = "bechain", version, about = "Block-encoding uncomputation and multiplication-gadget experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Output {
    /// Base seed; trial `i` uses `seed + i`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; rows go to standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Single-ancilla uncomputation of random Hermitian (or general) encodings.
    Uncompute {
        #[arg(long, default_value_t = 0.25)]
        delta: f64,
        #[arg(long, default_value = "1e-1,1e-2,1e-3", value_parser = parse_f64_list)]
        eps: F64List,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=4))]
        n: u32,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..=4))]
        a: u32,
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        /// Use random non-Hermitian matrices.
        #[arg(long)]
        general: bool,
        #[command(flatten)]
        output: Output,
    },
    /// p-MACG error against the closed-form bound on near-identity sequences.
    MacgSweep {
        #[arg(long = "K", default_value = "8,16,32", value_parser = parse_usize_list)]
        k: UsizeList,
        #[arg(long, default_value = "1,2", value_parser = parse_usize_list)]
        p: UsizeList,
        #[arg(long, default_value = "0.5", value_parser = parse_f64_list)]
        c: F64List,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=4))]
        n: u32,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=4))]
        a: u32,
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Exactness of the ceil(log2 K) compression gadget on random encodings.
    EcgVerify {
        #[arg(long = "K", default_value = "2..8", value_parser = parse_usize_list)]
        k: UsizeList,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=4))]
        n: u32,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=4))]
        a: u32,
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Numerical search for exact gadgets with too few measurement qubits.
    LbProbe {
        #[arg(long = "K", default_value = "3,4", value_parser = parse_usize_list)]
        k: UsizeList,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        /// System qubits. At n = 1 the 2^{K-1} bad-sequence matrices are
        /// linearly dependent for K = 4, so instance-specific exact gadgets exist.
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..=2))]
        n: u32,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=2))]
        a: u32,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Amplitude amplification of p-MACG outputs.
    OaaDemo {
        #[arg(long = "K", default_value = "8", value_parser = parse_usize_list)]
        k: UsizeList,
        #[arg(long, default_value = "1", value_parser = parse_usize_list)]
        p: UsizeList,
        #[arg(long, default_value = "0.5", value_parser = parse_f64_list)]
        c: F64List,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=3))]
        n: u32,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=3))]
        a: u32,
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Product-formula sequence; defaults to H = X/2 + Z/2.
    GenTrotter {
        /// JSON file with `terms`, `t`, `K`.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long = "K", default_value_t = 16)]
        k: usize,
        /// Gadget size for the end-to-end check.
        #[arg(long, default_value_t = 1)]
        p: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Time-marching sequence; defaults to A(t) = -i cos(t) X / 2.
    GenDyson {
        /// JSON file with `family`, `lambda`, `T`, `K`, optional `micro_steps`.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "T", default_value_t = 1.0)]
        t_total: f64,
        #[arg(long = "K", default_value_t = 16)]
        k: usize,
        #[arg(long, default_value_t = crate::appgen::DEFAULT_MICRO_STEPS)]
        micro_steps: usize,
        #[arg(long, default_value_t = 1)]
        p: usize,
        #[command(flatten)]
        output: Output,
    },
}

fn trial_seeds(seed: u64, trials: u64) -> Vec<u64> {
    (0..trials).map(|t| seed.wrapping_add(t)).collect()
}

fn uncompute_row(delta: f64, eps: f64, n: usize, a: usize, general: bool, seed: u64) -> Result<UncomputeRow> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let norm = (1.0 - delta) * (0.5 + 0.5 * rng.random::<f64>());
    let dim = 1usize << n;
    let report = if general {
        let g = random_gaussian(dim, dim, &mut rng);
        let m = g.scale_real(norm / opnorm(&g)?);
        let va = wrap_with_ancillas(&dilate_general(&m)?, a, seed)?;
        uncompute_general(&va, delta, eps)?.1
    } else {
        let h = random_hermitian_with_norm(dim, norm, &mut rng);
        let vh = wrap_with_ancillas(&dilate_hermitian(&h)?, a, seed)?;
        uncompute_hermitian(&vh, delta, eps)?.1
    };
    Ok(UncomputeRow { report, seed })
}

/// Rows for every `(eps, trial)` in that order.
pub fn uncompute_sweep(
    delta: f64,
    eps: &[f64],
    n: usize,
    a: usize,
    trials: u64,
    general: bool,
    seed: u64,
) -> Result<Vec<UncomputeRow>> {
    let tasks: Vec<(f64, u64)> =
        eps.iter().flat_map(|&e| trial_seeds(seed, trials).into_iter().map(move |s| (e, s))).collect();
    tasks.par_iter().map(|&(e, s)| uncompute_row(delta, e, n, a, general, s)).collect()
}

fn near_identity_eta(k: usize, c: f64) -> Result<f64> {
    let eta = c / k as f64;
    if !(c > 0.0) || eta >= 1.0 {
        return Err(Error::InvalidArgument(format!("need 0 < c < K, got c={c}, K={k}")));
    }
    Ok(eta)
}

/// One row per `(K, p, c, trial)`, in that order.
pub fn macg_sweep(
    ks: &[usize],
    ps: &[usize],
    cs: &[f64],
    n: usize,
    a: usize,
    trials: u64,
    seed: u64,
) -> Result<Vec<ErrorReport>> {
    let mut tasks = Vec::new();
    for &k in ks {
        for &p in ps {
            for &c in cs {
                for s in trial_seeds(seed, trials) {
                    tasks.push((k, p, c, s));
                }
            }
        }
    }
    tasks
        .par_iter()
        .map(|&(k, p, c, s)| {
            let encs = random_near_identity_set(n, a, k, near_identity_eta(k, c)?, s)?;
            let circ = gadget_pmacg(&encs, p)?;
            let e_measured = gadget_error_exact(&circ, &block_product(&encs)?)?;
            let e_bound = match macg_bound(k, p, c) {
                Ok(b) => Some(b),
                Err(Error::BoundRegime(_)) => None,
                Err(e) => return Err(e),
            };
            let eta_max = DeviationProfile::measure(&encs).eta_max;
            Ok(ErrorReport { k, m: p, p: Some(p), c: Some(c), eta_max, e_measured, e_bound, seed: s })
        })
        .collect()
}

/// One row per `(K, trial)`; the bound column holds the exactness threshold.
pub fn ecg_sweep(ks: &[usize], n: usize, a: usize, trials: u64, seed: u64) -> Result<Vec<ErrorReport>> {
    let tasks: Vec<(usize, u64)> =
        ks.iter().flat_map(|&k| trial_seeds(seed, trials).into_iter().map(move |s| (k, s))).collect();
    tasks
        .par_iter()
        .map(|&(k, s)| {
            let encs = random_block_encoding_set(n, a, k, s)?;
            let circ = gadget_lw19(&encs)?;
            let e_measured = gadget_error_exact(&circ, &block_product(&encs)?)?;
            let eta_max = DeviationProfile::measure(&encs).eta_max;
            Ok(ErrorReport { k, m: circ.m, p: None, c: None, eta_max, e_measured, e_bound: Some(ECG_TOL), seed: s })
        })
        .collect()
}

/// Residual thresholds: at least 1e-3 below the bound, at most 1e-8 at it.
pub fn probe_sweep(
    ks: &[usize],
    m: usize,
    restarts: usize,
    n: usize,
    a: usize,
    trials: u64,
    seed: u64,
) -> Result<Vec<ProbeRow>> {
    let tasks: Vec<(usize, u64)> =
        ks.iter().flat_map(|&k| trial_seeds(seed, trials).into_iter().map(move |s| (k, s))).collect();
    tasks
        .par_iter()
        .map(|&(k, s)| {
            let encs = random_block_encoding_set(n, a, k, s)?;
            let stats = lower_bound_probe_stats(&encs, m, restarts, s)?;
            let below_bound = m < ceil_log2(k);
            Ok(ProbeRow {
                k,
                m,
                restarts,
                best: stats.best,
                mean: stats.mean,
                worst: stats.worst,
                threshold: if below_bound { 1e-3 } else { 1e-8 },
                below_bound,
                seed: s,
            })
        })
        .collect()
}

pub fn oaa_sweep(
    ks: &[usize],
    ps: &[usize],
    cs: &[f64],
    n: usize,
    a: usize,
    trials: u64,
    seed: u64,
) -> Result<Vec<BoostRow>> {
    let mut tasks = Vec::new();
    for &k in ks {
        for &p in ps {
            for &c in cs {
                for s in trial_seeds(seed, trials) {
                    tasks.push((k, p, c, s));
                }
            }
        }
    }
    tasks
        .par_iter()
        .map(|&(k, p, cc, s)| {
            let encs = random_near_identity_set(n, a, k, near_identity_eta(k, cc)?, s)?;
            let circ = gadget_pmacg(&encs, p)?;
            let mut rng = ChaCha20Rng::seed_from_u64(s);
            rng.set_stream(1);
            let input = random_gaussian(1 << n, 1, &mut rng).into_data();
            let out = oaa_ambe(&circ, &block_product(&encs)?, &input)?;
            Ok(BoostRow {
                k,
                p,
                c: cc,
                eps: out.eps,
                alpha_before: out.boost.alpha_before,
                iterations: out.boost.k,
                alpha_after: out.boost.alpha_after,
                fidelity: out.fidelity,
                seed: s,
            })
        })
        .collect()
}

/// Gadget error of `p`-MACG on the sequence and the bound at its measured `c`.
pub fn sequence_gadget_check(seq: &Sequence, p: usize) -> Result<(f64, f64)> {
    let circ = gadget_pmacg(&seq.encodings, p)?;
    let e = gadget_error_exact(&circ, &block_product(&seq.encodings)?)?;
    let c = seq.measured_c().max(f64::MIN_POSITIVE);
    Ok((e, macg_bound(seq.encodings.len(), p, c)?))
}

pub fn deviation_rows(seq: &Sequence) -> Vec<DeviationRow> {
    let limit = seq.eta_limit();
    seq.profile.etas.iter().enumerate().map(|(index, &eta)| DeviationRow { index, eta, eta_limit: limit }).collect()
}

pub fn default_trotter_config(t: f64, k: usize) -> TrotterConfig {
    let half = |m: crate::linalg::CMatrix| JsonMatrix::from_matrix(&m.scale_real(0.5));
    TrotterConfig { terms: vec![half(pauli_x()), half(pauli_z())], t, k }
}

pub fn default_dyson_config(t_total: f64, k: usize, micro_steps: usize) -> DysonConfig {
    DysonConfig {
        family: Family::Cosine { h: JsonMatrix::from_matrix(&pauli_x()), scale: 0.5, omega: 1.0 },
        lambda: 0.5,
        t_total,
        k,
        micro_steps,
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn summary_table<R: Row>(rows: &[R]) -> String {
    let header: Vec<String> = R::header().iter().map(|s| s.to_string()).collect();
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            r.fields()
                .into_iter()
                .map(|f| match f {
                    Field::Float(x) | Field::OptFloat(Some(x)) => format!("{x:.4e}"),
                    other => format!("{}", FieldText(&other)),
                })
                .collect()
        })
        .collect();
    let widths: Vec<usize> = (0..header.len())
        .map(|j| body.iter().map(|r| r[j].len()).chain([header[j].len()]).max().unwrap_or(0))
        .collect();
    let line = |cells: &[String]| {
        cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect::<Vec<_>>().join("  ")
    };
    let mut out = line(&header);
    for r in &body {
        out.push('\n');
        out.push_str(&line(r));
    }
    let passed = rows.iter().filter(|r| r.pass()).count();
    out.push_str(&format!("\n{} rows, {} pass, {} fail", rows.len(), passed, rows.len() - passed));
    out
}

struct FieldText<'a>(&'a Field);

impl std::fmt::Display for FieldText<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.0 {
            Field::Int(v) | Field::OptInt(Some(v)) => write!(f, "{v}"),
            Field::Float(x) | Field::OptFloat(Some(x)) => write!(f, "{}", fmt_float(*x)),
            Field::OptInt(None) | Field::OptFloat(None) => write!(f, "-"),
            Field::Bool(b) => write!(f, "{b}"),
        }
    }
}

/// Writes rows, prints the summary, and returns the number of failures.
fn emit<R: Row>(rows: &[R], output: &Output, extra: Option<String>) -> Result<usize> {
    let mut summary = summary_table(rows);
    if let Some(extra) = extra {
        summary.push('\n');
        summary.push_str(&extra);
    }
    match &output.out {
        Some(path) => {
            let file = std::fs::File::create(path)?;
            let mut w = std::io::BufWriter::new(file);
            write_rows(rows, output.format, &mut w)?;
            w.flush()?;
            println!("{summary}");
        }
        None => {
            let stdout = std::io::stdout();
            write_rows(rows, output.format, stdout.lock())?;
            eprintln!("{summary}");
        }
    }
    Ok(rows.iter().filter(|r| !r.pass()).count())
}

fn sequence_summary(seq: &Sequence, p: usize) -> Result<(String, bool)> {
    let (e, bound) = sequence_gadget_check(seq, p)?;
    let ok = e <= bound;
    Ok((
        format!(
            "{} encodings, c = {}, measured c = {}, eta_max = {}; {p}-MACG error {} vs bound {} ({})",
            seq.encodings.len(),
            fmt_float(seq.c),
            fmt_float(seq.measured_c()),
            fmt_float(seq.profile.eta_max),
            fmt_float(e),
            fmt_float(bound),
            if ok { "pass" } else { "fail" }
        ),
        ok,
    ))
}

fn execute(command: &Command) -> Result<usize> {
    match command {
        Command::Uncompute { delta, eps, n, a, trials, general, output } => {
            let rows = uncompute_sweep(*delta, &eps.0, *n as usize, *a as usize, *trials, *general, output.seed)?;
            emit(&rows, output, None)
        }
        Command::MacgSweep { k, p, c, n, a, trials, output } => {
            let rows = macg_sweep(&k.0, &p.0, &c.0, *n as usize, *a as usize, *trials, output.seed)?;
            emit(&rows, output, None)
        }
        Command::EcgVerify { k, n, a, trials, output } => {
            let rows = ecg_sweep(&k.0, *n as usize, *a as usize, *trials, output.seed)?;
            emit(&rows, output, None)
        }
        Command::LbProbe { k, m, restarts, n, a, trials, output } => {
            let rows = probe_sweep(&k.0, *m, *restarts, *n as usize, *a as usize, *trials, output.seed)?;
            emit(&rows, output, None)
        }
        Command::OaaDemo { k, p, c, n, a, trials, output } => {
            let rows = oaa_sweep(&k.0, &p.0, &c.0, *n as usize, *a as usize, *trials, output.seed)?;
            emit(&rows, output, None)
        }
        Command::GenTrotter { config, t, k, p, output } => {
            let cfg = match config {
                Some(path) => read_json::<TrotterConfig>(path)?,
                None => default_trotter_config(*t, *k),
            };
            let seq = trotter_sequence(&cfg.to_spec()?)?;
            let (text, ok) = sequence_summary(&seq, *p)?;
            Ok(emit(&deviation_rows(&seq), output, Some(text))? + usize::from(!ok))
        }
        Command::GenDyson { config, t_total, k, micro_steps, p, output } => {
            let cfg = match config {
                Some(path) => read_json::<DysonConfig>(path)?,
                None => default_dyson_config(*t_total, *k, *micro_steps),
            };
            let seq = dyson_sequence(&cfg.to_spec()?)?;
            let (text, ok) = sequence_summary(&seq, *p)?;
            Ok(emit(&deviation_rows(&seq), output, Some(text))? + usize::from(!ok))
        }
    }
}

fn is_usage_error(e: &Error) -> bool {
    matches!(e, Error::InvalidArgument(_) | Error::DimensionCap { .. } | Error::Parse(_) | Error::BoundRegime(_))
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::InvalidArgument(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Error::InvalidArgument(e.to_string()))
}

/// Runs a parsed command and returns the process exit code: 0 if every row
/// passes, 1 on failed rows or computation errors, 2 on usage errors.
pub fn run(cli: Cli) -> i32 {
    let result = thread_pool().and_then(|pool| pool.install(|| execute(&cli.command)));
    match result {
        Ok(0) => 0,
        Ok(failed) => {
            eprintln!("{failed} row(s) failed");
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            if is_usage_error(&e) {
                2
            } else {
                1
            }
        }
    }
}

/// Parses `args` (including the program name) and runs.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            code
        }
    }
}
