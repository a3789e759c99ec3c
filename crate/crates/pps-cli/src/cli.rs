//! Command-line surface: generate / transform / estimate / analytic /
//! compare / reproduce.
//!
//! Exit codes are the machine contract: 0 success (and comparison pass),
//! 1 comparison fail, 2 usage error, malformed file or violated precondition.

use std::ffi::OsString;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use pps_core::analytics::{
    self, g2_gapped, g2_prob_removal, g2_pulsed, g2_two_level, kim_g2_from_w, uniform_grid,
    wn_gapped, AnalyticCurve,
};
use pps_core::estimators::{count_coincidences, estimate_rate, estimate_waiting};
use pps_core::generate::gen_poisson;
use pps_core::transforms::{
    delay_insert, gap_insert, gap_remove, gap_remove_probabilistic, gen_pulsed, DelaySpec,
    GapSpec, JitterSpec, RemovalProbability,
};
use pps_core::{EventStream, Rate, Seed};

use crate::compare::{compare_files, write_report};
use crate::config::{ConfigFile, Resolver};
use crate::formats::{
    read_stream, write_curve, write_g2_histogram, write_stream_binary, write_stream_text,
    write_waiting_histogram,
};
use crate::parallel::{estimate_g2_parallel, thread_budget};
use crate::reproduce;

#[derive(Parser)]
#[command(
    name = "pps",
    about = "Photon point-process lab: synthesize click streams, transform them, estimate correlations and check them against closed forms",
    version
)]
struct Cli {
    /// TOML config file supplying defaults for any parameter
    /// (precedence: flags > config > built-ins).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a stream from a seed.
    #[command(subcommand)]
    Generate(GenerateCmd),
    /// Apply a stream-to-stream construction.
    Transform(TransformArgs),
    /// Estimate statistics from raw event times.
    Estimate(EstimateArgs),
    /// Evaluate a closed-form curve on a τ grid.
    Analytic(AnalyticArgs),
    /// Compare a simulated histogram against an analytic curve.
    Compare(CompareArgs),
    /// Run a pinned end-to-end recipe and verify it passes.
    Reproduce(ReproduceArgs),
}

#[derive(Subcommand)]
enum GenerateCmd {
    /// Homogeneous Poisson stream.
    Poisson(PoissonArgs),
    /// Pulse train with per-pulse jitter.
    Pulsed(PulsedArgs),
}

#[derive(Args)]
struct PoissonArgs {
    /// Events per second.
    #[arg(long)]
    rate: Option<f64>,
    /// Observation window in seconds.
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the text format instead of binary.
    #[arg(long)]
    text: bool,
}

#[derive(Args)]
struct PulsedArgs {
    /// Pulse period in seconds.
    #[arg(long)]
    period: Option<f64>,
    /// Number of pulses (one photon each).
    #[arg(long)]
    pulses: Option<u64>,
    /// none | gaussian:SIGMA | exponential:RATE
    #[arg(long)]
    jitter: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    text: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum TransformKind {
    GapRemove,
    GapInsert,
    GapRemoveProb,
    DelayInsert,
}

impl TransformKind {
    fn section(self) -> &'static str {
        match self {
            TransformKind::GapRemove => "transform.gap-remove",
            TransformKind::GapInsert => "transform.gap-insert",
            TransformKind::GapRemoveProb => "transform.gap-remove-prob",
            TransformKind::DelayInsert => "transform.delay-insert",
        }
    }
}

#[derive(Args)]
struct TransformArgs {
    #[arg(value_enum)]
    kind: TransformKind,
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Time gap (gap-remove, gap-insert, gap-remove-prob).
    #[arg(long)]
    tg: Option<f64>,
    /// Gap enforcement probability (gap-remove-prob).
    #[arg(long)]
    p: Option<f64>,
    /// const:T | exp:RATE | maxwell:A (delay-insert).
    #[arg(long)]
    delay: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    text: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimateKind {
    G2,
    Waiting,
    Rate,
    Coincidences,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(value_enum)]
    kind: EstimateKind,
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    bin_width: Option<f64>,
    #[arg(long)]
    tau_max: Option<f64>,
    /// Waiting order n, or coincidence fold k.
    #[arg(long)]
    order: Option<usize>,
    /// Coincidence window in seconds.
    #[arg(long)]
    window: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AnalyticKind {
    G2Gapped,
    Wn,
    #[value(name = "g2-2ls")]
    G2TwoLevel,
    G2Prob,
    G2Pulsed,
    KimOracle,
}

impl AnalyticKind {
    fn section(self) -> &'static str {
        match self {
            AnalyticKind::G2Gapped => "analytic.g2-gapped",
            AnalyticKind::Wn => "analytic.wn",
            AnalyticKind::G2TwoLevel => "analytic.g2-2ls",
            AnalyticKind::G2Prob => "analytic.g2-prob",
            AnalyticKind::G2Pulsed => "analytic.g2-pulsed",
            AnalyticKind::KimOracle => "analytic.kim-oracle",
        }
    }
}

#[derive(Args)]
struct AnalyticArgs {
    #[arg(value_enum)]
    kind: AnalyticKind,
    /// Backbone Poisson rate γ.
    #[arg(long)]
    gamma: Option<f64>,
    /// Time gap t_G.
    #[arg(long)]
    tg: Option<f64>,
    /// Waiting order n.
    #[arg(long)]
    order: Option<usize>,
    /// Gap enforcement probability.
    #[arg(long)]
    p: Option<f64>,
    /// Two-level coherence rate.
    #[arg(long)]
    gamma_2ls: Option<f64>,
    /// Pulse period.
    #[arg(long)]
    period: Option<f64>,
    /// gaussian:SIGMA | exponential:RATE
    #[arg(long)]
    jitter: Option<String>,
    #[arg(long)]
    n_peaks: Option<usize>,
    /// Waiting-time curve file for the series oracle.
    #[arg(long)]
    w1: Option<PathBuf>,
    /// Actual stream rate dividing the series.
    #[arg(long)]
    gamma_emission: Option<f64>,
    #[arg(long)]
    n_terms: Option<usize>,
    /// Grid upper end.
    #[arg(long)]
    tau_max: Option<f64>,
    /// Grid step.
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Simulated histogram CSV.
    #[arg(long)]
    sim: Option<PathBuf>,
    /// Analytic curve CSV.
    #[arg(long)]
    analytic: Option<PathBuf>,
    /// Max |z| allowed.
    #[arg(long)]
    threshold: Option<f64>,
    /// Support boundary (e.g. the time gap): bins ending below it must be
    /// exactly empty; bins straddling it are excluded from scoring.
    #[arg(long)]
    edge: Option<f64>,
    /// Where to write the JSON report.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Recipe {
    Fig1b,
    Fig3,
    Fig4c,
}

#[derive(Args)]
struct ReproduceArgs {
    #[arg(value_enum)]
    recipe: Recipe,
    /// Output directory for histograms, curves and reports.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

/// Parse and dispatch. Returns the process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("pps: error: {e:#}");
            2
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    let cfg = ConfigFile::load(cli.config.as_deref())?;
    match cli.command {
        Command::Generate(GenerateCmd::Poisson(a)) => cmd_poisson(&cfg, a),
        Command::Generate(GenerateCmd::Pulsed(a)) => cmd_pulsed(&cfg, a),
        Command::Transform(a) => cmd_transform(&cfg, a),
        Command::Estimate(a) => cmd_estimate(&cfg, a),
        Command::Analytic(a) => cmd_analytic(&cfg, a),
        Command::Compare(a) => cmd_compare(&cfg, a),
        Command::Reproduce(a) => {
            let mut r = Resolver::new(&cfg, "reproduce");
            let out_dir = r
                .path("out-dir", a.out_dir)
                .unwrap_or_else(|_| PathBuf::from("reproduce-out"));
            reproduce::run(a.recipe, &out_dir)
        }
    }
}

fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

/// Wrap the generator's own metadata with the effective CLI configuration,
/// so every artifact records how it was produced.
fn augment_meta(stream: EventStream, effective: &[(String, String)]) -> EventStream {
    let pairs = effective
        .iter()
        .map(|(k, v)| format!(r#""{}":"{}""#, json_escape(k), json_escape(v)))
        .collect::<Vec<_>>()
        .join(",");
    let meta = format!(r#"{{"op":{},"cli":{{{pairs}}}}}"#, stream.meta());
    EventStream::from_parts_unchecked(stream.times().to_vec(), stream.duration(), meta)
}

fn write_stream_out(path: &std::path::Path, stream: &EventStream, text: bool) -> Result<()> {
    if text {
        write_stream_text(path, stream)?;
    } else {
        write_stream_binary(path, stream)?;
    }
    Ok(())
}

fn parse_jitter(spec: &str) -> Result<JitterSpec> {
    let spec = spec.trim();
    if spec == "none" {
        return Ok(JitterSpec::None);
    }
    let (kind, value) = spec
        .split_once(':')
        .ok_or_else(|| anyhow!("jitter must be none, gaussian:SIGMA or exponential:RATE"))?;
    let v: f64 = value
        .parse()
        .with_context(|| format!("bad jitter parameter {value:?}"))?;
    match kind {
        "gaussian" => Ok(JitterSpec::Gaussian { sigma: v }),
        "exponential" => Ok(JitterSpec::Exponential { rate: v }),
        other => bail!("unknown jitter kind {other:?}"),
    }
}

fn parse_delay(spec: &str) -> Result<DelaySpec> {
    let (kind, value) = spec
        .trim()
        .split_once(':')
        .ok_or_else(|| anyhow!("delay must be const:T, exp:RATE or maxwell:A"))?;
    let v: f64 = value
        .parse()
        .with_context(|| format!("bad delay parameter {value:?}"))?;
    match kind {
        "const" => Ok(DelaySpec::Constant { t_gap: v }),
        "exp" => Ok(DelaySpec::Exponential { rate: v }),
        "maxwell" => Ok(DelaySpec::MaxwellType { scale: v }),
        other => bail!("unknown delay kind {other:?}"),
    }
}

fn cmd_poisson(cfg: &ConfigFile, a: PoissonArgs) -> Result<i32> {
    let mut r = Resolver::new(cfg, "generate.poisson");
    let rate = r.f64("rate", a.rate)?;
    let duration = r.f64("duration", a.duration)?;
    let seed = r.u64_or("seed", a.seed, 0)?;
    let out = r.path("out", a.out)?;
    let stream = gen_poisson(Rate::new(rate)?, duration, Seed(seed))?;
    let stream = augment_meta(stream, r.effective());
    write_stream_out(&out, &stream, a.text)?;
    println!(
        "wrote {} events over {}s to {}",
        stream.len(),
        stream.duration(),
        out.display()
    );
    Ok(0)
}

fn cmd_pulsed(cfg: &ConfigFile, a: PulsedArgs) -> Result<i32> {
    let mut r = Resolver::new(cfg, "generate.pulsed");
    let period = r.f64("period", a.period)?;
    let pulses = r.u64("pulses", a.pulses)?;
    let jitter = parse_jitter(&r.string("jitter", a.jitter)?)?;
    let seed = r.u64_or("seed", a.seed, 0)?;
    let out = r.path("out", a.out)?;
    let stream = gen_pulsed(period, pulses, &jitter, Seed(seed))?;
    let stream = augment_meta(stream, r.effective());
    write_stream_out(&out, &stream, a.text)?;
    println!(
        "wrote {} events over {}s to {}",
        stream.len(),
        stream.duration(),
        out.display()
    );
    Ok(0)
}

fn cmd_transform(cfg: &ConfigFile, a: TransformArgs) -> Result<i32> {
    let mut r = Resolver::new(cfg, a.kind.section());
    let input = r.path("in", a.input)?;
    let out = r.path("out", a.out)?;
    let stream = read_stream(&input)?;
    let result = match a.kind {
        TransformKind::GapRemove => {
            let tg = r.f64("tg", a.tg)?;
            gap_remove(&stream, GapSpec::new(tg)?)
        }
        TransformKind::GapInsert => {
            let tg = r.f64("tg", a.tg)?;
            gap_insert(&stream, GapSpec::new(tg)?)
        }
        TransformKind::GapRemoveProb => {
            let tg = r.f64("tg", a.tg)?;
            let p = r.f64("p", a.p)?;
            let seed = r.u64_or("seed", a.seed, 0)?;
            gap_remove_probabilistic(
                &stream,
                GapSpec::new(tg)?,
                RemovalProbability::new(p)?,
                Seed(seed),
            )
        }
        TransformKind::DelayInsert => {
            let delay = parse_delay(&r.string("delay", a.delay)?)?;
            let seed = r.u64_or("seed", a.seed, 0)?;
            delay_insert(&stream, &delay, Seed(seed))?
        }
    };
    let result = augment_meta(result, r.effective());
    write_stream_out(&out, &result, a.text)?;
    println!(
        "{} -> {}: {} of {} events kept, duration {}s",
        input.display(),
        out.display(),
        result.len(),
        stream.len(),
        result.duration()
    );
    Ok(0)
}

fn cmd_estimate(cfg: &ConfigFile, a: EstimateArgs) -> Result<i32> {
    let section = match a.kind {
        EstimateKind::G2 => "estimate.g2",
        EstimateKind::Waiting => "estimate.waiting",
        EstimateKind::Rate => "estimate.rate",
        EstimateKind::Coincidences => "estimate.coincidences",
    };
    let mut r = Resolver::new(cfg, section);
    let input = r.path("in", a.input)?;
    let stream = read_stream(&input)?;
    match a.kind {
        EstimateKind::G2 => {
            let bin_width = r.f64("bin-width", a.bin_width)?;
            let tau_max = r.f64("tau-max", a.tau_max)?;
            let out = r.path("out", a.out)?;
            let h = estimate_g2_parallel(&stream, bin_width, tau_max, thread_budget())?;
            let mut extra = vec![("source".to_string(), input.display().to_string())];
            extra.extend(r.effective().iter().cloned());
            write_g2_histogram(&out, &h, &extra)?;
            println!(
                "g2 histogram: {} bins, {} pairs, rate_hat {} -> {}",
                h.n_bins(),
                h.pair_counts().iter().sum::<u64>(),
                h.rate_hat(),
                out.display()
            );
        }
        EstimateKind::Waiting => {
            let order = r.usize("order", a.order)?;
            let bin_width = r.f64("bin-width", a.bin_width)?;
            let tau_max = r.f64("tau-max", a.tau_max)?;
            let out = r.path("out", a.out)?;
            let h = estimate_waiting(&stream, order, bin_width, tau_max)?;
            let mut extra = vec![("source".to_string(), input.display().to_string())];
            extra.extend(r.effective().iter().cloned());
            write_waiting_histogram(&out, &h, &extra)?;
            println!(
                "order-{order} waiting histogram: {} samples -> {}",
                h.n_samples(),
                out.display()
            );
        }
        EstimateKind::Rate => {
            let rate = estimate_rate(&stream)?;
            println!("rate = {} events/s", rate.per_sec());
            if let Ok(out) = r.path("out", a.out) {
                let json = format!(
                    r#"{{"schema":1,"kind":"rate","n_events":{},"duration":{},"rate":{}}}"#,
                    stream.len(),
                    stream.duration(),
                    rate.per_sec()
                );
                crate::formats::atomic_write(&out, |w| writeln!(w, "{json}"))?;
            }
        }
        EstimateKind::Coincidences => {
            let window = r.f64("window", a.window)?;
            let order = r.usize("order", a.order)?;
            let count = count_coincidences(&stream, window, order)?;
            println!("{order}-fold coincidences within {window}s: {count}");
            if let Ok(out) = r.path("out", a.out) {
                let json = format!(
                    r#"{{"schema":1,"kind":"coincidences","window":{window},"order":{order},"count":{count}}}"#
                );
                crate::formats::atomic_write(&out, |w| writeln!(w, "{json}"))?;
            }
        }
    }
    Ok(0)
}

fn grid_for(r: &mut Resolver, tau_max: Option<f64>, step: Option<f64>) -> Result<Vec<f64>> {
    let tau_max = r.f64("tau-max", tau_max)?;
    let step = r.f64("step", step)?;
    if !(step > 0.0 && tau_max > step) {
        bail!("need 0 < step < tau-max");
    }
    Ok(uniform_grid(step, (tau_max / step).ceil() as usize))
}

fn cmd_analytic(cfg: &ConfigFile, a: AnalyticArgs) -> Result<i32> {
    let mut r = Resolver::new(cfg, a.kind.section());
    let curve: AnalyticCurve = match a.kind {
        AnalyticKind::G2Gapped => {
            let gamma = Rate::new(r.f64("gamma", a.gamma)?)?;
            let gap = GapSpec::new(r.f64("tg", a.tg)?)?;
            let grid = grid_for(&mut r, a.tau_max, a.step)?;
            g2_gapped(grid, gamma, gap)
        }
        AnalyticKind::Wn => {
            let gamma = Rate::new(r.f64("gamma", a.gamma)?)?;
            let gap = GapSpec::new(r.f64("tg", a.tg)?)?;
            let order = r.usize("order", a.order)?;
            let grid = grid_for(&mut r, a.tau_max, a.step)?;
            wn_gapped(grid, order, gamma, gap)?
        }
        AnalyticKind::G2TwoLevel => {
            let gamma = Rate::new(r.f64("gamma-2ls", a.gamma_2ls)?)?;
            let grid = grid_for(&mut r, a.tau_max, a.step)?;
            g2_two_level(grid, gamma)
        }
        AnalyticKind::G2Prob => {
            let gamma = Rate::new(r.f64("gamma", a.gamma)?)?;
            let gap = GapSpec::new(r.f64("tg", a.tg)?)?;
            let p = RemovalProbability::new(r.f64("p", a.p)?)?;
            let grid = grid_for(&mut r, a.tau_max, a.step)?;
            g2_prob_removal(grid, gamma, gap, p)?
        }
        AnalyticKind::G2Pulsed => {
            let period = r.f64("period", a.period)?;
            let jitter = parse_jitter(&r.string("jitter", a.jitter)?)?;
            let n_peaks = r.usize_or("n-peaks", a.n_peaks, 10)?;
            let grid = grid_for(&mut r, a.tau_max, a.step)?;
            g2_pulsed(grid, period, &jitter, n_peaks)?
        }
        AnalyticKind::KimOracle => {
            let w1_path = r.path("w1", a.w1)?;
            let emission = Rate::new(r.f64("gamma-emission", a.gamma_emission)?)?;
            let n_terms = r.usize_or("n-terms", a.n_terms, 12)?;
            let table = crate::formats::read_table(&w1_path)?;
            let taus: Vec<f64> = table.rows.iter().map(|row| row.bin_lo).collect();
            let values: Vec<f64> = table.rows.iter().map(|row| row.value).collect();
            let w1 = AnalyticCurve::new(taus, values, vec![], analytics::FormulaId::WnGapped);
            kim_g2_from_w(&w1, emission, n_terms)?
        }
    };
    let out = r.path("out", a.out)?;
    write_curve(&out, &curve, r.effective())?;
    println!(
        "{}: {} grid points -> {}",
        curve.formula_id().as_str(),
        curve.len(),
        out.display()
    );
    Ok(0)
}

fn cmd_compare(cfg: &ConfigFile, a: CompareArgs) -> Result<i32> {
    let mut r = Resolver::new(cfg, "compare");
    let sim = r.path("sim", a.sim)?;
    let analytic = r.path("analytic", a.analytic)?;
    let threshold = r.f64_or("threshold", a.threshold, 5.0)?;
    let edge = match a.edge {
        Some(e) => Some(e),
        None => r
            .f64_or("edge", None, f64::NAN)
            .ok()
            .filter(|e| e.is_finite()),
    };
    let report = compare_files(&sim, &analytic, threshold, edge)?;
    if let Ok(report_path) = r.path("report", a.report) {
        write_report(&report_path, &report)?;
    }
    println!(
        "verdict: {} (max|z| = {:.3}, rms z = {:.3}, {} bins scored, {} excluded, {} zero-bin failures)",
        report.verdict,
        report.max_abs_z,
        report.rms_z,
        report.n_bins,
        report.excluded_bins,
        report.zero_bin_failures
    );
    Ok(if report.passed() { 0 } else { 1 })
}
