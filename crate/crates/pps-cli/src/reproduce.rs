//! Pinned end-to-end recipes: generate → transform → estimate → verify,
//! with fixed seeds and sizes, writing plot-ready CSV and a JSON report.
//!
//! fig1b — dim gapped source, γt_G = 1e-3: g² is the step profile; verified
//!         by per-bin z-scores against the closed form.
//! fig3  — γt_G = 3: superbunching jump at the gap and damped oscillations;
//!         verified by per-bin z-scores against the closed form.
//! fig4c — γt_G = 25: a pulse-train-like comb. Per-bin z-scoring is the
//!         wrong instrument here (bin-center vs bin-average bias at the
//!         sharp peak onsets dwarfs the statistical errors), so the verdict
//!         checks the structure the figure actually exhibits: an exact zero
//!         region, the rate law, a markedly asymmetric first peak, strictly
//!         decaying peak maxima, and peak positions lagging ever further
//!         behind the n·t_G comb.

use std::path::Path;

use anyhow::{Context, Result};

use pps_core::analytics::{g2_gapped, uniform_grid};
use pps_core::estimators::CorrelationHistogram;
use pps_core::generate::gen_poisson;
use pps_core::transforms::{gap_remove, GapSpec};
use pps_core::{EventStream, Rate, Seed};

use crate::cli::Recipe;
use crate::compare::{compare, write_report, ComparisonInputs, InputDigest};
use crate::formats::{self, read_table, write_curve, write_g2_histogram};
use crate::parallel::{estimate_g2_parallel, thread_budget};

struct GappedRecipe {
    name: &'static str,
    gamma: f64,
    t_gap: f64,
    duration: f64,
    seed: u64,
    bin_width: f64,
    tau_max: f64,
    curve_step: f64,
    threshold: f64,
}

const FIG1B: GappedRecipe = GappedRecipe {
    name: "fig1b",
    gamma: 1.0,
    t_gap: 1e-3,
    duration: 4e7,
    seed: 101,
    bin_width: 1e-3,
    tau_max: 0.02,
    curve_step: 5e-5,
    threshold: 5.0,
};

const FIG3: GappedRecipe = GappedRecipe {
    name: "fig3",
    gamma: 1.0,
    t_gap: 3.0,
    duration: 4e7,
    seed: 102,
    bin_width: 0.03,
    tau_max: 30.0,
    curve_step: 3e-3,
    threshold: 5.0,
};

const FIG4C: GappedRecipe = GappedRecipe {
    name: "fig4c",
    gamma: 1.0,
    t_gap: 25.0,
    duration: 5.2e7,
    seed: 103,
    bin_width: 0.25,
    tau_max: 150.0,
    curve_step: 0.025,
    threshold: 5.0, // unused; fig4c verdict is structural
};

pub fn run(recipe: Recipe, out_dir: &Path) -> Result<i32> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    match recipe {
        Recipe::Fig1b => run_compare_recipe(&FIG1B, out_dir),
        Recipe::Fig3 => run_compare_recipe(&FIG3, out_dir),
        Recipe::Fig4c => run_fig4c(out_dir),
    }
}

fn build_gapped(r: &GappedRecipe) -> Result<EventStream> {
    let gamma = Rate::new(r.gamma)?;
    let raw = gen_poisson(gamma, r.duration, Seed(r.seed))?;
    let gapped = gap_remove(&raw, GapSpec::new(r.t_gap)?);
    println!(
        "{}: gapped stream has {} events at rate {:.6}",
        r.name,
        gapped.len(),
        gapped.len() as f64 / gapped.duration()
    );
    Ok(gapped)
}

fn pinned_params(r: &GappedRecipe) -> Vec<(String, String)> {
    vec![
        ("recipe".to_string(), r.name.to_string()),
        ("gamma".to_string(), format!("{}", r.gamma)),
        ("t_gap".to_string(), format!("{}", r.t_gap)),
        ("sim_duration".to_string(), format!("{}", r.duration)),
        ("seed".to_string(), format!("{}", r.seed)),
    ]
}

fn write_artifacts(
    r: &GappedRecipe,
    hist: &CorrelationHistogram,
    out_dir: &Path,
) -> Result<(std::path::PathBuf, std::path::PathBuf)> {
    let pinned = pinned_params(r);
    let hist_path = out_dir.join(format!("{}_g2.csv", r.name));
    write_g2_histogram(&hist_path, hist, &pinned)?;
    let n_steps = ((r.tau_max + 2.0 * r.bin_width) / r.curve_step).ceil() as usize;
    let curve = g2_gapped(
        uniform_grid(r.curve_step, n_steps),
        Rate::new(r.gamma)?,
        GapSpec::new(r.t_gap)?,
    );
    let curve_path = out_dir.join(format!("{}_analytic.csv", r.name));
    write_curve(&curve_path, &curve, &pinned)?;
    Ok((hist_path, curve_path))
}

fn run_compare_recipe(r: &GappedRecipe, out_dir: &Path) -> Result<i32> {
    let gapped = build_gapped(r)?;
    let hist = estimate_g2_parallel(&gapped, r.bin_width, r.tau_max, thread_budget())?;
    let (hist_path, curve_path) = write_artifacts(r, &hist, out_dir)?;

    let sim_table = read_table(&hist_path)?;
    let curve_table = read_table(&curve_path)?;
    let mut report = compare(&sim_table, &curve_table, r.threshold, Some(r.t_gap))?;
    report.inputs = Some(ComparisonInputs {
        sim: InputDigest {
            path: hist_path.display().to_string(),
            sha256: formats::file_sha256(&hist_path)?,
        },
        analytic: InputDigest {
            path: curve_path.display().to_string(),
            sha256: formats::file_sha256(&curve_path)?,
        },
    });
    let report_path = out_dir.join(format!("{}_report.json", r.name));
    write_report(&report_path, &report)?;
    println!(
        "{}: verdict {} (max|z| = {:.3}, rms z = {:.3}, {} bins, {} excluded) -> {}",
        r.name,
        report.verdict,
        report.max_abs_z,
        report.rms_z,
        report.n_bins,
        report.excluded_bins,
        report_path.display()
    );
    Ok(if report.passed() { 0 } else { 1 })
}

/// Peak window [n·t_G, (n+1)·t_G): maximum bin value, argmax center, and the
/// count-weighted skewness.
fn peak_shape(hist: &CorrelationHistogram, lo: f64, hi: f64) -> (f64, f64, f64) {
    let mut max_v = 0.0f64;
    let mut argmax = lo;
    let mut total = 0.0f64;
    let mut mean = 0.0f64;
    for b in 0..hist.n_bins() {
        let c = hist.bin_center(b);
        if c < lo || c >= hi {
            continue;
        }
        let w = hist.pair_counts()[b] as f64;
        total += w;
        mean += w * c;
        if hist.g2()[b] > max_v {
            max_v = hist.g2()[b];
            argmax = c;
        }
    }
    mean /= total;
    let (mut m2, mut m3) = (0.0f64, 0.0f64);
    for b in 0..hist.n_bins() {
        let c = hist.bin_center(b);
        if c < lo || c >= hi {
            continue;
        }
        let w = hist.pair_counts()[b] as f64;
        m2 += w * (c - mean).powi(2);
        m3 += w * (c - mean).powi(3);
    }
    m2 /= total;
    m3 /= total;
    (max_v, argmax, m3 / m2.powf(1.5))
}

fn run_fig4c(out_dir: &Path) -> Result<i32> {
    let r = &FIG4C;
    let gapped = build_gapped(r)?;
    let hist = estimate_g2_parallel(&gapped, r.bin_width, r.tau_max, thread_budget())?;
    let (hist_path, _) = write_artifacts(r, &hist, out_dir)?;

    let rate = gapped.len() as f64 / gapped.duration();
    let rate_law = r.gamma / (1.0 + r.gamma * r.t_gap);
    let rate_ok = (rate - rate_law).abs() <= 0.01 * rate_law;

    let zero_failures = (0..hist.n_bins())
        .filter(|&b| hist.bin_edges()[b + 1] <= r.t_gap && hist.pair_counts()[b] != 0)
        .count();

    let mut maxima = Vec::new();
    let mut positions = Vec::new();
    let mut skews = Vec::new();
    for n in 1..=5 {
        let lo = n as f64 * r.t_gap;
        let (max_v, argmax, skew) = peak_shape(&hist, lo, lo + r.t_gap);
        maxima.push(max_v);
        positions.push(argmax);
        skews.push(skew);
    }
    let maxima_decreasing = maxima.windows(2).all(|w| w[0] > w[1]);
    // Jump at t_G followed by a one-sided decay: strongly positive skew, in
    // contrast with |skew| < 0.1 for externally pulsed trains.
    let first_peak_asymmetric = skews[0] > 0.5;
    let excesses: Vec<f64> = positions
        .iter()
        .enumerate()
        .map(|(i, p)| p - (i as f64 + 1.0) * r.t_gap)
        .collect();
    let positions_lag = excesses.iter().all(|&e| e >= 0.0)
        && excesses.windows(2).all(|w| w[1] > w[0]);

    let verdict = rate_ok
        && zero_failures == 0
        && maxima_decreasing
        && first_peak_asymmetric
        && positions_lag;

    let fmt_list = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x:.4}"))
            .collect::<Vec<_>>()
            .join(",")
    };
    let report_path = out_dir.join("fig4c_report.json");
    let json = format!(
        concat!(
            "{{\"schema\":1,\"kind\":\"peak-structure\",\"verdict\":\"{}\",",
            "\"rate\":{{\"measured\":{},\"expected\":{},\"ok\":{}}},",
            "\"zero_bin_failures\":{},",
            "\"peak_maxima\":[{}],\"maxima_strictly_decreasing\":{},",
            "\"first_peak_skew\":{:.4},\"first_peak_asymmetric\":{},",
            "\"peak_positions\":[{}],\"position_excess\":[{}],\"positions_lag\":{},",
            "\"inputs\":{{\"sim\":{{\"path\":\"{}\",\"sha256\":\"{}\"}}}}}}"
        ),
        if verdict { "pass" } else { "fail" },
        rate,
        rate_law,
        rate_ok,
        zero_failures,
        fmt_list(&maxima),
        maxima_decreasing,
        skews[0],
        first_peak_asymmetric,
        fmt_list(&positions),
        fmt_list(&excesses),
        positions_lag,
        hist_path.display(),
        formats::file_sha256(&hist_path)?,
    );
    formats::atomic_write(&report_path, |w| writeln!(w, "{json}"))?;
    println!(
        "fig4c: verdict {} (rate {:.6} vs {:.6}, maxima [{}], first-peak skew {:.2}, excesses [{}]) -> {}",
        if verdict { "pass" } else { "fail" },
        rate,
        rate_law,
        fmt_list(&maxima),
        skews[0],
        fmt_list(&excesses),
        report_path.display()
    );
    Ok(if verdict { 0 } else { 1 })
}
