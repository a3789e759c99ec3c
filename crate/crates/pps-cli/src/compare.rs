//! Monte-Carlo vs analytic comparison: per-bin z-scores, an exact-zero rule
//! for the gap region, and a machine-readable JSON report.

use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::formats::{self, FormatError, TableFile};

#[derive(Debug, Error)]
pub enum CompareError {
    #[error("analytic curve does not cover sim bin center τ = {0}")]
    Coverage(f64),
    #[error("analytic grid must be ascending")]
    BadGrid,
    #[error("simulated histogram has no counts anywhere; nothing to compare")]
    EmptyHistogram,
    #[error(transparent)]
    Format(#[from] FormatError),
}

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Per-bin deviations distilled to a verdict. `schema` is bumped on any
/// field change; exit codes remain the primary machine contract.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub schema: u32,
    pub verdict: String,
    pub max_abs_z: f64,
    pub rms_z: f64,
    pub frac_above_3: f64,
    pub n_bins: usize,
    pub excluded_bins: usize,
    pub zero_bin_failures: usize,
    pub threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edge: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_bin_center: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inputs: Option<ComparisonInputs>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonInputs {
    pub sim: InputDigest,
    pub analytic: InputDigest,
}

impl ComparisonReport {
    pub fn passed(&self) -> bool {
        self.verdict == "pass"
    }
}

fn interpolate(taus: &[f64], values: &[f64], x: f64) -> Result<f64, CompareError> {
    if taus.is_empty() || x < taus[0] || x > taus[taus.len() - 1] {
        return Err(CompareError::Coverage(x));
    }
    match taus.binary_search_by(|t| t.total_cmp(&x)) {
        Ok(i) => Ok(values[i]),
        Err(i) => {
            let (t0, t1) = (taus[i - 1], taus[i]);
            let w = (x - t0) / (t1 - t0);
            Ok(values[i - 1] * (1.0 - w) + values[i] * w)
        }
    }
}

/// Compare a simulated histogram against an analytic curve.
///
/// Every sim bin is z-scored at its center against the linearly interpolated
/// curve using the bin's own stderr. When `edge` marks a support boundary
/// (the time gap), bins ending at or below it must hold exactly zero counts,
/// and bins straddling it are excluded from scoring. Zero-count bins outside
/// the zero region use a one-count stderr floor so z stays finite.
pub fn compare(
    sim: &TableFile,
    analytic: &TableFile,
    threshold: f64,
    edge: Option<f64>,
) -> Result<ComparisonReport, CompareError> {
    let taus: Vec<f64> = analytic.rows.iter().map(|r| r.bin_lo).collect();
    if taus.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CompareError::BadGrid);
    }
    let values: Vec<f64> = analytic.rows.iter().map(|r| r.value).collect();

    // Per-count scale, for flooring the stderr of empty bins: for a counted
    // bin, value = c·k and stderr = √c·k, so k = stderr²/value.
    let mut scales: Vec<f64> = sim
        .rows
        .iter()
        .filter(|r| r.count > 0 && r.value > 0.0)
        .map(|r| r.stderr * r.stderr / r.value)
        .collect();
    if scales.is_empty() {
        return Err(CompareError::EmptyHistogram);
    }
    scales.sort_unstable_by(f64::total_cmp);
    let scale_floor = scales[scales.len() / 2];

    let rel = |x: f64, e: f64| (x - e).abs() <= 1e-9 * e.abs().max(1e-300);
    let mut max_abs_z = 0.0f64;
    let mut worst_center = None;
    let mut sum_z2 = 0.0f64;
    let mut above_3 = 0usize;
    let mut scored = 0usize;
    let mut excluded = 0usize;
    let mut zero_failures = 0usize;

    for row in &sim.rows {
        if let Some(e) = edge {
            let lo_below = row.bin_lo < e && !rel(row.bin_lo, e);
            let hi_above = row.bin_hi > e && !rel(row.bin_hi, e);
            if lo_below && hi_above {
                excluded += 1;
                continue;
            }
            if !hi_above {
                // Entire bin at or below the support edge: exact-zero region.
                if row.count != 0 {
                    zero_failures += 1;
                }
                continue;
            }
        }
        let center = 0.5 * (row.bin_lo + row.bin_hi);
        let reference = interpolate(&taus, &values, center)?;
        if reference == 0.0 {
            // Where the curve is exactly zero the stream must be too.
            if row.count != 0 {
                zero_failures += 1;
            }
            continue;
        }
        let sigma = if row.count > 0 {
            row.stderr
        } else {
            scale_floor
        };
        let z = if sigma > 0.0 {
            (row.value - reference) / sigma
        } else if row.value == reference {
            0.0
        } else {
            f64::INFINITY
        };
        if z.abs() > max_abs_z {
            max_abs_z = z.abs();
            worst_center = Some(center);
        }
        if z.abs() > 3.0 {
            above_3 += 1;
        }
        sum_z2 += z * z;
        scored += 1;
    }

    let rms_z = if scored > 0 {
        (sum_z2 / scored as f64).sqrt()
    } else {
        0.0
    };
    let frac_above_3 = if scored > 0 {
        above_3 as f64 / scored as f64
    } else {
        0.0
    };
    let verdict = if max_abs_z <= threshold && zero_failures == 0 {
        "pass"
    } else {
        "fail"
    };
    Ok(ComparisonReport {
        schema: 1,
        verdict: verdict.to_string(),
        max_abs_z,
        rms_z,
        frac_above_3,
        n_bins: scored,
        excluded_bins: excluded,
        zero_bin_failures: zero_failures,
        threshold,
        edge,
        worst_bin_center: worst_center,
        inputs: None,
    })
}

/// File-level wrapper: read both tables, compare, attach input hashes.
pub fn compare_files(
    sim_path: &Path,
    analytic_path: &Path,
    threshold: f64,
    edge: Option<f64>,
) -> Result<ComparisonReport, CompareError> {
    let sim = formats::read_table(sim_path)?;
    let analytic = formats::read_table(analytic_path)?;
    let mut report = compare(&sim, &analytic, threshold, edge)?;
    report.inputs = Some(ComparisonInputs {
        sim: InputDigest {
            path: sim_path.display().to_string(),
            sha256: formats::file_sha256(sim_path)?,
        },
        analytic: InputDigest {
            path: analytic_path.display().to_string(),
            sha256: formats::file_sha256(analytic_path)?,
        },
    });
    Ok(report)
}

pub fn write_report(path: &Path, report: &ComparisonReport) -> Result<(), FormatError> {
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    formats::atomic_write(path, |w| {
        w.write_all(json.as_bytes())?;
        w.write_all(b"\n")
    })
}
