//! Closed-form correlation curves and a numerical series oracle.
//!
//! The gapped-source g²(τ) is an indicator-truncated exponential series; the
//! same quantity can be rebuilt independently by summing self-convolutions of
//! the waiting-time density and dividing by the actual stream rate
//! (rate·g²(τ) = w(τ) + (w∗w)(τ) + ⋯). [`kim_g2_from_w`] implements that
//! route with support-aware trapezoidal convolution so the two paths check
//! each other to high accuracy.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::stream::Rate;
use crate::transforms::{GapSpec, JitterSpec, RemovalProbability};

/// Which expression produced a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormulaId {
    /// Gapped-source g²(τ): indicator-truncated series.
    G2Gapped,
    /// nth-order waiting-time density of the gapped source.
    WnGapped,
    /// Series-of-convolutions reconstruction from a waiting-time curve.
    KimSeries,
    /// Two-level system g²(τ) = 1 − e^{−γ|τ|}.
    G2TwoLevel,
    /// Probabilistic gapping, closed form on |τ| < t_G only.
    G2ProbRemoval,
    /// Probabilistic gapping with the tail beyond t_G filled in numerically
    /// by the series oracle.
    G2ProbRemovalKimTail,
    /// Pulsed train with jitter: sum of shifted jitter autocorrelations.
    G2Pulsed,
}

impl FormulaId {
    pub fn as_str(self) -> &'static str {
        match self {
            FormulaId::G2Gapped => "g2_gapped",
            FormulaId::WnGapped => "wn_gapped",
            FormulaId::KimSeries => "kim_series",
            FormulaId::G2TwoLevel => "g2_two_level",
            FormulaId::G2ProbRemoval => "g2_prob_removal",
            FormulaId::G2ProbRemovalKimTail => "g2_prob_removal_kim_tail",
            FormulaId::G2Pulsed => "g2_pulsed",
        }
    }
}

/// A sampled closed-form function: τ grid, values, and the parameters that
/// produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticCurve {
    tau_grid: Vec<f64>,
    values: Vec<f64>,
    params: Vec<(String, String)>,
    formula_id: FormulaId,
}

impl AnalyticCurve {
    pub fn new(
        tau_grid: Vec<f64>,
        values: Vec<f64>,
        params: Vec<(String, String)>,
        formula_id: FormulaId,
    ) -> Self {
        assert_eq!(tau_grid.len(), values.len());
        AnalyticCurve {
            tau_grid,
            values,
            params,
            formula_id,
        }
    }

    pub fn tau_grid(&self) -> &[f64] {
        &self.tau_grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn params(&self) -> &[(String, String)] {
        &self.params
    }

    pub fn formula_id(&self) -> FormulaId {
        self.formula_id
    }

    pub fn len(&self) -> usize {
        self.tau_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau_grid.is_empty()
    }
}

/// Uniform grid 0, h, 2h, …, n·h (n+1 points), built as i·h so nodes carry no
/// cumulative rounding drift.
pub fn uniform_grid(step: f64, n_steps: usize) -> Vec<f64> {
    (0..=n_steps).map(|i| i as f64 * step).collect()
}

/// Rate left after opening a gap: γ / (1 + γ·t_G).
pub fn gapped_rate(gamma: Rate, gap: GapSpec) -> Rate {
    let g = gamma.per_sec();
    Rate::new(g / (1.0 + g * gap.t_gap())).expect("gapped rate stays positive")
}

// 0! .. 20! are exactly representable (or correctly rounded) in f64; larger
// factorials go through lgamma to dodge overflow at large γτ.
const FACTORIAL: [f64; 21] = [
    1.0,
    1.0,
    2.0,
    6.0,
    24.0,
    120.0,
    720.0,
    5040.0,
    40320.0,
    362880.0,
    3628800.0,
    39916800.0,
    479001600.0,
    6227020800.0,
    87178291200.0,
    1307674368000.0,
    20922789888000.0,
    355687428096000.0,
    6402373705728000.0,
    121645100408832000.0,
    2432902008176640000.0,
];

fn ln_factorial(n: usize) -> f64 {
    if n <= 20 {
        libm::log(FACTORIAL[n])
    } else {
        libm::lgamma(n as f64 + 1.0)
    }
}

fn eval_g2_gapped(tau: f64, gamma: f64, t_gap: f64) -> f64 {
    let tau = libm::fabs(tau);
    if t_gap == 0.0 {
        // Uncorrelated limit: the series resums to 1 for every τ.
        return 1.0;
    }
    if tau < t_gap {
        return 0.0;
    }
    // (1+γt_G) e^{−γ(τ−t_G)} Σ_n [γ(τ−(n+1)t_G) e^{γt_G}]^n / n!, with the
    // indicator keeping only n where (n+1)t_G ≤ τ. Summands are assembled in
    // log space so the e^{nγt_G} powers cannot overflow at large γt_G.
    let ln_prefac = libm::log(1.0 + gamma * t_gap) - gamma * (tau - t_gap);
    let mut sum = libm::exp(ln_prefac);
    let mut n = 1usize;
    while (n as f64 + 1.0) * t_gap <= tau {
        let x = gamma * (tau - (n as f64 + 1.0) * t_gap);
        if x > 0.0 {
            let ln_term = ln_prefac + n as f64 * (libm::log(x) + gamma * t_gap) - ln_factorial(n);
            sum += libm::exp(ln_term);
        }
        n += 1;
    }
    sum
}

/// Gapped-source g²(τ): exactly 0 below the gap, a (1+γt_G) superbunching
/// jump at t_G, then damped oscillations settling to 1.
pub fn g2_gapped(tau_grid: Vec<f64>, gamma: Rate, gap: GapSpec) -> AnalyticCurve {
    let g = gamma.per_sec();
    let t_gap = gap.t_gap();
    let values = tau_grid
        .iter()
        .map(|&tau| eval_g2_gapped(tau, g, t_gap))
        .collect();
    let params = vec![
        (String::from("gamma"), format!("{g}")),
        (String::from("t_gap"), format!("{t_gap}")),
    ];
    AnalyticCurve::new(tau_grid, values, params, FormulaId::G2Gapped)
}

fn eval_wn_gapped(tau: f64, n: usize, gamma: f64, t_gap: f64) -> f64 {
    let start = n as f64 * t_gap;
    if tau < start {
        return 0.0;
    }
    let u = tau - start;
    if n == 1 {
        return gamma * libm::exp(-gamma * u);
    }
    if u == 0.0 {
        return 0.0;
    }
    libm::exp(
        n as f64 * libm::log(gamma) + (n as f64 - 1.0) * libm::log(u)
            - gamma * u
            - ln_factorial(n - 1),
    )
}

/// nth waiting-time density of the gapped source:
/// γⁿ(τ−n·t_G)^{n−1} e^{−γ(τ−n·t_G)} / (n−1)! on τ ≥ n·t_G.
pub fn wn_gapped(
    tau_grid: Vec<f64>,
    order: usize,
    gamma: Rate,
    gap: GapSpec,
) -> Result<AnalyticCurve, CoreError> {
    if order == 0 {
        return Err(CoreError::ParameterDomain {
            what: "waiting-time order must be at least 1",
        });
    }
    let g = gamma.per_sec();
    let t_gap = gap.t_gap();
    let values = tau_grid
        .iter()
        .map(|&tau| eval_wn_gapped(tau, order, g, t_gap))
        .collect();
    let params = vec![
        (String::from("order"), format!("{order}")),
        (String::from("gamma"), format!("{g}")),
        (String::from("t_gap"), format!("{t_gap}")),
    ];
    Ok(AnalyticCurve::new(
        tau_grid,
        values,
        params,
        FormulaId::WnGapped,
    ))
}

fn first_nonzero(xs: &[f64]) -> Option<usize> {
    xs.iter().position(|&x| x != 0.0)
}

/// Discrete convolution of two sampled densities on a shared uniform grid.
/// Composite trapezoid over the exact support window [τ_ja, τ_i − τ_jb],
/// where ja/jb are the first nonzero samples: the half-weights sit on the
/// true support boundaries, so jump discontinuities at the boundary cost
/// O(h²) rather than O(h).
fn convolve_trapezoid(a: &[f64], b: &[f64], h: f64) -> Vec<f64> {
    let m = a.len();
    let mut out = vec![0.0; m];
    let (ja, jb) = match (first_nonzero(a), first_nonzero(b)) {
        (Some(ja), Some(jb)) => (ja, jb),
        _ => return out,
    };
    for i in 0..m {
        if i < ja + jb {
            continue;
        }
        let lo = ja;
        let hi = i - jb;
        if hi <= lo {
            continue; // zero-width integration window
        }
        let mut s = 0.5 * (a[lo] * b[i - lo] + a[hi] * b[i - hi]);
        for j in lo + 1..hi {
            s += a[j] * b[i - j];
        }
        out[i] = h * s;
    }
    out
}

fn check_uniform_from_zero(grid: &[f64]) -> Result<f64, CoreError> {
    if grid.len() < 2 || grid[0] != 0.0 {
        return Err(CoreError::ParameterDomain {
            what: "series oracle needs a uniform grid starting at τ = 0",
        });
    }
    let h = grid[1];
    if !(h.is_finite() && h > 0.0) {
        return Err(CoreError::ParameterDomain {
            what: "series oracle needs a strictly increasing grid",
        });
    }
    for (i, &t) in grid.iter().enumerate() {
        if libm::fabs(t - i as f64 * h) > 1e-9 * libm::fabs(t.max(1.0)) {
            return Err(CoreError::ParameterDomain {
                what: "series oracle needs a uniform grid",
            });
        }
    }
    Ok(h)
}

/// Reconstruct g²(τ) from a sampled waiting-time density by summing
/// wₖ = wₖ₋₁ ∗ w₁ up to `n_terms` and dividing by the *actual* stream rate
/// (the emission rate after gapping, not the backbone rate). Terms that are
/// identically zero on the grid end the summation early.
pub fn kim_g2_from_w(
    w1: &AnalyticCurve,
    gamma_emission: Rate,
    n_terms: usize,
) -> Result<AnalyticCurve, CoreError> {
    if n_terms == 0 {
        return Err(CoreError::ParameterDomain {
            what: "series oracle needs at least one term",
        });
    }
    let h = check_uniform_from_zero(w1.tau_grid())?;
    let w = w1.values();
    let mut sum: Vec<f64> = w.to_vec();
    let mut wk: Vec<f64> = w.to_vec();
    for _ in 2..=n_terms {
        wk = convolve_trapezoid(&wk, w, h);
        if first_nonzero(&wk).is_none() {
            break;
        }
        for (s, v) in sum.iter_mut().zip(&wk) {
            *s += v;
        }
    }
    let rate = gamma_emission.per_sec();
    let values = sum.iter().map(|s| s / rate).collect();
    let params = vec![
        (String::from("gamma_emission"), format!("{rate}")),
        (String::from("n_terms"), format!("{n_terms}")),
        (String::from("step"), format!("{h}")),
    ];
    Ok(AnalyticCurve::new(
        w1.tau_grid().to_vec(),
        values,
        params,
        FormulaId::KimSeries,
    ))
}

/// Incoherently pumped two-level system: g²(τ) = 1 − e^{−γ|τ|}.
pub fn g2_two_level(tau_grid: Vec<f64>, gamma_2ls: Rate) -> AnalyticCurve {
    let g = gamma_2ls.per_sec();
    let values = tau_grid
        .iter()
        .map(|&tau| 1.0 - libm::exp(-g * libm::fabs(tau)))
        .collect();
    let params = vec![(String::from("gamma_2ls"), format!("{g}"))];
    AnalyticCurve::new(tau_grid, values, params, FormulaId::G2TwoLevel)
}

/// Waiting-time density of the probabilistically gapped source: an Exp(γ)
/// spacing plus a t_G spacer present with probability p.
fn eval_w1_prob(tau: f64, gamma: f64, t_gap: f64, p: f64) -> f64 {
    let mut w = (1.0 - p) * gamma * libm::exp(-gamma * tau);
    if tau >= t_gap {
        w += p * gamma * libm::exp(-gamma * (tau - t_gap));
    }
    w
}

/// Sampled waiting-time density for the probabilistic gap construction;
/// feed this to [`kim_g2_from_w`] with rate γ/(1+pγt_G).
pub fn w1_prob_removal(
    tau_grid: Vec<f64>,
    gamma: Rate,
    gap: GapSpec,
    p: RemovalProbability,
) -> AnalyticCurve {
    let g = gamma.per_sec();
    let t_gap = gap.t_gap();
    let prob = p.value();
    let values = tau_grid
        .iter()
        .map(|&tau| eval_w1_prob(libm::fabs(tau), g, t_gap, prob))
        .collect();
    let params = vec![
        (String::from("gamma"), format!("{g}")),
        (String::from("t_gap"), format!("{t_gap}")),
        (String::from("p"), format!("{prob}")),
    ];
    AnalyticCurve::new(tau_grid, values, params, FormulaId::WnGapped)
}

/// Probabilistic gapping: g²(τ) = (1−p)(pγt_G+1)e^{−pγ|τ|} inside the gap.
/// Grid points at or beyond t_G are filled by the series oracle applied to
/// the mixed waiting-time density (no closed form is published for the
/// tail), in which case the curve is flagged `G2ProbRemovalKimTail` and the
/// grid must be uniform from τ = 0.
pub fn g2_prob_removal(
    tau_grid: Vec<f64>,
    gamma: Rate,
    gap: GapSpec,
    p: RemovalProbability,
) -> Result<AnalyticCurve, CoreError> {
    let g = gamma.per_sec();
    let t_gap = gap.t_gap();
    let prob = p.value();
    let closed =
        |tau: f64| (1.0 - prob) * (prob * g * t_gap + 1.0) * libm::exp(-prob * g * libm::fabs(tau));
    let needs_tail = tau_grid.iter().any(|&t| libm::fabs(t) >= t_gap);
    let params = vec![
        (String::from("gamma"), format!("{g}")),
        (String::from("t_gap"), format!("{t_gap}")),
        (String::from("p"), format!("{prob}")),
    ];
    if !needs_tail {
        let values = tau_grid.iter().map(|&t| closed(t)).collect();
        return Ok(AnalyticCurve::new(
            tau_grid,
            values,
            params,
            FormulaId::G2ProbRemoval,
        ));
    }
    let w1 = w1_prob_removal(tau_grid.clone(), gamma, gap, p);
    let emission = Rate::new(g / (1.0 + prob * g * t_gap)).expect("positive emission rate");
    // Unlike the hard-gapped case the mixture has mass at small τ, so the
    // series needs roughly τ_max / mean-waiting terms before truncation is
    // negligible; pad generously.
    let tau_max = tau_grid.iter().fold(0.0f64, |m, &t| m.max(libm::fabs(t)));
    let mean_wait = (1.0 + prob * g * t_gap) / g;
    let n_terms = (2.0 * tau_max / mean_wait) as usize + 24;
    let kim = kim_g2_from_w(&w1, emission, n_terms)?;
    let values = tau_grid
        .iter()
        .zip(kim.values())
        .map(|(&t, &k)| if libm::fabs(t) < t_gap { closed(t) } else { k })
        .collect();
    Ok(AnalyticCurve::new(
        tau_grid,
        values,
        params,
        FormulaId::G2ProbRemovalKimTail,
    ))
}

/// Jitter autocorrelation (D⋆D)(s), closed form. Both are symmetric in s and
/// integrate to 1, which is what keeps pulsed peak averages normalized.
fn jitter_autocorrelation(jitter: &JitterSpec, s: f64) -> f64 {
    let s = libm::fabs(s);
    match *jitter {
        JitterSpec::Gaussian { sigma } => {
            // Autocorrelation of N(μ, σ²) is a Gaussian of width σ√2.
            libm::exp(-s * s / (4.0 * sigma * sigma))
                / (2.0 * sigma * libm::sqrt(core::f64::consts::PI))
        }
        JitterSpec::Exponential { rate } => 0.5 * rate * libm::exp(-rate * s),
        JitterSpec::None => unreachable!("validated by caller"),
    }
}

/// Pulsed-train g²(τ) = period · Σ_{n≠0} (D⋆D)(|τ − n·period|) over
/// n ∈ [−n_peaks, n_peaks]. The ideal comb (kind `None`) has no sampled
/// representation and is rejected.
pub fn g2_pulsed(
    tau_grid: Vec<f64>,
    period: f64,
    jitter: &JitterSpec,
    n_peaks: usize,
) -> Result<AnalyticCurve, CoreError> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(CoreError::ParameterDomain {
            what: "pulse period must be strictly positive and finite",
        });
    }
    if n_peaks == 0 {
        return Err(CoreError::ParameterDomain {
            what: "pulsed curve needs at least one peak",
        });
    }
    jitter.validate()?;
    if matches!(jitter, JitterSpec::None) {
        return Err(CoreError::ParameterDomain {
            what: "the jitter-free comb is a train of delta peaks with no sampled values",
        });
    }
    let values = tau_grid
        .iter()
        .map(|&tau| {
            let mut v = 0.0;
            for n in 1..=n_peaks as i64 {
                v += jitter_autocorrelation(jitter, tau - n as f64 * period);
                v += jitter_autocorrelation(jitter, tau + n as f64 * period);
            }
            period * v
        })
        .collect();
    let jparam = match *jitter {
        JitterSpec::Gaussian { sigma } => format!("{sigma}"),
        JitterSpec::Exponential { rate } => format!("{rate}"),
        JitterSpec::None => unreachable!(),
    };
    let params = vec![
        (String::from("period"), format!("{period}")),
        (String::from("jitter"), String::from(jitter.kind_name())),
        (String::from("jitter_param"), jparam),
        (String::from("n_peaks"), format!("{n_peaks}")),
    ];
    Ok(AnalyticCurve::new(
        tau_grid,
        values,
        params,
        FormulaId::G2Pulsed,
    ))
}
