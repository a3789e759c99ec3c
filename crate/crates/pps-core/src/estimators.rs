//! Correlation statistics over raw event times: rate, binned g²(τ),
//! nth-order waiting-time histograms and k-fold coincidence counts.
//!
//! Pair counting walks the sorted times with a forward-only second pointer,
//! O(N·k̄) where k̄ is the mean number of partners within `tau_max`. The outer
//! index can be sharded for parallel runs: pair counts are integers, so any
//! shard partition sums to bit-identical totals.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::error::CoreError;
use crate::stream::{EventStream, Rate};

/// Delay-to-bin mapping shared by every counting path (two-pointer sweep,
/// shards, waiting histograms and the brute-force test oracle). Division is
/// deliberate: for the t_G/100 widths used by the harness, a delay of exactly
/// t_G divides to the first above-gap bin, keeping the sub-gap region exact.
#[inline]
pub fn bin_index(delay: f64, bin_width: f64) -> usize {
    (delay / bin_width) as usize
}

/// Count ordered pairs (i < j) with the first index in `outer`, binning the
/// delays t_j − t_i into `n_bins` bins of `bin_width`. Pairs at or beyond the
/// last bin edge are ignored.
pub fn pair_counts_range(
    times: &[f64],
    outer: Range<usize>,
    bin_width: f64,
    n_bins: usize,
) -> Vec<u64> {
    let mut counts = vec![0u64; n_bins];
    let n = times.len();
    let mut j_end = outer.start + 1;
    for i in outer {
        if j_end <= i {
            j_end = i + 1;
        }
        while j_end < n && bin_index(times[j_end] - times[i], bin_width) < n_bins {
            j_end += 1;
        }
        let ti = times[i];
        for &tj in &times[i + 1..j_end] {
            counts[bin_index(tj - ti, bin_width)] += 1;
        }
    }
    counts
}

/// Binned estimate of g²(τ) for positive delays (the function is symmetric in
/// τ, so only τ ≥ 0 is tabulated).
///
/// Normalization contract per bin b with center τ_b:
/// `g2[b] = pair_counts[b] / (rate_hat² · (duration − τ_b) · Δ)`, with
/// rate_hat = N/duration and the (duration − τ_b) factor correcting for the
/// shrinking number of opportunities at larger lags. stderr is √counts under
/// the same scaling (Poisson approximation; correlated-pair corrections are
/// out of scope). A stream with no events yields all-zero bins.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationHistogram {
    bin_edges: Vec<f64>,
    pair_counts: Vec<u64>,
    g2: Vec<f64>,
    stderr: Vec<f64>,
    rate_hat: f64,
    duration: f64,
}

impl CorrelationHistogram {
    /// Normalize raw pair counts. This is the single assembly point used by
    /// both the sequential estimator and sharded parallel drivers.
    pub fn from_pair_counts(
        pair_counts: Vec<u64>,
        bin_width: f64,
        n_events: u64,
        duration: f64,
    ) -> Self {
        let rate_hat = n_events as f64 / duration;
        let n_bins = pair_counts.len();
        let mut g2 = Vec::with_capacity(n_bins);
        let mut stderr = Vec::with_capacity(n_bins);
        for (b, &c) in pair_counts.iter().enumerate() {
            let center = (b as f64 + 0.5) * bin_width;
            let denom = rate_hat * rate_hat * (duration - center) * bin_width;
            if denom > 0.0 {
                g2.push(c as f64 / denom);
                stderr.push(libm::sqrt(c as f64) / denom);
            } else {
                g2.push(0.0);
                stderr.push(0.0);
            }
        }
        let bin_edges = (0..=n_bins).map(|i| i as f64 * bin_width).collect();
        CorrelationHistogram {
            bin_edges,
            pair_counts,
            g2,
            stderr,
            rate_hat,
            duration,
        }
    }

    pub fn bin_edges(&self) -> &[f64] {
        &self.bin_edges
    }

    pub fn pair_counts(&self) -> &[u64] {
        &self.pair_counts
    }

    pub fn g2(&self) -> &[f64] {
        &self.g2
    }

    pub fn stderr(&self) -> &[f64] {
        &self.stderr
    }

    pub fn rate_hat(&self) -> f64 {
        self.rate_hat
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn n_bins(&self) -> usize {
        self.pair_counts.len()
    }

    pub fn bin_width(&self) -> f64 {
        if self.bin_edges.len() > 1 {
            self.bin_edges[1] - self.bin_edges[0]
        } else {
            0.0
        }
    }

    pub fn bin_center(&self, b: usize) -> f64 {
        (b as f64 + 0.5) * self.bin_width()
    }
}

/// Histogram of the delays between a photon and the n-th photon after it,
/// with density normalized by (N − n)·Δ so a fully covered support
/// integrates to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct WaitingHistogram {
    order: usize,
    bin_edges: Vec<f64>,
    counts: Vec<u64>,
    density: Vec<f64>,
    stderr: Vec<f64>,
    n_samples: u64,
    duration: f64,
}

impl WaitingHistogram {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bin_edges(&self) -> &[f64] {
        &self.bin_edges
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn stderr(&self) -> &[f64] {
        &self.stderr
    }

    pub fn n_samples(&self) -> u64 {
        self.n_samples
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn bin_width(&self) -> f64 {
        if self.bin_edges.len() > 1 {
            self.bin_edges[1] - self.bin_edges[0]
        } else {
            0.0
        }
    }

    pub fn bin_center(&self, b: usize) -> f64 {
        (b as f64 + 0.5) * self.bin_width()
    }
}

/// N / duration.
pub fn estimate_rate(stream: &EventStream) -> Result<Rate, CoreError> {
    if stream.is_empty() {
        return Err(CoreError::DegenerateInput {
            what: "cannot estimate the rate of an empty stream",
        });
    }
    Rate::new(stream.len() as f64 / stream.duration())
}

/// Validate binning parameters and return the bin count. The histogram
/// covers a whole number of bins: tau_max is truncated to n_bins·bin_width
/// and the recorded upper edge is authoritative.
pub fn plan_bin_count(bin_width: f64, tau_max: f64, duration: f64) -> Result<usize, CoreError> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(CoreError::ParameterDomain {
            what: "bin width must be strictly positive and finite",
        });
    }
    if !(tau_max.is_finite() && tau_max > bin_width) {
        return Err(CoreError::ParameterDomain {
            what: "tau_max must exceed the bin width",
        });
    }
    if !(duration.is_finite() && tau_max <= duration / 10.0) {
        return Err(CoreError::ParameterDomain {
            what: "tau_max must be at most duration/10 to keep edge bias small",
        });
    }
    Ok((tau_max / bin_width + 1e-9) as usize)
}

/// Count and bin all ordered pairs with delay in [0, n_bins·Δ), then apply
/// the normalization contract.
pub fn estimate_g2(
    stream: &EventStream,
    bin_width: f64,
    tau_max: f64,
) -> Result<CorrelationHistogram, CoreError> {
    let n_bins = plan_bin_count(bin_width, tau_max, stream.duration())?;
    let counts = pair_counts_range(stream.times(), 0..stream.len(), bin_width, n_bins);
    Ok(CorrelationHistogram::from_pair_counts(
        counts,
        bin_width,
        stream.len() as u64,
        stream.duration(),
    ))
}

/// Histogram the delays t_{i+n} − t_i over all valid i.
pub fn estimate_waiting(
    stream: &EventStream,
    order: usize,
    bin_width: f64,
    tau_max: f64,
) -> Result<WaitingHistogram, CoreError> {
    if order == 0 {
        return Err(CoreError::ParameterDomain {
            what: "waiting-time order must be at least 1",
        });
    }
    if stream.len() <= order {
        return Err(CoreError::DegenerateInput {
            what: "stream has too few events for the requested waiting order",
        });
    }
    let n_bins = plan_bin_count(bin_width, tau_max, stream.duration())?;
    let times = stream.times();
    let n_samples = (times.len() - order) as u64;
    let mut counts = vec![0u64; n_bins];
    for i in 0..times.len() - order {
        let d = times[i + order] - times[i];
        let b = bin_index(d, bin_width);
        if b < n_bins {
            counts[b] += 1;
        }
    }
    let norm = n_samples as f64 * bin_width;
    let density: Vec<f64> = counts.iter().map(|&c| c as f64 / norm).collect();
    let stderr: Vec<f64> = counts.iter().map(|&c| libm::sqrt(c as f64) / norm).collect();
    Ok(WaitingHistogram {
        order,
        bin_edges: (0..=n_bins).map(|i| i as f64 * bin_width).collect(),
        counts,
        density,
        stderr,
        n_samples,
        duration: stream.duration(),
    })
}

/// Binomial coefficient, saturating at u64::MAX.
fn choose(m: u64, r: u64) -> u64 {
    if r > m {
        return 0;
    }
    let mut c: u128 = 1;
    for i in 1..=r {
        c = c.saturating_mul((m - r + i) as u128) / i as u128;
        if c > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    c as u64
}

/// Number of k-tuples fitting in a sliding window: for each event i, the
/// number of (k−1)-subsets of events in (t_i, t_i + window]. With k = 2 this
/// is the count of ordered pairs no farther apart than `window`.
pub fn count_coincidences(
    stream: &EventStream,
    window: f64,
    order_k: usize,
) -> Result<u64, CoreError> {
    if !(window > 0.0 && window.is_finite()) {
        return Err(CoreError::ParameterDomain {
            what: "coincidence window must be strictly positive and finite",
        });
    }
    if order_k < 2 {
        return Err(CoreError::ParameterDomain {
            what: "coincidence order must be at least 2",
        });
    }
    let times = stream.times();
    let n = times.len();
    let r = (order_k - 1) as u64;
    let mut total = 0u64;
    let mut j = 1usize;
    for i in 0..n {
        if j <= i {
            j = i + 1;
        }
        while j < n && times[j] <= times[i] + window {
            j += 1;
        }
        total = total.saturating_add(choose((j - i - 1) as u64, r));
    }
    Ok(total)
}
