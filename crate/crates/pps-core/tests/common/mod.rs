#![allow(dead_code)]

use pps_core::estimators::bin_index;
use pps_core::rng::EventRng;
use pps_core::{EventStream, Seed};

/// O(N²) reference pair counter. Shares `bin_index` with the sweep on
/// purpose: the equivalence claim is about the counting strategy, and both
/// sides must agree on the delay-to-bin map bit for bit.
pub fn brute_force_pair_counts(times: &[f64], bin_width: f64, n_bins: usize) -> Vec<u64> {
    let mut counts = vec![0u64; n_bins];
    for i in 0..times.len() {
        for j in i + 1..times.len() {
            let b = bin_index(times[j] - times[i], bin_width);
            if b < n_bins {
                counts[b] += 1;
            }
        }
    }
    counts
}

/// Keep each event independently with probability `q` (fixed seed).
pub fn thin(stream: &EventStream, q: f64, seed: u64) -> EventStream {
    let mut rng = EventRng::from_seed(Seed(seed));
    let times: Vec<f64> = stream
        .times()
        .iter()
        .copied()
        .filter(|_| rng.bernoulli(q))
        .collect();
    EventStream::from_parts_unchecked(times, stream.duration(), String::new())
}

/// z-score of a measured value against a reference with combined errors.
pub fn z_score(value: f64, err: f64, reference: f64, ref_err: f64) -> f64 {
    let sigma = (err * err + ref_err * ref_err).sqrt();
    if sigma == 0.0 {
        if value == reference {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (value - reference) / sigma
    }
}

/// Weighted mean, standard deviation and skewness of a binned peak.
pub fn peak_stats(centers: &[f64], weights: &[f64]) -> (f64, f64, f64) {
    let total: f64 = weights.iter().sum();
    let mean: f64 = centers
        .iter()
        .zip(weights)
        .map(|(c, w)| c * w)
        .sum::<f64>()
        / total;
    let m2: f64 = centers
        .iter()
        .zip(weights)
        .map(|(c, w)| w * (c - mean).powi(2))
        .sum::<f64>()
        / total;
    let m3: f64 = centers
        .iter()
        .zip(weights)
        .map(|(c, w)| w * (c - mean).powi(3))
        .sum::<f64>()
        / total;
    let sd = m2.sqrt();
    (mean, sd, m3 / m2.powf(1.5))
}

/// Trapezoidal integral of samples on a uniform grid.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let inner: f64 = values[1..values.len() - 1].iter().sum();
    h * (0.5 * values[0] + inner + 0.5 * values[values.len() - 1])
}
