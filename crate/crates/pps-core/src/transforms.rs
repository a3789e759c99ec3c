//! Stream-to-stream constructions: gap removal, gap insertion, probabilistic
//! gapping, random-delay insertion and the jittered pulse train.
//!
//! Gap removal is non-paralyzable dead time: an event is tested against the
//! most recently *kept* event, so on Poisson input it is statistically
//! equivalent to inserting a fixed spacer after every photon. All transforms
//! are pure functions of (stream, parameters, seed), never mutate their
//! input, and always emit a valid stream.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::generate::push_strictly_increasing;
use crate::rng::EventRng;
use crate::stream::{EventStream, Seed};

/// Minimum separation enforced between consecutive photons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapSpec(f64);

impl GapSpec {
    pub fn new(t_gap: f64) -> Result<Self, CoreError> {
        if t_gap >= 0.0 && t_gap.is_finite() {
            Ok(GapSpec(t_gap))
        } else {
            Err(CoreError::ParameterDomain {
                what: "time gap must be non-negative and finite",
            })
        }
    }

    pub fn t_gap(self) -> f64 {
        self.0
    }
}

/// Probability that a gap is actually enforced in the probabilistic removal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemovalProbability(f64);

impl RemovalProbability {
    pub fn new(p: f64) -> Result<Self, CoreError> {
        if (0.0..=1.0).contains(&p) {
            Ok(RemovalProbability(p))
        } else {
            Err(CoreError::ParameterDomain {
                what: "removal probability must lie in [0, 1]",
            })
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Distribution of the extra delay inserted after each photon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DelaySpec {
    /// Fixed spacer; reduces exactly to [`gap_insert`].
    Constant { t_gap: f64 },
    /// Poisson-distributed delay: density rate·e^{−rate·τ} on τ ≥ 0.
    Exponential { rate: f64 },
    /// Density ∝ τ² e^{−τ²/(2a²)} on τ ≥ 0; vanishes at τ = 0, which is what
    /// produces a plateaued g²(τ) without an actual gap.
    MaxwellType { scale: f64 },
}

impl DelaySpec {
    pub fn validate(&self) -> Result<(), CoreError> {
        let ok = match *self {
            DelaySpec::Constant { t_gap } => t_gap >= 0.0 && t_gap.is_finite(),
            DelaySpec::Exponential { rate } => rate > 0.0 && rate.is_finite(),
            DelaySpec::MaxwellType { scale } => scale > 0.0 && scale.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(CoreError::ParameterDomain {
                what: "delay spec parameters must be positive (gap non-negative) and finite",
            })
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            DelaySpec::Constant { .. } => "constant",
            DelaySpec::Exponential { .. } => "exponential",
            DelaySpec::MaxwellType { .. } => "maxwell-type",
        }
    }
}

/// Per-pulse emission-time fluctuation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JitterSpec {
    None,
    Gaussian { sigma: f64 },
    Exponential { rate: f64 },
}

impl JitterSpec {
    pub fn validate(&self) -> Result<(), CoreError> {
        let ok = match *self {
            JitterSpec::None => true,
            JitterSpec::Gaussian { sigma } => sigma > 0.0 && sigma.is_finite(),
            JitterSpec::Exponential { rate } => rate > 0.0 && rate.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(CoreError::ParameterDomain {
                what: "jitter parameters must be strictly positive and finite",
            })
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            JitterSpec::None => "none",
            JitterSpec::Gaussian { .. } => "gaussian",
            JitterSpec::Exponential { .. } => "exponential",
        }
    }
}

fn transform_meta(name: &str, params: &str, parent: &EventStream) -> String {
    format!(
        r#"{{"transform":"{name}",{params}"parent":"{:016x}"}}"#,
        parent.content_hash()
    )
}

/// Drop every event closer than `t_gap` to the most recently kept event.
/// The first event is always kept; duration is unchanged. No two retained
/// events are within `t_gap` of each other.
pub fn gap_remove(stream: &EventStream, gap: GapSpec) -> EventStream {
    let t_gap = gap.t_gap();
    let mut times = Vec::with_capacity(stream.len());
    let mut last_kept = f64::NEG_INFINITY;
    for &t in stream.times() {
        if t - last_kept >= t_gap {
            times.push(t);
            last_kept = t;
        }
    }
    let meta = transform_meta("gap_remove", &format!(r#""t_gap":{t_gap},"#), stream);
    EventStream::from_parts_unchecked(times, stream.duration(), meta)
}

/// Insert a fixed spacer after every photon: the k-th event (0-indexed)
/// shifts to t_k + k·t_gap and the window grows by N·t_gap, one spacer per
/// photon. Count is preserved and all output gaps are ≥ t_gap.
pub fn gap_insert(stream: &EventStream, gap: GapSpec) -> EventStream {
    let t_gap = gap.t_gap();
    let n = stream.len();
    let mut times = Vec::with_capacity(n);
    for (k, &t) in stream.times().iter().enumerate() {
        push_strictly_increasing(&mut times, t + k as f64 * t_gap);
    }
    let duration = stream.duration() + n as f64 * t_gap;
    let meta = transform_meta("gap_insert", &format!(r#""t_gap":{t_gap},"#), stream);
    EventStream::from_parts_unchecked(times, duration, meta)
}

/// Gap removal where each kept photon enforces its gap only with probability
/// `p`: when the coin fires, every event within `t_gap` of that photon is
/// dropped; when it does not, the very next event is kept regardless of
/// proximity. Each kept photon flips its own coin. p = 1 reproduces
/// [`gap_remove`] exactly and p = 0 is the identity on the times.
///
/// On Poisson input this yields photon spacings of Exp(γ) plus a spacer that
/// is present with probability p — the probabilistic counterpart of the
/// remove/insert equivalence — and reproduces the closed form
/// g²(τ) = (1−p)(pγt_G+1)e^{−pγ|τ|} inside the gap.
pub fn gap_remove_probabilistic(
    stream: &EventStream,
    gap: GapSpec,
    p: RemovalProbability,
    seed: Seed,
) -> EventStream {
    let t_gap = gap.t_gap();
    let prob = p.value();
    let mut rng = EventRng::from_seed(seed);
    let mut times = Vec::with_capacity(stream.len());
    let mut last_kept = f64::NEG_INFINITY;
    let mut enforcing = false;
    for &t in stream.times() {
        if enforcing && t - last_kept < t_gap {
            continue;
        }
        times.push(t);
        last_kept = t;
        enforcing = rng.bernoulli(prob);
    }
    let meta = transform_meta(
        "gap_remove_probabilistic",
        &format!(r#""t_gap":{t_gap},"p":{prob},"seed":{},"#, seed.0),
        stream,
    );
    EventStream::from_parts_unchecked(times, stream.duration(), meta)
}

/// Shift the k-th event by the sum of k i.i.d. draws from the delay density;
/// one delay is inserted after every photon, so the window grows by the total
/// of N draws. The constant kind reduces bit-exactly to [`gap_insert`].
pub fn delay_insert(
    stream: &EventStream,
    delay: &DelaySpec,
    seed: Seed,
) -> Result<EventStream, CoreError> {
    delay.validate()?;
    if let DelaySpec::Constant { t_gap } = *delay {
        return Ok(gap_insert(stream, GapSpec::new(t_gap)?));
    }
    let mut rng = EventRng::from_seed(seed);
    let mut times = Vec::with_capacity(stream.len());
    let mut shift = 0.0f64;
    for &t in stream.times() {
        push_strictly_increasing(&mut times, t + shift);
        shift += match *delay {
            DelaySpec::Exponential { rate } => rng.exponential(rate),
            DelaySpec::MaxwellType { scale } => rng.maxwell(scale),
            DelaySpec::Constant { .. } => unreachable!(),
        };
    }
    let duration = stream.duration() + shift;
    let params = match *delay {
        DelaySpec::Exponential { rate } => {
            format!(r#""kind":"exponential","rate":{rate},"seed":{},"#, seed.0)
        }
        DelaySpec::MaxwellType { scale } => {
            format!(r#""kind":"maxwell-type","scale":{scale},"seed":{},"#, seed.0)
        }
        DelaySpec::Constant { .. } => unreachable!(),
    };
    let meta = transform_meta("delay_insert", &params, stream);
    Ok(EventStream::from_parts_unchecked(times, duration, meta))
}

/// Pulsed source: one event per pulse at n·period + j_n with j_n drawn from
/// the jitter density (zero for `JitterSpec::None`). Events are sorted, and
/// draws landing outside [0, duration] are dropped with the count recorded
/// in the metadata. duration = n_pulses·period.
pub fn gen_pulsed(
    period: f64,
    n_pulses: u64,
    jitter: &JitterSpec,
    seed: Seed,
) -> Result<EventStream, CoreError> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(CoreError::ParameterDomain {
            what: "pulse period must be strictly positive and finite",
        });
    }
    if n_pulses == 0 {
        return Err(CoreError::ParameterDomain {
            what: "pulse count must be at least 1",
        });
    }
    jitter.validate()?;
    let duration = n_pulses as f64 * period;
    let mut rng = EventRng::from_seed(seed);
    let mut raw = Vec::with_capacity(n_pulses as usize);
    for n in 0..n_pulses {
        let j = match *jitter {
            JitterSpec::None => 0.0,
            JitterSpec::Gaussian { sigma } => rng.normal(sigma),
            JitterSpec::Exponential { rate } => rng.exponential(rate),
        };
        raw.push(n as f64 * period + j);
    }
    raw.sort_unstable_by(f64::total_cmp);
    let before = raw.len();
    let mut times = Vec::with_capacity(before);
    for t in raw {
        if t < 0.0 || t > duration {
            continue;
        }
        push_strictly_increasing(&mut times, t);
    }
    let dropped = before - times.len();
    let jparam = match *jitter {
        JitterSpec::None => String::new(),
        JitterSpec::Gaussian { sigma } => format!(r#""sigma":{sigma},"#),
        JitterSpec::Exponential { rate } => format!(r#""rate":{rate},"#),
    };
    let meta = format!(
        r#"{{"generator":"pulsed","period":{period},"pulses":{n_pulses},"jitter":"{}",{jparam}"seed":{},"dropped":{dropped}}}"#,
        jitter.kind_name(),
        seed.0
    );
    Ok(EventStream::from_parts_unchecked(times, duration, meta))
}
