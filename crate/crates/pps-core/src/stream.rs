//! The event-stream data model: timestamps, rates, seeds and validation.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::CoreError;

/// Emission rate in events per second. Always strictly positive and finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rate(f64);

impl Rate {
    pub fn new(events_per_sec: f64) -> Result<Self, CoreError> {
        if events_per_sec > 0.0 && events_per_sec.is_finite() {
            Ok(Rate(events_per_sec))
        } else {
            Err(CoreError::ParameterDomain {
                what: "rate must be strictly positive and finite",
            })
        }
    }

    pub fn per_sec(self) -> f64 {
        self.0
    }
}

/// Seed for deterministic generation: same seed + same parameters produce a
/// bit-identical stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Seed(pub u64);

/// One invariant failure found by the validator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    /// Index of the offending timestamp; `None` for stream-level failures.
    pub index: Option<usize>,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    NonFiniteTime,
    NegativeTime,
    ExceedsDuration,
    OutOfOrder,
    BadDuration,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ViolationKind::NonFiniteTime => "non-finite time",
            ViolationKind::NegativeTime => "time before zero",
            ViolationKind::ExceedsDuration => "time exceeds duration",
            ViolationKind::OutOfOrder => "out of order",
            ViolationKind::BadDuration => "duration not strictly positive",
        };
        f.write_str(s)
    }
}

/// Check event-stream invariants over raw parts. Reports every failure,
/// never panics or errors.
pub fn validate_times(times: &[f64], duration: f64) -> Vec<Violation> {
    let mut out = Vec::new();
    if !(duration > 0.0 && duration.is_finite()) {
        out.push(Violation {
            index: None,
            kind: ViolationKind::BadDuration,
        });
    }
    // Ordering is judged against the previous finite timestamp so a single
    // NaN yields one violation, not a cascade.
    let mut prev: Option<f64> = None;
    for (i, &t) in times.iter().enumerate() {
        if !t.is_finite() {
            out.push(Violation {
                index: Some(i),
                kind: ViolationKind::NonFiniteTime,
            });
            continue;
        }
        if t < 0.0 {
            out.push(Violation {
                index: Some(i),
                kind: ViolationKind::NegativeTime,
            });
        }
        if duration.is_finite() && t > duration {
            out.push(Violation {
                index: Some(i),
                kind: ViolationKind::ExceedsDuration,
            });
        }
        if let Some(p) = prev {
            if t <= p {
                out.push(Violation {
                    index: Some(i),
                    kind: ViolationKind::OutOfOrder,
                });
            }
        }
        prev = Some(t);
    }
    out
}

/// A finite photon click record: strictly increasing detection times on
/// `[0, duration]`, plus free-form provenance.
///
/// `meta` is a JSON object describing how the stream was produced (generator
/// name, parameters, seed, parent hash). It never influences any numerical
/// result; estimators read only `times` and `duration`. Streams are immutable
/// after construction and safe to share across threads. Empty streams are
/// legal: transforms and estimators are total over them.
#[derive(Debug, Clone, PartialEq)]
pub struct EventStream {
    times: Vec<f64>,
    duration: f64,
    meta: String,
}

impl EventStream {
    /// Build a stream, rejecting anything that violates the invariants.
    pub fn new(times: Vec<f64>, duration: f64, meta: String) -> Result<Self, CoreError> {
        let violations = validate_times(&times, duration);
        if violations.is_empty() {
            Ok(EventStream {
                times,
                duration,
                meta,
            })
        } else {
            Err(CoreError::InvalidStream {
                violations: violations.len(),
            })
        }
    }

    /// Build without validating. Callers must uphold the invariants; use
    /// [`EventStream::validate`] to audit. Exists so the validator can be
    /// exercised on broken data and so valid-by-construction generator output
    /// skips a redundant O(N) pass.
    pub fn from_parts_unchecked(times: Vec<f64>, duration: f64, meta: String) -> Self {
        EventStream {
            times,
            duration,
            meta,
        }
    }

    /// Re-check all invariants; empty result means the stream is valid.
    pub fn validate(&self) -> Vec<Violation> {
        validate_times(&self.times, self.duration)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn meta(&self) -> &str {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// FNV-1a over duration and timestamp bits; used to record parentage in
    /// transform metadata.
    pub fn content_hash(&self) -> u64 {
        let mut h = 0xcbf29ce484222325u64;
        let mut eat = |bytes: [u8; 8]| {
            for b in bytes {
                h ^= b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        eat(self.duration.to_le_bytes());
        for &t in &self.times {
            eat(t.to_le_bytes());
        }
        h
    }
}
