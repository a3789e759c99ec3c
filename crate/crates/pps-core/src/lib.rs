//! Point-process toolkit for single-photon stream statistics.
//!
//! Everything here operates on an [`EventStream`]: a finite, strictly
//! increasing list of detection times inside an observation window. Streams
//! are synthesized from a seed (Poisson backbone, pulsed trains), reshaped by
//! dead-time style transforms (gap removal / insertion, random delay
//! insertion), and measured by correlation estimators (rate, binned g²(τ),
//! waiting-time histograms, k-fold coincidences). The `analytics` module
//! evaluates the matching closed forms and carries an independent
//! convolution-series oracle so Monte-Carlo output can be checked against
//! exact curves.
//!
//! The crate is `no_std` (with `alloc`); all floating-point transcendentals
//! go through `libm` so results are bit-identical across platforms. IO, file
//! formats and the CLI live in the companion `pps-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analytics;
pub mod error;
pub mod estimators;
pub mod generate;
pub mod rng;
pub mod stream;
pub mod transforms;

pub use error::CoreError;
pub use stream::{EventStream, Rate, Seed, Violation, ViolationKind};
