//! IO, file formats, comparison harness and CLI for the point-process
//! photon toolkit. The algorithms live in `pps-core`; this crate adds the
//! std-side surface: stream and histogram files, the Monte-Carlo-vs-analytic
//! comparator, sharded parallel estimation and the `pps` binary.

pub mod cli;
pub mod compare;
pub mod config;
pub mod formats;
pub mod parallel;
pub mod reproduce;
