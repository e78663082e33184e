//! Monte Carlo solver for time-fractional PDEs driven by isotropic stable
//! processes, with explicit error bounds and statistical diagnostics.
//!
//! The crate is `no_std` (with `alloc`); IO, threading and file formats live
//! in the `fracmc` companion crate.

#![no_std]
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::too_many_arguments,
    clippy::redundant_guards,
    clippy::excessive_precision
)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod catalog;
pub mod diagnostics;
pub mod error;
pub mod estimator;
pub mod exec;
pub mod moments;
pub mod problem;
pub mod rng;
pub mod special;
pub mod stable;

pub use bounds::{BoundInputs, BoundsReport, Interval, TailBoundParams};
pub use error::{Error, FailureSource, NumericalFailure, Result};
pub use estimator::{default_step, estimate, estimate_parts, EstimateParts, EstimateResult, PathSample, StepMode};
pub use exec::{Executor, Sequential};
pub use moments::Moments;
pub use problem::{Endpoint, Field, Function, ProblemSpec, Shape};
pub use rng::{derive_seed, RngStream};
pub use stable::{StableSpec, SubordinatorSpec, TimeWindow};
