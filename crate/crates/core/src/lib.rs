//! Average detection times of a laser-driven two-level atom under continuous
//! measurement (effective decay through a third level) and under pulsed
//! projective measurement, and the pulse interval that makes the two agree.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod continuous;
pub mod error;
pub mod matcher;
pub mod params;
pub mod pulsed;
pub mod quadrature;
pub mod roots;
pub mod sweep;
pub mod three_level;

pub use error::{Error, Result};
pub use params::{reduce_to_effective, ComplexAmplitude, EffectiveParams, ThreeLevelParams};
