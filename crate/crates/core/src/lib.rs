//! Large quadratic character sums over fundamental discriminants.
//!
//! The crate computes `M(χ_d)`, its attaining cutoff and the normalized size
//! `m(χ_d)` for every fundamental discriminant up to a bound, along with the
//! auxiliary quantities used to study characters with large sums: truncated
//! Fourier expansions, friable exponential sums, the Dickman function,
//! rational approximations, pretentious distances and short Euler products.
//! [`verify`] ties them together into scans and statistical reports.

// `!(x >= lo)` guards reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arith;
pub mod charsum;
pub mod consts;
pub mod dataset;
pub mod dickman;
pub mod error;
pub mod exec;
pub mod polya;
pub mod pretend;
pub mod rational;
pub mod verify;

pub use error::{Error, Result};
