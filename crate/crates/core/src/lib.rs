//! Quasi-Monte Carlo error-rate laboratory.
//!
//! * [`sequences`]: exact van der Corput, Halton and Sobol' points, generating
//!   matrices and `(t, m, d)`-net checks.
//! * [`integrands`]: the test integrands with exact evaluation and means.
//! * [`errorlab`]: running error traces, records, local discrepancy and the
//!   closed-form van der Corput prefix sums.
//! * [`netcount`]: exact point counts of digital nets in anchored boxes via
//!   GF(2) elimination, up to `n = 2^128`.
//! * [`rkhs`]: the unanchored Sobolev kernel, worst-case errors, optimal
//!   weights and the Roth-style lower-bound certificate.
//! * [`experiments`]: figure-reproduction runs writing CSV, manifests and plot
//!   scripts, plus the cross-module `verify` report.

pub mod error;
pub mod experiments;
pub mod errorlab;
pub mod gf2;
pub mod integrands;
pub mod netcount;
pub mod rkhs;
pub mod sequences;

pub use error::{Error, Result};
