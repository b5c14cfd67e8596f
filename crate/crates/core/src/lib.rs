//! Discrete distributions on the non-negative integers, built by substituting
//! a Laplace transform at `1 - s`: if `phi` is the LT of a law on `[0, inf)`,
//! then `P(s) = phi(1 - s)` is the PGF of a law on `{0, 1, 2, ...}`.
//!
//! The crate has five layers:
//!
//! * [`series`]: truncated power-series arithmetic; every pmf extraction and
//!   coefficient test reduces to the O(N^2) recurrences here.
//! * [`laws`]: the law catalog (alpha-Bernoulli/binomial/Poisson, discrete
//!   Mittag-Leffler, discrete semi-stable/semi-Mittag-Leffler, and the
//!   classical special cases), PGF evaluation, LT<->PGF bridging, pmf
//!   extraction with tail accounting.
//! * [`operators`]: structural maps between laws: binomial thinning,
//!   convolution, geometric compounding, Poisson mixing, the
//!   self-decomposability quotient, Bernoulli factorization.
//! * [`checks`]: numerical verification suites for the distributional
//!   identities the catalog satisfies; each produces a [`checks::CheckReport`].
//! * [`sampling`]: variate generation for every law plus empirical-pmf
//!   utilities for stochastic verification.

pub mod checks;
pub mod laws;
pub mod operators;
pub mod sampling;
pub mod series;
