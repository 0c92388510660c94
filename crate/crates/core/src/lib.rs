//! Numerical laboratory for semiclassical radial Schrödinger operators.
//!
//! The operators under study act on the half-line after separation in polar
//! coordinates: `Q = D_r^2 + nu^2/r^2 + V(r) - E ± i*eps` with `D_r = -i h d/dr`,
//! where `nu` is the scaled angular momentum of one spherical-harmonic mode.
//! The central measured quantity is the log of the weighted resolvent norm,
//! `g = log || (r+1)^{-s} Q^{-1} (r+1)^{-s} ||`, maximised over the angular
//! modes that survive a coercive truncation.
//!
//! Modules:
//! - [`potential`]: radial potential families (power/log decay, Hölder
//!   oscillatory, barriers, samples) plus mollification machinery.
//! - [`modes`]: sphere eigenvalues, scaled angular momenta and the certified
//!   mode truncation.
//! - [`operator1d`]: tridiagonal discretisation, complex solves and the
//!   weighted resolvent norm via power iteration on the Hermitian square.
//! - [`carleman`]: phase/weight constructions and the pointwise certificates
//!   (curvature constant, energy-density identity, mollifier remainder bound).
//! - [`exponents`]: the regime table of scales `(tau, tau1, theta)` and the
//!   exponent linear systems with their closed-form cross-checks.
//! - [`sweep`]: h-sweeps of `g`, scaling-law fits and bound consistency.
//!
//! The crate is `no_std` (with `alloc`); all floating-point math goes through
//! `num-traits`/`libm`, which keeps results bit-reproducible across hosts.

#![no_std]

extern crate alloc;

pub mod carleman;
mod error;
pub mod exponents;
pub mod modes;
pub mod operator1d;
pub mod potential;
pub mod quad;
pub mod sweep;

pub use error::{Error, Result};
