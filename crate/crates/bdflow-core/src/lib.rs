//! Gradient-flow time stepping with backward differentiation formulas (BDF1-BDF3)
//! for semiconvex energies, together with the quadratic-form machinery that
//! certifies their discrete Lyapunov structure.
//!
//! The crate has four layers:
//!
//! * [`quadform`]: the small quadratic forms attached to the BDF schemes, their
//!   Cholesky-style parametrizations, Gauss reductions, and a certified search
//!   for the largest stability shift `beta_3 = 95/96` of BDF3.
//! * [`objective`]: semiconvex test energies (quadratics, double wells, a 1D
//!   Allen-Cahn chain, general polynomials, and glued barrier functions).
//! * [`integrator`]: the implicit BDF steppers, including the multivalued
//!   regime where a step equation has several solutions.
//! * [`lyapunov`]: discrete Lyapunov functions built from the quadratic forms,
//!   per-step descent audits, dissipation budgets, and tail diagnostics.
//!
//! The crate is `no_std`-compatible (with `alloc`); enable the `libm` feature
//! instead of the default `std` feature for builds without the standard
//! library.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("bdflow-core needs a float math backend: enable `std` (default) or `libm`");

extern crate alloc;

pub(crate) mod math;

pub mod integrator;
pub mod linalg;
pub mod lyapunov;
pub mod objective;
pub mod quadform;

pub use num_rational::Rational64;
