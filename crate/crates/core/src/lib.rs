//! Composition operators on the Hardy space of Dirichlet series with
//! square-summable coefficients.
//!
//! The crate models symbols of the form `φ(s) = c₀s + ψ(s)` where `c₀` is a
//! non-negative integer (the characteristic) and `ψ` is a Dirichlet
//! polynomial. It decides membership in the Gordon–Hedenmalm class, computes
//! range information by global minimization over the Bohr torus, evaluates
//! reproducing kernels built on the Riemann zeta function, and turns the
//! known compactness and connected-component criteria for the induced
//! composition operators `C_φ` into executable verdicts with machine-checkable
//! certificates.
//!
//! Modules roughly follow the mathematical layering:
//!
//! * [`numtheory`] — factorization, multiplicative independence over ℚ,
//!   weighted partitions and their coefficient combinatorics;
//! * [`dirichlet`] — sparse Dirichlet-polynomial arithmetic, norms, twists,
//!   and the exponential `p^{-ψ(s)}`;
//! * [`bohr`] — Bohr lifts to polynomials on the polydisc;
//! * [`symbols`] — the symbol model, classification, range analysis, and
//!   path/perturbation constructors;
//! * [`kernels`] — zeta evaluation, reproducing-kernel families, adjoint
//!   images and kernel test sequences;
//! * [`analysis`] — boundary data, contact orders, essential-norm lower
//!   bounds, linear-combination obstructions and compactness verdicts;
//! * [`dsl`] — a small expression language for entering symbols as text.
//!
//! All operations are pure functions on immutable values and are safe to use
//! concurrently. Every grid, sample set and tie-break rule is deterministic,
//! so identical inputs produce identical outputs bit for bit.

// Index-style loops are the clearer idiom in the small dense linear algebra
// and odometer scans used here.
#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod bohr;
pub mod dirichlet;
pub mod dsl;
mod error;
pub mod kernels;
pub mod numtheory;
pub mod symbols;
pub mod util;

pub use error::{Error, Result};
