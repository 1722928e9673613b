//! Equilibrium analysis of Hamiltonian systems, including blow-up
//! desingularization of degenerate fixed points.
//!
//! The crate is organized around a small symbolic layer and three numeric
//! layers built on top of it:
//!
//! - [`expr`] — immutable expression trees: parsing, evaluation, exact
//!   symbolic differentiation.
//! - [`hamsys`] — Hamiltonian systems: canonical vector fields, multistart
//!   equilibrium search, Jacobians, eigenvalues, classification.
//! - [`blowup`] — polar / hyperspherical blow-up charts around degenerate
//!   equilibria, angular equilibria on the r = 0 sphere, recursive blow-up,
//!   and executable fixtures for the torqued-pendulum models.
//! - [`flow`] — trajectory integration (fixed-step RK4 and adaptive RK45),
//!   closed-form linear flow near non-degenerate equilibria, and phase
//!   portrait sampling.
//!
//! The crate is `no_std`-compatible (requires `alloc`); the `std` feature
//! (default) routes floating-point primitives through the platform libm.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod blowup;
pub mod expr;
pub mod flow;
pub mod hamsys;
pub mod linalg;

mod fmath;

pub use expr::{Bindings, EvalError, Expression, ParseError};
pub use hamsys::{Classification, EquilibriumPoint, HamiltonianSystem, Matrix};
