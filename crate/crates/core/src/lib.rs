//! Stochastic Taylor expansions for path-dependent functionals.
//!
//! The classical stochastic Taylor series expands `f(Y_t) - f(Y_s)` for a
//! smooth function `f` of an SDE solution into iterated Stratonovich
//! integrals of the driver. This crate generalizes `f` to a nonanticipative
//! functional `F(t, x)` of the whole trajectory: coefficients become word
//! compositions of lifted vector fields acting through Dupire's functional
//! time/space derivatives, and the truncation is governed by the word weight
//! `‖I‖ = |I| + #zeros`, which matches the Brownian scaling `t^{‖I‖/2}` of
//! the corresponding integral.
//!
//! Modules mirror the moving parts:
//!
//! - [`path`]: sampled paths, the stopping operator, 1-variation and sup
//!   metrics, the Dupire bump.
//! - [`word`]: multi-indices over `{0,…,d}`, weights, truncation sets.
//! - [`scalar`]: a closed-under-differentiation catalog of scalar and ridge
//!   functions used by functionals and vector fields.
//! - [`functional`]: nonanticipative functionals with analytic and numeric
//!   Dupire derivatives.
//! - [`derivation`]: vector fields lifted to derivations on functionals.
//! - [`rng`]: counter-based normal sampling for reproducible parallel
//!   Monte Carlo.
//! - [`integral`]: iterated integrals over the simplex for bounded-variation
//!   and Stratonovich drivers.
//! - [`sde`]: Brownian driver sampling and the Heun (midpoint) strong solver.
//! - [`expansion`]: the truncated expansion, realized remainder, L2
//!   remainder statistics, scaling regression, and functional Ito checks.
//! - [`polynomial`]: polynomial functionals on bounded-variation paths,
//!   least-squares approximation, and the separating-word search.
//!
//! The crate is `no_std` (with `alloc`); IO, file formats, and the CLI live
//! in the companion `chenfliess-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod derivation;
pub mod expansion;
pub mod functional;
pub mod integral;
pub mod linalg;
pub mod path;
pub mod polynomial;
pub mod rng;
pub mod scalar;
pub mod sde;
pub mod word;

mod error;

pub use error::{Error, Result};
