//! Exactly soluble model of two Bose gases coupled by a Josephson term.
//!
//! Equilibrium ([`equilibrium`]), static fluctuations of the total and
//! relative canonical pairs ([`fluctuations`]), their time evolution
//! ([`dynamics`]) and a finite-volume lattice check of all of it
//! ([`lattice`]). Units are ħ = k_B = 1.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod fluctuations;
pub mod lattice;
pub mod model;
pub mod numerics;

pub use equilibrium::{solve_equilibrium, EquilibriumSolution};
pub use error::{Error, Result};
pub use model::{Beta, ModelParams, Momentum};
