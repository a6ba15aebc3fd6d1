//! Subelliptic heat kernel on SL(2,R) with its sub-Riemannian structure:
//! kernel evaluation, Carnot–Carathéodory distance, small-time asymptotics,
//! the Heisenberg limit, functional inequalities and a Monte Carlo oracle.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod diff;
pub mod distance;
pub mod error;
pub mod group;
pub mod heisenberg;
pub mod inequalities;
pub mod kernel;
pub mod montecarlo;
pub mod quad;
pub mod selftest;
pub mod special;

pub use error::{Error, Result};
