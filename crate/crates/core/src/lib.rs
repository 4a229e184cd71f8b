//! Littlewood-Paley analysis on the periodic torus and a pseudo-spectral
//! incompressible Euler solver built on top of it.
//!
//! Module map:
//! - [`field`]: grids, transforms, spectral calculus, random fields, file I/O
//! - [`lp_bank`]: dyadic partition of unity and `Δ_j`, `S_j`
//! - [`norms`]: `L^p`, Triebel-Lizorkin and Besov norms and ratio verifiers
//! - [`maximal`]: discrete Hardy-Littlewood maximal function and its estimates
//! - [`paraproduct`]: Bony decomposition, commutators, product estimates
//! - [`euler`]: Euler right-hand side, RK4 solver, particle flow map
//! - [`iteration`]: successive-approximation ladder
//! - [`experiments`]: solution-map experiments, reports and the CLI

pub mod calibration;
pub mod error;
pub mod euler;
pub mod experiments;
pub mod field;
pub mod iteration;
pub mod lp_bank;
pub mod maximal;
pub mod norms;
pub mod paraproduct;

pub use error::{Error, Result};
pub use field::{Grid, GridField, Repr, VectorField};
pub use lp_bank::{DyadicDecomposition, LPFilterBank, Profile};
pub use norms::{Exponent, Flavor, NormSpec, RatioReport};
