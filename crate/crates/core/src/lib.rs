//! Taylor-Hood finite elements for the coupled Stokes / linear-elasticity
//! resolvent problem on the square-annulus benchmark.
//!
//! The fluid occupies `Ω_f = (0,1)² \ [1/3,2/3]²` and the elastic solid
//! `Ω_s = (1/3,2/3)²`. The pipeline is
//! [`mesh`] → [`fem`] → [`solver`] → [`semigroup`] / [`analysis`], with
//! [`sparse`] providing the linear algebra.

pub mod analysis;
pub mod error;
pub mod fem;
pub mod mesh;
pub mod semigroup;
pub mod solver;
pub mod sparse;

pub use error::{FsiError, Result};
