//! Taylor-Hood `P2/P1` finite elements on the fluid and `P2` vector elements
//! on the solid.

pub mod assembly;
pub mod element;
pub mod quadrature;
pub mod space;

use serde::{Deserialize, Serialize};

use crate::error::{FsiError, Result};

pub use assembly::{assemble, GlobalMatrices};
pub use element::{element_matrices, element_matrix, ElementGeometry, Form};
pub use quadrature::QuadratureRule;
pub use space::{build_space, interpolate, FieldTarget, TaylorHoodSpace};

/// Lamé parameters of the solid and the resolvent shift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    pub lame_lambda: f64,
    pub lame_mu: f64,
    /// Resolvent parameter `λ > 0`.
    pub shift: f64,
}

impl Default for MaterialParams {
    fn default() -> Self {
        MaterialParams {
            lame_lambda: 1.0,
            lame_mu: 1.0,
            shift: 1.0,
        }
    }
}

impl MaterialParams {
    pub fn new(lame_lambda: f64, lame_mu: f64, shift: f64) -> Result<Self> {
        let p = MaterialParams {
            lame_lambda,
            lame_mu,
            shift,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_shift(self, shift: f64) -> Self {
        MaterialParams { shift, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lame_mu.is_finite() && self.lame_mu > 0.0) {
            return Err(FsiError::InvalidParams(format!(
                "lame_mu must be > 0, got {}",
                self.lame_mu
            )));
        }
        if !(self.lame_lambda.is_finite() && self.lame_lambda >= 0.0) {
            return Err(FsiError::InvalidParams(format!(
                "lame_lambda must be >= 0, got {}",
                self.lame_lambda
            )));
        }
        if !(self.shift.is_finite() && self.shift > 0.0) {
            return Err(FsiError::InvalidParams(format!(
                "shift must be > 0, got {}",
                self.shift
            )));
        }
        Ok(())
    }
}
