//! Point-directions: a base point together with a supporting direction.

use serde::{Deserialize, Serialize};

use crate::error::{HmxError, Result};

/// Default lower bound on `‖y‖`; directions closer to the zero section are
/// rejected.
pub const EPS_Y: f64 = 1e-6;

/// A point `x` of the base manifold with a nonzero supporting direction `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointDirection {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl PointDirection {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<PointDirection> {
        if x.len() != y.len() {
            return Err(HmxError::config(format!(
                "x has dimension {}, y has dimension {}",
                x.len(),
                y.len()
            )));
        }
        if x.len() < 2 {
            return Err(HmxError::config("dimension must be at least 2"));
        }
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < EPS_Y {
            return Err(HmxError::config(format!(
                "direction norm {norm:.3e} below {EPS_Y:.0e}"
            )));
        }
        Ok(PointDirection { x, y })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Same point, direction scaled by `lambda` (used by homogeneity checks).
    pub fn rescaled(&self, lambda: f64) -> PointDirection {
        PointDirection {
            x: self.x.clone(),
            y: self.y.iter().map(|v| v * lambda).collect(),
        }
    }
}
