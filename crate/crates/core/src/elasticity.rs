//! Isotropic linear elastic material for plane problems.
//!
//! Strain 3-vectors are `(εxx, εyy, γxy)` with engineering shear `γxy = 2εxy`;
//! stress 3-vectors are `(σxx, σyy, σxy)`.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlaneState {
    PlaneStrain,
    PlaneStress,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Material {
    #[serde(rename = "E")]
    pub youngs_modulus: f64,
    #[serde(rename = "nu")]
    pub poisson_ratio: f64,
    pub state: PlaneState,
}

impl Material {
    pub fn new(youngs_modulus: f64, poisson_ratio: f64, state: PlaneState) -> Result<Self> {
        let m = Self {
            youngs_modulus,
            poisson_ratio,
            state,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.youngs_modulus > 0.0 && self.youngs_modulus.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "Young's modulus must be positive, got {}",
                self.youngs_modulus
            )));
        }
        if !(0.0..0.5).contains(&self.poisson_ratio) {
            return Err(Error::InvalidInput(format!(
                "Poisson ratio must lie in [0, 0.5), got {}",
                self.poisson_ratio
            )));
        }
        Ok(())
    }

    /// `D` in `σ = D ε`.
    pub fn elasticity_matrix(&self) -> Matrix3<f64> {
        let e = self.youngs_modulus;
        let nu = self.poisson_ratio;
        match self.state {
            PlaneState::PlaneStrain => {
                let c = e / ((1.0 + nu) * (1.0 - 2.0 * nu));
                Matrix3::new(
                    c * (1.0 - nu),
                    c * nu,
                    0.0,
                    c * nu,
                    c * (1.0 - nu),
                    0.0,
                    0.0,
                    0.0,
                    c * (1.0 - 2.0 * nu) / 2.0,
                )
            }
            PlaneState::PlaneStress => {
                let c = e / (1.0 - nu * nu);
                Matrix3::new(
                    c,
                    c * nu,
                    0.0,
                    c * nu,
                    c,
                    0.0,
                    0.0,
                    0.0,
                    c * (1.0 - nu) / 2.0,
                )
            }
        }
    }

    /// `D⁻¹`, the compliance used by every energy norm.
    pub fn compliance_matrix(&self) -> Matrix3<f64> {
        let e = self.youngs_modulus;
        let nu = self.poisson_ratio;
        let g = 2.0 * (1.0 + nu) / e;
        match self.state {
            PlaneState::PlaneStrain => {
                let c = (1.0 + nu) / e;
                Matrix3::new(
                    c * (1.0 - nu),
                    -c * nu,
                    0.0,
                    -c * nu,
                    c * (1.0 - nu),
                    0.0,
                    0.0,
                    0.0,
                    g,
                )
            }
            PlaneState::PlaneStress => {
                Matrix3::new(1.0 / e, -nu / e, 0.0, -nu / e, 1.0 / e, 0.0, 0.0, 0.0, g)
            }
        }
    }

    pub fn shear_modulus(&self) -> f64 {
        self.youngs_modulus / (2.0 * (1.0 + self.poisson_ratio))
    }

    pub fn kolosov(&self) -> f64 {
        let nu = self.poisson_ratio;
        match self.state {
            PlaneState::PlaneStrain => 3.0 - 4.0 * nu,
            PlaneState::PlaneStress => (3.0 - nu) / (1.0 + nu),
        }
    }

    /// `(μ, κ)`.
    pub fn elastic_constants(&self) -> (f64, f64) {
        (self.shear_modulus(), self.kolosov())
    }

    /// Out-of-plane stress under plane strain; zero for plane stress.
    pub fn sigma_z(&self, sxx: f64, syy: f64) -> f64 {
        match self.state {
            PlaneState::PlaneStrain => self.poisson_ratio * (sxx + syy),
            PlaneState::PlaneStress => 0.0,
        }
    }
}
