use nalgebra::{Point2, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::elasticity::{Material, PlaneState};
use crate::error::{Error, Result};

/// Thick-walled cylinder under internal pressure, plane strain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylinderProblem {
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub pressure: f64,
    pub material: Material,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderStress {
    /// `(σxx, σyy, σxy)`.
    pub cartesian: Vector3<f64>,
    pub sigma_z: f64,
}

impl CylinderProblem {
    pub fn new(inner_radius: f64, outer_radius: f64, pressure: f64, material: Material) -> Result<Self> {
        material.validate()?;
        if material.state != PlaneState::PlaneStrain {
            return Err(Error::InvalidInput("the cylinder solution is plane strain".into()));
        }
        if !(inner_radius > 0.0 && inner_radius < outer_radius && outer_radius.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "inner radius must be smaller than outer radius (a = {inner_radius}, b = {outer_radius})"
            )));
        }
        if !pressure.is_finite() {
            return Err(Error::InvalidInput("pressure must be finite".into()));
        }
        Ok(Self {
            inner_radius,
            outer_radius,
            pressure,
            material,
        })
    }

    fn ratio_term(&self) -> f64 {
        let c = self.outer_radius / self.inner_radius;
        self.pressure / (c * c - 1.0)
    }

    fn check(&self, r: f64) -> Result<()> {
        let tol = 1e-12 * self.outer_radius;
        if r < self.inner_radius - tol || r > self.outer_radius + tol {
            return Err(Error::InvalidInput(format!(
                "point at r = {r} lies outside the annulus [{}, {}]",
                self.inner_radius, self.outer_radius
            )));
        }
        Ok(())
    }

    pub fn radial_displacement(&self, r: f64) -> f64 {
        let nu = self.material.poisson_ratio;
        let b2 = self.outer_radius * self.outer_radius;
        self.ratio_term() * (1.0 + nu) / self.material.youngs_modulus * (r * (1.0 - 2.0 * nu) + b2 / r)
    }

    /// `(σ_r, σ_t)` at radius `r`.
    pub fn polar_stress(&self, r: f64) -> (f64, f64) {
        let k = self.ratio_term();
        let b2r2 = (self.outer_radius / r).powi(2);
        (k * (1.0 - b2r2), k * (1.0 + b2r2))
    }

    pub fn displacement(&self, x: f64, y: f64) -> Result<Vector2<f64>> {
        let r = x.hypot(y);
        self.check(r)?;
        Ok(self.displacement_extended(&Point2::new(x, y)))
    }

    pub fn stress(&self, x: f64, y: f64) -> Result<CylinderStress> {
        let r = x.hypot(y);
        self.check(r)?;
        let cartesian = self.stress_extended(&Point2::new(x, y));
        Ok(CylinderStress {
            cartesian,
            sigma_z: 2.0 * self.material.poisson_ratio * self.ratio_term(),
        })
    }

    /// Closed-form displacement without the annulus check. Points on chords
    /// of the polygonal mesh boundary sit slightly outside `[a, b]`.
    pub fn displacement_extended(&self, p: &Point2<f64>) -> Vector2<f64> {
        let r = p.coords.norm();
        self.radial_displacement(r) * p.coords / r
    }

    pub fn stress_extended(&self, p: &Point2<f64>) -> Vector3<f64> {
        let r = p.coords.norm();
        let (c, s) = (p.x / r, p.y / r);
        let (sr, st) = self.polar_stress(r);
        Vector3::new(sr * c * c + st * s * s, sr * s * s + st * c * c, (sr - st) * s * c)
    }
}
