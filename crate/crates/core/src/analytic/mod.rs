//! Closed-form benchmark solutions.

mod cylinder;
mod williams;

use nalgebra::{Point2, Vector2, Vector3};

pub use cylinder::{CylinderProblem, CylinderStress};
pub use williams::{q_constant, solve_singularity_eigenvalue, Eigenfield, Mode, QConstant, SingularSolution};

/// An exact solution that can be sampled anywhere in the discrete domain.
pub trait ExactField: Sync {
    fn displacement(&self, p: &Point2<f64>) -> Vector2<f64>;

    fn stress(&self, p: &Point2<f64>) -> Vector3<f64>;

    /// Location of a stress singularity, if any.
    fn singular_point(&self) -> Option<Point2<f64>> {
        None
    }
}

impl ExactField for CylinderProblem {
    fn displacement(&self, p: &Point2<f64>) -> Vector2<f64> {
        self.displacement_extended(p)
    }

    fn stress(&self, p: &Point2<f64>) -> Vector3<f64> {
        self.stress_extended(p)
    }
}

impl ExactField for SingularSolution {
    fn displacement(&self, p: &Point2<f64>) -> Vector2<f64> {
        self.displacement_at(p)
    }

    fn stress(&self, p: &Point2<f64>) -> Vector3<f64> {
        self.stress_at(p)
    }

    fn singular_point(&self) -> Option<Point2<f64>> {
        Some(self.vertex)
    }
}
