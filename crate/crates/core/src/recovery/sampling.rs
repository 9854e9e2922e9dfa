use nalgebra::{Point2, Vector3};

use crate::analytic::SingularSolution;
use crate::quad::tensor_rule;
use crate::solver::{DiscreteSolution, ElementKinematics};

/// A raw stress value attached to a point of an element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingPoint {
    pub element: usize,
    pub position: Point2<f64>,
    pub stress: Vector3<f64>,
    /// Gauss weight times the Jacobian determinant.
    pub weight: f64,
}

/// All sampling points of a solution, stored element by element with the same
/// count per element.
#[derive(Debug, Clone)]
pub struct SamplingSet {
    points: Vec<SamplingPoint>,
    per_element: usize,
}

impl SamplingSet {
    pub fn points(&self) -> &[SamplingPoint] {
        &self.points
    }

    pub fn per_element(&self) -> usize {
        self.per_element
    }

    pub fn element(&self, e: usize) -> &[SamplingPoint] {
        &self.points[e * self.per_element..(e + 1) * self.per_element]
    }
}

/// SFEM: the constant stress of each smoothing cell is copied to the 2x2 Gauss
/// points of that cell. FEM: the stresses at the element's 2x2 Gauss points.
pub fn collect_sampling_points(solution: &DiscreteSolution) -> SamplingSet {
    let mesh = &solution.mesh;
    let mut points = Vec::new();
    let mut per_element = 0;
    for e in 0..mesh.n_elements() {
        let map = mesh.element_map(e);
        let start = points.len();
        match solution.kinematics(e) {
            ElementKinematics::Smoothed { cells, .. } => {
                for (c, cell) in cells.iter().enumerate() {
                    let stress = solution.raw_stress(e, c);
                    let [x0, x1, y0, y1] = cell.parent;
                    for (xi, eta, w) in tensor_rule(2, x0, x1, y0, y1) {
                        points.push(SamplingPoint {
                            element: e,
                            position: map.map(xi, eta),
                            stress,
                            weight: w * map.jacobian(xi, eta).determinant(),
                        });
                    }
                }
            }
            ElementKinematics::Gauss { points: gauss, .. } => {
                for (site, &(xi, eta, w)) in gauss.iter().enumerate() {
                    points.push(SamplingPoint {
                        element: e,
                        position: map.map(xi, eta),
                        stress: solution.raw_stress(e, site),
                        weight: w,
                    });
                }
            }
        }
        per_element = points.len() - start;
    }
    SamplingSet { points, per_element }
}

/// Subtracts the singular stress from every sample closer than `radius` to
/// the singular vertex. Samples farther away are returned unchanged.
pub fn smooth_part(samples: &[SamplingPoint], singular: &SingularSolution, radius: f64) -> Vec<SamplingPoint> {
    samples
        .iter()
        .map(|s| {
            let r = (s.position - singular.vertex).norm();
            if r < radius && r > 0.0 {
                SamplingPoint {
                    stress: s.stress - singular.stress_at(&s.position),
                    ..*s
                }
            } else {
                *s
            }
        })
        .collect()
}
