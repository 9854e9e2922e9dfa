//! Boundary value problems of the two benchmarks: the pressurized cylinder
//! quadrant and the L-shaped domain loaded by the mode-I asymptotic field.

use std::f64::consts::PI;

use nalgebra::{Point2, Vector2, Vector3};

use crate::analytic::{CylinderProblem, ExactField, SingularSolution};
use crate::error::Result;
use crate::mesh::{tags, BoundaryTag, Mesh};
use crate::solver::{BoundaryConditions, DofConstraint};

fn traction_of(s: &Vector3<f64>, n: &Vector2<f64>) -> Vector2<f64> {
    Vector2::new(s.x * n.x + s.z * n.y, s.z * n.x + s.y * n.y)
}

/// Cylinder quadrant with symmetry supports. Neumann edges receive the exact
/// traction `σ·n` of the closed-form solution evaluated on the straight mesh
/// edges, so the closed form solves the polygonal problem exactly.
#[derive(Debug, Clone, Copy)]
pub struct CylinderBenchmark {
    pub problem: CylinderProblem,
}

impl BoundaryConditions for CylinderBenchmark {
    fn traction(&self, _tag: BoundaryTag, p: &Point2<f64>, n: &Vector2<f64>) -> Vector2<f64> {
        traction_of(&self.problem.stress_extended(p), n)
    }

    fn constraints(&self, mesh: &Mesh) -> Vec<DofConstraint> {
        let mut out = Vec::new();
        for be in mesh.boundary() {
            let component = match be.tag {
                t if t == tags::CYLINDER_FIX_Y => 1,
                t if t == tags::CYLINDER_FIX_X => 0,
                _ => continue,
            };
            for &node in &be.nodes {
                out.push(DofConstraint {
                    node,
                    component,
                    value: 0.0,
                });
            }
        }
        out.sort_by_key(|c| (c.node, c.component));
        out.dedup_by_key(|c| (c.node, c.component));
        out
    }
}

/// L-shaped domain with every boundary edge loaded by the exact asymptotic
/// tractions. Rigid motion is removed by pinning three dofs to the exact
/// displacement at two far nodes.
#[derive(Debug, Clone, Copy)]
pub struct LShapeBenchmark {
    pub solution: SingularSolution,
    pub half_width: f64,
}

impl LShapeBenchmark {
    pub fn new(material: crate::elasticity::Material, k_i: f64, k_ii: f64, half_width: f64) -> Result<Self> {
        Ok(Self {
            solution: SingularSolution::new(1.5 * PI, material, k_i, k_ii)?,
            half_width,
        })
    }

    /// The two pinned nodes: the far corner on the bisector (both components)
    /// and one far corner off the bisector (x component).
    pub fn pinned_points(&self) -> [Point2<f64>; 2] {
        let d = self.half_width * 2f64.sqrt();
        [Point2::new(d, 0.0), Point2::new(0.0, -d)]
    }
}

impl BoundaryConditions for LShapeBenchmark {
    fn traction(&self, _tag: BoundaryTag, p: &Point2<f64>, n: &Vector2<f64>) -> Vector2<f64> {
        if p.coords.norm() == 0.0 {
            return Vector2::zeros();
        }
        traction_of(&self.solution.stress_at(p), n)
    }

    fn constraints(&self, mesh: &Mesh) -> Vec<DofConstraint> {
        let [a, b] = self.pinned_points();
        let na = mesh.nearest_node(&a);
        let nb = mesh.nearest_node(&b);
        let ua = self.solution.displacement(&mesh.position(na));
        let ub = self.solution.displacement(&mesh.position(nb));
        vec![
            DofConstraint {
                node: na,
                component: 0,
                value: ua.x,
            },
            DofConstraint {
                node: na,
                component: 1,
                value: ua.y,
            },
            DofConstraint {
                node: nb,
                component: 0,
                value: ub.x,
            },
        ]
    }
}

/// Homogeneous linear displacement field with all boundary nodes prescribed:
/// the patch test.
#[derive(Debug, Clone, Copy)]
pub struct LinearField {
    /// `u = c + G x` with `G` row-major `[[gxx, gxy], [gyx, gyy]]`.
    pub offset: Vector2<f64>,
    pub gradient: nalgebra::Matrix2<f64>,
    pub elasticity: nalgebra::Matrix3<f64>,
}

impl LinearField {
    pub fn strain(&self) -> Vector3<f64> {
        let g = &self.gradient;
        Vector3::new(g[(0, 0)], g[(1, 1)], g[(0, 1)] + g[(1, 0)])
    }
}

impl ExactField for LinearField {
    fn displacement(&self, p: &Point2<f64>) -> Vector2<f64> {
        self.offset + self.gradient * p.coords
    }

    fn stress(&self, _p: &Point2<f64>) -> Vector3<f64> {
        self.elasticity * self.strain()
    }
}

impl BoundaryConditions for LinearField {
    fn traction(&self, _tag: BoundaryTag, p: &Point2<f64>, n: &Vector2<f64>) -> Vector2<f64> {
        traction_of(&self.stress(p), n)
    }

    fn constraints(&self, mesh: &Mesh) -> Vec<DofConstraint> {
        let mut out = Vec::new();
        for node in mesh.nodes() {
            if mesh.is_boundary_node(node.id) {
                let u = self.displacement(&node.position);
                out.push(DofConstraint {
                    node: node.id,
                    component: 0,
                    value: u.x,
                });
                out.push(DofConstraint {
                    node: node.id,
                    component: 1,
                    value: u.y,
                });
            }
        }
        out
    }
}

/// A square patch-test mesh of `n x n` elements on `[0, side]²` whose interior
/// nodes are perturbed deterministically. All edges are tagged Dirichlet.
pub fn distorted_square_mesh(n: usize, side: f64, distortion: f64) -> Result<Mesh> {
    use crate::mesh::{BoundaryEdge, Node, QuadElement};
    let h = side / n as f64;
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut nodes = Vec::new();
    for j in 0..=n {
        for i in 0..=n {
            let mut p = Point2::new(i as f64 * h, j as f64 * h);
            if i > 0 && i < n && j > 0 && j < n {
                // fixed pseudo-random offsets, reproducible across runs
                let s = ((i * 7 + j * 13) % 11) as f64 / 10.0 - 0.5;
                let t = ((i * 5 + j * 3) % 7) as f64 / 6.0 - 0.5;
                p.x += distortion * h * s;
                p.y += distortion * h * t;
            }
            nodes.push(Node { id: id(i, j), position: p });
        }
    }
    let mut elements = Vec::new();
    let mut boundary = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let e = elements.len();
            let conn = [id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)];
            elements.push(QuadElement { id: e, nodes: conn });
            let on = [j == 0, i == n - 1, j == n - 1, i == 0];
            for (k, &b) in on.iter().enumerate() {
                if b {
                    boundary.push(BoundaryEdge {
                        element: e,
                        local_edge: k,
                        nodes: [conn[k], conn[(k + 1) % 4]],
                        tag: BoundaryTag::Dirichlet(0),
                    });
                }
            }
        }
    }
    Mesh::from_parts(nodes, elements, boundary)
}
