//! Generalized stress intensity factors from a discrete solution.
//!
//! The extraction uses the reciprocal work theorem with the dual eigenfield
//! (exponent `-λ`) as auxiliary field. For two equilibrated, traction-free
//! fields the contour integral `∮ (σ n · w − τ n · u) ds` around the vertex is
//! independent of the radius, so it can be spread over a ring with a plateau
//! weight `q` and evaluated as a domain integral.

use nalgebra::{Point2, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::analytic::{Eigenfield, Mode, SingularSolution};
use crate::error::{Error, Result};
use crate::quad::{gauss_legendre, PARENT_CORNERS};
use crate::solver::{edge_normal, element_quadrature, BoundaryConditions, DiscreteSolution};

/// Weight `q(r)`: 1 up to `r_plateau`, linear down to 0 at `r_outer`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlateauFunction {
    pub r_plateau: f64,
    pub r_outer: f64,
    pub center: Point2<f64>,
}

impl Default for PlateauFunction {
    fn default() -> Self {
        Self {
            r_plateau: 0.45,
            r_outer: 0.9,
            center: Point2::origin(),
        }
    }
}

impl PlateauFunction {
    pub fn new(r_plateau: f64, r_outer: f64, center: Point2<f64>) -> Result<Self> {
        let p = Self {
            r_plateau,
            r_outer,
            center,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_plateau > 0.0 && self.r_plateau < self.r_outer && self.r_outer.is_finite()) {
            return Err(Error::Config(format!(
                "plateau radii must satisfy 0 < r_plateau < r_outer (got {} and {})",
                self.r_plateau, self.r_outer
            )));
        }
        Ok(())
    }

    pub fn plateau(&self, r: f64) -> f64 {
        if r <= self.r_plateau {
            1.0
        } else if r >= self.r_outer {
            0.0
        } else {
            (self.r_outer - r) / (self.r_outer - self.r_plateau)
        }
    }

    pub fn value(&self, p: &Point2<f64>) -> f64 {
        self.plateau((p - self.center).norm())
    }

    /// `∇q`, zero outside the ramp.
    pub fn gradient(&self, p: &Point2<f64>) -> Vector2<f64> {
        let d = p - self.center;
        let r = d.norm();
        if r <= self.r_plateau || r >= self.r_outer {
            return Vector2::zeros();
        }
        -d / (r * (self.r_outer - self.r_plateau))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GsifEstimate {
    pub mode: Mode,
    pub k: f64,
    /// Elements with at least one quadrature point on the ramp.
    pub ring_elements: usize,
}

fn traction(s: &Vector3<f64>, n: &Vector2<f64>) -> Vector2<f64> {
    Vector2::new(s.x * n.x + s.z * n.y, s.z * n.x + s.y * n.y)
}

/// Reciprocal work flux `F_j = σ_ij w_i − τ_ij u_i`.
fn flux(sigma: &Vector3<f64>, w: &Vector2<f64>, tau: &Vector3<f64>, u: &Vector2<f64>) -> Vector2<f64> {
    Vector2::new(
        sigma.x * w.x + sigma.z * w.y - (tau.x * u.x + tau.z * u.y),
        sigma.z * w.x + sigma.y * w.y - (tau.z * u.x + tau.y * u.y),
    )
}

struct Auxiliary<'a> {
    singular: &'a SingularSolution,
    dual: Eigenfield,
    mu: f64,
    kappa: f64,
}

impl Auxiliary<'_> {
    fn at(&self, p: &Point2<f64>) -> (Vector2<f64>, Vector3<f64>) {
        let (r, phi) = self.singular.polar(p);
        (self.dual.displacement(r, phi, self.mu, self.kappa), self.dual.stress(r, phi))
    }
}

/// Contour integral of the unit primal eigenfield against its dual on `r = 1`.
pub fn reciprocal_normalization(singular: &SingularSolution, mode: Mode) -> f64 {
    let (mu, kappa) = singular.material.elastic_constants();
    let primal = *singular.eigenfield(mode);
    let dual = primal.dual();
    let half = 0.5 * singular.alpha;
    gauss_legendre(64)
        .into_iter()
        .map(|(s, w)| {
            let phi = half * s;
            let er = Vector2::new(phi.cos(), phi.sin());
            let f = flux(
                &primal.stress(1.0, phi),
                &dual.displacement(1.0, phi, mu, kappa),
                &dual.stress(1.0, phi),
                &primal.displacement(1.0, phi, mu, kappa),
            );
            w * half * f.dot(&er)
        })
        .sum()
}

/// Estimates the factor of `mode` in `solution`. `bc` supplies the tractions
/// on Neumann edges that the plateau support reaches; on other edges the raw
/// stress traction is used.
pub fn extract_gsif(
    solution: &DiscreteSolution,
    bc: &dyn BoundaryConditions,
    singular: &SingularSolution,
    mode: Mode,
    plateau: &PlateauFunction,
) -> Result<GsifEstimate> {
    plateau.validate()?;
    let (mu, kappa) = solution.material.elastic_constants();
    let aux = Auxiliary {
        singular,
        dual: singular.eigenfield(mode).dual(),
        mu,
        kappa,
    };
    let mesh = &solution.mesh;
    let layout = solution.formulation.layout();

    let mut domain = 0.0;
    let mut ring_elements = 0;
    for e in 0..mesh.n_elements() {
        let map = mesh.element_map(e);
        let mut touched = false;
        for (xi, eta, w) in element_quadrature(&map, layout, 2) {
            let p = map.map(xi, eta);
            let gq = plateau.gradient(&p);
            if gq == Vector2::zeros() {
                continue;
            }
            touched = true;
            let (wa, ta) = aux.at(&p);
            let f = flux(
                &solution.stress_at_parent(e, xi, eta),
                &wa,
                &ta,
                &solution.displacement_at_parent(e, xi, eta),
            );
            domain += gq.dot(&f) * w;
        }
        ring_elements += usize::from(touched);
    }
    if ring_elements == 0 {
        return Err(Error::EmptyRing);
    }

    let gauss = gauss_legendre(4);
    let mut boundary = 0.0;
    for be in mesh.boundary() {
        let a = mesh.position(be.nodes[0]);
        let b = mesh.position(be.nodes[1]);
        let (n, len) = edge_normal(&a, &b);
        let (p0, p1) = (PARENT_CORNERS[be.local_edge], PARENT_CORNERS[(be.local_edge + 1) % 4]);
        for &(s, w) in &gauss {
            let t = 0.5 * (1.0 + s);
            let p = Point2::from(a.coords * (1.0 - t) + b.coords * t);
            let q = plateau.value(&p);
            if q == 0.0 || (p - singular.vertex).norm() == 0.0 {
                continue;
            }
            let (xi, eta) = (p0.0 + t * (p1.0 - p0.0), p0.1 + t * (p1.1 - p0.1));
            let tr = if be.tag.is_neumann() {
                bc.traction(be.tag, &p, &n)
            } else {
                traction(&solution.stress_at_parent(be.element, xi, eta), &n)
            };
            let (wa, ta) = aux.at(&p);
            let u = solution.displacement_at_parent(be.element, xi, eta);
            boundary += q * (tr.dot(&wa) - traction(&ta, &n).dot(&u)) * w * 0.5 * len;
        }
    }

    let k = (boundary - domain) / reciprocal_normalization(singular, mode);
    if !k.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite stress intensity factor for mode {mode:?}")));
    }
    Ok(GsifEstimate { mode, k, ring_elements })
}
