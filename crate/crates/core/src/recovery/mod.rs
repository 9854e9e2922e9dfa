//! Superconvergent patch recovery and its constrained (C), split (X) and
//! combined (CX) variants.
//!
//! Every vertex node owns a polynomial fitted to the raw stresses sampled in
//! its patch. The recovered field on an element blends the four vertex
//! polynomials with the bilinear shape functions, which makes it continuous.
//! Split patches fit only the smooth part `σ^h − σ_sing` and add the singular
//! field back when evaluated.

mod constraints;
mod fit;
mod sampling;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{Point2, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{Mode, SingularSolution};
use crate::error::{Error, Result};
use crate::gsif::{extract_gsif, PlateauFunction};
use crate::mesh::Mesh;
use crate::quad::shape;
use crate::solver::{edge_normal, BoundaryConditions, DiscreteSolution};

pub use constraints::{constraint_rows, Basis, ConstraintKind, ConstraintSet, PatchFrame, TractionPoint};
pub use fit::{fit_patch, PatchFit, Sample};
pub use sampling::{collect_sampling_points, smooth_part, SamplingPoint, SamplingSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "SPR")]
    Spr,
    #[serde(rename = "SPR-C")]
    SprC,
    #[serde(rename = "SPR-X")]
    SprX,
    #[serde(rename = "SPR-CX")]
    SprCx,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Spr, Variant::SprC, Variant::SprX, Variant::SprCx];

    /// Equilibrium, compatibility and traction constraints are imposed.
    pub fn is_constrained(self) -> bool {
        matches!(self, Variant::SprC | Variant::SprCx)
    }

    /// Singular + smooth splitting near the vertex.
    pub fn is_split(self) -> bool {
        matches!(self, Variant::SprX | Variant::SprCx)
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Spr => "SPR",
            Variant::SprC => "SPR-C",
            Variant::SprX => "SPR-X",
            Variant::SprCx => "SPR-CX",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown recovery variant '{s}' (expected SPR, SPR-C, SPR-X or SPR-CX)")))
    }
}

/// Where the stress intensity factors of the singular part come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GsifMode {
    Exact,
    Extracted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecoveryConfig {
    pub variant: Variant,
    pub interior_degree: usize,
    pub boundary_degree: usize,
    pub splitting_radius: f64,
    pub gsif_mode: GsifMode,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        Self {
            variant: Variant::SprCx,
            interior_degree: 1,
            boundary_degree: 2,
            splitting_radius: 0.5,
            gsif_mode: GsifMode::Exact,
        }
    }
}

impl RecoveryConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, d) in [("interior_degree", self.interior_degree), ("boundary_degree", self.boundary_degree)] {
            if !(1..=2).contains(&d) {
                return Err(Error::Config(format!("{name} must be 1 or 2, got {d}")));
            }
        }
        if !(self.splitting_radius >= 0.0 && self.splitting_radius.is_finite()) {
            return Err(Error::Config(format!(
                "splitting radius must be finite and non-negative, got {}",
                self.splitting_radius
            )));
        }
        if self.variant.is_split() && self.splitting_radius == 0.0 {
            log::info!("{} with zero splitting radius behaves as the unsplit variant", self.variant);
        }
        Ok(())
    }
}

/// Resolves the singular part used by the split variants: the configured
/// factors as given (exact), or factors extracted from the solution.
pub fn singular_stress_estimate(
    solution: &DiscreteSolution,
    bc: &dyn BoundaryConditions,
    singular: Option<&SingularSolution>,
    mode: GsifMode,
    plateau: &PlateauFunction,
) -> Result<SingularSolution> {
    let singular = singular.ok_or_else(|| Error::Config("the singular part needs a singular solution".into()))?;
    match mode {
        GsifMode::Exact => Ok(*singular),
        GsifMode::Extracted => {
            let k_i = extract_gsif(solution, bc, singular, Mode::I, plateau)?;
            let k_ii = extract_gsif(solution, bc, singular, Mode::II, plateau)?;
            Ok(singular.with_gsifs(k_i.k, k_ii.k))
        }
    }
}

/// A continuous recovered stress field.
#[derive(Debug, Clone)]
pub struct RecoveredStressField {
    mesh: Arc<Mesh>,
    fits: Vec<PatchFit>,
    split: Vec<bool>,
    singular: Option<SingularSolution>,
    splitting_radius: f64,
    degraded: usize,
}

impl RecoveredStressField {
    /// Builds a field directly from one fit per node.
    pub fn from_fits(mesh: Arc<Mesh>, fits: Vec<PatchFit>) -> Result<Self> {
        if fits.len() != mesh.n_nodes() || fits.iter().enumerate().any(|(i, f)| f.node != i) {
            return Err(Error::InvalidInput("expected exactly one fit per node, in node order".into()));
        }
        let n = fits.len();
        Ok(Self {
            mesh,
            fits,
            split: vec![false; n],
            singular: None,
            splitting_radius: 0.0,
            degraded: 0,
        })
    }

    pub fn fit(&self, node: usize) -> &PatchFit {
        &self.fits[node]
    }

    pub fn fits(&self) -> &[PatchFit] {
        &self.fits
    }

    pub fn is_split(&self, node: usize) -> bool {
        self.split[node]
    }

    pub fn singular(&self) -> Option<&SingularSolution> {
        self.singular.as_ref()
    }

    pub fn splitting_radius(&self) -> f64 {
        self.splitting_radius
    }

    /// Patches whose quadratic fit was singular and fell back to degree 1.
    pub fn degraded_patches(&self) -> usize {
        self.degraded
    }

    /// Blended stress at parent coordinates of `element`.
    pub fn stress_at_parent(&self, element: usize, xi: f64, eta: f64) -> Vector3<f64> {
        let map = self.mesh.element_map(element);
        let p = map.map(xi, eta);
        let n = shape(xi, eta);
        let conn = self.mesh.elements()[element].nodes;
        let mut s = Vector3::zeros();
        let mut split_weight = 0.0;
        for (ni, &node) in n.iter().zip(&conn) {
            s += *ni * self.fits[node].evaluate(&p);
            if self.split[node] {
                split_weight += ni;
            }
        }
        if split_weight != 0.0 {
            if let Some(sing) = &self.singular {
                s += split_weight * sing.stress_at(&p);
            }
        }
        s
    }

    /// Blended stress at physical point `p` inside `element`.
    pub fn recovered_stress_at(&self, element: usize, p: &Point2<f64>) -> Result<Vector3<f64>> {
        let (xi, eta) = self.mesh.element_map(element).locate(element, p)?;
        Ok(self.stress_at_parent(element, xi, eta))
    }
}

/// Traction collocation points of a patch: the patch node and the midpoint of
/// every Neumann edge that contains it. Together these are three points along
/// the boundary segment of the patch, enough for a quadratic traction. Adding
/// the far edge ends as well over-determines the fit wherever two edges meet
/// at an angle.
fn patch_tractions(
    mesh: &Mesh,
    node: usize,
    bc: &dyn BoundaryConditions,
    singular: Option<&SingularSolution>,
) -> Result<Vec<TractionPoint>> {
    let mut out = Vec::new();
    for &e in mesh.node_patch(node)? {
        for be in mesh.element_boundary_edges(e) {
            if !be.tag.is_neumann() || !be.nodes.contains(&node) {
                continue;
            }
            let a = mesh.position(be.nodes[0]);
            let b = mesh.position(be.nodes[1]);
            let (normal, _) = edge_normal(&a, &b);
            let mid = Point2::from((a.coords + b.coords) * 0.5);
            for p in [mesh.position(node), mid] {
                let mut traction = bc.traction(be.tag, &p, &normal);
                if let Some(s) = singular {
                    if (p - s.vertex).norm() > 0.0 {
                        let sing = s.stress_at(&p);
                        traction -= nalgebra::Vector2::new(
                            sing.x * normal.x + sing.z * normal.y,
                            sing.z * normal.x + sing.y * normal.y,
                        );
                    }
                }
                out.push(TractionPoint {
                    position: p,
                    normal,
                    traction,
                });
            }
        }
    }
    Ok(out)
}

fn recover_patch(
    solution: &DiscreteSolution,
    samples: &SamplingSet,
    bc: &dyn BoundaryConditions,
    config: &RecoveryConfig,
    singular: Option<&SingularSolution>,
    node: usize,
) -> Result<(PatchFit, bool)> {
    let mesh = &solution.mesh;
    let patch = mesh.node_patch(node)?;
    let center = mesh.position(node);
    let split = singular.filter(|s| (center - s.vertex).norm() < config.splitting_radius);

    let mut data: Vec<Sample> = Vec::with_capacity(patch.len() * samples.per_element());
    for &e in patch {
        for s in samples.element(e) {
            let stress = match split {
                Some(sing) => s.stress - sing.stress_at(&s.position),
                None => s.stress,
            };
            data.push(Sample {
                position: s.position,
                stress,
                weight: s.weight,
            });
        }
    }
    let corners = patch.iter().flat_map(|&e| mesh.elements()[e].nodes.map(|n| mesh.position(n)));
    let frame = PatchFrame::enclosing(center, corners);
    let boundary = mesh.is_boundary_node(node);
    let degree = if boundary { config.boundary_degree } else { config.interior_degree };
    let tractions = if config.variant.is_constrained() && boundary {
        patch_tractions(mesh, node, bc, split)?
    } else {
        Vec::new()
    };
    let compliance = solution.material.compliance_matrix();

    let attempt = |degree: usize| {
        let basis = Basis::new(degree);
        let c = constraint_rows(&basis, &frame, config.variant, &compliance, &tractions);
        fit_patch(node, &basis, &frame, &data, &c)
    };
    match attempt(degree) {
        Ok(fit) => Ok((fit, false)),
        Err(Error::SingularPatch { .. }) if degree > 1 => {
            log::warn!("patch of node {node}: degree {degree} fit is singular, falling back to degree 1");
            attempt(1).map(|fit| (fit, true))
        }
        Err(e) => Err(e),
    }
}

/// Recovers a continuous stress field from a solved problem. The split
/// variants use `singular`, carrying the stress intensity factors to apply;
/// when it is `None` they behave as their unsplit counterparts.
pub fn recover(
    solution: &DiscreteSolution,
    bc: &dyn BoundaryConditions,
    config: &RecoveryConfig,
    singular: Option<&SingularSolution>,
) -> Result<RecoveredStressField> {
    config.validate()?;
    // without a singularity there is nothing to split off
    let singular = singular.filter(|_| config.variant.is_split());
    let samples = collect_sampling_points(solution);
    let mesh = &solution.mesh;
    let results: Vec<(PatchFit, bool)> = (0..mesh.n_nodes())
        .into_par_iter()
        .map(|node| recover_patch(solution, &samples, bc, config, singular, node))
        .collect::<Result<_>>()?;
    let degraded = results.iter().filter(|r| r.1).count();
    let fits: Vec<PatchFit> = results.into_iter().map(|r| r.0).collect();
    let split = (0..mesh.n_nodes())
        .map(|n| singular.is_some_and(|s| (mesh.position(n) - s.vertex).norm() < config.splitting_radius))
        .collect();
    Ok(RecoveredStressField {
        mesh: Arc::clone(mesh),
        fits,
        split,
        singular: singular.copied(),
        splitting_radius: config.splitting_radius,
        degraded,
    })
}
