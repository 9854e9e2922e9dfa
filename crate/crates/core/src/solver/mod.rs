//! Discrete elasticity: element stiffness (compatible or strain-smoothed),
//! global assembly, elimination of constrained dofs and a sparse Cholesky solve.

mod stiffness;

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DVector, Matrix3, Point2, SVector, Vector2, Vector3};
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CooMatrix, CscMatrix};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::elasticity::Material;
use crate::error::{Error, Result};
use crate::mesh::{BoundaryTag, Mesh, SubcellLayout};
use crate::quad::{gauss_legendre, shape, BilinearMap};

pub use stiffness::{
    compatible_strain_matrix, smoothed_strain_matrix, ElementKinematics, ElementMatrix, SmoothedStrainMatrix,
    StrainMatrix,
};

/// Standard bilinear elements, or cell-based strain smoothing with a subcell layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Formulation {
    Fem,
    Sfem(SubcellLayout),
}

impl Formulation {
    pub fn sfem(nc: usize) -> Result<Self> {
        Ok(Self::Sfem(SubcellLayout::from_count(nc)?))
    }

    pub fn layout(&self) -> Option<SubcellLayout> {
        match self {
            Self::Fem => None,
            Self::Sfem(l) => Some(*l),
        }
    }
}

/// Prescribed value of one displacement component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DofConstraint {
    pub node: usize,
    /// 0 for x, 1 for y.
    pub component: usize,
    pub value: f64,
}

/// Loads and supports of a boundary value problem on a given mesh.
pub trait BoundaryConditions: Sync {
    /// Traction on a Neumann edge with tag `tag` at `p`, where `n` is the
    /// outward unit normal of the (straight) mesh edge.
    fn traction(&self, tag: BoundaryTag, p: &Point2<f64>, n: &Vector2<f64>) -> Vector2<f64>;

    fn constraints(&self, mesh: &Mesh) -> Vec<DofConstraint>;
}

/// Outward unit normal and length of boundary edge `a -> b` of a CCW element.
pub fn edge_normal(a: &Point2<f64>, b: &Point2<f64>) -> (Vector2<f64>, f64) {
    let d = b - a;
    let l = d.norm();
    (Vector2::new(d.y, -d.x) / l, l)
}

/// A solved discrete problem. Immutable once built.
#[derive(Debug, Clone)]
pub struct DiscreteSolution {
    pub mesh: Arc<Mesh>,
    pub material: Material,
    pub formulation: Formulation,
    /// Nodal displacements, `(u_x, u_y)` interleaved.
    pub displacement: DVector<f64>,
    kinematics: Vec<ElementKinematics>,
    elasticity: Matrix3<f64>,
    load: DVector<f64>,
    residual_norm: f64,
}

impl DiscreteSolution {
    pub fn n_dof(&self) -> usize {
        self.displacement.len()
    }

    pub fn elasticity(&self) -> &Matrix3<f64> {
        &self.elasticity
    }

    pub fn kinematics(&self, element: usize) -> &ElementKinematics {
        &self.kinematics[element]
    }

    pub fn element_displacements(&self, element: usize) -> SVector<f64, 8> {
        let conn = self.mesh.elements()[element].nodes;
        SVector::<f64, 8>::from_fn(|i, _| self.displacement[2 * conn[i / 2] + i % 2])
    }

    /// Raw stress at one site of an element: the constant stress of smoothing
    /// cell `site` (SFEM) or the stress at 2x2 Gauss point `site` (FEM).
    pub fn raw_stress(&self, element: usize, site: usize) -> Vector3<f64> {
        let q = self.element_displacements(element);
        self.elasticity * (self.kinematics[element].strain_matrix(site) * q)
    }

    /// Raw stress at a parent point: the owning cell's constant (SFEM) or the
    /// compatible stress at that point (FEM).
    pub fn stress_at_parent(&self, element: usize, xi: f64, eta: f64) -> Vector3<f64> {
        match self.formulation {
            Formulation::Sfem(layout) => self.raw_stress(element, layout.cell_of(xi, eta)),
            Formulation::Fem => {
                let map = self.mesh.element_map(element);
                let (b, _) = compatible_strain_matrix(&map, xi, eta);
                self.elasticity * (b * self.element_displacements(element))
            }
        }
    }

    pub fn displacement_at_parent(&self, element: usize, xi: f64, eta: f64) -> Vector2<f64> {
        let n = shape(xi, eta);
        let conn = self.mesh.elements()[element].nodes;
        let mut u = Vector2::zeros();
        for (ni, &node) in n.iter().zip(&conn) {
            u += *ni * Vector2::new(self.displacement[2 * node], self.displacement[2 * node + 1]);
        }
        u
    }

    /// `‖K_ff U_f − f_f‖` of the reduced system after the solve.
    pub fn residual_norm(&self) -> f64 {
        self.residual_norm
    }

    pub fn load(&self) -> &DVector<f64> {
        &self.load
    }

    /// `Uᵀ K U`, accumulated element by element.
    pub fn energy_product(&self) -> f64 {
        (0..self.mesh.n_elements())
            .map(|e| {
                let q = self.element_displacements(e);
                (q.transpose() * self.kinematics[e].stiffness(&self.elasticity) * q)[(0, 0)]
            })
            .sum()
    }
}

/// Wraps given nodal displacements (for instance an interpolated exact field)
/// as a solution, so post-processing can run on data that did not come from
/// a solve. Load and residual are zero.
pub fn solution_from_nodal_values(
    mesh: Arc<Mesh>,
    material: Material,
    formulation: Formulation,
    displacement: DVector<f64>,
) -> Result<DiscreteSolution> {
    material.validate()?;
    if displacement.len() != 2 * mesh.n_nodes() {
        return Err(Error::InvalidInput(format!(
            "expected {} displacement values, got {}",
            2 * mesh.n_nodes(),
            displacement.len()
        )));
    }
    let layout = formulation.layout();
    let kinematics: Vec<ElementKinematics> = (0..mesh.n_elements())
        .into_par_iter()
        .map(|e| ElementKinematics::build(e, &mesh.element_map(e), layout))
        .collect::<Result<_>>()?;
    let n_dof = displacement.len();
    Ok(DiscreteSolution {
        mesh,
        material,
        formulation,
        displacement,
        kinematics,
        elasticity: material.elasticity_matrix(),
        load: DVector::zeros(n_dof),
        residual_norm: 0.0,
    })
}

/// Assembles and solves `K U = f` with constrained dofs eliminated.
pub fn assemble_and_solve(
    mesh: Arc<Mesh>,
    material: Material,
    formulation: Formulation,
    bc: &dyn BoundaryConditions,
) -> Result<DiscreteSolution> {
    material.validate()?;
    let d = material.elasticity_matrix();
    let layout = formulation.layout();
    let kinematics: Vec<ElementKinematics> = (0..mesh.n_elements())
        .into_par_iter()
        .map(|e| ElementKinematics::build(e, &mesh.element_map(e), layout))
        .collect::<Result<_>>()?;
    let stiffness: Vec<ElementMatrix> = kinematics.par_iter().map(|k| k.stiffness(&d)).collect();

    let n_dof = 2 * mesh.n_nodes();
    let load = assemble_tractions(&mesh, bc);

    // constrained dofs
    let mut fixed: BTreeMap<usize, f64> = BTreeMap::new();
    for c in bc.constraints(&mesh) {
        if c.node >= mesh.n_nodes() || c.component > 1 {
            return Err(Error::InvalidInput(format!("invalid constraint {c:?}")));
        }
        let dof = 2 * c.node + c.component;
        if let Some(old) = fixed.insert(dof, c.value) {
            if (old - c.value).abs() > 1e-14 * old.abs().max(c.value.abs()).max(1e-300) {
                return Err(Error::InvalidInput(format!("conflicting constraints on dof {dof}")));
            }
        }
    }
    check_rigid_modes(&mesh, &fixed)?;

    let mut reduced = vec![usize::MAX; n_dof];
    let mut n_free = 0;
    for (dof, slot) in reduced.iter_mut().enumerate() {
        if !fixed.contains_key(&dof) {
            *slot = n_free;
            n_free += 1;
        }
    }
    let mut prescribed = DVector::zeros(n_dof);
    for (&dof, &v) in &fixed {
        prescribed[dof] = v;
    }

    let mut rhs = DVector::zeros(n_free);
    for dof in 0..n_dof {
        if reduced[dof] != usize::MAX {
            rhs[reduced[dof]] = load[dof];
        }
    }
    let mut coo = CooMatrix::new(n_free, n_free);
    for (e, ke) in stiffness.iter().enumerate() {
        let conn = mesh.elements()[e].nodes;
        let dofs: [usize; 8] = std::array::from_fn(|i| 2 * conn[i / 2] + i % 2);
        for (i, &gi) in dofs.iter().enumerate() {
            let ri = reduced[gi];
            if ri == usize::MAX {
                continue;
            }
            for (j, &gj) in dofs.iter().enumerate() {
                let rj = reduced[gj];
                if rj == usize::MAX {
                    rhs[ri] -= ke[(i, j)] * prescribed[gj];
                } else {
                    coo.push(ri, rj, ke[(i, j)]);
                }
            }
        }
    }
    let k = CscMatrix::from(&coo);
    let chol = CscCholesky::factor(&k).map_err(|e| {
        Error::SingularSystem(format!("Cholesky factorization failed ({e:?}); the constraints leave a mechanism"))
    })?;
    let solved = chol.solve(&rhs);
    let solved = solved.column(0);
    if solved.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem("non-finite displacements".into()));
    }
    let residual_norm = (&k * solved.clone_owned() - &rhs).norm();

    let mut displacement = prescribed;
    for dof in 0..n_dof {
        if reduced[dof] != usize::MAX {
            displacement[dof] = solved[reduced[dof]];
        }
    }
    Ok(DiscreteSolution {
        mesh,
        material,
        formulation,
        displacement,
        kinematics,
        elasticity: d,
        load,
        residual_norm,
    })
}

/// Consistent nodal forces from edge tractions (2-point Gauss per edge).
fn assemble_tractions(mesh: &Mesh, bc: &dyn BoundaryConditions) -> DVector<f64> {
    let mut f = DVector::zeros(2 * mesh.n_nodes());
    let gauss = gauss_legendre(2);
    for be in mesh.boundary() {
        if !be.tag.is_neumann() {
            continue;
        }
        let a = mesh.position(be.nodes[0]);
        let b = mesh.position(be.nodes[1]);
        let (n, len) = edge_normal(&a, &b);
        for &(s, w) in &gauss {
            let na = 0.5 * (1.0 - s);
            let nb = 0.5 * (1.0 + s);
            let p = Point2::from(na * a.coords + nb * b.coords);
            let t = bc.traction(be.tag, &p, &n) * (w * 0.5 * len);
            for (node, ni) in [(be.nodes[0], na), (be.nodes[1], nb)] {
                f[2 * node] += ni * t.x;
                f[2 * node + 1] += ni * t.y;
            }
        }
    }
    f
}

/// Fails when some combination of the two translations and the rotation is
/// left unrestrained by the constrained dofs.
fn check_rigid_modes(mesh: &Mesh, fixed: &BTreeMap<usize, f64>) -> Result<()> {
    let n = mesh.n_nodes().max(1) as f64;
    let centroid = mesh.nodes().iter().fold(Vector2::zeros(), |acc, p| acc + p.position.coords) / n;
    let scale = mesh
        .nodes()
        .iter()
        .map(|p| (p.position.coords - centroid).norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut gram = Matrix3::zeros();
    for &dof in fixed.keys() {
        let p = (mesh.position(dof / 2).coords - centroid) / scale;
        let row = if dof % 2 == 0 {
            Vector3::new(1.0, 0.0, -p.y)
        } else {
            Vector3::new(0.0, 1.0, p.x)
        };
        gram += row * row.transpose();
    }
    let eig = gram.symmetric_eigen();
    let (imin, &lmin) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .unwrap_or((0, &0.0));
    if lmin < 1e-10 * gram.amax().max(1.0) {
        let v = eig.eigenvectors.column(imin);
        let names = ["translation in x", "translation in y", "rotation"];
        let (k, _) = v
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .unwrap_or((0, &0.0));
        return Err(Error::SingularSystem(format!(
            "free rigid-body mode ({}) not removed by the constraints",
            names[k]
        )));
    }
    Ok(())
}

/// Integration helper shared by post-processing: 2D Gauss points of one
/// element, optionally restricted to each smoothing cell.
pub fn element_quadrature(
    map: &BilinearMap,
    layout: Option<SubcellLayout>,
    order: usize,
) -> Vec<(f64, f64, f64)> {
    let rects: Vec<[f64; 4]> = match layout {
        Some(l) => (0..l.count()).map(|c| l.parent_rect(c)).collect(),
        None => vec![[-1.0, 1.0, -1.0, 1.0]],
    };
    let mut pts = Vec::new();
    for [x0, x1, y0, y1] in rects {
        for (xi, eta, w) in crate::quad::tensor_rule(order, x0, x1, y0, y1) {
            let det = map.jacobian(xi, eta).determinant();
            pts.push((xi, eta, w * det));
        }
    }
    pts
}
