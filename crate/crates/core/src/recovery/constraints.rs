use nalgebra::{DMatrix, DVector, Matrix3, Point2, Vector2};

use super::Variant;

/// Relative pivot below which a constraint row counts as dependent.
const DEPENDENT_ROW_TOL: f64 = 1e-10;

/// Complete polynomial basis of total degree `degree` in patch coordinates,
/// ordered `1, X, Y, X², XY, Y², …`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Basis {
    degree: usize,
    exponents: Vec<(i32, i32)>,
}

impl Basis {
    pub fn new(degree: usize) -> Self {
        let mut exponents = Vec::new();
        for total in 0..=degree as i32 {
            for py in 0..=total {
                exponents.push((total - py, py));
            }
        }
        Self { degree, exponents }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self) -> &[(i32, i32)] {
        &self.exponents
    }

    pub fn eval(&self, x: f64, y: f64) -> DVector<f64> {
        DVector::from_iterator(
            self.len(),
            self.exponents.iter().map(|&(px, py)| x.powi(px) * y.powi(py)),
        )
    }

    fn index_of(&self, px: i32, py: i32) -> Option<usize> {
        self.exponents.iter().position(|&e| e == (px, py))
    }
}

/// Local frame of a patch: centred on the patch node and scaled so that every
/// patch point lies in `[-1, 1]²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchFrame {
    pub center: Point2<f64>,
    pub scale: f64,
}

impl PatchFrame {
    pub fn enclosing(center: Point2<f64>, points: impl IntoIterator<Item = Point2<f64>>) -> Self {
        let scale = points
            .into_iter()
            .map(|p| (p.x - center.x).abs().max((p.y - center.y).abs()))
            .fold(0.0, f64::max);
        Self {
            center,
            scale: if scale > 0.0 { scale } else { 1.0 },
        }
    }

    pub fn local(&self, p: &Point2<f64>) -> (f64, f64) {
        ((p.x - self.center.x) / self.scale, (p.y - self.center.y) / self.scale)
    }
}

/// A point where `σ*·n` is prescribed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TractionPoint {
    pub position: Point2<f64>,
    pub normal: Vector2<f64>,
    pub traction: Vector2<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    Equilibrium,
    Compatibility,
    Traction,
}

/// Linear constraints `C a = r` on the stacked coefficients
/// `a = [a_xx; a_yy; a_xy]`, each row of unit norm and linearly independent.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet {
    pub rows: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub kinds: Vec<ConstraintKind>,
}

impl ConstraintSet {
    pub fn empty(n_coefficients: usize) -> Self {
        Self {
            rows: DMatrix::zeros(0, n_coefficients),
            rhs: DVector::zeros(0),
            kinds: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    pub fn count(&self, kind: ConstraintKind) -> usize {
        self.kinds.iter().filter(|&&k| k == kind).count()
    }
}

struct RowBuilder {
    n: usize,
    rows: Vec<(DVector<f64>, f64, ConstraintKind)>,
}

impl RowBuilder {
    fn push(&mut self, row: DVector<f64>, rhs: f64, kind: ConstraintKind) {
        debug_assert_eq!(row.len(), self.n);
        self.rows.push((row, rhs, kind));
    }

    /// Normalizes rows and drops the ones that depend on earlier rows
    /// (modified Gram-Schmidt on the row space).
    fn finish(self) -> ConstraintSet {
        let mut basis: Vec<DVector<f64>> = Vec::new();
        let mut kept = Vec::new();
        for (row, rhs, kind) in self.rows {
            let norm = row.norm();
            if norm == 0.0 {
                continue;
            }
            let (row, rhs) = (row / norm, rhs / norm);
            let mut v = row.clone();
            for b in &basis {
                let c = b.dot(&v);
                v.axpy(-c, b, 1.0);
            }
            let vn = v.norm();
            if vn > DEPENDENT_ROW_TOL {
                basis.push(v / vn);
                kept.push((row, rhs, kind));
            }
        }
        let mut rows = DMatrix::zeros(kept.len(), self.n);
        let mut rhs = DVector::zeros(kept.len());
        let mut kinds = Vec::with_capacity(kept.len());
        for (i, (r, v, k)) in kept.into_iter().enumerate() {
            rows.row_mut(i).copy_from(&r.transpose());
            rhs[i] = v;
            kinds.push(k);
        }
        ConstraintSet { rows, rhs, kinds }
    }
}

/// Builds the constraint set of one patch: internal equilibrium and
/// compatibility by coefficient matching, then tractions at `tractions`.
/// Unconstrained variants get an empty set. There is no body force.
pub fn constraint_rows(
    basis: &Basis,
    frame: &PatchFrame,
    variant: Variant,
    compliance: &Matrix3<f64>,
    tractions: &[TractionPoint],
) -> ConstraintSet {
    let m = basis.len();
    let n = 3 * m;
    if !variant.is_constrained() {
        return ConstraintSet::empty(n);
    }
    let mut b = RowBuilder { n, rows: Vec::new() };
    let (xx, yy, xy) = (0, m, 2 * m);
    let d = basis.degree() as i32;

    // ∂σxx/∂x + ∂σxy/∂y = 0 and ∂σxy/∂x + ∂σyy/∂y = 0, one row per monomial
    // of the (degree - 1) derivative polynomial
    for (first, second) in [(xx, xy), (xy, yy)] {
        for total in 0..d {
            for ty in 0..=total {
                let tx = total - ty;
                let mut row = DVector::zeros(n);
                if let Some(k) = basis.index_of(tx + 1, ty) {
                    row[first + k] += (tx + 1) as f64;
                }
                if let Some(k) = basis.index_of(tx, ty + 1) {
                    row[second + k] += (ty + 1) as f64;
                }
                b.push(row, 0.0, ConstraintKind::Equilibrium);
            }
        }
    }

    // ∂²εxx/∂y² + ∂²εyy/∂x² − ∂²γxy/∂x∂y = 0 with ε = D⁻¹σ
    for total in 0..(d - 1).max(0) {
        for ty in 0..=total {
            let tx = total - ty;
            let mut row = DVector::zeros(n);
            let yy_term = basis.index_of(tx, ty + 2).map(|k| (k, ((ty + 2) * (ty + 1)) as f64));
            let xx_term = basis.index_of(tx + 2, ty).map(|k| (k, ((tx + 2) * (tx + 1)) as f64));
            let xy_term = basis.index_of(tx + 1, ty + 1).map(|k| (k, ((tx + 1) * (ty + 1)) as f64));
            for (c, offset) in [xx, yy, xy].into_iter().enumerate() {
                if let Some((k, f)) = yy_term {
                    row[offset + k] += compliance[(0, c)] * f;
                }
                if let Some((k, f)) = xx_term {
                    row[offset + k] += compliance[(1, c)] * f;
                }
                if let Some((k, f)) = xy_term {
                    row[offset + k] -= compliance[(2, c)] * f;
                }
            }
            b.push(row, 0.0, ConstraintKind::Compatibility);
        }
    }

    for t in tractions {
        let (x, y) = frame.local(&t.position);
        let p = basis.eval(x, y);
        let (nx, ny) = (t.normal.x, t.normal.y);
        let mut rx = DVector::zeros(n);
        let mut ry = DVector::zeros(n);
        for k in 0..m {
            rx[xx + k] = p[k] * nx;
            rx[xy + k] = p[k] * ny;
            ry[xy + k] = p[k] * nx;
            ry[yy + k] = p[k] * ny;
        }
        b.push(rx, t.traction.x, ConstraintKind::Traction);
        b.push(ry, t.traction.y, ConstraintKind::Traction);
    }
    b.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elasticity::{Material, PlaneState};

    fn compliance() -> Matrix3<f64> {
        Material::new(3e7, 0.3, PlaneState::PlaneStrain).unwrap().compliance_matrix()
    }

    fn frame() -> PatchFrame {
        PatchFrame {
            center: Point2::new(0.3, -0.2),
            scale: 0.7,
        }
    }

    #[test]
    fn basis_sizes() {
        assert_eq!(Basis::new(1).len(), 3);
        assert_eq!(Basis::new(2).len(), 6);
        assert_eq!(Basis::new(2).eval(2.0, 3.0).as_slice(), &[1.0, 2.0, 3.0, 4.0, 6.0, 9.0]);
    }

    #[test]
    fn linear_equilibrium_links_four_coefficients_in_two_rows() {
        let c = constraint_rows(&Basis::new(1), &frame(), Variant::SprC, &compliance(), &[]);
        assert_eq!(c.count(ConstraintKind::Equilibrium), 2);
        // degree 1: second derivatives vanish
        assert_eq!(c.count(ConstraintKind::Compatibility), 0);
        let touched = (0..9).filter(|&j| c.rows.column(j).amax() > 0.0).count();
        assert_eq!(touched, 4);
    }

    #[test]
    fn quadratic_constraint_counts() {
        let c = constraint_rows(&Basis::new(2), &frame(), Variant::SprCx, &compliance(), &[]);
        assert_eq!(c.count(ConstraintKind::Equilibrium), 6);
        assert_eq!(c.count(ConstraintKind::Compatibility), 1);
    }

    #[test]
    fn unconstrained_variants_have_no_rows() {
        let t = [TractionPoint {
            position: Point2::new(0.0, 0.0),
            normal: Vector2::new(1.0, 0.0),
            traction: Vector2::new(1.0, 0.0),
        }];
        for v in [Variant::Spr, Variant::SprX] {
            assert!(constraint_rows(&Basis::new(2), &frame(), v, &compliance(), &t).is_empty());
        }
    }

    #[test]
    fn repeated_traction_points_are_dropped() {
        let t = TractionPoint {
            position: Point2::new(0.5, 0.1),
            normal: Vector2::new(0.0, 1.0),
            traction: Vector2::new(0.2, -1.0),
        };
        let c = constraint_rows(&Basis::new(1), &frame(), Variant::SprC, &compliance(), &[t, t, t]);
        assert_eq!(c.count(ConstraintKind::Traction), 2);
    }

    #[test]
    fn two_normals_at_one_point_fix_three_stress_components() {
        let p = Point2::new(0.5, 0.1);
        let s = nalgebra::Vector3::new(1.0, -2.0, 0.5);
        let mk = |n: Vector2<f64>| TractionPoint {
            position: p,
            normal: n,
            traction: Vector2::new(s.x * n.x + s.z * n.y, s.z * n.x + s.y * n.y),
        };
        let n1 = Vector2::new(1.0, 0.0);
        let n2 = Vector2::new(1.0, 1.0).normalize();
        let c = constraint_rows(&Basis::new(1), &frame(), Variant::SprC, &compliance(), &[mk(n1), mk(n2)]);
        assert_eq!(c.count(ConstraintKind::Traction), 3);
    }

    #[test]
    fn equilibrated_quadratic_field_satisfies_rows() {
        // σxx = x² − y², σyy = y² − x² + 3x, σxy = −2xy: divergence free in local coordinates
        let basis = Basis::new(2);
        let mut a = DVector::zeros(18);
        a[3] = 1.0;
        a[5] = -1.0;
        a[6 + 5] = 1.0;
        a[6 + 3] = -1.0;
        a[6 + 1] = 3.0;
        a[12 + 4] = -2.0;
        let c = constraint_rows(&basis, &frame(), Variant::SprC, &compliance(), &[]);
        let eq: Vec<usize> = (0..c.len()).filter(|&i| c.kinds[i] == ConstraintKind::Equilibrium).collect();
        for i in eq {
            assert!((c.rows.row(i) * &a)[0].abs() < 1e-14);
        }
    }
}
