use nalgebra::{DMatrix, DVector, Point2, Vector3};

use super::constraints::{Basis, ConstraintSet, PatchFrame};
use crate::error::{Error, Result};

/// Smallest-to-largest singular value ratio below which the KKT matrix is
/// treated as singular.
const KKT_RANK_TOL: f64 = 1e-13;

/// Recovered stress polynomials of one vertex patch.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchFit {
    pub node: usize,
    pub basis: Basis,
    pub frame: PatchFrame,
    /// Stacked `[a_xx; a_yy; a_xy]`.
    pub coefficients: DVector<f64>,
}

impl PatchFit {
    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    pub fn evaluate(&self, p: &Point2<f64>) -> Vector3<f64> {
        let (x, y) = self.frame.local(p);
        let b = self.basis.eval(x, y);
        let m = b.len();
        let a = &self.coefficients;
        Vector3::new(
            b.dot(&a.rows(0, m)),
            b.dot(&a.rows(m, m)),
            b.dot(&a.rows(2 * m, m)),
        )
    }
}

/// One weighted stress sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub position: Point2<f64>,
    pub stress: Vector3<f64>,
    pub weight: f64,
}

/// Minimizes `Σ w_s |p(x_s) a − σ_s|²` subject to `C a = r` through the KKT
/// system with Lagrange multipliers. Weights are normalized by their sum.
pub fn fit_patch(
    node: usize,
    basis: &Basis,
    frame: &PatchFrame,
    samples: &[Sample],
    constraints: &ConstraintSet,
) -> Result<PatchFit> {
    let m = basis.len();
    let n = 3 * m;
    let total: f64 = samples.iter().map(|s| s.weight).sum();
    if samples.is_empty() || !(total > 0.0) {
        return Err(Error::SingularPatch { node });
    }
    let mut gram = DMatrix::<f64>::zeros(m, m);
    let mut rhs = DMatrix::<f64>::zeros(m, 3);
    for s in samples {
        let (x, y) = frame.local(&s.position);
        let p = basis.eval(x, y);
        let w = s.weight / total;
        gram.ger(w, &p, &p, 1.0);
        for c in 0..3 {
            rhs.column_mut(c).axpy(w * s.stress[c], &p, 1.0);
        }
    }

    let nc = constraints.len();
    let size = n + nc;
    let mut kkt = DMatrix::<f64>::zeros(size, size);
    let mut b = DVector::<f64>::zeros(size);
    for c in 0..3 {
        kkt.view_mut((c * m, c * m), (m, m)).copy_from(&gram);
        b.rows_mut(c * m, m).copy_from(&rhs.column(c));
    }
    if nc > 0 {
        kkt.view_mut((n, 0), (nc, n)).copy_from(&constraints.rows);
        kkt.view_mut((0, n), (n, nc)).copy_from(&constraints.rows.transpose());
        b.rows_mut(n, nc).copy_from(&constraints.rhs);
    }

    let sv = kkt.singular_values();
    let (lo, hi) = (sv.min(), sv.max());
    if !(hi > 0.0) || lo < KKT_RANK_TOL * hi {
        return Err(Error::SingularPatch { node });
    }
    let solution = kkt.lu().solve(&b).ok_or(Error::SingularPatch { node })?;
    Ok(PatchFit {
        node,
        basis: basis.clone(),
        frame: *frame,
        coefficients: solution.rows(0, n).into_owned(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recovery::constraints::{constraint_rows, TractionPoint};
    use crate::recovery::Variant;
    use nalgebra::{Matrix3, Vector2};
    use proptest::prelude::*;

    fn grid_samples(f: impl Fn(&Point2<f64>) -> Vector3<f64>) -> Vec<Sample> {
        let mut out = Vec::new();
        for i in 0..5 {
            for j in 0..4 {
                let p = Point2::new(-1.0 + 0.45 * i as f64, -0.8 + 0.5 * j as f64 + 0.03 * i as f64);
                out.push(Sample {
                    position: p,
                    stress: f(&p),
                    weight: 0.5 + 0.1 * ((i + 2 * j) % 3) as f64,
                });
            }
        }
        out
    }

    fn frame() -> PatchFrame {
        PatchFrame {
            center: Point2::new(0.1, 0.05),
            scale: 1.2,
        }
    }

    /// Independent oracle: eliminate the constraints with a null-space basis
    /// from the SVD, then solve the reduced weighted normal equations.
    fn null_space_solve(basis: &Basis, frame: &PatchFrame, samples: &[Sample], c: &ConstraintSet) -> DVector<f64> {
        let m = basis.len();
        let n = 3 * m;
        let mut a = DMatrix::zeros(3 * samples.len(), n);
        let mut y = DVector::zeros(3 * samples.len());
        for (i, s) in samples.iter().enumerate() {
            let (x, yy) = frame.local(&s.position);
            let p = basis.eval(x, yy);
            let w = s.weight.sqrt();
            for comp in 0..3 {
                for k in 0..m {
                    a[(3 * i + comp, comp * m + k)] = w * p[k];
                }
                y[3 * i + comp] = w * s.stress[comp];
            }
        }
        if c.is_empty() {
            return a.svd(true, true).solve(&y, 1e-14).unwrap();
        }
        // minimum-norm particular solution and an orthonormal null-space basis
        let cct = &c.rows * c.rows.transpose();
        let particular = c.rows.transpose() * cct.clone().cholesky().unwrap().solve(&c.rhs);
        let projector = DMatrix::<f64>::identity(n, n) - c.rows.transpose() * cct.try_inverse().unwrap() * &c.rows;
        let eig = projector.symmetric_eigen();
        let keep: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
        assert_eq!(keep.len(), n - c.len());
        let z = eig.eigenvectors.select_columns(keep.iter());
        let reduced = &a * &z;
        let target = &y - &a * &particular;
        let t = reduced.svd(true, true).solve(&target, 1e-14).unwrap();
        particular + z * t
    }

    #[test]
    fn reproduces_linear_field_without_constraints() {
        let f = |p: &Point2<f64>| Vector3::new(1.0 + 2.0 * p.x - p.y, 0.5 * p.y, -3.0 + p.x);
        let samples = grid_samples(f);
        let basis = Basis::new(1);
        let fit = fit_patch(0, &basis, &frame(), &samples, &ConstraintSet::empty(9)).unwrap();
        for s in &samples {
            assert!((fit.evaluate(&s.position) - f(&s.position)).amax() < 1e-10);
        }
    }

    #[test]
    fn consistent_constraints_stay_inactive() {
        // divergence free: ∂σxx/∂x + ∂σxy/∂y = 2 − 2 = 0, ∂σxy/∂x + ∂σyy/∂y = 1 − 1 = 0
        let f = |p: &Point2<f64>| Vector3::new(2.0 * p.x + 0.3, 4.0 - p.y, p.x - 2.0 * p.y);
        let samples = grid_samples(f);
        let basis = Basis::new(1);
        let n = Vector2::new(0.6, 0.8);
        let at = Point2::new(0.4, 0.2);
        let s = f(&at);
        let t = [TractionPoint {
            position: at,
            normal: n,
            traction: Vector2::new(s.x * n.x + s.z * n.y, s.z * n.x + s.y * n.y),
        }];
        let c = constraint_rows(&basis, &frame(), Variant::SprC, &Matrix3::identity(), &t);
        let fit = fit_patch(0, &basis, &frame(), &samples, &c).unwrap();
        for s in &samples {
            assert!((fit.evaluate(&s.position) - f(&s.position)).amax() < 1e-10);
        }
    }

    #[test]
    fn rank_deficient_samples_are_reported() {
        let samples: Vec<Sample> = (0..6)
            .map(|i| Sample {
                position: Point2::new(0.1 * i as f64, 0.0),
                stress: Vector3::zeros(),
                weight: 1.0,
            })
            .collect();
        let err = fit_patch(7, &Basis::new(1), &frame(), &samples, &ConstraintSet::empty(9)).unwrap_err();
        assert!(matches!(err, Error::SingularPatch { node: 7 }));
    }

    proptest! {
        #[test]
        fn kkt_matches_null_space_oracle(
            values in proptest::collection::vec(-5.0f64..5.0, 60),
            tractions in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0, 0.0f64..std::f64::consts::TAU, -3.0f64..3.0, -3.0f64..3.0), 0..3),
            degree in 1usize..=2,
            nu in 0.0f64..0.45,
        ) {
            let mut it = values.iter();
            let samples = grid_samples(|_| Vector3::zeros())
                .into_iter()
                .map(|s| Sample { stress: Vector3::new(*it.next().unwrap(), *it.next().unwrap(), *it.next().unwrap()), ..s })
                .collect::<Vec<_>>();
            let basis = Basis::new(degree);
            let tp: Vec<TractionPoint> = tractions
                .iter()
                .map(|&(x, y, a, tx, ty)| TractionPoint {
                    position: Point2::new(x, y),
                    normal: Vector2::new(a.cos(), a.sin()),
                    traction: Vector2::new(tx, ty),
                })
                .collect();
            let material = crate::elasticity::Material::new(1.0, nu, crate::elasticity::PlaneState::PlaneStress).unwrap();
            let c = constraint_rows(&basis, &frame(), Variant::SprCx, &material.compliance_matrix(), &tp);
            let fit = fit_patch(0, &basis, &frame(), &samples, &c).unwrap();
            let oracle = null_space_solve(&basis, &frame(), &samples, &c);
            prop_assert!((&fit.coefficients - &oracle).amax() < 1e-9 * (1.0 + oracle.amax()));
            // constraint residuals
            let r = &c.rows * &fit.coefficients - &c.rhs;
            prop_assert!(r.amax() < 1e-9 * (1.0 + fit.coefficients.amax()));
        }
    }
}
