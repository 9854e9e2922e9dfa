mod common;

use std::sync::Arc;

use nalgebra::{DVector, Matrix2, Point2, Vector2, Vector3};
use sfem_zz::analytic::ExactField;
use sfem_zz::benchmark::{distorted_square_mesh, LinearField};
use sfem_zz::elasticity::{Material, PlaneState};
use sfem_zz::gsif::PlateauFunction;
use sfem_zz::mesh::{build_cylinder_mesh, build_lshape_mesh};
use sfem_zz::recovery::{
    collect_sampling_points, fit_patch, recover, singular_stress_estimate, smooth_part, Basis, ConstraintSet,
    GsifMode, PatchFit, PatchFrame, RecoveredStressField, RecoveryConfig, Sample, Variant,
};
use sfem_zz::solver::{assemble_and_solve, edge_normal, BoundaryConditions, DiscreteSolution, Formulation};

fn unit_square_solution(nc: usize) -> DiscreteSolution {
    let material = Material::new(1.0, 0.3, PlaneState::PlaneStress).unwrap();
    let field = LinearField {
        offset: Vector2::zeros(),
        gradient: Matrix2::new(0.1, 0.02, -0.03, 0.05),
        elasticity: material.elasticity_matrix(),
    };
    let mesh = Arc::new(distorted_square_mesh(1, 1.0, 0.0).unwrap());
    assemble_and_solve(mesh, material, Formulation::sfem(nc).unwrap(), &field).unwrap()
}

#[test]
fn sampling_points_follow_subcells() {
    let s = unit_square_solution(2);
    let set = collect_sampling_points(&s);
    assert_eq!(set.per_element(), 8);
    // four points in each half of the element
    let left = set.points().iter().filter(|p| p.position.x < 0.5).count();
    assert_eq!(left, 4);
    let weights: f64 = set.points().iter().map(|p| p.weight).sum();
    assert!((weights - 1.0).abs() < 1e-14);

    let s = unit_square_solution(1);
    let set = collect_sampling_points(&s);
    let g = 0.5 / 3f64.sqrt();
    let mut expected: Vec<(f64, f64)> = [(-g, -g), (g, -g), (g, g), (-g, g)].iter().map(|&(x, y)| (0.5 + x, 0.5 + y)).collect();
    let mut got: Vec<(f64, f64)> = set.points().iter().map(|p| (p.position.x, p.position.y)).collect();
    expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
    got.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for (a, b) in expected.iter().zip(&got) {
        assert!((a.0 - b.0).abs() < 1e-14 && (a.1 - b.1).abs() < 1e-14);
    }
    // constant stress solution: identical samples
    let first = set.points()[0].stress;
    assert!(set.points().iter().all(|p| (p.stress - first).amax() < 1e-14));
}

fn constant_fit(node: usize, c: Vector3<f64>) -> PatchFit {
    PatchFit {
        node,
        basis: Basis::new(1),
        frame: PatchFrame {
            center: Point2::origin(),
            scale: 1.0,
        },
        coefficients: DVector::from_vec(vec![c.x, 0.0, 0.0, c.y, 0.0, 0.0, c.z, 0.0, 0.0]),
    }
}

#[test]
fn blending_is_a_partition_of_unity() {
    let mesh = Arc::new(build_cylinder_mesh(5.0, 20.0, 1).unwrap());
    let c = Vector3::new(1.5, -2.0, 0.25);
    let fits = (0..mesh.n_nodes()).map(|n| constant_fit(n, c)).collect();
    let field = RecoveredStressField::from_fits(mesh.clone(), fits).unwrap();
    for e in 0..mesh.n_elements() {
        assert!((field.stress_at_parent(e, 0.13, -0.71) - c).amax() < 1e-14);
    }
    // at a vertex only that node's polynomial contributes
    let fits = (0..mesh.n_nodes()).map(|n| constant_fit(n, Vector3::repeat(n as f64))).collect();
    let field = RecoveredStressField::from_fits(mesh.clone(), fits).unwrap();
    let node = mesh.elements()[5].nodes[2];
    assert_eq!(field.stress_at_parent(5, 1.0, 1.0), Vector3::repeat(node as f64));
    let p = mesh.position(node);
    assert!((field.recovered_stress_at(5, &p).unwrap() - Vector3::repeat(node as f64)).amax() < 1e-9);
}

/// Divergence of a patch polynomial at `p`, from its coefficients.
fn divergence(fit: &PatchFit, p: &Point2<f64>) -> Vector2<f64> {
    let (x, y) = fit.frame.local(p);
    let m = fit.basis.len();
    let a = &fit.coefficients;
    let mut dx = Vector3::zeros();
    let mut dy = Vector3::zeros();
    for (k, &(i, j)) in fit.basis.exponents().iter().enumerate() {
        let c = Vector3::new(a[k], a[m + k], a[2 * m + k]);
        if i > 0 {
            dx += c * (i as f64) * x.powi(i - 1) * y.powi(j);
        }
        if j > 0 {
            dy += c * (j as f64) * x.powi(i) * y.powi(j - 1);
        }
    }
    Vector2::new(dx.x + dy.z, dx.z + dy.y) / fit.frame.scale
}

fn traction(s: &Vector3<f64>, n: &Vector2<f64>) -> Vector2<f64> {
    Vector2::new(s.x * n.x + s.z * n.y, s.z * n.x + s.y * n.y)
}

fn check_constrained_fits(solution: &DiscreteSolution, bc: &dyn BoundaryConditions, field: &RecoveredStressField) {
    let mesh = &solution.mesh;
    let t_max = mesh
        .boundary()
        .iter()
        .filter(|be| be.tag.is_neumann())
        .map(|be| {
            let a = mesh.position(be.nodes[0]);
            let b = mesh.position(be.nodes[1]);
            bc.traction(be.tag, &Point2::from((a.coords + b.coords) * 0.5), &edge_normal(&a, &b).0).amax()
        })
        .fold(0.0, f64::max);
    for fit in field.fits() {
        let size = fit.coefficients.amax();
        for e in mesh.node_patch(fit.node).unwrap() {
            let p = mesh.element_map(*e).map(0.2, -0.4);
            assert!(divergence(fit, &p).amax() * fit.frame.scale < 1e-9 * size, "node {}", fit.node);
        }
        if field.is_split(fit.node) || !mesh.is_boundary_node(fit.node) {
            continue;
        }
        for be in mesh.boundary().iter().filter(|be| be.tag.is_neumann() && be.nodes.contains(&fit.node)) {
            let a = mesh.position(be.nodes[0]);
            let b = mesh.position(be.nodes[1]);
            let (n, _) = edge_normal(&a, &b);
            for p in [mesh.position(fit.node), Point2::from((a.coords + b.coords) * 0.5)] {
                if p.coords.norm() == 0.0 {
                    continue;
                }
                let gap = (traction(&fit.evaluate(&p), &n) - bc.traction(be.tag, &p, &n)).amax();
                assert!(gap < 1e-8 * t_max, "node {} gap {gap:e}", fit.node);
            }
        }
    }
}

#[test]
fn constrained_fits_are_equilibrated_and_match_tractions() {
    let cyl = common::cylinder();
    let mesh = Arc::new(build_cylinder_mesh(5.0, 20.0, 2).unwrap());
    let s = assemble_and_solve(mesh, cyl.problem.material, Formulation::sfem(4).unwrap(), &cyl).unwrap();
    for variant in [Variant::SprC, Variant::SprCx] {
        for interior_degree in [1, 2] {
            let config = RecoveryConfig { variant, interior_degree, ..Default::default() };
            let f = recover(&s, &cyl, &config, None).unwrap();
            check_constrained_fits(&s, &cyl, &f);
        }
    }
    let l = common::lshape();
    let mesh = Arc::new(build_lshape_mesh(2, 2.0, 1.0).unwrap());
    let s = assemble_and_solve(mesh, l.solution.material, Formulation::sfem(4).unwrap(), &l).unwrap();
    for variant in [Variant::SprC, Variant::SprCx] {
        let config = RecoveryConfig { variant, ..Default::default() };
        let f = recover(&s, &l, &config, Some(&l.solution)).unwrap();
        check_constrained_fits(&s, &l, &f);
    }
}

#[test]
fn zero_splitting_radius_reduces_to_unsplit_variant() {
    let l = common::lshape();
    let mesh = Arc::new(build_lshape_mesh(1, 2.0, 1.0).unwrap());
    let s = assemble_and_solve(mesh.clone(), l.solution.material, Formulation::sfem(4).unwrap(), &l).unwrap();
    for (split, plain) in [(Variant::SprCx, Variant::SprC), (Variant::SprX, Variant::Spr)] {
        let a = recover(&s, &l, &RecoveryConfig { variant: split, splitting_radius: 0.0, ..Default::default() }, Some(&l.solution)).unwrap();
        let b = recover(&s, &l, &RecoveryConfig { variant: plain, ..Default::default() }, None).unwrap();
        // a missing singular solution also disables splitting
        let c = recover(&s, &l, &RecoveryConfig { variant: split, ..Default::default() }, None).unwrap();
        for e in 0..mesh.n_elements() {
            assert_eq!(a.stress_at_parent(e, 0.3, 0.1), b.stress_at_parent(e, 0.3, 0.1));
            assert_eq!(c.stress_at_parent(e, 0.3, 0.1), b.stress_at_parent(e, 0.3, 0.1));
        }
    }
}

#[test]
fn smooth_part_cancels_exact_singular_stress() {
    let l = common::lshape();
    let mesh = Arc::new(build_lshape_mesh(1, 2.0, 1.0).unwrap());
    let s = assemble_and_solve(mesh, l.solution.material, Formulation::sfem(4).unwrap(), &l).unwrap();
    let samples = collect_sampling_points(&s);
    // zero intensity: nothing changes
    let zero = l.solution.with_gsifs(0.0, 0.0);
    assert_eq!(smooth_part(samples.points(), &zero, 0.5), samples.points().to_vec());
    // exact stresses as input: the smooth part vanishes inside the radius
    let exact: Vec<_> = samples
        .points()
        .iter()
        .map(|p| sfem_zz::recovery::SamplingPoint { stress: l.solution.stress_at(&p.position), ..*p })
        .collect();
    for (before, after) in exact.iter().zip(smooth_part(&exact, &l.solution, 0.5)) {
        let r = before.position.coords.norm();
        if r < 0.5 {
            assert!(after.stress.amax() < 1e-10 * before.stress.amax());
        } else {
            assert_eq!(after.stress, before.stress);
        }
    }
}

#[test]
fn splitting_improves_the_fit_of_exact_singular_data() {
    let l = common::lshape();
    let mesh = Arc::new(build_lshape_mesh(1, 2.0, 1.0).unwrap());
    let s = assemble_and_solve(mesh.clone(), l.solution.material, Formulation::sfem(4).unwrap(), &l).unwrap();
    let samples = collect_sampling_points(&s);
    let vertex = mesh.nearest_node(&Point2::origin());
    let patch = mesh.node_patch(vertex).unwrap();
    let data: Vec<Sample> = patch
        .iter()
        .flat_map(|&e| samples.element(e).iter())
        .map(|p| Sample { position: p.position, stress: l.solution.stress_at(&p.position), weight: p.weight })
        .collect();
    let frame = PatchFrame::enclosing(mesh.position(vertex), data.iter().map(|d| d.position));
    let basis = Basis::new(2);
    let none = ConstraintSet::empty(3 * basis.len());
    let plain = fit_patch(vertex, &basis, &frame, &data, &none).unwrap();
    let smooth: Vec<Sample> = data
        .iter()
        .map(|d| Sample { stress: d.stress - l.solution.stress_at(&d.position), ..*d })
        .collect();
    let split = fit_patch(vertex, &basis, &frame, &smooth, &none).unwrap();
    let err = |fit: &PatchFit, add_singular: bool| {
        data.iter()
            .map(|d| {
                let mut v = fit.evaluate(&d.position);
                if add_singular {
                    v += l.solution.stress_at(&d.position);
                }
                (v - d.stress).amax()
            })
            .fold(0.0, f64::max)
    };
    let (e_plain, e_split) = (err(&plain, false), err(&split, true));
    assert!(e_split < 1e-10 && e_plain > 1e-2, "{e_split:e} vs {e_plain:e}");
}

#[test]
fn exact_mode_passes_intensity_factors_through() {
    let l = common::lshape();
    let mesh = Arc::new(build_lshape_mesh(0, 1.0, 1.0).unwrap());
    let s = assemble_and_solve(mesh, l.solution.material, Formulation::sfem(4).unwrap(), &l).unwrap();
    let p = PlateauFunction::default();
    let k = singular_stress_estimate(&s, &l, Some(&l.solution), GsifMode::Exact, &p).unwrap();
    assert_eq!((k.k_i, k.k_ii), (1.0, 0.0));
    let doubled = l.solution.with_gsifs(2.0, 0.0);
    let q = Point2::new(0.2, -0.1);
    assert_eq!(doubled.stress_at(&q), 2.0 * l.solution.stress_at(&q));
    let e = singular_stress_estimate(&s, &l, Some(&l.solution), GsifMode::Extracted, &p).unwrap();
    assert!((e.k_i - 1.0).abs() < 0.1 && e.k_ii.abs() < 0.05, "{} {}", e.k_i, e.k_ii);
    assert!(singular_stress_estimate(&s, &l, None, GsifMode::Exact, &p).unwrap_err().is_config());
    let _ = ExactField::stress(&l.solution, &q);
}
