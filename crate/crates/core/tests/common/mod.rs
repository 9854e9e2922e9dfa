#![allow(dead_code)]

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{Point2, Vector3};
use sfem_zz::benchmark::{CylinderBenchmark, LShapeBenchmark};
use sfem_zz::analytic::CylinderProblem;
use sfem_zz::elasticity::{Material, PlaneState};
use sfem_zz::mesh::Mesh;
use sfem_zz::quad::PARENT_CORNERS;
use sfem_zz::recovery::RecoveredStressField;

pub fn cylinder() -> CylinderBenchmark {
    let m = Material::new(3.0e7, 0.3, PlaneState::PlaneStrain).unwrap();
    CylinderBenchmark {
        problem: CylinderProblem::new(5.0, 20.0, 1.0, m).unwrap(),
    }
}

pub fn lshape() -> LShapeBenchmark {
    let m = Material::new(1000.0, 0.3, PlaneState::PlaneStrain).unwrap();
    LShapeBenchmark::new(m, 1.0, 0.0, 1.0).unwrap()
}

pub fn notch_angle() -> f64 {
    1.5 * PI
}

/// Parent coordinates of the point at fraction `t` along local edge `k`.
pub fn edge_parent(k: usize, t: f64) -> (f64, f64) {
    let (a, b) = (PARENT_CORNERS[k], PARENT_CORNERS[(k + 1) % 4]);
    (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1))
}

/// Interior edges as pairs `((element, local edge), (element, local edge))`.
pub fn interior_edges(mesh: &Mesh) -> Vec<((usize, usize), (usize, usize))> {
    let mut seen: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
    let mut out = Vec::new();
    for (e, el) in mesh.elements().iter().enumerate() {
        for k in 0..4 {
            let (a, b) = (el.nodes[k], el.nodes[(k + 1) % 4]);
            let key = (a.min(b), a.max(b));
            if let Some(first) = seen.remove(&key) {
                out.push((first, (e, k)));
            } else {
                seen.insert(key, (e, k));
            }
        }
    }
    out.sort_unstable();
    out
}

/// Largest jump of the recovered field across interior edges relative to
/// the largest value seen, sampled at three points per edge.
pub fn max_relative_jump(mesh: &Arc<Mesh>, field: &RecoveredStressField) -> f64 {
    let mut jump: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for ((e1, k1), (e2, k2)) in interior_edges(mesh) {
        for t in [0.0, 0.3, 0.5, 0.85, 1.0] {
            // neighbours traverse a shared edge in opposite directions
            let (x1, y1) = edge_parent(k1, t);
            let (x2, y2) = edge_parent(k2, 1.0 - t);
            let p1 = mesh.element_map(e1).map(x1, y1);
            let p2 = mesh.element_map(e2).map(x2, y2);
            assert!((p1 - p2).norm() < 1e-12 * (1.0 + p1.coords.norm()));
            if p1.coords.norm() < 1e-14 {
                continue;
            }
            let s1: Vector3<f64> = field.stress_at_parent(e1, x1, y1);
            let s2 = field.stress_at_parent(e2, x2, y2);
            jump = jump.max((s1 - s2).amax());
            scale = scale.max(s1.amax());
        }
    }
    jump / scale.max(f64::MIN_POSITIVE)
}

/// Convex quadrilateral from perturbations of a reference square.
pub fn perturbed_quad(d: &[f64; 8], size: f64) -> [Point2<f64>; 4] {
    let base = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
    std::array::from_fn(|i| Point2::new(size * (base[i].0 + d[2 * i]), size * (base[i].1 + d[2 * i + 1])))
}
