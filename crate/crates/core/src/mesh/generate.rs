use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;

use nalgebra::{Point2, Rotation2};

use super::{BoundaryEdge, BoundaryTag, Mesh, Node, QuadElement};
use crate::error::{Error, Result};

/// Boundary tags used by the benchmark meshes.
pub mod tags {
    use super::BoundaryTag;

    /// Cylinder inner arc, loaded by the internal pressure.
    pub const CYLINDER_INNER: BoundaryTag = BoundaryTag::Neumann(0);
    /// Cylinder outer arc, traction free.
    pub const CYLINDER_OUTER: BoundaryTag = BoundaryTag::Neumann(1);
    /// Symmetry edge on φ = 0: `u_y = 0`.
    pub const CYLINDER_FIX_Y: BoundaryTag = BoundaryTag::Dirichlet(0);
    /// Symmetry edge on φ = π/2: `u_x = 0`.
    pub const CYLINDER_FIX_X: BoundaryTag = BoundaryTag::Dirichlet(1);
    /// L-shape outer boundary, loaded by the asymptotic tractions.
    pub const LSHAPE_OUTER: BoundaryTag = BoundaryTag::Neumann(0);
    /// L-shape notch faces.
    pub const LSHAPE_FACE: BoundaryTag = BoundaryTag::Neumann(1);
}

/// Quarter annulus `r ∈ [a, b]`, `φ ∈ [0, π/2]` with `4·2^(n-1)` divisions in
/// each direction.
pub fn build_cylinder_mesh(a: f64, b: f64, n: u32) -> Result<Mesh> {
    if !(a > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidInput(format!("radii must be positive and finite, got a = {a}")));
    }
    if a >= b {
        return Err(Error::InvalidInput(format!(
            "inner radius must be smaller than outer radius (a = {a}, b = {b})"
        )));
    }
    if n < 1 {
        return Err(Error::InvalidInput("cylinder refinement level must be at least 1".into()));
    }
    if n > 12 {
        return Err(Error::InvalidInput(format!("cylinder refinement level {n} is too large")));
    }
    let div = 4usize << (n - 1);
    let id = |i: usize, j: usize| j * (div + 1) + i;

    let mut nodes = Vec::with_capacity((div + 1) * (div + 1));
    for j in 0..=div {
        let phi = FRAC_PI_2 * j as f64 / div as f64;
        // exact axis alignment on the symmetry edges
        let (s, c) = match j {
            0 => (0.0, 1.0),
            _ if j == div => (1.0, 0.0),
            _ => phi.sin_cos(),
        };
        for i in 0..=div {
            let r = a + (b - a) * i as f64 / div as f64;
            nodes.push(Node {
                id: id(i, j),
                position: Point2::new(r * c, r * s),
            });
        }
    }

    let mut elements = Vec::with_capacity(div * div);
    let mut boundary = Vec::new();
    for j in 0..div {
        for i in 0..div {
            let e = elements.len();
            let conn = [id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)];
            elements.push(QuadElement { id: e, nodes: conn });
            let mut tag_edge = |k: usize, tag: BoundaryTag| {
                boundary.push(BoundaryEdge {
                    element: e,
                    local_edge: k,
                    nodes: [conn[k], conn[(k + 1) % 4]],
                    tag,
                });
            };
            if j == 0 {
                tag_edge(0, tags::CYLINDER_FIX_Y);
            }
            if i == div - 1 {
                tag_edge(1, tags::CYLINDER_OUTER);
            }
            if j == div - 1 {
                tag_edge(2, tags::CYLINDER_FIX_X);
            }
            if i == 0 {
                tag_edge(3, tags::CYLINDER_INNER);
            }
        }
    }
    Mesh::from_parts(nodes, elements, boundary)
}

/// Node positions on `[0, 1]` for one L-shape level: `4·2^level` segments whose
/// lengths grow geometrically away from 0 so that the largest is `grading^level`
/// times the smallest. Level 0 is uniform.
pub fn grading_profile(level: u32, grading: f64) -> Vec<f64> {
    let n = 4usize << level;
    let total_ratio = grading.powi(level as i32);
    let q = if n > 1 { total_ratio.powf(1.0 / (n - 1) as f64) } else { 1.0 };
    let sizes: Vec<f64> = (0..n).map(|k| q.powi(k as i32)).collect();
    let sum: f64 = sizes.iter().sum();
    let mut pts = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    pts.push(0.0);
    for s in &sizes[..n - 1] {
        acc += s / sum;
        pts.push(acc);
    }
    pts.push(1.0);
    pts
}

/// L-shaped domain: the square `[-h, h]²` minus one quadrant, with the
/// re-entrant corner at the origin and the notch bisector along +x (notch faces
/// at φ = ±3π/4), where `h = half_width`.
pub fn build_lshape_mesh(level: u32, grading: f64, half_width: f64) -> Result<Mesh> {
    if !(1.0..=20.0).contains(&grading) {
        return Err(Error::InvalidInput(format!("grading must lie in [1, 20], got {grading}")));
    }
    if level > 8 {
        return Err(Error::InvalidInput(format!("L-shape level {level} is too large")));
    }
    if !(half_width > 0.0 && half_width.is_finite()) {
        return Err(Error::InvalidInput(format!("half width must be positive, got {half_width}")));
    }
    let profile = grading_profile(level, grading);
    let n = (profile.len() - 1) as isize;
    let coord = |k: isize| -> f64 { k.signum() as f64 * profile[k.unsigned_abs()] * half_width };
    let removed = |ix: isize, iy: isize| ix < 0 && iy < 0;

    // Built in a frame where the missing quadrant is x < 0, y < 0, then rotated
    // by -π/4 so that the bisector of the material wedge is the +x axis.
    let rot = Rotation2::new(-std::f64::consts::FRAC_PI_4);
    let mut ids: HashMap<(isize, isize), usize> = HashMap::new();
    let mut nodes = Vec::new();
    for iy in -n..=n {
        for ix in -n..=n {
            if removed(ix, iy) {
                continue;
            }
            let id = nodes.len();
            ids.insert((ix, iy), id);
            let p = rot * Point2::new(coord(ix), coord(iy));
            // keep the corner exactly at the origin
            let p = if ix == 0 && iy == 0 { Point2::origin() } else { p };
            nodes.push(Node { id, position: p });
        }
    }

    let mut elements = Vec::new();
    let mut boundary = Vec::new();
    for iy in -n..n {
        for ix in -n..n {
            if removed(ix, iy) {
                continue;
            }
            let e = elements.len();
            let corners = [(ix, iy), (ix + 1, iy), (ix + 1, iy + 1), (ix, iy + 1)];
            let conn = corners.map(|c| ids[&c]);
            elements.push(QuadElement { id: e, nodes: conn });
            // neighbour across each local edge: below, right, above, left
            let neighbours = [(ix, iy - 1), (ix + 1, iy), (ix, iy + 1), (ix - 1, iy)];
            for (k, &(nx, ny)) in neighbours.iter().enumerate() {
                let outside = nx < -n || nx >= n || ny < -n || ny >= n || removed(nx, ny);
                if !outside {
                    continue;
                }
                let (a, b) = (corners[k], corners[(k + 1) % 4]);
                let on_face = (a.0 == 0 && b.0 == 0 && a.1 <= 0 && b.1 <= 0)
                    || (a.1 == 0 && b.1 == 0 && a.0 <= 0 && b.0 <= 0);
                boundary.push(BoundaryEdge {
                    element: e,
                    local_edge: k,
                    nodes: [conn[k], conn[(k + 1) % 4]],
                    tag: if on_face { tags::LSHAPE_FACE } else { tags::LSHAPE_OUTER },
                });
            }
        }
    }
    Mesh::from_parts(nodes, elements, boundary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn coarse_cylinder_counts_and_inner_radius() {
        let m = build_cylinder_mesh(5.0, 20.0, 1).unwrap();
        assert_eq!(m.n_elements(), 16);
        assert_eq!(m.n_nodes(), 25);
        for be in m.boundary().iter().filter(|b| b.tag == tags::CYLINDER_INNER) {
            for &n in &be.nodes {
                assert_relative_eq!(m.position(n).coords.norm(), 5.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn cylinder_area_close_to_annulus_quadrant() {
        let m = build_cylinder_mesh(1.0, 2.0, 1).unwrap();
        let exact = PI * (4.0 - 1.0) / 4.0;
        // four chords per quadrant: the polygon is a union of triangle pairs
        let polygon = 4.0 * 0.5 * (4.0 - 1.0) * (PI / 8.0).sin();
        assert_relative_eq!(m.total_area(), polygon, max_relative = 1e-12);
        assert!((m.total_area() - exact).abs() < 0.03 * exact);
    }

    #[test]
    fn cylinder_rejects_bad_input() {
        let err = build_cylinder_mesh(2.0, 1.0, 1).unwrap_err();
        assert!(err.to_string().contains("inner radius must be smaller"));
        assert!(build_cylinder_mesh(1.0, 2.0, 0).is_err());
    }

    #[test]
    fn cylinder_refinement_nests() {
        for n in 1..4 {
            let coarse = build_cylinder_mesh(5.0, 20.0, n).unwrap();
            let fine = build_cylinder_mesh(5.0, 20.0, n + 1).unwrap();
            assert_eq!(fine.n_elements(), 4 * coarse.n_elements());
        }
    }

    #[test]
    fn uniform_lshape_has_congruent_squares() {
        let m = build_lshape_mesh(0, 1.0, 1.0).unwrap();
        let corner = m.nearest_node(&Point2::origin());
        assert_eq!(m.position(corner), Point2::origin());
        let areas: Vec<f64> = (0..m.n_elements()).map(|e| m.element_map(e).area()).collect();
        for a in &areas {
            assert_relative_eq!(*a, areas[0], max_relative = 1e-12);
        }
        let (lo, hi) = m.edge_length_range();
        assert_relative_eq!(lo, hi, max_relative = 1e-12);
        assert_eq!(m.node_patch(corner).unwrap().len(), 3);
        // uniform level ignores the grading ratio
        let graded = build_lshape_mesh(0, 5.0, 1.0).unwrap();
        assert_eq!(graded, m);
    }

    #[test]
    fn graded_lshape_edge_ratio() {
        let m = build_lshape_mesh(2, 2.0, 1.0).unwrap();
        let (lo, hi) = m.edge_length_range();
        assert!((hi / lo - 4.0).abs() < 0.4, "ratio {}", hi / lo);
    }

    #[test]
    fn no_node_inside_removed_quadrant() {
        for level in 0..4 {
            let m = build_lshape_mesh(level, 2.0, 1.0).unwrap();
            for n in m.nodes() {
                let phi = n.position.y.atan2(n.position.x);
                let r = n.position.coords.norm();
                assert!(r < 1e-14 || phi.abs() <= 0.75 * PI + 1e-12, "node {} at {:?}", n.id, n.position);
            }
            let area = 3.0;
            assert_relative_eq!(m.total_area(), area, max_relative = 1e-12);
        }
    }

    #[test]
    fn lshape_rejects_bad_grading() {
        assert!(build_lshape_mesh(1, 0.5, 1.0).is_err());
        assert!(build_lshape_mesh(1, 25.0, 1.0).is_err());
    }

    #[test]
    fn patches_are_consistent_with_connectivity() {
        let m = build_cylinder_mesh(5.0, 20.0, 2).unwrap();
        for n in 0..m.n_nodes() {
            for e in 0..m.n_elements() {
                let in_patch = m.node_patch(n).unwrap().contains(&e);
                assert_eq!(in_patch, m.elements()[e].nodes.contains(&n));
            }
        }
        // interior node of the structured grid
        let div = 8;
        assert_eq!(m.node_patch(3 * (div + 1) + 3).unwrap().len(), 4);
        // domain corner
        assert_eq!(m.node_patch(0).unwrap().len(), 1);
        assert!(m.node_patch(m.n_nodes()).is_err());
    }
}
