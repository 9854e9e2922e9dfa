//! Quadrilateral meshes, boundary tagging, node patches and smoothing cells.

mod cells;
mod generate;
mod io;

use std::collections::HashMap;

use nalgebra::Point2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::BilinearMap;

pub use cells::{subdivide_element, CellEdge, SmoothingCell, SubcellLayout};
pub use generate::{build_cylinder_mesh, build_lshape_mesh, grading_profile, tags};
pub use io::{read_mesh, write_mesh};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: usize,
    pub position: Point2<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadElement {
    pub id: usize,
    /// Counter-clockwise corner nodes.
    pub nodes: [usize; 4],
}

/// Boundary condition family of an edge. The id selects the traction or
/// constraint rule within the benchmark that owns the mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryTag {
    Neumann(u32),
    Dirichlet(u32),
}

impl BoundaryTag {
    pub fn is_neumann(&self) -> bool {
        matches!(self, BoundaryTag::Neumann(_))
    }
}

impl std::fmt::Display for BoundaryTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundaryTag::Neumann(id) => write!(f, "N{id}"),
            BoundaryTag::Dirichlet(id) => write!(f, "D{id}"),
        }
    }
}

impl std::str::FromStr for BoundaryTag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (kind, id) = s.split_at(s.len().min(1));
        let id: u32 = id.parse().map_err(|_| format!("bad tag id in {s:?}"))?;
        match kind {
            "N" => Ok(BoundaryTag::Neumann(id)),
            "D" => Ok(BoundaryTag::Dirichlet(id)),
            _ => Err(format!("unknown boundary tag {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryEdge {
    pub element: usize,
    /// Local edge `k` runs from corner `k` to corner `(k + 1) % 4`.
    pub local_edge: usize,
    pub nodes: [usize; 2],
    pub tag: BoundaryTag,
}

/// An immutable mesh of bilinear quadrilaterals.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nodes: Vec<Node>,
    elements: Vec<QuadElement>,
    boundary: Vec<BoundaryEdge>,
    patches: Vec<Vec<usize>>,
    boundary_nodes: Vec<bool>,
    element_boundary: Vec<Vec<usize>>,
}

impl Mesh {
    /// Builds a mesh from raw parts, checking orientation, id density and that
    /// the tagged edges are exactly the topological boundary.
    pub fn from_parts(
        nodes: Vec<Node>,
        elements: Vec<QuadElement>,
        boundary: Vec<BoundaryEdge>,
    ) -> Result<Self> {
        for (i, n) in nodes.iter().enumerate() {
            if n.id != i {
                return Err(Error::InvalidInput(format!("node ids must be dense, found {} at {i}", n.id)));
            }
            if !(n.position.x.is_finite() && n.position.y.is_finite()) {
                return Err(Error::InvalidInput(format!("node {i} has non-finite coordinates")));
            }
        }
        let mut patches = vec![Vec::new(); nodes.len()];
        for (i, e) in elements.iter().enumerate() {
            if e.id != i {
                return Err(Error::InvalidInput(format!("element ids must be dense, found {} at {i}", e.id)));
            }
            for &n in &e.nodes {
                if n >= nodes.len() {
                    return Err(Error::InvalidInput(format!("element {i} references unknown node {n}")));
                }
                patches[n].push(i);
            }
            let corners = e.nodes.map(|n| nodes[n].position);
            let map = BilinearMap::new(corners);
            for &(xi, eta) in &crate::quad::PARENT_CORNERS {
                if map.jacobian(xi, eta).determinant() <= 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "element {i} is inverted or degenerate at corner ({xi}, {eta})"
                    )));
                }
            }
        }

        // Topological boundary: edges used by exactly one element.
        let mut edge_count: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        for e in &elements {
            for k in 0..4 {
                let (a, b) = (e.nodes[k], e.nodes[(k + 1) % 4]);
                let key = (a.min(b), a.max(b));
                let entry = edge_count.entry(key).or_insert((0, e.id * 4 + k));
                entry.0 += 1;
            }
        }
        let mut tagged: HashMap<(usize, usize), usize> = HashMap::new();
        for be in &boundary {
            let e = elements.get(be.element).ok_or_else(|| {
                Error::InvalidInput(format!("boundary edge references unknown element {}", be.element))
            })?;
            if be.local_edge > 3 {
                return Err(Error::InvalidInput(format!("local edge {} out of range", be.local_edge)));
            }
            let (a, b) = (e.nodes[be.local_edge], e.nodes[(be.local_edge + 1) % 4]);
            if be.nodes != [a, b] {
                return Err(Error::InvalidInput(format!(
                    "boundary edge nodes {:?} disagree with element {} edge {}",
                    be.nodes, be.element, be.local_edge
                )));
            }
            *tagged.entry((a.min(b), a.max(b))).or_default() += 1;
        }
        for (key, (count, _)) in &edge_count {
            let t = tagged.get(key).copied().unwrap_or(0);
            if *count == 1 && t != 1 {
                return Err(Error::InvalidInput(format!(
                    "boundary edge {key:?} carries {t} tags (expected exactly one)"
                )));
            }
            if *count > 1 && t > 0 {
                return Err(Error::InvalidInput(format!("interior edge {key:?} is tagged as boundary")));
            }
        }
        if tagged.len() != boundary.len() {
            return Err(Error::InvalidInput("duplicate boundary edge tags".into()));
        }

        let mut boundary_nodes = vec![false; nodes.len()];
        let mut element_boundary = vec![Vec::new(); elements.len()];
        for (i, be) in boundary.iter().enumerate() {
            boundary_nodes[be.nodes[0]] = true;
            boundary_nodes[be.nodes[1]] = true;
            element_boundary[be.element].push(i);
        }
        Ok(Self {
            nodes,
            elements,
            boundary,
            patches,
            boundary_nodes,
            element_boundary,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn elements(&self) -> &[QuadElement] {
        &self.elements
    }

    pub fn boundary(&self) -> &[BoundaryEdge] {
        &self.boundary
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn position(&self, node: usize) -> Point2<f64> {
        self.nodes[node].position
    }

    pub fn element_map(&self, element: usize) -> BilinearMap {
        BilinearMap::new(self.elements[element].nodes.map(|n| self.nodes[n].position))
    }

    /// Elements whose connectivity contains `node`, in ascending id order.
    pub fn node_patch(&self, node: usize) -> Result<&[usize]> {
        self.patches
            .get(node)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::InvalidInput(format!("unknown node id {node}")))
    }

    pub fn is_boundary_node(&self, node: usize) -> bool {
        self.boundary_nodes[node]
    }

    /// Boundary edges belonging to `element`.
    pub fn element_boundary_edges(&self, element: usize) -> impl Iterator<Item = &BoundaryEdge> {
        self.element_boundary[element].iter().map(move |&i| &self.boundary[i])
    }

    /// Node closest to `p`.
    pub fn nearest_node(&self, p: &Point2<f64>) -> usize {
        let mut best = (f64::INFINITY, 0);
        for n in &self.nodes {
            let d = (n.position - p).norm();
            if d < best.0 {
                best = (d, n.id);
            }
        }
        best.1
    }

    pub fn total_area(&self) -> f64 {
        (0..self.elements.len()).map(|e| self.element_map(e).area()).sum()
    }

    /// Shortest and longest element edge lengths.
    pub fn edge_length_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for e in &self.elements {
            for k in 0..4 {
                let a = self.nodes[e.nodes[k]].position;
                let b = self.nodes[e.nodes[(k + 1) % 4]].position;
                let l = (b - a).norm();
                lo = lo.min(l);
                hi = hi.max(l);
            }
        }
        (lo, hi)
    }
}
