use nalgebra::{Point2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{shoelace, BilinearMap};

/// How an element is cut into smoothing cells in the parent square:
/// `nx` strips along ξ times `ny` strips along η.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubcellLayout {
    pub nx: usize,
    pub ny: usize,
}

impl SubcellLayout {
    /// Standard layouts: 1 (whole element), 2 (split at ξ = 0), 4 (2x2), 8 (4x2).
    pub fn from_count(nc: usize) -> Result<Self> {
        let (nx, ny) = match nc {
            1 => (1, 1),
            2 => (2, 1),
            4 => (2, 2),
            8 => (4, 2),
            _ => {
                return Err(Error::InvalidInput(format!(
                    "unsupported subcell count {nc} (expected 1, 2, 4 or 8)"
                )))
            }
        };
        Ok(Self { nx, ny })
    }

    pub fn grid(nx: usize, ny: usize) -> Self {
        assert!(nx > 0 && ny > 0);
        Self { nx, ny }
    }

    pub fn count(&self) -> usize {
        self.nx * self.ny
    }

    /// Parent-domain rectangle `[xi0, xi1, eta0, eta1]` of cell `index`.
    pub fn parent_rect(&self, index: usize) -> [f64; 4] {
        let (i, j) = (index % self.nx, index / self.nx);
        let dx = 2.0 / self.nx as f64;
        let dy = 2.0 / self.ny as f64;
        [
            -1.0 + i as f64 * dx,
            -1.0 + (i + 1) as f64 * dx,
            -1.0 + j as f64 * dy,
            -1.0 + (j + 1) as f64 * dy,
        ]
    }

    /// Index of the cell containing parent point `(xi, eta)`.
    pub fn cell_of(&self, xi: f64, eta: f64) -> usize {
        let i = (((xi + 1.0) * 0.5 * self.nx as f64).floor() as isize).clamp(0, self.nx as isize - 1);
        let j = (((eta + 1.0) * 0.5 * self.ny as f64).floor() as isize).clamp(0, self.ny as isize - 1);
        j as usize * self.nx + i as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellEdge {
    pub midpoint: Point2<f64>,
    pub normal: Vector2<f64>,
    pub length: f64,
}

/// A quadrilateral piece of an element over which the strain is smoothed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothingCell {
    pub element: usize,
    pub index: usize,
    pub parent: [f64; 4],
    pub corners: [Point2<f64>; 4],
    pub area: f64,
    pub edges: [CellEdge; 4],
}

/// Cuts an element into smoothing cells. Iso-parametric lines of a bilinear
/// map are straight, so every cell is a straight-sided quadrilateral and the
/// cells tile the element exactly.
pub fn subdivide_element(element: usize, map: &BilinearMap, layout: SubcellLayout) -> Vec<SmoothingCell> {
    (0..layout.count())
        .map(|index| {
            let parent = layout.parent_rect(index);
            let [x0, x1, y0, y1] = parent;
            let corners = [map.map(x0, y0), map.map(x1, y0), map.map(x1, y1), map.map(x0, y1)];
            let area = shoelace(&corners);
            let edges = std::array::from_fn(|k| {
                let a = corners[k];
                let b = corners[(k + 1) % 4];
                let d = b - a;
                let length = d.norm();
                CellEdge {
                    midpoint: Point2::from((a.coords + b.coords) * 0.5),
                    normal: Vector2::new(d.y, -d.x) / length,
                    length,
                }
            });
            SmoothingCell {
                element,
                index,
                parent,
                corners,
                area,
                edges,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn unit_square() -> BilinearMap {
        BilinearMap::new([
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ])
    }

    #[test]
    fn single_cell_is_the_element() {
        let cells = subdivide_element(0, &unit_square(), SubcellLayout::from_count(1).unwrap());
        assert_eq!(cells.len(), 1);
        assert_relative_eq!(cells[0].area, 1.0, epsilon = 1e-15);
        let normals: Vec<_> = cells[0].edges.iter().map(|e| e.normal).collect();
        assert_relative_eq!(normals[0], Vector2::new(0.0, -1.0), epsilon = 1e-15);
        assert_relative_eq!(normals[1], Vector2::new(1.0, 0.0), epsilon = 1e-15);
        assert_relative_eq!(normals[2], Vector2::new(0.0, 1.0), epsilon = 1e-15);
        assert_relative_eq!(normals[3], Vector2::new(-1.0, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn four_cells_are_quarters() {
        let cells = subdivide_element(0, &unit_square(), SubcellLayout::from_count(4).unwrap());
        assert_eq!(cells.len(), 4);
        for c in &cells {
            assert_relative_eq!(c.area, 0.25, epsilon = 1e-15);
        }
    }

    #[test]
    fn rejects_unsupported_counts() {
        for nc in [0, 3, 5, 16] {
            assert!(SubcellLayout::from_count(nc).is_err());
        }
    }

    #[test]
    fn cell_lookup_matches_rectangles() {
        let layout = SubcellLayout::from_count(8).unwrap();
        for idx in 0..8 {
            let [x0, x1, y0, y1] = layout.parent_rect(idx);
            assert_eq!(layout.cell_of(0.5 * (x0 + x1), 0.5 * (y0 + y1)), idx);
        }
        assert_eq!(layout.cell_of(1.0, 1.0), 7);
    }

    fn distorted_quad() -> impl Strategy<Value = BilinearMap> {
        prop::array::uniform8(-0.3f64..0.3).prop_map(|d| {
            BilinearMap::new([
                Point2::new(0.0 + d[0], 0.0 + d[1]),
                Point2::new(2.0 + d[2], 0.0 + d[3]),
                Point2::new(2.0 + d[4], 1.5 + d[5]),
                Point2::new(0.0 + d[6], 1.5 + d[7]),
            ])
        })
    }

    proptest! {
        #[test]
        fn cells_partition_element_area(map in distorted_quad(), nc in prop::sample::select(vec![1usize, 2, 4, 8])) {
            let cells = subdivide_element(0, &map, SubcellLayout::from_count(nc).unwrap());
            let total: f64 = cells.iter().map(|c| c.area).sum();
            let area = map.area();
            prop_assert!((total - area).abs() <= 1e-12 * area);
            for c in &cells {
                prop_assert!(c.area > 0.0);
                let mut closure = Vector2::zeros();
                for e in &c.edges {
                    prop_assert!((e.normal.norm() - 1.0).abs() < 1e-14);
                    closure += e.normal * e.length;
                }
                prop_assert!(closure.norm() <= 1e-12 * c.area.sqrt());
            }
        }
    }
}
