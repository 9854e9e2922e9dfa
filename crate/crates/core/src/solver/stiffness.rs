use nalgebra::{Matrix3, SMatrix};

use crate::error::{Error, Result};
use crate::mesh::{subdivide_element, SmoothingCell, SubcellLayout};
use crate::quad::{gauss_legendre, shape, BilinearMap};

pub type StrainMatrix = SMatrix<f64, 3, 8>;
pub type ElementMatrix = SMatrix<f64, 8, 8>;

/// Constant strain-displacement operator of one smoothing cell, obtained by
/// integrating the shape functions along the cell boundary. A single midpoint
/// per edge is exact because the shape functions are linear along iso-lines.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedStrainMatrix {
    pub element: usize,
    pub cell: usize,
    pub matrix: StrainMatrix,
}

pub fn smoothed_strain_matrix(map: &BilinearMap, cell: &SmoothingCell) -> Result<SmoothedStrainMatrix> {
    let mut b = StrainMatrix::zeros();
    for edge in &cell.edges {
        let (xi, eta) = map.inverse(&edge.midpoint).ok_or(Error::InversionFailed {
            element: cell.element,
            x: edge.midpoint.x,
            y: edge.midpoint.y,
        })?;
        let n = shape(xi, eta);
        let (nx, ny) = (edge.normal.x, edge.normal.y);
        for (i, ni) in n.iter().enumerate() {
            let w = ni * edge.length;
            b[(0, 2 * i)] += w * nx;
            b[(1, 2 * i + 1)] += w * ny;
            b[(2, 2 * i)] += w * ny;
            b[(2, 2 * i + 1)] += w * nx;
        }
    }
    b /= cell.area;
    Ok(SmoothedStrainMatrix {
        element: cell.element,
        cell: cell.index,
        matrix: b,
    })
}

/// Compatible strain-displacement matrix at a parent point, with `det J`.
pub fn compatible_strain_matrix(map: &BilinearMap, xi: f64, eta: f64) -> (StrainMatrix, f64) {
    let (grads, det) = map.gradients(xi, eta);
    let mut b = StrainMatrix::zeros();
    for (i, g) in grads.iter().enumerate() {
        b[(0, 2 * i)] = g.x;
        b[(1, 2 * i + 1)] = g.y;
        b[(2, 2 * i)] = g.y;
        b[(2, 2 * i + 1)] = g.x;
    }
    (b, det)
}

/// Where an element's stresses live: one constant per smoothing cell, or one
/// value per 2x2 Gauss point for the compatible formulation.
#[derive(Debug, Clone, PartialEq)]
pub enum ElementKinematics {
    Smoothed {
        cells: Vec<SmoothingCell>,
        strain: Vec<StrainMatrix>,
    },
    Gauss {
        /// `(xi, eta, weight · det J)`
        points: Vec<(f64, f64, f64)>,
        strain: Vec<StrainMatrix>,
    },
}

impl ElementKinematics {
    pub fn build(element: usize, map: &BilinearMap, layout: Option<SubcellLayout>) -> Result<Self> {
        match layout {
            Some(layout) => {
                let cells = subdivide_element(element, map, layout);
                let strain = cells
                    .iter()
                    .map(|c| smoothed_strain_matrix(map, c).map(|s| s.matrix))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Self::Smoothed { cells, strain })
            }
            None => {
                let g = gauss_legendre(2);
                let mut points = Vec::with_capacity(4);
                let mut strain = Vec::with_capacity(4);
                for &(eta, we) in &g {
                    for &(xi, wx) in &g {
                        let (b, det) = compatible_strain_matrix(map, xi, eta);
                        points.push((xi, eta, wx * we * det));
                        strain.push(b);
                    }
                }
                Ok(Self::Gauss { points, strain })
            }
        }
    }

    pub fn stiffness(&self, d: &Matrix3<f64>) -> ElementMatrix {
        let mut k = ElementMatrix::zeros();
        match self {
            Self::Smoothed { cells, strain } => {
                for (c, b) in cells.iter().zip(strain) {
                    k += b.transpose() * d * b * c.area;
                }
            }
            Self::Gauss { points, strain } => {
                for (p, b) in points.iter().zip(strain) {
                    k += b.transpose() * d * b * p.2;
                }
            }
        }
        // exact symmetry
        (k + k.transpose()) * 0.5
    }

    /// Number of stress evaluation sites (cells or Gauss points).
    pub fn n_sites(&self) -> usize {
        match self {
            Self::Smoothed { strain, .. } | Self::Gauss { strain, .. } => strain.len(),
        }
    }

    pub fn strain_matrix(&self, site: usize) -> &StrainMatrix {
        match self {
            Self::Smoothed { strain, .. } | Self::Gauss { strain, .. } => &strain[site],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elasticity::{Material, PlaneState};
    use approx::assert_relative_eq;
    use nalgebra::{Point2, SVector};

    fn unit_square() -> BilinearMap {
        BilinearMap::new([
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ])
    }

    fn distorted() -> BilinearMap {
        BilinearMap::new([
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.2),
            Point2::new(2.3, 1.7),
            Point2::new(-0.1, 1.1),
        ])
    }

    #[test]
    fn single_cell_matches_averaged_gradient() {
        let map = unit_square();
        let cells = subdivide_element(0, &map, SubcellLayout::from_count(1).unwrap());
        let b = smoothed_strain_matrix(&map, &cells[0]).unwrap().matrix;
        // node 0 of the unit square has N = (1-x)(1-y); its mean gradient is (-1/2, -1/2)
        let expected = SMatrix::<f64, 3, 2>::new(-0.5, 0.0, 0.0, -0.5, -0.5, -0.5);
        assert_relative_eq!(b.fixed_columns::<2>(0).into_owned(), expected, epsilon = 1e-14);
    }

    #[test]
    fn translations_give_zero_strain() {
        let map = distorted();
        for nc in [1, 2, 4, 8] {
            for cell in subdivide_element(0, &map, SubcellLayout::from_count(nc).unwrap()) {
                let b = smoothed_strain_matrix(&map, &cell).unwrap().matrix;
                let mut sum = SMatrix::<f64, 3, 2>::zeros();
                for i in 0..4 {
                    sum += b.fixed_columns::<2>(2 * i);
                }
                assert!(sum.amax() < 1e-12, "nc = {nc}: {sum}");
            }
        }
    }

    #[test]
    fn strain_matrix_scales_inversely_with_size() {
        let small = BilinearMap::new([
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 0.5),
            Point2::new(0.0, 0.5),
        ]);
        let big = BilinearMap::new(small.corners.map(|p| Point2::from(p.coords * 2.0)));
        let layout = SubcellLayout::from_count(4).unwrap();
        let cs = subdivide_element(0, &small, layout);
        let cb = subdivide_element(0, &big, layout);
        for (a, b) in cs.iter().zip(&cb) {
            let ba = smoothed_strain_matrix(&small, a).unwrap().matrix;
            let bb = smoothed_strain_matrix(&big, b).unwrap().matrix;
            assert_relative_eq!(bb, ba * 0.5, epsilon = 1e-14);
        }
    }

    fn zero_eigenvalues(k: &ElementMatrix) -> usize {
        let eig = k.symmetric_eigenvalues();
        let scale = eig.amax();
        assert!(eig.iter().all(|&v| v > -1e-10 * scale), "not semidefinite: {eig}");
        eig.iter().filter(|&&v| v.abs() < 1e-10 * scale).count()
    }

    #[test]
    fn stiffness_kernel_is_rigid_motion() {
        let map = distorted();
        let d = Material::new(3e7, 0.3, PlaneState::PlaneStrain).unwrap().elasticity_matrix();
        let mut rotation = SVector::<f64, 8>::zeros();
        for (i, c) in map.corners.iter().enumerate() {
            rotation[2 * i] = -c.y;
            rotation[2 * i + 1] = c.x;
        }
        for layout in [None, Some(1), Some(2), Some(4), Some(8)] {
            let layout = layout.map(|nc| SubcellLayout::from_count(nc).unwrap());
            let k = ElementKinematics::build(0, &map, layout).unwrap().stiffness(&d);
            assert!((k - k.transpose()).amax() <= 1e-12 * k.amax());
            let zeros = zero_eigenvalues(&k);
            match layout {
                Some(l) if l.count() == 1 => assert!(zeros >= 3),
                _ => assert_eq!(zeros, 3, "layout {layout:?}"),
            }
            assert!((k * rotation).amax() <= 1e-10 * k.amax());
        }
    }

    #[test]
    fn many_cells_approach_compatible_stiffness() {
        let map = distorted();
        let d = Material::new(1.0, 0.25, PlaneState::PlaneStress).unwrap().elasticity_matrix();
        // compatible stiffness with a high-order rule as reference
        let g = gauss_legendre(8);
        let mut reference = ElementMatrix::zeros();
        for &(eta, we) in &g {
            for &(xi, wx) in &g {
                let (b, det) = compatible_strain_matrix(&map, xi, eta);
                reference += b.transpose() * d * b * (wx * we * det);
            }
        }
        let k = ElementKinematics::build(0, &map, Some(SubcellLayout::grid(8, 8)))
            .unwrap()
            .stiffness(&d);
        let rel = (k - reference).amax() / reference.amax();
        assert!(rel < 0.01, "relative deviation {rel}");
    }
}
