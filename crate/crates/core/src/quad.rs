//! Bilinear quadrilateral geometry: shape functions, the isoparametric map,
//! its inversion, and Gauss-Legendre rules.

use nalgebra::{Matrix2, Point2, Vector2};

use crate::error::{Error, Result};

/// Parent-domain corner coordinates, counter-clockwise.
pub const PARENT_CORNERS: [(f64, f64); 4] = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];

pub fn shape(xi: f64, eta: f64) -> [f64; 4] {
    let mut n = [0.0; 4];
    for (i, &(xa, ea)) in PARENT_CORNERS.iter().enumerate() {
        n[i] = 0.25 * (1.0 + xa * xi) * (1.0 + ea * eta);
    }
    n
}

/// Derivatives of the shape functions in the parent domain, `[dN/dxi, dN/deta]`.
pub fn shape_derivatives(xi: f64, eta: f64) -> [[f64; 2]; 4] {
    let mut d = [[0.0; 2]; 4];
    for (i, &(xa, ea)) in PARENT_CORNERS.iter().enumerate() {
        d[i] = [0.25 * xa * (1.0 + ea * eta), 0.25 * ea * (1.0 + xa * xi)];
    }
    d
}

/// The isoparametric map of one bilinear quadrilateral.
#[derive(Debug, Clone, Copy)]
pub struct BilinearMap {
    pub corners: [Point2<f64>; 4],
}

impl BilinearMap {
    pub fn new(corners: [Point2<f64>; 4]) -> Self {
        Self { corners }
    }

    pub fn map(&self, xi: f64, eta: f64) -> Point2<f64> {
        let n = shape(xi, eta);
        let mut p = Vector2::zeros();
        for (ni, c) in n.iter().zip(&self.corners) {
            p += *ni * c.coords;
        }
        Point2::from(p)
    }

    /// Jacobian `d(x, y)/d(xi, eta)` with rows (x, y) and columns (xi, eta).
    pub fn jacobian(&self, xi: f64, eta: f64) -> Matrix2<f64> {
        let d = shape_derivatives(xi, eta);
        let mut j = Matrix2::zeros();
        for (di, c) in d.iter().zip(&self.corners) {
            j[(0, 0)] += di[0] * c.x;
            j[(0, 1)] += di[1] * c.x;
            j[(1, 0)] += di[0] * c.y;
            j[(1, 1)] += di[1] * c.y;
        }
        j
    }

    /// Physical gradients of the four shape functions and the Jacobian determinant.
    pub fn gradients(&self, xi: f64, eta: f64) -> ([Vector2<f64>; 4], f64) {
        let j = self.jacobian(xi, eta);
        let det = j.determinant();
        let inv_t = j
            .try_inverse()
            .unwrap_or_else(Matrix2::zeros)
            .transpose();
        let d = shape_derivatives(xi, eta);
        let mut g = [Vector2::zeros(); 4];
        for (gi, di) in g.iter_mut().zip(d.iter()) {
            *gi = inv_t * Vector2::new(di[0], di[1]);
        }
        (g, det)
    }

    /// Newton inversion of the map (tolerance 1e-12 in parent coordinates, at
    /// most 20 iterations). The returned coordinates may lie outside the parent
    /// square; callers decide what tolerance counts as "inside".
    pub fn inverse(&self, p: &Point2<f64>) -> Option<(f64, f64)> {
        let (mut xi, mut eta) = (0.0, 0.0);
        for _ in 0..20 {
            let r = self.map(xi, eta) - p;
            let j = self.jacobian(xi, eta);
            let step = j.try_inverse()? * r;
            xi -= step.x;
            eta -= step.y;
            if !xi.is_finite() || !eta.is_finite() {
                return None;
            }
            if step.norm() < 1e-12 {
                return Some((xi, eta));
            }
        }
        None
    }

    /// Parent coordinates of `p`, failing when the point is outside the element.
    pub fn locate(&self, element: usize, p: &Point2<f64>) -> Result<(f64, f64)> {
        let (xi, eta) = self.inverse(p).ok_or(Error::InversionFailed {
            element,
            x: p.x,
            y: p.y,
        })?;
        let tol = 1e-9;
        if xi.abs() > 1.0 + tol || eta.abs() > 1.0 + tol {
            return Err(Error::OutsideElement {
                element,
                x: p.x,
                y: p.y,
            });
        }
        Ok((xi, eta))
    }

    pub fn area(&self) -> f64 {
        shoelace(&self.corners)
    }
}

/// Signed area of a simple polygon (positive for counter-clockwise order).
pub fn shoelace(poly: &[Point2<f64>]) -> f64 {
    // relative to the first vertex so far-from-origin polygons keep their digits
    let Some(&o) = poly.first() else { return 0.0 };
    let s: f64 = poly
        .windows(2)
        .skip(1)
        .map(|w| {
            let (a, b) = (w[0] - o, w[1] - o);
            a.x * b.y - b.x * a.y
        })
        .sum();
    0.5 * s
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1, "Gauss rule needs at least one point");
    let mut rule = Vec::with_capacity(n);
    for i in 0..n {
        // Chebyshev-like initial guess, then Newton on P_n.
        let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.push((x, w));
    }
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    rule
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tensor-product rule on the sub-rectangle `[x0, x1] x [y0, y1]` of the parent
/// square: `(xi, eta, weight)` with weights summing to the sub-rectangle area.
pub fn tensor_rule(n: usize, x0: f64, x1: f64, y0: f64, y1: f64) -> Vec<(f64, f64, f64)> {
    let g = gauss_legendre(n);
    let (hx, hy) = (0.5 * (x1 - x0), 0.5 * (y1 - y0));
    let (cx, cy) = (0.5 * (x1 + x0), 0.5 * (y1 + y0));
    let mut pts = Vec::with_capacity(n * n);
    for &(t, wt) in &g {
        for &(s, ws) in &g {
            pts.push((cx + hx * s, cy + hy * t, ws * wt * hx * hy));
        }
    }
    pts
}
