//! Energy-norm errors: the Zienkiewicz-Zhu estimate `‖σ* − σ^h‖`, the exact
//! error `‖σ − σ^h‖`, the error of the recovered field `‖σ − σ*‖`, local and
//! global effectivities, and convergence rates.
//!
//! All norms are `(∫ eᵀ D⁻¹ e dΩ)^½`. Integration runs 4x4 Gauss per smoothing
//! cell (per element for FEM) so the cell-wise constant raw stress is never
//! integrated across a jump; elements touching a stress singularity use 16x16.

use nalgebra::{Matrix3, Point2, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::ExactField;
use crate::error::{Error, Result};
use crate::recovery::RecoveredStressField;
use crate::solver::{element_quadrature, DiscreteSolution};

pub const REGULAR_ORDER: usize = 4;
pub const SINGULAR_ORDER: usize = 16;
/// Elements whose exact error is below this fraction of the global error are
/// left out of the local effectivity statistics.
pub const NEGLIGIBLE_ERROR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Global,
    Element(usize),
}

fn touches(solution: &DiscreteSolution, element: usize, point: Option<Point2<f64>>) -> bool {
    let Some(p) = point else { return false };
    let mesh = &solution.mesh;
    let (_, hmax) = mesh.edge_length_range();
    mesh.elements()[element]
        .nodes
        .iter()
        .any(|&n| (mesh.position(n) - p).norm() <= 1e-12 * hmax)
}

/// Quadrature points `(xi, eta, weight · det J)` used for the error integrals.
pub fn error_quadrature(
    solution: &DiscreteSolution,
    element: usize,
    singular_point: Option<Point2<f64>>,
) -> Vec<(f64, f64, f64)> {
    let order = if touches(solution, element, singular_point) {
        SINGULAR_ORDER
    } else {
        REGULAR_ORDER
    };
    element_quadrature(&solution.mesh.element_map(element), solution.formulation.layout(), order)
}

fn energy(c: &Matrix3<f64>, e: &Vector3<f64>) -> f64 {
    (e.transpose() * c * e)[(0, 0)]
}

fn elements_of(solution: &DiscreteSolution, region: Region) -> Vec<usize> {
    match region {
        Region::Global => (0..solution.mesh.n_elements()).collect(),
        Region::Element(e) => vec![e],
    }
}

/// Squared norm of `f(element, xi, eta, x)` over a region.
fn integrate(
    solution: &DiscreteSolution,
    region: Region,
    singular_point: Option<Point2<f64>>,
    f: impl Fn(usize, f64, f64, &Point2<f64>) -> Vector3<f64> + Sync,
) -> f64 {
    let c = solution.material.compliance_matrix();
    let per_element: Vec<f64> = elements_of(solution, region)
        .into_par_iter()
        .map(|e| {
            let map = solution.mesh.element_map(e);
            error_quadrature(solution, e, singular_point)
                .into_iter()
                .map(|(xi, eta, w)| energy(&c, &f(e, xi, eta, &map.map(xi, eta))) * w)
                .sum::<f64>()
        })
        .collect();
    per_element.iter().sum()
}

fn check_region(solution: &DiscreteSolution, region: Region) -> Result<()> {
    match region {
        Region::Element(e) if e >= solution.mesh.n_elements() => {
            Err(Error::InvalidInput(format!("unknown element id {e}")))
        }
        _ => Ok(()),
    }
}

/// Zienkiewicz-Zhu estimate `‖σ* − σ^h‖`.
pub fn estimated_error_norm(
    solution: &DiscreteSolution,
    field: &RecoveredStressField,
    region: Region,
) -> Result<f64> {
    check_region(solution, region)?;
    let sp = field.singular().map(|s| s.vertex);
    Ok(integrate(solution, region, sp, |e, xi, eta, _| {
        field.stress_at_parent(e, xi, eta) - solution.stress_at_parent(e, xi, eta)
    })
    .sqrt())
}

/// Exact error `‖σ − σ^h‖`.
pub fn exact_error_norm(solution: &DiscreteSolution, exact: &dyn ExactField, region: Region) -> Result<f64> {
    check_region(solution, region)?;
    Ok(integrate(solution, region, exact.singular_point(), |e, xi, eta, x| {
        exact.stress(x) - solution.stress_at_parent(e, xi, eta)
    })
    .sqrt())
}

/// Error of the recovered field `‖σ − σ*‖`.
pub fn recovered_error_norm(
    solution: &DiscreteSolution,
    field: &RecoveredStressField,
    exact: &dyn ExactField,
    region: Region,
) -> Result<f64> {
    check_region(solution, region)?;
    Ok(integrate(solution, region, exact.singular_point(), |e, xi, eta, x| {
        exact.stress(x) - field.stress_at_parent(e, xi, eta)
    })
    .sqrt())
}

/// Local effectivity: `θ − 1` when overestimating, `1 − 1/θ` otherwise, so
/// over- and underestimation by the same factor weigh the same.
pub fn local_effectivity(theta: f64) -> f64 {
    if theta >= 1.0 {
        theta - 1.0
    } else {
        1.0 - 1.0 / theta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElementError {
    pub element: usize,
    pub estimated: f64,
    pub exact: f64,
    pub recovered: f64,
    pub theta: Option<f64>,
    pub d: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub dof: usize,
    pub estimated: f64,
    pub exact: f64,
    pub recovered: f64,
    /// `None` when the exact error vanishes.
    pub theta: Option<f64>,
    pub mean_abs_d: f64,
    pub sigma_d: f64,
    /// Elements left out of the `D` statistics.
    pub excluded: usize,
    pub elements: Vec<ElementError>,
}

/// Mean of `|D|` and population standard deviation of `D`.
pub fn d_statistics(d: &[f64]) -> (f64, f64) {
    if d.is_empty() {
        return (0.0, 0.0);
    }
    let n = d.len() as f64;
    let mean_abs = d.iter().map(|v| v.abs()).sum::<f64>() / n;
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean_abs, var.sqrt())
}

/// All three error measures per element and globally, with effectivities.
pub fn error_report(
    solution: &DiscreteSolution,
    field: &RecoveredStressField,
    exact: &dyn ExactField,
) -> ErrorReport {
    let c = solution.material.compliance_matrix();
    let sp = exact.singular_point().or(field.singular().map(|s| s.vertex));
    let squares: Vec<[f64; 3]> = (0..solution.mesh.n_elements())
        .into_par_iter()
        .map(|e| {
            let map = solution.mesh.element_map(e);
            let mut acc = [0.0; 3];
            for (xi, eta, w) in error_quadrature(solution, e, sp) {
                let x = map.map(xi, eta);
                let raw = solution.stress_at_parent(e, xi, eta);
                let rec = field.stress_at_parent(e, xi, eta);
                let ex = exact.stress(&x);
                acc[0] += energy(&c, &(rec - raw)) * w;
                acc[1] += energy(&c, &(ex - raw)) * w;
                acc[2] += energy(&c, &(ex - rec)) * w;
            }
            acc
        })
        .collect();
    let total = squares.iter().fold([0.0; 3], |t, s| [t[0] + s[0], t[1] + s[1], t[2] + s[2]]);
    let exact_global = total[1].sqrt();

    let mut elements = Vec::with_capacity(squares.len());
    let mut ds = Vec::new();
    let mut excluded = 0;
    for (e, s) in squares.iter().enumerate() {
        let (est, ex, rec) = (s[0].sqrt(), s[1].sqrt(), s[2].sqrt());
        let mut theta = None;
        let mut d = None;
        if ex > NEGLIGIBLE_ERROR * exact_global && ex > 0.0 {
            let t = est / ex;
            let dv = local_effectivity(t);
            theta = Some(t);
            if dv.is_finite() {
                d = Some(dv);
                ds.push(dv);
            } else {
                excluded += 1;
            }
        } else {
            excluded += 1;
        }
        elements.push(ElementError {
            element: e,
            estimated: est,
            exact: ex,
            recovered: rec,
            theta,
            d,
        });
    }
    if excluded > 0 {
        log::info!("{excluded} elements excluded from the local effectivity statistics");
    }
    let (mean_abs_d, sigma_d) = d_statistics(&ds);
    ErrorReport {
        dof: solution.n_dof(),
        estimated: total[0].sqrt(),
        exact: exact_global,
        recovered: total[2].sqrt(),
        theta: (exact_global > 0.0).then(|| total[0].sqrt() / exact_global),
        mean_abs_d,
        sigma_d,
        excluded,
        elements,
    }
}

/// Values against degrees of freedom along a mesh sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSeries {
    points: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRate {
    /// Least-squares slope of `-log(value)` against `log(dof)`.
    pub s: f64,
    /// Rates between consecutive points.
    pub pairwise: Vec<f64>,
    pub s_avg: f64,
}

impl ConvergenceSeries {
    pub fn new(points: Vec<(usize, f64)>) -> Result<Self> {
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidInput("degrees of freedom must increase strictly".into()));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(usize, f64)] {
        &self.points
    }

    pub fn rate(&self) -> Result<ConvergenceRate> {
        if self.points.len() < 2 {
            return Err(Error::InvalidInput("a convergence rate needs at least two points".into()));
        }
        if let Some(&(dof, v)) = self.points.iter().find(|p| !(p.1 > 0.0)) {
            return Err(Error::InvalidInput(format!("non-positive value {v} at {dof} dof")));
        }
        let logs: Vec<(f64, f64)> = self.points.iter().map(|&(n, v)| ((n as f64).ln(), v.ln())).collect();
        let n = logs.len() as f64;
        let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
        let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let pairwise: Vec<f64> = logs.windows(2).map(|w| -(w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
        let s_avg = pairwise.iter().sum::<f64>() / pairwise.len() as f64;
        Ok(ConvergenceRate {
            s: -sxy / sxx,
            pairwise,
            s_avg,
        })
    }
}
