use std::sync::Arc;

use nalgebra::{Matrix2, Vector2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Benchmark, StudyConfig};
use crate::analytic::{CylinderProblem, ExactField, SingularSolution};
use crate::benchmark::{distorted_square_mesh, CylinderBenchmark, LShapeBenchmark, LinearField};
use crate::error::{Error, Result};
use crate::estimation::{error_report, ConvergenceRate, ConvergenceSeries, ErrorReport};
use crate::mesh::{build_cylinder_mesh, build_lshape_mesh, Mesh};
use crate::recovery::{recover, singular_stress_estimate};
use crate::solver::{assemble_and_solve, BoundaryConditions};

/// Stress intensity factors used by the split part of the recovery.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GsifSummary {
    pub k_i: f64,
    pub k_ii: f64,
}

/// Outcome of one mesh level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub level: u32,
    pub elements: usize,
    /// Patches whose quadratic fit was singular and fell back to linear.
    pub degraded_patches: usize,
    pub gsif: Option<GsifSummary>,
    pub errors: ErrorReport,
}

/// Rates of every tracked quantity against dof; `None` when the series has
/// fewer than two points or non-positive values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRates {
    pub exact: Option<ConvergenceRate>,
    pub estimated: Option<ConvergenceRate>,
    pub recovered: Option<ConvergenceRate>,
    pub theta: Option<ConvergenceRate>,
    pub mean_abs_d: Option<ConvergenceRate>,
    pub sigma_d: Option<ConvergenceRate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub version: String,
    pub config: StudyConfig,
    /// Ordered by dof.
    pub cases: Vec<CaseReport>,
    pub rates: StudyRates,
    /// Set when a level failed; `cases` then holds the levels before it.
    pub aborted: Option<String>,
}

impl StudyReport {
    pub fn new(config: StudyConfig, cases: Vec<CaseReport>) -> Self {
        let rates = rates_of(&cases);
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            cases,
            rates,
            aborted: None,
        }
    }
}

fn rates_of(cases: &[CaseReport]) -> StudyRates {
    let rate = |f: &dyn Fn(&ErrorReport) -> Option<f64>| {
        let points: Option<Vec<_>> = cases.iter().map(|c| f(&c.errors).map(|v| (c.errors.dof, v))).collect();
        ConvergenceSeries::new(points?).and_then(|s| s.rate()).ok()
    };
    StudyRates {
        exact: rate(&|r| Some(r.exact)),
        estimated: rate(&|r| Some(r.estimated)),
        recovered: rate(&|r| Some(r.recovered)),
        theta: rate(&|r| r.theta),
        mean_abs_d: rate(&|r| Some(r.mean_abs_d)),
        sigma_d: rate(&|r| Some(r.sigma_d)),
    }
}

/// A study that stopped at a failing level.
#[derive(Debug)]
pub struct StudyFailure {
    pub partial: StudyReport,
    pub error: Error,
}

impl std::fmt::Display for StudyFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (after {} completed levels)", self.error, self.partial.cases.len())
    }
}

impl std::error::Error for StudyFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

/// The fixed displacement gradient of the patch benchmark.
pub fn patch_field(config: &StudyConfig) -> LinearField {
    LinearField {
        offset: Vector2::new(1.0e-3, -2.0e-3),
        gradient: Matrix2::new(1.0e-3, 4.0e-4, -2.5e-4, -6.0e-4),
        elasticity: config.material().elasticity_matrix(),
    }
}

/// Mesh of `level` for the configured benchmark.
pub fn build_mesh(config: &StudyConfig, level: u32) -> Result<Mesh> {
    match config.benchmark {
        Benchmark::Cylinder => {
            let c = config.cylinder.unwrap_or_default();
            build_cylinder_mesh(c.inner_radius, c.outer_radius, level)
        }
        Benchmark::Lshape => {
            let l = config.lshape.unwrap_or_default();
            build_lshape_mesh(level, l.grading, l.half_width)
        }
        Benchmark::Patch => {
            let p = config.patch.unwrap_or_default();
            let n = 1usize
                .checked_shl(level)
                .and_then(|f| f.checked_mul(p.elements))
                .filter(|&n| n <= 4096)
                .ok_or_else(|| Error::Config(format!("patch level {level} is too large")))?;
            distorted_square_mesh(n, p.side, p.distortion)
        }
    }
}

/// Mesh → solve → recover → error norms for one level.
pub fn run_case(config: &StudyConfig, level: u32) -> Result<CaseReport> {
    config.validate()?;
    let context = |e: Error| {
        e.context(format!(
            "{} level {level} with {}",
            config.name(),
            config.recovery.variant
        ))
    };
    let material = config.material();
    let formulation = config.formulation()?;
    let mesh = Arc::new(build_mesh(config, level).map_err(context)?);
    let elements = mesh.n_elements();

    let (bc, exact, singular): (Box<dyn BoundaryConditions>, Box<dyn ExactField>, Option<SingularSolution>) =
        match config.benchmark {
            Benchmark::Cylinder => {
                let c = config.cylinder.unwrap_or_default();
                let problem = CylinderProblem::new(c.inner_radius, c.outer_radius, c.pressure, material)
                    .map_err(|e| Error::Config(e.to_string()))?;
                (Box::new(CylinderBenchmark { problem }), Box::new(problem), None)
            }
            Benchmark::Lshape => {
                let l = config.lshape.unwrap_or_default();
                let b = LShapeBenchmark::new(material, l.k_i, l.k_ii, l.half_width).map_err(context)?;
                (Box::new(b), Box::new(b.solution), Some(b.solution))
            }
            Benchmark::Patch => {
                let f = patch_field(config);
                (Box::new(f), Box::new(f), None)
            }
        };

    let solution = assemble_and_solve(mesh, material, formulation, bc.as_ref()).map_err(context)?;
    let split = match (&singular, config.recovery.variant.is_split()) {
        (Some(s), true) => Some(
            singular_stress_estimate(&solution, bc.as_ref(), Some(s), config.recovery.gsif_mode, &config.plateau())
                .map_err(context)?,
        ),
        _ => None,
    };
    let field = recover(&solution, bc.as_ref(), &config.recovery, split.as_ref()).map_err(context)?;
    let errors = error_report(&solution, &field, exact.as_ref());
    if !(errors.estimated.is_finite() && errors.exact.is_finite()) {
        return Err(context(Error::InvalidInput("non-finite error norm".into())));
    }
    Ok(CaseReport {
        level,
        elements,
        degraded_patches: field.degraded_patches(),
        gsif: split.map(|s| GsifSummary {
            k_i: s.k_i,
            k_ii: s.k_ii,
        }),
        errors,
    })
}

/// Runs every level (concurrently), ordered by dof. The first failing level
/// in that order aborts the study; earlier levels are kept as a partial report.
#[allow(clippy::result_large_err)] // the partial report rides along with the error
pub fn run_convergence_study(config: &StudyConfig) -> Result<StudyReport, StudyFailure> {
    let fail = |error: Error, cases: Vec<CaseReport>| {
        let mut partial = StudyReport::new(config.clone(), cases);
        partial.aborted = Some(error.to_string());
        StudyFailure { partial, error }
    };
    if let Err(e) = config.validate() {
        return Err(fail(e, Vec::new()));
    }
    if config.levels.is_empty() {
        return Err(fail(Error::Config("the level list is empty".into()), Vec::new()));
    }
    let levels = config.sorted_levels();
    let results: Vec<Result<CaseReport>> = levels.par_iter().map(|&l| run_case(config, l)).collect();
    let mut cases = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(c) => cases.push(c),
            Err(e) => return Err(fail(e, cases)),
        }
    }
    if cases.windows(2).any(|w| w[1].errors.dof <= w[0].errors.dof) {
        return Err(fail(
            Error::Config("degrees of freedom do not increase with the level".into()),
            cases,
        ));
    }
    Ok(StudyReport::new(config.clone(), cases))
}
