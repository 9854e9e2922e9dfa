//! C interface to `sfem-zz`.
//!
//! Objects are opaque handles created by `sfem_config_*`, `sfem_mesh_build` and `sfem_run_*` and
//! released by the matching `*_free`. Every fallible function returns an
//! [`SfemStatus`]; on failure the message is available from
//! [`sfem_last_error_message`] on the same thread. Panics never cross the
//! boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use sfem_zz::analytic::{q_constant, solve_singularity_eigenvalue, Mode};
use sfem_zz::estimation::ErrorReport;
use sfem_zz::harness::{
    build_mesh, emit_report, preset, run_case, run_convergence_study, CaseReport, ReportFormat, StudyConfig,
    StudyReport,
};
use sfem_zz::mesh::Mesh;
use sfem_zz::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfemStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ConfigError = 3,
    NumericalError = 4,
    IoError = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfemMode {
    ModeI = 1,
    ModeII = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfemFormat {
    Csv = 0,
    Json = 1,
}

/// Series whose convergence rate can be queried from a study.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfemQuantity {
    ExactError = 0,
    EstimatedError = 1,
    RecoveredError = 2,
    Theta = 3,
    MeanAbsD = 4,
    SigmaD = 5,
}

/// Global error measures of one mesh level. `theta` is NaN when the exact
/// error vanishes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SfemErrorSummary {
    pub level: u32,
    pub dof: usize,
    pub elements: usize,
    pub exact_error: f64,
    pub estimated_error: f64,
    pub recovered_error: f64,
    pub theta: f64,
    pub mean_abs_d: f64,
    pub sigma_d: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SfemRate {
    /// Least-squares log-log slope.
    pub slope: f64,
    /// Mean of the rates between consecutive levels.
    pub average: f64,
}

/// Resolved study configuration.
pub struct SfemConfig(StudyConfig);

pub struct SfemMesh(Mesh);

/// Result of a single level.
pub struct SfemCase(CaseReport);

/// Result of a convergence study, possibly partial.
pub struct SfemStudy(StudyReport);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_last_error(message: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = message);
}

struct Failure(SfemStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io(_) => SfemStatus::IoError,
            e if e.is_config() => SfemStatus::ConfigError,
            _ => SfemStatus::NumericalError,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(SfemStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SfemStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error(String::new());
            SfemStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {message}"));
            SfemStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn as_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn as_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(SfemStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

/// Copies `text` NUL-terminated into `buf` (truncating) and returns the
/// buffer size needed for the whole string.
unsafe fn copy_out(text: &str, buf: *mut c_char, len: usize) -> usize {
    let bytes = text.as_bytes();
    if !buf.is_null() && len > 0 {
        let n = bytes.len().min(len - 1);
        ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
        *buf.add(n) = 0;
    }
    bytes.len() + 1
}

fn into_handle<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

fn mode(m: SfemMode) -> Mode {
    match m {
        SfemMode::ModeI => Mode::I,
        SfemMode::ModeII => Mode::II,
    }
}

fn summary(c: &CaseReport) -> SfemErrorSummary {
    let r: &ErrorReport = &c.errors;
    SfemErrorSummary {
        level: c.level,
        dof: r.dof,
        elements: c.elements,
        exact_error: r.exact,
        estimated_error: r.estimated,
        recovered_error: r.recovered,
        theta: r.theta.unwrap_or(f64::NAN),
        mean_abs_d: r.mean_abs_d,
        sigma_d: r.sigma_d,
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sfem_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the message of the last failure on this thread into `buf` and
/// returns the buffer size the full message needs (1 when there is none).
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn sfem_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| copy_out(&e.borrow(), buf, len))
}

/// Leading singularity exponent of a notch with opening angle `alpha`.
///
/// # Safety
/// `out` must be null or valid for writing.
#[no_mangle]
pub unsafe extern "C" fn sfem_singularity_eigenvalue(alpha: f64, m: SfemMode, out: *mut f64) -> SfemStatus {
    guard(|| {
        let out = as_mut(out, "out")?;
        *out = solve_singularity_eigenvalue(alpha, mode(m))?;
        Ok(())
    })
}

/// Constant `Q` of the leading eigenfunction of mode `m`.
///
/// # Safety
/// `out` must be null or valid for writing.
#[no_mangle]
pub unsafe extern "C" fn sfem_q_constant(alpha: f64, m: SfemMode, out: *mut f64) -> SfemStatus {
    guard(|| {
        let out = as_mut(out, "out")?;
        let lambda = solve_singularity_eigenvalue(alpha, mode(m))?;
        *out = q_constant(alpha, lambda, mode(m))?.value;
        Ok(())
    })
}

/// Parses and resolves a TOML study configuration.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn sfem_config_from_toml(toml: *const c_char, out: *mut *mut SfemConfig) -> SfemStatus {
    guard(|| {
        let out = as_mut(out, "out")?;
        *out = ptr::null_mut();
        let config = StudyConfig::from_toml_str(as_str(toml, "toml")?, &[])?;
        *out = into_handle(SfemConfig(config));
        Ok(())
    })
}

/// Number of studies in the named preset.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn sfem_preset_study_count(name: *const c_char, out: *mut usize) -> SfemStatus {
    guard(|| {
        let out = as_mut(out, "out")?;
        *out = preset(as_str(name, "name")?, &[])?.studies.len();
        Ok(())
    })
}

/// Configuration of study `index` of the named preset.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn sfem_preset_study(name: *const c_char, index: usize, out: *mut *mut SfemConfig) -> SfemStatus {
    guard(|| {
        let out = as_mut(out, "out")?;
        *out = ptr::null_mut();
        let p = preset(as_str(name, "name")?, &[])?;
        let study = p.studies.into_iter().nth(index).ok_or_else(|| {
            Failure(SfemStatus::InvalidArgument, format!("preset has no study {index}"))
        })?;
        *out = into_handle(SfemConfig(study));
        Ok(())
    })
}

/// Applies a `key.path=value` override. The handle is unchanged on failure.
///
/// # Safety
/// `config` must be a live handle; `assignment` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn sfem_config_set(config: *mut SfemConfig, assignment: *const c_char) -> SfemStatus {
    guard(|| {
        let config = as_mut(config, "config")?;
        let updated = config.0.with_overrides(&[as_str(assignment, "assignment")?.to_string()])?;
        config.0 = updated;
        Ok(())
    })
}

/// Writes the resolved configuration as TOML into `buf`; `required` receives
/// the buffer size needed.
///
/// # Safety
/// `config` must be a live handle; `buf` null or `len` writable bytes;
/// `required` null or valid for writing.
#[no_mangle]
pub unsafe extern "C" fn sfem_config_to_toml(
    config: *const SfemConfig,
    buf: *mut c_char,
    len: usize,
    required: *mut usize,
) -> SfemStatus {
    guard(|| {
        let n = copy_out(&as_ref(config, "config")?.0.to_toml(), buf, len);
        if let Some(r) = required.as_mut() {
            *r = n;
        }
        Ok(())
    })
}

/// # Safety
/// `config` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn sfem_config_free(config: *mut SfemConfig) {
    free(config);
}

/// Mesh of `level` for the configured benchmark.
///
/// # Safety
/// `config` must be a live handle; `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn sfem_mesh_build(config: *const SfemConfig, level: u32, out: *mut *mut SfemMesh) -> SfemStatus {
    guard(|| {
        let out = as_mut(out, "out")?;
        *out = ptr::null_mut();
        let mesh = build_mesh(&as_ref(config, "config")?.0, level)?;
        *out = into_handle(SfemMesh(mesh));
        Ok(())
    })
}

/// Node count, 0 for a null handle.
///
/// # Safety
/// `mesh` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sfem_mesh_node_count(mesh: *const SfemMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.0.n_nodes())
}

/// Element count, 0 for a null handle.
///
/// # Safety
/// `mesh` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sfem_mesh_element_count(mesh: *const SfemMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.0.n_elements())
}

/// Coordinates of `node` into `xy[0..2]`.
///
/// # Safety
/// `mesh` must be a live handle; `xy` must point to 2 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sfem_mesh_node(mesh: *const SfemMesh, node: usize, xy: *mut f64) -> SfemStatus {
    guard(|| {
        let mesh = &as_ref(mesh, "mesh")?.0;
        if xy.is_null() {
            return Err(null("xy"));
        }
        if node >= mesh.n_nodes() {
            return Err(Failure(SfemStatus::InvalidArgument, format!("node {node} out of range")));
        }
        let p = mesh.position(node);
        *xy = p.x;
        *xy.add(1) = p.y;
        Ok(())
    })
}

/// Counter-clockwise node indices of `element` into `nodes[0..4]`.
///
/// # Safety
/// `mesh` must be a live handle; `nodes` must point to 4 writable `size_t`.
#[no_mangle]
pub unsafe extern "C" fn sfem_mesh_element(mesh: *const SfemMesh, element: usize, nodes: *mut usize) -> SfemStatus {
    guard(|| {
        let mesh = &as_ref(mesh, "mesh")?.0;
        if nodes.is_null() {
            return Err(null("nodes"));
        }
        let e = mesh.elements().get(element).ok_or_else(|| {
            Failure(SfemStatus::InvalidArgument, format!("element {element} out of range"))
        })?;
        ptr::copy_nonoverlapping(e.nodes.as_ptr(), nodes, 4);
        Ok(())
    })
}

/// # Safety
/// `mesh` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn sfem_mesh_free(mesh: *mut SfemMesh) {
    free(mesh);
}

/// Solves, recovers and estimates on one level.
///
/// # Safety
/// `config` must be a live handle; `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn sfem_run_case(config: *const SfemConfig, level: u32, out: *mut *mut SfemCase) -> SfemStatus {
    guard(|| {
        let out = as_mut(out, "out")?;
        *out = ptr::null_mut();
        let report = run_case(&as_ref(config, "config")?.0, level)?;
        *out = into_handle(SfemCase(report));
        Ok(())
    })
}

/// # Safety
/// `case` must be a live handle; `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn sfem_case_summary(case: *const SfemCase, out: *mut SfemErrorSummary) -> SfemStatus {
    guard(|| {
        *as_mut(out, "out")? = summary(&as_ref(case, "case")?.0);
        Ok(())
    })
}

/// Stress intensity factors used for splitting. Fails with
/// `InvalidArgument` when the case was not split.
///
/// # Safety
/// `case` must be a live handle; `k_i` and `k_ii` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn sfem_case_gsif(case: *const SfemCase, k_i: *mut f64, k_ii: *mut f64) -> SfemStatus {
    guard(|| {
        let g = as_ref(case, "case")?
            .0
            .gsif
            .ok_or_else(|| Failure(SfemStatus::InvalidArgument, "the case has no singular part".into()))?;
        *as_mut(k_i, "k_i")? = g.k_i;
        *as_mut(k_ii, "k_ii")? = g.k_ii;
        Ok(())
    })
}

/// Per-element `(estimated, exact, recovered)` error norms into `out[0..3]`.
///
/// # Safety
/// `case` must be a live handle; `out` must point to 3 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sfem_case_element_errors(case: *const SfemCase, element: usize, out: *mut f64) -> SfemStatus {
    guard(|| {
        let case = &as_ref(case, "case")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        let e = case.errors.elements.get(element).ok_or_else(|| {
            Failure(SfemStatus::InvalidArgument, format!("element {element} out of range"))
        })?;
        *out = e.estimated;
        *out.add(1) = e.exact;
        *out.add(2) = e.recovered;
        Ok(())
    })
}

/// # Safety
/// `case` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn sfem_case_free(case: *mut SfemCase) {
    free(case);
}

/// Runs the convergence study. When a level fails the status reports the
/// failure and `out` still receives the partial study.
///
/// # Safety
/// `config` must be a live handle; `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn sfem_run_study(config: *const SfemConfig, out: *mut *mut SfemStudy) -> SfemStatus {
    guard(|| {
        let out = as_mut(out, "out")?;
        *out = ptr::null_mut();
        match run_convergence_study(&as_ref(config, "config")?.0) {
            Ok(report) => {
                *out = into_handle(SfemStudy(report));
                Ok(())
            }
            Err(failure) => {
                *out = into_handle(SfemStudy(failure.partial));
                Err(failure.error.into())
            }
        }
    })
}

/// Completed levels, 0 for a null handle.
///
/// # Safety
/// `study` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sfem_study_case_count(study: *const SfemStudy) -> usize {
    study.as_ref().map_or(0, |s| s.0.cases.len())
}

/// Summary of the `index`-th level in dof order.
///
/// # Safety
/// `study` must be a live handle; `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn sfem_study_summary(study: *const SfemStudy, index: usize, out: *mut SfemErrorSummary) -> SfemStatus {
    guard(|| {
        let study = &as_ref(study, "study")?.0;
        let out = as_mut(out, "out")?;
        let case = study
            .cases
            .get(index)
            .ok_or_else(|| Failure(SfemStatus::InvalidArgument, format!("level index {index} out of range")))?;
        *out = summary(case);
        Ok(())
    })
}

/// Convergence rate of `quantity`. Fails with `InvalidArgument` when it is
/// undefined (fewer than two levels or non-positive values).
///
/// # Safety
/// `study` must be a live handle; `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn sfem_study_rate(study: *const SfemStudy, quantity: SfemQuantity, out: *mut SfemRate) -> SfemStatus {
    guard(|| {
        let rates = &as_ref(study, "study")?.0.rates;
        let out = as_mut(out, "out")?;
        let rate = match quantity {
            SfemQuantity::ExactError => &rates.exact,
            SfemQuantity::EstimatedError => &rates.estimated,
            SfemQuantity::RecoveredError => &rates.recovered,
            SfemQuantity::Theta => &rates.theta,
            SfemQuantity::MeanAbsD => &rates.mean_abs_d,
            SfemQuantity::SigmaD => &rates.sigma_d,
        }
        .as_ref()
        .ok_or_else(|| Failure(SfemStatus::InvalidArgument, "rate undefined for this series".into()))?;
        *out = SfemRate {
            slope: rate.s,
            average: rate.s_avg,
        };
        Ok(())
    })
}

/// Writes the report as `<dir>/<study name>.csv` or `.json`.
///
/// # Safety
/// `study` must be a live handle; `dir` a NUL-terminated path.
#[no_mangle]
pub unsafe extern "C" fn sfem_study_write(study: *const SfemStudy, format: SfemFormat, dir: *const c_char) -> SfemStatus {
    guard(|| {
        let study = &as_ref(study, "study")?.0;
        let format = match format {
            SfemFormat::Csv => ReportFormat::Csv,
            SfemFormat::Json => ReportFormat::Json,
        };
        emit_report(study, format, Path::new(as_str(dir, "dir")?))?;
        Ok(())
    })
}

/// # Safety
/// `study` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn sfem_study_free(study: *mut SfemStudy) {
    free(study);
}
