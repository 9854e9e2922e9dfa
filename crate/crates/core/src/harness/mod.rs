//! Configuration-driven studies: single cases, convergence studies over mesh
//! levels, CSV/JSON reports and the named presets behind the command line.
//!
//! Reports carry no timestamps or host data so that reruns are byte-identical.

mod config;
mod preset;
mod report;
mod study;

pub use config::{
    apply_override, Benchmark, CylinderSettings, FormulationKind, GsifSettings, LshapeSettings, PatchSettings,
    StudyConfig,
};
pub use preset::{preset, Preset, PRESET_NAMES};
pub use report::{emit_report, read_json, write_csv, write_json, ReportFormat, CSV_HEADER};
pub use study::{
    build_mesh, patch_field, run_case, run_convergence_study, CaseReport, GsifSummary, StudyFailure, StudyRates,
    StudyReport,
};
