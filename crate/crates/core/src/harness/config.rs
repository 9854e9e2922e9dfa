//! Study configuration: TOML text with unknown keys rejected, dotted-path
//! overrides, and resolution of benchmark-dependent defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::elasticity::{Material, PlaneState};
use crate::error::{Error, Result};
use crate::gsif::PlateauFunction;
use crate::recovery::RecoveryConfig;
use crate::solver::Formulation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Benchmark {
    Cylinder,
    Lshape,
    /// Distorted square mesh under a homogeneous linear displacement field.
    Patch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormulationKind {
    Fem,
    Sfem,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CylinderSettings {
    pub inner_radius: f64,
    pub outer_radius: f64,
    pub pressure: f64,
}

impl Default for CylinderSettings {
    fn default() -> Self {
        Self {
            inner_radius: 5.0,
            outer_radius: 20.0,
            pressure: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LshapeSettings {
    pub half_width: f64,
    /// Ratio between the largest and smallest radial division at level 1.
    pub grading: f64,
    pub k_i: f64,
    pub k_ii: f64,
}

impl Default for LshapeSettings {
    fn default() -> Self {
        Self {
            half_width: 1.0,
            grading: 2.0,
            k_i: 1.0,
            k_ii: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PatchSettings {
    /// Elements per side at level 0; each level doubles it.
    pub elements: usize,
    pub side: f64,
    /// Interior node perturbation as a fraction of the element size.
    pub distortion: f64,
}

impl Default for PatchSettings {
    fn default() -> Self {
        Self {
            elements: 4,
            side: 1.0,
            distortion: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GsifSettings {
    pub r_plateau: f64,
    pub r_outer: f64,
}

impl Default for GsifSettings {
    fn default() -> Self {
        let p = PlateauFunction::default();
        Self {
            r_plateau: p.r_plateau,
            r_outer: p.r_outer,
        }
    }
}

/// One convergence study. Optional sections are filled in by [`StudyConfig::resolve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub benchmark: Benchmark,
    #[serde(default = "default_formulation")]
    pub formulation: FormulationKind,
    #[serde(default)]
    pub subcells: Option<usize>,
    /// Mesh levels of a convergence study; unused by single runs.
    #[serde(default)]
    pub levels: Vec<u32>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub material: Option<Material>,
    #[serde(default)]
    pub recovery: RecoveryConfig,
    #[serde(default)]
    pub gsif: GsifSettings,
    #[serde(default)]
    pub cylinder: Option<CylinderSettings>,
    #[serde(default)]
    pub lshape: Option<LshapeSettings>,
    #[serde(default)]
    pub patch: Option<PatchSettings>,
}

fn default_formulation() -> FormulationKind {
    FormulationKind::Sfem
}

impl StudyConfig {
    /// A configuration with every default for `benchmark`, already resolved.
    pub fn new(benchmark: Benchmark, levels: Vec<u32>) -> Result<Self> {
        Self {
            name: None,
            benchmark,
            formulation: FormulationKind::Sfem,
            subcells: None,
            levels,
            output_dir: None,
            material: None,
            recovery: RecoveryConfig::default(),
            gsif: GsifSettings::default(),
            cylinder: None,
            lshape: None,
            patch: None,
        }
        .resolve()
    }

    /// Parses TOML text, applies `key.path=value` overrides and resolves.
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e| Error::Config(format!("{e}")))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let config: Self = table.try_into().map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        config.resolve()
    }

    pub fn from_file(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text, overrides)
    }

    /// Applies overrides to an already built configuration.
    pub fn with_overrides(&self, overrides: &[String]) -> Result<Self> {
        Self::from_toml_str(&self.to_toml(), overrides)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("study configurations always serialize")
    }

    /// Materializes benchmark defaults and checks the combination.
    pub fn resolve(mut self) -> Result<Self> {
        let wrong = |section: &str| {
            Err(Error::Config(format!(
                "section [{section}] does not apply to benchmark {:?}",
                self.benchmark
            )))
        };
        match self.benchmark {
            Benchmark::Cylinder => {
                if self.lshape.is_some() {
                    return wrong("lshape");
                }
                if self.patch.is_some() {
                    return wrong("patch");
                }
                self.cylinder.get_or_insert_with(Default::default);
            }
            Benchmark::Lshape => {
                if self.cylinder.is_some() {
                    return wrong("cylinder");
                }
                if self.patch.is_some() {
                    return wrong("patch");
                }
                self.lshape.get_or_insert_with(Default::default);
            }
            Benchmark::Patch => {
                if self.cylinder.is_some() {
                    return wrong("cylinder");
                }
                if self.lshape.is_some() {
                    return wrong("lshape");
                }
                self.patch.get_or_insert_with(Default::default);
            }
        }
        if self.material.is_none() {
            let (e, nu) = match self.benchmark {
                Benchmark::Cylinder => (3.0e7, 0.3),
                Benchmark::Lshape | Benchmark::Patch => (1000.0, 0.3),
            };
            self.material = Some(Material::new(e, nu, PlaneState::PlaneStrain)?);
        }
        match (self.formulation, self.subcells) {
            (FormulationKind::Fem, Some(_)) => {
                return Err(Error::Config("subcells only apply to the sfem formulation".into()))
            }
            (FormulationKind::Sfem, None) => self.subcells = Some(4),
            _ => {}
        }
        if self.name.is_none() {
            self.name = Some(self.default_name());
        }
        self.output_dir.get_or_insert_with(|| PathBuf::from("results"));
        self.validate()?;
        Ok(self)
    }

    fn default_name(&self) -> String {
        let benchmark = match self.benchmark {
            Benchmark::Cylinder => "cylinder",
            Benchmark::Lshape => "lshape",
            Benchmark::Patch => "patch",
        };
        let formulation = match self.subcells {
            Some(nc) => format!("sfem{nc}"),
            None => "fem".into(),
        };
        format!(
            "{benchmark}_{formulation}_{}_p{}",
            self.recovery.variant.name().to_ascii_lowercase(),
            self.recovery.interior_degree
        )
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(m) = &self.material {
            m.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        self.recovery.validate()?;
        self.plateau().validate()?;
        self.formulation()?;
        let sorted = self.sorted_levels();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config(format!("duplicate entries in the level list {:?}", self.levels)));
        }
        if self.benchmark == Benchmark::Cylinder && sorted.first() == Some(&0) {
            return Err(Error::Config("cylinder levels start at 1".into()));
        }
        if let Some(name) = &self.name {
            if name.is_empty() || name.contains(['/', '\\']) {
                return Err(Error::Config(format!("study name '{name}' is not a valid file stem")));
            }
        }
        if let Some(p) = &self.patch {
            if p.elements == 0 || !(p.side > 0.0) || !(0.0..0.5).contains(&p.distortion) {
                return Err(Error::Config("patch settings need elements > 0, side > 0 and distortion in [0, 0.5)".into()));
            }
        }
        Ok(())
    }

    pub fn formulation(&self) -> Result<Formulation> {
        match (self.formulation, self.subcells) {
            (FormulationKind::Fem, _) => Ok(Formulation::Fem),
            (FormulationKind::Sfem, nc) => {
                Formulation::sfem(nc.unwrap_or(4)).map_err(|e| Error::Config(e.to_string()))
            }
        }
    }

    pub fn plateau(&self) -> PlateauFunction {
        PlateauFunction {
            r_plateau: self.gsif.r_plateau,
            r_outer: self.gsif.r_outer,
            ..PlateauFunction::default()
        }
    }

    pub fn material(&self) -> Material {
        self.material.expect("resolved configurations carry a material")
    }

    pub fn name(&self) -> &str {
        self.name.as_deref().unwrap_or("study")
    }

    /// Levels in increasing order.
    pub fn sorted_levels(&self) -> Vec<u32> {
        let mut l = self.levels.clone();
        l.sort_unstable();
        l
    }
}

/// Sets `a.b.c` in `table` to the TOML value written after `=`. Values that do
/// not parse as TOML are taken as strings.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override '{assignment}' is not of the form key.path=value")))?;
    let keys: Vec<&str> = path.trim().split('.').map(str::trim).collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Error::Config(format!("override '{assignment}' has an empty key")));
    }
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let (last, parents) = keys.split_last().expect("at least one key");
    let mut current = table;
    for k in parents {
        let entry = current
            .entry(k.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        current = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override '{assignment}': '{k}' is not a section")))?;
    }
    current.insert(last.to_string(), value);
    Ok(())
}
