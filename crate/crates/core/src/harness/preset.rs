use std::path::PathBuf;

use super::config::{Benchmark, FormulationKind, StudyConfig};
use crate::error::{Error, Result};
use crate::recovery::Variant;

pub const PRESET_NAMES: [&str; 4] = ["cylinder-subcells", "cylinder-variants", "cylinder-poly-order", "lshape-variants"];

/// A named group of studies reproducing one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub studies: Vec<StudyConfig>,
}

fn study(benchmark: Benchmark, levels: &[u32], preset: &str, edit: impl FnOnce(&mut StudyConfig)) -> Result<StudyConfig> {
    let mut c = StudyConfig::new(benchmark, levels.to_vec())?;
    c.name = None;
    c.output_dir = Some(PathBuf::from("results").join(preset));
    edit(&mut c);
    c.resolve()
}

/// Builds the preset `name`, applying `overrides` to each of its studies.
pub fn preset(name: &str, overrides: &[String]) -> Result<Preset> {
    const CYLINDER: [u32; 4] = [1, 2, 3, 4];
    const LSHAPE: [u32; 4] = [0, 1, 2, 3];
    let (name, description, studies) = match name {
        "cylinder-subcells" => (
            PRESET_NAMES[0],
            "Cylinder, SPR-CX, smoothed elements with 2, 4 and 8 subcells",
            [2, 4, 8]
                .into_iter()
                .map(|nc| study(Benchmark::Cylinder, &CYLINDER, name, |c| c.subcells = Some(nc)))
                .collect::<Result<Vec<_>>>()?,
        ),
        "cylinder-variants" => (
            PRESET_NAMES[1],
            "Cylinder, 4 subcells, every recovery variant",
            Variant::ALL
                .into_iter()
                .map(|v| study(Benchmark::Cylinder, &CYLINDER, name, |c| c.recovery.variant = v))
                .collect::<Result<Vec<_>>>()?,
        ),
        "cylinder-poly-order" => (
            PRESET_NAMES[2],
            "Cylinder, 4 subcells, SPR-CX with linear and quadratic interior patches",
            [1, 2]
                .into_iter()
                .map(|p| study(Benchmark::Cylinder, &CYLINDER, name, |c| c.recovery.interior_degree = p))
                .collect::<Result<Vec<_>>>()?,
        ),
        "lshape-variants" => (
            PRESET_NAMES[3],
            "L-shape, graded meshes, 4 subcells, exact GSIFs, every recovery variant",
            Variant::ALL
                .into_iter()
                .map(|v| {
                    study(Benchmark::Lshape, &LSHAPE, name, |c| {
                        c.formulation = FormulationKind::Sfem;
                        c.recovery.variant = v;
                    })
                })
                .collect::<Result<Vec<_>>>()?,
        ),
        other => {
            return Err(Error::Config(format!(
                "unknown preset '{other}' (available: {})",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    let studies = studies
        .into_iter()
        .map(|s| if overrides.is_empty() { Ok(s) } else { s.with_overrides(overrides) })
        .collect::<Result<Vec<_>>>()?;
    Ok(Preset {
        name,
        description,
        studies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_have_distinct_study_names() {
        for name in PRESET_NAMES {
            let p = preset(name, &[]).unwrap();
            let mut names: Vec<_> = p.studies.iter().map(|s| s.name().to_string()).collect();
            names.sort();
            names.dedup();
            assert_eq!(names.len(), p.studies.len(), "{name}");
        }
        assert!(preset("cylinder", &[]).unwrap_err().is_config());
    }

    #[test]
    fn overrides_reach_every_study() {
        let p = preset("lshape-variants", &["levels=[0, 1]".into()]).unwrap();
        assert!(p.studies.iter().all(|s| s.levels == vec![0, 1]));
    }
}
