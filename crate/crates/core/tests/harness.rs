use std::fs;
use std::process::Command;

use sfem_zz::harness::{
    emit_report, preset, read_json, run_case, run_convergence_study, write_csv, Benchmark, ReportFormat,
    StudyConfig, CSV_HEADER, PRESET_NAMES,
};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sfem-zz"))
}

#[test]
fn presets_are_byte_stable() {
    for name in PRESET_NAMES {
        let p = preset(name, &[]).unwrap();
        assert!(!p.studies.is_empty());
        for study in &p.studies {
            let outputs: Vec<(Vec<u8>, Vec<u8>)> = (0..2)
                .map(|_| {
                    let dir = tempfile::tempdir().unwrap();
                    let report = run_convergence_study(study).unwrap();
                    let csv = emit_report(&report, ReportFormat::Csv, dir.path()).unwrap();
                    let json = emit_report(&report, ReportFormat::Json, dir.path()).unwrap();
                    assert_eq!(csv.file_name().unwrap().to_str().unwrap(), format!("{}.csv", study.name()));
                    (fs::read(csv).unwrap(), fs::read(json).unwrap())
                })
                .collect();
            assert_eq!(outputs[0], outputs[1], "{name}/{}", study.name());
        }
    }
}

#[test]
fn json_report_round_trips() {
    let config = StudyConfig::from_toml_str("benchmark = \"cylinder\"\nlevels = [1, 2]\n", &[]).unwrap();
    let report = run_convergence_study(&config).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = emit_report(&report, ReportFormat::Json, dir.path()).unwrap();
    let back = read_json(&fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(back, report);
    assert_eq!(report.cases.len(), 2);
    assert!(report.cases[0].errors.dof < report.cases[1].errors.dof);
    assert!(report.rates.estimated.is_some());
}

#[test]
fn csv_layout() {
    let config = StudyConfig::from_toml_str("benchmark = \"cylinder\"\nlevels = [2, 1]\n", &[]).unwrap();
    let report = run_convergence_study(&config).unwrap();
    let mut buf = Vec::new();
    write_csv(&report, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], CSV_HEADER.join(","));
    assert_eq!(lines.len(), 3);
    let first: Vec<&str> = lines[1].split(',').collect();
    let second: Vec<&str> = lines[2].split(',').collect();
    assert_eq!((first[0], second[0]), ("1", "2"));
    // no rate for the coarsest level
    assert_eq!((first[8], first[9]), ("", ""));
    assert!(second[9].parse::<f64>().unwrap() > 0.3);
}

#[test]
fn single_cases() {
    let cylinder = StudyConfig::new(Benchmark::Cylinder, vec![2]).unwrap();
    let r = run_case(&cylinder, 2).unwrap();
    let theta = r.errors.theta.unwrap();
    assert!(theta > 0.9 && theta < 1.2, "{theta}");
    assert!(r.gsif.is_none());

    let patch = StudyConfig::new(Benchmark::Patch, vec![0]).unwrap();
    let r = run_case(&patch, 0).unwrap();
    assert!(r.errors.estimated < 1e-9, "{}", r.errors.estimated);

    let lshape = StudyConfig::new(Benchmark::Lshape, vec![1]).unwrap();
    let r = run_case(&lshape, 1).unwrap();
    let k = r.gsif.unwrap();
    assert_eq!((k.k_i, k.k_ii), (1.0, 0.0));
}

#[test]
fn invalid_configurations_are_rejected() {
    let bad = [
        "benchmark = \"cylinder\"\nlevels = [1, 1]\n",
        "benchmark = \"cylinder\"\nlevels = [0]\n",
        "benchmark = \"cylinder\"\nlevels = [1]\nsurprise = 3\n",
        "benchmark = \"cylinder\"\nformulation = \"fem\"\nsubcells = 4\nlevels = [1]\n",
        "benchmark = \"cylinder\"\nlevels = [1]\n[lshape]\ngrading = 2.0\n",
        "benchmark = \"cylinder\"\nlevels = [1]\n[recovery]\nvariant = \"SPR-Q\"\n",
    ];
    for text in bad {
        let err = StudyConfig::from_toml_str(text, &[]).unwrap_err();
        assert!(err.is_config(), "{text}: {err}");
    }
    let empty = StudyConfig::new(Benchmark::Cylinder, vec![]).unwrap();
    assert!(run_convergence_study(&empty).is_err());
    assert!(preset("nonexistent", &[]).is_err());
    let c = StudyConfig::from_toml_str("benchmark = \"cylinder\"\nlevels = [1]\n", &["recovery.variant=\"SPR\"".into()])
        .unwrap();
    assert_eq!(c.recovery.variant, sfem_zz::recovery::Variant::Spr);
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = bin()
        .args(["study", "--set", "benchmark=\"cylinder\"", "--set", "levels=[1,2]", "-o"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(dir.path().join("cylinder_sfem4_spr-cx_p1.csv").exists());
    assert!(dir.path().join("cylinder_sfem4_spr-cx_p1.json").exists());

    let missing = bin().args(["run", "--config", "/nonexistent/study.toml", "--level", "1"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(1));
    let unknown = bin().arg("frobnicate").output().unwrap();
    assert_eq!(unknown.status.code(), Some(1));

    // one subcell leaves hourglass modes: the cylinder system is singular
    let singular = bin()
        .args(["run", "--set", "benchmark=\"cylinder\"", "--set", "subcells=1", "--level", "2"])
        .output()
        .unwrap();
    assert_eq!(singular.status.code(), Some(2), "{}", String::from_utf8_lossy(&singular.stderr));

    let run = bin().args(["run", "--set", "benchmark=\"patch\"", "--level", "0"]).output().unwrap();
    assert_eq!(run.status.code(), Some(0));
    let case: serde_json::Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(case["level"], 0);

    let mesh = bin().args(["export-mesh", "--set", "benchmark=\"lshape\"", "--level", "0"]).output().unwrap();
    assert_eq!(mesh.status.code(), Some(0));
    assert!(!mesh.stdout.is_empty());
}
