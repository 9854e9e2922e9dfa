use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sfem_zz::harness::{
    build_mesh, emit_report, preset, run_case, run_convergence_study, ReportFormat, StudyConfig, StudyReport,
};
use sfem_zz::mesh::write_mesh;
use sfem_zz::Error;

#[derive(Parser)]
#[command(name = "sfem-zz", version, about = "Smoothed FEM error estimation studies")]
struct Cli {
    /// More log output (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Study configuration (TOML). Without it, every key comes from --set.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set recovery.variant=SPR-C`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<StudyConfig, Error> {
        match &self.config {
            Some(path) => StudyConfig::from_file(path, &self.overrides),
            None => StudyConfig::from_toml_str("", &self.overrides),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve, recover and estimate on a single mesh level; prints JSON.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(short, long)]
        level: u32,
    },
    /// Convergence study over the configured levels.
    Study {
        #[command(flatten)]
        config: ConfigArgs,
        /// Output directory, overriding `output_dir`.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(short, long, value_enum, default_values_t = [ReportFormat::Csv, ReportFormat::Json])]
        format: Vec<ReportFormat>,
    },
    /// Run a named experiment: cylinder-subcells, cylinder-variants,
    /// cylinder-poly-order or lshape-variants.
    Preset {
        name: String,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(short, long, value_enum, default_values_t = [ReportFormat::Csv, ReportFormat::Json])]
        format: Vec<ReportFormat>,
    },
    /// Write the mesh of one level in the text mesh format.
    ExportMesh {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(short, long)]
        level: u32,
        /// Destination file; standard output when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

enum Failure {
    Config(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

fn emit_all(report: &StudyReport, formats: &[ReportFormat], output: Option<&PathBuf>) -> Result<(), Failure> {
    let dir = output.cloned().or_else(|| report.config.output_dir.clone()).unwrap_or_default();
    for &f in formats {
        let path = emit_report(report, f, &dir).map_err(|e| Failure::Config(e.to_string()))?;
        log::info!("wrote {}", path.display());
    }
    Ok(())
}

/// Writes a line to standard output; a closed pipe is an I/O error, not a panic.
fn say(line: std::fmt::Arguments) -> Result<(), Failure> {
    writeln!(std::io::stdout().lock(), "{line}").map_err(|e| Failure::Config(format!("standard output: {e}")))
}

fn study(config: &StudyConfig, formats: &[ReportFormat], output: Option<&PathBuf>) -> Result<(), Failure> {
    match run_convergence_study(config) {
        Ok(report) => {
            emit_all(&report, formats, output)?;
            for c in &report.cases {
                let theta = c.errors.theta.map_or("-".into(), |t| format!("{t:.4}"));
                say(format_args!(
                    "{} level {} dof {} theta {theta} exact {:.4e} estimated {:.4e}",
                    config.name(),
                    c.level,
                    c.errors.dof,
                    c.errors.exact,
                    c.errors.estimated
                ))?;
            }
            if let Some(r) = &report.rates.estimated {
                say(format_args!("{} estimated-error rate {:.4}", config.name(), r.s))?;
            }
            Ok(())
        }
        Err(failure) => {
            emit_all(&failure.partial, formats, output)?;
            Err(failure.error.into())
        }
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { config, level } => {
            let config = config.load()?;
            let report = run_case(&config, level)?;
            let text = serde_json::to_string_pretty(&report).map_err(|e| Failure::Numerical(e.to_string()))?;
            say(format_args!("{text}"))?;
        }
        Command::Study { config, output, format } => study(&config.load()?, &format, output.as_ref())?,
        Command::Preset {
            name,
            overrides,
            output,
            format,
        } => {
            let p = preset(&name, &overrides)?;
            log::info!("{}: {}", p.name, p.description);
            for s in &p.studies {
                study(s, &format, output.as_ref())?;
            }
        }
        Command::ExportMesh { config, level, output } => {
            let config = config.load()?;
            let mesh = build_mesh(&config, level)?;
            match output {
                Some(path) => {
                    let file = std::fs::File::create(&path)
                        .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
                    write_mesh(&mesh, std::io::BufWriter::new(file)).map_err(|e| Failure::Config(e.to_string()))?;
                }
                None => write_mesh(&mesh, std::io::stdout().lock()).map_err(|e| Failure::Config(e.to_string()))?,
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(2)
        }
    }
}
