use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use duotherm::export::{format_float, write_csv, write_pgm, Field};
use duotherm::setups::SetupId;
use duotherm::sweep::{
    evaluate_point, run_sweep_with, summarize, RangeSummary, SweepRecord, SweepSpec,
};
use duotherm::validation::{run_validation, ValidationOptions};

use crate::args::{Cli, Command, Format, SpecArgs};
use crate::config::{exec_mode_from_env, resolve_spec};
use crate::error::CliError;

pub fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Sweep {
            spec,
            out: path,
            format,
            field,
        } => sweep(&spec, path.as_deref(), format, field, out),
        Command::Bounds { spec, t1, t2 } => bounds(&spec, t1, t2, out),
        Command::Compare { spec, out: path } => compare(&spec, path.as_deref(), out),
        Command::Validate {
            grid,
            json,
            inject_defect,
        } => validate(grid, json, inject_defect, out),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

/// Maps write failures onto the path being written.
fn at_path(path: &Path, e: duotherm::Error) -> CliError {
    match e {
        duotherm::Error::Io(source) => CliError::io(path, source),
        duotherm::Error::Csv(c) => CliError::io(path, std::io::Error::other(c)),
        other => CliError::Core(other),
    }
}

pub fn emit_csv(records: &[SweepRecord], path: &Path) -> Result<(), CliError> {
    write_csv(records, create(path)?).map_err(|e| at_path(path, e))
}

pub fn emit_pgm_heatmap(
    records: &[SweepRecord],
    field: Field,
    path: &Path,
) -> Result<(), CliError> {
    write_pgm(records, field, create(path)?).map_err(|e| at_path(path, e))
}

fn with_extension(base: &Path, ext: &str) -> PathBuf {
    match base.extension().and_then(|e| e.to_str()) {
        Some("csv" | "pgm") => base.with_extension(ext),
        _ => {
            let mut s = base.as_os_str().to_owned();
            s.push(".");
            s.push(ext);
            PathBuf::from(s)
        }
    }
}

fn stdout_err(e: std::io::Error) -> CliError {
    CliError::io("<stdout>", e)
}

fn sweep(
    args: &SpecArgs,
    path: Option<&Path>,
    format: Format,
    field: Field,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let spec = resolve_spec(args)?;
    if path.is_none() && format != Format::Csv {
        return Err(CliError::Config("--out is required for PGM output".into()));
    }
    let records = run_sweep_with(&spec, exec_mode_from_env()?)?;
    let Some(base) = path else {
        return write_csv(&records, out).map_err(|e| at_path(Path::new("<stdout>"), e));
    };
    if matches!(format, Format::Csv | Format::Both) {
        emit_csv(&records, &with_extension(base, "csv"))?;
    }
    if matches!(format, Format::Pgm | Format::Both) {
        emit_pgm_heatmap(&records, field, &with_extension(base, "pgm"))?;
    }
    Ok(())
}

fn bounds(args: &SpecArgs, t1: f64, t2: f64, out: &mut dyn Write) -> Result<(), CliError> {
    let spec = resolve_spec(args)?;
    for (name, t) in [("t1", t1), ("t2", t2)] {
        if !(t.is_finite() && t > 0.0) {
            return Err(CliError::Config(format!(
                "--{name} must be a positive temperature, got {t}"
            )));
        }
    }
    let setup = spec.build_setup()?;
    let record = evaluate_point(&setup, t1, t2, &spec.derivative_config(), spec.repetitions)?;
    write_csv(&[record], out).map_err(|e| at_path(Path::new("<stdout>"), e))
}

/// Every setup id with a single-qubit probe, then the two-qubit postselected variants.
pub fn comparison_specs(base: &SweepSpec) -> Vec<SweepSpec> {
    let single = SetupId::ALL.into_iter().map(|id| (id, 1));
    let double = [(SetupId::Mz1b, 2), (SetupId::Mz2b, 2)];
    single
        .chain(double)
        .map(|(setup, probe_qubits)| SweepSpec {
            setup,
            probe_qubits,
            ..base.clone()
        })
        .collect()
}

pub fn write_summaries(summaries: &[RangeSummary], mut w: impl Write) -> std::io::Result<()> {
    writeln!(
        w,
        "setup,effective_dimension,min_var,max_var,min_total,max_total"
    )?;
    let fmt = |v: Option<f64>| v.map_or_else(|| "empty".to_string(), format_float);
    for s in summaries {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            s.label,
            s.effective_dimension,
            fmt(s.var.map(|r| r.min)),
            fmt(s.var.map(|r| r.max)),
            fmt(s.total.map(|r| r.min)),
            fmt(s.total.map(|r| r.max)),
        )?;
    }
    w.flush()
}

fn compare(args: &SpecArgs, path: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    if args.setup.is_some() || args.qubits.is_some() {
        return Err(CliError::Config(
            "compare runs every setup; drop --setup and --qubits".into(),
        ));
    }
    let base = resolve_spec(args)?;
    let mode = exec_mode_from_env()?;
    let mut summaries = Vec::new();
    for spec in comparison_specs(&base) {
        let records = run_sweep_with(&spec, mode)?;
        summaries.push(summarize(&spec, &records)?);
    }
    match path {
        Some(p) => write_summaries(&summaries, create(p)?).map_err(|e| CliError::io(p, e)),
        None => write_summaries(&summaries, out).map_err(stdout_err),
    }
}

fn validate(
    grid: usize,
    json: bool,
    inject_defect: bool,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    if grid < 2 {
        return Err(CliError::Config(format!(
            "--grid must be at least 2, got {grid}"
        )));
    }
    let opts = ValidationOptions {
        grid_n: grid,
        exec: exec_mode_from_env()?,
        inject_completeness_defect: inject_defect,
    };
    let report = run_validation(&opts);
    let text = if json {
        serde_json::to_string_pretty(&report).map_err(|e| CliError::io("<stdout>", e.into()))?
            + "\n"
    } else {
        report.to_text()
    };
    out.write_all(text.as_bytes()).map_err(stdout_err)?;
    if report.all_passed() {
        Ok(())
    } else {
        let failed: Vec<_> = report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name)
            .collect();
        Err(CliError::ValidationFailed(format!(
            "failed checks: {}",
            failed.join(", ")
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extension_handling() {
        assert_eq!(
            with_extension(Path::new("out/run"), "pgm"),
            PathBuf::from("out/run.pgm")
        );
        assert_eq!(
            with_extension(Path::new("run.csv"), "pgm"),
            PathBuf::from("run.pgm")
        );
        assert_eq!(
            with_extension(Path::new("run.v2"), "csv"),
            PathBuf::from("run.v2.csv")
        );
    }

    #[test]
    fn comparison_covers_all_setups_and_two_qubit_probes() {
        let specs = comparison_specs(&SweepSpec::default());
        let labels: Vec<String> = specs.iter().map(|s| s.label()).collect();
        assert_eq!(labels.len(), 9);
        assert!(labels.contains(&"mz1b-2q".to_string()));
        assert!(labels.contains(&"swi4".to_string()));
    }
}
