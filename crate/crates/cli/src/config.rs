use std::fs;
use std::path::Path;

use duotherm::exec::ExecMode;
use duotherm::sweep::SweepSpec;

use crate::args::SpecArgs;
use crate::error::CliError;

pub const THREADS_ENV: &str = "DUOTHERM_THREADS";

/// Parses a JSON sweep document; missing fields take their defaults.
pub fn parse_spec_json(text: &str) -> Result<SweepSpec, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid JSON config: {e}")))
}

pub fn load_spec_file(path: &Path) -> Result<SweepSpec, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_spec_json(&text)
}

/// Defaults, then the JSON file, then explicit flags.
pub fn resolve_spec(args: &SpecArgs) -> Result<SweepSpec, CliError> {
    let mut spec = match &args.config {
        Some(path) => load_spec_file(path)?,
        None => SweepSpec::default(),
    };
    apply_overrides(&mut spec, args);
    spec.validate()?;
    Ok(spec)
}

pub fn apply_overrides(spec: &mut SweepSpec, args: &SpecArgs) {
    macro_rules! set {
        ($field:ident, $flag:ident) => {
            if let Some(v) = args.$flag {
                spec.$field = v;
            }
        };
    }
    set!(setup, setup);
    set!(probe_qubits, qubits);
    set!(t_min, tmin);
    set!(t_max, tmax);
    set!(grid_n, grid);
    set!(phi, phi);
    set!(eta, eta);
    set!(beta_convention, beta_convention);
    set!(step, step);
    set!(repetitions, repetitions);
}

/// Worker setting from an optional environment value; unset or `0` is automatic.
pub fn exec_mode_from(value: Option<&str>) -> Result<ExecMode, CliError> {
    match value.map(str::trim) {
        None | Some("") => Ok(ExecMode::Auto),
        Some(v) => v.parse::<usize>().map(ExecMode::from_threads).map_err(|_| {
            CliError::Config(format!(
                "{THREADS_ENV} must be a non-negative integer, got '{v}'"
            ))
        }),
    }
}

pub fn exec_mode_from_env() -> Result<ExecMode, CliError> {
    exec_mode_from(std::env::var(THREADS_ENV).ok().as_deref())
}
