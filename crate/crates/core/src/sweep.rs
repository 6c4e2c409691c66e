//! Temperature-grid sweeps and per-setup range summaries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{crb_bounds, qfim_at, DerivativeConfig};
use crate::exec::{map_indexed, ExecMode};
use crate::setups::{Setup, SetupId, SetupParams};
use crate::thermal::BetaConvention;

/// Everything needed to reproduce one sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub setup: SetupId,
    /// Probe register size; two qubits are allowed for `mz1b` and `mz2b`.
    pub probe_qubits: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub grid_n: usize,
    pub phi: f64,
    pub eta: f64,
    pub beta_convention: BetaConvention,
    pub step: f64,
    pub repetitions: u32,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            setup: SetupId::Mz1b,
            probe_qubits: 1,
            t_min: 0.1,
            t_max: 1.0,
            grid_n: 46,
            phi: std::f64::consts::FRAC_PI_2,
            eta: 1.0,
            beta_convention: BetaConvention::Natural,
            step: 1e-5,
            repetitions: 1,
        }
    }
}

impl SweepSpec {
    pub fn for_setup(setup: SetupId) -> Self {
        Self {
            setup,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Configuration(msg));
        if !(self.t_min.is_finite() && self.t_min > 0.0) {
            return bad(format!("t_min must be positive, got {}", self.t_min));
        }
        if !(self.t_max.is_finite() && self.t_max > self.t_min) {
            return bad(format!(
                "t_max must exceed t_min ({}), got {}",
                self.t_min, self.t_max
            ));
        }
        if self.grid_n < 2 {
            return bad(format!("grid_n must be at least 2, got {}", self.grid_n));
        }
        if !self.phi.is_finite() {
            return bad("phi must be finite".into());
        }
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1".into());
        }
        self.derivative_config().validate()?;
        self.build_setup().map(|_| ())
    }

    pub fn params(&self) -> SetupParams {
        SetupParams {
            probe_qubits: self.probe_qubits,
            phi: self.phi,
            eta: self.eta,
            convention: self.beta_convention,
        }
    }

    pub fn build_setup(&self) -> Result<Setup> {
        Setup::build(self.setup, &self.params())
    }

    pub fn derivative_config(&self) -> DerivativeConfig {
        DerivativeConfig::with_step(self.step)
    }

    /// Grid temperatures, endpoints included.
    pub fn temperatures(&self) -> Vec<f64> {
        let n = self.grid_n;
        let span = self.t_max - self.t_min;
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    self.t_max
                } else {
                    self.t_min + span * i as f64 / (n - 1) as f64
                }
            })
            .collect()
    }

    /// Setup name with the probe size when it is not the default.
    pub fn label(&self) -> String {
        if self.probe_qubits == 1 {
            self.setup.to_string()
        } else {
            format!("{}-{}q", self.setup, self.probe_qubits)
        }
    }
}

/// Bounds at one grid point. Infinite fields mark a singular QFIM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub t1: f64,
    pub t2: f64,
    pub var_t1: f64,
    pub var_t2: f64,
    pub cov: f64,
    pub total_var: f64,
    pub det_qfim: f64,
    pub attain_residual: f64,
    pub singular: bool,
}

/// Bounds at a single point.
pub fn evaluate_point(
    setup: &Setup,
    t1: f64,
    t2: f64,
    cfg: &DerivativeConfig,
    repetitions: u32,
) -> Result<SweepRecord> {
    let at = || -> Result<SweepRecord> {
        let q = qfim_at(|a, b| setup.evaluate(a, b), t1, t2, cfg)?;
        let b = crb_bounds(&q, repetitions)?;
        Ok(SweepRecord {
            t1,
            t2,
            var_t1: b.var_t1,
            var_t2: b.var_t2,
            cov: b.cov,
            total_var: b.total_var,
            det_qfim: q.determinant,
            attain_residual: q.attainability_residual,
            singular: b.singular,
        })
    };
    at().map_err(|e| Error::Evaluation {
        t1,
        t2,
        source: Box::new(e),
    })
}

/// Sweep with an automatically sized worker pool.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRecord>> {
    run_sweep_with(spec, ExecMode::Auto)
}

/// `grid_n²` records, `t1`-major. Output is identical for every `mode`.
pub fn run_sweep_with(spec: &SweepSpec, mode: ExecMode) -> Result<Vec<SweepRecord>> {
    spec.validate()?;
    let setup = spec.build_setup()?;
    let cfg = spec.derivative_config();
    let ts = spec.temperatures();
    let n = ts.len();
    let results = map_indexed(n * n, mode, |k| {
        evaluate_point(&setup, ts[k / n], ts[k % n], &cfg, spec.repetitions)
    });
    results.into_iter().collect()
}

/// Extent of a field over the finite grid values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    fn of(values: impl Iterator<Item = f64>) -> Option<Range> {
        values.filter(|v| v.is_finite()).fold(None, |acc, v| {
            Some(match acc {
                None => Range { min: v, max: v },
                Some(r) => Range {
                    min: r.min.min(v),
                    max: r.max.max(v),
                },
            })
        })
    }
}

/// Finite ranges of `var_t1` and `total_var` for one sweep. `None` means
/// every point was singular.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RangeSummary {
    pub label: String,
    pub setup: SetupId,
    pub var: Option<Range>,
    pub total: Option<Range>,
    pub effective_dimension: usize,
}

pub fn summarize(spec: &SweepSpec, records: &[SweepRecord]) -> Result<RangeSummary> {
    Ok(RangeSummary {
        label: spec.label(),
        setup: spec.setup,
        var: Range::of(records.iter().map(|r| r.var_t1)),
        total: Range::of(records.iter().map(|r| r.total_var)),
        effective_dimension: spec.build_setup()?.effective_dimension(),
    })
}

/// One summary per `(spec, records)` pair, in input order.
pub fn summarize_ranges(runs: &[(SweepSpec, Vec<SweepRecord>)]) -> Result<Vec<RangeSummary>> {
    runs.iter()
        .map(|(spec, recs)| summarize(spec, recs))
        .collect()
}
