//! Self-check suite behind the `validate` command.
//!
//! Each check is named, timed and independent. A failing check never stops
//! the others from running.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimation::{qfim_at, DerivativeConfig};
use crate::exec::ExecMode;
use crate::export::{parse_csv, write_csv};
use crate::setups::{Setup, SetupId, SetupParams};
use crate::sweep::{evaluate_point, run_sweep_with, SweepRecord, SweepSpec};
use crate::switch::{switch_kraus_output, switch_process_output, SwitchSetup};
use crate::tensor::{partial_trace, ComplexMatrix, DensityMatrix, PureState, SubsystemShape};
use crate::thermal::{
    apply_channel, dilation_unitary_full, gadc_kraus, gibbs_probabilities, purified_bath_state,
    qudit_thermal_kraus, uniform_gamma, BetaConvention, KrausChannel, ThermalBathSpec,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationOptions {
    /// Side of the temperature grids used by sweep-based checks.
    pub grid_n: usize,
    pub exec: ExecMode,
    /// Test hook: perturb one Kraus operator so the completeness check must fail.
    pub inject_completeness_defect: bool,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self {
            grid_n: 5,
            exec: ExecMode::Auto,
            inject_completeness_defect: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    #[serde(serialize_with = "millis")]
    pub wall_time: Duration,
}

fn millis<S: serde::Serializer>(d: &Duration, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64() * 1e3)
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckOutcome>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// One `PASS`/`FAIL` line per check.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!(
                "{status} {} ({:.1} ms): {}\n",
                c.name,
                c.wall_time.as_secs_f64() * 1e3,
                c.detail
            ));
        }
        out
    }
}

/// `Ok(detail)` passes, `Err` fails with its message.
type Check = fn(&ValidationOptions) -> Result<String>;

const CHECKS: &[(&str, Check)] = &[
    ("channel.kraus_completeness", check_completeness),
    ("channel.gibbs_fixed_point", check_gibbs_fixed_point),
    ("channel.kraus_vs_dilation", check_dilation),
    ("switch.route_equivalence", check_switch_routes),
    ("estimation.thermal_qubit_oracle", check_thermal_oracle),
    ("estimation.qfim_symmetric_psd", check_qfim_symmetric_psd),
    (
        "estimation.singular_postselected",
        check_singular_postselected,
    ),
    ("estimation.switch_mz_equality", check_switch_mz_equality),
    ("estimation.phi_independence", check_phi_independence),
    ("estimation.attainability", check_attainability),
    ("estimation.two_bath_degeneracy", check_two_bath_degeneracy),
    ("estimation.phi_zero_singular", check_phi_zero_singular),
    ("estimation.step_halving", check_step_halving),
    ("sweep.swap_symmetry", check_swap_symmetry),
    ("sweep.determinism", check_determinism),
    ("sweep.csv_round_trip", check_csv_round_trip),
];

pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|(n, _)| *n).collect()
}

pub fn run_validation(opts: &ValidationOptions) -> ValidationReport {
    let checks = CHECKS
        .iter()
        .map(|(name, check)| {
            let start = Instant::now();
            let result = check(opts);
            let wall_time = start.elapsed();
            let (passed, detail) = match result {
                Ok(d) => (true, d),
                Err(e) => (false, e.to_string()),
            };
            CheckOutcome {
                name,
                passed,
                detail,
                wall_time,
            }
        })
        .collect();
    ValidationReport { checks }
}

fn fail<T>(msg: String) -> Result<T> {
    Err(Error::Validation(msg))
}

/// Deterministic spread of `(T, η)` samples over `[0.1, 2] × [0, 1]`.
fn bath_samples() -> impl Iterator<Item = (f64, f64)> {
    (0..12).map(|k| {
        let x = (k as f64 * 0.618_033_988_749_895).fract();
        (0.1 + 1.9 * (k as f64 + 0.5) / 12.0, x)
    })
}

fn nat(dim: usize, t: f64, eta: f64) -> Result<ThermalBathSpec> {
    ThermalBathSpec::qudit(dim, t, eta, BetaConvention::Natural)
}

fn qudit(spec: &ThermalBathSpec) -> Result<KrausChannel> {
    if spec.dim() == 2 {
        gadc_kraus(spec)
    } else {
        qudit_thermal_kraus(spec, &uniform_gamma(spec.dim(), spec.eta()))
    }
}

fn check_completeness(opts: &ValidationOptions) -> Result<String> {
    let mut worst = 0.0f64;
    for (t, eta) in bath_samples() {
        for dim in 2..=4 {
            let ch = qudit(&nat(dim, t, eta)?)?;
            let ch = if opts.inject_completeness_defect {
                let mut ops = ch.ops().to_vec();
                ops[0] = ops[0].scale_real(1.0 + 1e-6);
                KrausChannel::from_ops_unchecked(ops)?
            } else {
                ch
            };
            worst = worst.max(ch.completeness_defect());
        }
    }
    if worst > 1e-10 {
        return fail(format!("max completeness defect {worst:e} exceeds 1e-10"));
    }
    Ok(format!("max defect {worst:e}"))
}

fn check_gibbs_fixed_point(_: &ValidationOptions) -> Result<String> {
    let mut worst = 0.0f64;
    for (t, _) in bath_samples() {
        for dim in 2..=4 {
            let spec = nat(dim, t, 1.0)?;
            let gibbs = ComplexMatrix::real_diagonal(&gibbs_probabilities(&spec));
            for input in [
                PureState::basis(dim, dim - 1).density(),
                DensityMatrix::maximally_mixed(dim),
            ] {
                let out = apply_channel(&qudit(&spec)?, &input)?;
                worst = worst.max(out.matrix().max_abs_diff(&gibbs));
            }
        }
    }
    if worst > 1e-12 {
        return fail(format!(
            "η = 1 output deviates from the Gibbs state by {worst:e}"
        ));
    }
    Ok(format!("max deviation {worst:e}"))
}

fn check_dilation(_: &ValidationOptions) -> Result<String> {
    let mut worst = 0.0f64;
    let inputs = [
        PureState::basis(2, 0).density(),
        PureState::plus().density(),
    ];
    for (t, eta) in bath_samples() {
        let spec = nat(2, t, eta)?;
        let bath = purified_bath_state(&spec)?.density();
        let u = dilation_unitary_full(eta)?;
        for rho in &inputs {
            let kraus = apply_channel(&gadc_kraus(&spec)?, rho)?;
            let joint = u.conjugate(rho.tensor(&bath).matrix())?;
            let dilated = partial_trace(&joint, &SubsystemShape::qubits(3), &[0])?;
            worst = worst.max(kraus.matrix().max_abs_diff(&dilated));
        }
    }
    if worst > 1e-10 {
        return fail(format!("Kraus and dilation routes differ by {worst:e}"));
    }
    Ok(format!("max difference {worst:e}"))
}

fn check_switch_routes(_: &ValidationOptions) -> Result<String> {
    let mut worst = 0.0f64;
    for dim in [2, 3] {
        for (k, (t, eta)) in bath_samples().enumerate().take(4) {
            let setup = SwitchSetup {
                target_dim: dim,
                eta,
                convention: BetaConvention::Natural,
            };
            let cfg = setup.config(t, 0.1 + 0.2 * k as f64)?;
            let amps = (0..dim)
                .map(|i| Complex64::new(1.0, 0.3 * i as f64))
                .collect();
            let rho = PureState::normalized(amps)?.density();
            let a = switch_kraus_output(&cfg, &rho)?;
            let b = switch_process_output(&cfg, &rho)?;
            worst = worst.max(a.matrix().max_abs_diff(b.matrix()));
        }
    }
    if worst > 1e-10 {
        return fail(format!("Kraus and process routes differ by {worst:e}"));
    }
    Ok(format!("max difference {worst:e}"))
}

fn check_thermal_oracle(_: &ValidationOptions) -> Result<String> {
    let cfg = DerivativeConfig::default();
    let family = |a: f64, _: f64| {
        DensityMatrix::new(ComplexMatrix::real_diagonal(&gibbs_probabilities(&nat(
            2, a, 1.0,
        )?)))
    };
    let mut worst = 0.0f64;
    for t in [0.1, 0.25, 0.5, 1.0] {
        let q = qfim_at(family, t, 0.5, &cfg)?;
        let p = 1.0 / (1.0 + (-1.0 / t).exp());
        let dp = p * (1.0 - p) / (t * t);
        worst = worst.max((q.qfim[0][0] - dp * dp / (p * (1.0 - p))).abs());
    }
    if worst > 1e-6 {
        return fail(format!(
            "QFI differs from classical Fisher information by {worst:e}"
        ));
    }
    Ok(format!("max difference {worst:e}"))
}

fn grid(opts: &ValidationOptions) -> Vec<f64> {
    SweepSpec {
        grid_n: opts.grid_n,
        ..SweepSpec::default()
    }
    .temperatures()
}

fn sweep(
    opts: &ValidationOptions,
    setup: SetupId,
    configure: impl FnOnce(&mut SweepSpec),
) -> Result<Vec<SweepRecord>> {
    let mut spec = SweepSpec {
        grid_n: opts.grid_n,
        ..SweepSpec::for_setup(setup)
    };
    configure(&mut spec);
    run_sweep_with(&spec, opts.exec)
}

fn check_qfim_symmetric_psd(opts: &ValidationOptions) -> Result<String> {
    let cfg = DerivativeConfig::default();
    let ts = grid(opts);
    let mut worst_asym = 0.0f64;
    let mut worst_eig = f64::INFINITY;
    for id in SetupId::ALL {
        let setup = Setup::build(id, &SetupParams::default())?;
        for &t1 in &ts {
            for &t2 in &ts {
                let q = qfim_at(|a, b| setup.evaluate(a, b), t1, t2, &cfg)?.qfim;
                worst_asym = worst_asym.max((q[0][1] - q[1][0]).abs());
                let (tr, det) = (q[0][0] + q[1][1], q[0][0] * q[1][1] - q[0][1] * q[1][0]);
                let min_eig = 0.5 * (tr - (tr * tr - 4.0 * det).max(0.0).sqrt());
                worst_eig = worst_eig.min(min_eig / q[0][0].abs().max(q[1][1].abs()).max(1.0));
            }
        }
    }
    if worst_asym > 1e-10 || worst_eig < -1e-8 {
        return fail(format!(
            "asymmetry {worst_asym:e}, smallest scaled eigenvalue {worst_eig:e}"
        ));
    }
    Ok(format!(
        "asymmetry {worst_asym:e}, smallest scaled eigenvalue {worst_eig:e}"
    ))
}

fn check_singular_postselected(opts: &ValidationOptions) -> Result<String> {
    let mut worst = 0.0f64;
    for id in [SetupId::Mz1b, SetupId::Mz2b] {
        for phi in [0.0, FRAC_PI_4, FRAC_PI_2] {
            for r in sweep(opts, id, |s| s.phi = phi)? {
                worst = worst.max(r.det_qfim.abs());
            }
        }
    }
    if worst >= 1e-8 {
        return fail(format!("largest |det Q| {worst:e} is not below 1e-8"));
    }
    Ok(format!("largest |det Q| {worst:e}"))
}

fn max_var_diff(a: &[SweepRecord], b: &[SweepRecord]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| [(x.var_t1, y.var_t1), (x.var_t2, y.var_t2)])
        .map(|(u, v)| if u == v { 0.0 } else { (u - v).abs() })
        .fold(0.0, f64::max)
}

fn check_switch_mz_equality(opts: &ValidationOptions) -> Result<String> {
    let d = max_var_diff(
        &sweep(opts, SetupId::Swi2, |_| {})?,
        &sweep(opts, SetupId::Mz2bWc, |_| {})?,
    );
    if d.is_nan() || d > 1e-6 {
        return fail(format!(
            "switch and two-bath interferometer variances differ by {d:e}"
        ));
    }
    Ok(format!("max variance difference {d:e}"))
}

fn check_phi_independence(opts: &ValidationOptions) -> Result<String> {
    let mut worst = 0.0f64;
    for id in [SetupId::Mz1bWc, SetupId::Mz2bWc] {
        let a = sweep(opts, id, |s| s.phi = 0.0)?;
        let b = sweep(opts, id, |s| s.phi = FRAC_PI_2)?;
        worst = worst.max(max_var_diff(&a, &b));
    }
    if worst.is_nan() || worst > 1e-6 {
        return fail(format!("variances change with φ by {worst:e}"));
    }
    Ok(format!("max variance difference {worst:e}"))
}

fn check_attainability(opts: &ValidationOptions) -> Result<String> {
    let mut worst = 0.0f64;
    for id in [
        SetupId::Swi2,
        SetupId::Swi3,
        SetupId::Swi4,
        SetupId::Mz1bWc,
        SetupId::Mz2bWc,
    ] {
        for r in sweep(opts, id, |_| {})? {
            worst = worst.max(r.attain_residual);
        }
    }
    if worst.is_nan() || worst >= 1e-8 {
        return fail(format!("largest |Tr(ρ[L₁,L₂])| is {worst:e}"));
    }
    Ok(format!("largest residual {worst:e}"))
}

fn det_at(setup: &Setup, t1: f64, t2: f64) -> Result<f64> {
    Ok(qfim_at(
        |a, b| setup.evaluate(a, b),
        t1,
        t2,
        &DerivativeConfig::default(),
    )?
    .determinant)
}

fn check_two_bath_degeneracy(_: &ValidationOptions) -> Result<String> {
    let setup = Setup::build(
        SetupId::Mz2b,
        &SetupParams {
            probe_qubits: 2,
            ..SetupParams::default()
        },
    )?;
    let mut worst = 0.0f64;
    for center in [0.4, 0.55, 0.7] {
        let on = det_at(&setup, center, center)?.abs();
        let off = det_at(&setup, center - 0.15, center + 0.15)?.abs();
        worst = worst.max(on / off);
    }
    if worst.is_nan() || worst >= 1e-6 {
        return fail(format!(
            "det Q on the diagonal is {worst:.3e} × its value at |T₁−T₂| = 0.3, expected below 1e-6"
        ));
    }
    Ok(format!("largest diagonal/off-diagonal ratio {worst:e}"))
}

fn check_phi_zero_singular(opts: &ValidationOptions) -> Result<String> {
    let recs = sweep(opts, SetupId::Mz1b, |s| {
        s.probe_qubits = 2;
        s.phi = 0.0;
    })?;
    let finite = recs.iter().filter(|r| !r.singular).count();
    if finite > 0 {
        return fail(format!(
            "{finite} of {} points have a regular QFIM at φ = 0",
            recs.len()
        ));
    }
    Ok(format!("all {} points singular", recs.len()))
}

fn check_step_halving(opts: &ValidationOptions) -> Result<String> {
    let ts = grid(opts);
    let base = DerivativeConfig::default();
    let half = DerivativeConfig::with_step(base.step / 2.0);
    let mut worst = 0.0f64;
    for id in SetupId::ALL {
        let setup = Setup::build(id, &SetupParams::default())?;
        for &t1 in &ts {
            for &t2 in &ts {
                let a = evaluate_point(&setup, t1, t2, &base, 1)?;
                let b = evaluate_point(&setup, t1, t2, &half, 1)?;
                for (u, v) in [
                    (a.var_t1, b.var_t1),
                    (a.var_t2, b.var_t2),
                    (a.total_var, b.total_var),
                ] {
                    if u.is_finite() != v.is_finite() {
                        return fail(format!(
                            "{id} at ({t1}, {t2}): singularity flips under step halving"
                        ));
                    }
                    if u.is_finite() {
                        worst = worst.max(((u - v) / u).abs());
                    }
                }
            }
        }
    }
    if worst.is_nan() || worst >= 0.01 {
        return fail(format!(
            "step halving changes a variance by {:.3}%",
            worst * 100.0
        ));
    }
    Ok(format!("largest relative change {worst:e}"))
}

fn check_swap_symmetry(opts: &ValidationOptions) -> Result<String> {
    let n = opts.grid_n;
    let mut worst = 0.0f64;
    for id in SetupId::ALL {
        let recs = sweep(opts, id, |_| {})?;
        for i in 0..n {
            for j in 0..n {
                let (u, v) = (recs[i * n + j].var_t1, recs[j * n + i].var_t2);
                if u != v {
                    worst = worst.max((u - v).abs());
                }
            }
        }
    }
    if worst.is_nan() || worst > 1e-8 {
        return fail(format!(
            "var_t1 differs from transposed var_t2 by {worst:e}"
        ));
    }
    Ok(format!("max difference {worst:e}"))
}

fn csv_bytes(records: &[SweepRecord]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_csv(records, &mut buf)?;
    Ok(buf)
}

fn check_determinism(opts: &ValidationOptions) -> Result<String> {
    let spec = SweepSpec {
        grid_n: opts.grid_n,
        ..SweepSpec::for_setup(SetupId::Swi3)
    };
    let one = csv_bytes(&run_sweep_with(&spec, ExecMode::Sequential)?)?;
    let many = csv_bytes(&run_sweep_with(&spec, ExecMode::Threads(8))?)?;
    if one != many {
        return fail("CSV output differs between 1 and 8 workers".into());
    }
    Ok(format!("{} identical bytes", one.len()))
}

fn check_csv_round_trip(opts: &ValidationOptions) -> Result<String> {
    let recs = sweep(opts, SetupId::Mz2bWc, |_| {})?;
    let parsed = parse_csv(&csv_bytes(&recs)?[..])?;
    if parsed != recs {
        return fail("parsed records differ from the originals".into());
    }
    Ok(format!("{} records", recs.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> ValidationOptions {
        ValidationOptions {
            grid_n: 3,
            ..ValidationOptions::default()
        }
    }

    #[test]
    fn injected_defect_fails_by_name() {
        let opts = ValidationOptions {
            inject_completeness_defect: true,
            ..quick()
        };
        assert!(check_completeness(&opts).is_err());
        assert!(check_completeness(&quick()).is_ok());
    }

    #[test]
    fn report_covers_every_check_with_timing() {
        let report = run_validation(&quick());
        assert_eq!(report.checks.len(), CHECKS.len());
        let text = report.to_text();
        for name in check_names() {
            assert!(text.contains(name));
        }
        assert!(report.get("channel.kraus_completeness").unwrap().passed);
        let json = serde_json::to_value(&report).unwrap();
        assert!(json["checks"][0]["wall_time"].is_f64());
    }
}
