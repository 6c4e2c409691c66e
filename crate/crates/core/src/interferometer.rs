//! Mach-Zehnder setups: a composite probe whose path (control) is put in
//! superposition so that its internal state interacts with one
//! path-controlled bath or with two independent baths.
//!
//! Register layout of the full pure state: probe qubits first, then the
//! control qubit (`|γ₁⟩ = |0⟩`, `|γ₂⟩ = |1⟩`), then the purified bath qubits.
//! Baths are traced out before any measurement on the control.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{reduce_pure, ComplexMatrix, DensityMatrix, PureState, SubsystemShape, ZERO};
use crate::thermal::{dilation_unitary, purified_bath_state, BetaConvention, ThermalBathSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BathMode {
    /// One bath whose temperature is entangled with the path.
    OneBath,
    /// An independent bath on each arm.
    TwoBath,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimationTarget {
    /// Control measured in the `|±⟩` basis, probe state conditioned on `+`.
    PostselectedPlus,
    /// Joint probe ⊗ control state, baths traced.
    ProbePlusControl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlSign {
    Plus,
    Minus,
}

impl ControlSign {
    fn factor(self) -> f64 {
        match self {
            ControlSign::Plus => 1.0,
            ControlSign::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MzConfig {
    pub bath_mode: BathMode,
    pub probe_qubits: usize,
    pub target: EstimationTarget,
    /// Phase-shifter phase on the `γ₁` arm, radians.
    pub phi: f64,
    pub eta: f64,
    pub convention: BetaConvention,
    pub initial_internal: PureState,
}

impl MzConfig {
    /// Probe starts in `|0…0⟩`.
    pub fn new(
        bath_mode: BathMode,
        probe_qubits: usize,
        target: EstimationTarget,
        phi: f64,
        eta: f64,
    ) -> Result<Self> {
        if !(1..=2).contains(&probe_qubits) {
            return Err(Error::Configuration(format!(
                "probe must have 1 or 2 qubits, got {probe_qubits}"
            )));
        }
        let cfg = Self {
            bath_mode,
            probe_qubits,
            target,
            phi,
            eta,
            convention: BetaConvention::Natural,
            initial_internal: PureState::basis(1 << probe_qubits, 0),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_convention(mut self, convention: BetaConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn with_initial_internal(mut self, state: PureState) -> Result<Self> {
        self.initial_internal = state;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.probe_qubits) {
            return Err(Error::Configuration(format!(
                "probe must have 1 or 2 qubits, got {}",
                self.probe_qubits
            )));
        }
        if self.target == EstimationTarget::ProbePlusControl && self.probe_qubits != 1 {
            return Err(Error::Configuration(
                "joint probe+control estimation is defined for a single-qubit probe".into(),
            ));
        }
        if self.initial_internal.dim() != 1 << self.probe_qubits {
            return Err(Error::Configuration(format!(
                "initial internal state has dimension {}, probe needs {}",
                self.initial_internal.dim(),
                1 << self.probe_qubits
            )));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::Validation(format!(
                "eta must lie in [0, 1], got {}",
                self.eta
            )));
        }
        if !self.phi.is_finite() {
            return Err(Error::Validation("phi must be finite".into()));
        }
        Ok(())
    }

    fn bath_qubits(&self) -> usize {
        match self.bath_mode {
            BathMode::OneBath => 2,
            BathMode::TwoBath => 4,
        }
    }

    /// Shape of the probe ⊗ control register (control is the last factor).
    pub fn joint_shape(&self) -> SubsystemShape {
        SubsystemShape::new(vec![1 << self.probe_qubits, 2]).expect("nonzero dims")
    }
}

/// Applies a two-qubit gate to qubits `a` and `b` of an `n`-qubit register.
/// Gate basis ordering is `|q_a q_b⟩`; qubit 0 is the most significant.
fn apply_two_qubit(psi: &mut [Complex64], gate: &ComplexMatrix, a: usize, b: usize, n: usize) {
    let ma = 1 << (n - 1 - a);
    let mb = 1 << (n - 1 - b);
    for base in 0..psi.len() {
        if base & ma != 0 || base & mb != 0 {
            continue;
        }
        let idx = [base, base | mb, base | ma, base | ma | mb];
        let old = idx.map(|i| psi[i]);
        for (r, &i) in idx.iter().enumerate() {
            psi[i] = (0..4).map(|c| gate[(r, c)] * old[c]).sum();
        }
    }
}

/// State of `probes ⊗ baths` in one arm after the probe–bath interaction.
///
/// `bath_states` are the purified baths in register order, and
/// `touched_bath` selects which of them the probe meets in this arm.
fn arm_state(
    cfg: &MzConfig,
    bath_states: &[PureState],
    touched_bath: usize,
) -> Result<Vec<Complex64>> {
    let k = cfg.probe_qubits;
    let mut psi = cfg.initial_internal.amplitudes().to_vec();
    for bath in bath_states {
        psi = crate::tensor::kron_vec(&psi, bath.amplitudes());
    }
    let n = k + 2 * bath_states.len();
    let u = dilation_unitary(cfg.eta)?;
    // A single probe qubit meets the first bath qubit; with two probe
    // qubits, probe qubit q meets bath qubit q.
    for q in 0..k {
        apply_two_qubit(&mut psi, &u, q, k + 2 * touched_bath + q, n);
    }
    Ok(psi)
}

/// Phase-free joint state of probe ⊗ control with the baths traced out.
///
/// This is the state just before the phase shifter acts; `φ` enters through
/// [`apply_control_phase`] or [`postselect_control`].
pub fn mz_joint_state(cfg: &MzConfig, t1: f64, t2: f64) -> Result<ComplexMatrix> {
    cfg.validate()?;
    let bath = |t: f64| -> Result<PureState> {
        purified_bath_state(&ThermalBathSpec::qubit(t, cfg.eta, cfg.convention)?)
    };
    let (theta1, theta2) = (bath(t1)?, bath(t2)?);
    let (arm1, arm2) = match cfg.bath_mode {
        BathMode::OneBath => (arm_state(cfg, &[theta1], 0)?, arm_state(cfg, &[theta2], 0)?),
        BathMode::TwoBath => {
            let baths = [theta1, theta2];
            (arm_state(cfg, &baths, 0)?, arm_state(cfg, &baths, 1)?)
        }
    };

    // Insert the control between probe and bath: amplitude(p, c, b) = arm_c(p, b) / √2.
    let probe_dim = 1 << cfg.probe_qubits;
    let bath_dim = 1 << cfg.bath_qubits();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut full = vec![ZERO; probe_dim * 2 * bath_dim];
    for p in 0..probe_dim {
        for b in 0..bath_dim {
            full[(p * 2) * bath_dim + b] = arm1[p * bath_dim + b] * h;
            full[(p * 2 + 1) * bath_dim + b] = arm2[p * bath_dim + b] * h;
        }
    }
    let shape = SubsystemShape::new(vec![probe_dim, 2, bath_dim])?;
    reduce_pure(&full, &shape, &[0, 1])
}

/// `ρ → Φ ρ Φ†` with `Φ = e^{iφ}|0⟩⟨0| + |1⟩⟨1|` on the control factor.
pub fn apply_control_phase(
    joint: &ComplexMatrix,
    shape: &SubsystemShape,
    control_index: usize,
    phi: f64,
) -> Result<ComplexMatrix> {
    check_control(joint, shape, control_index)?;
    let phase = Complex64::from_polar(1.0, phi);
    let weight = |digit: usize| {
        if digit == 0 {
            phase
        } else {
            Complex64::new(1.0, 0.0)
        }
    };
    Ok(ComplexMatrix::from_fn(
        joint.rows(),
        joint.cols(),
        |r, c| {
            let cr = shape.digits(r)[control_index];
            let cc = shape.digits(c)[control_index];
            joint[(r, c)] * weight(cr) * weight(cc).conj()
        },
    ))
}

fn check_control(
    joint: &ComplexMatrix,
    shape: &SubsystemShape,
    control_index: usize,
) -> Result<()> {
    if !joint.is_square() || joint.rows() != shape.total() {
        return Err(Error::Dimension(format!(
            "shape {:?} does not annotate a {}x{} matrix",
            shape.dims(),
            joint.rows(),
            joint.cols()
        )));
    }
    match shape.dims().get(control_index) {
        Some(2) => Ok(()),
        Some(d) => Err(Error::Dimension(format!(
            "control factor must be a qubit, has dimension {d}"
        ))),
        None => Err(Error::Dimension(format!(
            "no factor {control_index} in shape {:?}",
            shape.dims()
        ))),
    }
}

/// Unnormalized conditional state after projecting the phase-shifted control
/// onto `|±⟩ = (|γ₁⟩ ± |γ₂⟩)/√2`, on the remaining factors in order.
fn project_control(
    joint: &ComplexMatrix,
    shape: &SubsystemShape,
    control_index: usize,
    sign: ControlSign,
    phi: f64,
) -> Result<ComplexMatrix> {
    let shifted = apply_control_phase(joint, shape, control_index, phi)?;
    let rest_dims: Vec<usize> = shape
        .dims()
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != control_index)
        .map(|(_, &d)| d)
        .collect();
    let rest_total: usize = rest_dims.iter().product();
    let rest = SubsystemShape::new(if rest_dims.is_empty() {
        vec![1]
    } else {
        rest_dims
    })?;
    let full_index = |i: usize, ctrl: usize| {
        let mut d = rest.digits(i);
        if shape.len() == 1 {
            d.clear();
        }
        d.insert(control_index, ctrl);
        shape.compose(&d)
    };
    // ⟨±|c⟩ = 1/√2 for c = 0, ±1/√2 for c = 1.
    let amp = [0.5_f64.sqrt(), sign.factor() * 0.5_f64.sqrt()];
    Ok(ComplexMatrix::from_fn(rest_total, rest_total, |r, c| {
        let mut acc = ZERO;
        for cr in 0..2 {
            for cc in 0..2 {
                acc += shifted[(full_index(r, cr), full_index(c, cc))] * (amp[cr] * amp[cc]);
            }
        }
        acc
    }))
}

/// Probability of the `sign` outcome when the phase-shifted control is
/// measured in the `|±⟩` basis.
pub fn branch_probability(
    joint: &ComplexMatrix,
    shape: &SubsystemShape,
    control_index: usize,
    sign: ControlSign,
    phi: f64,
) -> Result<f64> {
    Ok(project_control(joint, shape, control_index, sign, phi)?
        .trace()
        .re)
}

/// Outcome probabilities below this are treated as a dark port.
pub const DARK_PORT_TOL: f64 = 1e-14;

/// Conditions the non-control factors on the `sign` outcome of a `|±⟩`
/// measurement of the control after the phase shifter.
///
/// Returns the normalized conditional state and the outcome probability, or
/// [`Error::DarkPort`] when that probability vanishes.
pub fn postselect_control(
    joint: &ComplexMatrix,
    shape: &SubsystemShape,
    control_index: usize,
    sign: ControlSign,
    phi: f64,
) -> Result<(DensityMatrix, f64)> {
    let conditional = project_control(joint, shape, control_index, sign, phi)?;
    let probability = conditional.trace().re;
    if probability < DARK_PORT_TOL {
        return Err(Error::DarkPort { probability });
    }
    let state = DensityMatrix::new(conditional.scale_real(1.0 / probability).hermitian_part())?;
    Ok((state, probability))
}

/// Parameterized output state used for estimation.
pub fn mz_output_state(cfg: &MzConfig, t1: f64, t2: f64) -> Result<DensityMatrix> {
    let joint = mz_joint_state(cfg, t1, t2)?;
    let shape = cfg.joint_shape();
    match cfg.target {
        EstimationTarget::PostselectedPlus => {
            Ok(postselect_control(&joint, &shape, 1, ControlSign::Plus, cfg.phi)?.0)
        }
        EstimationTarget::ProbePlusControl => {
            let shifted = apply_control_phase(&joint, &shape, 1, cfg.phi)?;
            DensityMatrix::new(shifted.hermitian_part())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{kron, kron_vec, partial_trace, permute_factors};
    use crate::thermal::{dilation_unitary_full, gibbs_probabilities};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn p_of(t: f64) -> Vec<f64> {
        gibbs_probabilities(&ThermalBathSpec::qubit(t, 1.0, BetaConvention::Natural).unwrap())
    }

    fn theta(t: f64) -> Vec<Complex64> {
        purified_bath_state(&ThermalBathSpec::qubit(t, 1.0, BetaConvention::Natural).unwrap())
            .unwrap()
            .into_amplitudes()
    }

    /// `U_{γ1}` and `U_{γ2}` on (P, B1a, B1b, B2a, B2b) built from dense
    /// Kronecker products and a factor permutation.
    fn two_bath_arm_unitaries(eta: f64) -> (ComplexMatrix, ComplexMatrix) {
        let u1 = kron(
            &dilation_unitary_full(eta).unwrap(),
            &ComplexMatrix::identity(4),
        );
        // The same operator written on (P, B2a, B2b, B1a, B1b), then reordered.
        let shape = SubsystemShape::qubits(5);
        let u2 = permute_factors(&u1, &shape, &[0, 3, 4, 1, 2]).unwrap();
        (u1, u2)
    }

    #[test]
    fn equal_temperatures_collapse_to_gibbs() {
        let cfg = MzConfig::new(
            BathMode::OneBath,
            1,
            EstimationTarget::PostselectedPlus,
            0.0,
            1.0,
        )
        .unwrap();
        let rho = mz_output_state(&cfg, 0.4, 0.4).unwrap();
        assert!(
            rho.matrix()
                .max_abs_diff(&ComplexMatrix::real_diagonal(&p_of(0.4)))
                < 1e-14
        );
    }

    #[test]
    fn dark_port_for_identical_branches() {
        let cfg = MzConfig::new(
            BathMode::OneBath,
            1,
            EstimationTarget::PostselectedPlus,
            0.0,
            1.0,
        )
        .unwrap();
        let joint = mz_joint_state(&cfg, 0.6, 0.6).unwrap();
        let shape = cfg.joint_shape();
        let minus = branch_probability(&joint, &shape, 1, ControlSign::Minus, 0.0).unwrap();
        assert!(minus.abs() < 1e-15);
        assert!(matches!(
            postselect_control(&joint, &shape, 1, ControlSign::Minus, 0.0),
            Err(Error::DarkPort { .. })
        ));
    }

    #[test]
    fn two_bath_joint_state_matches_full_tensor_oracle() {
        let (t1, t2, phi) = (0.5, 1.0, FRAC_PI_2);
        let cfg = MzConfig::new(
            BathMode::TwoBath,
            1,
            EstimationTarget::ProbePlusControl,
            phi,
            1.0,
        )
        .unwrap();
        let got = mz_output_state(&cfg, t1, t2).unwrap();

        // Oracle register: (C, P, B1a, B1b, B2a, B2b).
        let (u1, u2) = two_bath_arm_unitaries(1.0);
        let controlled = &kron(
            &ComplexMatrix::unit(2, 0, 0),
            &u1.scale(Complex64::from_polar(1.0, phi)),
        ) + &kron(&ComplexMatrix::unit(2, 1, 1), &u2);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = [Complex64::new(h, 0.0), Complex64::new(h, 0.0)];
        let zero = [Complex64::new(1.0, 0.0), ZERO];
        let psi0 = kron_vec(&kron_vec(&kron_vec(&plus, &zero), &theta(t1)), &theta(t2));
        let psi = controlled.matvec(&psi0).unwrap();
        let shape = SubsystemShape::qubits(6);
        let reduced = partial_trace(&ComplexMatrix::outer(&psi, &psi), &shape, &[0, 1]).unwrap();
        let oracle = permute_factors(&reduced, &SubsystemShape::qubits(2), &[1, 0]).unwrap();
        assert!(got.matrix().max_abs_diff(&oracle) < 1e-14);
    }

    #[test]
    fn postselected_two_bath_matches_four_term_expansion() {
        for &(t1, t2, phi, eta) in &[(0.3, 0.8, FRAC_PI_2, 1.0), (0.9, 0.2, 1.1, 0.6)] {
            let cfg = MzConfig::new(
                BathMode::TwoBath,
                1,
                EstimationTarget::PostselectedPlus,
                phi,
                eta,
            )
            .unwrap();
            let got = mz_output_state(&cfg, t1, t2).unwrap();

            let (u1, u2) = two_bath_arm_unitaries(eta);
            let zero = [Complex64::new(1.0, 0.0), ZERO];
            let start = kron_vec(&kron_vec(&zero, &theta(t1)), &theta(t2));
            let a = u1.matvec(&start).unwrap();
            let b = u2.matvec(&start).unwrap();
            let e = Complex64::from_polar(1.0, phi);
            let mut sum = ComplexMatrix::outer(&a, &a);
            sum.add_scaled(&ComplexMatrix::outer(&b, &b), Complex64::new(1.0, 0.0))
                .unwrap();
            sum.add_scaled(&ComplexMatrix::outer(&a, &b), e).unwrap();
            sum.add_scaled(&ComplexMatrix::outer(&b, &a), e.conj())
                .unwrap();
            let reduced = partial_trace(&sum, &SubsystemShape::qubits(5), &[0]).unwrap();
            let oracle = reduced.scale_real(1.0 / reduced.trace().re);
            assert!(got.matrix().max_abs_diff(&oracle) < 1e-13);
        }
    }

    #[test]
    fn control_plus_is_always_bright() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = ComplexMatrix::from_fn(2, 2, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let probe = (&a * &a.adjoint()).scale_real(1.0);
        let probe = probe.scale_real(1.0 / probe.trace().re);
        let joint = kron(&probe, &PureState::plus().projector());
        let shape = SubsystemShape::qubits(2);
        let (state, p_plus) =
            postselect_control(&joint, &shape, 1, ControlSign::Plus, 0.0).unwrap();
        assert!((p_plus - 1.0).abs() < 1e-14);
        assert!(state.matrix().max_abs_diff(&probe) < 1e-14);
        assert!(
            branch_probability(&joint, &shape, 1, ControlSign::Minus, 0.0)
                .unwrap()
                .abs()
                < 1e-15
        );
    }

    #[test]
    fn outcome_probabilities_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let shape = SubsystemShape::new(vec![2, 2, 3]).unwrap();
        for control_index in 0..2 {
            let a = ComplexMatrix::from_fn(12, 12, |_, _| {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let rho = &a * &a.adjoint();
            let rho = rho.scale_real(1.0 / rho.trace().re);
            let phi = rng.gen_range(0.0..PI);
            let plus =
                branch_probability(&rho, &shape, control_index, ControlSign::Plus, phi).unwrap();
            let minus =
                branch_probability(&rho, &shape, control_index, ControlSign::Minus, phi).unwrap();
            assert!((plus + minus - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn outputs_are_valid_states_across_grid() {
        let grid: Vec<f64> = (0..5).map(|i| 0.1 + 0.225 * i as f64).collect();
        let configs = [
            (BathMode::OneBath, 1, EstimationTarget::PostselectedPlus),
            (BathMode::OneBath, 1, EstimationTarget::ProbePlusControl),
            (BathMode::OneBath, 2, EstimationTarget::PostselectedPlus),
            (BathMode::TwoBath, 1, EstimationTarget::PostselectedPlus),
            (BathMode::TwoBath, 1, EstimationTarget::ProbePlusControl),
            (BathMode::TwoBath, 2, EstimationTarget::PostselectedPlus),
        ];
        for (mode, qubits, target) in configs {
            for phi in [0.0, FRAC_PI_4, FRAC_PI_2, PI] {
                let cfg = MzConfig::new(mode, qubits, target, phi, 1.0).unwrap();
                for &t1 in &grid {
                    for &t2 in &grid {
                        match mz_output_state(&cfg, t1, t2) {
                            Ok(_) => {}
                            // φ = π with identical branches is a legitimate dark port.
                            Err(Error::DarkPort { .. }) if phi == PI && t1 == t2 => {}
                            Err(e) => {
                                panic!("{mode:?}/{qubits}/{target:?} φ={phi} ({t1},{t2}): {e}")
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn joint_state_phase_is_a_control_rotation() {
        let mk = |phi| {
            MzConfig::new(
                BathMode::OneBath,
                1,
                EstimationTarget::ProbePlusControl,
                phi,
                1.0,
            )
            .unwrap()
        };
        let a = mz_output_state(&mk(0.0), 0.3, 0.7).unwrap();
        let b = mz_output_state(&mk(1.3), 0.3, 0.7).unwrap();
        let rotated = apply_control_phase(a.matrix(), &mk(0.0).joint_shape(), 1, 1.3).unwrap();
        assert!(rotated.max_abs_diff(b.matrix()) < 1e-15);
    }

    #[test]
    fn swapping_temperatures_flips_the_control() {
        let cfg = MzConfig::new(
            BathMode::TwoBath,
            1,
            EstimationTarget::ProbePlusControl,
            0.0,
            1.0,
        )
        .unwrap();
        let a = mz_output_state(&cfg, 0.3, 0.9).unwrap();
        let b = mz_output_state(&cfg, 0.9, 0.3).unwrap();
        let flip = kron(
            &ComplexMatrix::identity(2),
            &ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap(),
        );
        assert!(flip.conjugate(b.matrix()).unwrap().max_abs_diff(a.matrix()) < 1e-14);
    }

    #[test]
    fn invalid_configurations() {
        assert!(matches!(
            MzConfig::new(
                BathMode::OneBath,
                2,
                EstimationTarget::ProbePlusControl,
                0.0,
                1.0
            ),
            Err(Error::Configuration(_))
        ));
        assert!(MzConfig::new(
            BathMode::OneBath,
            3,
            EstimationTarget::PostselectedPlus,
            0.0,
            1.0
        )
        .is_err());
        let cfg = MzConfig::new(
            BathMode::OneBath,
            1,
            EstimationTarget::PostselectedPlus,
            0.0,
            1.0,
        )
        .unwrap();
        assert!(matches!(
            mz_output_state(&cfg, -0.1, 0.5),
            Err(Error::Validation(_))
        ));
        assert!(cfg.with_initial_internal(PureState::basis(4, 0)).is_err());
    }
}
