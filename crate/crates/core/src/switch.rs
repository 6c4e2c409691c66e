//! The quantum switch: two channels applied in an order coherently
//! controlled by a qubit.
//!
//! Two independent routes are provided. [`switch_kraus_output`] composes
//! Kraus operators directly; [`compose_process`] contracts the switch process
//! vector with the channels' Choi matrices.
//!
//! Process factors are ordered `P₁ P₂ A₁ᴵ A₁ᴼ A₂ᴵ A₂ᴼ F₁ F₂`. `P₁`/`F₁` carry
//! the control qubit and `P₂`/`F₂` the target, matching the branch selector
//! `|0⟩^{P₁}` of the process vector. The Kraus-route outputs are ordered
//! target ⊗ control.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tensor::{
    kron, partial_trace, partial_transpose, permute_factors, ComplexMatrix, DensityMatrix,
    PureState, SubsystemShape, ONE,
};
use crate::thermal::{
    apply_choi, choi, gadc_kraus, qudit_thermal_kraus, uniform_gamma, BetaConvention, KrausChannel,
    ThermalBathSpec,
};

pub const FACTOR_LABELS: [&str; 8] = ["P1", "P2", "A1I", "A1O", "A2I", "A2O", "F1", "F2"];

/// Rank-one process `𝕎 = |w⟩⟨w|` of the switch, stored as the sparse vector `|w⟩`.
#[derive(Debug, Clone)]
pub struct ProcessMatrix {
    target_dim: usize,
    shape: SubsystemShape,
    /// Nonzero entries of `|w⟩` as (composite index, amplitude), ascending.
    terms: Vec<(usize, Complex64)>,
}

impl ProcessMatrix {
    pub fn target_dim(&self) -> usize {
        self.target_dim
    }

    pub fn shape(&self) -> &SubsystemShape {
        &self.shape
    }

    pub fn terms(&self) -> &[(usize, Complex64)] {
        &self.terms
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.iter().map(|(_, a)| a.norm_sqr()).sum()
    }

    /// Dense `|w⟩`.
    pub fn ket(&self) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); self.shape.total()];
        for &(i, a) in &self.terms {
            v[i] += a;
        }
        v
    }

    /// Dense `𝕎`. Its side is `4·d⁶`, so this is only practical for qubit targets.
    pub fn matrix(&self) -> ComplexMatrix {
        let ket = self.ket();
        ComplexMatrix::outer(&ket, &ket)
    }
}

/// Process vector of the switch with a qubit control and a `target_dim` target.
pub fn switch_process_matrix(target_dim: usize) -> Result<ProcessMatrix> {
    if target_dim < 2 {
        return Err(Error::Configuration(format!(
            "target dimension must be at least 2, got {target_dim}"
        )));
    }
    let d = target_dim;
    let shape = SubsystemShape::new(vec![2, d, d, d, d, d, 2, d])?;
    let mut terms = Vec::with_capacity(2 * d * d * d);
    // Branch 0: P₂ → A₁ → A₂ → F₂. Branch 1: P₂ → A₂ → A₁ → F₂.
    for j in 0..d {
        for k in 0..d {
            for l in 0..d {
                terms.push((shape.compose(&[0, j, j, k, k, l, 0, l]), ONE));
                terms.push((shape.compose(&[1, j, k, l, j, k, 1, l]), ONE));
            }
        }
    }
    terms.sort_by_key(|&(i, _)| i);
    Ok(ProcessMatrix {
        target_dim,
        shape,
        terms,
    })
}

fn check_chois(w: &ProcessMatrix, chois: &[ComplexMatrix; 2]) -> Result<()> {
    let side = w.target_dim * w.target_dim;
    for (slot, j) in chois.iter().enumerate() {
        if !j.is_square() || j.rows() != side {
            return Err(Error::Dimension(format!(
                "Choi matrix for slot A{} is {}x{}, expected {side}x{side}",
                slot + 1,
                j.rows(),
                j.cols()
            )));
        }
    }
    Ok(())
}

/// Choi matrix (input first, factors `P₁ P₂ F₁ F₂`) of the channel obtained by
/// plugging `chois[0]` into slot `A₁` and `chois[1]` into slot `A₂`:
/// `J = Tr_A[𝕎^{T_A} (J₁ ⊗ J₂ ⊗ I_{PF})]`.
///
/// Contracts term by term over the sparse `|w⟩` instead of forming `𝕎`.
pub fn compose_process(w: &ProcessMatrix, chois: &[ComplexMatrix; 2]) -> Result<ComplexMatrix> {
    check_chois(w, chois)?;
    let d = w.target_dim;
    let side = 2 * d;
    let dim_pf = side * side;

    struct Term {
        pf: (usize, usize),
        a: (usize, usize),
        amp: Complex64,
    }
    let terms: Vec<Term> = w
        .terms
        .iter()
        .map(|&(i, amp)| {
            let g = w.shape.digits(i);
            Term {
                pf: (g[0] * d + g[1], g[6] * d + g[7]),
                a: (g[2] * d + g[3], g[4] * d + g[5]),
                amp,
            }
        })
        .collect();

    let mut out = ComplexMatrix::zeros(dim_pf, dim_pf);
    for e1 in &terms {
        let row = e1.pf.0 * side + e1.pf.1;
        for e2 in &terms {
            // (J₁ ⊗ J₂)[a(e1), a(e2)]
            let j = chois[0][(e1.a.0, e2.a.0)] * chois[1][(e1.a.1, e2.a.1)];
            if j.norm_sqr() == 0.0 {
                continue;
            }
            let col = e2.pf.0 * side + e2.pf.1;
            out[(row, col)] += e1.amp * e2.amp.conj() * j;
        }
    }
    Ok(out)
}

/// Same contraction as [`compose_process`] with `𝕎` materialized, partially
/// transposed and traced densely.
pub fn compose_process_dense(
    w: &ProcessMatrix,
    chois: &[ComplexMatrix; 2],
) -> Result<ComplexMatrix> {
    check_chois(w, chois)?;
    let d = w.target_dim;
    let wt = partial_transpose(&w.matrix(), &w.shape, &[2, 3, 4, 5])?;
    let plugged = kron(
        &kron(&ComplexMatrix::identity(2 * d), &kron(&chois[0], &chois[1])),
        &ComplexMatrix::identity(2 * d),
    );
    partial_trace(&wt.matmul(&plugged)?, &w.shape, &[0, 1, 6, 7])
}

/// Switch acting on two channels with a fixed control state.
#[derive(Debug, Clone)]
pub struct SwitchConfig {
    pub control_state: PureState,
    /// Applied last when the control is `|0⟩`.
    pub channel_a: KrausChannel,
    /// Applied last when the control is `|1⟩`.
    pub channel_b: KrausChannel,
}

impl SwitchConfig {
    pub fn new(
        control_state: PureState,
        channel_a: KrausChannel,
        channel_b: KrausChannel,
    ) -> Result<Self> {
        let cfg = Self {
            control_state,
            channel_a,
            channel_b,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn target_dim(&self) -> usize {
        self.channel_a.in_dim()
    }

    fn validate(&self) -> Result<()> {
        let d = self.channel_a.in_dim();
        for ch in [&self.channel_a, &self.channel_b] {
            if ch.in_dim() != d || ch.out_dim() != d {
                return Err(Error::Dimension(format!(
                    "switch channels must both act on dimension {d}, got {} → {}",
                    ch.in_dim(),
                    ch.out_dim()
                )));
            }
        }
        if self.control_state.dim() != 2 {
            return Err(Error::Dimension(format!(
                "control must be a qubit, got dimension {}",
                self.control_state.dim()
            )));
        }
        Ok(())
    }
}

fn check_input(cfg: &SwitchConfig, rho_in: &DensityMatrix) -> Result<()> {
    cfg.validate()?;
    if rho_in.dim() != cfg.target_dim() {
        return Err(Error::Dimension(format!(
            "target state has dimension {}, channels act on {}",
            rho_in.dim(),
            cfg.target_dim()
        )));
    }
    Ok(())
}

/// `Σ_ij H_ij (ρ_in ⊗ ρ_C) H_ij†` with
/// `H_ij = F_i K_j ⊗ |0⟩⟨0| + K_j F_i ⊗ |1⟩⟨1|`, `F` from `channel_a` and `K`
/// from `channel_b`. Output is ordered target ⊗ control.
pub fn switch_kraus_output(cfg: &SwitchConfig, rho_in: &DensityMatrix) -> Result<DensityMatrix> {
    check_input(cfg, rho_in)?;
    let d = cfg.target_dim();
    let input = kron(rho_in.matrix(), &cfg.control_state.projector());
    let p0 = ComplexMatrix::unit(2, 0, 0);
    let p1 = ComplexMatrix::unit(2, 1, 1);
    let mut out = ComplexMatrix::zeros(2 * d, 2 * d);
    for f in cfg.channel_a.ops() {
        for k in cfg.channel_b.ops() {
            let h = &kron(&(f * k), &p0) + &kron(&(k * f), &p1);
            out.add_scaled(&h.conjugate(&input)?, ONE)?;
        }
    }
    DensityMatrix::new(out.hermitian_part())
}

/// Choi matrix of the switch channel for `cfg`'s two channels, via process
/// contraction. Slot `A₁` (entered first in the control-`|0⟩` branch) holds
/// `channel_b`, so both routes agree on which channel acts last.
pub fn switch_choi(cfg: &SwitchConfig) -> Result<ComplexMatrix> {
    cfg.validate()?;
    let w = switch_process_matrix(cfg.target_dim())?;
    compose_process(&w, &[choi(&cfg.channel_b), choi(&cfg.channel_a)])
}

/// Process-route counterpart of [`switch_kraus_output`], same output ordering.
pub fn switch_process_output(cfg: &SwitchConfig, rho_in: &DensityMatrix) -> Result<DensityMatrix> {
    check_input(cfg, rho_in)?;
    let d = cfg.target_dim();
    let j = switch_choi(cfg)?;
    // Process input is control ⊗ target.
    let input = kron(&cfg.control_state.projector(), rho_in.matrix());
    let out = apply_choi(&j, 2 * d, 2 * d, &input)?;
    let shape = SubsystemShape::new(vec![2, d])?;
    let out = permute_factors(&out, &shape, &[1, 0])?;
    DensityMatrix::new(out.hermitian_part())
}

/// Thermalizing switch: channels at two temperatures on a `target_dim` probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchSetup {
    pub target_dim: usize,
    pub eta: f64,
    pub convention: BetaConvention,
}

impl SwitchSetup {
    /// Full-strength thermalization, natural convention.
    pub fn new(target_dim: usize) -> Result<Self> {
        let setup = Self {
            target_dim,
            eta: 1.0,
            convention: BetaConvention::Natural,
        };
        setup.validate()?;
        Ok(setup)
    }

    fn validate(&self) -> Result<()> {
        if !(2..=4).contains(&self.target_dim) {
            return Err(Error::Configuration(format!(
                "switch target dimension must be 2, 3 or 4, got {}",
                self.target_dim
            )));
        }
        Ok(())
    }

    /// GADC for qubits, otherwise the qudit channel with `γ ≡ η` off the
    /// diagonal and energies `E_i = i`.
    pub fn channel(&self, temperature: f64) -> Result<KrausChannel> {
        self.validate()?;
        let spec = ThermalBathSpec::qudit(self.target_dim, temperature, self.eta, self.convention)?;
        if self.target_dim == 2 {
            gadc_kraus(&spec)
        } else {
            qudit_thermal_kraus(&spec, &uniform_gamma(self.target_dim, self.eta))
        }
    }

    pub fn config(&self, t1: f64, t2: f64) -> Result<SwitchConfig> {
        SwitchConfig::new(PureState::plus(), self.channel(t1)?, self.channel(t2)?)
    }
}

/// Joint target ⊗ control output for target `|0⟩⟨0|` and control `|+⟩`,
/// with the `t1` channel applied last in the control-`|0⟩` branch.
pub fn switch_output_state(setup: &SwitchSetup, t1: f64, t2: f64) -> Result<DensityMatrix> {
    let cfg = setup.config(t1, t2)?;
    switch_kraus_output(&cfg, &PureState::basis(setup.target_dim, 0).density())
}
