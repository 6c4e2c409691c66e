//! Thermalization maps: Gibbs weights, the qubit generalized amplitude
//! damping channel (GADC), its qudit generalization, the purified two-qubit
//! bath and the probe–bath dilation unitary.
//!
//! Temperatures are in natural units with `k_B = 1`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{kron, ComplexMatrix, DensityMatrix, PureState, ONE, ZERO};

/// Completeness tolerance `‖Σ K†K − I‖_max` for constructed channels.
pub const COMPLETENESS_TOL: f64 = 1e-10;

/// How a temperature maps to Boltzmann weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BetaConvention {
    /// `p_i ∝ e^{−E_i/T}`.
    #[default]
    Natural,
    /// `p_i ∝ 2^{−E_i/T}`, i.e. `β = log₂(p₀/p₁)` for a unit gap.
    Log2,
}

impl BetaConvention {
    pub fn as_str(self) -> &'static str {
        match self {
            BetaConvention::Natural => "natural",
            BetaConvention::Log2 => "log2",
        }
    }
}

impl std::str::FromStr for BetaConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "natural" => Ok(Self::Natural),
            "log2" => Ok(Self::Log2),
            other => Err(Error::Configuration(format!(
                "unknown beta convention `{other}`"
            ))),
        }
    }
}

/// One bath: temperature, level energies and interaction strength.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalBathSpec {
    temperature: f64,
    energies: Vec<f64>,
    eta: f64,
    convention: BetaConvention,
}

impl ThermalBathSpec {
    pub fn new(
        temperature: f64,
        energies: Vec<f64>,
        eta: f64,
        convention: BetaConvention,
    ) -> Result<Self> {
        if !temperature.is_finite() || temperature <= 0.0 {
            return Err(Error::Validation(format!(
                "temperature must be positive, got {temperature}"
            )));
        }
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::Validation(format!(
                "eta must lie in [0, 1], got {eta}"
            )));
        }
        if energies.len() < 2 || energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::Validation(format!(
                "need at least two finite energies, got {energies:?}"
            )));
        }
        Ok(Self {
            temperature,
            energies,
            eta,
            convention,
        })
    }

    /// Qubit bath with the unit gap `E = (0, 1)`.
    pub fn qubit(temperature: f64, eta: f64, convention: BetaConvention) -> Result<Self> {
        Self::new(temperature, vec![0.0, 1.0], eta, convention)
    }

    /// Qudit bath with equally spaced levels `E_i = i`.
    pub fn qudit(
        dim: usize,
        temperature: f64,
        eta: f64,
        convention: BetaConvention,
    ) -> Result<Self> {
        Self::new(
            temperature,
            (0..dim).map(|i| i as f64).collect(),
            eta,
            convention,
        )
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn convention(&self) -> BetaConvention {
        self.convention
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }
}

/// Boltzmann populations of the bath levels.
pub fn gibbs_probabilities(spec: &ThermalBathSpec) -> Vec<f64> {
    let beta = 1.0 / spec.temperature;
    let base = match spec.convention {
        BetaConvention::Natural => std::f64::consts::E,
        BetaConvention::Log2 => 2.0,
    };
    // Shift by the ground energy so low temperatures do not underflow.
    let e_min = spec.energies.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = spec
        .energies
        .iter()
        .map(|e| base.powf(-beta * (e - e_min)))
        .collect();
    let z: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / z).collect()
}

/// Ordered list of Kraus operators of a CPTP map.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    in_dim: usize,
    out_dim: usize,
    ops: Vec<ComplexMatrix>,
}

impl KrausChannel {
    /// Validates shapes and completeness `Σ K†K = I` within [`COMPLETENESS_TOL`].
    pub fn new(ops: Vec<ComplexMatrix>) -> Result<Self> {
        let channel = Self::from_ops_unchecked(ops)?;
        let defect = channel.completeness_defect();
        if defect > COMPLETENESS_TOL {
            return Err(Error::ChannelConstruction { defect });
        }
        Ok(channel)
    }

    /// Shape checks only; completeness is left to the caller.
    pub fn from_ops_unchecked(ops: Vec<ComplexMatrix>) -> Result<Self> {
        let first = ops.first().ok_or_else(|| {
            Error::Configuration("channel needs at least one Kraus operator".into())
        })?;
        let (out_dim, in_dim) = (first.rows(), first.cols());
        if let Some(bad) = ops
            .iter()
            .find(|k| k.rows() != out_dim || k.cols() != in_dim)
        {
            return Err(Error::Dimension(format!(
                "Kraus operator {}x{} differs from {out_dim}x{in_dim}",
                bad.rows(),
                bad.cols()
            )));
        }
        Ok(Self {
            in_dim,
            out_dim,
            ops,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            in_dim: dim,
            out_dim: dim,
            ops: vec![ComplexMatrix::identity(dim)],
        }
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    /// `‖Σ_k K_k† K_k − I‖_max`.
    pub fn completeness_defect(&self) -> f64 {
        let mut sum = ComplexMatrix::zeros(self.in_dim, self.in_dim);
        for k in &self.ops {
            sum.add_scaled(&(&k.adjoint() * k), ONE)
                .expect("shapes checked at construction");
        }
        sum.max_abs_diff(&ComplexMatrix::identity(self.in_dim))
    }

    /// Sequential composition: `self` after `first`.
    pub fn after(&self, first: &KrausChannel) -> Result<KrausChannel> {
        if first.out_dim != self.in_dim {
            return Err(Error::Dimension(format!(
                "cannot feed a {}-dim output into a {}-dim input",
                first.out_dim, self.in_dim
            )));
        }
        let ops = self
            .ops
            .iter()
            .flat_map(|a| first.ops.iter().map(move |b| a * b))
            .collect();
        Ok(Self {
            in_dim: first.in_dim,
            out_dim: self.out_dim,
            ops,
        })
    }

    /// Raw Kraus sum on an arbitrary matrix.
    pub fn apply_matrix(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        if m.rows() != self.in_dim || m.cols() != self.in_dim {
            return Err(Error::Dimension(format!(
                "channel expects {0}x{0} input, got {1}x{2}",
                self.in_dim,
                m.rows(),
                m.cols()
            )));
        }
        let mut out = ComplexMatrix::zeros(self.out_dim, self.out_dim);
        for k in &self.ops {
            out.add_scaled(&k.conjugate(m)?, ONE)?;
        }
        Ok(out)
    }
}

/// Kraus operators `R₁..R₄` of the qubit GADC with ground population
/// `p = gibbs_probabilities(spec)[0]` and strength `η`.
pub fn gadc_kraus(spec: &ThermalBathSpec) -> Result<KrausChannel> {
    if spec.dim() != 2 {
        return Err(Error::Configuration(format!(
            "GADC needs exactly two energy levels, got {}",
            spec.dim()
        )));
    }
    let p = gibbs_probabilities(spec)[0];
    let eta = spec.eta;
    let damp = (1.0 - eta).sqrt();
    let r = |data: [f64; 4]| ComplexMatrix::from_real(2, 2, &data).expect("2x2");
    KrausChannel::new(vec![
        r([1.0, 0.0, 0.0, damp]).scale_real(p.sqrt()),
        r([damp, 0.0, 0.0, 1.0]).scale_real((1.0 - p).sqrt()),
        r([0.0, 1.0, 0.0, 0.0]).scale_real((p * eta).sqrt()),
        r([0.0, 0.0, 1.0, 0.0]).scale_real(((1.0 - p) * eta).sqrt()),
    ])
}

/// Qudit thermalization channel with symmetric transition probabilities
/// `gamma[i][j]` between levels `j → i`.
///
/// Operators: `K_i = √p_i (|i⟩⟨i| + Σ_{j≠i} √(1−γ_ji) |j⟩⟨j|)` for each level
/// and `K_ij = √(p_i γ_ij) |i⟩⟨j|` for each ordered pair `j ≠ i`.
#[allow(clippy::needless_range_loop)] // reads gamma[i][j] and gamma[j][i] together
pub fn qudit_thermal_kraus(spec: &ThermalBathSpec, gamma: &[Vec<f64>]) -> Result<KrausChannel> {
    let n = spec.dim();
    if gamma.len() != n || gamma.iter().any(|row| row.len() != n) {
        return Err(Error::Dimension(format!("gamma must be {n}x{n}")));
    }
    for i in 0..n {
        if gamma[i][i] != 0.0 {
            return Err(Error::Validation(format!("gamma[{i}][{i}] must be zero")));
        }
        for j in 0..n {
            let g = gamma[i][j];
            if !(0.0..=1.0).contains(&g) {
                return Err(Error::Validation(format!(
                    "gamma[{i}][{j}] = {g} outside [0, 1]"
                )));
            }
            if (g - gamma[j][i]).abs() > 1e-12 {
                return Err(Error::Validation(format!(
                    "gamma is not symmetric: gamma[{i}][{j}] = {g}, gamma[{j}][{i}] = {}",
                    gamma[j][i]
                )));
            }
        }
    }
    let p = gibbs_probabilities(spec);
    let mut ops = Vec::with_capacity(n * n);
    for i in 0..n {
        let diag: Vec<f64> = (0..n)
            .map(|j| {
                if j == i {
                    1.0
                } else {
                    (1.0 - gamma[j][i]).sqrt()
                }
            })
            .collect();
        ops.push(ComplexMatrix::real_diagonal(&diag).scale_real(p[i].sqrt()));
    }
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            let mut k = ComplexMatrix::zeros(n, n);
            k[(i, j)] = Complex64::new((p[i] * gamma[i][j]).sqrt(), 0.0);
            ops.push(k);
        }
    }
    KrausChannel::new(ops)
}

/// Uniform transition matrix: `eta` off the diagonal, zero on it.
pub fn uniform_gamma(dim: usize, eta: f64) -> Vec<Vec<f64>> {
    (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { 0.0 } else { eta }).collect())
        .collect()
}

/// Two-qubit purification `Σ_i √p_i |i,i⟩` of the qubit Gibbs state.
pub fn purified_bath_state(spec: &ThermalBathSpec) -> Result<PureState> {
    if spec.dim() != 2 {
        return Err(Error::Configuration(format!(
            "purified bath is defined for two levels, got {}",
            spec.dim()
        )));
    }
    let p = gibbs_probabilities(spec);
    let mut amps = vec![ZERO; 4];
    amps[0] = Complex64::new(p[0].sqrt(), 0.0);
    amps[3] = Complex64::new(p[1].sqrt(), 0.0);
    PureState::normalized(amps)
}

/// Probe–bath-qubit interaction unitary `U^η_PB` on `probe ⊗ bath`.
pub fn dilation_unitary(eta: f64) -> Result<ComplexMatrix> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Validation(format!(
            "eta must lie in [0, 1], got {eta}"
        )));
    }
    let (s, c) = (eta.sqrt(), (1.0 - eta).sqrt());
    ComplexMatrix::from_real(
        4,
        4,
        &[
            1.0, 0.0, 0.0, 0.0, //
            0.0, c, s, 0.0, //
            0.0, -s, c, 0.0, //
            0.0, 0.0, 0.0, 1.0,
        ],
    )
}

/// `U^η_PB ⊗ I₂`, acting on the probe and both qubits of a purified bath.
pub fn dilation_unitary_full(eta: f64) -> Result<ComplexMatrix> {
    Ok(kron(&dilation_unitary(eta)?, &ComplexMatrix::identity(2)))
}

/// `Σ_k K_k ρ K_k†`.
pub fn apply_channel(channel: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let out = channel.apply_matrix(rho.matrix())?;
    DensityMatrix::new(out.hermitian_part())
}

/// Choi matrix `J = Σ_{mn} |m⟩⟨n| ⊗ E(|m⟩⟨n|)`, input factor first.
pub fn choi(channel: &KrausChannel) -> ComplexMatrix {
    let (din, dout) = (channel.in_dim, channel.out_dim);
    let mut j = ComplexMatrix::zeros(din * dout, din * dout);
    for m in 0..din {
        for n in 0..din {
            let image = channel
                .apply_matrix(&ComplexMatrix::unit(din, m, n))
                .expect("unit matrix matches channel input");
            for r in 0..dout {
                for c in 0..dout {
                    j[(m * dout + r, n * dout + c)] = image[(r, c)];
                }
            }
        }
    }
    j
}

/// Applies the channel with Choi matrix `j` (input factor first):
/// `E(ρ) = Tr_in[J (ρ^T ⊗ I)]`.
pub fn apply_choi(
    j: &ComplexMatrix,
    in_dim: usize,
    out_dim: usize,
    rho: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    if j.rows() != in_dim * out_dim || !j.is_square() {
        return Err(Error::Dimension(format!(
            "Choi matrix {}x{} does not match {in_dim} → {out_dim}",
            j.rows(),
            j.cols()
        )));
    }
    if rho.rows() != in_dim || rho.cols() != in_dim {
        return Err(Error::Dimension(format!("input must be {in_dim}x{in_dim}")));
    }
    // E(ρ)_{rc} = Σ_{mn} ρ_{mn} J[(m,r),(n,c)]
    Ok(ComplexMatrix::from_fn(out_dim, out_dim, |r, c| {
        let mut acc = ZERO;
        for m in 0..in_dim {
            for n in 0..in_dim {
                acc += rho[(m, n)] * j[(m * out_dim + r, n * out_dim + c)];
            }
        }
        acc
    }))
}
