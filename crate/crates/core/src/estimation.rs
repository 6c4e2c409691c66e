//! Two-parameter quantum estimation: finite-difference state derivatives,
//! symmetric logarithmic derivatives, the quantum Fisher information matrix
//! and the Cramér-Rao bounds it implies.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{herm_eig, ComplexMatrix, DensityMatrix, ZERO};

/// Numerical settings for derivatives, support detection and singularity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DerivativeConfig {
    /// Relative finite-difference step; the absolute step is `step · max(1, T)`.
    pub step: f64,
    /// Eigenvalue pairs with `σ_a + σ_b` at or below this are off-support.
    pub support_tol: f64,
    /// Relative determinant cutoff below which the QFIM counts as singular.
    pub singular_tol: f64,
}

impl Default for DerivativeConfig {
    fn default() -> Self {
        Self {
            step: 1e-5,
            support_tol: 1e-10,
            singular_tol: 1e-10,
        }
    }
}

impl DerivativeConfig {
    pub fn with_step(step: f64) -> Self {
        Self {
            step,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("step", self.step),
            ("support_tol", self.support_tol),
            ("singular_tol", self.singular_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Configuration(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Absolute step used around temperature `t`.
    pub fn step_at(&self, t: f64) -> f64 {
        self.step * t.abs().max(1.0)
    }
}

/// State at a point together with its two parameter derivatives.
#[derive(Debug, Clone)]
pub struct StateDerivatives {
    pub rho: DensityMatrix,
    pub d_rho_1: ComplexMatrix,
    pub d_rho_2: ComplexMatrix,
}

/// Evaluates `setup` at `(t1, t2)` and by central differences along each axis.
pub fn state_and_derivatives<F>(
    setup: F,
    t1: f64,
    t2: f64,
    cfg: &DerivativeConfig,
) -> Result<StateDerivatives>
where
    F: Fn(f64, f64) -> Result<DensityMatrix>,
{
    cfg.validate()?;
    let rho = setup(t1, t2)?;
    let (h1, h2) = (cfg.step_at(t1), cfg.step_at(t2));
    let central = |plus: DensityMatrix, minus: DensityMatrix, h: f64| -> Result<ComplexMatrix> {
        Ok(plus
            .matrix()
            .try_sub(minus.matrix())?
            .scale_real(0.5 / h)
            .hermitian_part())
    };
    let d_rho_1 = central(setup(t1 + h1, t2)?, setup(t1 - h1, t2)?, h1)?;
    let d_rho_2 = central(setup(t1, t2 + h2)?, setup(t1, t2 - h2)?, h2)?;
    Ok(StateDerivatives {
        rho,
        d_rho_1,
        d_rho_2,
    })
}

/// Symmetric logarithmic derivative `L` solving `∂ρ = (Lρ + ρL)/2` on the
/// support of `rho`.
pub fn sld_operators(
    rho: &DensityMatrix,
    d_rho: &ComplexMatrix,
    cfg: &DerivativeConfig,
) -> Result<ComplexMatrix> {
    if d_rho.rows() != rho.dim() || d_rho.cols() != rho.dim() {
        return Err(Error::Dimension(format!(
            "derivative is {}x{}, state is {}x{}",
            d_rho.rows(),
            d_rho.cols(),
            rho.dim(),
            rho.dim()
        )));
    }
    let eig = herm_eig(rho.matrix())?;
    sld_in_eigenbasis(&eig.values, &eig.vectors, d_rho, cfg.support_tol)
}

fn sld_in_eigenbasis(
    values: &[f64],
    vectors: &ComplexMatrix,
    d_rho: &ComplexMatrix,
    support_tol: f64,
) -> Result<ComplexMatrix> {
    let n = values.len();
    let d_eig = vectors.adjoint().matmul(&d_rho.matmul(vectors)?)?;
    let l_eig = ComplexMatrix::from_fn(n, n, |a, b| {
        let s = values[a] + values[b];
        if s > support_tol {
            d_eig[(a, b)].scale(2.0 / s)
        } else {
            ZERO
        }
    });
    Ok(vectors.conjugate(&l_eig)?.hermitian_part())
}

/// QFIM at one point with the SLDs it was built from.
#[derive(Debug, Clone)]
pub struct QfimResult {
    pub qfim: [[f64; 2]; 2],
    pub determinant: f64,
    pub sld_1: ComplexMatrix,
    pub sld_2: ComplexMatrix,
    /// `|Tr(ρ[L₁, L₂])|`; zero when both bounds can be saturated jointly.
    pub attainability_residual: f64,
    pub singular: bool,
}

impl QfimResult {
    /// `max(1, ‖Q‖²_max)`, the scale the singularity cutoff is relative to.
    pub fn scale(&self) -> f64 {
        let m = self
            .qfim
            .iter()
            .flatten()
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        (m * m).max(1.0)
    }
}

fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> num_complex::Complex64 {
    // Tr(AB) without forming AB.
    let n = a.rows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// `Q_nm = ½ Tr(ρ{L_n, L_m})` plus determinant, attainability residual and
/// the singularity flag.
pub fn qfim(
    rho: &DensityMatrix,
    sld_1: ComplexMatrix,
    sld_2: ComplexMatrix,
    cfg: &DerivativeConfig,
) -> Result<QfimResult> {
    let n = rho.dim();
    for l in [&sld_1, &sld_2] {
        if l.rows() != n || l.cols() != n {
            return Err(Error::Dimension(format!(
                "SLD is {}x{}, state is {n}x{n}",
                l.rows(),
                l.cols()
            )));
        }
    }
    let r = rho.matrix();
    let rl1 = r.matmul(&sld_1)?;
    let rl2 = r.matmul(&sld_2)?;
    // Tr(ρ L_n L_m) = Tr((ρ L_n) L_m); the real part is the symmetrized value.
    let q11 = trace_product(&rl1, &sld_1).re;
    let q22 = trace_product(&rl2, &sld_2).re;
    let t12 = trace_product(&rl1, &sld_2);
    let t21 = trace_product(&rl2, &sld_1);
    let q12 = 0.5 * (t12.re + t21.re);
    let qfim = [[q11, q12], [q12, q22]];
    let determinant = q11 * q22 - q12 * q12;
    let mut result = QfimResult {
        qfim,
        determinant,
        sld_1,
        sld_2,
        attainability_residual: (t12 - t21).norm(),
        singular: false,
    };
    // A NaN determinant also counts as singular.
    result.singular = determinant.is_nan() || determinant.abs() < cfg.singular_tol * result.scale();
    Ok(result)
}

/// Full pipeline at one point: derivatives, SLDs and QFIM.
pub fn qfim_at<F>(setup: F, t1: f64, t2: f64, cfg: &DerivativeConfig) -> Result<QfimResult>
where
    F: Fn(f64, f64) -> Result<DensityMatrix>,
{
    let sd = state_and_derivatives(setup, t1, t2, cfg)?;
    let eig = herm_eig(sd.rho.matrix())?;
    let l1 = sld_in_eigenbasis(&eig.values, &eig.vectors, &sd.d_rho_1, cfg.support_tol)?;
    let l2 = sld_in_eigenbasis(&eig.values, &eig.vectors, &sd.d_rho_2, cfg.support_tol)?;
    qfim(&sd.rho, l1, l2, cfg)
}

/// QFIM from spectral data: eigenvalue derivatives and first-order
/// eigenvector derivatives of `rho`.
///
/// Requires a nondegenerate spectrum. Kept as an independent cross-check of
/// [`qfim`], which does not depend on eigenvector choices.
pub fn qfim_eigen_sum(
    rho: &DensityMatrix,
    d_rho: [&ComplexMatrix; 2],
    support_tol: f64,
) -> Result<[[f64; 2]; 2]> {
    let eig = herm_eig(rho.matrix())?;
    let n = eig.values.len();
    let s = &eig.values;
    for w in s.windows(2) {
        if (w[1] - w[0]).abs() < 1e-9 {
            return Err(Error::Validation(
                "eigen-sum QFIM needs a nondegenerate spectrum".into(),
            ));
        }
    }
    let v = &eig.vectors;
    let d_eig = [
        v.adjoint().matmul(&d_rho[0].matmul(v)?)?,
        v.adjoint().matmul(&d_rho[1].matmul(v)?)?,
    ];
    // c[p][(j, i)] = ⟨σ_j|∂_p σ_i⟩ in the gauge ⟨σ_i|∂σ_i⟩ = 0.
    let c: Vec<ComplexMatrix> = d_eig
        .iter()
        .map(|d| {
            ComplexMatrix::from_fn(n, n, |j, i| {
                if i == j {
                    ZERO
                } else {
                    d[(j, i)].scale(1.0 / (s[i] - s[j]))
                }
            })
        })
        .collect();
    let support: Vec<usize> = (0..n).filter(|&i| s[i] > support_tol).collect();

    let mut q = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let mut acc = 0.0;
            for &i in &support {
                acc += d_eig[a][(i, i)].re * d_eig[b][(i, i)].re / s[i];
                let overlap: f64 = (0..n)
                    .map(|j| (c[a][(j, i)].conj() * c[b][(j, i)]).re)
                    .sum();
                acc += 4.0 * s[i] * overlap;
                for &j in &support {
                    let term = (c[a][(j, i)].conj() * c[b][(j, i)]).re;
                    acc -= 8.0 * s[i] * s[j] / (s[i] + s[j]) * term;
                }
            }
            q[a][b] = acc;
        }
    }
    Ok(q)
}

/// Cramér-Rao lower bounds for `N` repetitions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsResult {
    pub var_t1: f64,
    pub var_t2: f64,
    pub cov: f64,
    pub total_var: f64,
    pub repetitions: u32,
    pub singular: bool,
}

/// Inverse-QFIM bounds. A singular QFIM yields `+∞` in every field.
pub fn crb_bounds(q: &QfimResult, repetitions: u32) -> Result<BoundsResult> {
    if repetitions == 0 {
        return Err(Error::Configuration(
            "repetitions must be at least 1".into(),
        ));
    }
    if q.singular {
        return Ok(BoundsResult {
            var_t1: f64::INFINITY,
            var_t2: f64::INFINITY,
            cov: f64::INFINITY,
            total_var: f64::INFINITY,
            repetitions,
            singular: true,
        });
    }
    let nd = repetitions as f64 * q.determinant;
    let var_t1 = q.qfim[1][1] / nd;
    let var_t2 = q.qfim[0][0] / nd;
    Ok(BoundsResult {
        var_t1,
        var_t2,
        cov: -q.qfim[0][1] / nd,
        total_var: var_t1 + var_t2,
        repetitions,
        singular: false,
    })
}

/// Whether a covariance matrix `[[var1, cov], [cov, var2]]` respects the
/// two-parameter Cramér-Rao inequality `Cov ≥ Q⁻¹/N`, checked through its
/// diagonal and cross conditions with absolute slack `tol`.
pub fn crb_admissible(
    var_t1: f64,
    var_t2: f64,
    cov: f64,
    q: &QfimResult,
    repetitions: u32,
    tol: f64,
) -> bool {
    if q.singular || repetitions == 0 {
        return false;
    }
    let nd = repetitions as f64 * q.determinant;
    let d1 = var_t1 - q.qfim[1][1] / nd;
    let d2 = var_t2 - q.qfim[0][0] / nd;
    let off = cov + q.qfim[0][1] / nd;
    d1 >= -tol && d2 >= -tol && d1 * d2 - off * off >= -tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{PureState, ONE};
    use crate::thermal::{gibbs_probabilities, BetaConvention, ThermalBathSpec};
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn thermal_qubit(t: f64) -> Result<DensityMatrix> {
        let spec = ThermalBathSpec::qubit(t, 1.0, BetaConvention::Natural)?;
        DensityMatrix::new(ComplexMatrix::real_diagonal(&gibbs_probabilities(&spec)))
    }

    fn ground_prob(t: f64) -> f64 {
        1.0 / (1.0 + (-1.0 / t).exp())
    }

    #[test]
    fn constant_family_has_zero_derivatives_and_singular_qfim() {
        let cfg = DerivativeConfig::default();
        let fixed = |_: f64, _: f64| Ok(DensityMatrix::maximally_mixed(2));
        let sd = state_and_derivatives(fixed, 0.4, 0.6, &cfg).unwrap();
        assert_eq!(sd.d_rho_1.max_abs(), 0.0);
        assert_eq!(sd.d_rho_2.max_abs(), 0.0);
        let q = qfim_at(fixed, 0.4, 0.6, &cfg).unwrap();
        assert_eq!(q.qfim, [[0.0; 2]; 2]);
        assert!(q.singular);
        let b = crb_bounds(&q, 1).unwrap();
        assert!(b.var_t1.is_infinite() && b.cov.is_infinite() && b.singular);
    }

    #[test]
    fn derivative_matches_analytic_thermal_slope() {
        let cfg = DerivativeConfig::default();
        for t in [0.1, 0.35, 1.0, 2.5] {
            let sd = state_and_derivatives(|a, _| thermal_qubit(a), t, 0.5, &cfg).unwrap();
            let p = ground_prob(t);
            // d p₀/dT = −p₀(1 − p₀)/T² for E = (0, 1).
            let analytic = -p * (1.0 - p) / (t * t);
            assert!((sd.d_rho_1[(0, 0)].re - analytic).abs() < 1e-6);
            assert!((sd.d_rho_1[(1, 1)].re + analytic).abs() < 1e-6);
            assert!(sd.d_rho_2.max_abs() == 0.0);
        }
    }

    #[test]
    fn thermal_qubit_qfi_matches_classical_fisher() {
        let cfg = DerivativeConfig::default();
        let family = |a: f64, _: f64| thermal_qubit(a);
        for t in [0.1, 0.3, 0.7, 1.0] {
            let q = qfim_at(family, t, 0.5, &cfg).unwrap();
            let p = ground_prob(t);
            let dp = p * (1.0 - p) / (t * t);
            let expected = dp * dp / (p * (1.0 - p));
            assert!((q.qfim[0][0] - expected).abs() < 1e-6 * expected.max(1.0));
            assert!(q.singular, "second parameter carries no information");
        }
    }

    #[test]
    fn maximally_mixed_sld_is_scaled_derivative() {
        let c = 0.3;
        let d = ComplexMatrix::real_diagonal(&[c, -c]);
        let l = sld_operators(
            &DensityMatrix::maximally_mixed(2),
            &d,
            &DerivativeConfig::default(),
        )
        .unwrap();
        assert!(l.max_abs_diff(&ComplexMatrix::real_diagonal(&[2.0 * c, -2.0 * c])) < 1e-14);
    }

    #[test]
    fn pure_rotation_family_matches_pure_state_qfi() {
        // |ψ⟩ = cos(θ/2)|0⟩ + e^{iχ} sin(θ/2)|1⟩ has QFIM diag(1, sin²θ).
        let cfg = DerivativeConfig::default();
        let family = |theta: f64, chi: f64| {
            let amp = vec![
                Complex64::new((theta / 2.0).cos(), 0.0),
                Complex64::from_polar((theta / 2.0).sin(), chi),
            ];
            Ok(PureState::new(amp)?.density())
        };
        let (theta, chi) = (0.9, 0.4);
        let q = qfim_at(family, theta, chi, &cfg).unwrap();
        assert!((q.qfim[0][0] - 1.0).abs() < 1e-7);
        assert!((q.qfim[1][1] - theta.sin().powi(2)).abs() < 1e-7);
        assert!(q.qfim[0][1].abs() < 1e-7);
        // Pure states have a nonzero commutator term for non-commuting SLDs.
        assert!((q.attainability_residual - 2.0 * theta.sin()).abs() < 1e-6);
    }

    fn random_hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
        .hermitian_part()
    }

    /// ρ(a, b) = normalized exp-like positive family built from fixed generators.
    fn random_family(rng: &mut impl Rng, n: usize) -> impl Fn(f64, f64) -> Result<DensityMatrix> {
        let base = random_hermitian(rng, n);
        let g1 = random_hermitian(rng, n);
        let g2 = random_hermitian(rng, n);
        move |a: f64, b: f64| {
            let mut m = base.clone();
            m.add_scaled(&g1, Complex64::new(a, 0.0))?;
            m.add_scaled(&g2, Complex64::new(b * b, 0.0))?;
            let m = &m * &m.adjoint();
            let m = m.try_add(&ComplexMatrix::identity(n).scale_real(0.05))?;
            DensityMatrix::from_unnormalized(m.hermitian_part())
        }
    }

    #[test]
    fn sld_satisfies_defining_relation_on_full_rank_families() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let cfg = DerivativeConfig::default();
        for _ in 0..20 {
            let fam = random_family(&mut rng, 3);
            let sd = state_and_derivatives(&fam, 0.4, 0.6, &cfg).unwrap();
            let l = sld_operators(&sd.rho, &sd.d_rho_1, &cfg).unwrap();
            let lhs = (&(&l * sd.rho.matrix()) + &(sd.rho.matrix() * &l)).scale_real(0.5);
            assert!(lhs.max_abs_diff(&sd.d_rho_1) < 1e-7);
            assert!(l.is_hermitian(1e-12));
        }
    }

    #[test]
    fn anticommutator_and_eigen_sum_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let cfg = DerivativeConfig::default();
        for _ in 0..50 {
            let n = rng.gen_range(2..=4);
            let fam = random_family(&mut rng, n);
            let sd = state_and_derivatives(&fam, 0.3, 0.7, &cfg).unwrap();
            let l1 = sld_operators(&sd.rho, &sd.d_rho_1, &cfg).unwrap();
            let l2 = sld_operators(&sd.rho, &sd.d_rho_2, &cfg).unwrap();
            let q = qfim(&sd.rho, l1, l2, &cfg).unwrap();
            let e = qfim_eigen_sum(&sd.rho, [&sd.d_rho_1, &sd.d_rho_2], cfg.support_tol).unwrap();
            for (qa, ea) in q.qfim.iter().zip(&e) {
                for (x, y) in qa.iter().zip(ea) {
                    assert!((x - y).abs() < 1e-7 * x.abs().max(1.0));
                }
            }
            assert!((q.qfim[0][1] - q.qfim[1][0]).abs() < 1e-10);
        }
    }

    fn from_q(q: [[f64; 2]; 2]) -> QfimResult {
        let det = q[0][0] * q[1][1] - q[0][1] * q[1][0];
        let id = ComplexMatrix::identity(1);
        let mut r = QfimResult {
            qfim: q,
            determinant: det,
            sld_1: id.clone(),
            sld_2: id,
            attainability_residual: 0.0,
            singular: false,
        };
        r.singular = det.abs() < 1e-10 * r.scale();
        r
    }

    #[test]
    fn diagonal_bounds() {
        let b = crb_bounds(&from_q([[4.0, 0.0], [0.0, 0.5]]), 1).unwrap();
        assert_eq!(
            (b.var_t1, b.var_t2, b.cov, b.total_var),
            (0.25, 2.0, 0.0, 2.25)
        );
        let b2 = crb_bounds(&from_q([[4.0, 0.0], [0.0, 0.5]]), 4).unwrap();
        assert_eq!(b2.var_t1, 0.0625);
        assert!(crb_bounds(&from_q([[1.0, 0.0], [0.0, 1.0]]), 0).is_err());
    }

    #[test]
    fn random_spd_bounds_match_explicit_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..100 {
            let (a, b, c): (f64, f64, f64) = (
                rng.gen_range(0.1..5.0),
                rng.gen_range(0.1..5.0),
                rng.gen_range(-1.0..1.0),
            );
            let q = [[a * a + c * c, a * c], [a * c, b * b + c * c]];
            let det = q[0][0] * q[1][1] - q[0][1] * q[0][1];
            let inv = [
                [q[1][1] / det, -q[0][1] / det],
                [-q[1][0] / det, q[0][0] / det],
            ];
            let r = crb_bounds(&from_q(q), 1).unwrap();
            assert!((r.var_t1 - inv[0][0]).abs() < 1e-10 * inv[0][0].max(1.0));
            assert!((r.var_t2 - inv[1][1]).abs() < 1e-10 * inv[1][1].max(1.0));
            assert!((r.cov - inv[0][1]).abs() < 1e-10 * inv[0][1].abs().max(1.0));
            let qr = from_q(q);
            assert!(crb_admissible(r.var_t1, r.var_t2, r.cov, &qr, 1, 1e-9));
            assert!(!crb_admissible(
                r.var_t1 * 0.5,
                r.var_t2,
                r.cov,
                &qr,
                1,
                1e-9
            ));
        }
    }

    #[test]
    fn off_support_blocks_are_zero() {
        let rho = PureState::basis(3, 0).density();
        let d = ComplexMatrix::from_fn(3, 3, |r, c| if r == 2 && c == 2 { ONE } else { ZERO });
        let l = sld_operators(&rho, &d, &DerivativeConfig::default()).unwrap();
        assert_eq!(l[(2, 2)], ZERO);
        assert_eq!(l[(1, 2)], ZERO);
    }

    #[test]
    fn invalid_config_rejected() {
        let bad = DerivativeConfig {
            step: 0.0,
            ..DerivativeConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(state_and_derivatives(|a, _| thermal_qubit(a), 0.5, 0.5, &bad).is_err());
    }
}
