//! Named thermometry setups and their `(T₁, T₂) ↦ ρ` evaluators.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interferometer::{mz_output_state, BathMode, EstimationTarget, MzConfig};
use crate::switch::{switch_output_state, SwitchSetup};
use crate::tensor::DensityMatrix;
use crate::thermal::BetaConvention;

/// Setup identifiers. `_wc` variants keep the control ("with control") for
/// joint estimation; `swiN` is the switch with an `N`-dimensional target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetupId {
    Mz1b,
    Mz1bWc,
    Mz2b,
    Mz2bWc,
    Swi2,
    Swi3,
    Swi4,
}

impl SetupId {
    pub const ALL: [SetupId; 7] = [
        SetupId::Mz1b,
        SetupId::Mz1bWc,
        SetupId::Mz2b,
        SetupId::Mz2bWc,
        SetupId::Swi2,
        SetupId::Swi3,
        SetupId::Swi4,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SetupId::Mz1b => "mz1b",
            SetupId::Mz1bWc => "mz1b_wc",
            SetupId::Mz2b => "mz2b",
            SetupId::Mz2bWc => "mz2b_wc",
            SetupId::Swi2 => "swi2",
            SetupId::Swi3 => "swi3",
            SetupId::Swi4 => "swi4",
        }
    }

    pub fn is_switch(self) -> bool {
        matches!(self, SetupId::Swi2 | SetupId::Swi3 | SetupId::Swi4)
    }

    /// Whether the control qubit is part of the estimated state.
    pub fn keeps_control(self) -> bool {
        !matches!(self, SetupId::Mz1b | SetupId::Mz2b)
    }

    /// Setups whose probe may be a two-qubit register.
    pub fn allows_two_qubit_probe(self) -> bool {
        matches!(self, SetupId::Mz1b | SetupId::Mz2b)
    }
}

impl fmt::Display for SetupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SetupId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SetupId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<_> = SetupId::ALL.iter().map(|id| id.as_str()).collect();
                Error::Configuration(format!(
                    "unknown setup '{s}', expected one of {}",
                    names.join(", ")
                ))
            })
    }
}

/// Fully parameterized setup, ready to evaluate at any temperature pair.
#[derive(Debug, Clone)]
pub enum Setup {
    Interferometer(MzConfig),
    Switch(SwitchSetup),
}

/// Parameters shared by every setup family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SetupParams {
    pub probe_qubits: usize,
    pub phi: f64,
    pub eta: f64,
    pub convention: BetaConvention,
}

impl Default for SetupParams {
    fn default() -> Self {
        Self {
            probe_qubits: 1,
            phi: std::f64::consts::FRAC_PI_2,
            eta: 1.0,
            convention: BetaConvention::Natural,
        }
    }
}

impl Setup {
    pub fn build(id: SetupId, params: &SetupParams) -> Result<Self> {
        if params.probe_qubits != 1 && !id.allows_two_qubit_probe() {
            return Err(Error::Configuration(format!(
                "setup {id} supports only a single-qubit probe, got {} qubits",
                params.probe_qubits
            )));
        }
        let mz = |mode, target| -> Result<Setup> {
            let cfg = MzConfig::new(mode, params.probe_qubits, target, params.phi, params.eta)
                .map_err(as_config)?
                .with_convention(params.convention);
            Ok(Setup::Interferometer(cfg))
        };
        let swi = |target_dim| -> Result<Setup> {
            if !(0.0..=1.0).contains(&params.eta) {
                return Err(Error::Configuration(format!(
                    "eta must lie in [0, 1], got {}",
                    params.eta
                )));
            }
            Ok(Setup::Switch(SwitchSetup {
                target_dim,
                eta: params.eta,
                convention: params.convention,
            }))
        };
        match id {
            SetupId::Mz1b => mz(BathMode::OneBath, EstimationTarget::PostselectedPlus),
            SetupId::Mz1bWc => mz(BathMode::OneBath, EstimationTarget::ProbePlusControl),
            SetupId::Mz2b => mz(BathMode::TwoBath, EstimationTarget::PostselectedPlus),
            SetupId::Mz2bWc => mz(BathMode::TwoBath, EstimationTarget::ProbePlusControl),
            SetupId::Swi2 => swi(2),
            SetupId::Swi3 => swi(3),
            SetupId::Swi4 => swi(4),
        }
    }

    /// Output state fed to the estimator.
    pub fn evaluate(&self, t1: f64, t2: f64) -> Result<DensityMatrix> {
        match self {
            Setup::Interferometer(cfg) => mz_output_state(cfg, t1, t2),
            Setup::Switch(s) => switch_output_state(s, t1, t2),
        }
    }

    /// Product of the dimensions of every system measured during estimation.
    pub fn effective_dimension(&self) -> usize {
        match self {
            Setup::Interferometer(cfg) => {
                let probe = 1 << cfg.probe_qubits;
                match cfg.target {
                    EstimationTarget::PostselectedPlus => probe,
                    EstimationTarget::ProbePlusControl => probe * 2,
                }
            }
            Setup::Switch(s) => s.target_dim * 2,
        }
    }
}

fn as_config(e: Error) -> Error {
    match e {
        Error::Validation(msg) => Error::Configuration(msg),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for id in SetupId::ALL {
            assert_eq!(id.as_str().parse::<SetupId>().unwrap(), id);
            assert_eq!(
                serde_json::to_string(&id).unwrap(),
                format!("\"{}\"", id.as_str())
            );
        }
        assert!(matches!(
            "swi5".parse::<SetupId>(),
            Err(Error::Configuration(_))
        ));
    }

    #[test]
    fn effective_dimensions() {
        let p = SetupParams::default();
        let dims: Vec<usize> = SetupId::ALL
            .iter()
            .map(|&id| Setup::build(id, &p).unwrap().effective_dimension())
            .collect();
        assert_eq!(dims, vec![2, 4, 2, 4, 4, 6, 8]);
        let two = SetupParams {
            probe_qubits: 2,
            ..p
        };
        assert_eq!(
            Setup::build(SetupId::Mz2b, &two)
                .unwrap()
                .effective_dimension(),
            4
        );
    }

    #[test]
    fn two_qubit_probe_only_for_postselected_interferometers() {
        let two = SetupParams {
            probe_qubits: 2,
            ..SetupParams::default()
        };
        assert!(Setup::build(SetupId::Mz1b, &two).is_ok());
        for id in [SetupId::Mz1bWc, SetupId::Mz2bWc, SetupId::Swi3] {
            assert!(matches!(
                Setup::build(id, &two),
                Err(Error::Configuration(_))
            ));
        }
    }

    #[test]
    fn bad_eta_is_a_configuration_error() {
        let p = SetupParams {
            eta: 1.5,
            ..SetupParams::default()
        };
        for id in SetupId::ALL {
            assert!(
                matches!(Setup::build(id, &p), Err(Error::Configuration(_))),
                "{id}"
            );
        }
    }

    #[test]
    fn every_setup_produces_a_valid_state() {
        let p = SetupParams::default();
        for id in SetupId::ALL {
            let s = Setup::build(id, &p).unwrap();
            let rho = s.evaluate(0.3, 0.8).unwrap();
            assert_eq!(rho.dim(), s.effective_dimension());
        }
    }
}
