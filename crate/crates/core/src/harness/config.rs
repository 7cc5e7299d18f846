//! Run configuration. Every dimensional key carries its unit as a suffix
//! (`_nm`, `_W_cm2`, `_cycles`, `_au`, `_eV`, `_rad`); `resolve` converts
//! everything to atomic units.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field::{self, Envelope, PulseParams, SampledField};
use crate::grid::{QuadratureGrid, SpatialGrid};
use crate::light::{FlowWeighting, InverseMethod, LightInput, LightPropagation};
use crate::model::{CoreCenter, PotentialKind, PotentialModel};
use crate::response::{FitKind, QSampling};
use crate::tdse::ModeParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    /// Soft-core hydrogen with ground-state energy −0.5 a.u.
    Hydrogen,
    SoftCore {
        charge: f64,
        #[serde(default = "one")]
        softening_au: f64,
        #[serde(default, rename = "target_ip_eV")]
        target_ip_ev: Option<f64>,
    },
    TwoCenter {
        centers: Vec<CenterConfig>,
        #[serde(default = "one")]
        softening_au: f64,
        #[serde(default, rename = "target_ip_eV")]
        target_ip_ev: Option<f64>,
    },
    Harmonic {
        stiffness_au: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CenterConfig {
    pub charge: f64,
    pub position_au: f64,
}

fn one() -> f64 {
    1.0
}

impl ModelConfig {
    pub fn to_model(&self) -> PotentialModel {
        match self {
            Self::Hydrogen => PotentialModel::hydrogen(),
            Self::SoftCore {
                charge,
                softening_au,
                target_ip_ev,
            } => PotentialModel {
                target_ip: *target_ip_ev,
                ..PotentialModel::soft_core(*charge, *softening_au)
            },
            Self::TwoCenter {
                centers,
                softening_au,
                target_ip_ev,
            } => PotentialModel {
                kind: PotentialKind::TwoCenterMolecule,
                centers: centers
                    .iter()
                    .map(|c| CoreCenter {
                        charge: c.charge,
                        position: c.position_au,
                    })
                    .collect(),
                softening: *softening_au,
                target_ip: *target_ip_ev,
            },
            Self::Harmonic { stiffness_au } => PotentialModel::harmonic(*stiffness_au),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElectronGridConfig {
    pub half_width_au: f64,
    pub points: usize,
    #[serde(default)]
    pub absorber_au: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ElectronInit {
    Eigenstate {
        index: usize,
    },
    /// Σ c_k |k⟩ with c_k = amplitude·e^{i phase}, normalized on load.
    Superposition {
        states: Vec<usize>,
        amplitudes: Vec<f64>,
        #[serde(default)]
        phases_rad: Vec<f64>,
    },
}

impl ElectronInit {
    pub fn highest_state(&self) -> usize {
        match self {
            Self::Eigenstate { index } => *index,
            Self::Superposition { states, .. } => states.iter().copied().max().unwrap_or(0),
        }
    }

    pub fn coefficients(&self) -> Result<Vec<(usize, C64)>> {
        match self {
            Self::Eigenstate { index } => Ok(vec![(*index, C64::new(1.0, 0.0))]),
            Self::Superposition {
                states,
                amplitudes,
                phases_rad,
            } => {
                if states.is_empty() || states.len() != amplitudes.len() {
                    return Err(Error::Config(format!(
                        "superposition lists {} states but {} amplitudes",
                        states.len(),
                        amplitudes.len()
                    )));
                }
                if !phases_rad.is_empty() && phases_rad.len() != states.len() {
                    return Err(Error::Config("phases_rad must match states in length".into()));
                }
                Ok(states
                    .iter()
                    .zip(amplitudes)
                    .enumerate()
                    .map(|(i, (s, a))| (*s, C64::from_polar(*a, phases_rad.get(i).copied().unwrap_or(0.0))))
                    .collect())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub wavelength_nm: f64,
    #[serde(rename = "intensity_W_cm2")]
    pub intensity_w_cm2: f64,
    pub duration_cycles: f64,
    #[serde(default)]
    pub envelope: Envelope,
    #[serde(default)]
    pub cep_rad: f64,
}

impl PulseConfig {
    pub fn to_params(&self) -> PulseParams {
        PulseParams {
            wavelength_nm: self.wavelength_nm,
            intensity_w_cm2: self.intensity_w_cm2,
            n_cycles: self.duration_cycles,
            envelope: self.envelope,
            cep: self.cep_rad,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeConfig {
    /// Ω as a multiple of the laser frequency.
    #[serde(default)]
    pub harmonic: Option<u32>,
    #[serde(default)]
    pub omega_au: Option<f64>,
    pub beta_au: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QSamplingConfig {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LightConfig {
    pub initial: LightInput,
    pub half_width: f64,
    pub points: usize,
    #[serde(default)]
    pub propagation: LightPropagation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PropagatorChoice {
    /// Light equation on the q grid with the time-dependent dipole.
    #[default]
    Grid,
    /// Analytic flow map of the fitted resonant profile.
    Flow,
    /// Flow result, cross-checked against the grid propagator on the same profile.
    Both,
}

impl std::str::FromStr for PropagatorChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grid" => Ok(Self::Grid),
            "flow" => Ok(Self::Flow),
            "both" => Ok(Self::Both),
            _ => Err(Error::Config(format!("unknown propagator `{s}` (grid, flow, both)"))),
        }
    }
}

/// Dipole series used by the grid propagator. Without it the surface is splined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesConfig {
    pub fit_order: usize,
    #[serde(default)]
    pub truncate_order: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub fit_order: usize,
    #[serde(default)]
    pub fit_kind: FitKind,
    #[serde(default)]
    pub inverse: InverseMethod,
    #[serde(default)]
    pub weighting: FlowWeighting,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub emitters: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default = "yes")]
    pub wigner: bool,
    #[serde(default)]
    pub q_range: Option<(f64, f64)>,
    #[serde(default)]
    pub p_range: Option<(f64, f64)>,
}

fn yes() -> bool {
    true
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            wigner: true,
            q_range: None,
            p_range: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub model: ModelConfig,
    pub electron_grid: ElectronGridConfig,
    pub initial_electron: ElectronInit,
    pub pulse: PulseConfig,
    pub time_step_au: f64,
    pub mode: ModeConfig,
    pub q_sampling: QSamplingConfig,
    pub light: LightConfig,
    #[serde(default)]
    pub propagator: PropagatorChoice,
    #[serde(default)]
    pub series: Option<SeriesConfig>,
    #[serde(default)]
    pub flow: Option<FlowConfig>,
    #[serde(default)]
    pub ensemble: Option<EnsembleConfig>,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    /// Stop after the fit stage: no light propagation or phase-space analysis.
    #[serde(default)]
    pub profile_only: bool,
    /// Directory for cached electron traces.
    #[serde(default)]
    pub cache_dir: Option<String>,
    /// Dotted config paths with the values they must hold.
    #[serde(default)]
    pub published_parameters: BTreeMap<String, serde_json::Value>,
}

/// Everything in atomic units, ready for the pipeline.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub model: PotentialModel,
    pub x_grid: SpatialGrid,
    pub absorber_width: f64,
    pub field: SampledField,
    pub omega_l: f64,
    pub mode: ModeParams,
    pub sampling: QSampling,
    pub q_grid: QuadratureGrid,
}

fn cfg_err<E: std::fmt::Display>(what: &str) -> impl Fn(E) -> Error + '_ {
    move |e| Error::Config(format!("{what}: {e}"))
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(cfg_err("malformed run configuration"))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(serde_json::to_vec(self)?)))
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::Config("run name is empty".into()));
        }
        match (self.mode.harmonic, self.mode.omega_au) {
            (Some(_), Some(_)) => return Err(Error::Config("give either mode.harmonic or mode.omega_au, not both".into())),
            (None, None) => return Err(Error::Config("mode needs harmonic or omega_au".into())),
            _ => {}
        }
        match self.propagator {
            PropagatorChoice::Grid => {
                if self.ensemble.is_some() {
                    return Err(Error::Config(
                        "ensembles are handled by the flow propagator; use \"flow\" or \"both\"".into(),
                    ));
                }
            }
            PropagatorChoice::Flow | PropagatorChoice::Both => {
                if self.flow.is_none() {
                    return Err(Error::Config(format!("propagator {:?} needs a `flow` section", self.propagator)));
                }
            }
        }
        if let Some(s) = self.series {
            if s.truncate_order.is_some_and(|t| t > s.fit_order) {
                return Err(Error::Config("series.truncate_order exceeds series.fit_order".into()));
            }
        }
        self.initial_electron.coefficients()?;
        self.check_published()?;
        Ok(())
    }

    /// Compare every `published_parameters` entry with the value at its path.
    pub fn check_published(&self) -> Result<()> {
        if self.published_parameters.is_empty() {
            return Ok(());
        }
        let tree = serde_json::to_value(self)?;
        for (path, expected) in &self.published_parameters {
            let mut node = &tree;
            for key in path.split('.') {
                node = node
                    .get(key)
                    .ok_or_else(|| Error::Config(format!("published parameter `{path}` not present in the configuration")))?;
            }
            let same = match (node.as_f64(), expected.as_f64()) {
                (Some(a), Some(b)) => (a - b).abs() <= 1e-9 * b.abs().max(1e-300),
                _ => node == expected,
            };
            if !same {
                return Err(Error::Config(format!(
                    "`{path}` is {node} but the published value is {expected}"
                )));
            }
        }
        Ok(())
    }

    pub fn resolve(&self) -> Result<Resolved> {
        let model = self.model.to_model();
        model.validate()?;
        let g = &self.electron_grid;
        let x_grid = SpatialGrid::symmetric(g.half_width_au, g.points)?;
        let pulse = self.pulse.to_params();
        let (omega_l, _) = field::to_atomic_units(&pulse);
        let field = field::sample_pulse(&pulse, self.time_step_au)?;
        let mode = match (self.mode.harmonic, self.mode.omega_au) {
            (Some(h), _) => ModeParams::harmonic(h, omega_l, self.mode.beta_au),
            (None, Some(w)) => ModeParams::new(w, self.mode.beta_au),
            (None, None) => unreachable!("validated"),
        };
        mode.validate()?;
        let s = &self.q_sampling;
        let center = match self.light.initial {
            LightInput::Coherent { q0, .. } | LightInput::Squeezed { q0, .. } => q0,
            _ => 0.0,
        };
        let sampling = QSampling::covering(s.min, s.max, s.points, center)?;
        let q_grid = QuadratureGrid::symmetric(self.light.half_width, self.light.points)?;
        Ok(Resolved {
            model,
            x_grid,
            absorber_width: g.absorber_au,
            field,
            omega_l,
            mode,
            sampling,
            q_grid,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "name": "t",
        "model": {"kind": "hydrogen"},
        "electron_grid": {"half_width_au": 51.2, "points": 256},
        "initial_electron": {"kind": "eigenstate", "index": 0},
        "pulse": {"wavelength_nm": 800, "intensity_W_cm2": 1e13, "duration_cycles": 2},
        "time_step_au": 0.05,
        "mode": {"harmonic": 5, "beta_au": 0.1},
        "q_sampling": {"min": -4, "max": 4, "points": 9},
        "light": {"initial": {"kind": "vacuum"}, "half_width": 8, "points": 128},
        "published_parameters": {"pulse.wavelength_nm": 800, "mode.harmonic": 5}
    }"#;

    #[test]
    fn minimal_config_resolves() {
        let cfg = RunConfig::from_json(MINIMAL).unwrap();
        let r = cfg.resolve().unwrap();
        assert!((r.mode.omega - 5.0 * r.omega_l).abs() < 1e-15);
        assert_eq!(r.sampling.q_values.len(), 9);
        assert_eq!(cfg.hash().unwrap(), cfg.clone().hash().unwrap());
    }

    #[test]
    fn published_mismatch_is_a_config_error() {
        let text = MINIMAL.replace("\"mode.harmonic\": 5", "\"mode.harmonic\": 7");
        let err = RunConfig::from_json(&text).unwrap_err();
        assert!(err.is_config(), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace("\"time_step_au\"", "\"time_step\": 1, \"time_step_au\"");
        assert!(RunConfig::from_json(&text).unwrap_err().is_config());
    }

    #[test]
    fn ensemble_needs_flow() {
        let text = MINIMAL.replace("\"published_parameters\"", "\"ensemble\": {\"emitters\": 10}, \"published_parameters\"");
        assert!(RunConfig::from_json(&text).unwrap_err().is_config());
    }
}
