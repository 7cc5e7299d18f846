//! Identical, non-interacting emitters radiating into one mode.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::response::ResonantProfile;
use crate::tdse::ModeParams;

use super::flow::flow_amplitude;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub n_emitters: f64,
    pub per_emitter_beta: f64,
}

impl EnsembleSpec {
    pub fn single(beta: f64) -> Self {
        Self {
            n_emitters: 1.0,
            per_emitter_beta: beta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n_emitters >= 1.0) || self.n_emitters.fract() != 0.0 {
            return Err(Error::Parameter(format!(
                "emitter count {} must be a positive integer",
                self.n_emitters
            )));
        }
        if !(self.per_emitter_beta >= 0.0) {
            return Err(Error::Parameter(format!("β = {} < 0", self.per_emitter_beta)));
        }
        Ok(())
    }

    /// Product N_e·a of the emitter count and the single-emitter flow amplitude.
    pub fn effective_amplitude(&self, mode: &ModeParams, t_int: f64) -> f64 {
        let m = ModeParams {
            beta: self.per_emitter_beta,
            ..*mode
        };
        self.n_emitters * flow_amplitude(&m, t_int)
    }
}

/// Collective profile D_Ω(q) = N_e·d_Ω(q).
pub fn ensemble_response(single: &ResonantProfile, ensemble: &EnsembleSpec) -> Result<ResonantProfile> {
    ensemble.validate()?;
    let n = ensemble.n_emitters;
    let mut out = single.clone();
    out.d_omega.iter_mut().for_each(|d| *d *= n);
    out.n_emitters = single.n_emitters * n;
    if let Some(fit) = out.fit.as_mut() {
        fit.model = fit.model.scale(n);
        fit.residual_rms *= n;
        fit.residual_max *= n;
    }
    Ok(out)
}
