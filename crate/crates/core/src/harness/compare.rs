//! Diff two finished runs.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::io::read_light_state;
use super::run::{RunManifest, LIGHT_STATE};
use crate::error::{Error, Result};
use crate::light::MixedLightState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareTolerances {
    pub min_fidelity: f64,
    /// Applied when both final states are pure.
    pub max_l2: f64,
    /// Absolute tolerance per metric; metrics not listed are reported only.
    #[serde(default)]
    pub metric_abs: BTreeMap<String, f64>,
}

impl Default for CompareTolerances {
    fn default() -> Self {
        Self {
            min_fidelity: 0.99,
            max_l2: 1e-3,
            metric_abs: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub a: String,
    pub b: String,
    /// Tr(ρ_a ρ_b); |⟨a|b⟩|² for pure states.
    pub fidelity: f64,
    pub l2_distance: Option<f64>,
    /// b − a for every metric present in both manifests.
    pub metric_deltas: BTreeMap<String, f64>,
    pub failures: Vec<String>,
    pub pass: bool,
}

/// Tr(ρσ) for two ensembles on the same grid.
pub fn overlap(a: &MixedLightState, b: &MixedLightState) -> Result<f64> {
    let mut f = 0.0;
    for (wa, sa) in a.weights.iter().zip(&a.states) {
        for (wb, sb) in b.weights.iter().zip(&b.states) {
            f += wa * wb * sa.overlap(sb)?.norm_sqr();
        }
    }
    Ok(f)
}

pub fn compare(a: &Path, b: &Path, tol: &CompareTolerances) -> Result<CompareReport> {
    let (ma, da) = RunManifest::load(a)?;
    let (mb, db) = RunManifest::load(b)?;
    for (m, p) in [(&ma, a), (&mb, b)] {
        if !m.ok() {
            return Err(Error::Config(format!("run {} did not finish ({})", p.display(), m.status)));
        }
    }
    match (ma.light_grid, mb.light_grid) {
        (Some(ga), Some(gb)) if ga.same_as(&gb) => {}
        (ga, gb) => {
            return Err(Error::Shape(format!("incompatible light grids {ga:?} and {gb:?}")));
        }
    }
    let sa = read_light_state(&da.join(LIGHT_STATE))?;
    let sb = read_light_state(&db.join(LIGHT_STATE))?;
    let fidelity = overlap(&sa, &sb)?;
    let l2_distance = match (sa.as_pure(), sb.as_pure()) {
        (Some(x), Some(y)) => {
            let h = x.grid.spacing();
            Some(
                (x.amplitudes
                    .iter()
                    .zip(&y.amplitudes)
                    .map(|(u, v)| (u - v).norm_sqr())
                    .sum::<f64>()
                    * h)
                    .sqrt(),
            )
        }
        _ => None,
    };
    let metric_deltas: BTreeMap<String, f64> = ma
        .metrics
        .iter()
        .filter_map(|(k, va)| mb.metrics.get(k).map(|vb| (k.clone(), vb - va)))
        .collect();

    let mut failures = Vec::new();
    if !(fidelity >= tol.min_fidelity) {
        failures.push(format!("fidelity {fidelity:.6} < {}", tol.min_fidelity));
    }
    if let Some(d) = l2_distance {
        if !(d <= tol.max_l2) {
            failures.push(format!("L2 distance {d:.3e} > {:.1e}", tol.max_l2));
        }
    }
    for (k, t) in &tol.metric_abs {
        match metric_deltas.get(k) {
            Some(d) if d.abs() <= *t => {}
            Some(d) => failures.push(format!("{k} differs by {d:.3e} (tolerance {t:.1e})")),
            None => failures.push(format!("{k} missing from one manifest")),
        }
    }
    Ok(CompareReport {
        a: ma.name,
        b: mb.name,
        fidelity,
        l2_distance,
        metric_deltas,
        pass: failures.is_empty(),
        failures,
    })
}
