//! The staged pipeline eigensolve → sweep → fit → light → analysis.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{PropagatorChoice, Resolved, RunConfig};
use super::io;
use crate::cache::TraceCache;
use crate::error::{Error, Result};
use crate::grid::QuadratureGrid;
use crate::light::{
    apply_flow, build_flow_map, build_initial_state, ensemble_response, flow_amplitude, propagate_light_grid, DipoleModel,
    EnsembleSpec, FlowWeighting, LightState, LightTerms, MixedLightState, Ordering, ResonantDrive, SurfaceSpline,
};
use crate::light::state::gaussian_state;
use crate::model::{self, ElectronicState, PotentialModel};
use crate::phase_space::{self, WignerOptions};
use crate::response::{self, DipoleSurface, ResonantProfile, SeriesCoefficients};
use crate::tdse::ElectronRunSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub name: String,
    pub config_hash: String,
    pub versions: BTreeMap<String, String>,
    pub status: String,
    #[serde(default)]
    pub failed_stage: Option<String>,
    #[serde(default)]
    pub error: Option<String>,
    pub propagator: PropagatorChoice,
    pub light_grid: Option<QuadratureGrid>,
    pub timings: Vec<StageTiming>,
    pub artifacts: Vec<Artifact>,
    pub metrics: BTreeMap<String, f64>,
}

impl RunManifest {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }

    /// Load `manifest.json` from a run directory or a manifest path.
    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        let file = if path.is_dir() { path.join(MANIFEST) } else { path.to_path_buf() };
        let dir = file.parent().map(Path::to_path_buf).unwrap_or_default();
        let text = fs::read_to_string(&file).map_err(|e| Error::Config(format!("{}: {e}", file.display())))?;
        let m = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", file.display())))?;
        Ok((m, dir))
    }

    pub fn artifact(&self, name: &str) -> Option<&Artifact> {
        self.artifacts.iter().find(|a| a.path == name)
    }
}

pub const MANIFEST: &str = "manifest.json";
pub const LIGHT_STATE: &str = "light_state.csv";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub propagator: Option<PropagatorChoice>,
    /// Overrides `cache_dir` from the configuration.
    pub cache_dir: Option<PathBuf>,
}

/// Everything a finished run produced, for callers that want more than the files.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub manifest: RunManifest,
    /// `None` for profile-only runs.
    pub light: Option<MixedLightState>,
    pub profile: ResonantProfile,
    pub report: Option<phase_space::NonclassicalityReport>,
}

struct Recorder<'a> {
    dir: &'a Path,
    files: Vec<String>,
    timings: Vec<StageTiming>,
    metrics: BTreeMap<String, f64>,
}

impl<'a> Recorder<'a> {
    fn path(&mut self, name: &str) -> PathBuf {
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
        self.dir.join(name)
    }

    fn metric(&mut self, key: &str, value: f64) {
        self.metrics.insert(key.to_string(), value);
    }

    fn stage<T>(&mut self, name: &str, failed: &mut Option<String>, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        let t0 = Instant::now();
        log::info!("stage {name}");
        let out = f(self);
        self.timings.push(StageTiming {
            stage: name.to_string(),
            seconds: t0.elapsed().as_secs_f64(),
        });
        out.map_err(|e| {
            *failed = Some(name.to_string());
            Error::Stage {
                stage: name.to_string(),
                source: Box::new(e),
            }
        })
    }
}

fn sha256_file(path: &Path) -> Result<(String, u64)> {
    let bytes = fs::read(path)?;
    Ok((hex::encode(Sha256::digest(&bytes)), bytes.len() as u64))
}

pub fn run(config: &RunConfig, out_dir: &Path) -> Result<RunManifest> {
    run_with(config, out_dir, &RunOptions::default()).map(|o| o.manifest)
}

/// Run every stage, writing outputs and `manifest.json` into `out_dir`. On
/// failure the manifest records the failed stage and the error is returned.
pub fn run_with(config: &RunConfig, out_dir: &Path, opts: &RunOptions) -> Result<RunOutput> {
    let mut config = config.clone();
    if let Some(p) = opts.propagator {
        config.propagator = p;
    }
    config.validate()?;
    fs::create_dir_all(out_dir)?;
    let mut rec = Recorder {
        dir: out_dir,
        files: Vec::new(),
        timings: Vec::new(),
        metrics: BTreeMap::new(),
    };
    let cfg_path = rec.path("config.json");
    io::write_json(&cfg_path, &config)?;

    let mut failed = None;
    let result = pipeline(&config, opts, &mut rec, &mut failed);

    let mut artifacts = Vec::new();
    for name in &rec.files {
        let p = out_dir.join(name);
        if p.exists() {
            let (sha256, bytes) = sha256_file(&p)?;
            artifacts.push(Artifact {
                path: name.clone(),
                sha256,
                bytes,
            });
        }
    }
    let mut versions = BTreeMap::new();
    versions.insert("qlight".to_string(), env!("CARGO_PKG_VERSION").to_string());
    let manifest = RunManifest {
        name: config.name.clone(),
        config_hash: config.hash()?,
        versions,
        status: if result.is_ok() { "ok" } else { "failed" }.to_string(),
        failed_stage: failed,
        error: result.as_ref().err().map(|e| e.to_string()),
        propagator: config.propagator,
        light_grid: config.resolve().ok().map(|r| r.q_grid),
        timings: rec.timings.clone(),
        artifacts,
        metrics: rec.metrics.clone(),
    };
    io::write_json(&out_dir.join(MANIFEST), &manifest)?;
    let (light, profile, report) = result?;
    Ok(RunOutput {
        manifest,
        light,
        profile,
        report,
    })
}

type Outcome = (Option<MixedLightState>, ResonantProfile, Option<phase_space::NonclassicalityReport>);

fn pipeline(config: &RunConfig, opts: &RunOptions, rec: &mut Recorder, failed: &mut Option<String>) -> Result<Outcome> {
    let r = rec.stage("resolve", failed, |_| config.resolve())?;
    let (model, initial) = rec.stage("eigensolve", failed, |rec| eigen_stage(config, &r, rec))?;
    let surface = rec.stage("sweep", failed, |rec| sweep_stage(config, opts, &r, model, initial, rec))?;
    let (profile, series) = rec.stage("fit", failed, |rec| fit_stage(config, &r, &surface, rec))?;
    if config.profile_only {
        return Ok((None, profile, None));
    }
    let light = rec.stage("light", failed, |rec| light_stage(config, &r, &surface, &profile, series.as_ref(), rec))?;
    let report = rec.stage("analysis", failed, |rec| analysis_stage(config, &light, rec))?;
    Ok((Some(light), profile, report))
}

fn eigen_stage(config: &RunConfig, r: &Resolved, rec: &mut Recorder) -> Result<(PotentialModel, ElectronicState)> {
    let coefficients = config.initial_electron.coefficients()?;
    let n = (config.initial_electron.highest_state() + 1).max(2);
    let (states, model) = solve(r, n)?;
    io::write_eigenstates(&rec.path("eigenstates.csv"), &states)?;
    let v = model::build_potential(&model, &r.x_grid)?;
    io::write_potential(&rec.path("potential.csv"), &r.x_grid.points(), &v)?;
    rec.metric("ground_energy_au", states[0].energy.unwrap_or(f64::NAN));
    rec.metric("softening_au", model.softening);
    let picked: Vec<ElectronicState> = coefficients.iter().map(|(i, _)| states[*i].clone()).collect();
    let c: Vec<_> = coefficients.iter().map(|(_, c)| *c).collect();
    let initial = model::make_superposition(&picked, &c)?;
    Ok((model, initial))
}

/// Calibrate the softening if asked and return the lowest `n` eigenstates.
pub fn solve(r: &Resolved, n: usize) -> Result<(Vec<ElectronicState>, PotentialModel)> {
    let model = if r.model.target_ip.is_some() {
        model::calibrate(&r.model, &r.x_grid)?
    } else {
        r.model.clone()
    };
    let states = model::eigensolve(&model, &r.x_grid, n)?;
    Ok((states, model))
}

fn sweep_stage(
    config: &RunConfig,
    opts: &RunOptions,
    r: &Resolved,
    model: PotentialModel,
    initial: ElectronicState,
    rec: &mut Recorder,
) -> Result<DipoleSurface> {
    let base = ElectronRunSpec {
        model,
        grid: r.x_grid,
        initial,
        field: r.field.clone(),
        mode: r.mode,
        beta_q: 0.0,
        absorber_width: r.absorber_width,
        full_force: None,
    };
    let cache_dir = opts.cache_dir.clone().or_else(|| config.cache_dir.as_ref().map(PathBuf::from));
    let cache = cache_dir.map(TraceCache::new).transpose()?;
    let surface = response::sweep(&base, &r.sampling, cache.as_ref())?;
    io::write_field(&rec.path("field.csv"), &r.field)?;
    io::write_surface(&rec.path("dipole_surface.csv"), &surface)?;
    let min_norm = surface.final_norms.iter().fold(1.0f64, |m, v| m.min(*v));
    rec.metric("min_final_norm", min_norm);
    rec.metric("laser_omega_au", r.omega_l);
    rec.metric("mode_omega_au", r.mode.omega);
    Ok(surface)
}

fn fit_stage(
    config: &RunConfig,
    r: &Resolved,
    surface: &DipoleSurface,
    rec: &mut Recorder,
) -> Result<(ResonantProfile, Option<SeriesCoefficients>)> {
    let mut profile = response::resonant_dipole(surface, &r.mode, r.field.t_total)?;
    rec.metric("d_omega_amplitude", profile.amplitude());
    if let Some(flow) = config.flow {
        let support = (r.q_grid.min, r.q_grid.max);
        profile = if config.propagator == PropagatorChoice::Grid {
            // fit reported only; a zero of f_Ω does not matter to the grid propagator
            let fitted = response::fit_fomega_unchecked(&profile, flow.fit_order, flow.fit_kind)?;
            if let Err(Error::SingularFlow { location }) =
                response::check_nonvanishing(&fitted.fit.as_ref().expect("fitted").model, support)
            {
                rec.metric("f_omega_zero_q", location);
            }
            fitted
        } else {
            response::fit_fomega(&profile, flow.fit_order, flow.fit_kind, support)?
        };
        let fit = profile.fit.as_ref().expect("fitted");
        rec.metric("f_omega_residual_rms", fit.residual_rms);
        rec.metric("f_omega_residual_relative", fit.residual_rms / profile.amplitude().max(f64::MIN_POSITIVE));
        if let Some(e) = config.ensemble {
            profile = ensemble_response(
                &profile,
                &EnsembleSpec {
                    n_emitters: e.emitters,
                    per_emitter_beta: r.mode.beta,
                },
            )?;
        }
    }
    io::write_profile(&rec.path("resonant_profile.csv"), &profile)?;
    io::write_json(&rec.path("resonant_profile.json"), &profile)?;
    let series = match config.series {
        Some(s) => {
            let full = response::fit_series(surface, s.fit_order)?;
            let worst = full.residual_rms.iter().fold(0.0f64, |m, v| m.max(*v));
            rec.metric("series_residual_rms_max", worst);
            let series = match s.truncate_order {
                Some(k) => full.truncate(k),
                None => full,
            };
            io::write_series(&rec.path("series.csv"), &series)?;
            Some(series)
        }
        None => None,
    };
    Ok((profile, series))
}

fn l2_distance(a: &LightState, b: &LightState) -> f64 {
    let h = a.grid.spacing();
    a.amplitudes
        .iter()
        .zip(&b.amplitudes)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
        * h.sqrt()
}

fn light_stage(
    config: &RunConfig,
    r: &Resolved,
    surface: &DipoleSurface,
    profile: &ResonantProfile,
    series: Option<&SeriesCoefficients>,
    rec: &mut Recorder,
) -> Result<MixedLightState> {
    let input = build_initial_state(&config.light.initial, &r.q_grid)?;
    let out = match config.propagator {
        PropagatorChoice::Grid => {
            let spline;
            let dipole: &dyn DipoleModel = match series {
                Some(s) => s,
                None => {
                    spline = SurfaceSpline::new(surface)?;
                    &spline
                }
            };
            let mut drift: f64 = 0.0;
            let mut states = Vec::with_capacity(input.states.len());
            for s in &input.states {
                let run = propagate_light_grid(s, dipole, &r.field, &r.mode, &config.light.propagation)?;
                drift = drift.max(run.norm_drift);
                states.push(run.state);
            }
            rec.metric("light_norm_drift", drift);
            MixedLightState {
                weights: input.weights.clone(),
                states,
            }
        }
        PropagatorChoice::Flow | PropagatorChoice::Both => {
            let flow = config.flow.expect("validated");
            let a = flow_amplitude(&r.mode, profile.t_int);
            let map = build_flow_map(profile, a, Some((r.q_grid.min, r.q_grid.max)), flow.inverse)?;
            rec.metric("flow_amplitude", a);
            rec.metric("flow_round_trip_error", map.round_trip_error);
            let flowed = input.map(|s| apply_flow(s, &map, flow.weighting).map(|o| o.state))?;
            if config.propagator == PropagatorChoice::Both {
                let fit = profile.fit.as_ref().expect("fitted");
                let drive = ResonantDrive {
                    f: fit.model.clone(),
                    omega: r.mode.omega,
                    dt: r.field.dt,
                    steps: r.field.steps(),
                    support: (r.q_grid.min, r.q_grid.max),
                };
                let prop = crate::light::LightPropagation {
                    ordering: match flow.weighting {
                        FlowWeighting::HalfDensity => Ordering::Symmetric,
                        FlowWeighting::Transport => Ordering::Transport,
                    },
                    terms: LightTerms {
                        potential: false,
                        advection: true,
                    },
                    ..config.light.propagation
                };
                let mut worst: f64 = 0.0;
                for (s, f) in input.states.iter().zip(&flowed.states) {
                    let g = propagate_light_grid(s, &drive, &r.field, &r.mode, &prop)?;
                    worst = worst.max(l2_distance(&g.state, f));
                }
                rec.metric("cross_validation_l2", worst);
            }
            flowed
        }
    };
    let csv = rec.path(LIGHT_STATE);
    let json = rec.path("light_state.json");
    io::write_light_state(&csv, &json, &out)?;
    Ok(out)
}

fn analysis_stage(
    config: &RunConfig,
    light: &MixedLightState,
    rec: &mut Recorder,
) -> Result<Option<phase_space::NonclassicalityReport>> {
    let m = light.moments();
    let coherent = gaussian_state(&light.grid(), m.mean_q, m.mean_p, 0.5).ok();
    let report = if config.analysis.wigner {
        let opts = WignerOptions {
            q_range: config.analysis.q_range,
            p_range: config.analysis.p_range,
            ..WignerOptions::default()
        };
        let w = phase_space::wigner(light, &opts)?;
        let paths = w.write_bundle(rec.dir, "wigner")?;
        for p in paths {
            if let Some(name) = p.file_name().and_then(|s| s.to_str()) {
                rec.path(name);
            }
        }
        let report = phase_space::report_from(light, &w, coherent.as_ref())?;
        rec.metric("negativity_volume", report.negativity_volume);
        rec.metric("negative_part", report.negative_part);
        rec.metric("wigner_min", report.wigner_min);
        if let Some(f) = report.fidelity_vs_reference {
            rec.metric("fidelity_vs_coherent", f);
        }
        Some(report)
    } else {
        None
    };
    rec.metric("mean_q", m.mean_q);
    rec.metric("mean_p", m.mean_p);
    rec.metric("var_q", m.var_q);
    rec.metric("var_p", m.var_p);
    rec.metric("cov", m.cov);
    rec.metric("min_rotated_variance", m.min_rotated_variance());
    rec.metric("mean_photons", m.mean_photons());
    let q_bar = m.mean_q.hypot(m.mean_p);
    rec.metric("q_bar", q_bar);
    rec.metric("mean_photons_estimate", 0.5 * q_bar * q_bar);
    if let Some(rep) = &report {
        io::write_json(&rec.path("metrics.json"), rep)?;
    }
    Ok(report)
}
