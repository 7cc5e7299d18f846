//! The quantized light mode: states, grid propagation and the analytic flow.

pub mod dipole;
pub mod ensemble;
pub mod flow;
pub mod propagate;
pub mod state;

pub use dipole::{DipoleModel, ResonantDrive, SurfaceSpline};
pub use ensemble::{ensemble_response, EnsembleSpec};
pub use flow::{apply_flow, build_flow_map, flow_amplitude, FlowMap, FlowOutput, FlowWeighting, InverseMethod};
pub use propagate::{propagate_light_grid, LightPropagation, LightRun, LightTerms, Ordering};
pub use state::{build_initial_state, FockWeighting, LightInput, LightState, MixedLightState, Moments};
