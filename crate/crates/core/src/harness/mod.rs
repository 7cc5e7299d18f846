//! Configuration, staged runs, manifests and bundled recipes.

pub mod compare;
pub mod config;
pub mod io;
pub mod recipes;
pub mod run;

pub use compare::{compare, CompareReport, CompareTolerances};
pub use config::{PropagatorChoice, RunConfig};
pub use run::{run, run_with, RunManifest, RunOptions, RunOutput};
