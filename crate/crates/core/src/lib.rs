//! Parametric light–matter simulation of strongly driven one-dimensional
//! emitters coupled to a quantized light mode.

pub mod cache;
pub mod error;
pub mod field;
pub mod grid;
pub mod harness;
pub mod interp;
pub mod light;
pub mod model;
pub mod oracle;
pub mod phase_space;
pub mod poly;
pub mod response;
pub mod tdse;
pub mod units;

pub use error::{Error, Result};
