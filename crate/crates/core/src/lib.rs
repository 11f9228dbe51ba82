//! Exit-time optimal control with a radially reduced Hamilton–Jacobi–Bellman
//! equation, and its use as a controlled-diffusion image restoration filter.
//!
//! The pieces, bottom up:
//!
//! - [`radial`]: forward integration of the radial ODE for the value function.
//! - [`control`]: the optimal feedback law derived from `u'(r)`.
//! - [`sde`]: Euler–Maruyama simulation of the controlled exit-time diffusion
//!   and a Monte Carlo estimate of the value function.
//! - [`image_pipeline`], [`metrics`], [`tuning`]: the restoration pipeline,
//!   quality metrics and the (sigma, T, dt) grid search.

pub mod config;
pub mod control;
pub mod error;
pub mod image_pipeline;
pub mod integrator;
pub mod metrics;
pub mod noise;
pub mod params;
pub mod radial;
pub mod sde;
pub mod synthetic;
pub mod tuning;
mod util;

pub use control::ControlLaw;
pub use error::{Error, Result};
pub use image_pipeline::ImageState;
pub use metrics::MetricReport;
pub use params::{Convention, ModelParams, StateCost};
pub use radial::RadialSolution;
pub use sde::{McEstimate, Trajectory};
pub use tuning::TuneRecord;
pub use util::fmt_f64;
