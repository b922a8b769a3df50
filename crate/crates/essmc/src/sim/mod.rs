//! Deterministic fixed-step closed-loop simulation of the perturbed
//! double integrator `sigma_dd = f + g*u` with optional first-order
//! actuator lag, disturbance models, the fuel metric and convergence
//! detection.

mod detect;
mod disturbance;
mod plant;
mod run;
mod trace;

pub use detect::{
    default_eps_dsigma, default_eps_sigma, detect_convergence, discrete_eps_dsigma,
    ConvergenceReport,
};
pub use disturbance::{DisturbanceRealization, DisturbanceSpec};
pub use plant::{step_plant, PlantParams};
pub use run::{run_closed_loop, SimConfig};
pub use trace::{Trace, TraceMeta, TraceRecord};
