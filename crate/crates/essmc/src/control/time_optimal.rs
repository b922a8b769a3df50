use super::{ControllerParams, Observation, SwitchingLaw};
use crate::util::sign;
use crate::Result;

/// Bang-bang time-optimal feedback for the double integrator.
///
/// The switching curve is `x1 = -x2 |x2| / (2U)`; above it the control is
/// full negative, below it full positive, and on the curve the control
/// brakes along it (`0` exactly at the origin).
pub fn time_optimal_control(x1: f64, x2: f64, u_max: f64) -> f64 {
    let c = x1 + x2 * x2.abs() / (2.0 * u_max);
    if c > 0.0 {
        -u_max
    } else if c < 0.0 {
        u_max
    } else {
        -u_max * sign(x2)
    }
}

/// Closed-form minimum time to the origin from `(x1, x2)` under `|u| <= U`.
pub fn minimum_time(x1: f64, x2: f64, u_max: f64) -> f64 {
    let c = x1 + x2 * x2.abs() / (2.0 * u_max);
    if c > 0.0 {
        (x2 + 2.0 * (u_max * x1 + 0.5 * x2 * x2).sqrt()) / u_max
    } else if c < 0.0 {
        (-x2 + 2.0 * (-u_max * x1 + 0.5 * x2 * x2).sqrt()) / u_max
    } else {
        x2.abs() / u_max
    }
}

#[derive(Debug, Clone)]
pub struct TimeOptimal {
    u_max: f64,
}

impl TimeOptimal {
    pub fn new(u_max: f64) -> Self {
        TimeOptimal { u_max }
    }
}

impl SwitchingLaw for TimeOptimal {
    fn name(&self) -> &'static str {
        "time-optimal"
    }

    fn reset(&mut self, _sigma0: f64, _sigma_dot0: f64) {}

    fn control(&mut self, _t: f64, obs: &Observation) -> f64 {
        time_optimal_control(obs.sigma, obs.sigma_dot, self.u_max)
    }
}

pub(super) fn check(params: &ControllerParams) -> Result<()> {
    params.resolved_u_max()?;
    Ok(())
}

pub(super) fn build(params: &ControllerParams) -> Result<Box<dyn SwitchingLaw>> {
    Ok(Box::new(TimeOptimal::new(params.resolved_u_max()?)))
}
