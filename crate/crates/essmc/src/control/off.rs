//! Null controller. Useful as a baseline (free ringing of the mechanical
//! scenario) and for exercising the plant in open loop.

use super::{ControllerParams, Observation, SwitchingLaw};
use crate::Result;

pub struct Off;

impl SwitchingLaw for Off {
    fn name(&self) -> &'static str {
        "off"
    }

    fn reset(&mut self, _sigma0: f64, _sigma_dot0: f64) {}

    fn control(&mut self, _t: f64, _obs: &Observation) -> f64 {
        0.0
    }
}

pub fn check(_params: &ControllerParams) -> Result<()> {
    Ok(())
}

pub fn build(_params: &ControllerParams) -> Result<Box<dyn SwitchingLaw>> {
    Ok(Box::new(Off))
}
