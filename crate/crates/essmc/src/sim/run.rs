use serde::{Deserialize, Serialize};

use super::disturbance::DisturbanceSpec;
use super::plant::{step_plant, PlantParams};
use super::trace::{Trace, TraceMeta, TraceRecord};
use crate::control::{build_controller, ControllerParams, Observation};
use crate::util::config_digest;
use crate::{EssmcError, Result};

/// Full description of one closed-loop run.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub sigma0: f64,
    #[serde(default)]
    pub sigma_dot0: f64,
    /// Initial actuator state when mu > 0.
    #[serde(default)]
    pub v0: f64,
    pub plant: PlantParams,
    #[serde(default)]
    pub disturbance: DisturbanceSpec,
    pub controller: ControllerParams,
    #[serde(default)]
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(EssmcError::Config("dt must be finite and > 0".into()));
        }
        if !(self.t_end.is_finite() && self.t_end >= self.dt) {
            return Err(EssmcError::Config("t_end must be finite and >= dt".into()));
        }
        for (name, v) in [
            ("sigma0", self.sigma0),
            ("sigma_dot0", self.sigma_dot0),
            ("v0", self.v0),
        ] {
            if !v.is_finite() {
                return Err(EssmcError::Config(format!("{name} must be finite")));
            }
        }
        self.plant.validate()?;
        self.disturbance.validate(self.plant.delta)?;
        self.resolved_controller().validate_structure()?;
        Ok(())
    }

    /// Non-fatal configuration advice.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let floor = self.sigma0.abs().max(1e-2);
        if self.plant.u_max * self.dt >= 0.01 * floor {
            out.push(format!(
                "dt = {} is coarse for this authority: U*dt = {} >= 1% of max(|sigma0|, 0.01)",
                self.dt,
                self.plant.u_max * self.dt
            ));
        }
        out
    }

    /// Controller parameters with the authority defaulted from the plant.
    pub fn resolved_controller(&self) -> ControllerParams {
        let mut c = self.controller.clone();
        if c.u_max.is_none() {
            c.u_max = Some(self.plant.u_max);
        }
        c
    }

    pub fn digest(&self) -> Result<String> {
        config_digest(self)
    }
}

/// Iterate controller -> disturbance -> plant on the fixed grid.
///
/// The controller is reset with the initial state, then sees only the
/// sampled observation each step. The trace covers `[0, t_end]` inclusive;
/// the record at index k holds the command issued at t_k, the actuator
/// output that acted over `[t_k, t_k + dt)` and the fuel consumed before
/// t_k.
pub fn run_closed_loop(config: &SimConfig) -> Result<Trace> {
    config.validate()?;
    let params = config.resolved_controller();
    let mut controller = build_controller(&params)?;
    let mut disturbance = config
        .disturbance
        .realize(config.seed, config.plant.delta, config.dt)?;

    let n = (config.t_end / config.dt).round() as usize;
    let mut trace = Trace::with_capacity(config.dt, n + 1);
    trace.meta = TraceMeta {
        config_digest: config.digest()?,
        seed: config.seed,
    };

    let mut state = (config.sigma0, config.sigma_dot0, config.v0);
    let mut fuel = 0.0;
    controller.reset(config.sigma0, config.sigma_dot0);

    for k in 0..=n {
        let t = k as f64 * config.dt;
        let obs = Observation {
            sigma: state.0,
            sigma_dot: state.1,
        };
        let u = controller.control(t, &obs);
        let f = disturbance.sample(t, state.1);
        let next = step_plant(state, u, f, config.plant.gain, &config.plant, config.dt)?;
        trace.records.push(TraceRecord {
            t,
            sigma: state.0,
            dsigma: state.1,
            u,
            v: next.2,
            sigma_m: controller.sigma_m().unwrap_or(0.0),
            e: fuel,
        });
        if k < n {
            fuel += u.abs() * config.dt;
            state = next;
        }
    }
    Ok(trace)
}
