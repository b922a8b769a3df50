use serde::{Deserialize, Serialize};

use crate::{EssmcError, Result};

fn one() -> f64 {
    1.0
}

/// Normalized uncertain plant `sigma_dd = f + g*u`, `|f| <= delta`,
/// `gamma_m <= g <= gamma_M`, with control authority `u_max` and an
/// optional first-order actuator lag `mu v_dot + v = u`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PlantParams {
    /// Disturbance bound (acceleration units), >= 0.
    pub delta: f64,
    /// Control authority U > 0.
    pub u_max: f64,
    /// Lower input-gain bound, > 0.
    #[serde(default = "one", rename = "gamma_m")]
    pub gamma_min: f64,
    /// Upper input-gain bound, >= gamma_m.
    #[serde(default = "one", rename = "gamma_M")]
    pub gamma_max: f64,
    /// Actuator time constant in seconds; 0 disables the lag.
    #[serde(default)]
    pub mu: f64,
    /// Gain actually applied in simulation; must sit inside the bounds.
    #[serde(default = "one")]
    pub gain: f64,
}

impl PlantParams {
    /// Unit-gain plant without lag; the common test configuration.
    pub fn normalized(delta: f64, u_max: f64) -> Self {
        PlantParams {
            delta,
            u_max,
            gamma_min: 1.0,
            gamma_max: 1.0,
            mu: 0.0,
            gain: 1.0,
        }
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("delta", self.delta),
            ("u_max", self.u_max),
            ("gamma_m", self.gamma_min),
            ("gamma_M", self.gamma_max),
            ("mu", self.mu),
            ("gain", self.gain),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(EssmcError::Config(format!("plant.{name} must be finite")));
            }
        }
        if self.delta < 0.0 {
            return Err(EssmcError::Config("plant.delta must be >= 0".into()));
        }
        if self.u_max <= 0.0 {
            return Err(EssmcError::Config("plant.u_max must be > 0".into()));
        }
        if self.gamma_min <= 0.0 || self.gamma_max < self.gamma_min {
            return Err(EssmcError::Config(
                "plant gain bounds need 0 < gamma_m <= gamma_M".into(),
            ));
        }
        if self.mu < 0.0 {
            return Err(EssmcError::Config("plant.mu must be >= 0".into()));
        }
        if !(self.gamma_min..=self.gamma_max).contains(&self.gain) {
            return Err(EssmcError::Config(
                "plant.gain must lie within [gamma_m, gamma_M]".into(),
            ));
        }
        // Dominance feasibility: without it no bounded relay controller
        // can enforce sliding.
        if self.u_max <= self.delta / self.gamma_min {
            return Err(EssmcError::Config(
                "plant requires u_max > delta / gamma_m".into(),
            ));
        }
        Ok(())
    }
}

/// Advance the plant one step of size `dt` under the held command `u_cmd`
/// and disturbance sample `f`.
///
/// Semi-implicit Euler: the velocity is updated first and the new velocity
/// advances the position. With `mu > 0` the actuator state is advanced by
/// the exact exponential update for a zero-order-hold command before the
/// acceleration is formed, so small lags impose no step-size restriction.
///
/// Returns `(sigma, sigma_dot, v)` where `v` is the actuator output that
/// acted during the step (`v == u_cmd` when `mu == 0`).
pub fn step_plant(
    state: (f64, f64, f64),
    u_cmd: f64,
    f: f64,
    g: f64,
    params: &PlantParams,
    dt: f64,
) -> Result<(f64, f64, f64)> {
    let (sigma, sigma_dot, v_prev) = state;
    for (name, value) in [
        ("sigma", sigma),
        ("sigma_dot", sigma_dot),
        ("v", v_prev),
        ("u_cmd", u_cmd),
        ("f", f),
        ("g", g),
        ("dt", dt),
    ] {
        if !value.is_finite() {
            return Err(EssmcError::InvalidState(format!(
                "non-finite {name} in step_plant"
            )));
        }
    }
    let v = if params.mu > 0.0 {
        u_cmd + (v_prev - u_cmd) * (-dt / params.mu).exp()
    } else {
        u_cmd
    };
    let accel = f + g * v;
    let sigma_dot_next = sigma_dot + accel * dt;
    let sigma_next = sigma + sigma_dot_next * dt;
    Ok((sigma_next, sigma_dot_next, v))
}
