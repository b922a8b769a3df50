use super::time_optimal::time_optimal_control;
use super::{ControllerParams, Observation, SwitchingLaw};
use crate::{EssmcError, Result};

/// Auxiliary switch-off parameter of the fuel-optimal law.
///
/// Algebraically equal to `K / (2K - 1 - 2 sqrt(K(K-1))) - 1/2`, written
/// with the rationalised denominator so it stays stable for large K.
/// `psi(1) = 1/2` reproduces the time-optimal curve; psi grows without
/// bound as K does, flattening the switch-off curve onto the x1 axis.
pub fn fuel_optimal_psi(k: f64) -> Result<f64> {
    if !(k.is_finite() && k >= 1.0) {
        return Err(EssmcError::Domain(format!(
            "fuel-optimal psi needs K >= 1, got {k}"
        )));
    }
    Ok(k * (2.0 * k - 1.0 + 2.0 * (k * (k - 1.0)).sqrt()) - 0.5)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Mode {
    /// Full authority toward the switch-off curve.
    Bang1,
    /// Free drift between the switch-off curve and the braking curve.
    Coast,
    /// Full authority along the braking curve to the origin.
    FinalBang,
}

/// Three-mode fuel-optimal controller for the double integrator.
///
/// Drives time-optimally until the trajectory crosses the switch-off
/// curve `x1 = -(psi/U) x2 |x2|`, coasts to the braking curve
/// `x1 = -x2 |x2| / (2U)`, then brakes to the origin. Curve crossings are
/// detected from the sign change of the curve residual between
/// consecutive samples, ties breaking toward switching.
#[derive(Debug, Clone)]
pub struct FuelOptimal {
    u_max: f64,
    psi: f64,
    mode: Mode,
    prev_residual: Option<f64>,
}

impl FuelOptimal {
    pub fn new(u_max: f64, k: f64) -> Result<Self> {
        Ok(FuelOptimal {
            u_max,
            psi: fuel_optimal_psi(k)?,
            mode: Mode::Bang1,
            prev_residual: None,
        })
    }

    fn gamma_residual(&self, x1: f64, x2: f64) -> f64 {
        x1 + x2 * x2.abs() / (2.0 * self.u_max)
    }

    fn gamma_k_residual(&self, x1: f64, x2: f64) -> f64 {
        x1 + self.psi * x2 * x2.abs() / self.u_max
    }

    fn classify(&self, x1: f64, x2: f64) -> Mode {
        let r_gamma = self.gamma_residual(x1, x2);
        let r_k = self.gamma_k_residual(x1, x2);
        if r_gamma == 0.0 {
            Mode::FinalBang
        } else if r_k == 0.0 || r_k * r_gamma < 0.0 {
            Mode::Coast
        } else {
            Mode::Bang1
        }
    }
}

impl SwitchingLaw for FuelOptimal {
    fn name(&self) -> &'static str {
        "fuel-optimal"
    }

    fn reset(&mut self, sigma0: f64, sigma_dot0: f64) {
        self.mode = self.classify(sigma0, sigma_dot0);
        self.prev_residual = None;
    }

    fn control(&mut self, _t: f64, obs: &Observation) -> f64 {
        let (x1, x2) = (obs.sigma, obs.sigma_dot);
        match self.mode {
            Mode::Bang1 => {
                let r = self.gamma_k_residual(x1, x2);
                if let Some(p) = self.prev_residual.filter(|p| p * r <= 0.0) {
                    let r_gamma = self.gamma_residual(x1, x2);
                    // For K near 1 both curves coincide and can be crossed
                    // in the same sample; skip the empty coast then.
                    if p * r_gamma <= 0.0 {
                        self.mode = Mode::FinalBang;
                        self.prev_residual = None;
                        return time_optimal_control(x1, x2, self.u_max);
                    }
                    self.mode = Mode::Coast;
                    self.prev_residual = Some(r_gamma);
                    return 0.0;
                }
                self.prev_residual = Some(r);
                time_optimal_control(x1, x2, self.u_max)
            }
            Mode::Coast => {
                let r = self.gamma_residual(x1, x2);
                if self.prev_residual.is_some_and(|p| p * r <= 0.0) {
                    self.mode = Mode::FinalBang;
                    self.prev_residual = None;
                    return time_optimal_control(x1, x2, self.u_max);
                }
                self.prev_residual = Some(r);
                0.0
            }
            Mode::FinalBang => time_optimal_control(x1, x2, self.u_max),
        }
    }
}

pub(super) fn check(params: &ControllerParams) -> Result<()> {
    params.resolved_u_max()?;
    let k = params.k_factor.unwrap_or(2.0);
    if !(k.is_finite() && k >= 1.0) {
        return Err(EssmcError::Config("fuel-optimal requires K >= 1".into()));
    }
    Ok(())
}

pub(super) fn build(params: &ControllerParams) -> Result<Box<dyn SwitchingLaw>> {
    check(params)?;
    Ok(Box::new(FuelOptimal::new(
        params.resolved_u_max()?,
        params.k_factor.unwrap_or(2.0),
    )?))
}
