use super::detector::ExtremumDetector;
use super::{ControllerParams, Observation, SwitchingLaw};
use crate::util::sign;
use crate::{EssmcError, Result};

/// Shared machinery of the sub-optimal family: the initial action, the
/// extremum memory and the phase switch at the first confirmed extremum.
///
/// Both laws drive `u = -U sign(sigma - sigma(0))` until the detector
/// confirms the first extremum t_M1, then hand over to their main law
/// with `sigma_M` tracking every confirmed extremum. A run that starts
/// exactly at rest is already at an extremum, so the main phase begins
/// immediately with `sigma_M = sigma(0)`.
#[derive(Debug, Clone)]
pub struct SubOptimalCore {
    sigma0: f64,
    sigma_m: f64,
    main_phase: bool,
    detector: ExtremumDetector,
}

impl SubOptimalCore {
    fn new(params: &ControllerParams) -> Result<Self> {
        params.detector.validate()?;
        Ok(SubOptimalCore {
            sigma0: 0.0,
            sigma_m: 0.0,
            main_phase: true,
            detector: ExtremumDetector::new(params.detector),
        })
    }

    fn reset(&mut self, sigma0: f64, sigma_dot0: f64) {
        self.sigma0 = sigma0;
        self.sigma_m = sigma0;
        self.main_phase = sigma_dot0 == 0.0;
        self.detector.reset();
    }

    fn observe(&mut self, sigma: f64) {
        if let Some(extremum) = self.detector.update(sigma) {
            self.sigma_m = extremum;
            self.main_phase = true;
        }
    }
}

/// Conventional sub-optimal second-order sliding mode controller.
#[derive(Debug, Clone)]
pub struct Sosmc {
    core: SubOptimalCore,
    u_max: f64,
    beta1: f64,
    alpha_star: f64,
}

impl SwitchingLaw for Sosmc {
    fn name(&self) -> &'static str {
        "sosmc"
    }

    fn reset(&mut self, sigma0: f64, sigma_dot0: f64) {
        self.core.reset(sigma0, sigma_dot0);
    }

    fn control(&mut self, _t: f64, obs: &Observation) -> f64 {
        let s = obs.sigma;
        self.core.observe(s);
        if !self.core.main_phase {
            return -self.u_max * sign(s - self.core.sigma0);
        }
        let e = s - self.beta1 * self.core.sigma_m;
        // Full gain while the trajectory is on the far side of the
        // threshold, boosted gain once it has overshot it.
        let alpha = if e * self.core.sigma_m >= 0.0 {
            1.0
        } else {
            self.alpha_star
        };
        -alpha * self.u_max * sign(e)
    }

    fn sigma_m(&self) -> Option<f64> {
        Some(self.core.sigma_m)
    }
}

/// Energy-saving variant: two half-authority relays whose thresholds
/// bracket a zero-control band.
#[derive(Debug, Clone)]
pub struct EsSosmc {
    core: SubOptimalCore,
    u_max: f64,
    beta1: f64,
    beta2: f64,
}

impl SwitchingLaw for EsSosmc {
    fn name(&self) -> &'static str {
        "es-sosmc"
    }

    fn reset(&mut self, sigma0: f64, sigma_dot0: f64) {
        self.core.reset(sigma0, sigma_dot0);
    }

    fn control(&mut self, _t: f64, obs: &Observation) -> f64 {
        let s = obs.sigma;
        self.core.observe(s);
        if !self.core.main_phase {
            return -self.u_max * sign(s - self.core.sigma0);
        }
        let sm = self.core.sigma_m;
        -0.5 * self.u_max * (sign(s - self.beta1 * sm) + sign(s - self.beta2 * sm))
    }

    fn sigma_m(&self) -> Option<f64> {
        Some(self.core.sigma_m)
    }
}

pub(super) fn check_sosmc(params: &ControllerParams) -> Result<()> {
    params.resolved_u_max()?;
    params.detector.validate()?;
    let beta1 = params
        .beta1
        .ok_or_else(|| EssmcError::Config("sosmc requires beta1".into()))?;
    if !(0.0..1.0).contains(&beta1) {
        return Err(EssmcError::Config("sosmc requires 0 <= beta1 < 1".into()));
    }
    let alpha = params.alpha_star.unwrap_or(1.0);
    if !(alpha.is_finite() && alpha >= 1.0) {
        return Err(EssmcError::Config("sosmc requires alpha_star >= 1".into()));
    }
    Ok(())
}

pub(super) fn build_sosmc(params: &ControllerParams) -> Result<Box<dyn SwitchingLaw>> {
    check_sosmc(params)?;
    Ok(Box::new(Sosmc {
        core: SubOptimalCore::new(params)?,
        u_max: params.resolved_u_max()?,
        beta1: params.beta1.unwrap(),
        alpha_star: params.alpha_star.unwrap_or(1.0),
    }))
}

pub(super) fn check_es(params: &ControllerParams) -> Result<()> {
    params.resolved_u_max()?;
    params.detector.validate()?;
    let beta1 = params
        .beta1
        .ok_or_else(|| EssmcError::Config("es-sosmc requires beta1".into()))?;
    let beta2 = params
        .beta2
        .ok_or_else(|| EssmcError::Config("es-sosmc requires beta2".into()))?;
    if !(0.0..1.0).contains(&beta1) {
        return Err(EssmcError::Config(
            "es-sosmc requires 0 <= beta1 < 1".into(),
        ));
    }
    // beta2 = beta1 is the recovery edge and stays allowed here.
    if !(beta2 > -1.0 && beta2 <= beta1) {
        return Err(EssmcError::Config(
            "es-sosmc requires -1 < beta2 <= beta1".into(),
        ));
    }
    Ok(())
}

pub(super) fn build_es(params: &ControllerParams) -> Result<Box<dyn SwitchingLaw>> {
    check_es(params)?;
    Ok(Box::new(EsSosmc {
        core: SubOptimalCore::new(params)?,
        u_max: params.resolved_u_max()?,
        beta1: params.beta1.unwrap(),
        beta2: params.beta2.unwrap(),
    }))
}
