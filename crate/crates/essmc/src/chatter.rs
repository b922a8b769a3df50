//! Chattering prediction under a first-order actuator lag.
//!
//! With the lag in the loop the relay nonlinearity sustains a limit cycle;
//! its first-harmonic approximation solves N(sigma_A) W(j omega) + 1 = 0
//! where N is the describing function of the two-relay law and
//! W(s) = -1/(s^2 (mu s + 1)) the linear part seen by it.
//!
//! Two amplitude conventions are exposed deliberately. The closed form
//! reports |W(omega_c)|, i.e. the amplitude normalized by the DF gain;
//! the numeric balance solves |N| |W| = 1 and therefore carries the full
//! first-harmonic factor (2 U / pi) sqrt(R^2 + I^2). They differ by that
//! constant; both are surfaced so the discrepancy is visible rather than
//! silently patched. The balance frequency is identical either way.

use serde::Serialize;

use crate::{EssmcError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl ComplexValue {
    pub fn magnitude(&self) -> f64 {
        self.re.hypot(self.im)
    }

    /// Principal-value argument in radians.
    pub fn arg(&self) -> f64 {
        self.im.atan2(self.re)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ChatterPrediction {
    /// Oscillation angular frequency, rad/s.
    pub omega_c: f64,
    /// Oscillation amplitude in sigma units (see module docs for the
    /// convention per method).
    #[serde(rename = "sigma_A")]
    pub sigma_a: f64,
    /// "closed-form" or "numeric-balance".
    pub method: String,
    /// DF angle phi = -atan((beta1+beta2)/(sqrt(1-b1^2)+sqrt(1-b2^2))).
    pub phase_deg: f64,
    pub mu: f64,
    pub beta1: f64,
    pub beta2: f64,
}

fn check_betas(beta1: f64, beta2: f64) -> Result<()> {
    if !(beta1.is_finite() && beta2.is_finite() && beta1.abs() <= 1.0 && beta2.abs() <= 1.0) {
        return Err(EssmcError::Domain(
            "describing function needs |beta1|, |beta2| <= 1".into(),
        ));
    }
    Ok(())
}

/// Real and imaginary DF parts without the 2U/(pi sigma_A) gain.
fn df_shape(beta1: f64, beta2: f64) -> (f64, f64) {
    let r = (1.0 - beta1 * beta1).sqrt() + (1.0 - beta2 * beta2).sqrt();
    let i = beta1 + beta2;
    (r, i)
}

/// Describing function of the two-relay energy-saving law at amplitude
/// sigma_A. beta2 = beta1 collapses to the conventional-law DF
/// (4U / pi sigma_A)(sqrt(1 - beta1^2) + j beta1).
pub fn df_es_sosmc(sigma_a: f64, u: f64, beta1: f64, beta2: f64) -> Result<ComplexValue> {
    check_betas(beta1, beta2)?;
    if !(sigma_a > 0.0) || !sigma_a.is_finite() {
        return Err(EssmcError::Domain(
            "describing function needs sigma_A > 0".into(),
        ));
    }
    let (r, i) = df_shape(beta1, beta2);
    let gain = 2.0 * u / (std::f64::consts::PI * sigma_a);
    Ok(ComplexValue {
        re: gain * r,
        im: gain * i,
    })
}

/// Linear part W(j omega) = -1/(omega^2 + j omega^3 mu).
pub fn plant_response(omega: f64, mu: f64) -> ComplexValue {
    let denom = omega * omega * (1.0 + omega * omega * mu * mu);
    ComplexValue {
        re: -1.0 / denom,
        im: mu / (omega * (1.0 + omega * omega * mu * mu)),
    }
}

fn phase_deg(r: f64, i: f64) -> f64 {
    -(i / r).atan().to_degrees()
}

fn check_mu(mu: f64) -> Result<()> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(EssmcError::Domain("chatter prediction needs mu > 0".into()));
    }
    Ok(())
}

/// Direct evaluation: omega_c = (beta1+beta2)/(mu (sqrt(1-b1^2)+sqrt(1-b2^2)))
/// and sigma_A = |W(omega_c)|. Returns None when beta1 + beta2 <= 0 (the
/// balance phase condition has no crossing: no sustained cycle predicted).
pub fn predict_chatter_closed_form(
    mu: f64,
    beta1: f64,
    beta2: f64,
    _u: f64,
) -> Result<Option<ChatterPrediction>> {
    check_mu(mu)?;
    check_betas(beta1, beta2)?;
    let (r, i) = df_shape(beta1, beta2);
    if i <= 0.0 {
        return Ok(None);
    }
    let omega_c = i / (r * mu);
    let sigma_a = 1.0 / (omega_c * omega_c * (1.0 + mu * mu * omega_c * omega_c).sqrt());
    Ok(Some(ChatterPrediction {
        omega_c,
        sigma_a,
        method: "closed-form".into(),
        phase_deg: phase_deg(r, i),
        mu,
        beta1,
        beta2,
    }))
}

/// Numeric harmonic balance: bisect the phase condition
/// arg W = -180 deg + phi for omega, then take the amplitude from
/// |N(sigma_A)| |W(j omega)| = 1.
pub fn solve_harmonic_balance(
    mu: f64,
    beta1: f64,
    beta2: f64,
    u: f64,
) -> Result<Option<ChatterPrediction>> {
    check_mu(mu)?;
    check_betas(beta1, beta2)?;
    let (r, i) = df_shape(beta1, beta2);
    // arg W = -180 deg - atan(omega mu); the condition reduces to
    // atan(omega mu) = atan(I/R), but bisection keeps the path honest
    // against the stated phase equation.
    let target = (i / r).atan();
    let residual = |omega: f64| (omega * mu).atan() - target;
    if target <= 0.0 {
        return Ok(None);
    }
    let mut lo = 1e-12 / mu;
    let mut hi = 1.0 / mu;
    let mut guard = 0;
    while residual(hi) < 0.0 {
        hi *= 2.0;
        guard += 1;
        assert!(guard < 128, "phase crossing must exist for mu > 0");
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if residual(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let omega_c = 0.5 * (lo + hi);
    let w_mag = plant_response(omega_c, mu).magnitude();
    let sigma_a = 2.0 * u / std::f64::consts::PI * r.hypot(i) * w_mag;
    Ok(Some(ChatterPrediction {
        omega_c,
        sigma_a,
        method: "numeric-balance".into(),
        phase_deg: phase_deg(r, i),
        mu,
        beta1,
        beta2,
    }))
}
