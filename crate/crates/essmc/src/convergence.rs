//! Worst-case cycle analysis for the sub-optimal laws.
//!
//! Between consecutive extrema the normalized closed loop (sigma_M = 1,
//! start at rest) runs through at most three parabolic arcs: drive at
//! u = -U down to beta1, coast across the band to beta2, brake at u = +U
//! to the next rest point. With a constant disturbance per arc every arc
//! quantity is in closed form, and each is monotone in the arc's
//! disturbance value, so the worst case over |f| <= Delta lies at the
//! enumerated extremes.
//!
//! One subtlety: an adversarial coast disturbance f_b > 0 can stop the
//! trajectory inside the band before it reaches beta2 ("stall"), which
//! ends the cycle early at sigma_stop in (beta2, beta1). The factor
//! computation caps the braking coast at the critical value that stops
//! exactly at beta2 (then eta picks up |beta2| and the coast time 2d/v_A,
//! both continuous limits of the completing branch); the raw stalled
//! branch is exposed through [`cycle_map`] but kept out of the factors.
//! Stall times are dominated by the capped candidate, and the capped
//! contraction map is what the published tuning landscape reflects.
//!
//! Scale invariance of the double integrator makes the cycle time scale
//! with sqrt(sigma_M) and the contraction ratio scale-free, so the
//! per-cycle maxima Omega (time), Omega-tilde (control-on time only) and
//! eta (next extremum magnitude) summarize the whole transient via a
//! geometric series.

use serde::Serialize;

use crate::{EssmcError, Result};

/// Law selector for the factor computation; alpha* = 1 is assumed for the
/// conventional law, matching the simplified unity-gain setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CycleLaw {
    #[serde(rename = "sosmc")]
    Sosmc,
    #[serde(rename = "es-sosmc")]
    EsSosmc,
}

/// Worst-case per-cycle summary. Case 1 has the first-arc disturbance
/// opposing the drive (f = +Delta), case 2 aiding it (f = -Delta).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CycleFactors {
    pub omega1: f64,
    pub omega2: f64,
    pub omega_on1: f64,
    pub omega_on2: f64,
    pub eta1: f64,
    pub eta2: f64,
}

impl CycleFactors {
    pub fn max_eta(&self) -> f64 {
        self.eta1.max(self.eta2)
    }

    pub fn max_omega(&self) -> f64 {
        self.omega1.max(self.omega2)
    }

    pub fn max_omega_on(&self) -> f64 {
        self.omega_on1.max(self.omega_on2)
    }

    pub fn contractive(&self) -> bool {
        self.max_eta() < 1.0
    }
}

/// Outcome of one normalized cycle under fixed per-arc disturbances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleOutcome {
    /// Value of the next extremum (signed; sigma_M = 1 at cycle start).
    pub next_extremum: f64,
    /// Time from cycle start to the next extremum.
    pub time: f64,
    /// Portion of `time` spent with u != 0.
    pub on_time: f64,
    /// True when the coast arc stopped before reaching beta2.
    pub stalled: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct CostValue {
    pub value: f64,
    pub finite: bool,
}

fn check_cycle_inputs(u: f64, beta1: f64, beta2: f64) -> Result<()> {
    if !(u.is_finite() && u > 0.0) {
        return Err(EssmcError::Domain("cycle map needs finite U > 0".into()));
    }
    if !(0.0..1.0).contains(&beta1) || !(beta2 > -1.0 && beta2 <= beta1) {
        return Err(EssmcError::Domain(
            "cycle map needs 0 <= beta1 < 1 and -1 < beta2 <= beta1".into(),
        ));
    }
    Ok(())
}

/// One normalized extremum-to-extremum map: start at (1, 0) with
/// sigma_M = 1, drive arc under f_a, coast arc under f_b, brake arc under
/// f_c. Reports the raw outcome, including a stalled coast.
pub fn cycle_map(
    u: f64,
    beta1: f64,
    beta2: f64,
    f_a: f64,
    f_b: f64,
    f_c: f64,
) -> Result<CycleOutcome> {
    check_cycle_inputs(u, beta1, beta2)?;
    for f in [f_a, f_b, f_c] {
        if !f.is_finite() {
            return Err(EssmcError::Domain(
                "cycle map disturbances must be finite".into(),
            ));
        }
    }
    if u - f_a <= 0.0 || u + f_c <= 0.0 {
        return Err(EssmcError::Domain(
            "cycle map needs U to dominate the drive and brake disturbances".into(),
        ));
    }

    // Drive arc: sigma from 1 to beta1, accel f_a - u < 0.
    let v_a2 = 2.0 * (u - f_a) * (1.0 - beta1);
    let v_a = v_a2.sqrt();
    let t_a = v_a / (u - f_a);

    // Coast arc across d = beta1 - beta2 under accel f_b.
    let d = beta1 - beta2;
    let (v_b, t_b) = if d == 0.0 {
        (v_a, 0.0)
    } else {
        let mut v_b2 = v_a2 - 2.0 * f_b * d;
        if v_b2 < 0.0 && v_b2 >= -32.0 * f64::EPSILON * v_a2 {
            // the critical coast lands on zero only up to rounding
            v_b2 = 0.0;
        }
        if v_b2 < 0.0 {
            // Stopped inside the band: the extremum is the stall point.
            let stop = beta1 - v_a2 / (2.0 * f_b);
            return Ok(CycleOutcome {
                next_extremum: stop,
                time: t_a + v_a / f_b,
                on_time: t_a,
                stalled: true,
            });
        }
        let v_b = v_b2.sqrt();
        let t_b = if f_b == 0.0 {
            d / v_a
        } else {
            (v_a - v_b) / f_b
        };
        (v_b, t_b)
    };

    // Brake arc: u = +U decelerates, rest at beta2 - v_b^2/(2(U + f_c)).
    let t_c = v_b / (u + f_c);
    let next = beta2 - v_b * v_b / (2.0 * (u + f_c));
    Ok(CycleOutcome {
        next_extremum: next,
        time: t_a + t_b + t_c,
        on_time: t_a + t_c,
        stalled: false,
    })
}

/// Worst-case factors over constant-per-arc disturbances |f| <= Delta.
/// For sosmc the beta2 argument is ignored (no coast arc exists).
pub fn compute_cycle_factors(
    u: f64,
    delta: f64,
    beta1: f64,
    beta2: f64,
    law: CycleLaw,
) -> Result<CycleFactors> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(EssmcError::Domain("Delta must be finite and >= 0".into()));
    }
    if u <= delta {
        return Err(EssmcError::Domain("cycle factors need U > Delta".into()));
    }
    let beta2 = match law {
        CycleLaw::Sosmc => beta1,
        CycleLaw::EsSosmc => beta2,
    };
    check_cycle_inputs(u, beta1, beta2)?;
    let d = beta1 - beta2;

    let mut per_case = [(0.0_f64, 0.0_f64, 0.0_f64); 2];
    for (case, f_a) in [delta, -delta].into_iter().enumerate() {
        let v_a2 = 2.0 * (u - f_a) * (1.0 - beta1);
        // Braking coast capped at the value that stops exactly at beta2.
        let mut coast = vec![-delta];
        if d > 0.0 {
            let f_crit = v_a2 / (2.0 * d);
            coast.push(delta.min(f_crit));
        }
        let (mut eta, mut omega, mut omega_on) = (0.0_f64, 0.0_f64, 0.0_f64);
        for &f_b in &coast {
            for f_c in [delta, -delta] {
                let out = cycle_map(u, beta1, beta2, f_a, f_b, f_c)?;
                debug_assert!(!out.stalled);
                eta = eta.max(out.next_extremum.abs());
                omega = omega.max(out.time);
                omega_on = omega_on.max(out.on_time);
            }
        }
        per_case[case] = (eta, omega, omega_on);
    }

    Ok(CycleFactors {
        eta1: per_case[0].0,
        omega1: per_case[0].1,
        omega_on1: per_case[0].2,
        eta2: per_case[1].0,
        omega2: per_case[1].1,
        omega_on2: per_case[1].2,
    })
}

/// Upper bound on the time to reach the 2-sliding set: initial-velocity
/// kill plus the geometric series of cycle times. Omega here is
/// normalized so that a cycle from extremum sigma_M lasts at most
/// Omega*sqrt(|sigma_M|).
pub fn convergence_time_bound(
    u: f64,
    delta: f64,
    sigma_dot0: f64,
    sigma_m1: f64,
    factors: &CycleFactors,
) -> Result<f64> {
    if u <= delta {
        return Err(EssmcError::Domain("time bound needs U > Delta".into()));
    }
    if !factors.contractive() {
        return Err(EssmcError::Domain(
            "time bound undefined: configuration is not contractive".into(),
        ));
    }
    let reach = sigma_dot0.abs() / (u - delta);
    let series = factors.max_omega() * sigma_m1.abs().sqrt() / (1.0 - factors.max_eta().sqrt());
    Ok(reach + series)
}

fn cost_from_factors(factors: &CycleFactors) -> CostValue {
    if factors.contractive() {
        CostValue {
            value: factors.max_omega_on() / (1.0 - factors.max_eta().sqrt()),
            finite: true,
        }
    } else {
        CostValue {
            value: f64::INFINITY,
            finite: false,
        }
    }
}

/// Energy cost J of the energy-saving law: worst-case control-on time per
/// sqrt(sigma_M), summed over the contraction series. Dimensionless once
/// multiplied by U*sqrt(|sigma_M1|) it bounds the transient fuel.
pub fn cost_es(u: f64, delta: f64, beta1: f64, beta2: f64) -> Result<CostValue> {
    let factors = compute_cycle_factors(u, delta, beta1, beta2, CycleLaw::EsSosmc)?;
    Ok(cost_from_factors(&factors))
}

/// Conventional-law counterpart J-hat.
pub fn cost_sosmc(u: f64, delta: f64, beta1: f64) -> Result<CostValue> {
    let factors = compute_cycle_factors(u, delta, beta1, beta1, CycleLaw::Sosmc)?;
    Ok(cost_from_factors(&factors))
}
