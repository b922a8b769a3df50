//! Plant-dependent tuning diagnostics.
//!
//! Unlike the structural checks run at build time, these never fail on an
//! infeasible tuning: every applicable inequality is evaluated and the
//! violated ones are reported by name, so a caller can print a diagnosis
//! instead of a bare error. Structurally unusable inputs (missing fields,
//! non-finite numbers) still error.

use serde::Serialize;

use super::{find, ControllerParams};
use crate::sim::PlantParams;
use crate::{EssmcError, Result};

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ValidationReport {
    pub kind: String,
    /// All conditions required by the law's own convergence theory hold.
    pub feasible: bool,
    /// Twisting-convergence tuning conditions hold.
    pub twisting: bool,
    /// Monotonic-convergence tuning conditions hold (sosmc only; a
    /// stronger, optional property: at most one zero crossing of sigma).
    pub monotonic: bool,
    /// es-sosmc degenerate case beta2 = beta1; accepted, but the law then
    /// reproduces the conventional sub-optimal controller exactly.
    pub recovery: bool,
    /// Names of the required inequalities that failed.
    pub violated: Vec<String>,
}

impl ValidationReport {
    fn new(kind: &str) -> Self {
        ValidationReport {
            kind: kind.to_string(),
            feasible: false,
            twisting: false,
            monotonic: false,
            recovery: false,
            violated: Vec::new(),
        }
    }
}

/// Dispatch to the registered validator for `params.kind`.
pub fn validate_params(params: &ControllerParams, plant: &PlantParams) -> Result<ValidationReport> {
    let entry = find(&params.kind)?;
    (entry.validate)(params, plant)
}

/// Sanity of the raw numbers the inequalities divide by. Feasibility of
/// the tuning itself is *not* checked here; that goes into the report.
fn check_plant_numbers(plant: &PlantParams) -> Result<()> {
    for (name, value) in [
        ("delta", plant.delta),
        ("u_max", plant.u_max),
        ("gamma_m", plant.gamma_min),
        ("gamma_M", plant.gamma_max),
    ] {
        if !value.is_finite() {
            return Err(EssmcError::Config(format!("plant.{name} must be finite")));
        }
    }
    if plant.delta < 0.0
        || plant.u_max <= 0.0
        || plant.gamma_min <= 0.0
        || plant.gamma_max < plant.gamma_min
    {
        return Err(EssmcError::Config(
            "plant bounds need delta >= 0, u_max > 0, 0 < gamma_m <= gamma_M".into(),
        ));
    }
    Ok(())
}

fn required(value: Option<f64>, name: &str) -> Result<f64> {
    match value {
        Some(v) if v.is_finite() => Ok(v),
        _ => Err(EssmcError::Config(format!(
            "controller.{name} is required and must be finite"
        ))),
    }
}

fn resolved_authority(params: &ControllerParams, plant: &PlantParams) -> Result<f64> {
    let u = params.u_max.unwrap_or(plant.u_max);
    if u.is_finite() && u > 0.0 {
        Ok(u)
    } else {
        Err(EssmcError::Config("controller.u_max must be > 0".into()))
    }
}

fn authority_dominates(report: &mut ValidationReport, plant: &PlantParams, u: f64) -> bool {
    let ok = u > plant.delta / plant.gamma_min;
    if !ok {
        report.violated.push("U > delta/gamma_m".into());
    }
    ok
}

pub fn validate_sosmc(params: &ControllerParams, plant: &PlantParams) -> Result<ValidationReport> {
    check_plant_numbers(plant)?;
    let beta1 = required(params.beta1, "beta1")?;
    let alpha = params.alpha_star.unwrap_or(1.0);
    if !alpha.is_finite() {
        return Err(EssmcError::Config(
            "controller.alpha_star must be finite".into(),
        ));
    }
    let u = resolved_authority(params, plant)?;

    let mut report = ValidationReport::new("sosmc");
    let plant_ok = authority_dominates(&mut report, plant, u);
    let beta_ok = (0.0..1.0).contains(&beta1);
    if !beta_ok {
        report.violated.push("0 <= beta1 < 1".into());
    }
    let alpha_ok = alpha >= 1.0;
    if !alpha_ok {
        report.violated.push("alpha_star >= 1".into());
    }

    let twist_threshold = (2.0 * plant.delta + (1.0 - beta1) * plant.gamma_max * u)
        / ((1.0 + beta1) * plant.gamma_min * u);
    let twist_ok = alpha > twist_threshold;
    if plant_ok && beta_ok && alpha_ok && !twist_ok {
        report
            .violated
            .push("alpha_star > (2*delta + (1-beta1)*gamma_M*U)/((1+beta1)*gamma_m*U)".into());
    }
    report.twisting = plant_ok && beta_ok && alpha_ok && twist_ok;
    report.feasible = report.twisting;

    // Stronger optional condition; reported as a flag, not a violation.
    report.monotonic = report.twisting && beta1 > 0.0 && {
        let mono_threshold =
            (plant.delta + (1.0 - beta1) * plant.gamma_max * u) / (beta1 * plant.gamma_min * u);
        alpha > mono_threshold
    };
    Ok(report)
}

pub fn validate_es_sosmc(
    params: &ControllerParams,
    plant: &PlantParams,
) -> Result<ValidationReport> {
    check_plant_numbers(plant)?;
    let beta1 = required(params.beta1, "beta1")?;
    let beta2 = required(params.beta2, "beta2")?;
    let u = resolved_authority(params, plant)?;

    let mut report = ValidationReport::new("es-sosmc");
    let plant_ok = authority_dominates(&mut report, plant, u);
    let beta1_ok = (0.0..1.0).contains(&beta1);
    if !beta1_ok {
        report.violated.push("0 <= beta1 < 1".into());
    }
    let beta2_ok = beta2 > -1.0 && beta2 <= beta1;
    if !beta2_ok {
        report.violated.push("-1 < beta2 <= beta1".into());
    }
    // The theory behind the sum constraint assumes unit gain; folding in
    // gamma_m keeps it conservative for uncertain-gain plants.
    let sum_ok = beta1 + beta2 > 2.0 * plant.delta / (plant.gamma_min * u);
    if !sum_ok {
        report
            .violated
            .push("beta1 + beta2 > 2*delta/(gamma_m*U)".into());
    }

    report.recovery = beta2 == beta1;
    report.twisting = plant_ok && beta1_ok && beta2_ok && sum_ok;
    report.feasible = report.twisting;
    // The coasting band makes sigma overshoot by design; no monotonic
    // tuning condition exists for this law.
    report.monotonic = false;
    Ok(report)
}

pub fn validate_time_optimal(
    params: &ControllerParams,
    plant: &PlantParams,
) -> Result<ValidationReport> {
    check_plant_numbers(plant)?;
    let u = resolved_authority(params, plant)?;
    let mut report = ValidationReport::new("time-optimal");
    report.feasible = authority_dominates(&mut report, plant, u);
    Ok(report)
}

pub fn validate_fuel_optimal(
    params: &ControllerParams,
    plant: &PlantParams,
) -> Result<ValidationReport> {
    check_plant_numbers(plant)?;
    let u = resolved_authority(params, plant)?;
    let k = params.k_factor.unwrap_or(2.0);
    if !k.is_finite() {
        return Err(EssmcError::Config("controller.k must be finite".into()));
    }
    let mut report = ValidationReport::new("fuel-optimal");
    let plant_ok = authority_dominates(&mut report, plant, u);
    let k_ok = k >= 1.0;
    if !k_ok {
        report.violated.push("K >= 1".into());
    }
    report.feasible = plant_ok && k_ok;
    Ok(report)
}

pub fn validate_off(_params: &ControllerParams, plant: &PlantParams) -> Result<ValidationReport> {
    check_plant_numbers(plant)?;
    let mut report = ValidationReport::new("off");
    report.feasible = true;
    Ok(report)
}
