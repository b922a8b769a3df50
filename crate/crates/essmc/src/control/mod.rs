//! Switching laws and their parameter validation.
//!
//! Every law implements [`SwitchingLaw`] and is registered by name in a
//! static strategy table; configs and the CLI select laws through
//! [`build_controller`]. The sliding-mode laws read only the sampled
//! sliding variable; the classical optimal laws use the full state.

mod detector;
mod fuel_optimal;
mod off;
mod suboptimal;
mod time_optimal;
mod validate;

pub use detector::{DetectorSettings, ExtremumDetector};
pub use fuel_optimal::{fuel_optimal_psi, FuelOptimal};
pub use off::Off;
pub use suboptimal::{EsSosmc, Sosmc};
pub use time_optimal::{minimum_time, time_optimal_control, TimeOptimal};
pub use validate::{validate_params, ValidationReport};

use serde::{Deserialize, Serialize};

use crate::sim::PlantParams;
use crate::{EssmcError, Result};

/// What a controller sees each step. Sliding-mode laws must ignore
/// `sigma_dot`; it is carried for the full-state optimal laws.
#[derive(Debug, Clone, Copy)]
pub struct Observation {
    pub sigma: f64,
    pub sigma_dot: f64,
}

/// A sampled-data switching law.
pub trait SwitchingLaw {
    fn name(&self) -> &'static str;

    /// Re-initialise the internal state machine for a run starting at
    /// `(sigma0, sigma_dot0)`. The initial velocity is used only to decide
    /// whether the run starts exactly at an extremum.
    fn reset(&mut self, sigma0: f64, sigma_dot0: f64);

    /// Command for the coming step.
    fn control(&mut self, t: f64, obs: &Observation) -> f64;

    /// Current extremum memory, for laws that keep one.
    fn sigma_m(&self) -> Option<f64> {
        None
    }
}

/// Parameters for any registered law. Fields irrelevant to a kind are
/// ignored by it; required fields are checked at build time.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ControllerParams {
    /// Registered law name: one of [`available_kinds`].
    pub kind: String,
    /// Authority; defaults to the plant authority when run via a config.
    #[serde(default)]
    pub u_max: Option<f64>,
    #[serde(default)]
    pub beta1: Option<f64>,
    #[serde(default)]
    pub beta2: Option<f64>,
    /// Modulation factor of the conventional sub-optimal law; default 1.
    #[serde(default)]
    pub alpha_star: Option<f64>,
    /// Response-time constraint of the fuel-optimal law; default 2.
    #[serde(default, rename = "k")]
    pub k_factor: Option<f64>,
    #[serde(default)]
    pub detector: DetectorSettings,
}

impl ControllerParams {
    pub fn named(kind: &str) -> Self {
        ControllerParams {
            kind: kind.to_string(),
            u_max: None,
            beta1: None,
            beta2: None,
            alpha_star: None,
            k_factor: None,
            detector: DetectorSettings::default(),
        }
    }

    pub fn off() -> Self {
        Self::named("off")
    }

    pub fn time_optimal(u_max: Option<f64>) -> Self {
        let mut p = Self::named("time-optimal");
        p.u_max = u_max;
        p
    }

    pub fn fuel_optimal(u_max: Option<f64>, k: f64) -> Self {
        let mut p = Self::named("fuel-optimal");
        p.u_max = u_max;
        p.k_factor = Some(k);
        p
    }

    pub fn sosmc(u_max: Option<f64>, beta1: f64) -> Self {
        let mut p = Self::named("sosmc");
        p.u_max = u_max;
        p.beta1 = Some(beta1);
        p
    }

    pub fn es_sosmc(u_max: Option<f64>, beta1: f64, beta2: f64) -> Self {
        let mut p = Self::named("es-sosmc");
        p.u_max = u_max;
        p.beta1 = Some(beta1);
        p.beta2 = Some(beta2);
        p
    }

    pub fn with_u_max(mut self, u_max: f64) -> Self {
        self.u_max = Some(u_max);
        self
    }

    pub fn label(&self) -> String {
        match (self.beta1, self.beta2) {
            (Some(b1), Some(b2)) => format!("{} ({b1}, {b2})", self.kind),
            (Some(b1), None) => format!("{} (beta1 = {b1})", self.kind),
            _ => self.kind.clone(),
        }
    }

    pub fn resolved_u_max(&self) -> Result<f64> {
        match self.u_max {
            Some(u) if u.is_finite() && u > 0.0 => Ok(u),
            Some(_) => Err(EssmcError::Config("controller.u_max must be > 0".into())),
            None => Err(EssmcError::Config(
                "controller.u_max missing and no plant to inherit it from".into(),
            )),
        }
    }

    /// Per-kind structural invariants, without reference to a plant.
    pub fn validate_structure(&self) -> Result<()> {
        let entry = find(&self.kind)?;
        (entry.check)(self)
    }
}

/// One registry row: a named strategy with its builder, structural check
/// and plant-dependent validator.
pub struct LawEntry {
    pub kind: &'static str,
    pub check: fn(&ControllerParams) -> Result<()>,
    pub build: fn(&ControllerParams) -> Result<Box<dyn SwitchingLaw>>,
    pub validate: fn(&ControllerParams, &PlantParams) -> Result<ValidationReport>,
}

/// The strategy table. Order is the presentation order of `available_kinds`.
pub fn registry() -> &'static [LawEntry] {
    &[
        LawEntry {
            kind: "time-optimal",
            check: time_optimal::check,
            build: time_optimal::build,
            validate: validate::validate_time_optimal,
        },
        LawEntry {
            kind: "fuel-optimal",
            check: fuel_optimal::check,
            build: fuel_optimal::build,
            validate: validate::validate_fuel_optimal,
        },
        LawEntry {
            kind: "sosmc",
            check: suboptimal::check_sosmc,
            build: suboptimal::build_sosmc,
            validate: validate::validate_sosmc,
        },
        LawEntry {
            kind: "es-sosmc",
            check: suboptimal::check_es,
            build: suboptimal::build_es,
            validate: validate::validate_es_sosmc,
        },
        LawEntry {
            kind: "off",
            check: off::check,
            build: off::build,
            validate: validate::validate_off,
        },
    ]
}

pub fn available_kinds() -> Vec<&'static str> {
    registry().iter().map(|e| e.kind).collect()
}

pub fn find(kind: &str) -> Result<&'static LawEntry> {
    registry().iter().find(|e| e.kind == kind).ok_or_else(|| {
        EssmcError::Config(format!(
            "unknown controller kind '{kind}', expected one of: {}",
            available_kinds().join(", ")
        ))
    })
}

/// Look the law up by name, check its structural invariants and build it.
pub fn build_controller(params: &ControllerParams) -> Result<Box<dyn SwitchingLaw>> {
    let entry = find(&params.kind)?;
    (entry.check)(params)?;
    (entry.build)(params)
}
