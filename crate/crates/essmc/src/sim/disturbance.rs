use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::surface::{accel_samples, generate_surface, SurfaceParams};
use crate::util::clamp_abs;
use crate::{EssmcError, Result};

/// Matched-disturbance model. Every realization is clamped so that
/// `|f(t)| <= delta` holds sample by sample, whatever the parameters say.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind")]
pub enum DisturbanceSpec {
    #[serde(rename = "constant")]
    Constant { value: f64 },
    #[serde(rename = "sinusoid")]
    Sinusoid {
        amplitude: f64,
        /// Angular frequency in rad/s.
        omega: f64,
        #[serde(default)]
        phase: f64,
    },
    /// Per-step iid uniform noise on `[-amplitude, amplitude]`
    /// (amplitude defaults to delta). White by construction: it cannot
    /// hold a coasting trajectory in place for more than a step.
    #[serde(rename = "seeded-noise")]
    SeededNoise {
        #[serde(default)]
        amplitude: Option<f64>,
        /// Overrides the run seed when present.
        #[serde(default)]
        seed: Option<u64>,
    },
    /// Adversarial `f = delta * sign(sigma_dot)`: always pushes against
    /// braking and with the drive, which realizes the worst enumerated
    /// contraction profile of the cycle analysis.
    #[serde(rename = "worst-case-flip")]
    WorstCaseFlip,
    /// Acceleration of a generated rough-surface profile, scaled then
    /// clamped. The surface carries its own seed so that scenario runs
    /// can share one realization across controllers.
    #[serde(rename = "surface-driven")]
    SurfaceDriven { scale: f64, surface: SurfaceParams },
}

impl Default for DisturbanceSpec {
    fn default() -> Self {
        DisturbanceSpec::Constant { value: 0.0 }
    }
}

impl DisturbanceSpec {
    pub fn validate(&self, delta: f64) -> Result<()> {
        match self {
            DisturbanceSpec::Constant { value } => {
                if !value.is_finite() {
                    return Err(EssmcError::Config(
                        "disturbance.value must be finite".into(),
                    ));
                }
            }
            DisturbanceSpec::Sinusoid {
                amplitude,
                omega,
                phase,
            } => {
                if !(amplitude.is_finite() && omega.is_finite() && phase.is_finite()) {
                    return Err(EssmcError::Config(
                        "sinusoid disturbance parameters must be finite".into(),
                    ));
                }
            }
            DisturbanceSpec::SeededNoise { amplitude, .. } => {
                if let Some(a) = amplitude {
                    if !a.is_finite() || *a < 0.0 {
                        return Err(EssmcError::Config(
                            "noise amplitude must be finite and >= 0".into(),
                        ));
                    }
                }
            }
            DisturbanceSpec::WorstCaseFlip => {}
            DisturbanceSpec::SurfaceDriven { scale, surface } => {
                if !scale.is_finite() {
                    return Err(EssmcError::Config(
                        "disturbance.scale must be finite".into(),
                    ));
                }
                surface.validate()?;
            }
        }
        let _ = delta;
        Ok(())
    }

    /// Instantiate the runtime sampler. `seed` is the run seed; `dt` is the
    /// simulation step (used to grid precomputed kinds).
    pub fn realize(&self, seed: u64, delta: f64, dt: f64) -> Result<DisturbanceRealization> {
        self.validate(delta)?;
        Ok(match self {
            DisturbanceSpec::Constant { value } => {
                DisturbanceRealization::Constant(clamp_abs(*value, delta))
            }
            DisturbanceSpec::Sinusoid {
                amplitude,
                omega,
                phase,
            } => DisturbanceRealization::Sinusoid {
                amplitude: *amplitude,
                omega: *omega,
                phase: *phase,
                delta,
            },
            DisturbanceSpec::SeededNoise {
                amplitude,
                seed: own,
            } => {
                let a = amplitude.unwrap_or(delta).min(delta);
                DisturbanceRealization::Noise {
                    rng: ChaCha8Rng::seed_from_u64(own.unwrap_or(seed)),
                    dist: Uniform::new_inclusive(-a, a),
                }
            }
            DisturbanceSpec::WorstCaseFlip => DisturbanceRealization::Flip { delta },
            DisturbanceSpec::SurfaceDriven { scale, surface } => {
                let mut params = surface.clone();
                params.dt = dt;
                let profile = generate_surface(&params)?;
                let samples = accel_samples(&profile)
                    .into_iter()
                    .map(|a| clamp_abs(scale * a, delta))
                    .collect();
                DisturbanceRealization::Samples { samples, dt }
            }
        })
    }
}

/// Stateful per-run sampler produced by [`DisturbanceSpec::realize`].
#[derive(Debug, Clone)]
pub enum DisturbanceRealization {
    Constant(f64),
    Sinusoid {
        amplitude: f64,
        omega: f64,
        phase: f64,
        delta: f64,
    },
    Noise {
        rng: ChaCha8Rng,
        dist: Uniform<f64>,
    },
    Flip {
        delta: f64,
    },
    Samples {
        samples: Vec<f64>,
        dt: f64,
    },
}

impl DisturbanceRealization {
    /// Precomputed sample array, already clamped by the caller.
    pub fn from_samples(samples: Vec<f64>, dt: f64) -> Self {
        DisturbanceRealization::Samples { samples, dt }
    }

    /// One disturbance sample, held over the coming step.
    pub fn sample(&mut self, t: f64, sigma_dot: f64) -> f64 {
        match self {
            DisturbanceRealization::Constant(value) => *value,
            DisturbanceRealization::Sinusoid {
                amplitude,
                omega,
                phase,
                delta,
            } => clamp_abs(*amplitude * (*omega * t + *phase).sin(), *delta),
            DisturbanceRealization::Noise { rng, dist } => dist.sample(rng),
            DisturbanceRealization::Flip { delta } => *delta * crate::util::sign(sigma_dot),
            DisturbanceRealization::Samples { samples, dt } => {
                if samples.is_empty() {
                    return 0.0;
                }
                let idx = ((t / *dt).round() as usize).min(samples.len() - 1);
                samples[idx]
            }
        }
    }
}
