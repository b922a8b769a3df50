use serde::{Deserialize, Serialize};

fn default_window() -> usize {
    3
}

/// Settings of the measurement-only extremum detector.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct DetectorSettings {
    /// Confirmation window N: samples that must keep moving away from a
    /// candidate before it is accepted.
    #[serde(default = "default_window")]
    pub confirm_window: usize,
    /// Hysteresis band around the candidate value, in sigma units.
    #[serde(default)]
    pub hysteresis: f64,
}

impl Default for DetectorSettings {
    fn default() -> Self {
        DetectorSettings {
            confirm_window: default_window(),
            hysteresis: 0.0,
        }
    }
}

impl DetectorSettings {
    pub fn validate(&self) -> crate::Result<()> {
        if self.confirm_window == 0 {
            return Err(crate::EssmcError::Config(
                "detector.confirm_window must be >= 1".into(),
            ));
        }
        if !(self.hysteresis.is_finite() && self.hysteresis >= 0.0) {
            return Err(crate::EssmcError::Config(
                "detector.hysteresis must be finite and >= 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    value: f64,
    /// Trend direction before the candidate appeared.
    from_dir: i8,
    /// Consecutive samples past the hysteresis band on the reversal side.
    against: usize,
    /// Samples spent inside the band (trend pause).
    flat: usize,
}

/// Trend-reversal extremum detector over the sampled sliding variable.
///
/// A candidate is opened when the sample-to-sample trend reverses or
/// pauses; it is confirmed as an extremum once `confirm_window`
/// consecutive samples sit beyond the hysteresis band on the reversal
/// side. A pause that later resumes the old direction is reported as a
/// horizontal flex point if it lasted longer than the window, otherwise
/// it is discarded as noise.
#[derive(Debug, Clone)]
pub struct ExtremumDetector {
    settings: DetectorSettings,
    prev: Option<f64>,
    dir: i8,
    candidate: Option<Candidate>,
}

impl ExtremumDetector {
    pub fn new(settings: DetectorSettings) -> Self {
        ExtremumDetector {
            settings,
            prev: None,
            dir: 0,
            candidate: None,
        }
    }

    pub fn reset(&mut self) {
        self.prev = None;
        self.dir = 0;
        self.candidate = None;
    }

    /// Feed one sample; returns the confirmed extremum value, if any.
    pub fn update(&mut self, s: f64) -> Option<f64> {
        let prev = self.prev.replace(s)?;
        let n = self.settings.confirm_window;
        let eps = self.settings.hysteresis;

        if let Some(c) = self.candidate.as_mut() {
            // Signed distance along the old trend; positive = resumed.
            let along = (s - c.value) * c.from_dir as f64;
            if along > eps {
                let flex = c.flat > n;
                let value = c.value;
                self.dir = c.from_dir;
                self.candidate = None;
                return flex.then_some(value);
            } else if along < -eps {
                c.against += 1;
                if c.against >= n {
                    let value = c.value;
                    self.dir = -c.from_dir;
                    self.candidate = None;
                    return Some(value);
                }
            } else {
                c.flat += 1;
                c.against = 0;
            }
            return None;
        }

        let delta = s - prev;
        let step_dir: i8 = if delta > 0.0 {
            1
        } else if delta < 0.0 {
            -1
        } else {
            0
        };
        match (self.dir, step_dir) {
            (0, 0) => {}
            (0, d) => self.dir = d,
            (d, sd) if sd == d => {}
            (d, _) => {
                // Reversal or pause: the previous sample is the candidate.
                let mut c = Candidate {
                    value: prev,
                    from_dir: d,
                    against: 0,
                    flat: 0,
                };
                if (s - prev) * (d as f64) < -eps {
                    c.against = 1;
                } else {
                    c.flat = 1;
                }
                if c.against >= n {
                    self.dir = -d;
                    return Some(prev);
                }
                self.candidate = Some(c);
            }
        }
        None
    }
}
