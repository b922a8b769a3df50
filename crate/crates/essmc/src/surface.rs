//! Randomly rough moving-surface excitation.
//!
//! The vertical profile seen by a probe moving at constant speed `nu` over
//! a rough surface is modelled as white noise through a first-order filter
//! with pole `omega0 = 2 pi v0 nu`, which gives the Lorentzian displacement
//! PSD `S(omega) = 2 pi R nu / (omega^2 + omega0^2)` and the classical
//! -2 power-law roll-off. Discretization is the exact zero-order-hold map
//! of the pole, so the step size only limits bandwidth, not stability.
//!
//! Spectral conventions: `theory_psd` and `estimate_psd` are two-sided
//! densities in angular frequency, reported on the positive-frequency
//! grid. Signal variance is `(1/2pi) * integral S(omega) d omega` over the
//! whole axis, i.e. twice the integral of the reported half.

use std::f64::consts::PI;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::util::fmt_sig;
use crate::{EssmcError, Result};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SurfaceParams {
    /// Roughness coefficient (PSD units).
    #[serde(rename = "R")]
    pub roughness: f64,
    /// Relative surface speed in m/s.
    pub nu: f64,
    /// Spatial cutoff in cycles/m.
    pub v0: f64,
    #[serde(default)]
    pub seed: u64,
    /// Sample step in seconds.
    pub dt: f64,
    /// Profile length in seconds.
    pub duration: f64,
}

impl SurfaceParams {
    /// Filter pole in rad/s.
    pub fn omega0(&self) -> f64 {
        2.0 * PI * self.v0 * self.nu
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("R", self.roughness),
            ("nu", self.nu),
            ("v0", self.v0),
            ("dt", self.dt),
            ("duration", self.duration),
        ] {
            if !value.is_finite() {
                return Err(EssmcError::Config(format!("surface.{name} must be finite")));
            }
        }
        if self.roughness < 0.0 {
            return Err(EssmcError::Config("surface.R must be >= 0".into()));
        }
        if self.nu <= 0.0 || self.v0 <= 0.0 || self.dt <= 0.0 || self.duration <= 0.0 {
            return Err(EssmcError::Config(
                "surface needs nu, v0, dt, duration > 0".into(),
            ));
        }
        if self.duration < self.dt {
            return Err(EssmcError::Config(
                "surface.duration must cover at least one step".into(),
            ));
        }
        Ok(())
    }
}

/// One generated realization on the fixed grid. `x0` is the height in
/// meters, `dx0` its velocity from the filter state equation.
#[derive(Debug, Clone)]
pub struct SurfaceProfile {
    pub dt: f64,
    pub nu: f64,
    pub omega0: f64,
    pub x0: Vec<f64>,
    pub dx0: Vec<f64>,
}

impl SurfaceProfile {
    pub fn len(&self) -> usize {
        self.x0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x0.is_empty()
    }

    pub fn peak_to_peak(&self) -> f64 {
        let max = self.x0.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = self.x0.iter().cloned().fold(f64::INFINITY, f64::min);
        max - min
    }

    pub fn variance(&self) -> f64 {
        let n = self.x0.len() as f64;
        let mean = self.x0.iter().sum::<f64>() / n;
        self.x0.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n
    }
}

/// Drive the ZOH-discretized filter with seeded white noise of variance
/// 1/dt per sample (band-limited white-noise equivalence). x0 starts at 0;
/// dx0[k] = -omega0 x0[k] + sqrt(2 pi R nu) w[k] shares the same draws, so
/// left-rectangle integration of dx0 reproduces x0 to O(omega0 dt).
pub fn generate_surface(params: &SurfaceParams) -> Result<SurfaceProfile> {
    params.validate()?;
    let omega0 = params.omega0();
    let steps = (params.duration / params.dt).round() as usize;
    let c = (2.0 * PI * params.roughness * params.nu).sqrt();
    let a = (-omega0 * params.dt).exp();
    let b = c * (1.0 - a) / omega0;
    let noise_scale = 1.0 / params.dt.sqrt();

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut x0 = Vec::with_capacity(steps + 1);
    let mut dx0 = Vec::with_capacity(steps + 1);
    let mut x = 0.0_f64;
    for _ in 0..=steps {
        let w: f64 = rng.sample::<f64, _>(StandardNormal) * noise_scale;
        x0.push(x);
        dx0.push(-omega0 * x + c * w);
        x = a * x + b * w;
    }
    Ok(SurfaceProfile {
        dt: params.dt,
        nu: params.nu,
        omega0,
        x0,
        dx0,
    })
}

/// Analytic two-sided displacement PSD.
pub fn theory_psd(params: &SurfaceParams, omega: f64) -> f64 {
    let omega0 = params.omega0();
    2.0 * PI * params.roughness * params.nu / (omega * omega + omega0 * omega0)
}

/// Scale R so the profile generated from `params` (same seed) has the
/// requested peak-to-peak height. Exact because x0 scales as sqrt(R).
pub fn calibrate_roughness(params: &SurfaceParams, target_ptp: f64) -> Result<f64> {
    if !(target_ptp > 0.0) || !target_ptp.is_finite() {
        return Err(EssmcError::Domain("calibration target must be > 0".into()));
    }
    let ptp = generate_surface(params)?.peak_to_peak();
    if ptp <= 0.0 {
        return Err(EssmcError::Domain(
            "surface realization is flat; cannot calibrate R".into(),
        ));
    }
    Ok(params.roughness * (target_ptp / ptp).powi(2))
}

/// Surface acceleration by forward-differencing dx0 (last sample repeated).
/// Dominated by the white-noise term, so expect magnitudes ~1/dt^1.5; used
/// as a bounded-disturbance source only after clamping.
pub fn accel_samples(profile: &SurfaceProfile) -> Vec<f64> {
    let n = profile.dx0.len();
    let mut acc = Vec::with_capacity(n);
    for k in 0..n.saturating_sub(1) {
        acc.push((profile.dx0[k + 1] - profile.dx0[k]) / profile.dt);
    }
    if let Some(&last) = acc.last() {
        acc.push(last);
    } else if n > 0 {
        acc.push(0.0);
    }
    acc
}

/// Welch averaged periodogram: `segments` non-overlapping Hann-windowed
/// segments with per-segment mean removal. Returns (omega, S_est) on the
/// positive-frequency grid of one segment, DC excluded.
pub fn estimate_psd(profile: &SurfaceProfile, segments: usize) -> Result<Vec<(f64, f64)>> {
    if segments < 4 {
        return Err(EssmcError::Domain(
            "psd estimate needs >= 4 segments".into(),
        ));
    }
    let seg_len = profile.len() / segments;
    if seg_len < 256 {
        return Err(EssmcError::Domain(format!(
            "psd estimate needs >= 256 samples per segment, got {seg_len}"
        )));
    }
    let hann: Vec<f64> = (0..seg_len)
        .map(|k| 0.5 - 0.5 * (2.0 * PI * k as f64 / seg_len as f64).cos())
        .collect();
    let window_power: f64 = hann.iter().map(|w| w * w).sum();

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(seg_len);
    let mut acc = vec![0.0_f64; seg_len / 2];
    let mut buf = vec![Complex::new(0.0, 0.0); seg_len];
    for s in 0..segments {
        let seg = &profile.x0[s * seg_len..(s + 1) * seg_len];
        let mean = seg.iter().sum::<f64>() / seg_len as f64;
        for (slot, (x, w)) in buf.iter_mut().zip(seg.iter().zip(&hann)) {
            *slot = Complex::new((x - mean) * w, 0.0);
        }
        fft.process(&mut buf);
        for (m, slot) in acc.iter_mut().enumerate() {
            *slot += buf[m + 1].norm_sqr();
        }
    }

    let scale = profile.dt / (window_power * segments as f64);
    let d_omega = 2.0 * PI / (seg_len as f64 * profile.dt);
    Ok(acc
        .iter()
        .enumerate()
        .map(|(i, p)| ((i + 1) as f64 * d_omega, p * scale))
        .collect())
}

/// CSV export `t,y,x0,dx0` with the horizontal coordinate y = nu t.
pub fn write_profile_csv<W: Write>(profile: &SurfaceProfile, mut w: W) -> Result<()> {
    writeln!(w, "t,y,x0,dx0")?;
    for k in 0..profile.len() {
        let t = k as f64 * profile.dt;
        writeln!(
            w,
            "{},{},{},{}",
            fmt_sig(t),
            fmt_sig(profile.nu * t),
            fmt_sig(profile.x0[k]),
            fmt_sig(profile.dx0[k])
        )?;
    }
    Ok(())
}

/// CSV export `omega,S_est,S_theory`.
pub fn write_psd_csv<W: Write>(psd: &[(f64, f64)], params: &SurfaceParams, mut w: W) -> Result<()> {
    writeln!(w, "omega,S_est,S_theory")?;
    for (omega, s_est) in psd {
        writeln!(
            w,
            "{},{},{}",
            fmt_sig(*omega),
            fmt_sig(*s_est),
            fmt_sig(theory_psd(params, *omega))
        )?;
    }
    Ok(())
}
