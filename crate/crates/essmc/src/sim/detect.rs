use serde::Serialize;

use super::trace::Trace;

/// Outcome of the tolerance-band convergence check.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub converged: bool,
    /// Earliest time after which both bands hold for every later sample.
    pub t_converge: Option<f64>,
    /// Strict sign changes of sigma, samples inside the band ignored.
    pub zero_crossings: usize,
    pub final_fuel: f64,
}

/// Default sigma tolerance, relative to the initial offset.
pub fn default_eps_sigma(sigma0: f64) -> f64 {
    1e-3 * sigma0.abs().max(1.0)
}

/// Documented heuristic for the velocity tolerance: chattering in ideal
/// sliding scales with sqrt(dt) only for very fine steps.
pub fn default_eps_dsigma(u_max: f64, dt: f64) -> f64 {
    1e-2 * u_max * dt.sqrt()
}

/// Discretization-aware velocity tolerance. A relay loop sampled at `dt`
/// reverses `sigma_dot` in bursts of a few steps, so the steady band is
/// proportional to `(U + delta) * dt`; the sqrt term keeps the heuristic
/// floor for coarse steps.
pub fn discrete_eps_dsigma(u_max: f64, delta: f64, dt: f64) -> f64 {
    6.0 * (u_max + delta) * dt + 1e-2 * u_max * dt.sqrt()
}

/// Find the earliest time such that `|sigma| <= eps_sigma` and
/// `|sigma_dot| <= eps_dsigma` hold from there to the end of the trace,
/// and count the band-filtered zero crossings of sigma.
pub fn detect_convergence(trace: &Trace, eps_sigma: f64, eps_dsigma: f64) -> ConvergenceReport {
    let records = &trace.records;
    let mut last_violation: Option<usize> = None;
    for (k, r) in records.iter().enumerate() {
        if r.sigma.abs() > eps_sigma || r.dsigma.abs() > eps_dsigma {
            last_violation = Some(k);
        }
    }
    let (converged, t_converge) = match last_violation {
        None => (!records.is_empty(), records.first().map(|r| r.t)),
        Some(k) if k + 1 < records.len() => (true, Some(records[k + 1].t)),
        Some(_) => (false, None),
    };

    let mut zero_crossings = 0usize;
    let mut last_sign = 0i8;
    for r in records {
        if r.sigma.abs() <= eps_sigma {
            continue;
        }
        let s = if r.sigma > 0.0 { 1i8 } else { -1i8 };
        if last_sign != 0 && s != last_sign {
            zero_crossings += 1;
        }
        last_sign = s;
    }

    ConvergenceReport {
        converged,
        t_converge,
        zero_crossings,
        final_fuel: records.last().map(|r| r.e).unwrap_or(0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::trace::TraceRecord;

    fn trace_from(
        sigma: impl Fn(f64) -> f64,
        dsigma: impl Fn(f64) -> f64,
        dt: f64,
        t_end: f64,
    ) -> Trace {
        let n = (t_end / dt).round() as usize;
        let mut tr = Trace::with_capacity(dt, n + 1);
        for k in 0..=n {
            let t = k as f64 * dt;
            tr.records.push(TraceRecord {
                t,
                sigma: sigma(t),
                dsigma: dsigma(t),
                u: 0.0,
                v: 0.0,
                sigma_m: 0.0,
                e: 0.0,
            });
        }
        tr
    }

    #[test]
    fn zero_trace_converges_at_origin() {
        let tr = trace_from(|_| 0.0, |_| 0.0, 0.1, 5.0);
        let rep = detect_convergence(&tr, 1e-3, 1e-3);
        assert!(rep.converged);
        assert_eq!(rep.t_converge, Some(0.0));
        assert_eq!(rep.zero_crossings, 0);
    }

    #[test]
    fn exponential_envelope_crossing() {
        // sigma = e^-t enters the 1e-3 band at ln(1000) ~ 6.9078.
        let dt = 1e-3;
        let tr = trace_from(|t| (-t).exp(), |t| -(-t).exp(), dt, 20.0);
        let rep = detect_convergence(&tr, 1e-3, 1e-3);
        assert!(rep.converged);
        let t = rep.t_converge.unwrap();
        assert!((t - 1000.0_f64.ln()).abs() < 2.0 * dt, "t = {t}");
    }

    #[test]
    fn band_exit_forces_later_entry() {
        // Enters the band, leaves, re-enters: t_converge is after the final
        // re-entry.
        let tr = trace_from(
            |t| {
                if t < 2.0 {
                    0.0
                } else if t < 3.0 {
                    1.0
                } else {
                    0.0
                }
            },
            |_| 0.0,
            0.1,
            10.0,
        );
        let rep = detect_convergence(&tr, 1e-3, 1e-3);
        assert!(rep.converged);
        assert!(rep.t_converge.unwrap() >= 3.0);
    }

    #[test]
    fn never_settling_is_not_converged() {
        let tr = trace_from(|t| t.sin(), |t| t.cos(), 0.01, 10.0);
        let rep = detect_convergence(&tr, 1e-3, 1e-3);
        assert!(!rep.converged);
        assert_eq!(rep.t_converge, None);
    }

    #[test]
    fn crossings_ignore_band_chatter() {
        // Tiny oscillation inside the band then one real crossing.
        let tr = trace_from(
            |t| {
                if t < 5.0 {
                    1e-4 * (50.0 * t).sin()
                } else if t < 7.0 {
                    0.5
                } else {
                    -0.5
                }
            },
            |_| 0.0,
            0.01,
            10.0,
        );
        let rep = detect_convergence(&tr, 1e-3, 1.0);
        assert_eq!(rep.zero_crossings, 1);
    }
}
