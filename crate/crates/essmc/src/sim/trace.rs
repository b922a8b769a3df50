use std::io::Write;

use serde::Serialize;

use crate::util::fmt_sig;
use crate::Result;

/// One sampled record of the closed loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub t: f64,
    pub sigma: f64,
    pub dsigma: f64,
    /// Controller command.
    pub u: f64,
    /// Actuator output acting during the step; equals `u` without lag.
    pub v: f64,
    /// Extremum memory of the active law, 0 for laws without one.
    pub sigma_m: f64,
    /// Fuel consumed up to (not including) this step.
    pub e: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct TraceMeta {
    pub config_digest: String,
    pub seed: u64,
}

/// Fixed-grid simulation output.
#[derive(Debug, Clone, Default)]
pub struct Trace {
    pub dt: f64,
    pub records: Vec<TraceRecord>,
    pub meta: TraceMeta,
}

impl Trace {
    pub fn with_capacity(dt: f64, n: usize) -> Self {
        Trace {
            dt,
            records: Vec::with_capacity(n),
            meta: TraceMeta::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    /// Left-rectangle accumulation of `|u| dt` over the trace intervals,
    /// consistent with the zero-order hold of the command.
    pub fn fuel_integral(&self) -> f64 {
        if self.records.len() < 2 {
            return 0.0;
        }
        self.records[..self.records.len() - 1]
            .iter()
            .map(|r| r.u.abs() * self.dt)
            .sum()
    }

    /// CSV export: header `t,sigma,dsigma,u,v,sigma_M,E`, 12 significant
    /// digits, one newline-terminated row per record.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,sigma,dsigma,u,v,sigma_M,E")?;
        for r in &self.records {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                fmt_sig(r.t),
                fmt_sig(r.sigma),
                fmt_sig(r.dsigma),
                fmt_sig(r.u),
                fmt_sig(r.v),
                fmt_sig(r.sigma_m),
                fmt_sig(r.e)
            )?;
        }
        Ok(())
    }
}
