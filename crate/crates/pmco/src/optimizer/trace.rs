//! Per-iteration trace records and tail diagnostics.

use serde::{Deserialize, Serialize};

use crate::switched::McoCoefficients;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionFlags {
    pub h1: bool,
    /// Both transition matrices passed the discrete-time semistability
    /// gate for the accepted draw.
    pub semistable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h4_norm_a: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationRecord {
    pub t: usize,
    pub f_best: f64,
    pub max_speed: f64,
    pub spread: f64,
    pub delta_p: f64,
    pub coefficients: Vec<McoCoefficients>,
    pub topology_edges: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conditions: Option<ConditionFlags>,
}

#[derive(Debug, Clone, Default)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
}

impl IterationTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, record: IterationRecord) {
        self.records.push(record);
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceMetrics {
    /// Max of max_speed over the tail window; None when the trace is too
    /// short for the window.
    pub velocity_sup_trend: Option<f64>,
    pub spread_trend: Option<f64>,
    pub p_settled: Option<bool>,
    pub window: usize,
}

/// Tail statistics over the last `window` records.
pub fn convergence_metrics(trace: &IterationTrace, window: usize, stop_tol: f64) -> ConvergenceMetrics {
    if trace.records.len() < window || window == 0 {
        return ConvergenceMetrics {
            velocity_sup_trend: None,
            spread_trend: None,
            p_settled: None,
            window,
        };
    }
    let tail = &trace.records[trace.records.len() - window..];
    let vmax = tail.iter().map(|r| r.max_speed).fold(0.0_f64, f64::max);
    let smax = tail.iter().map(|r| r.spread).fold(0.0_f64, f64::max);
    let dmax = tail.iter().map(|r| r.delta_p).fold(0.0_f64, f64::max);
    ConvergenceMetrics {
        velocity_sup_trend: Some(vmax),
        spread_trend: Some(smax),
        p_settled: Some(dmax < stop_tol),
        window,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_trace_reports_insufficient_data() {
        let mut trace = IterationTrace::new();
        trace.push(IterationRecord {
            t: 0,
            f_best: 1.0,
            max_speed: 0.5,
            spread: 0.2,
            delta_p: 0.0,
            coefficients: vec![],
            topology_edges: 0,
            conditions: None,
        });
        let m = convergence_metrics(&trace, 10, 1e-10);
        assert!(m.velocity_sup_trend.is_none());
        assert!(m.p_settled.is_none());
    }
}
