//! Grid sweep of confidence threshold by batch size against round-robin.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io::Trace;
use crate::scheduler::Policy;
use crate::sentiment::SentimentLexicon;

use super::engine::{run, Models, RunConfig};
use super::metrics::{responsiveness_gain, RunMetrics};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub confidence_threshold: f64,
    pub batch_size: usize,
    /// First-alert gain of DYNAMIC over ROUND_ROBIN at the same batch size.
    pub mean_gain: Option<f64>,
    pub gained_sessions: usize,
    pub dynamic: RunMetrics,
}

/// The same configuration with the policy forced to round-robin.
pub fn baseline_of(config: &RunConfig) -> RunConfig {
    let mut b = *config;
    b.scheduler.policy = Policy::RoundRobin;
    b
}

/// Runs DYNAMIC for every `(threshold, batch size)` cell and compares it to
/// a ROUND_ROBIN run with the same batch size. Cells run in parallel; each
/// owns its own engine. Rows come back threshold-major in input order.
pub fn sweep_thresholds(
    trace: &Trace,
    models: &Models,
    lexicon: &SentimentLexicon,
    base: &RunConfig,
    thresholds: &[f64],
    batch_sizes: &[usize],
) -> Result<Vec<SweepCell>> {
    if thresholds.is_empty() || batch_sizes.is_empty() {
        return Err(Error::Config("sweep grid is empty".into()));
    }
    let mut sizes: Vec<usize> = batch_sizes.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    let baselines: BTreeMap<usize, RunMetrics> = sizes
        .par_iter()
        .map(|&b| {
            let mut cfg = baseline_of(base);
            cfg.scheduler.batch_size = b;
            run(trace, models, lexicon, &cfg).map(|o| (b, o.metrics))
        })
        .collect::<Result<_>>()?;

    let cells: Vec<(f64, usize)> = thresholds
        .iter()
        .flat_map(|&t| batch_sizes.iter().map(move |&b| (t, b)))
        .collect();
    cells
        .par_iter()
        .map(|&(t, b)| {
            let mut cfg = *base;
            cfg.scheduler.policy = Policy::Dynamic;
            cfg.scheduler.confidence_threshold = t;
            cfg.scheduler.batch_size = b;
            let dynamic = run(trace, models, lexicon, &cfg)?.metrics;
            let gain = responsiveness_gain(&baselines[&b], &dynamic, 1);
            Ok(SweepCell {
                confidence_threshold: t,
                batch_size: b,
                mean_gain: gain.mean,
                gained_sessions: gain.sessions,
                dynamic,
            })
        })
        .collect()
}
