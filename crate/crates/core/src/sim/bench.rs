//! Wall-clock timing of classifier invocations per batch index.

use std::hint::black_box;
use std::time::{Duration, Instant};

use crate::error::Result;
use crate::features::FeatureExtractor;
use crate::lr::LrModel;
use crate::model::MediaSession;
use crate::sentiment::SentimentLexicon;

use super::engine::ClassifierMode;

/// Processes every session in `batch_size` chunks and returns, per batch
/// index, the wall time summed across sessions. Sessions are cloned fresh
/// so the inputs stay untouched.
pub fn batch_timings(
    sessions: &[MediaSession],
    lexicon: &SentimentLexicon,
    model: &LrModel,
    batch_size: usize,
    mode: ClassifierMode,
) -> Result<Vec<Duration>> {
    let fx = FeatureExtractor::new(lexicon);
    let mut totals: Vec<Duration> = Vec::new();
    for original in sessions {
        let mut s = original.clone();
        let n = s.comments().len();
        let mut idx = 0;
        while s.processed_count() < n {
            let start = s.processed_count();
            let len = batch_size.min(n - start);
            let t = Instant::now();
            match mode {
                ClassifierMode::Incremental => {
                    let d = fx.delta(&s.comments()[start..start + len]);
                    let f = fx.fold(&mut s, &d, len)?;
                    black_box(model.predict_incremental(&mut s, &f)?);
                }
                ClassifierMode::Standard => {
                    let f = fx.recompute(&mut s, start + len)?;
                    black_box(model.predict(&f)?);
                }
            }
            let dt = t.elapsed();
            if totals.len() <= idx {
                totals.push(Duration::ZERO);
            }
            totals[idx] += dt;
            idx += 1;
        }
    }
    Ok(totals)
}
