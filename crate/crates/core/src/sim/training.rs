//! Builds training sets from labeled traces and fits both models.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureExtractor, FeatureVector};
use crate::io::{SessionEvent, Trace, TraceEvent};
use crate::lr::{self, LrModel, TrainConfig};
use crate::model::{Comment, SessionId};
use crate::sentiment::SentimentLexicon;

use super::engine::Models;
use super::metrics::precision_recall;
use super::tune::{tune_threshold, ThresholdChoice};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingOptions {
    pub train: TrainConfig,
    /// Main-model examples are taken every `prefix_step` comments, plus the full session.
    pub prefix_step: usize,
    /// Precision floor for the predictor threshold.
    pub min_precision: f64,
    pub holdout_fraction: f64,
}

impl Default for TrainingOptions {
    fn default() -> Self {
        Self {
            train: TrainConfig::default(),
            prefix_step: 10,
            min_precision: 0.44,
            holdout_fraction: 0.2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub models: Models,
    pub predictor_choice: ThresholdChoice,
    /// Held-out `(precision, recall)` of the predictor's HIGH assignments.
    pub predictor_holdout: (f64, f64),
    /// Held-out `(precision, recall)` of the main model on whole sessions.
    pub main_holdout: (f64, f64),
}

/// A labeled session with its full comment list.
pub struct LabeledSession<'t> {
    pub event: &'t SessionEvent,
    pub label: bool,
    pub comments: Vec<Comment>,
}

pub fn labeled_sessions(trace: &Trace) -> Vec<LabeledSession<'_>> {
    let mut comments: HashMap<SessionId, Vec<Comment>> = HashMap::new();
    for e in trace.events() {
        if let TraceEvent::Comment(c) = e {
            comments
                .entry(c.session_id)
                .or_default()
                .push(Comment::new(c.at, c.text.clone()));
        }
    }
    trace
        .sessions()
        .filter_map(|s| {
            Some(LabeledSession {
                event: s,
                label: s.label?,
                comments: comments.remove(&s.id).unwrap_or_default(),
            })
        })
        .collect()
}

pub fn predictor_dataset(sessions: &[LabeledSession<'_>], lexicon: &SentimentLexicon) -> Vec<(FeatureVector, bool)> {
    let fx = FeatureExtractor::new(lexicon);
    sessions
        .iter()
        .map(|s| (fx.predictor_features(&s.event.profile(), &s.event.caption), s.label))
        .collect()
}

/// Prefix features at every `step` comments and at the full length, so the
/// model sees sessions at the same stages the engine classifies them.
pub fn main_dataset(
    sessions: &[LabeledSession<'_>],
    lexicon: &SentimentLexicon,
    step: usize,
) -> Result<Vec<(FeatureVector, bool)>> {
    let fx = FeatureExtractor::new(lexicon);
    let step = step.max(1);
    let mut out = Vec::new();
    for s in sessions {
        let n = s.comments.len();
        let mut cuts: Vec<usize> = (1..=n / step).map(|k| k * step).collect();
        if cuts.last() != Some(&n) {
            cuts.push(n);
        }
        for upto in cuts {
            out.push((
                fx.batch_from_parts(&s.event.profile(), &s.event.caption, &s.comments, upto)?,
                s.label,
            ));
        }
    }
    Ok(out)
}

/// Splits labeled sessions, trains both models on the training part, tunes
/// the predictor threshold there and scores both models on the holdout.
pub fn train_models(trace: &Trace, lexicon: &SentimentLexicon, options: &TrainingOptions) -> Result<TrainReport> {
    if !(0.0..1.0).contains(&options.holdout_fraction) {
        return Err(Error::Config("holdout fraction must be in [0, 1)".into()));
    }
    let mut sessions = labeled_sessions(trace);
    sessions.sort_by_key(|s| s.event.id);
    sessions.shuffle(&mut ChaCha8Rng::seed_from_u64(options.train.seed));
    let n_hold = (sessions.len() as f64 * options.holdout_fraction).round() as usize;
    let holdout = sessions.split_off(sessions.len() - n_hold);
    let training = sessions;

    let pred_data = predictor_dataset(&training, lexicon);
    let predictor = lr::train(&pred_data, &options.train)?;
    let scored: Vec<(f64, bool)> = pred_data
        .iter()
        .map(|(fv, y)| Ok((predictor.predict(fv)?.confidence, *y)))
        .collect::<Result<_>>()?;
    let choice = tune_threshold(&scored, options.min_precision)?;
    let predictor = predictor.with_threshold(choice.threshold.clamp(1e-9, 1.0 - 1e-9));

    let main = lr::train(&main_dataset(&training, lexicon, options.prefix_step)?, &options.train)?;

    let predictor_holdout = score(&predictor, &predictor_dataset(&holdout, lexicon))?;
    let full: Vec<(FeatureVector, bool)> = {
        let fx = FeatureExtractor::new(lexicon);
        holdout
            .iter()
            .map(|s| {
                Ok((
                    fx.batch_from_parts(&s.event.profile(), &s.event.caption, &s.comments, s.comments.len())?,
                    s.label,
                ))
            })
            .collect::<Result<_>>()?
    };
    let main_holdout = score(&main, &full)?;

    Ok(TrainReport {
        models: Models { predictor, main },
        predictor_choice: choice,
        predictor_holdout,
        main_holdout,
    })
}

fn score(model: &LrModel, data: &[(FeatureVector, bool)]) -> Result<(f64, f64)> {
    let pairs: Vec<(bool, bool)> = data
        .iter()
        .map(|(fv, y)| Ok((model.predict(fv)?.decision, *y)))
        .collect::<Result<_>>()?;
    Ok(precision_recall(pairs))
}
