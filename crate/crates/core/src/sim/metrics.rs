//! Run metrics, responsiveness gain and ground-truth scoring.

use std::collections::BTreeMap;

use crate::alert::AlertRecord;
use crate::error::Result;
use crate::features::FeatureExtractor;
use crate::io::{Trace, TraceEvent};
use crate::lr::LrModel;
use crate::model::{Comment, SessionId, SessionStore, Tick};
use crate::sentiment::SentimentLexicon;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SessionTiming {
    pub created_at: Tick,
    pub label: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunMetrics {
    pub sessions: usize,
    pub alerts: usize,
    pub classifications: usize,
    pub precision: f64,
    pub recall: f64,
    /// Sum of every charged cost; idle gaps between arrivals are not counted.
    pub total_ticks: u64,
    pub timing: BTreeMap<SessionId, SessionTiming>,
    /// Alert times per session, ascending.
    pub alert_times: BTreeMap<SessionId, Vec<Tick>>,
}

/// Session-level precision and recall: a labeled-true session with at least
/// one alert is a true positive, an alerted labeled-false session a false
/// positive. Undefined ratios are reported as 0.
pub fn precision_recall(flagged_and_labels: impl IntoIterator<Item = (bool, bool)>) -> (f64, f64) {
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (flagged, label) in flagged_and_labels {
        match (flagged, label) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    (ratio(tp, tp + fp), ratio(tp, tp + fn_))
}

impl RunMetrics {
    pub fn collect(store: &SessionStore, alerts: &[AlertRecord], total_ticks: u64) -> Self {
        let mut alert_times: BTreeMap<SessionId, Vec<Tick>> = BTreeMap::new();
        for a in alerts {
            alert_times.entry(a.session_id).or_default().push(a.raised_at);
        }
        let timing: BTreeMap<SessionId, SessionTiming> = store
            .iter()
            .map(|s| {
                (
                    s.id,
                    SessionTiming {
                        created_at: s.created_at,
                        label: s.ground_truth_label,
                    },
                )
            })
            .collect();
        let (precision, recall) = precision_recall(
            timing
                .iter()
                .filter_map(|(id, t)| t.label.map(|l| (alert_times.contains_key(id), l))),
        );
        RunMetrics {
            sessions: store.len(),
            alerts: alerts.len(),
            classifications: store.iter().map(|s| s.decision_history.len()).sum(),
            precision,
            recall,
            total_ticks,
            timing,
            alert_times,
        }
    }

    /// Ticks from creation to the session's `k`-th alert (1-based).
    pub fn time_to_alert(&self, id: SessionId, k: usize) -> Option<Tick> {
        let t = *self.alert_times.get(&id)?.get(k.checked_sub(1)?)?;
        Some(t - self.timing.get(&id)?.created_at)
    }

    pub fn true_sessions(&self) -> impl Iterator<Item = SessionId> + '_ {
        self.timing
            .iter()
            .filter(|(_, t)| t.label == Some(true))
            .map(|(id, _)| *id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainSummary {
    /// Mean of per-session `t_baseline / t_candidate`; `None` when no
    /// session qualifies.
    pub mean: Option<f64>,
    /// Labeled-true sessions alerted `k` times under both runs.
    pub sessions: usize,
}

/// Responsiveness gain for the `k`-th alert over labeled-true sessions
/// alerted under both runs.
pub fn responsiveness_gain(baseline: &RunMetrics, candidate: &RunMetrics, k: usize) -> GainSummary {
    let ratios: Vec<f64> = candidate
        .true_sessions()
        .filter_map(|id| {
            let b = baseline.time_to_alert(id, k)?;
            let c = candidate.time_to_alert(id, k)?;
            (c > 0).then(|| b as f64 / c as f64)
        })
        .collect();
    GainSummary {
        mean: (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64),
        sessions: ratios.len(),
    }
}

/// Scores a single end-of-session STANDARD classification per labeled
/// session: a positive decision over all comments counts as an alert.
pub fn single_shot_precision_recall(trace: &Trace, main: &LrModel, lexicon: &SentimentLexicon) -> Result<(f64, f64)> {
    let fx = FeatureExtractor::new(lexicon);
    let mut comments: BTreeMap<SessionId, Vec<Comment>> = BTreeMap::new();
    for e in trace.events() {
        if let TraceEvent::Comment(c) = e {
            comments
                .entry(c.session_id)
                .or_default()
                .push(Comment::new(c.at, c.text.clone()));
        }
    }
    let mut scored = Vec::new();
    for s in trace.sessions() {
        let Some(label) = s.label else { continue };
        let cs = comments.get(&s.id).map(Vec::as_slice).unwrap_or(&[]);
        let fv = fx.batch_from_parts(&s.profile(), &s.caption, cs, cs.len())?;
        scored.push((main.predict(&fv)?.decision, label));
    }
    Ok(precision_recall(scored))
}
