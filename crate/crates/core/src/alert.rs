//! Turns each session's decision stream into alerts: an alert fires once a
//! session has collected `threshold` positive decisions since its last alert.

use serde::{Deserialize, Serialize};

use crate::model::{MediaSession, SessionId, Tick};

pub const DEFAULT_ALERT_THRESHOLD: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct AlertRecord {
    pub session_id: SessionId,
    pub raised_at: Tick,
    /// Indices into the session's decision history of the positives that triggered it.
    pub decision_indices: Vec<usize>,
    pub confidence_at_alert: f64,
}

/// One line of the alerts JSONL sink.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlertLine {
    pub session_id: SessionId,
    pub raised_at: Tick,
    pub positives_since_last: usize,
    pub confidence: f64,
}

impl From<&AlertRecord> for AlertLine {
    fn from(a: &AlertRecord) -> Self {
        AlertLine {
            session_id: a.session_id,
            raised_at: a.raised_at,
            positives_since_last: a.decision_indices.len(),
            confidence: a.confidence_at_alert,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlertManager {
    pub threshold: usize,
}

impl Default for AlertManager {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_ALERT_THRESHOLD,
        }
    }
}

impl AlertManager {
    pub fn new(threshold: usize) -> Self {
        Self {
            threshold: threshold.max(1),
        }
    }

    /// Call after the newest decision has been appended to the session.
    pub fn on_classification(&self, session: &mut MediaSession, now: Tick) -> Option<AlertRecord> {
        let start = session.last_alert_index.map_or(0, |i| i + 1);
        let positives: Vec<usize> = session.decision_history[start..]
            .iter()
            .enumerate()
            .filter(|(_, d)| d.positive)
            .map(|(i, _)| start + i)
            .collect();
        if positives.len() < self.threshold {
            return None;
        }
        let newest = *positives.last()?;
        session.last_alert_index = Some(newest);
        Some(AlertRecord {
            session_id: session.id,
            raised_at: now,
            decision_indices: positives,
            confidence_at_alert: session.decision_history[newest].confidence,
        })
    }
}
