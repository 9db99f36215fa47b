//! Domain types shared across the engine and the in-memory session store.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureVector;

/// Virtual-time tick. Only the simulator advances it.
pub type Tick = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SessionId(pub u64);

impl fmt::Display for SessionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserProfile {
    pub follower_count: u64,
    pub following_count: u64,
    pub post_count: u64,
}

impl UserProfile {
    pub fn new(follower_count: u64, following_count: u64, post_count: u64) -> Self {
        Self {
            follower_count,
            following_count,
            post_count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comment {
    pub arrival_time: Tick,
    pub text: String,
}

impl Comment {
    pub fn new(arrival_time: Tick, text: impl Into<String>) -> Self {
        Self {
            arrival_time,
            text: text.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Priority {
    High,
    Low,
}

/// Cyberbullying-class confidences of successive classifications.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfidenceHistory {
    values: Vec<f64>,
    running_sum: f64,
}

impl ConfidenceHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, confidence: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&confidence) {
            return Err(Error::ConfidenceRange(confidence));
        }
        self.values.push(confidence);
        self.running_sum += confidence;
        Ok(())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn running_sum(&self) -> f64 {
        self.running_sum
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Mean over the whole history, `None` when empty.
    pub fn mean(&self) -> Option<f64> {
        if self.values.is_empty() {
            None
        } else {
            Some(self.running_sum / self.values.len() as f64)
        }
    }
}

impl TryFrom<Vec<f64>> for ConfidenceHistory {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        let mut history = ConfidenceHistory::new();
        for v in values {
            history.push(v)?;
        }
        Ok(history)
    }
}

/// One classification outcome recorded on a session.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub at: Tick,
    pub positive: bool,
    pub confidence: f64,
}

/// A media item, its comment stream and all per-session engine state.
#[derive(Debug, Clone)]
pub struct MediaSession {
    pub id: SessionId,
    pub poster: UserProfile,
    pub caption: String,
    pub created_at: Tick,
    comments: Vec<Comment>,
    processed_count: usize,
    cached_features: Option<FeatureVector>,
    pub(crate) cached_standardized: Vec<f64>,
    pub(crate) cached_products: Vec<f64>,
    pub confidence_history: ConfidenceHistory,
    pub decision_history: Vec<Decision>,
    pub priority: Priority,
    pub last_alert_index: Option<usize>,
    /// Simulator and training only; classification paths never read it.
    pub ground_truth_label: Option<bool>,
}

impl MediaSession {
    pub fn new(id: SessionId, poster: UserProfile, caption: impl Into<String>, created_at: Tick) -> Self {
        Self {
            id,
            poster,
            caption: caption.into(),
            created_at,
            comments: Vec::new(),
            processed_count: 0,
            cached_features: None,
            cached_standardized: Vec::new(),
            cached_products: Vec::new(),
            confidence_history: ConfidenceHistory::new(),
            decision_history: Vec::new(),
            priority: Priority::Low,
            last_alert_index: None,
            ground_truth_label: None,
        }
    }

    pub fn with_label(mut self, label: Option<bool>) -> Self {
        self.ground_truth_label = label;
        self
    }

    pub fn comments(&self) -> &[Comment] {
        &self.comments
    }

    pub fn processed_count(&self) -> usize {
        self.processed_count
    }

    pub fn unprocessed(&self) -> &[Comment] {
        &self.comments[self.processed_count..]
    }

    pub fn cached_features(&self) -> Option<&FeatureVector> {
        self.cached_features.as_ref()
    }

    pub fn cached_products(&self) -> &[f64] {
        &self.cached_products
    }

    /// Appends comments, rejecting any that would break time ordering.
    /// Nothing is appended when the batch is rejected.
    pub fn append_comments(&mut self, comments: impl IntoIterator<Item = Comment>) -> Result<()> {
        let incoming: Vec<Comment> = comments.into_iter().collect();
        let mut last = self.comments.last().map(|c| c.arrival_time);
        for c in &incoming {
            if let Some(last) = last {
                if c.arrival_time < last {
                    return Err(Error::CommentOrder {
                        session: self.id,
                        last,
                        got: c.arrival_time,
                    });
                }
            }
            last = Some(c.arrival_time);
        }
        self.comments.extend(incoming);
        Ok(())
    }

    pub(crate) fn set_feature_cache(&mut self, features: FeatureVector, processed_count: usize) {
        debug_assert!(processed_count <= self.comments.len());
        self.cached_features = Some(features);
        self.processed_count = processed_count;
    }

    /// Records a classification outcome in both histories.
    pub fn record_decision(&mut self, at: Tick, positive: bool, confidence: f64) -> Result<()> {
        self.confidence_history.push(confidence)?;
        self.decision_history.push(Decision {
            at,
            positive,
            confidence,
        });
        Ok(())
    }
}

/// In-memory map of sessions keyed by id, iterable in insertion order.
#[derive(Debug, Default)]
pub struct SessionStore {
    sessions: HashMap<SessionId, MediaSession>,
    order: Vec<SessionId>,
}

impl SessionStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, session: MediaSession) -> Result<()> {
        if self.sessions.contains_key(&session.id) {
            return Err(Error::DuplicateSession(session.id));
        }
        self.order.push(session.id);
        self.sessions.insert(session.id, session);
        Ok(())
    }

    pub fn get(&self, id: SessionId) -> Option<&MediaSession> {
        self.sessions.get(&id)
    }

    pub fn get_mut(&mut self, id: SessionId) -> Option<&mut MediaSession> {
        self.sessions.get_mut(&id)
    }

    pub fn append_comments(&mut self, id: SessionId, comments: impl IntoIterator<Item = Comment>) -> Result<()> {
        self.sessions
            .get_mut(&id)
            .ok_or(Error::UnknownSession(id))?
            .append_comments(comments)
    }

    pub fn len(&self) -> usize {
        self.sessions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sessions.is_empty()
    }

    pub fn ids(&self) -> &[SessionId] {
        &self.order
    }

    pub fn iter(&self) -> impl Iterator<Item = &MediaSession> {
        self.order.iter().map(move |id| &self.sessions[id])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn session(id: u64) -> MediaSession {
        MediaSession::new(SessionId(id), UserProfile::new(10, 5, 3), "caption", 0)
    }

    #[test]
    fn insert_then_get() {
        let mut store = SessionStore::new();
        store.insert(session(7)).unwrap();
        let s = store.get(SessionId(7)).unwrap();
        assert_eq!(s.id, SessionId(7));
        assert_eq!(s.processed_count(), 0);
        assert!(s.confidence_history.is_empty());
        assert!(s.decision_history.is_empty());
    }

    #[test]
    fn duplicate_insert_rejected() {
        let mut store = SessionStore::new();
        store.insert(session(1)).unwrap();
        assert!(matches!(
            store.insert(session(1)),
            Err(Error::DuplicateSession(SessionId(1)))
        ));
        assert_eq!(store.len(), 1);
    }

    #[test]
    fn thousand_sessions() {
        let mut store = SessionStore::new();
        let ids: Vec<u64> = (0..1000).map(|i| i * 7 + 3).collect();
        for &i in &ids {
            store.insert(session(i)).unwrap();
        }
        let distinct: std::collections::HashSet<_> = ids.iter().collect();
        assert_eq!(store.len(), distinct.len());
        assert_eq!(store.len(), 1000);
    }

    #[test]
    fn append_grows_without_touching_progress() {
        let mut store = SessionStore::new();
        store.insert(session(1)).unwrap();
        let batch: Vec<Comment> = (0..10).map(|t| Comment::new(t, "hi")).collect();
        store.append_comments(SessionId(1), batch).unwrap();
        let s = store.get(SessionId(1)).unwrap();
        assert_eq!(s.comments().len(), 10);
        assert_eq!(s.processed_count(), 0);
        assert!(s.cached_features().is_none());

        store.append_comments(SessionId(1), Vec::new()).unwrap();
        assert_eq!(store.get(SessionId(1)).unwrap().comments().len(), 10);
    }

    #[test]
    fn append_out_of_order_rejected() {
        let mut store = SessionStore::new();
        store.insert(session(1)).unwrap();
        store.append_comments(SessionId(1), [Comment::new(5, "a")]).unwrap();
        let err = store
            .append_comments(SessionId(1), [Comment::new(6, "b"), Comment::new(4, "c")])
            .unwrap_err();
        assert!(matches!(err, Error::CommentOrder { last: 6, got: 4, .. }));
        assert_eq!(store.get(SessionId(1)).unwrap().comments().len(), 1);
    }

    #[test]
    fn append_unknown_session() {
        let mut store = SessionStore::new();
        assert!(matches!(
            store.append_comments(SessionId(9), [Comment::new(0, "x")]),
            Err(Error::UnknownSession(SessionId(9)))
        ));
    }

    #[test]
    fn history_tracks_sum() {
        let h = ConfidenceHistory::try_from(vec![0.15, 0.15, 0.45]).unwrap();
        assert!((h.running_sum() - 0.75).abs() < 1e-12);
        assert!((h.mean().unwrap() - 0.25).abs() < 1e-12);
        assert!(ConfidenceHistory::try_from(vec![1.5]).is_err());
        assert_eq!(ConfidenceHistory::new().mean(), None);
    }
}
