//! The end-to-end loop over a virtual clock:
//! predict, schedule, extract, classify, reprioritize, alert.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::alert::{AlertManager, AlertRecord, DEFAULT_ALERT_THRESHOLD};
use crate::error::{Error, Result};
use crate::features::{FeatureExtractor, SchemaId};
use crate::io::{Trace, TraceEvent};
use crate::lr::{Classification, LrModel};
use crate::model::{Comment, MediaSession, SessionId, SessionStore, Tick};
use crate::predictor::predict_initial_priority;
use crate::scheduler::{Scheduler, SchedulerConfig};
use crate::sentiment::SentimentLexicon;

use super::metrics::RunMetrics;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierMode {
    /// Cached feature sums plus cached weight products.
    Incremental,
    /// Full feature recomputation and full dot product every time.
    Standard,
}

impl ClassifierMode {
    pub fn name(self) -> &'static str {
        match self {
            ClassifierMode::Incremental => "incremental",
            ClassifierMode::Standard => "standard",
        }
    }
}

/// Virtual-tick prices of engine work.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostModel {
    /// Per comment whose features are extracted in an invocation.
    pub per_comment_feature: u64,
    pub fixed_classify: u64,
    pub predictor: u64,
}

impl Default for CostModel {
    fn default() -> Self {
        Self {
            per_comment_feature: 1,
            fixed_classify: 5,
            predictor: 1,
        }
    }
}

impl CostModel {
    pub fn classify(&self, comments_extracted: usize) -> u64 {
        self.fixed_classify + self.per_comment_feature * comments_extracted as u64
    }
}

#[derive(Debug, Clone)]
pub struct Models {
    pub predictor: LrModel,
    pub main: LrModel,
}

impl Models {
    pub fn validate(&self) -> Result<()> {
        for (model, schema) in [(&self.predictor, SchemaId::PredictorV1), (&self.main, SchemaId::MainV1)] {
            model.validate()?;
            if model.schema_id != schema {
                return Err(Error::SchemaMismatch {
                    expected: schema,
                    got: model.schema_id,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub scheduler: SchedulerConfig,
    pub mode: ClassifierMode,
    pub cost: CostModel,
    pub alert_threshold: usize,
    /// Re-extract features from scratch after every step and fail on divergence.
    pub verify_cache: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scheduler: SchedulerConfig::default(),
            mode: ClassifierMode::Incremental,
            cost: CostModel::default(),
            alert_threshold: DEFAULT_ALERT_THRESHOLD,
            verify_cache: false,
        }
    }
}

/// One classifier invocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Invocation {
    pub session: SessionId,
    /// Index of the first comment in the batch.
    pub start: usize,
    pub len: usize,
    pub cost: u64,
    /// Virtual time once the invocation finished.
    pub finished_at: Tick,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub metrics: RunMetrics,
    pub alerts: Vec<AlertRecord>,
    pub invocations: Vec<Invocation>,
    pub store: SessionStore,
    /// Wall-clock time spent in feature extraction and classification.
    pub classify_wall: Duration,
}

impl RunOutcome {
    /// `(positive, confidence)` per decision, per session.
    pub fn decisions(&self) -> HashMap<SessionId, Vec<(bool, f64)>> {
        self.store
            .iter()
            .map(|s| {
                (
                    s.id,
                    s.decision_history.iter().map(|d| (d.positive, d.confidence)).collect(),
                )
            })
            .collect()
    }
}

struct Engine<'a> {
    config: RunConfig,
    models: &'a Models,
    lexicon: &'a SentimentLexicon,
    extractor: FeatureExtractor<'a>,
    alerts: AlertManager,
    scheduler: Scheduler,
    now: Tick,
    busy: u64,
    out: Vec<AlertRecord>,
    invocations: Vec<Invocation>,
    classify_wall: Duration,
}

impl<'a> Engine<'a> {
    fn ingest(&mut self, store: &mut SessionStore, event: &TraceEvent) -> Result<()> {
        match event {
            TraceEvent::Session(s) => {
                let profile = s.profile();
                let initial = predict_initial_priority(&self.models.predictor, &profile, &s.caption, self.lexicon)?;
                let mut session = MediaSession::new(s.id, profile, s.caption.clone(), s.created_at).with_label(s.label);
                session.priority = initial.priority;
                store.insert(session)?;
                self.scheduler.admit(s.id, initial.priority)?;
                self.charge(self.config.cost.predictor);
            }
            TraceEvent::Comment(c) => {
                store.append_comments(c.session_id, [Comment::new(c.at, c.text.clone())])?;
            }
        }
        Ok(())
    }

    fn charge(&mut self, ticks: u64) {
        self.now += ticks;
        self.busy += ticks;
    }

    /// Classifies one batch of `session`; returns the result and the number
    /// of comments whose features were extracted.
    fn classify(&self, session: &mut MediaSession, batch_len: usize) -> Result<(Classification, usize)> {
        let start = session.processed_count();
        match self.config.mode {
            ClassifierMode::Incremental => {
                let delta = self.extractor.delta(&session.comments()[start..start + batch_len]);
                let features = self.extractor.fold(session, &delta, batch_len)?;
                let out = self.models.main.predict_incremental(session, &features)?;
                Ok((out.classification, batch_len))
            }
            ClassifierMode::Standard => {
                let upto = start + batch_len;
                let features = self.extractor.recompute(session, upto)?;
                Ok((self.models.main.predict(&features)?, upto))
            }
        }
    }

    /// Serves one session. Returns false when it had nothing to classify.
    fn serve(&mut self, session: &mut MediaSession) -> Result<bool> {
        let batch_len = self.scheduler.take_batch(session).len();
        if batch_len == 0 {
            self.scheduler.requeue(session.id, session.priority)?;
            return Ok(false);
        }
        let start = session.processed_count();
        let timer = Instant::now();
        let (c, extracted) = self.classify(session, batch_len)?;
        self.classify_wall += timer.elapsed();

        let cost = self.config.cost.classify(extracted);
        self.charge(cost);
        self.invocations.push(Invocation {
            session: session.id,
            start,
            len: batch_len,
            cost,
            finished_at: self.now,
        });
        session.record_decision(self.now, c.decision, c.confidence)?;
        if let Some(alert) = self.alerts.on_classification(session, self.now) {
            self.out.push(alert);
        }
        if self.config.verify_cache {
            self.extractor.verify_cache(session, 1e-9)?;
        }
        let p = self.scheduler.setting_priority(session)?;
        self.scheduler.requeue(session.id, p)?;
        Ok(true)
    }
}

/// Runs the trace to exhaustion: every event ingested and every servable
/// session out of unprocessed comments.
pub fn run(trace: &Trace, models: &Models, lexicon: &SentimentLexicon, config: &RunConfig) -> Result<RunOutcome> {
    models.validate()?;
    config.scheduler.validate()?;
    let mut engine = Engine {
        config: *config,
        models,
        lexicon,
        extractor: FeatureExtractor::new(lexicon),
        alerts: AlertManager::new(config.alert_threshold),
        scheduler: Scheduler::new(config.scheduler),
        now: 0,
        busy: 0,
        out: Vec::new(),
        invocations: Vec::new(),
        classify_wall: Duration::ZERO,
    };

    let mut store = SessionStore::new();
    let events = trace.events();
    let mut next_event = 0;
    let mut idle = 0usize;
    loop {
        while next_event < events.len() && events[next_event].time() <= engine.now {
            engine.ingest(&mut store, &events[next_event])?;
            next_event += 1;
            idle = 0;
        }
        let upcoming = events.get(next_event).map(TraceEvent::time);
        let Some(id) = engine.scheduler.next() else {
            match upcoming {
                Some(t) => {
                    engine.now = engine.now.max(t);
                    continue;
                }
                None => break,
            }
        };
        let session = store.get_mut(id).ok_or(Error::UnknownSession(id))?;
        if engine.serve(session)? {
            idle = 0;
        } else {
            idle += 1;
            // a full sweep found nothing to do: jump to the next arrival
            if idle >= engine.scheduler.serviceable() {
                match upcoming {
                    Some(t) => {
                        engine.now = engine.now.max(t);
                        idle = 0;
                    }
                    None => break,
                }
            }
        }
    }

    let metrics = RunMetrics::collect(&store, &engine.out, engine.busy);
    Ok(RunOutcome {
        metrics,
        alerts: engine.out,
        invocations: engine.invocations,
        store,
        classify_wall: engine.classify_wall,
    })
}
