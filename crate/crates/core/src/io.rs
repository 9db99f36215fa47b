//! File formats: trace JSONL, lexicon files, model JSON, alerts JSONL, the
//! metrics CSV and the sweep gain table.

use std::collections::HashSet;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::alert::{AlertLine, AlertRecord};
use crate::error::{Error, Result};
use crate::lr::LrModel;
use crate::model::{SessionId, Tick, UserProfile};
use crate::sentiment::SentimentLexicon;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionEvent {
    pub id: SessionId,
    pub created_at: Tick,
    pub followers: u64,
    pub followings: u64,
    pub posts: u64,
    pub caption: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<bool>,
}

impl SessionEvent {
    pub fn profile(&self) -> UserProfile {
        UserProfile::new(self.followers, self.followings, self.posts)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommentEvent {
    pub session_id: SessionId,
    pub at: Tick,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "t", rename_all = "lowercase")]
pub enum TraceEvent {
    Session(SessionEvent),
    Comment(CommentEvent),
}

impl TraceEvent {
    pub fn time(&self) -> Tick {
        match self {
            TraceEvent::Session(s) => s.created_at,
            TraceEvent::Comment(c) => c.at,
        }
    }
}

/// A time-sorted stream of session and comment events.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    events: Vec<TraceEvent>,
}

impl Trace {
    /// Validates ordering: non-decreasing time, and every comment refers to
    /// a session declared earlier in the stream.
    pub fn new(events: Vec<TraceEvent>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut last = 0;
        for (i, e) in events.iter().enumerate() {
            if e.time() < last {
                return Err(Error::parse("trace", i + 1, "events are not sorted by time"));
            }
            last = e.time();
            match e {
                TraceEvent::Session(s) => {
                    if !seen.insert(s.id) {
                        return Err(Error::parse("trace", i + 1, format!("duplicate session {}", s.id)));
                    }
                }
                TraceEvent::Comment(c) => {
                    if !seen.contains(&c.session_id) {
                        return Err(Error::parse(
                            "trace",
                            i + 1,
                            format!("comment for undeclared session {}", c.session_id),
                        ));
                    }
                }
            }
        }
        Ok(Self { events })
    }

    pub fn events(&self) -> &[TraceEvent] {
        &self.events
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn sessions(&self) -> impl Iterator<Item = &SessionEvent> {
        self.events.iter().filter_map(|e| match e {
            TraceEvent::Session(s) => Some(s),
            _ => None,
        })
    }

    pub fn session_count(&self) -> usize {
        self.sessions().count()
    }

    pub fn comment_count(&self) -> usize {
        self.events.len() - self.session_count()
    }

    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        Self::read(text.as_bytes())
    }

    pub fn read(reader: impl std::io::Read) -> Result<Self> {
        let mut events = Vec::new();
        for (i, line) in BufReader::new(reader).lines().enumerate() {
            let line = line.map_err(|e| Error::parse("trace", i + 1, e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let e: TraceEvent = serde_json::from_str(&line).map_err(|e| Error::parse("trace", i + 1, e.to_string()))?;
            events.push(e);
        }
        Trace::new(events)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(f)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_jsonl()?).map_err(|e| Error::io(path, e))
    }
}

pub fn load_lexicon(lexicon: &Path, negative_words: &Path) -> Result<SentimentLexicon> {
    let lex = fs::read_to_string(lexicon).map_err(|e| Error::io(lexicon, e))?;
    let neg = fs::read_to_string(negative_words).map_err(|e| Error::io(negative_words, e))?;
    SentimentLexicon::parse(&lex, &neg)
}

pub fn model_to_json(model: &LrModel) -> Result<String> {
    Ok(serde_json::to_string_pretty(model)? + "\n")
}

pub fn model_from_json(text: &str) -> Result<LrModel> {
    let model: LrModel = serde_json::from_str(text)?;
    model.validate()?;
    Ok(model)
}

pub fn save_model(model: &LrModel, path: &Path) -> Result<()> {
    fs::write(path, model_to_json(model)?).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<LrModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_json(&text)
}

pub fn write_alerts<W: Write>(out: W, alerts: &[AlertRecord]) -> Result<()> {
    let mut w = BufWriter::new(out);
    for a in alerts {
        serde_json::to_writer(&mut w, &AlertLine::from(a))?;
        w.write_all(b"\n").map_err(|e| Error::io("<alerts>", e))?;
    }
    w.flush().map_err(|e| Error::io("<alerts>", e))
}

/// One row of the metrics CSV; field order is the column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub policy: String,
    pub classifier_mode: String,
    pub confidence_threshold: f64,
    pub batch_size: usize,
    pub sessions: usize,
    pub alerts: usize,
    pub precision: f64,
    pub recall: f64,
    pub mean_gain: Option<f64>,
    pub total_ticks: u64,
}

pub const METRICS_HEADER: &str =
    "policy,classifier_mode,confidence_threshold,batch_size,sessions,alerts,precision,recall,mean_gain,total_ticks";

pub fn write_metrics<W: Write>(out: W, rows: &[MetricsRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(METRICS_HEADER.split(','))?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io("<metrics>", e))
}

pub fn read_metrics<R: std::io::Read>(input: R) -> Result<Vec<MetricsRow>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// One cell of a sweep gain table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainRow {
    pub confidence_threshold: f64,
    pub batch_size: usize,
    pub mean_gain: Option<f64>,
    pub gained_sessions: usize,
    pub alerts: usize,
    pub precision: f64,
    pub recall: f64,
    pub total_ticks: u64,
}

pub const GAIN_HEADER: &str =
    "confidence_threshold,batch_size,mean_gain,gained_sessions,alerts,precision,recall,total_ticks";

pub fn write_gain_table<W: Write>(out: W, rows: &[GainRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(GAIN_HEADER.split(','))?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io("<gain table>", e))
}

pub fn read_gain_table<R: std::io::Read>(input: R) -> Result<Vec<GainRow>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}
