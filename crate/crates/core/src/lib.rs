//! Streaming cyberbullying detection for media sessions.
//!
//! The engine ranks sessions with a cheap profile/caption predictor, serves
//! them through a three-queue priority scheduler whose priorities follow each
//! session's classification-confidence history, and classifies new comments
//! incrementally: cached feature sums and cached per-feature weight products
//! mean each invocation only pays for the comments it has not seen yet.
//!
//! [`sim`] drives the whole pipeline over a virtual clock so scheduling
//! policies and classifier modes can be compared deterministically.

pub mod alert;
pub mod error;
pub mod features;
pub mod io;
pub mod lr;
pub mod model;
pub mod predictor;
pub mod scheduler;
pub mod sentiment;
pub mod sim;

pub use error::{Error, Result};
pub use model::{
    Comment, ConfidenceHistory, Decision, MediaSession, Priority, SessionId, SessionStore, Tick, UserProfile,
};
