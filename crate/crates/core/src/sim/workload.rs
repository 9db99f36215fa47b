//! Seeded synthetic workloads.
//!
//! Benign sessions get mostly friendly comments with the odd negative word.
//! Bullying sessions carry the same background plus one or more bursts of
//! closely spaced, heavily negative comments. Their posters and captions are
//! shifted by `profile_signal` so the profile/caption predictor has something
//! to work with.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, LogNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{CommentEvent, SessionEvent, Trace, TraceEvent};
use crate::model::{SessionId, Tick};

const POSITIVE: &[&str] = &[
    "love",
    "great",
    "awesome",
    "nice",
    "beautiful",
    "cool",
    "funny",
    "cute",
    "amazing",
    "best",
    "good",
    "happy",
    "lol",
    "sweet",
    "perfect",
    "talented",
    "wonderful",
    "hilarious",
    "pretty",
    "gorgeous",
];
const NEGATIVE: &[&str] = &[
    "ugly",
    "stupid",
    "dumb",
    "idiot",
    "hate",
    "loser",
    "fat",
    "disgusting",
    "pathetic",
    "trash",
    "gross",
    "freak",
    "worst",
    "fake",
    "lame",
    "shut",
    "sucks",
    "die",
];
const FILLER: &[&str] = &[
    "the", "you", "this", "video", "is", "so", "my", "what", "omg", "girl", "guy", "lmao", "why", "look", "song",
    "dance", "again", "watch", "it", "that", "are", "me", "he", "she", "haha", "yes", "no", "wait", "bro", "up",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadConfig {
    pub session_count: usize,
    pub bully_fraction: f64,
    /// Sessions are created uniformly over `[0, creation_window)`.
    pub creation_window: Tick,
    pub min_comments: usize,
    pub max_comments: usize,
    /// Mean gap between background comments, in ticks.
    pub mean_interarrival: f64,
    /// Mean gap between comments inside a burst, in ticks.
    pub burst_interarrival: f64,
    /// Per-token chance of a negative word in benign sessions.
    pub benign_negative_p: f64,
    /// Per-token chance of a negative word in bullying sessions outside bursts.
    pub bully_negative_p: f64,
    /// Per-token chance of a negative word inside a burst.
    pub burst_negative_p: f64,
    /// Per-token chance of a positive word outside bursts.
    pub positive_p: f64,
    pub min_burst_len: usize,
    pub max_burst_len: usize,
    pub max_bursts: usize,
    /// How far bullying posters and captions drift from benign ones; 0 makes
    /// them indistinguishable to the initial predictor.
    pub profile_signal: f64,
    pub rng_seed: u64,
}

impl Default for WorkloadConfig {
    fn default() -> Self {
        Self {
            session_count: 1000,
            bully_fraction: 0.1,
            creation_window: 20_000,
            min_comments: 20,
            max_comments: 120,
            mean_interarrival: 60.0,
            burst_interarrival: 4.0,
            benign_negative_p: 0.02,
            bully_negative_p: 0.04,
            burst_negative_p: 0.45,
            positive_p: 0.2,
            min_burst_len: 8,
            max_burst_len: 15,
            max_bursts: 3,
            profile_signal: 2.0,
            rng_seed: 7,
        }
    }
}

impl WorkloadConfig {
    pub fn validate(&self) -> Result<()> {
        let probs = [
            ("bully_fraction", self.bully_fraction),
            ("benign_negative_p", self.benign_negative_p),
            ("bully_negative_p", self.bully_negative_p),
            ("burst_negative_p", self.burst_negative_p),
            ("positive_p", self.positive_p),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} = {p} is not a probability")));
            }
        }
        for (name, p) in [("benign", self.benign_negative_p), ("bully", self.bully_negative_p)] {
            if p + self.positive_p > 1.0 {
                return Err(Error::Config(format!(
                    "{name} negative plus positive probability exceeds 1"
                )));
            }
        }
        if !(0.0..=2.5).contains(&self.profile_signal) {
            return Err(Error::Config(format!(
                "profile_signal = {} is outside [0, 2.5]",
                self.profile_signal
            )));
        }
        if self.min_comments > self.max_comments || self.min_burst_len > self.max_burst_len {
            return Err(Error::Config("min bound exceeds max bound".into()));
        }
        if [self.mean_interarrival, self.burst_interarrival]
            .iter()
            .any(|m| m.is_nan() || *m <= 0.0)
        {
            return Err(Error::Config("interarrival means must be positive".into()));
        }
        if self.creation_window == 0 {
            return Err(Error::Config("creation window must be positive".into()));
        }
        Ok(())
    }
}

fn sentence(rng: &mut ChaCha8Rng, len: usize, negative_p: f64, positive_p: f64) -> String {
    let words: Vec<&str> = (0..len)
        .map(|_| {
            let u: f64 = rng.gen();
            let pool = if u < negative_p {
                NEGATIVE
            } else if u < negative_p + positive_p {
                POSITIVE
            } else {
                FILLER
            };
            *pool.choose(rng).expect("non-empty vocabulary")
        })
        .collect();
    words.join(" ")
}

fn lognormal(rng: &mut ChaCha8Rng, mu: f64, sigma: f64) -> u64 {
    LogNormal::new(mu, sigma).expect("valid lognormal").sample(rng).round() as u64
}

/// Generates a time-sorted trace. Same config, same bytes.
pub fn generate_workload(config: &WorkloadConfig) -> Result<Trace> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let background = Exp::new(1.0 / config.mean_interarrival).expect("positive rate");
    let burst_gap = Exp::new(1.0 / config.burst_interarrival).expect("positive rate");

    let mut events: Vec<TraceEvent> = Vec::new();
    for i in 0..config.session_count {
        let bully = rng.gen_bool(config.bully_fraction);
        let created_at = rng.gen_range(0..config.creation_window);
        let shift = if bully { config.profile_signal } else { 0.0 };
        let followers = lognormal(&mut rng, 5.5 + 0.8 * shift, 1.5);
        let followings = lognormal(&mut rng, 5.0 - 0.2 * shift, 1.0);
        let posts = lognormal(&mut rng, 3.5 + 0.4 * shift, 1.2);
        let cap_len = rng.gen_range(2..=8);
        let caption = sentence(&mut rng, cap_len, 0.03 + 0.07 * shift, 0.20 - 0.08 * shift);
        let id = SessionId(i as u64);
        events.push(TraceEvent::Session(SessionEvent {
            id,
            created_at,
            followers,
            followings,
            posts,
            caption,
            label: Some(bully),
        }));

        let n = rng.gen_range(config.min_comments..=config.max_comments);
        let mut in_burst = vec![false; n];
        if bully && n > 0 {
            let bursts = rng.gen_range(1..=config.max_bursts.max(1));
            for _ in 0..bursts {
                let len = rng.gen_range(config.min_burst_len..=config.max_burst_len).min(n);
                let start = rng.gen_range(0..=n - len);
                in_burst[start..start + len].iter_mut().for_each(|b| *b = true);
            }
        }
        let mut t = created_at as f64;
        for &burst in &in_burst {
            let gap = if burst {
                burst_gap.sample(&mut rng)
            } else {
                background.sample(&mut rng)
            };
            t += gap;
            let len = rng.gen_range(3..=10);
            let text = if burst {
                sentence(&mut rng, len, config.burst_negative_p, 0.05)
            } else if bully {
                sentence(&mut rng, len, config.bully_negative_p, config.positive_p)
            } else {
                sentence(&mut rng, len, config.benign_negative_p, config.positive_p)
            };
            events.push(TraceEvent::Comment(CommentEvent {
                session_id: id,
                at: t.round() as Tick,
                text,
            }));
        }
    }
    // sessions sort ahead of comments at the same tick; stable sort keeps
    // each session's comments in order
    events.sort_by_key(|e| (e.time(), matches!(e, TraceEvent::Comment(_))));
    Trace::new(events)
}
