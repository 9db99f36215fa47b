//! Session scheduling: the dynamic three-queue scheduler and the
//! round-robin and static-priority baselines.
//!
//! Dynamic policy rules:
//!
//! - New HIGH sessions join the tail of `q1`, new LOW sessions the tail of `q2`.
//! - `q1` is served front to back.
//! - After service a session goes to the tail of `q2` if it is now HIGH,
//!   `q3` if LOW.
//! - When `q1` runs dry the queues rotate: `q1 <- q2`, `q2 <- q3`, `q3 <- []`.
//!
//! HIGH sessions are therefore served every pass and LOW sessions every
//! second pass, so nothing starves.

use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Comment, MediaSession, Priority, SessionId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    Dynamic,
    RoundRobin,
    Static,
}

impl Policy {
    pub fn name(self) -> &'static str {
        match self {
            Policy::Dynamic => "dynamic",
            Policy::RoundRobin => "round-robin",
            Policy::Static => "static",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChunkMode {
    /// At most `batch_size` of the oldest unprocessed comments.
    Capped,
    /// Every unprocessed comment.
    AllAvailable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchedulerConfig {
    pub policy: Policy,
    pub confidence_threshold: f64,
    pub batch_size: usize,
    pub chunk_mode: ChunkMode,
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        Self {
            policy: Policy::Dynamic,
            confidence_threshold: 0.2,
            batch_size: 10,
            chunk_mode: ChunkMode::Capped,
        }
    }
}

impl SchedulerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.confidence_threshold) {
            return Err(Error::Config(format!(
                "confidence threshold {} outside [0, 1]",
                self.confidence_threshold
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Scheduler {
    config: SchedulerConfig,
    q1: VecDeque<SessionId>,
    q2: VecDeque<SessionId>,
    q3: VecDeque<SessionId>,
    /// Round-robin and static service cycle, in admission order.
    cycle: Vec<SessionId>,
    cursor: usize,
    admitted: HashSet<SessionId>,
    /// Admitted sessions currently sitting in a queue or in the cycle.
    queued: HashSet<SessionId>,
    rotations: u64,
}

impl Scheduler {
    pub fn new(config: SchedulerConfig) -> Self {
        Self {
            config,
            q1: VecDeque::new(),
            q2: VecDeque::new(),
            q3: VecDeque::new(),
            cycle: Vec::new(),
            cursor: 0,
            admitted: HashSet::new(),
            queued: HashSet::new(),
            rotations: 0,
        }
    }

    pub fn config(&self) -> &SchedulerConfig {
        &self.config
    }

    pub fn queues(&self) -> [&VecDeque<SessionId>; 3] {
        [&self.q1, &self.q2, &self.q3]
    }

    /// Number of queue rotations (dynamic) or cycle wrap-arounds (baselines).
    pub fn rotations(&self) -> u64 {
        self.rotations
    }

    /// Sessions that `next` can ever return.
    pub fn serviceable(&self) -> usize {
        match self.config.policy {
            Policy::Dynamic => self.admitted.len(),
            Policy::RoundRobin | Policy::Static => self.cycle.len(),
        }
    }

    pub fn is_queued(&self, id: SessionId) -> bool {
        self.queued.contains(&id)
    }

    pub fn admit(&mut self, id: SessionId, initial: Priority) -> Result<()> {
        if !self.admitted.insert(id) {
            return Err(Error::AlreadyAdmitted(id));
        }
        match self.config.policy {
            Policy::Dynamic => {
                match initial {
                    Priority::High => self.q1.push_back(id),
                    Priority::Low => self.q2.push_back(id),
                }
                self.queued.insert(id);
            }
            Policy::RoundRobin => {
                self.cycle.push(id);
                self.queued.insert(id);
            }
            // LOW sessions are admitted but parked forever.
            Policy::Static => {
                if initial == Priority::High {
                    self.cycle.push(id);
                    self.queued.insert(id);
                }
            }
        }
        Ok(())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn next(&mut self) -> Option<SessionId> {
        match self.config.policy {
            Policy::Dynamic => self.next_dynamic(),
            Policy::RoundRobin | Policy::Static => self.next_cyclic(),
        }
    }

    fn next_dynamic(&mut self) -> Option<SessionId> {
        // two rotations always surface q3 if it holds anything
        for _ in 0..3 {
            if let Some(id) = self.q1.pop_front() {
                self.queued.remove(&id);
                return Some(id);
            }
            if self.q2.is_empty() && self.q3.is_empty() {
                return None;
            }
            self.rotate();
        }
        None
    }

    fn rotate(&mut self) {
        std::mem::swap(&mut self.q1, &mut self.q2);
        std::mem::swap(&mut self.q2, &mut self.q3);
        self.rotations += 1;
    }

    fn next_cyclic(&mut self) -> Option<SessionId> {
        let len = self.cycle.len();
        for _ in 0..len {
            if self.cursor >= len {
                self.cursor = 0;
                self.rotations += 1;
            }
            let id = self.cycle[self.cursor];
            self.cursor += 1;
            if self.queued.remove(&id) {
                return Some(id);
            }
        }
        None
    }

    /// Returns a just-served session to the scheduler.
    pub fn requeue(&mut self, id: SessionId, new_priority: Priority) -> Result<()> {
        if !self.admitted.contains(&id) {
            return Err(Error::NotAdmitted(id));
        }
        if !self.queued.insert(id) {
            return Err(Error::StillQueued(id));
        }
        if self.config.policy == Policy::Dynamic {
            match new_priority {
                Priority::High => self.q2.push_back(id),
                Priority::Low => self.q3.push_back(id),
            }
        }
        Ok(())
    }

    /// Recomputes the session's priority from the mean of its whole
    /// confidence history and stores it on the session.
    pub fn setting_priority(&self, session: &mut MediaSession) -> Result<Priority> {
        let mean = session
            .confidence_history
            .mean()
            .ok_or(Error::EmptyHistory(session.id))?;
        let p = if mean >= self.config.confidence_threshold {
            Priority::High
        } else {
            Priority::Low
        };
        session.priority = p;
        Ok(p)
    }

    /// The unprocessed comments the next classification should fold.
    pub fn take_batch<'s>(&self, session: &'s MediaSession) -> &'s [Comment] {
        let pending = session.unprocessed();
        match self.config.chunk_mode {
            ChunkMode::Capped => &pending[..pending.len().min(self.config.batch_size)],
            ChunkMode::AllAvailable => pending,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::UserProfile;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use std::collections::HashMap;

    const M1: SessionId = SessionId(1);
    const M2: SessionId = SessionId(2);
    const M3: SessionId = SessionId(3);

    fn dynamic() -> Scheduler {
        Scheduler::new(SchedulerConfig::default())
    }

    fn with_policy(policy: Policy) -> Scheduler {
        Scheduler::new(SchedulerConfig {
            policy,
            ..SchedulerConfig::default()
        })
    }

    #[test]
    fn admission_places_by_priority() {
        let mut s = dynamic();
        s.admit(M1, Priority::High).unwrap();
        s.admit(M2, Priority::High).unwrap();
        s.admit(M3, Priority::Low).unwrap();
        assert_eq!(s.queues()[0], &VecDeque::from([M1, M2]));
        assert_eq!(s.queues()[1], &VecDeque::from([M3]));

        let mut e = dynamic();
        e.admit(M3, Priority::Low).unwrap();
        assert!(e.queues()[0].is_empty());
        assert_eq!(e.queues()[1], &VecDeque::from([M3]));

        assert!(matches!(s.admit(M1, Priority::Low), Err(Error::AlreadyAdmitted(_))));
    }

    #[test]
    fn walkthrough_service_order() {
        let mut s = dynamic();
        s.admit(M1, Priority::High).unwrap();
        s.admit(M2, Priority::High).unwrap();
        s.admit(M3, Priority::Low).unwrap();
        assert_eq!(s.next(), Some(M1));
        s.requeue(M1, Priority::Low).unwrap();
        assert_eq!(s.queues()[2], &VecDeque::from([M1]));
        assert_eq!(s.next(), Some(M2));
        s.requeue(M2, Priority::High).unwrap();
        assert_eq!(s.queues()[1], &VecDeque::from([M3, M2]));
        assert_eq!(s.next(), Some(M3));
        assert_eq!(s.rotations(), 1);
        assert_eq!(s.next(), Some(M2));
    }

    #[test]
    fn next_rotates_and_empties() {
        let mut s = dynamic();
        assert_eq!(s.next(), None);
        s.admit(M3, Priority::Low).unwrap();
        assert_eq!(s.next(), Some(M3));
        assert_eq!(s.next(), None);
        s.requeue(M3, Priority::Low).unwrap();
        assert_eq!(s.next(), Some(M3));
        assert_eq!(s.rotations(), 3);
    }

    #[test]
    fn requeue_rules() {
        let mut s = dynamic();
        s.admit(M1, Priority::High).unwrap();
        assert!(matches!(s.requeue(M1, Priority::High), Err(Error::StillQueued(_))));
        assert!(matches!(s.requeue(M2, Priority::High), Err(Error::NotAdmitted(_))));
        s.next();
        s.requeue(M1, Priority::High).unwrap();
        assert_eq!(s.queues()[1], &VecDeque::from([M1]));

        let mut f = dynamic();
        f.admit(M1, Priority::High).unwrap();
        f.admit(M2, Priority::High).unwrap();
        let a = f.next().unwrap();
        let b = f.next().unwrap();
        f.requeue(a, Priority::Low).unwrap();
        f.requeue(b, Priority::Low).unwrap();
        assert_eq!(f.queues()[2], &VecDeque::from([M1, M2]));
    }

    fn session_with_history(h: &[f64]) -> MediaSession {
        let mut s = MediaSession::new(SessionId(9), UserProfile::default(), "", 0);
        for &c in h {
            s.record_decision(0, c >= 0.5, c).unwrap();
        }
        s
    }

    #[test]
    fn setting_priority_examples() {
        let sched = dynamic();
        let mut s = session_with_history(&[0.15, 0.15, 0.45]);
        assert_eq!(sched.setting_priority(&mut s).unwrap(), Priority::High);
        assert_eq!(s.priority, Priority::High);
        let mut s = session_with_history(&[0.1]);
        assert_eq!(sched.setting_priority(&mut s).unwrap(), Priority::Low);
        let mut s = session_with_history(&[0.2]);
        assert_eq!(sched.setting_priority(&mut s).unwrap(), Priority::High);
        let mut s = session_with_history(&[0.25, 0.15]);
        assert_eq!(s.confidence_history.mean(), Some(0.2));
        assert_eq!(sched.setting_priority(&mut s).unwrap(), Priority::High);
        let mut s = session_with_history(&[]);
        assert!(matches!(sched.setting_priority(&mut s), Err(Error::EmptyHistory(_))));
    }

    #[test]
    fn take_batch_modes() {
        let mut s = MediaSession::new(SessionId(1), UserProfile::default(), "", 0);
        s.append_comments((0..15).map(|t| Comment::new(t, "x")).collect::<Vec<_>>())
            .unwrap();
        let capped = dynamic();
        assert_eq!(capped.take_batch(&s), &s.comments()[..10]);
        let all = Scheduler::new(SchedulerConfig {
            chunk_mode: ChunkMode::AllAvailable,
            ..SchedulerConfig::default()
        });
        assert_eq!(all.take_batch(&s).len(), 15);
        let empty = MediaSession::new(SessionId(2), UserProfile::default(), "", 0);
        assert!(capped.take_batch(&empty).is_empty());
    }

    #[test]
    fn round_robin_cycles_in_admission_order() {
        let mut s = with_policy(Policy::RoundRobin);
        s.admit(M1, Priority::Low).unwrap();
        s.admit(M2, Priority::High).unwrap();
        s.admit(M3, Priority::Low).unwrap();
        let mut order = Vec::new();
        for _ in 0..6 {
            let id = s.next().unwrap();
            order.push(id);
            s.requeue(id, Priority::High).unwrap();
        }
        assert_eq!(order, vec![M1, M2, M3, M1, M2, M3]);
    }

    #[test]
    fn static_serves_only_initial_high() {
        let mut s = with_policy(Policy::Static);
        s.admit(M1, Priority::Low).unwrap();
        s.admit(M2, Priority::High).unwrap();
        s.admit(M3, Priority::Low).unwrap();
        for _ in 0..5 {
            let id = s.next().unwrap();
            assert_eq!(id, M2);
            s.requeue(id, Priority::Low).unwrap();
        }
        assert_eq!(s.serviceable(), 1);
    }

    proptest! {
        #[test]
        fn conservation(ops in prop::collection::vec((0u8..3, any::<bool>()), 0..300)) {
            let mut s = dynamic();
            let mut out: Vec<SessionId> = Vec::new();
            let mut next_id = 0;
            for (op, high) in ops {
                let p = if high { Priority::High } else { Priority::Low };
                match op {
                    0 => { s.admit(SessionId(next_id), p).unwrap(); next_id += 1; }
                    1 => if let Some(id) = s.next() { out.push(id); },
                    _ => if let Some(id) = out.pop() { s.requeue(id, p).unwrap(); },
                }
                let mut seen: Vec<SessionId> = s.queues().iter().flat_map(|q| q.iter().copied()).collect();
                let total = seen.len() + out.len();
                seen.extend(out.iter().copied());
                seen.sort();
                seen.dedup();
                prop_assert_eq!(seen.len(), total);
                prop_assert_eq!(total as u64, next_id);
            }
        }
    }

    #[test]
    fn no_starvation_under_fuzz() {
        for seed in 0..5 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut s = dynamic();
            let mut last_pass: HashMap<SessionId, u64> = HashMap::new();
            let mut next_id = 0u64;
            for _ in 0..10_000 {
                if rng.gen_bool(0.05) || next_id == 0 {
                    let id = SessionId(next_id);
                    next_id += 1;
                    let p = if rng.gen_bool(0.3) {
                        Priority::High
                    } else {
                        Priority::Low
                    };
                    s.admit(id, p).unwrap();
                    // a fresh LOW session waits at most one rotation
                    last_pass.insert(id, s.rotations());
                }
                let id = s.next().unwrap();
                let pass = s.rotations();
                assert!(
                    pass - last_pass[&id] <= 2,
                    "session {id} waited {} rotations",
                    pass - last_pass[&id]
                );
                last_pass.insert(id, pass);
                // adversarial: heavily favour HIGH so LOW sessions are crowded out
                let p = if rng.gen_bool(0.8) {
                    Priority::High
                } else {
                    Priority::Low
                };
                s.requeue(id, p).unwrap();
            }
        }
    }
}
