//! Predictor and main-classifier feature vectors, batch and incremental.
//!
//! The four comment-derived main features are plain sums over comments, so
//! the features of `n + k` comments are the cached features of `n` comments
//! plus a delta computed from the `k` new ones alone.

use std::fmt;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Comment, MediaSession, UserProfile};
use crate::sentiment::SentimentLexicon;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SchemaId {
    #[serde(rename = "PREDICTOR_V1")]
    PredictorV1,
    #[serde(rename = "MAIN_V1")]
    MainV1,
}

impl SchemaId {
    #[allow(clippy::len_without_is_empty)]
    pub fn len(self) -> usize {
        self.feature_names().len()
    }

    pub fn feature_names(self) -> &'static [&'static str] {
        match self {
            SchemaId::PredictorV1 => &[
                "follower_count",
                "following_count",
                "post_count",
                "caption_polarity",
                "caption_subjectivity",
            ],
            SchemaId::MainV1 => &[
                "follower_count",
                "following_count",
                "caption_polarity",
                "caption_subjectivity",
                "sum_comment_polarity",
                "sum_comment_subjectivity",
                "total_negative_words",
                "total_negative_comments",
            ],
        }
    }
}

impl fmt::Display for SchemaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemaId::PredictorV1 => "PREDICTOR_V1",
            SchemaId::MainV1 => "MAIN_V1",
        })
    }
}

/// Slot indices into a `MAIN_V1` vector.
pub mod main_slot {
    pub const FOLLOWERS: usize = 0;
    pub const FOLLOWINGS: usize = 1;
    pub const CAPTION_POLARITY: usize = 2;
    pub const CAPTION_SUBJECTIVITY: usize = 3;
    pub const SUM_POLARITY: usize = 4;
    pub const SUM_SUBJECTIVITY: usize = 5;
    pub const NEGATIVE_WORDS: usize = 6;
    pub const NEGATIVE_COMMENTS: usize = 7;
    /// First comment-derived slot; everything before it is static.
    pub const FIRST_ADDITIVE: usize = SUM_POLARITY;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    schema: SchemaId,
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(schema: SchemaId, values: Vec<f64>) -> Result<Self> {
        if values.len() != schema.len() {
            return Err(Error::FeatureLength {
                schema,
                expected: schema.len(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { schema, values })
    }

    pub fn schema(&self) -> SchemaId {
        self.schema
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest per-component absolute difference.
    pub fn max_abs_diff(&self, other: &FeatureVector) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// The four comment-derived features over a batch of comments.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AdditiveDelta {
    pub sum_polarity: f64,
    pub sum_subjectivity: f64,
    pub negative_words: u64,
    pub negative_comments: u64,
    /// Number of comments the delta was computed over.
    pub comments: usize,
}

impl Add for AdditiveDelta {
    type Output = AdditiveDelta;

    fn add(mut self, rhs: AdditiveDelta) -> AdditiveDelta {
        self += rhs;
        self
    }
}

impl AddAssign for AdditiveDelta {
    fn add_assign(&mut self, rhs: AdditiveDelta) {
        self.sum_polarity += rhs.sum_polarity;
        self.sum_subjectivity += rhs.sum_subjectivity;
        self.negative_words += rhs.negative_words;
        self.negative_comments += rhs.negative_comments;
        self.comments += rhs.comments;
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FeatureExtractor<'a> {
    lexicon: &'a SentimentLexicon,
}

impl<'a> FeatureExtractor<'a> {
    pub fn new(lexicon: &'a SentimentLexicon) -> Self {
        Self { lexicon }
    }

    pub fn lexicon(&self) -> &'a SentimentLexicon {
        self.lexicon
    }

    pub fn predictor_features(&self, profile: &UserProfile, caption: &str) -> FeatureVector {
        let cap = self.lexicon.score(caption);
        FeatureVector {
            schema: SchemaId::PredictorV1,
            values: vec![
                profile.follower_count as f64,
                profile.following_count as f64,
                profile.post_count as f64,
                cap.polarity,
                cap.subjectivity,
            ],
        }
    }

    fn static_main(&self, profile: &UserProfile, caption: &str) -> Vec<f64> {
        let cap = self.lexicon.score(caption);
        let mut v = vec![0.0; SchemaId::MainV1.len()];
        v[main_slot::FOLLOWERS] = profile.follower_count as f64;
        v[main_slot::FOLLOWINGS] = profile.following_count as f64;
        v[main_slot::CAPTION_POLARITY] = cap.polarity;
        v[main_slot::CAPTION_SUBJECTIVITY] = cap.subjectivity;
        v
    }

    /// Full recomputation of `MAIN_V1` over the first `upto` comments.
    pub fn batch(&self, session: &MediaSession, upto: usize) -> Result<FeatureVector> {
        self.batch_from_parts(&session.poster, &session.caption, session.comments(), upto)
    }

    pub fn batch_from_parts(
        &self,
        profile: &UserProfile,
        caption: &str,
        comments: &[Comment],
        upto: usize,
    ) -> Result<FeatureVector> {
        if upto > comments.len() {
            return Err(Error::OutOfRange {
                upto,
                len: comments.len(),
            });
        }
        let mut v = self.static_main(profile, caption);
        for c in &comments[..upto] {
            let s = self.lexicon.score(&c.text);
            v[main_slot::SUM_POLARITY] += s.polarity;
            v[main_slot::SUM_SUBJECTIVITY] += s.subjectivity;
            v[main_slot::NEGATIVE_WORDS] += s.negative_words as f64;
            if s.negative_words > 0 {
                v[main_slot::NEGATIVE_COMMENTS] += 1.0;
            }
        }
        Ok(FeatureVector {
            schema: SchemaId::MainV1,
            values: v,
        })
    }

    /// Additive features over exactly `comments`; cost depends on their count only.
    pub fn delta(&self, comments: &[Comment]) -> AdditiveDelta {
        let mut d = AdditiveDelta {
            comments: comments.len(),
            ..AdditiveDelta::default()
        };
        for c in comments {
            let s = self.lexicon.score(&c.text);
            d.sum_polarity += s.polarity;
            d.sum_subjectivity += s.subjectivity;
            d.negative_words += s.negative_words;
            if s.negative_words > 0 {
                d.negative_comments += 1;
            }
        }
        d
    }

    /// Folds a delta over comments `[n, n + batch_size)` into the session's
    /// cached features and advances its processed count.
    pub fn fold(&self, session: &mut MediaSession, delta: &AdditiveDelta, batch_size: usize) -> Result<FeatureVector> {
        if delta.comments != batch_size {
            return Err(Error::DeltaMismatch {
                delta: delta.comments,
                batch: batch_size,
            });
        }
        let n = session.processed_count();
        let upto = n + batch_size;
        if upto > session.comments().len() {
            return Err(Error::OutOfRange {
                upto,
                len: session.comments().len(),
            });
        }
        let mut v = match session.cached_features() {
            Some(f) => f.values.clone(),
            None => self.static_main(&session.poster, &session.caption),
        };
        v[main_slot::SUM_POLARITY] += delta.sum_polarity;
        v[main_slot::SUM_SUBJECTIVITY] += delta.sum_subjectivity;
        v[main_slot::NEGATIVE_WORDS] += delta.negative_words as f64;
        v[main_slot::NEGATIVE_COMMENTS] += delta.negative_comments as f64;
        let fv = FeatureVector {
            schema: SchemaId::MainV1,
            values: v,
        };
        session.set_feature_cache(fv.clone(), upto);
        Ok(fv)
    }

    /// Replaces the cache with a full recomputation over `upto` comments.
    pub fn recompute(&self, session: &mut MediaSession, upto: usize) -> Result<FeatureVector> {
        let fv = self.batch(session, upto)?;
        session.set_feature_cache(fv.clone(), upto);
        Ok(fv)
    }

    /// Checks the cache against batch extraction within `tolerance`.
    pub fn verify_cache(&self, session: &MediaSession, tolerance: f64) -> Result<()> {
        let Some(cached) = session.cached_features() else {
            return Ok(());
        };
        let fresh = self.batch(session, session.processed_count())?;
        for (i, (a, b)) in cached.values().iter().zip(fresh.values()).enumerate() {
            if (a - b).abs() > tolerance {
                return Err(Error::CacheDivergence {
                    session: session.id,
                    index: i,
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SessionId;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn lex() -> SentimentLexicon {
        let mut l = SentimentLexicon::new();
        l.insert("bad", -0.7, 0.6).unwrap();
        l.insert("nice", 0.5, 0.4).unwrap();
        l.insert("idiot", -0.8, 1.0).unwrap();
        l.insert_negative("idiot").unwrap();
        l.insert_negative("loser").unwrap();
        l
    }

    const WORDS: &[&str] = &["bad", "nice", "idiot", "loser", "the", "video", "lol"];

    fn random_session(seed: u64, n: usize) -> MediaSession {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut s = MediaSession::new(SessionId(seed), UserProfile::new(120, 40, 9), "nice bad", 0);
        let comments = (0..n).map(|t| {
            let len = rng.gen_range(0..6);
            let text: Vec<&str> = (0..len).map(|_| WORDS[rng.gen_range(0..WORDS.len())]).collect();
            Comment::new(t as u64, text.join(" "))
        });
        s.append_comments(comments.collect::<Vec<_>>()).unwrap();
        s
    }

    /// Independent per-comment oracle: scores each comment on its own and sums.
    fn oracle_additive(l: &SentimentLexicon, comments: &[Comment]) -> [f64; 4] {
        let mut acc = [0.0; 4];
        for c in comments {
            let toks = crate::sentiment::tokenize(&c.text);
            let matched: Vec<_> = toks.iter().filter_map(|t| l.entry(t)).collect();
            if !matched.is_empty() {
                acc[0] += matched.iter().map(|e| e.polarity).sum::<f64>() / matched.len() as f64;
                acc[1] += matched.iter().map(|e| e.subjectivity).sum::<f64>() / matched.len() as f64;
            }
            let neg = toks.iter().filter(|t| l.is_negative(t)).count();
            acc[2] += neg as f64;
            acc[3] += (neg > 0) as u8 as f64;
        }
        acc
    }

    #[test]
    fn predictor_zero_case() {
        let l = lex();
        let fx = FeatureExtractor::new(&l);
        let v = fx.predictor_features(&UserProfile::default(), "");
        assert_eq!(v.values(), &[0.0; 5]);
        assert_eq!(v.schema(), SchemaId::PredictorV1);
    }

    #[test]
    fn predictor_composes_sentiment() {
        let l = lex();
        let fx = FeatureExtractor::new(&l);
        let v = fx.predictor_features(&UserProfile::new(10, 5, 3), "so bad");
        assert_eq!(
            v.values(),
            &[10.0, 5.0, 3.0, l.polarity("so bad"), l.subjectivity("so bad")]
        );
        assert_eq!(v.values(), &[10.0, 5.0, 3.0, -0.7, 0.6]);

        let w = fx.predictor_features(&UserProfile::new(10, 5, 3), "nice");
        assert_eq!(v.values()[..3], w.values()[..3]);
        assert_ne!(v.values()[3..], w.values()[3..]);
    }

    #[test]
    fn batch_upto_zero_and_range() {
        let l = lex();
        let fx = FeatureExtractor::new(&l);
        let s = random_session(1, 5);
        let v = fx.batch(&s, 0).unwrap();
        assert_eq!(&v.values()[main_slot::FIRST_ADDITIVE..], &[0.0; 4]);
        assert!(matches!(fx.batch(&s, 6), Err(Error::OutOfRange { upto: 6, len: 5 })));
    }

    #[test]
    fn batch_negative_comment_counting() {
        let l = lex();
        let fx = FeatureExtractor::new(&l);
        let mut s = MediaSession::new(SessionId(1), UserProfile::default(), "", 0);
        s.append_comments([Comment::new(0, "what an idiot"), Comment::new(1, "nice one")])
            .unwrap();
        let v = fx.batch(&s, 2).unwrap();
        assert_eq!(v.values()[main_slot::NEGATIVE_WORDS], 1.0);
        assert_eq!(v.values()[main_slot::NEGATIVE_COMMENTS], 1.0);
    }

    #[test]
    fn batch_matches_per_comment_oracle() {
        let l = lex();
        let fx = FeatureExtractor::new(&l);
        let s = random_session(42, 30);
        let v = fx.batch(&s, 30).unwrap();
        let o = oracle_additive(&l, s.comments());
        for (got, want) in v.values()[main_slot::FIRST_ADDITIVE..].iter().zip(o) {
            assert!((got - want).abs() < 1e-9);
        }
    }

    #[test]
    fn delta_examples() {
        let l = lex();
        let fx = FeatureExtractor::new(&l);
        assert_eq!(fx.delta(&[]), AdditiveDelta::default());

        let s = random_session(3, 10);
        let d = fx.delta(s.comments());
        let b = fx.batch(&s, 10).unwrap();
        assert_eq!(d.comments, 10);
        assert!((d.sum_polarity - b.values()[main_slot::SUM_POLARITY]).abs() < 1e-12);
        assert!((d.sum_subjectivity - b.values()[main_slot::SUM_SUBJECTIVITY]).abs() < 1e-12);
        assert_eq!(d.negative_words as f64, b.values()[main_slot::NEGATIVE_WORDS]);
        assert_eq!(d.negative_comments as f64, b.values()[main_slot::NEGATIVE_COMMENTS]);
        assert!(d.negative_words >= d.negative_comments);
    }

    #[test]
    fn fold_examples() {
        let l = lex();
        let fx = FeatureExtractor::new(&l);
        let mut s = random_session(5, 40);

        let before = fx.fold(&mut s, &fx.delta(&[]), 0).unwrap();
        assert_eq!(s.processed_count(), 0);
        assert_eq!(before, fx.batch(&s, 0).unwrap());

        let d = fx.delta(&s.comments()[0..10]);
        let v = fx.fold(&mut s, &d, 10).unwrap();
        assert_eq!(s.processed_count(), 10);
        assert!(v.max_abs_diff(&fx.batch(&s, 10).unwrap()) < 1e-9);
        assert_eq!(v.values()[..4], before.values()[..4]);

        let mut a = s.clone();
        let mut b = s.clone();
        let d1 = fx.delta(&a.comments()[10..20]);
        fx.fold(&mut a, &d1, 10).unwrap();
        let d2 = fx.delta(&a.comments()[20..30]);
        let two = fx.fold(&mut a, &d2, 10).unwrap();
        let d20 = fx.delta(&b.comments()[10..30]);
        let one = fx.fold(&mut b, &d20, 20).unwrap();
        assert!(two.max_abs_diff(&one) < 1e-9);
    }

    #[test]
    fn fold_rejects_mismatch() {
        let l = lex();
        let fx = FeatureExtractor::new(&l);
        let mut s = random_session(9, 5);
        let d = fx.delta(&s.comments()[0..3]);
        assert!(matches!(fx.fold(&mut s, &d, 4), Err(Error::DeltaMismatch { .. })));
        let d = fx.delta(&random_session(9, 8).comments()[0..8]);
        assert!(matches!(fx.fold(&mut s, &d, 8), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn vector_validation() {
        assert!(FeatureVector::new(SchemaId::MainV1, vec![0.0; 5]).is_err());
        assert!(matches!(
            FeatureVector::new(SchemaId::PredictorV1, vec![0.0, 1.0, f64::NAN, 0.0, 0.0]),
            Err(Error::NonFinite(2))
        ));
    }

    proptest! {
        #[test]
        fn delta_is_additive(seed in any::<u64>(), n in 0usize..40, split in 0usize..40) {
            let l = lex();
            let fx = FeatureExtractor::new(&l);
            let s = random_session(seed, n);
            let k = split.min(n);
            let (a, b) = s.comments().split_at(k);
            let whole = fx.delta(s.comments());
            let parts = fx.delta(a) + fx.delta(b);
            prop_assert!((whole.sum_polarity - parts.sum_polarity).abs() < 1e-9);
            prop_assert!((whole.sum_subjectivity - parts.sum_subjectivity).abs() < 1e-9);
            prop_assert_eq!(whole.negative_words, parts.negative_words);
            prop_assert_eq!(whole.negative_comments, parts.negative_comments);
            prop_assert_eq!(whole.comments, parts.comments);
        }

        #[test]
        fn any_partition_matches_batch(seed in any::<u64>(), n in 0usize..120, cuts in prop::collection::vec(1usize..25, 0..12)) {
            let l = lex();
            let fx = FeatureExtractor::new(&l);
            let mut s = random_session(seed, n);
            let mut pos = 0;
            for c in cuts.into_iter().chain(std::iter::once(usize::MAX)) {
                let k = c.min(n - pos);
                let d = fx.delta(&s.comments()[pos..pos + k]);
                fx.fold(&mut s, &d, k).unwrap();
                pos += k;
                prop_assert!(fx.verify_cache(&s, 1e-9).is_ok());
            }
            prop_assert_eq!(s.processed_count(), n);
        }
    }
}
