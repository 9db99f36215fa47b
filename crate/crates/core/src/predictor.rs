//! One-shot priority prediction for new sessions from profile and caption.

use crate::error::{Error, Result};
use crate::features::{FeatureExtractor, SchemaId};
use crate::lr::LrModel;
use crate::model::{Priority, UserProfile};
use crate::sentiment::SentimentLexicon;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialPrediction {
    pub priority: Priority,
    pub confidence: f64,
}

/// HIGH iff confidence reaches the model threshold; ties go HIGH.
///
/// Comments are deliberately not an input.
pub fn predict_initial_priority(
    model: &LrModel,
    profile: &UserProfile,
    caption: &str,
    lexicon: &SentimentLexicon,
) -> Result<InitialPrediction> {
    if model.schema_id != SchemaId::PredictorV1 {
        return Err(Error::SchemaMismatch {
            expected: SchemaId::PredictorV1,
            got: model.schema_id,
        });
    }
    let features = FeatureExtractor::new(lexicon).predictor_features(profile, caption);
    let c = model.predict(&features)?;
    Ok(InitialPrediction {
        priority: if c.confidence >= model.threshold {
            Priority::High
        } else {
            Priority::Low
        },
        confidence: c.confidence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::time::Instant;

    #[test]
    fn zero_model_ties_high() {
        let lex = SentimentLexicon::bundled();
        let m = LrModel::zeros(SchemaId::PredictorV1);
        let p = predict_initial_priority(&m, &UserProfile::new(5, 5, 5), "great video", &lex).unwrap();
        assert_eq!(p.confidence, 0.5);
        assert_eq!(p.priority, Priority::High);
    }

    #[test]
    fn pure() {
        let lex = SentimentLexicon::bundled();
        let mut m = LrModel::zeros(SchemaId::PredictorV1);
        m.weights = vec![0.001, -0.002, 0.01, -1.0, 0.5];
        let a = predict_initial_priority(&m, &UserProfile::new(50, 10, 2), "ugly", &lex).unwrap();
        let b = predict_initial_priority(&m, &UserProfile::new(50, 10, 2), "ugly", &lex).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_main_schema() {
        let lex = SentimentLexicon::bundled();
        let m = LrModel::zeros(SchemaId::MainV1);
        assert!(matches!(
            predict_initial_priority(&m, &UserProfile::default(), "", &lex),
            Err(Error::SchemaMismatch { .. })
        ));
    }

    #[test]
    fn thousand_predictions_under_a_second() {
        let lex = SentimentLexicon::bundled();
        let m = LrModel::zeros(SchemaId::PredictorV1);
        let start = Instant::now();
        for i in 0..1000u64 {
            predict_initial_priority(&m, &UserProfile::new(i, i / 2, i % 7), "so cute lol love this", &lex).unwrap();
        }
        assert!(start.elapsed().as_secs_f64() < 1.0);
    }
}
