//! Logistic regression: training, standard inference and incremental
//! inference over cached per-feature products.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureVector, SchemaId};
use crate::model::MediaSession;

pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Trained weights plus the z-score parameters used to standardize inputs.
///
/// Field names are the on-disk model format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrModel {
    pub schema_id: SchemaId,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub means: Vec<f64>,
    pub stddevs: Vec<f64>,
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub decision: bool,
    /// Probability of the cyberbullying class.
    pub confidence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncrementalOutcome {
    pub classification: Classification,
    /// Per-feature products recomputed on this call.
    pub product_updates: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.5,
            epochs: 1500,
            l2: 1e-4,
            seed: 0,
        }
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Sums products in index order after the bias. Standard and incremental
/// inference share this so equal products give bit-equal scores.
fn affine_score(bias: f64, products: &[f64]) -> f64 {
    let mut z = bias;
    for p in products {
        z += p;
    }
    z
}

/// Mean log loss plus `l2 / 2 * |w|^2` over standardized inputs.
pub fn log_loss(weights: &[f64], bias: f64, xs: &[Vec<f64>], ys: &[bool], l2: f64) -> f64 {
    let n = xs.len() as f64;
    let data: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, &y)| {
            let z = bias + dot(weights, x);
            softplus(z) - if y { z } else { 0.0 }
        })
        .sum::<f64>()
        / n;
    data + 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>()
}

/// Analytic gradient of [`log_loss`]: `(d/dw, d/db)`.
pub fn log_loss_gradient(weights: &[f64], bias: f64, xs: &[Vec<f64>], ys: &[bool], l2: f64) -> (Vec<f64>, f64) {
    let n = xs.len() as f64;
    let mut gw = vec![0.0; weights.len()];
    let mut gb = 0.0;
    for (x, &y) in xs.iter().zip(ys) {
        let err = sigmoid(bias + dot(weights, x)) - if y { 1.0 } else { 0.0 };
        for (g, xi) in gw.iter_mut().zip(x) {
            *g += err * xi;
        }
        gb += err;
    }
    for (g, w) in gw.iter_mut().zip(weights) {
        *g = *g / n + l2 * w;
    }
    (gw, gb / n)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Full-batch gradient descent on L2-regularized log loss.
pub fn train(dataset: &[(FeatureVector, bool)], config: &TrainConfig) -> Result<LrModel> {
    if config.learning_rate.is_nan() || config.learning_rate <= 0.0 || config.l2.is_nan() || config.l2 < 0.0 {
        return Err(Error::Config(
            "learning rate must be positive and l2 non-negative".into(),
        ));
    }
    let positives = dataset.iter().filter(|(_, y)| *y).count();
    if dataset.len() < 2 || positives == 0 || positives == dataset.len() {
        return Err(Error::SingleClass);
    }
    let schema = dataset[0].0.schema();
    if let Some((fv, _)) = dataset.iter().find(|(fv, _)| fv.schema() != schema) {
        return Err(Error::SchemaMismatch {
            expected: schema,
            got: fv.schema(),
        });
    }

    let d = schema.len();
    let n = dataset.len() as f64;
    let mut means = vec![0.0; d];
    for (fv, _) in dataset {
        for (m, x) in means.iter_mut().zip(fv.values()) {
            *m += x;
        }
    }
    means.iter_mut().for_each(|m| *m /= n);
    let mut stddevs = vec![0.0; d];
    for (fv, _) in dataset {
        for ((s, x), m) in stddevs.iter_mut().zip(fv.values()).zip(&means) {
            *s += (x - m) * (x - m);
        }
    }
    let degenerate: Vec<bool> = stddevs
        .iter_mut()
        .map(|s| {
            *s = (*s / n).sqrt();
            let flat = s.is_nan() || *s <= 1e-12;
            if flat {
                *s = 1.0;
            }
            flat
        })
        .collect();

    let xs: Vec<Vec<f64>> = dataset
        .iter()
        .map(|(fv, _)| standardize(fv.values(), &means, &stddevs))
        .collect();
    let ys: Vec<bool> = dataset.iter().map(|(_, y)| *y).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut weights: Vec<f64> = degenerate
        .iter()
        .map(|&flat| if flat { 0.0 } else { rng.gen_range(-0.01..0.01) })
        .collect();
    let mut bias = 0.0;
    for _ in 0..config.epochs {
        let (gw, gb) = log_loss_gradient(&weights, bias, &xs, &ys, config.l2);
        for ((w, g), &flat) in weights.iter_mut().zip(&gw).zip(&degenerate) {
            if !flat {
                *w -= config.learning_rate * g;
            }
        }
        bias -= config.learning_rate * gb;
    }

    Ok(LrModel {
        schema_id: schema,
        weights,
        bias,
        means,
        stddevs,
        threshold: DEFAULT_THRESHOLD,
    })
}

fn standardize(values: &[f64], means: &[f64], stddevs: &[f64]) -> Vec<f64> {
    values
        .iter()
        .zip(means)
        .zip(stddevs)
        .map(|((x, m), s)| (x - m) / s)
        .collect()
}

impl LrModel {
    /// A model with all-zero weights and identity standardization.
    pub fn zeros(schema_id: SchemaId) -> Self {
        let d = schema_id.len();
        Self {
            schema_id,
            weights: vec![0.0; d],
            bias: 0.0,
            means: vec![0.0; d],
            stddevs: vec![1.0; d],
            threshold: DEFAULT_THRESHOLD,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.schema_id.len();
        for (name, len) in [
            ("weights", self.weights.len()),
            ("means", self.means.len()),
            ("stddevs", self.stddevs.len()),
        ] {
            if len != d {
                return Err(Error::Config(format!(
                    "{name} has {len} entries, {} needs {d}",
                    self.schema_id
                )));
            }
        }
        if self.stddevs.iter().any(|s| !s.is_finite() || *s <= 0.0) {
            return Err(Error::Config("stddevs must be positive and finite".into()));
        }
        if self
            .weights
            .iter()
            .chain(&self.means)
            .chain([&self.bias])
            .any(|v| !v.is_finite())
        {
            return Err(Error::Config("model parameters must be finite".into()));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::Config(format!("threshold {} outside (0, 1)", self.threshold)));
        }
        Ok(())
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    fn check(&self, features: &FeatureVector) -> Result<()> {
        if features.schema() != self.schema_id {
            return Err(Error::SchemaMismatch {
                expected: self.schema_id,
                got: features.schema(),
            });
        }
        if let Some(i) = features.values().iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(())
    }

    fn classify(&self, score: f64) -> Classification {
        let confidence = sigmoid(score);
        Classification {
            decision: confidence >= self.threshold,
            confidence,
        }
    }

    #[inline]
    fn standardize_one(&self, i: usize, x: f64) -> f64 {
        (x - self.means[i]) / self.stddevs[i]
    }

    pub fn predict(&self, features: &FeatureVector) -> Result<Classification> {
        self.check(features)?;
        let products: Vec<f64> = features
            .values()
            .iter()
            .enumerate()
            .map(|(i, &x)| self.weights[i] * self.standardize_one(i, x))
            .collect();
        Ok(self.classify(affine_score(self.bias, &products)))
    }

    /// Same result as [`predict`](Self::predict), but only features whose
    /// standardized value changed since the session's last call get a new
    /// weight product. The first call on a session fills the cache.
    pub fn predict_incremental(
        &self,
        session: &mut MediaSession,
        features: &FeatureVector,
    ) -> Result<IncrementalOutcome> {
        self.check(features)?;
        let d = self.weights.len();
        let mut updates = 0;
        if session.cached_products.len() != d {
            session.cached_standardized.clear();
            session.cached_products.clear();
            for (i, &x) in features.values().iter().enumerate() {
                let z = self.standardize_one(i, x);
                session.cached_standardized.push(z);
                session.cached_products.push(self.weights[i] * z);
            }
            updates = d;
        } else {
            for (i, &x) in features.values().iter().enumerate() {
                let z = self.standardize_one(i, x);
                if z.to_bits() != session.cached_standardized[i].to_bits() {
                    session.cached_standardized[i] = z;
                    session.cached_products[i] = self.weights[i] * z;
                    updates += 1;
                }
            }
        }
        Ok(IncrementalOutcome {
            classification: self.classify(affine_score(self.bias, &session.cached_products)),
            product_updates: updates,
        })
    }
}
