//! Black-box prediction oracles.
//!
//! [`ClassifierSpec`] is a small feed-forward CNN (convolution, ReLU, max-pool,
//! flatten, dense, softmax) whose weights come from a self-describing binary
//! or JSON file. [`StubClassifier`] is a deterministic rule on mean sign
//! intensity, used to exercise the attack loop with known answers.

mod format;
mod network;
mod stub;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::raster::RasterImage;
use crate::scalar::Scalar;

pub use format::{load_spec, save_spec, LCNN_MAGIC, LCNN_VERSION};
pub use network::{lisa_cnn_labels, ClassifierSpec, LayerSpec};
pub use stub::{StubClassifier, StubRule};

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("layer {layer}: {message}")]
    Layer { layer: usize, message: String },
    #[error("invalid classifier spec: {0}")]
    Spec(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: String, message: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Softmax output of a classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct Probabilities<T> {
    pub probabilities: Vec<T>,
    /// Lowest index among the maximal probabilities.
    pub predicted: usize,
    /// `100 * probabilities[predicted]`.
    pub confidence_percent: T,
}

impl<T: Scalar> Probabilities<T> {
    /// Builds the distribution from raw scores; the maximum is subtracted before exponentiation.
    pub fn from_logits(logits: &[T]) -> Self {
        assert!(!logits.is_empty(), "softmax over zero classes");
        let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
        let exps: Vec<T> = logits.iter().map(|&s| (s - max).exp()).collect();
        let total: T = exps.iter().copied().sum();
        Self::from_probabilities(exps.into_iter().map(|e| e / total).collect())
    }

    /// Wraps an already normalised distribution.
    pub fn from_probabilities(probabilities: Vec<T>) -> Self {
        let mut predicted = 0;
        for (i, &p) in probabilities.iter().enumerate() {
            if p > probabilities[predicted] {
                predicted = i;
            }
        }
        let confidence_percent = probabilities[predicted] * T::of(100.0);
        Self { probabilities, predicted, confidence_percent }
    }

    pub fn probability(&self, class: usize) -> T {
        self.probabilities[class]
    }

    pub fn num_classes(&self) -> usize {
        self.probabilities.len()
    }
}

/// Anything that maps an RGB image to class probabilities.
pub trait Classifier: Sync {
    fn num_classes(&self) -> usize;

    fn class_label(&self, class: usize) -> String {
        format!("class {class}")
    }

    fn classify(&self, img: &RasterImage) -> Result<Probabilities<f64>, ClassifierError>;
}

impl<C: Classifier + ?Sized> Classifier for &C {
    fn num_classes(&self) -> usize {
        (**self).num_classes()
    }

    fn class_label(&self, class: usize) -> String {
        (**self).class_label(class)
    }

    fn classify(&self, img: &RasterImage) -> Result<Probabilities<f64>, ClassifierError> {
        (**self).classify(img)
    }
}

impl Classifier for ClassifierSpec {
    fn num_classes(&self) -> usize {
        self.class_labels().len()
    }

    fn class_label(&self, class: usize) -> String {
        self.class_labels()[class].clone()
    }

    fn classify(&self, img: &RasterImage) -> Result<Probabilities<f64>, ClassifierError> {
        self.forward::<f64>(img)
    }
}
