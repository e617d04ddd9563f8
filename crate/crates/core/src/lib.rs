//! Leaf-occlusion adversarial examples against traffic-sign classifiers.
//!
//! The crate covers the whole pipeline: raster handling ([`raster`]), edge
//! and morphology primitives ([`edgeops`]), leaf silhouette extraction
//! ([`maskgen`]), a small CNN forward pass and a deterministic stub model
//! ([`classifier`]), the exhaustive placement/size/rotation search
//! ([`attack`]) and edge-based forensic metrics ([`metrics`]).
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the common `f64` instantiations.

pub mod attack;
pub mod classifier;
pub mod edgeops;
pub mod maskgen;
pub mod metrics;
pub mod raster;
pub mod scalar;
pub mod synth;

pub use scalar::Scalar;

pub use attack::{AttackConfig, AttackOutcome, AttackReport, PlacementCandidate};
pub use classifier::{Classifier, ClassifierSpec, LayerSpec, StubClassifier, StubRule};
pub use edgeops::{CannyParams, ComponentLabels, EdgeMap};
pub use maskgen::EdgeParams;
pub use raster::{BinaryMask, LeafAsset, LeafSpecies, RasterImage, SignInstance};

pub type GradientField = edgeops::GradientField<f64>;
pub type GradientField32 = edgeops::GradientField<f32>;

pub type Probabilities = classifier::Probabilities<f64>;
pub type Probabilities32 = classifier::Probabilities<f32>;
pub type EdgeMetrics = metrics::EdgeMetrics<f64>;
pub type EdgeMetrics32 = metrics::EdgeMetrics<f32>;
pub type MetricsDelta = metrics::MetricsDelta<f64>;
pub type MetricsDelta32 = metrics::MetricsDelta<f32>;
pub type CohortAverages = metrics::CohortAverages<f64>;
pub type CohortAverages32 = metrics::CohortAverages<f32>;
