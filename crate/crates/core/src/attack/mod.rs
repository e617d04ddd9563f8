//! Exhaustive occlusion search: every (patch ratio, rotation, grid position)
//! at which a leaf fits inside the sign is composited, classified, and the
//! most confident misclassification is kept.

mod placement;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::{Classifier, ClassifierError};
use crate::maskgen::EdgeParams;
use crate::raster::{self, LeafAsset, LeafSpecies, RasterError, SignInstance};

pub use placement::{
    enumerate_candidates, patch_side, prepare_patch, prepare_patches, render_candidate, PlacementCandidate,
    PreparedPatch,
};

#[derive(Debug, Error)]
pub enum AttackError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("patch: {0}")]
    Patch(String),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Raster(#[from] RasterError),
}

/// What "the leaf fits inside the sign" means.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Containment {
    /// Every leaf pixel lands on a sign-mask pixel.
    #[default]
    Mask,
    /// The whole bounding box of the leaf lands on sign-mask pixels.
    #[serde(alias = "bbox")]
    BoundingBox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AttackConfig {
    pub patch_ratios: Vec<f64>,
    pub angles_deg: Vec<f64>,
    pub grid_stride: usize,
    pub containment: Containment,
    /// Recorded in reports only; the search itself is deterministic.
    pub seed: u64,
    /// Keep every evaluated outcome in the report.
    pub keep_log: bool,
    /// Edge pipeline used for leaf masks; echoed for reproducibility.
    pub edge: EdgeParams,
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self {
            patch_ratios: vec![0.1, 0.2, 0.3, 0.4, 0.5],
            angles_deg: vec![0.0, 45.0, 90.0, 135.0, 180.0, 225.0, 270.0, 315.0],
            grid_stride: 4,
            containment: Containment::Mask,
            seed: 0,
            keep_log: false,
            edge: EdgeParams::default(),
        }
    }
}

impl AttackConfig {
    pub fn validate(&self) -> Result<(), AttackError> {
        let bad = |m: String| Err(AttackError::InvalidParameter(m));
        if self.patch_ratios.is_empty() || self.angles_deg.is_empty() {
            return bad("at least one patch ratio and one angle are required".into());
        }
        if let Some(r) = self.patch_ratios.iter().find(|&&r| !(r > 0.0 && r <= 1.0)) {
            return bad(format!("patch ratio {r} outside (0, 1]"));
        }
        if let Some(a) = self.angles_deg.iter().find(|&&a| !(0.0..360.0).contains(&a)) {
            return bad(format!("angle {a} outside [0, 360)"));
        }
        if self.grid_stride == 0 {
            return bad("grid stride must be at least 1".into());
        }
        Ok(())
    }

    /// Ratios ascending, duplicates removed.
    pub fn sorted_ratios(&self) -> Vec<f64> {
        sorted_unique(&self.patch_ratios)
    }

    /// Angles ascending, duplicates removed.
    pub fn sorted_angles(&self) -> Vec<f64> {
        sorted_unique(&self.angles_deg)
    }
}

fn sorted_unique(v: &[f64]) -> Vec<f64> {
    let mut out = v.to_vec();
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// Classifier verdict on one candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackOutcome {
    pub candidate: PlacementCandidate,
    pub predicted_label: usize,
    pub predicted_name: String,
    pub confidence_percent: f64,
    pub true_label_probability: f64,
    /// `predicted_label != true_label`.
    pub success: bool,
}

/// Prediction on the unmodified sign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanPrediction {
    pub predicted_label: usize,
    pub predicted_name: String,
    pub confidence_percent: f64,
}

/// How the reported best outcome was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selection {
    /// Most confident misclassification.
    MaxConfidenceSuccess,
    /// No candidate succeeded: the one that most lowered the true-label probability.
    MinTrueLabelProbability,
    /// Nothing fit inside the sign.
    NoCandidates,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub sign_name: String,
    pub leaf_species: LeafSpecies,
    pub true_label: usize,
    pub true_name: String,
    pub clean: CleanPrediction,
    pub best: Option<AttackOutcome>,
    pub selection: Selection,
    pub total_candidates: usize,
    pub successful_candidates: usize,
    pub config: AttackConfig,
    pub log: Option<Vec<AttackOutcome>>,
}

pub const TABLE1_HEADERS: [&str; 5] =
    ["Adversarial Image", "Leaf Type", "Predicted Label", "Confidence Score (%)", "Attack Success"];

impl AttackReport {
    pub fn success(&self) -> bool {
        self.best.as_ref().is_some_and(|b| b.success)
    }

    /// One row shaped like [`TABLE1_HEADERS`]; blank label and score when nothing fit.
    pub fn table1_record(&self) -> [String; 5] {
        let (label, conf) = match &self.best {
            Some(b) => (b.predicted_name.clone(), format!("{:.2}", b.confidence_percent)),
            None => (String::new(), String::new()),
        };
        [
            self.sign_name.clone(),
            self.leaf_species.to_string(),
            label,
            conf,
            if self.success() { "Yes" } else { "No" }.to_string(),
        ]
    }
}

/// Evaluates every candidate and picks the best one.
///
/// Among misclassifications the highest confidence wins, ties going to the
/// earliest candidate. Without any misclassification the candidate with the
/// lowest true-label probability is reported instead, flagged by
/// [`Selection::MinTrueLabelProbability`].
pub fn run_attack(
    cfg: &AttackConfig,
    sign: &SignInstance,
    leaf: &LeafAsset,
    classifier: &dyn Classifier,
) -> Result<AttackReport, AttackError> {
    cfg.validate()?;
    let n = classifier.num_classes();
    let true_label = sign.true_label();
    if true_label >= n {
        return Err(AttackError::InvalidParameter(format!(
            "true label {true_label} out of range for {n} classes"
        )));
    }
    let clean = classifier.classify(sign.image())?;
    let patches = prepare_patches(cfg, sign, leaf)?;
    let candidates = placement::enumerate_prepared(cfg, sign, &patches);

    let outcomes: Vec<AttackOutcome> = candidates
        .into_par_iter()
        .map(|cand| {
            let p = &patches[cand.patch_index];
            let img = raster::composite(sign.image(), &p.image, &p.mask, cand.x, cand.y)?;
            let probs = classifier.classify(&img)?;
            Ok(AttackOutcome {
                predicted_label: probs.predicted,
                predicted_name: classifier.class_label(probs.predicted),
                confidence_percent: probs.confidence_percent,
                true_label_probability: probs.probability(true_label),
                success: probs.predicted != true_label,
                candidate: cand,
            })
        })
        .collect::<Result<_, AttackError>>()?;

    let (best, selection) = select_best(&outcomes);
    Ok(AttackReport {
        sign_name: sign.name().to_string(),
        leaf_species: leaf.species(),
        true_label,
        true_name: classifier.class_label(true_label),
        clean: CleanPrediction {
            predicted_label: clean.predicted,
            predicted_name: classifier.class_label(clean.predicted),
            confidence_percent: clean.confidence_percent,
        },
        best: best.cloned(),
        selection,
        total_candidates: outcomes.len(),
        successful_candidates: outcomes.iter().filter(|o| o.success).count(),
        config: cfg.clone(),
        log: cfg.keep_log.then_some(outcomes),
    })
}

/// Selection rule of [`run_attack`] over outcomes in enumeration order.
pub fn select_best(outcomes: &[AttackOutcome]) -> (Option<&AttackOutcome>, Selection) {
    let mut best: Option<&AttackOutcome> = None;
    for o in outcomes.iter().filter(|o| o.success) {
        if best.is_none_or(|b| o.confidence_percent > b.confidence_percent) {
            best = Some(o);
        }
    }
    if best.is_some() {
        return (best, Selection::MaxConfidenceSuccess);
    }
    for o in outcomes {
        if best.is_none_or(|b| o.true_label_probability < b.true_label_probability) {
            best = Some(o);
        }
    }
    match best {
        Some(_) => (best, Selection::MinTrueLabelProbability),
        None => (None, Selection::NoCandidates),
    }
}
