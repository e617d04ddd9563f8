use serde::{Deserialize, Serialize};

use super::{Classifier, ClassifierError, Probabilities};
use crate::raster::{self, BinaryMask, RasterImage};

/// Piecewise-constant rule on mean grayscale intensity.
///
/// With thresholds `t_0 < t_1 < ...`, a mean `m` falls in band
/// `#{i : t_i <= m}` and is assigned `band_classes[band]`. The winning
/// probability ramps linearly from 0.55 at the nearest threshold to 1.0 at
/// distance `ramp`; the rest is spread evenly over the other classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StubRule {
    pub thresholds: Vec<f64>,
    pub band_classes: Vec<usize>,
    pub class_labels: Vec<String>,
    pub ramp: f64,
}

impl StubRule {
    /// Two-class rule: class `below` when the mean is under `threshold`, else `above`.
    pub fn binary(threshold: f64, below: usize, above: usize, class_labels: Vec<String>) -> Self {
        Self { thresholds: vec![threshold], band_classes: vec![below, above], class_labels, ramp: 64.0 }
    }

    pub fn validate(&self) -> Result<(), ClassifierError> {
        let bad = |m: String| Err(ClassifierError::InvalidParameter(m));
        if self.class_labels.len() < 2 {
            return bad("stub rule needs at least two classes".into());
        }
        if self.thresholds.iter().any(|t| !t.is_finite()) {
            return bad("stub thresholds must be finite".into());
        }
        if self.thresholds.windows(2).any(|p| p[0] >= p[1]) {
            return bad(format!("stub thresholds must be strictly increasing, got {:?}", self.thresholds));
        }
        if self.band_classes.len() != self.thresholds.len() + 1 {
            return bad(format!(
                "{} thresholds need {} band classes, got {}",
                self.thresholds.len(),
                self.thresholds.len() + 1,
                self.band_classes.len()
            ));
        }
        if let Some(c) = self.band_classes.iter().find(|&&c| c >= self.class_labels.len()) {
            return bad(format!("band class {c} out of range for {} classes", self.class_labels.len()));
        }
        if !self.ramp.is_finite() || self.ramp <= 0.0 {
            return bad(format!("stub ramp must be positive, got {}", self.ramp));
        }
        Ok(())
    }

    /// Probabilities for a given mean intensity.
    pub fn evaluate(&self, mean: f64) -> Probabilities<f64> {
        let band = self.thresholds.iter().filter(|&&t| t <= mean).count();
        let class = self.band_classes[band];
        let distance = self.thresholds.iter().map(|t| (mean - t).abs()).fold(f64::INFINITY, f64::min);
        let p = 0.55 + 0.45 * (distance / self.ramp).min(1.0);
        let n = self.class_labels.len();
        let rest = (1.0 - p) / (n - 1) as f64;
        let probs = (0..n).map(|i| if i == class { p } else { rest }).collect();
        Probabilities::from_probabilities(probs)
    }
}

/// Deterministic classifier driven by the mean intensity inside a fixed sign mask.
#[derive(Debug, Clone)]
pub struct StubClassifier {
    rule: StubRule,
    sign_mask: BinaryMask,
}

impl StubClassifier {
    pub fn new(rule: StubRule, sign_mask: BinaryMask) -> Result<Self, ClassifierError> {
        rule.validate()?;
        if sign_mask.is_empty() {
            return Err(ClassifierError::InvalidParameter("stub sign mask is empty".into()));
        }
        Ok(Self { rule, sign_mask })
    }

    pub fn rule(&self) -> &StubRule {
        &self.rule
    }

    /// Mean BT.601 luma over the sign mask.
    pub fn masked_mean(&self, img: &RasterImage) -> Result<f64, ClassifierError> {
        if img.dims() != self.sign_mask.dims() {
            return Err(ClassifierError::InvalidInput(format!(
                "image {:?} does not match stub mask {:?}",
                img.dims(),
                self.sign_mask.dims()
            )));
        }
        let gray = raster::ensure_grayscale(img);
        let total: u64 = self.sign_mask.iter_set().map(|(y, x)| u64::from(gray.get(x, y, 0))).sum();
        Ok(total as f64 / self.sign_mask.area() as f64)
    }
}

impl Classifier for StubClassifier {
    fn num_classes(&self) -> usize {
        self.rule.class_labels.len()
    }

    fn class_label(&self, class: usize) -> String {
        self.rule.class_labels[class].clone()
    }

    fn classify(&self, img: &RasterImage) -> Result<Probabilities<f64>, ClassifierError> {
        Ok(self.rule.evaluate(self.masked_mean(img)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("c{i}")).collect()
    }

    #[test]
    fn bands_follow_thresholds() {
        let rule = StubRule { thresholds: vec![50.0, 150.0], band_classes: vec![2, 0, 1], class_labels: labels(3), ramp: 10.0 };
        rule.validate().unwrap();
        assert_eq!(rule.evaluate(10.0).predicted, 2);
        assert_eq!(rule.evaluate(50.0).predicted, 0);
        assert_eq!(rule.evaluate(149.9).predicted, 0);
        assert_eq!(rule.evaluate(200.0).predicted, 1);
    }

    #[test]
    fn confidence_ramps_away_from_threshold() {
        let rule = StubRule::binary(100.0, 1, 0, labels(4));
        let at = rule.evaluate(100.0);
        assert!((at.confidence_percent - 55.0).abs() < 1e-12);
        let mid = rule.evaluate(132.0);
        assert!((mid.confidence_percent - 77.5).abs() < 1e-12);
        let far = rule.evaluate(0.0);
        assert!((far.confidence_percent - 100.0).abs() < 1e-12);
        assert!((mid.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_monotone_thresholds() {
        let rule = StubRule { thresholds: vec![80.0, 80.0], band_classes: vec![0, 1, 0], class_labels: labels(2), ramp: 1.0 };
        assert!(matches!(rule.validate(), Err(ClassifierError::InvalidParameter(_))));
        let rule = StubRule { thresholds: vec![90.0, 10.0], ..rule };
        assert!(rule.validate().is_err());
        let short = StubRule { thresholds: vec![1.0], band_classes: vec![0], class_labels: labels(2), ramp: 1.0 };
        assert!(short.validate().is_err());
    }

    #[test]
    fn mean_ignores_pixels_outside_mask() {
        let mask = BinaryMask::from_fn(4, 4, |x, _| x < 2);
        let img = RasterImage::from_fn_rgb(4, 4, |x, _| if x < 2 { [100, 100, 100] } else { [255, 0, 0] }).unwrap();
        let stub = StubClassifier::new(StubRule::binary(50.0, 0, 1, labels(2)), mask).unwrap();
        assert_eq!(stub.masked_mean(&img).unwrap(), 100.0);
        assert_eq!(stub.classify(&img).unwrap().predicted, 1);
        let wrong = RasterImage::filled(3, 3, &[0, 0, 0]).unwrap();
        assert!(stub.classify(&wrong).is_err());
    }
}
