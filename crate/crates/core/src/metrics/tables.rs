use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{cohort_averages, metrics_delta, CohortAverages, CohortPair, EdgeMetrics, MetricsDelta, MetricsError};
use crate::scalar::Scalar;

pub const TABLE2_HEADERS: [&str; 5] = ["Test Image", "Edge Length", "Orientation", "Intensity", "Center of Gravity"];

pub const TABLE3_HEADERS: [&str; 12] = [
    "Adversarial Image",
    "Edge Length",
    "Orientation",
    "Intensity",
    "Center of Gravity",
    "Edge Length Difference",
    "Edge Length Percent",
    "Orientation Difference",
    "Orientation Percent",
    "Intensity Difference",
    "Intensity Percent",
    "Center of Gravity Distance",
];

/// Metrics of one clean image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct BaselineRow<T> {
    pub name: String,
    #[serde(flatten)]
    pub metrics: EdgeMetrics<T>,
}

/// Metrics of one adversarial image and its delta against the clean baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct ComparisonRow<T> {
    pub name: String,
    pub success: bool,
    pub metrics: EdgeMetrics<T>,
    pub delta: MetricsDelta<T>,
}

/// `"(x, y)"` with two decimals.
pub fn format_cog<T: Scalar>(cog: (T, T)) -> String {
    format!("({:.2}, {:.2})", cog.0.to_f64_lossy(), cog.1.to_f64_lossy())
}

fn opt2<T: Scalar>(v: Option<T>) -> String {
    v.map(|v| format!("{:.2}", v.to_f64_lossy())).unwrap_or_default()
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String, MetricsError> {
    let bytes = w.into_inner().map_err(|e| MetricsError::Csv(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| MetricsError::Csv(e.to_string()))
}

/// Clean-image table: integer edge length, two decimals elsewhere.
pub fn table2_csv<T: Scalar>(rows: &[BaselineRow<T>]) -> Result<String, MetricsError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| MetricsError::Csv(e.to_string());
    w.write_record(TABLE2_HEADERS).map_err(csv_err)?;
    for r in rows {
        let m = &r.metrics;
        w.write_record([
            r.name.clone(),
            m.edge_length.to_string(),
            opt2(m.orientation),
            opt2(m.intensity),
            m.cog.map(format_cog).unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

/// Adversarial table with the two cohort-average rows appended when present.
pub fn table3_csv<T: Scalar>(
    rows: &[ComparisonRow<T>],
    averages: &CohortPair<T>,
) -> Result<String, MetricsError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| MetricsError::Csv(e.to_string());
    w.write_record(TABLE3_HEADERS).map_err(csv_err)?;
    let f2 = |v: T| format!("{:.2}", v.to_f64_lossy());
    for r in rows {
        let m = &r.metrics;
        let mut rec = vec![
            format!("{} ({})", r.name, if r.success { "S" } else { "U" }),
            format!("{:.2}", m.edge_length as f64),
            opt2(m.orientation),
            opt2(m.intensity),
            m.cog.map(format_cog).unwrap_or_default(),
        ];
        rec.extend(r.delta.fields().map(f2));
        w.write_record(&rec).map_err(csv_err)?;
    }
    for (label, avg) in [("Average All Successful", &averages.0), ("Average All Unsuccessful", &averages.1)] {
        if let Some(a) = avg {
            let mut rec = vec![label.to_string(), f2(a.edge_length), f2(a.orientation), f2(a.intensity), format_cog(a.cog)];
            rec.extend(a.delta.fields().map(f2));
            w.write_record(&rec).map_err(csv_err)?;
        }
    }
    finish(w)
}

/// One adversarial entry of a reference fixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRow {
    pub name: String,
    /// Name of the baseline row this image is compared against.
    pub base: String,
    pub success: bool,
    pub metrics: EdgeMetrics<f64>,
    pub expected_delta: Option<MetricsDelta<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedAverages {
    pub successful: Option<CohortAverages<f64>>,
    pub unsuccessful: Option<CohortAverages<f64>>,
}

/// Precomputed baseline and adversarial metrics, optionally with the expected
/// derived columns, used to check [`metrics_delta`] and [`cohort_averages`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceTables {
    #[serde(default)]
    pub description: String,
    pub baselines: Vec<BaselineRow<f64>>,
    pub adversarial: Vec<ReferenceRow>,
    pub expected_averages: Option<ExpectedAverages>,
}

impl ReferenceTables {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, MetricsError> {
        let path = path.as_ref();
        let fixture_err = |message: String| MetricsError::Fixture { path: path.display().to_string(), message };
        let text = std::fs::read_to_string(path).map_err(|e| fixture_err(e.to_string()))?;
        let tables: Self = serde_json::from_str(&text).map_err(|e| fixture_err(e.to_string()))?;
        for row in &tables.adversarial {
            if tables.baseline(&row.base).is_none() {
                return Err(fixture_err(format!("row {:?} refers to unknown baseline {:?}", row.name, row.base)));
            }
        }
        Ok(tables)
    }

    pub fn baseline(&self, name: &str) -> Option<&EdgeMetrics<f64>> {
        self.baselines.iter().find(|b| b.name == name).map(|b| &b.metrics)
    }

    /// Recomputes every delta from the raw metrics.
    pub fn comparison_rows(&self) -> Result<Vec<ComparisonRow<f64>>, MetricsError> {
        self.adversarial
            .iter()
            .map(|r| {
                let base = self
                    .baseline(&r.base)
                    .ok_or_else(|| MetricsError::InvalidInput(format!("unknown baseline {:?}", r.base)))?;
                Ok(ComparisonRow {
                    name: r.name.clone(),
                    success: r.success,
                    metrics: r.metrics.clone(),
                    delta: metrics_delta(base, &r.metrics)?,
                })
            })
            .collect()
    }
}

impl<T: Scalar> ComparisonRow<T> {
    pub fn cohort_input(rows: &[Self]) -> Vec<(EdgeMetrics<T>, MetricsDelta<T>, bool)> {
        rows.iter().map(|r| (r.metrics.clone(), r.delta, r.success)).collect()
    }

    pub fn averages(rows: &[Self]) -> Result<CohortPair<T>, MetricsError> {
        cohort_averages(&Self::cohort_input(rows))
    }
}
