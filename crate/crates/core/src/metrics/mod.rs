//! Edge-detection forensics: per-image edge statistics, baseline-vs-adversarial
//! deltas and success/failure cohort means.

mod tables;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::edgeops::{self, Connectivity, EdgeError};
use crate::maskgen::EdgeParams;
use crate::raster::{self, BinaryMask, RasterImage};
use crate::scalar::Scalar;

pub use tables::{
    format_cog, table2_csv, table3_csv, BaselineRow, ComparisonRow, ReferenceRow, ReferenceTables, TABLE2_HEADERS,
    TABLE3_HEADERS,
};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("undefined percentage: {0}")]
    UndefinedPercent(String),
    #[error(transparent)]
    Edge(#[from] EdgeError),
    #[error("csv: {0}")]
    Csv(String),
    #[error("{path}: {message}")]
    Fixture { path: String, message: String },
}

/// How per-pixel gradient angles are averaged.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrientationMode {
    /// Plain mean of `atan2` angles in degrees; wraps badly near ±180°.
    #[default]
    Arithmetic,
    /// Direction of the mean unit vector.
    Circular,
}

/// Edge statistics of one image. Everything except the counts is absent when
/// no edge pixel was found.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct EdgeMetrics<T> {
    pub edge_length: usize,
    #[serde(default)]
    pub components: usize,
    pub orientation: Option<T>,
    pub intensity: Option<T>,
    pub cog: Option<(T, T)>,
}

impl<T: Scalar> EdgeMetrics<T> {
    /// Metrics from already known values (e.g. a published table).
    pub fn from_values(edge_length: usize, orientation: T, intensity: T, cog: (T, T)) -> Self {
        Self { edge_length, components: 0, orientation: Some(orientation), intensity: Some(intensity), cog: Some(cog) }
    }

    fn complete(&self, which: &str) -> Result<(T, T, (T, T)), MetricsError> {
        match (self.orientation, self.intensity, self.cog) {
            (Some(o), Some(i), Some(c)) if self.edge_length > 0 => Ok((o, i, c)),
            _ => Err(MetricsError::UndefinedPercent(format!("{which} metrics have no edge pixels"))),
        }
    }
}

/// Absolute differences between a baseline and an adversarial image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct MetricsDelta<T> {
    pub edge_length_diff: T,
    pub edge_length_percent: T,
    pub orientation_diff: T,
    /// Orientation difference as a share of a full turn.
    pub orientation_percent: T,
    pub intensity_diff: T,
    pub intensity_percent: T,
    pub cog_distance: T,
}

impl<T: Scalar> MetricsDelta<T> {
    pub fn fields(&self) -> [T; 7] {
        [
            self.edge_length_diff,
            self.edge_length_percent,
            self.orientation_diff,
            self.orientation_percent,
            self.intensity_diff,
            self.intensity_percent,
            self.cog_distance,
        ]
    }

    fn from_fields(f: [T; 7]) -> Self {
        Self {
            edge_length_diff: f[0],
            edge_length_percent: f[1],
            orientation_diff: f[2],
            orientation_percent: f[3],
            intensity_diff: f[4],
            intensity_percent: f[5],
            cog_distance: f[6],
        }
    }
}

/// Field-wise means over one cohort.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar"))]
pub struct CohortAverages<T> {
    pub count: usize,
    pub edge_length: T,
    pub orientation: T,
    pub intensity: T,
    pub cog: (T, T),
    pub delta: MetricsDelta<T>,
}

/// Canny edges of `img` (restricted to `region`) summarised as [`EdgeMetrics`].
pub fn edge_metrics<T: Scalar>(
    img: &RasterImage,
    region: Option<&BinaryMask>,
    params: &EdgeParams,
) -> Result<EdgeMetrics<T>, MetricsError> {
    edge_metrics_with(img, region, params, OrientationMode::Arithmetic)
}

pub fn edge_metrics_with<T: Scalar>(
    img: &RasterImage,
    region: Option<&BinaryMask>,
    params: &EdgeParams,
    mode: OrientationMode,
) -> Result<EdgeMetrics<T>, MetricsError> {
    if let Some(r) = region {
        if r.dims() != img.dims() {
            return Err(MetricsError::InvalidInput(format!(
                "region {:?} does not match image {:?}",
                r.dims(),
                img.dims()
            )));
        }
    }
    let gray = raster::ensure_grayscale(img);
    let out = edgeops::canny_detailed::<T>(&gray, &params.canny())?;
    let edges = match region {
        Some(r) => out.edges.intersection(r),
        None => out.edges,
    };
    let edge_length = edges.area();
    let components = edgeops::connected_components(&edges, Connectivity::Eight).count();
    if edge_length == 0 {
        return Ok(EdgeMetrics { edge_length, components, orientation: None, intensity: None, cog: None });
    }

    let n = T::of_usize(edge_length);
    let (mut angle_sum, mut sin_sum, mut cos_sum) = (T::zero(), T::zero(), T::zero());
    let (mut gray_sum, mut x_sum, mut y_sum) = (0u64, 0u64, 0u64);
    for (y, x) in edges.iter_set() {
        let a = out.gradient.angle_deg(x, y);
        angle_sum = angle_sum + a;
        let r = a.to_radians();
        sin_sum = sin_sum + r.sin();
        cos_sum = cos_sum + r.cos();
        gray_sum += u64::from(gray.get(x, y, 0));
        x_sum += x as u64;
        y_sum += y as u64;
    }
    let orientation = match mode {
        OrientationMode::Arithmetic => angle_sum / n,
        OrientationMode::Circular => sin_sum.atan2(cos_sum).to_degrees(),
    };
    let big = |v: u64| T::of(v as f64);
    Ok(EdgeMetrics {
        edge_length,
        components,
        orientation: Some(orientation),
        intensity: Some(big(gray_sum) / n),
        cog: Some((big(x_sum) / n, big(y_sum) / n)),
    })
}

/// Absolute differences of `adv` against `base`; percentages are relative to `base`.
pub fn metrics_delta<T: Scalar>(base: &EdgeMetrics<T>, adv: &EdgeMetrics<T>) -> Result<MetricsDelta<T>, MetricsError> {
    let (bo, bi, bc) = base.complete("base")?;
    let (ao, ai, ac) = adv.complete("adversarial")?;
    if bi == T::zero() {
        return Err(MetricsError::UndefinedPercent("base intensity is zero".into()));
    }
    let hundred = T::of(100.0);
    let edge_length_diff = (T::of_usize(adv.edge_length) - T::of_usize(base.edge_length)).abs();
    let orientation_diff = (ao - bo).abs();
    let intensity_diff = (ai - bi).abs();
    Ok(MetricsDelta {
        edge_length_diff,
        edge_length_percent: hundred * edge_length_diff / T::of_usize(base.edge_length),
        orientation_diff,
        orientation_percent: hundred * orientation_diff / T::of(360.0),
        intensity_diff,
        intensity_percent: hundred * intensity_diff / bi,
        cog_distance: (ac.0 - bc.0).hypot(ac.1 - bc.1),
    })
}

/// Successful and unsuccessful cohort means, `None` for an empty cohort.
pub type CohortPair<T> = (Option<CohortAverages<T>>, Option<CohortAverages<T>>);

/// Means over the successful and unsuccessful rows; a cohort with no rows is `None`.
pub fn cohort_averages<T: Scalar>(
    rows: &[(EdgeMetrics<T>, MetricsDelta<T>, bool)],
) -> Result<CohortPair<T>, MetricsError> {
    let mean_of = |want: bool| -> Result<Option<CohortAverages<T>>, MetricsError> {
        let picked: Vec<_> = rows.iter().filter(|r| r.2 == want).collect();
        if picked.is_empty() {
            return Ok(None);
        }
        let n = T::of_usize(picked.len());
        let mut sums = [T::zero(); 5];
        let mut dsum = [T::zero(); 7];
        for (m, d, _) in &picked {
            let (o, i, c) = m.complete("cohort")?;
            for (s, v) in sums.iter_mut().zip([T::of_usize(m.edge_length), o, i, c.0, c.1]) {
                *s = *s + v;
            }
            for (s, v) in dsum.iter_mut().zip(d.fields()) {
                *s = *s + v;
            }
        }
        Ok(Some(CohortAverages {
            count: picked.len(),
            edge_length: sums[0] / n,
            orientation: sums[1] / n,
            intensity: sums[2] / n,
            cog: (sums[3] / n, sums[4] / n),
            delta: MetricsDelta::from_fields(dsum.map(|s| s / n)),
        }))
    };
    Ok((mean_of(true)?, mean_of(false)?))
}
