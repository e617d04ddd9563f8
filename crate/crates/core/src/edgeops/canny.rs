use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::filter::{gaussian_blur, sobel, GradientField};
use super::EdgeError;
use crate::raster::{BinaryMask, RasterImage};
use crate::scalar::Scalar;

/// Binary map of edge pixels.
pub type EdgeMap = BinaryMask;

/// Largest accepted high threshold.
const MAX_THRESHOLD: f64 = 255.0 * 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CannyParams {
    pub sigma: f64,
    pub low: f64,
    pub high: f64,
}

impl Default for CannyParams {
    fn default() -> Self {
        Self { sigma: 1.4, low: 50.0, high: 150.0 }
    }
}

impl CannyParams {
    pub fn validate(&self) -> Result<(), EdgeError> {
        if !self.sigma.is_finite() || self.sigma <= 0.0 {
            return Err(EdgeError::InvalidParameter(format!("canny sigma must be positive, got {}", self.sigma)));
        }
        if !(self.low >= 0.0 && self.low < self.high && self.high <= MAX_THRESHOLD) {
            return Err(EdgeError::InvalidParameter(format!(
                "canny thresholds need 0 <= low < high <= {MAX_THRESHOLD}, got low={} high={}",
                self.low, self.high
            )));
        }
        Ok(())
    }
}

/// Edge map together with the blurred image and its (pre-suppression) gradients.
#[derive(Debug, Clone)]
pub struct CannyOutput<T> {
    pub edges: EdgeMap,
    pub blurred: RasterImage,
    pub gradient: GradientField<T>,
}

/// Canny edge detection on a grayscale image.
pub fn canny(img: &RasterImage, params: &CannyParams) -> Result<EdgeMap, EdgeError> {
    canny_detailed::<f64>(img, params).map(|out| out.edges)
}

/// Blur, Sobel, 4-direction non-maximum suppression, then 8-connected hysteresis.
pub fn canny_detailed<T: Scalar>(img: &RasterImage, params: &CannyParams) -> Result<CannyOutput<T>, EdgeError> {
    params.validate()?;
    let blurred = gaussian_blur(img, params.sigma)?;
    let gradient = sobel::<T>(&blurred)?;
    let thinned = non_maximum_suppression(&gradient);
    let edges = hysteresis(&thinned, gradient.width(), gradient.height(), T::of(params.low), T::of(params.high));
    Ok(CannyOutput { edges, blurred, gradient })
}

/// Keeps magnitudes that are ridge maxima across the quantised gradient
/// direction; everything else becomes zero. Ties on a plateau keep only the
/// pixel on the positive side so ridges stay one pixel wide.
fn non_maximum_suppression<T: Scalar>(g: &GradientField<T>) -> Vec<T> {
    let (w, h) = (g.width(), g.height());
    let mag = g.magnitude();
    let at = |x: isize, y: isize| -> T {
        if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
            T::zero()
        } else {
            mag[y as usize * w + x as usize]
        }
    };
    let mut out = vec![T::zero(); w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let m = mag[i];
            if m <= T::zero() {
                continue;
            }
            let mut angle = g.gy()[i].atan2(g.gx()[i]).to_degrees().to_f64_lossy();
            if angle < 0.0 {
                angle += 180.0;
            }
            // (dx, dy) of the neighbour along the gradient; y points down
            let (dx, dy) = if !(22.5..157.5).contains(&angle) {
                (1, 0)
            } else if angle < 67.5 {
                (1, 1)
            } else if angle < 112.5 {
                (0, 1)
            } else {
                (-1, 1)
            };
            let (xi, yi) = (x as isize, y as isize);
            let before = at(xi - dx, yi - dy);
            let after = at(xi + dx, yi + dy);
            if m > before && m >= after {
                out[i] = m;
            }
        }
    }
    out
}

fn hysteresis<T: Scalar>(thinned: &[T], w: usize, h: usize, low: T, high: T) -> EdgeMap {
    let mut edges = BinaryMask::empty(w, h);
    let mut queue = VecDeque::new();
    let candidate = |i: usize| thinned[i] > T::zero() && thinned[i] >= low;
    for (i, &m) in thinned.iter().enumerate() {
        if m > T::zero() && m >= high {
            edges.set(i % w, i / w, true);
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        for dy in -1..=1isize {
            for dx in -1..=1isize {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let (nx, ny) = (nx as usize, ny as usize);
                let j = ny * w + nx;
                if !edges.get(nx, ny) && candidate(j) {
                    edges.set(nx, ny, true);
                    queue.push_back(j);
                }
            }
        }
    }
    edges
}
