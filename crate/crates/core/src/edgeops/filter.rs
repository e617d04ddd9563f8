use rayon::prelude::*;

use super::{reflect101, EdgeError};
use crate::raster::RasterImage;
use crate::scalar::Scalar;

/// Normalised 1-D Gaussian weights for offsets `-r..=r`, `r = ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Result<Vec<f64>, EdgeError> {
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(EdgeError::InvalidParameter(format!("blur sigma must be positive, got {sigma}")));
    }
    let r = (3.0 * sigma).ceil() as isize;
    let raw: Vec<f64> = (-r..=r)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|w| w / total).collect())
}

/// Separable Gaussian blur of a grayscale image, rounded back to 8 bits.
pub fn gaussian_blur(img: &RasterImage, sigma: f64) -> Result<RasterImage, EdgeError> {
    if !img.is_gray() {
        return Err(EdgeError::InvalidInput("gaussian_blur expects a grayscale image".into()));
    }
    let kernel = gaussian_kernel(sigma)?;
    let r = (kernel.len() / 2) as isize;
    let (w, h) = img.dims();
    let src = img.data();

    let mut horizontal = vec![0.0f64; w * h];
    horizontal.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        for (x, out) in row.iter_mut().enumerate() {
            *out = kernel
                .iter()
                .enumerate()
                .map(|(k, wk)| wk * f64::from(src[y * w + reflect101(x as isize + k as isize - r, w)]))
                .sum();
        }
    });

    let mut data = vec![0u8; w * h];
    data.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        for (x, out) in row.iter_mut().enumerate() {
            let v: f64 = kernel
                .iter()
                .enumerate()
                .map(|(k, wk)| wk * horizontal[reflect101(y as isize + k as isize - r, h) * w + x])
                .sum();
            *out = v.round().clamp(0.0, 255.0) as u8;
        }
    });
    Ok(RasterImage::new(w, h, 1, data).expect("dimensions unchanged"))
}

/// Per-pixel Sobel derivatives with `y` pointing down.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField<T> {
    width: usize,
    height: usize,
    gx: Vec<T>,
    gy: Vec<T>,
    magnitude: Vec<T>,
}

impl<T: Scalar> GradientField<T> {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn gx(&self) -> &[T] {
        &self.gx
    }

    pub fn gy(&self) -> &[T] {
        &self.gy
    }

    pub fn magnitude(&self) -> &[T] {
        &self.magnitude
    }

    pub fn at(&self, x: usize, y: usize) -> (T, T, T) {
        let i = y * self.width + x;
        (self.gx[i], self.gy[i], self.magnitude[i])
    }

    /// Gradient direction `atan2(gy, gx)` in degrees, in `(-180, 180]`.
    pub fn angle_deg(&self, x: usize, y: usize) -> T {
        let i = y * self.width + x;
        self.gy[i].atan2(self.gx[i]).to_degrees()
    }
}

/// 3x3 Sobel operator: `gx` kernel `[-1 0 1; -2 0 2; -1 0 1]`, `gy` its transpose.
pub fn sobel<T: Scalar>(img: &RasterImage) -> Result<GradientField<T>, EdgeError> {
    if !img.is_gray() {
        return Err(EdgeError::InvalidInput("sobel expects a grayscale image".into()));
    }
    let (w, h) = img.dims();
    if w < 3 || h < 3 {
        return Err(EdgeError::InvalidInput(format!("sobel needs at least 3x3 pixels, got {w}x{h}")));
    }
    let src = img.data();
    let at = |x: isize, y: isize| i32::from(src[reflect101(y, h) * w + reflect101(x, w)]);
    let mut gx = Vec::with_capacity(w * h);
    let mut gy = Vec::with_capacity(w * h);
    let mut magnitude = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let dx = (at(x + 1, y - 1) + 2 * at(x + 1, y) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2 * at(x - 1, y) + at(x - 1, y + 1));
            let dy = (at(x - 1, y + 1) + 2 * at(x, y + 1) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2 * at(x, y - 1) + at(x + 1, y - 1));
            let (fx, fy) = (T::of(f64::from(dx)), T::of(f64::from(dy)));
            gx.push(fx);
            gy.push(fy);
            magnitude.push(fx.hypot(fy));
        }
    }
    Ok(GradientField { width: w, height: h, gx, gy, magnitude })
}
