//! Pixel rasters, boolean masks and the asset types built from them.
//!
//! Coordinates are row-major with the origin at the top-left corner and `y`
//! increasing downward. Images hold 8-bit samples, either one channel
//! (grayscale) or three interleaved channels (RGB).

mod io;
mod transform;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use io::{read_image, read_mask, write_atomic, write_image, write_mask};
pub use transform::{rotate, scale, scale_mask, ResizeMode};

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("patch of {patch_width}x{patch_height} at ({x}, {y}) exceeds {base_width}x{base_height} base image")]
    Placement {
        x: usize,
        y: usize,
        patch_width: usize,
        patch_height: usize,
        base_width: usize,
        base_height: usize,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: cannot decode image: {message}")]
    Decode { path: String, message: String },
    #[error("{path}: unsupported image format (expected .png, .pgm, .ppm or .pnm)")]
    UnsupportedFormat { path: String },
}

/// An 8-bit raster with one (grayscale) or three (RGB) interleaved channels.
#[derive(Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<u8>,
}

impl fmt::Debug for RasterImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RasterImage")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("channels", &self.channels)
            .finish_non_exhaustive()
    }
}

impl RasterImage {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<u8>) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::InvalidInput(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(RasterError::InvalidInput(format!(
                "images have 1 or 3 channels, got {channels}"
            )));
        }
        let expected = width
            .checked_mul(height)
            .and_then(|n| n.checked_mul(channels))
            .ok_or_else(|| RasterError::InvalidInput("image dimensions overflow".into()))?;
        if data.len() != expected {
            return Err(RasterError::InvalidInput(format!(
                "expected {expected} samples for {width}x{height}x{channels}, got {}",
                data.len()
            )));
        }
        Ok(Self { width, height, channels, data })
    }

    /// Image with every pixel set to `value`. `value.len()` selects the channel count.
    pub fn filled(width: usize, height: usize, value: &[u8]) -> Result<Self, RasterError> {
        let data = value.iter().copied().cycle().take(width * height * value.len()).collect();
        Self::new(width, height, value.len(), data)
    }

    pub fn from_fn_gray(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Result<Self, RasterError> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, 1, data)
    }

    pub fn from_fn_rgb(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [u8; 3],
    ) -> Result<Self, RasterError> {
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self::new(width, height, 3, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    pub fn is_gray(&self) -> bool {
        self.channels == 1
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Samples of the pixel at `(x, y)`.
    pub fn pixel(&self, x: usize, y: usize) -> &[u8] {
        let i = (y * self.width + x) * self.channels;
        &self.data[i..i + self.channels]
    }

    pub fn pixel_mut(&mut self, x: usize, y: usize) -> &mut [u8] {
        let i = (y * self.width + x) * self.channels;
        &mut self.data[i..i + self.channels]
    }

    /// Single sample; `c` must be below `channels()`.
    pub fn get(&self, x: usize, y: usize, c: usize) -> u8 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for x in 0..self.width {
            for y in 0..self.height {
                data.extend_from_slice(self.pixel(x, y));
            }
        }
        Self { width: self.height, height: self.width, channels: self.channels, data }
    }

    /// Number of pixel positions whose samples differ between two equally sized images.
    pub fn count_differing_pixels(&self, other: &Self) -> usize {
        assert_eq!(self.dims(), other.dims());
        assert_eq!(self.channels, other.channels);
        self.data
            .chunks(self.channels)
            .zip(other.data.chunks(other.channels))
            .filter(|(a, b)| a != b)
            .count()
    }
}

/// Converts an RGB image to luma with BT.601 weights: `round(0.299 R + 0.587 G + 0.114 B)`.
pub fn to_grayscale(img: &RasterImage) -> Result<RasterImage, RasterError> {
    if img.channels != 3 {
        return Err(RasterError::InvalidInput(format!(
            "to_grayscale expects 3 channels, got {}",
            img.channels
        )));
    }
    let data = img
        .data
        .chunks_exact(3)
        .map(|p| luma(p[0], p[1], p[2]))
        .collect();
    RasterImage::new(img.width, img.height, 1, data)
}

/// Grayscale view of any image: RGB is converted, grayscale is cloned.
pub fn ensure_grayscale(img: &RasterImage) -> RasterImage {
    if img.is_gray() {
        img.clone()
    } else {
        to_grayscale(img).expect("three-channel input")
    }
}

fn luma(r: u8, g: u8, b: u8) -> u8 {
    let v = 0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b);
    v.round().clamp(0.0, 255.0) as u8
}

/// Three-channel copy of `img`; grayscale is replicated into R, G and B.
pub fn ensure_rgb(img: &RasterImage) -> RasterImage {
    if img.channels == 3 {
        return img.clone();
    }
    let data = img.data.iter().flat_map(|&v| [v, v, v]).collect();
    RasterImage { width: img.width, height: img.height, channels: 3, data }
}

/// Pastes `patch` onto `base` at offset `(x, y)` wherever `patch_mask` is set.
///
/// Replacement is hard: no alpha blending takes place.
pub fn composite(
    base: &RasterImage,
    patch: &RasterImage,
    patch_mask: &BinaryMask,
    x: usize,
    y: usize,
) -> Result<RasterImage, RasterError> {
    if patch.dims() != patch_mask.dims() {
        return Err(RasterError::InvalidInput(format!(
            "patch is {}x{} but its mask is {}x{}",
            patch.width, patch.height, patch_mask.width, patch_mask.height
        )));
    }
    if patch.channels != base.channels {
        return Err(RasterError::InvalidInput(format!(
            "patch has {} channels, base has {}",
            patch.channels, base.channels
        )));
    }
    if x + patch.width > base.width || y + patch.height > base.height {
        return Err(RasterError::Placement {
            x,
            y,
            patch_width: patch.width,
            patch_height: patch.height,
            base_width: base.width,
            base_height: base.height,
        });
    }
    let mut out = base.clone();
    for (py, px) in patch_mask.iter_set() {
        out.pixel_mut(x + px, y + py).copy_from_slice(patch.pixel(px, py));
    }
    Ok(out)
}

/// Inclusive pixel bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl BoundingBox {
    pub fn width(&self) -> usize {
        self.x1 - self.x0 + 1
    }

    pub fn height(&self) -> usize {
        self.y1 - self.y0 + 1
    }
}

/// One boolean per pixel, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl fmt::Debug for BinaryMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BinaryMask")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("area", &self.area())
            .finish()
    }
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::InvalidInput(format!(
                "mask dimensions must be positive, got {width}x{height}"
            )));
        }
        if bits.len() != width * height {
            return Err(RasterError::InvalidInput(format!(
                "expected {} mask bits for {width}x{height}, got {}",
                width * height,
                bits.len()
            )));
        }
        Ok(Self { width, height, bits })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0, "mask dimensions must be positive");
        Self { width, height, bits: vec![false; width * height] }
    }

    pub fn full(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0, "mask dimensions must be positive");
        Self { width, height, bits: vec![true; width * height] }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut mask = Self::empty(width, height);
        for y in 0..height {
            for x in 0..width {
                mask.bits[y * width + x] = f(x, y);
            }
        }
        mask
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    /// Like [`get`](Self::get) but `false` outside the mask.
    pub fn get_signed(&self, x: isize, y: isize) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.bits[y as usize * self.width + x as usize]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    /// Number of set pixels.
    pub fn area(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// `(y, x)` of every set pixel in raster order.
    pub fn iter_set(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i / w, i % w))
    }

    pub fn bounding_box(&self) -> Option<BoundingBox> {
        let mut bb: Option<BoundingBox> = None;
        for (y, x) in self.iter_set() {
            bb = Some(match bb {
                None => BoundingBox { x0: x, y0: y, x1: x, y1: y },
                Some(b) => BoundingBox {
                    x0: b.x0.min(x),
                    y0: b.y0.min(y),
                    x1: b.x1.max(x),
                    y1: b.y1.max(y),
                },
            });
        }
        bb
    }

    pub fn complement(&self) -> Self {
        Self { width: self.width, height: self.height, bits: self.bits.iter().map(|b| !b).collect() }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn union(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a || b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(bool, bool) -> bool) -> Self {
        assert_eq!(self.dims(), other.dims(), "mask dimensions differ");
        Self {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().zip(&other.bits).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        assert_eq!(self.dims(), other.dims(), "mask dimensions differ");
        self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    /// Intersection over union; two empty masks count as identical.
    pub fn iou(&self, other: &Self) -> f64 {
        assert_eq!(self.dims(), other.dims(), "mask dimensions differ");
        let (mut inter, mut uni) = (0usize, 0usize);
        for (&a, &b) in self.bits.iter().zip(&other.bits) {
            inter += usize::from(a && b);
            uni += usize::from(a || b);
        }
        if uni == 0 {
            1.0
        } else {
            inter as f64 / uni as f64
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.height, self.width, |x, y| self.get(y, x))
    }

    /// Grayscale rendering: 255 where set, 0 elsewhere.
    pub fn to_image(&self) -> RasterImage {
        let data = self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect();
        RasterImage::new(self.width, self.height, 1, data).expect("mask dimensions are valid")
    }

    /// Pixels with value >= 128 in the first channel are set.
    pub fn from_image(img: &RasterImage) -> Self {
        Self::from_fn(img.width, img.height, |x, y| img.get(x, y, 0) >= 128)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LeafSpecies {
    #[serde(alias = "Maple")]
    Maple,
    #[serde(alias = "Oak")]
    Oak,
    #[serde(alias = "Poplar")]
    Poplar,
}

impl LeafSpecies {
    pub const ALL: [LeafSpecies; 3] = [LeafSpecies::Maple, LeafSpecies::Oak, LeafSpecies::Poplar];
}

impl fmt::Display for LeafSpecies {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LeafSpecies::Maple => "Maple",
            LeafSpecies::Oak => "Oak",
            LeafSpecies::Poplar => "Poplar",
        })
    }
}

impl FromStr for LeafSpecies {
    type Err = RasterError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "maple" => Ok(LeafSpecies::Maple),
            "oak" => Ok(LeafSpecies::Oak),
            "poplar" => Ok(LeafSpecies::Poplar),
            other => Err(RasterError::InvalidInput(format!(
                "unknown leaf species {other:?} (expected maple, oak or poplar)"
            ))),
        }
    }
}

/// A photographed leaf and its silhouette mask.
#[derive(Debug, Clone)]
pub struct LeafAsset {
    species: LeafSpecies,
    image: RasterImage,
    mask: BinaryMask,
}

impl LeafAsset {
    pub fn new(species: LeafSpecies, image: RasterImage, mask: BinaryMask) -> Result<Self, RasterError> {
        if image.channels() != 3 {
            return Err(RasterError::InvalidInput("leaf image must be RGB".into()));
        }
        if image.dims() != mask.dims() {
            return Err(RasterError::InvalidInput(format!(
                "leaf image is {}x{} but its mask is {}x{}",
                image.width(),
                image.height(),
                mask.width(),
                mask.height()
            )));
        }
        if mask.is_empty() {
            return Err(RasterError::InvalidInput("leaf mask is empty".into()));
        }
        Ok(Self { species, image, mask })
    }

    pub fn species(&self) -> LeafSpecies {
        self.species
    }

    pub fn image(&self) -> &RasterImage {
        &self.image
    }

    pub fn mask(&self) -> &BinaryMask {
        &self.mask
    }
}

/// A traffic-sign photograph, the mask of the sign face and its true class.
#[derive(Debug, Clone)]
pub struct SignInstance {
    name: String,
    image: RasterImage,
    sign_mask: BinaryMask,
    true_label: usize,
}

impl SignInstance {
    pub fn new(
        name: impl Into<String>,
        image: RasterImage,
        sign_mask: BinaryMask,
        true_label: usize,
    ) -> Result<Self, RasterError> {
        if image.channels() != 3 {
            return Err(RasterError::InvalidInput("sign image must be RGB".into()));
        }
        if image.dims() != sign_mask.dims() {
            return Err(RasterError::InvalidInput(format!(
                "sign image is {}x{} but its mask is {}x{}",
                image.width(),
                image.height(),
                sign_mask.width(),
                sign_mask.height()
            )));
        }
        if sign_mask.is_empty() {
            return Err(RasterError::InvalidInput("sign mask is empty".into()));
        }
        Ok(Self { name: name.into(), image, sign_mask, true_label })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn image(&self) -> &RasterImage {
        &self.image
    }

    pub fn sign_mask(&self) -> &BinaryMask {
        &self.sign_mask
    }

    pub fn true_label(&self) -> usize {
        self.true_label
    }
}
