//! Leaf silhouette extraction: grayscale, blur, Canny, dilation, closing,
//! then the hole-filled region of the largest edge contour.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::edgeops::{self, CannyParams, EdgeError};
use crate::raster::{self, BinaryMask, LeafAsset, LeafSpecies, RasterError, RasterImage};

/// Smallest leaf image side accepted by [`generate_leaf_mask`].
pub const MIN_LEAF_SIDE: usize = 16;

/// Tunables for the edge pipeline shared by mask generation and the edge metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EdgeParams {
    pub sigma: f64,
    pub canny_low: f64,
    pub canny_high: f64,
    pub dilate_radius: usize,
    pub dilate_iterations: usize,
    pub close_radius: usize,
    /// Erode the filled silhouette by `dilate_radius * dilate_iterations` so the
    /// mask boundary sits on the detected edge instead of the dilated band.
    pub compensate_dilation: bool,
}

impl Default for EdgeParams {
    fn default() -> Self {
        Self {
            sigma: 1.4,
            canny_low: 50.0,
            canny_high: 150.0,
            dilate_radius: 1,
            dilate_iterations: 2,
            close_radius: 2,
            compensate_dilation: true,
        }
    }
}

impl EdgeParams {
    pub fn canny(&self) -> CannyParams {
        CannyParams { sigma: self.sigma, low: self.canny_low, high: self.canny_high }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskStage {
    Input,
    Blur,
    Canny,
    Dilate,
    Close,
    Contour,
    Compensate,
}

impl fmt::Display for MaskStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MaskStage::Input => "input",
            MaskStage::Blur => "blur",
            MaskStage::Canny => "canny",
            MaskStage::Dilate => "dilate",
            MaskStage::Close => "close",
            MaskStage::Contour => "contour",
            MaskStage::Compensate => "compensate",
        })
    }
}

#[derive(Debug, Error)]
pub enum MaskGenError {
    #[error("{stage}: {message}")]
    Stage { stage: MaskStage, message: String },
    #[error(transparent)]
    Raster(#[from] RasterError),
}

impl MaskGenError {
    pub fn stage(&self) -> Option<MaskStage> {
        match self {
            MaskGenError::Stage { stage, .. } => Some(*stage),
            MaskGenError::Raster(_) => None,
        }
    }
}

fn at(stage: MaskStage) -> impl Fn(EdgeError) -> MaskGenError {
    move |e| MaskGenError::Stage { stage, message: e.to_string() }
}

/// Produces the silhouette mask of a leaf photographed on a plain background.
pub fn generate_leaf_mask(leaf_img: &RasterImage, params: &EdgeParams) -> Result<BinaryMask, MaskGenError> {
    let (w, h) = leaf_img.dims();
    if w < MIN_LEAF_SIDE || h < MIN_LEAF_SIDE {
        return Err(MaskGenError::Stage {
            stage: MaskStage::Input,
            message: format!("leaf image must be at least {MIN_LEAF_SIDE}x{MIN_LEAF_SIDE}, got {w}x{h}"),
        });
    }
    let gray = raster::ensure_grayscale(leaf_img);
    edgeops::gaussian_kernel(params.sigma).map_err(at(MaskStage::Blur))?;
    // canny runs the blur itself
    let edges = edgeops::canny(&gray, &params.canny()).map_err(at(MaskStage::Canny))?;
    if edges.is_empty() {
        return Err(MaskGenError::Stage { stage: MaskStage::Canny, message: "no edges".into() });
    }
    let dilated =
        edgeops::dilate(&edges, params.dilate_radius, params.dilate_iterations).map_err(at(MaskStage::Dilate))?;
    let closed = edgeops::close(&dilated, params.close_radius).map_err(at(MaskStage::Close))?;
    let filled = edgeops::largest_contour_fill(&closed).map_err(at(MaskStage::Contour))?;
    if !params.compensate_dilation {
        return Ok(filled);
    }
    let grow = params.dilate_radius * params.dilate_iterations;
    let shrunk = edgeops::erode(&filled, grow).map_err(at(MaskStage::Compensate))?;
    if shrunk.is_empty() {
        return Err(MaskGenError::Stage {
            stage: MaskStage::Compensate,
            message: format!("silhouette vanished after shrinking by {grow} px"),
        });
    }
    Ok(shrunk)
}

/// Loads a leaf image and either its stored mask or a freshly generated one.
pub fn make_leaf_asset(
    species: LeafSpecies,
    image_path: impl AsRef<Path>,
    mask_path: Option<&Path>,
    params: &EdgeParams,
) -> Result<LeafAsset, MaskGenError> {
    let image = raster::ensure_rgb(&raster::read_image(image_path)?);
    let mask = match mask_path {
        Some(p) => raster::read_mask(p)?,
        None => generate_leaf_mask(&image, params)?,
    };
    Ok(LeafAsset::new(species, image, mask)?)
}
