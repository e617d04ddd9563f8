use serde::{Deserialize, Serialize};

use super::{AttackConfig, AttackError, Containment};
use crate::raster::{self, BinaryMask, LeafAsset, RasterImage, ResizeMode, SignInstance};

/// Side of the square that covers `ratio` of the sign area: `round(sqrt(ratio * area))`, at least 1.
pub fn patch_side(ratio: f64, sign_mask: &BinaryMask) -> Result<usize, AttackError> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(AttackError::InvalidParameter(format!("patch ratio must lie in (0, 1], got {ratio}")));
    }
    Ok(((ratio * sign_mask.area() as f64).sqrt().round() as usize).max(1))
}

/// Scales the leaf so its longer side equals `side` (aspect preserved), then
/// rotates it by `angle_deg` on an expanded canvas.
pub fn prepare_patch(leaf: &LeafAsset, side: usize, angle_deg: f64) -> Result<(RasterImage, BinaryMask), AttackError> {
    if side == 0 {
        return Err(AttackError::InvalidParameter("patch side must be at least 1".into()));
    }
    let (w, h) = leaf.image().dims();
    let long = w.max(h);
    let fit = |d: usize| ((d * side) as f64 / long as f64).round().max(1.0) as usize;
    let (nw, nh) = (fit(w), fit(h));
    let img = raster::scale(leaf.image(), nw, nh, ResizeMode::Bilinear)?;
    let mask = raster::scale_mask(leaf.mask(), nw, nh)?;
    if mask.is_empty() {
        return Err(AttackError::Patch(format!("leaf mask vanished when scaled to {nw}x{nh}")));
    }
    let (img, mask) = raster::rotate(&img, &mask, angle_deg)?;
    if mask.is_empty() {
        return Err(AttackError::Patch(format!("leaf mask vanished when rotated by {angle_deg} degrees")));
    }
    Ok((img, mask))
}

/// A transformed leaf, cropped to the bounding box of its mask.
#[derive(Debug, Clone)]
pub struct PreparedPatch {
    pub patch_ratio: f64,
    pub angle_deg: f64,
    pub side: usize,
    pub image: RasterImage,
    pub mask: BinaryMask,
    /// Mask pixels as `(x, y)` offsets, row-major.
    offsets: Vec<(usize, usize)>,
}

impl PreparedPatch {
    pub fn new(leaf: &LeafAsset, sign_mask: &BinaryMask, patch_ratio: f64, angle_deg: f64) -> Result<Self, AttackError> {
        let side = patch_side(patch_ratio, sign_mask)?;
        let (img, mask) = prepare_patch(leaf, side, angle_deg)?;
        let bb = mask.bounding_box().expect("non-empty mask");
        let (cw, ch) = (bb.width(), bb.height());
        let crop = RasterImage::from_fn_rgb(cw, ch, |x, y| {
            let p = img.pixel(bb.x0 + x, bb.y0 + y);
            [p[0], p[1], p[2]]
        })?;
        let cmask = BinaryMask::from_fn(cw, ch, |x, y| mask.get(bb.x0 + x, bb.y0 + y));
        let offsets = cmask.iter_set().map(|(y, x)| (x, y)).collect();
        Ok(Self { patch_ratio, angle_deg, side, image: crop, mask: cmask, offsets })
    }

    pub fn width(&self) -> usize {
        self.mask.width()
    }

    pub fn height(&self) -> usize {
        self.mask.height()
    }

    /// Whether the patch placed at `(x, y)` lies inside `sign_mask`.
    pub fn fits(&self, sign_mask: &BinaryMask, x: usize, y: usize, containment: Containment) -> bool {
        if x + self.width() > sign_mask.width() || y + self.height() > sign_mask.height() {
            return false;
        }
        match containment {
            Containment::Mask => self.offsets.iter().all(|&(px, py)| sign_mask.get(x + px, y + py)),
            Containment::BoundingBox => {
                (0..self.height()).all(|py| (0..self.width()).all(|px| sign_mask.get(x + px, y + py)))
            }
        }
    }
}

/// One placement of one transformed leaf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementCandidate {
    /// Position in the deterministic enumeration order.
    pub index: usize,
    /// Top-left of the cropped patch in sign-image pixels.
    pub x: usize,
    pub y: usize,
    pub patch_ratio: f64,
    pub angle_deg: f64,
    /// Square side the leaf was scaled to before rotation.
    pub side: usize,
    pub patch_width: usize,
    pub patch_height: usize,
    /// Index of the `(ratio, angle)` pair in enumeration order.
    pub patch_index: usize,
}

/// Every `(ratio, angle)` pair of the config, ratios outer, both ascending.
pub fn prepare_patches(cfg: &AttackConfig, sign: &SignInstance, leaf: &LeafAsset) -> Result<Vec<PreparedPatch>, AttackError> {
    cfg.validate()?;
    let mut out = Vec::new();
    for ratio in cfg.sorted_ratios() {
        for angle in cfg.sorted_angles() {
            out.push(PreparedPatch::new(leaf, sign.sign_mask(), ratio, angle)?);
        }
    }
    Ok(out)
}

pub(crate) fn enumerate_prepared(cfg: &AttackConfig, sign: &SignInstance, patches: &[PreparedPatch]) -> Vec<PlacementCandidate> {
    let sign_mask = sign.sign_mask();
    let (sw, sh) = sign_mask.dims();
    let mut out = Vec::new();
    for (pi, p) in patches.iter().enumerate() {
        if p.width() > sw || p.height() > sh {
            continue;
        }
        for y in (0..=sh - p.height()).step_by(cfg.grid_stride) {
            for x in (0..=sw - p.width()).step_by(cfg.grid_stride) {
                if p.fits(sign_mask, x, y, cfg.containment) {
                    out.push(PlacementCandidate {
                        index: out.len(),
                        x,
                        y,
                        patch_ratio: p.patch_ratio,
                        angle_deg: p.angle_deg,
                        side: p.side,
                        patch_width: p.width(),
                        patch_height: p.height(),
                        patch_index: pi,
                    });
                }
            }
        }
    }
    out
}

/// All placements whose leaf pixels land on the sign mask, ordered by
/// `(ratio, angle, y, x)` ascending.
pub fn enumerate_candidates(
    cfg: &AttackConfig,
    sign: &SignInstance,
    leaf: &LeafAsset,
) -> Result<Vec<PlacementCandidate>, AttackError> {
    let patches = prepare_patches(cfg, sign, leaf)?;
    Ok(enumerate_prepared(cfg, sign, &patches))
}

/// The adversarial image for one candidate.
pub fn render_candidate(sign: &SignInstance, leaf: &LeafAsset, cand: &PlacementCandidate) -> Result<RasterImage, AttackError> {
    let p = PreparedPatch::new(leaf, sign.sign_mask(), cand.patch_ratio, cand.angle_deg)?;
    Ok(raster::composite(sign.image(), &p.image, &p.mask, cand.x, cand.y)?)
}
