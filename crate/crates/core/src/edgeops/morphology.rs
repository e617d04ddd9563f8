use super::EdgeError;
use crate::raster::BinaryMask;

/// Binary dilation with a `(2 radius + 1)²` square, applied `iterations` times.
/// Pixels outside the mask contribute nothing.
pub fn dilate(mask: &BinaryMask, radius: usize, iterations: usize) -> Result<BinaryMask, EdgeError> {
    if radius == 0 || iterations == 0 {
        return Err(EdgeError::InvalidParameter(format!(
            "dilation needs radius >= 1 and iterations >= 1, got {radius} x {iterations}"
        )));
    }
    let mut out = mask.clone();
    for _ in 0..iterations {
        out = dilate_square(&out, radius);
    }
    Ok(out)
}

/// Binary erosion with a `(2 radius + 1)²` square; pixels outside the mask count as set,
/// which makes it the exact dual of [`dilate`].
pub fn erode(mask: &BinaryMask, radius: usize) -> Result<BinaryMask, EdgeError> {
    if radius == 0 {
        return Err(EdgeError::InvalidParameter("erosion radius must be >= 1".into()));
    }
    Ok(dilate_square(&mask.complement(), radius).complement())
}

/// Morphological closing: dilation then erosion with the same square.
///
/// Computed on a canvas padded by `radius` unset pixels and cropped back, so the
/// image border neither closes nor opens anything.
pub fn close(mask: &BinaryMask, radius: usize) -> Result<BinaryMask, EdgeError> {
    if radius == 0 {
        return Err(EdgeError::InvalidParameter("closing radius must be >= 1".into()));
    }
    let (w, h) = mask.dims();
    let padded = BinaryMask::from_fn(w + 2 * radius, h + 2 * radius, |x, y| {
        mask.get_signed(x as isize - radius as isize, y as isize - radius as isize)
    });
    let closed = dilate_square(&dilate_square(&padded, radius).complement(), radius).complement();
    Ok(BinaryMask::from_fn(w, h, |x, y| closed.get(x + radius, y + radius)))
}

fn dilate_square(mask: &BinaryMask, r: usize) -> BinaryMask {
    let (w, h) = mask.dims();
    let rows = BinaryMask::from_fn(w, h, |x, y| {
        let lo = x.saturating_sub(r);
        let hi = (x + r).min(w - 1);
        (lo..=hi).any(|xx| mask.get(xx, y))
    });
    BinaryMask::from_fn(w, h, |x, y| {
        let lo = y.saturating_sub(r);
        let hi = (y + r).min(h - 1);
        (lo..=hi).any(|yy| rows.get(x, yy))
    })
}
