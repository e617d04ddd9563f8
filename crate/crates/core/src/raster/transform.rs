use super::{BinaryMask, RasterError, RasterImage};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResizeMode {
    Bilinear,
    Nearest,
}

/// Resamples `img` to `new_w` x `new_h` with pixel-center alignment.
pub fn scale(img: &RasterImage, new_w: usize, new_h: usize, mode: ResizeMode) -> Result<RasterImage, RasterError> {
    if new_w == 0 || new_h == 0 {
        return Err(RasterError::InvalidInput(format!(
            "target dimensions must be positive, got {new_w}x{new_h}"
        )));
    }
    let (sw, sh, ch) = (img.width(), img.height(), img.channels());
    if (sw, sh) == (new_w, new_h) {
        return Ok(img.clone());
    }
    let mut data = Vec::with_capacity(new_w * new_h * ch);
    match mode {
        ResizeMode::Nearest => {
            let xs: Vec<usize> = (0..new_w).map(|d| nearest_index(d, sw, new_w)).collect();
            for dy in 0..new_h {
                let sy = nearest_index(dy, sh, new_h);
                for &sx in &xs {
                    data.extend_from_slice(img.pixel(sx, sy));
                }
            }
        }
        ResizeMode::Bilinear => {
            let fx = sw as f64 / new_w as f64;
            let fy = sh as f64 / new_h as f64;
            for dy in 0..new_h {
                let sy = ((dy as f64 + 0.5) * fy - 0.5).clamp(0.0, (sh - 1) as f64);
                for dx in 0..new_w {
                    let sx = ((dx as f64 + 0.5) * fx - 0.5).clamp(0.0, (sw - 1) as f64);
                    for c in 0..ch {
                        data.push(to_u8(bilinear(img, sx, sy, c)));
                    }
                }
            }
        }
    }
    RasterImage::new(new_w, new_h, ch, data)
}

/// Nearest-neighbour mask resize; integer upscaling by `k` multiplies area by exactly `k²`.
pub fn scale_mask(mask: &BinaryMask, new_w: usize, new_h: usize) -> Result<BinaryMask, RasterError> {
    if new_w == 0 || new_h == 0 {
        return Err(RasterError::InvalidInput(format!(
            "target dimensions must be positive, got {new_w}x{new_h}"
        )));
    }
    let (sw, sh) = mask.dims();
    let xs: Vec<usize> = (0..new_w).map(|d| nearest_index(d, sw, new_w)).collect();
    let ys: Vec<usize> = (0..new_h).map(|d| nearest_index(d, sh, new_h)).collect();
    Ok(BinaryMask::from_fn(new_w, new_h, |x, y| mask.get(xs[x], ys[y])))
}

// floor((d + 0.5) * src / dst), in integers
fn nearest_index(d: usize, src: usize, dst: usize) -> usize {
    ((2 * d + 1) * src / (2 * dst)).min(src - 1)
}

/// Bilinear sample at continuous pixel-center coordinates; neighbours clamp to the border.
fn bilinear(img: &RasterImage, x: f64, y: f64, c: usize) -> f64 {
    let (w, h) = img.dims();
    let x0 = x.floor().max(0.0) as usize;
    let y0 = y.floor().max(0.0) as usize;
    let x0 = x0.min(w - 1);
    let y0 = y0.min(h - 1);
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let tx = (x - x0 as f64).clamp(0.0, 1.0);
    let ty = (y - y0 as f64).clamp(0.0, 1.0);
    let p = |xx, yy| f64::from(img.get(xx, yy, c));
    let top = p(x0, y0) * (1.0 - tx) + p(x1, y0) * tx;
    let bottom = p(x0, y1) * (1.0 - tx) + p(x1, y1) * tx;
    top * (1.0 - ty) + bottom * ty
}

fn to_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Rotates an image and its mask counter-clockwise (as displayed) by `angle_deg`
/// about their common center.
///
/// The output canvas grows to bound the rotated rectangle. The image is
/// resampled bilinearly and the mask by nearest neighbour; pixels that map
/// outside the source are black / unset. Multiples of 90° are exact pixel
/// permutations.
pub fn rotate(img: &RasterImage, mask: &BinaryMask, angle_deg: f64) -> Result<(RasterImage, BinaryMask), RasterError> {
    if img.dims() != mask.dims() {
        return Err(RasterError::InvalidInput(format!(
            "image is {}x{} but mask is {}x{}",
            img.width(),
            img.height(),
            mask.width(),
            mask.height()
        )));
    }
    if !(0.0..360.0).contains(&angle_deg) {
        return Err(RasterError::InvalidParameter(format!(
            "rotation angle must lie in [0, 360), got {angle_deg}"
        )));
    }
    if angle_deg % 90.0 == 0.0 {
        return Ok(rotate_quarter_turns(img, mask, (angle_deg / 90.0) as usize));
    }

    let (w, h) = img.dims();
    let ch = img.channels();
    let theta = angle_deg.to_radians();
    let (s, c) = theta.sin_cos();
    let new_w = ((w as f64 * c.abs() + h as f64 * s.abs()) - 1e-9).ceil().max(1.0) as usize;
    let new_h = ((w as f64 * s.abs() + h as f64 * c.abs()) - 1e-9).ceil().max(1.0) as usize;
    let (scx, scy) = (w as f64 / 2.0, h as f64 / 2.0);
    let (ocx, ocy) = (new_w as f64 / 2.0, new_h as f64 / 2.0);

    let mut data = vec![0u8; new_w * new_h * ch];
    let mut out_mask = BinaryMask::empty(new_w, new_h);
    for oy in 0..new_h {
        let dy = oy as f64 + 0.5 - ocy;
        for ox in 0..new_w {
            let dx = ox as f64 + 0.5 - ocx;
            // inverse of the screen-space counter-clockwise rotation (y down)
            let sx = scx + c * dx - s * dy;
            let sy = scy + s * dx + c * dy;
            if sx < 0.0 || sy < 0.0 || sx >= w as f64 || sy >= h as f64 {
                continue;
            }
            out_mask.set(ox, oy, mask.get(sx as usize, sy as usize));
            let base = (oy * new_w + ox) * ch;
            for k in 0..ch {
                data[base + k] = to_u8(bilinear(img, sx - 0.5, sy - 0.5, k));
            }
        }
    }
    Ok((RasterImage::new(new_w, new_h, ch, data)?, out_mask))
}

fn rotate_quarter_turns(img: &RasterImage, mask: &BinaryMask, turns: usize) -> (RasterImage, BinaryMask) {
    let (w, h) = img.dims();
    let ch = img.channels();
    let (new_w, new_h) = if turns.is_multiple_of(2) { (w, h) } else { (h, w) };
    // destination pixel -> source pixel
    let source = |ox: usize, oy: usize| -> (usize, usize) {
        match turns % 4 {
            0 => (ox, oy),
            1 => (w - 1 - oy, ox),
            2 => (w - 1 - ox, h - 1 - oy),
            _ => (oy, h - 1 - ox),
        }
    };
    let mut data = Vec::with_capacity(w * h * ch);
    for oy in 0..new_h {
        for ox in 0..new_w {
            let (sx, sy) = source(ox, oy);
            data.extend_from_slice(img.pixel(sx, sy));
        }
    }
    let out_mask = BinaryMask::from_fn(new_w, new_h, |ox, oy| {
        let (sx, sy) = source(ox, oy);
        mask.get(sx, sy)
    });
    (RasterImage::new(new_w, new_h, ch, data).expect("same sample count"), out_mask)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_resize_is_exact() {
        let img = RasterImage::from_fn_rgb(7, 5, |x, y| [x as u8 * 30, y as u8 * 40, 3]).unwrap();
        assert_eq!(scale(&img, 7, 5, ResizeMode::Nearest).unwrap(), img);
        assert_eq!(scale(&img, 7, 5, ResizeMode::Bilinear).unwrap(), img);
    }

    #[test]
    fn checkerboard_to_single_pixel_is_rounded_mean() {
        let img = RasterImage::new(2, 2, 1, vec![0, 255, 255, 0]).unwrap();
        let out = scale(&img, 1, 1, ResizeMode::Bilinear).unwrap();
        // sample center (0.5, 0.5) weights all four corners by 1/4: 127.5 -> 128
        assert_eq!(out.data(), &[128]);
    }

    #[test]
    fn constant_image_stays_constant() {
        let img = RasterImage::filled(9, 4, &[17, 99, 230]).unwrap();
        for (w, h) in [(3, 3), (20, 11), (1, 7)] {
            for mode in [ResizeMode::Bilinear, ResizeMode::Nearest] {
                let out = scale(&img, w, h, mode).unwrap();
                assert!(out.data().chunks(3).all(|p| p == [17, 99, 230]));
            }
        }
    }

    #[test]
    fn zero_target_is_rejected() {
        let img = RasterImage::filled(2, 2, &[1]).unwrap();
        assert!(scale(&img, 0, 2, ResizeMode::Bilinear).is_err());
        assert!(scale_mask(&BinaryMask::full(2, 2), 2, 0).is_err());
    }

    #[test]
    fn rotate_zero_is_identity() {
        let img = RasterImage::from_fn_rgb(5, 3, |x, y| [x as u8, y as u8, 7]).unwrap();
        let mask = BinaryMask::from_fn(5, 3, |x, y| (x + y) % 2 == 0);
        let (ri, rm) = rotate(&img, &mask, 0.0).unwrap();
        assert_eq!(ri, img);
        assert_eq!(rm, mask);
    }

    #[test]
    fn rotate_ninety_swaps_dimensions_and_keeps_area() {
        let img = RasterImage::filled(6, 3, &[1, 2, 3]).unwrap();
        let mask = BinaryMask::from_fn(6, 3, |x, y| x > y);
        let (ri, rm) = rotate(&img, &mask, 90.0).unwrap();
        assert_eq!(ri.dims(), (3, 6));
        assert_eq!(rm.dims(), (3, 6));
        assert_eq!(rm.area(), mask.area());
        // the top-right source pixel lands top-left
        let marked = BinaryMask::from_fn(6, 3, |x, y| x == 5 && y == 0);
        let (_, rm) = rotate(&img, &marked, 90.0).unwrap();
        assert!(rm.get(0, 0));
    }

    fn rotated_square_oracle(n: usize, w: usize, h: usize, angle_deg: f64) -> usize {
        // pixel centres of the output canvas that fall inside the rotated n x n square
        let half = n as f64 / 2.0;
        let (s, c) = angle_deg.to_radians().sin_cos();
        let mut count = 0;
        for y in 0..h {
            for x in 0..w {
                let dx = x as f64 + 0.5 - w as f64 / 2.0;
                let dy = y as f64 + 0.5 - h as f64 / 2.0;
                let u = c * dx - s * dy;
                let v = s * dx + c * dy;
                if (-half..half).contains(&u) && (-half..half).contains(&v) {
                    count += 1;
                }
            }
        }
        count
    }

    #[test]
    fn rotate_forty_five_solid_square_area() {
        let img = RasterImage::filled(10, 10, &[9, 9, 9]).unwrap();
        let (_, rm) = rotate(&img, &BinaryMask::full(10, 10), 45.0).unwrap();
        let (w, h) = rm.dims();
        assert_eq!((w, h), (15, 15));
        // The pixel lattice lines up with the rotated edges at this size, so the
        // exact count is 113, not 100 +- 10%.
        assert_eq!(rotated_square_oracle(10, w, h, 45.0), 113);
        assert_eq!(rm.area(), 113);
        for n in [20, 33, 40] {
            let img = RasterImage::filled(n, n, &[9, 9, 9]).unwrap();
            let (_, rm) = rotate(&img, &BinaryMask::full(n, n), 45.0).unwrap();
            let (w, h) = rm.dims();
            assert_eq!(rm.area(), rotated_square_oracle(n, w, h, 45.0));
            let rel = rm.area() as f64 / (n * n) as f64;
            assert!((rel - 1.0).abs() <= 0.10, "n={n} rel={rel}");
        }
    }

    #[test]
    fn rotate_rejects_bad_input() {
        let img = RasterImage::filled(3, 3, &[0, 0, 0]).unwrap();
        assert!(rotate(&img, &BinaryMask::full(3, 4), 0.0).is_err());
        assert!(rotate(&img, &BinaryMask::full(3, 3), 360.0).is_err());
        assert!(rotate(&img, &BinaryMask::full(3, 3), -1.0).is_err());
    }

    #[test]
    fn mask_upscale_area_exact() {
        let mask = BinaryMask::from_fn(5, 4, |x, y| (x * 3 + y) % 4 == 1);
        for k in 1..5 {
            let up = scale_mask(&mask, 5 * k, 4 * k).unwrap();
            assert_eq!(up.area(), k * k * mask.area());
        }
    }
}
