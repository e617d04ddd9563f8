//! Synthetic leaves and signs with analytic ground truth, for tests and demos.
//!
//! A pixel belongs to a shape when its center `(x + 0.5, y + 0.5)` does.

use crate::raster::{BinaryMask, LeafAsset, LeafSpecies, RasterError, RasterImage, SignInstance};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    /// Axis-aligned ellipse with semi-axes `a` (x) and `b` (y).
    Ellipse { cx: f64, cy: f64, a: f64, b: f64 },
    /// Axis-aligned square with the given side.
    Square { cx: f64, cy: f64, side: f64 },
    /// Polar curve `r(t) = radius * (1 + amplitude * cos(lobes * t))`.
    Lobed { cx: f64, cy: f64, radius: f64, amplitude: f64, lobes: u32 },
    /// Regular octagon with the given circumradius, flat top.
    Octagon { cx: f64, cy: f64, radius: f64 },
}

impl Shape {
    pub fn contains(&self, px: f64, py: f64) -> bool {
        match *self {
            Shape::Ellipse { cx, cy, a, b } => ((px - cx) / a).powi(2) + ((py - cy) / b).powi(2) <= 1.0,
            Shape::Square { cx, cy, side } => (px - cx).abs() <= side / 2.0 && (py - cy).abs() <= side / 2.0,
            Shape::Lobed { cx, cy, radius, amplitude, lobes } => {
                let (dx, dy) = (px - cx, py - cy);
                let t = dy.atan2(dx);
                dx.hypot(dy) <= radius * (1.0 + amplitude * (f64::from(lobes) * t).cos())
            }
            Shape::Octagon { cx, cy, radius } => {
                // apothem test against the four axis pairs of a flat-top octagon
                let apothem = radius * (std::f64::consts::PI / 8.0).cos();
                let (dx, dy) = ((px - cx).abs(), (py - cy).abs());
                dx <= apothem && dy <= apothem && (dx + dy) / std::f64::consts::SQRT_2 <= apothem
            }
        }
    }

    /// Pixel-center rasterisation on a `w x h` canvas.
    pub fn mask(&self, w: usize, h: usize) -> BinaryMask {
        BinaryMask::from_fn(w, h, |x, y| self.contains(x as f64 + 0.5, y as f64 + 0.5))
    }
}

/// Flat `fg` shape on a flat `bg` background, with its exact mask.
pub fn shape_image(shape: Shape, w: usize, h: usize, fg: [u8; 3], bg: [u8; 3]) -> (RasterImage, BinaryMask) {
    let mask = shape.mask(w, h);
    let img = RasterImage::from_fn_rgb(w, h, |x, y| if mask.get(x, y) { fg } else { bg }).expect("positive size");
    (img, mask)
}

/// A leaf-like asset: a green shape with a darker vein, on white, with its exact mask.
pub fn leaf(species: LeafSpecies, size: usize) -> Result<LeafAsset, RasterError> {
    let c = size as f64 / 2.0;
    let s = size as f64;
    let shape = match species {
        LeafSpecies::Maple => Shape::Lobed { cx: c, cy: c, radius: 0.36 * s, amplitude: 0.2, lobes: 5 },
        LeafSpecies::Oak => Shape::Lobed { cx: c, cy: c, radius: 0.38 * s, amplitude: 0.12, lobes: 7 },
        LeafSpecies::Poplar => Shape::Ellipse { cx: c, cy: c, a: 0.3 * s, b: 0.44 * s },
    };
    let mask = shape.mask(size, size);
    let img = RasterImage::from_fn_rgb(size, size, |x, y| {
        if !mask.get(x, y) {
            [255, 255, 255]
        } else if (x as f64 + 0.5 - c).abs() < 1.0 {
            [30, 70, 20]
        } else {
            [50, 110 + ((x * 7 + y * 3) % 20) as u8, 35]
        }
    })?;
    LeafAsset::new(species, img, mask)
}

/// A red octagon with a white inner band on a gray background.
pub fn stop_like_sign(size: usize, true_label: usize) -> Result<SignInstance, RasterError> {
    let c = size as f64 / 2.0;
    let outer = Shape::Octagon { cx: c, cy: c, radius: 0.45 * size as f64 };
    let inner = Shape::Octagon { cx: c, cy: c, radius: 0.40 * size as f64 };
    let band = Shape::Square { cx: c, cy: c, side: 0.3 * size as f64 };
    let mask = outer.mask(size, size);
    let img = RasterImage::from_fn_rgb(size, size, |x, y| {
        let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
        if !outer.contains(px, py) {
            [128, 128, 128]
        } else if !inner.contains(px, py) || (band.contains(px, py) && (py - c).abs() < 0.06 * size as f64) {
            [245, 245, 245]
        } else {
            [200, 20, 30]
        }
    })?;
    SignInstance::new("Stop", img, mask, true_label)
}
