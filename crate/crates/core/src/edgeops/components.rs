use std::collections::VecDeque;

use super::EdgeError;
use crate::raster::{BinaryMask, BoundingBox};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

impl Connectivity {
    fn offsets(self) -> &'static [(isize, isize)] {
        match self {
            Connectivity::Four => &[(0, -1), (-1, 0), (1, 0), (0, 1)],
            Connectivity::Eight => &[(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)],
        }
    }
}

/// Component labelling of a mask. Label 0 is background; components are
/// numbered `1..=count` in raster-scan discovery order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentLabels {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    sizes: Vec<usize>,
}

impl ComponentLabels {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    pub fn label(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Pixel count of each component, indexed by `label - 1`.
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Mask of a single component.
    pub fn component_mask(&self, label: u32) -> BinaryMask {
        let mut m = BinaryMask::empty(self.width, self.height);
        for (i, _) in self.labels.iter().enumerate().filter(|(_, &l)| l == label) {
            m.set(i % self.width, i / self.width, true);
        }
        m
    }
}

pub fn connected_components(mask: &BinaryMask, connectivity: Connectivity) -> ComponentLabels {
    let (w, h) = mask.dims();
    let mut labels = vec![0u32; w * h];
    let mut sizes = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if !mask.bits()[start] || labels[start] != 0 {
            continue;
        }
        let id = sizes.len() as u32 + 1;
        labels[start] = id;
        queue.push_back(start);
        let mut size = 0;
        while let Some(i) = queue.pop_front() {
            size += 1;
            let (x, y) = ((i % w) as isize, (i / w) as isize);
            for &(dx, dy) in connectivity.offsets() {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if mask.bits()[j] && labels[j] == 0 {
                    labels[j] = id;
                    queue.push_back(j);
                }
            }
        }
        sizes.push(size);
    }
    ComponentLabels { width: w, height: h, labels, sizes }
}

/// Selects the 8-connected edge component whose filled region is largest and
/// returns that region on an otherwise empty mask.
///
/// A component's filled region is the component plus every pixel that cannot
/// reach the canvas border through 4-connected non-component pixels. Ties go to
/// the component discovered first.
pub fn largest_contour_fill(edge_mask: &BinaryMask) -> Result<BinaryMask, EdgeError> {
    let comps = connected_components(edge_mask, Connectivity::Eight);
    if comps.count() == 0 {
        return Err(EdgeError::NoContour);
    }
    let (w, h) = edge_mask.dims();
    let mut boxes: Vec<Option<BoundingBox>> = vec![None; comps.count()];
    for (i, &l) in comps.labels.iter().enumerate() {
        if l == 0 {
            continue;
        }
        let (x, y) = (i % w, i / w);
        let b = &mut boxes[l as usize - 1];
        *b = Some(match *b {
            None => BoundingBox { x0: x, y0: y, x1: x, y1: y },
            Some(bb) => BoundingBox { x0: bb.x0.min(x), y0: bb.y0.min(y), x1: bb.x1.max(x), y1: bb.y1.max(y) },
        });
    }

    let mut best: Option<(usize, u32, FilledRegion)> = None;
    for (idx, bb) in boxes.iter().enumerate() {
        let label = idx as u32 + 1;
        let bb = bb.expect("every component has pixels");
        let region = fill_component(&comps, label, bb, w, h);
        let area = region.area();
        if best.as_ref().is_none_or(|(a, _, _)| area > *a) {
            best = Some((area, label, region));
        }
    }
    let (_, _, region) = best.expect("at least one component");
    Ok(region.into_mask(w, h))
}

struct FilledRegion {
    x0: usize,
    y0: usize,
    bw: usize,
    inside: Vec<bool>,
}

impl FilledRegion {
    fn area(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    fn into_mask(self, w: usize, h: usize) -> BinaryMask {
        let mut m = BinaryMask::empty(w, h);
        for (i, _) in self.inside.iter().enumerate().filter(|(_, &b)| b) {
            m.set(self.x0 + i % self.bw, self.y0 + i / self.bw, true);
        }
        m
    }
}

// Flood the background inside the component's bounding box grown by one pixel
// (clipped to the canvas). Outside that box nothing blocks the way to the
// canvas border, so seeding from the box boundary is equivalent.
fn fill_component(comps: &ComponentLabels, label: u32, bb: BoundingBox, w: usize, h: usize) -> FilledRegion {
    let x0 = bb.x0.saturating_sub(1);
    let y0 = bb.y0.saturating_sub(1);
    let x1 = (bb.x1 + 1).min(w - 1);
    let y1 = (bb.y1 + 1).min(h - 1);
    let (bw, bh) = (x1 - x0 + 1, y1 - y0 + 1);
    let wall = |lx: usize, ly: usize| comps.labels[(y0 + ly) * w + x0 + lx] == label;

    let mut reached = vec![false; bw * bh];
    let mut queue = VecDeque::new();
    for ly in 0..bh {
        for lx in 0..bw {
            let on_boundary = lx == 0 || ly == 0 || lx == bw - 1 || ly == bh - 1;
            if on_boundary && !wall(lx, ly) {
                reached[ly * bw + lx] = true;
                queue.push_back((lx, ly));
            }
        }
    }
    while let Some((lx, ly)) = queue.pop_front() {
        for (dx, dy) in [(0isize, -1isize), (-1, 0), (1, 0), (0, 1)] {
            let (nx, ny) = (lx as isize + dx, ly as isize + dy);
            if nx < 0 || ny < 0 || nx >= bw as isize || ny >= bh as isize {
                continue;
            }
            let (nx, ny) = (nx as usize, ny as usize);
            if !reached[ny * bw + nx] && !wall(nx, ny) {
                reached[ny * bw + nx] = true;
                queue.push_back((nx, ny));
            }
        }
    }
    FilledRegion { x0, y0, bw, inside: reached.into_iter().map(|r| !r).collect() }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(w: usize, h: usize, cx: f64, cy: f64, r: f64) -> BinaryMask {
        // one-pixel 8-connected digital circle: pixels whose centre is within 0.5 of radius r
        BinaryMask::from_fn(w, h, |x, y| {
            let d = ((x as f64 - cx).powi(2) + (y as f64 - cy).powi(2)).sqrt();
            (d - r).abs() <= 0.5
        })
    }

    #[test]
    fn empty_mask_has_no_components() {
        assert_eq!(connected_components(&BinaryMask::empty(4, 4), Connectivity::Eight).count(), 0);
        assert_eq!(largest_contour_fill(&BinaryMask::empty(4, 4)), Err(EdgeError::NoContour));
    }

    #[test]
    fn diagonal_pixels_depend_on_connectivity() {
        let mut m = BinaryMask::empty(3, 3);
        m.set(0, 0, true);
        m.set(1, 1, true);
        assert_eq!(connected_components(&m, Connectivity::Eight).count(), 1);
        assert_eq!(connected_components(&m, Connectivity::Four).count(), 2);
    }

    #[test]
    fn labels_follow_raster_discovery_order() {
        let m = BinaryMask::from_fn(6, 3, |x, y| (x == 4 && y == 0) || (x == 1 && y == 2) || (x == 0 && y == 1));
        let c = connected_components(&m, Connectivity::Four);
        assert_eq!(c.label(4, 0), 1);
        assert_eq!(c.label(0, 1), 2);
        assert_eq!(c.label(1, 2), 3);
        assert_eq!(c.sizes(), &[1, 1, 1]);
    }

    #[test]
    fn disk_outline_fills_to_disk() {
        let (cx, cy, r) = (40.0, 38.0, 30.0);
        let outline = ring(80, 80, cx, cy, r);
        let filled = largest_contour_fill(&outline).unwrap();
        let disk = BinaryMask::from_fn(80, 80, |x, y| ((x as f64 - cx).powi(2) + (y as f64 - cy).powi(2)).sqrt() <= r);
        assert!(filled.iou(&disk) >= 0.95, "iou {}", filled.iou(&disk));
    }

    #[test]
    fn larger_of_two_rings_wins() {
        let small = ring(80, 40, 15.0, 20.0, 8.0);
        let big = ring(80, 40, 55.0, 20.0, 14.0);
        let filled = largest_contour_fill(&small.union(&big)).unwrap();
        let big_fill = largest_contour_fill(&big).unwrap();
        assert_eq!(filled, big_fill);
        assert!(filled.area() > largest_contour_fill(&small).unwrap().area());
        assert!(!filled.get(15, 20));
    }

    #[test]
    fn solid_blob_fills_to_itself() {
        let blob = BinaryMask::from_fn(20, 20, |x, y| (x as i32 - 10).abs() + (y as i32 - 9).abs() <= 6);
        assert_eq!(largest_contour_fill(&blob).unwrap(), blob);
    }

    #[test]
    fn outline_touching_canvas_border() {
        // a U open towards the top border is not closed, so nothing is filled in
        let u = BinaryMask::from_fn(10, 10, |x, y| (x == 2 || x == 7) && y <= 6 || (y == 6 && (2..=7).contains(&x)));
        assert_eq!(largest_contour_fill(&u).unwrap(), u);
        // a contour running along the canvas border encloses everything
        let frame = BinaryMask::from_fn(10, 10, |x, y| x == 0 || y == 0 || x == 9 || y == 9);
        assert_eq!(largest_contour_fill(&frame).unwrap().area(), 100);
    }
}
