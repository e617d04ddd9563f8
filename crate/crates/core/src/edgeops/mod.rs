//! Filtering and binary morphology: Gaussian blur, Sobel gradients, Canny,
//! square-element dilation/erosion/closing, connected components and
//! hole-filled contour selection.
//!
//! Everything here is implemented directly on `RasterImage` and
//! `BinaryMask`; borders use reflect-101 extension (`dcb|abcd|cba`) unless a
//! function says otherwise.

mod canny;
mod components;
mod filter;
mod morphology;

use thiserror::Error;

pub use canny::{canny, canny_detailed, CannyOutput, CannyParams, EdgeMap};
pub use components::{connected_components, largest_contour_fill, ComponentLabels, Connectivity};
pub use filter::{gaussian_blur, gaussian_kernel, sobel, GradientField};
pub use morphology::{close, dilate, erode};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EdgeError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no contour: edge mask is empty")]
    NoContour,
}

/// Reflect-101 index into `0..n`.
pub(crate) fn reflect101(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let n = n as isize;
    let period = 2 * n - 2;
    let mut i = i.rem_euclid(period);
    if i >= n {
        i = period - i;
    }
    i as usize
}
