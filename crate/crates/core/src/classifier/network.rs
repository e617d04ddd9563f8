use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ClassifierError, Probabilities};
use crate::raster::{self, RasterImage, ResizeMode};
use crate::scalar::Scalar;

/// One layer of the feed-forward network.
///
/// Weight layouts: convolution `[out][in][kh][kw]`, dense `[out][in]`. Dense
/// layers accept any input shape and read it flattened in channel-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LayerSpec {
    Conv {
        kernel_h: usize,
        kernel_w: usize,
        in_channels: usize,
        out_channels: usize,
        #[serde(default = "one")]
        stride: usize,
        #[serde(default)]
        padding: usize,
        weights: Vec<f32>,
        bias: Vec<f32>,
    },
    Relu,
    #[serde(rename = "maxpool")]
    MaxPool { window: usize, stride: usize },
    Flatten,
    Dense { in_features: usize, out_features: usize, weights: Vec<f32>, bias: Vec<f32> },
}

fn one() -> usize {
    1
}

impl LayerSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            LayerSpec::Conv { .. } => "conv",
            LayerSpec::Relu => "relu",
            LayerSpec::MaxPool { .. } => "maxpool",
            LayerSpec::Flatten => "flatten",
            LayerSpec::Dense { .. } => "dense",
        }
    }

    /// Output shape `(channels, height, width)` for the given input shape.
    fn output_shape(&self, index: usize, (c, h, w): Shape) -> Result<Shape, ClassifierError> {
        let fail = |message: String| ClassifierError::Layer { layer: index, message };
        match *self {
            LayerSpec::Conv { kernel_h, kernel_w, in_channels, out_channels, stride, padding, ref weights, ref bias } => {
                if kernel_h == 0 || kernel_w == 0 || out_channels == 0 || stride == 0 {
                    return Err(fail("conv kernel, out_channels and stride must be positive".into()));
                }
                if in_channels != c {
                    return Err(fail(format!("conv expects {in_channels} input channels, previous layer gives {c}")));
                }
                let expected = out_channels * in_channels * kernel_h * kernel_w;
                if weights.len() != expected {
                    return Err(fail(format!("conv weights: expected {expected} values, got {}", weights.len())));
                }
                if bias.len() != out_channels {
                    return Err(fail(format!("conv bias: expected {out_channels} values, got {}", bias.len())));
                }
                if h + 2 * padding < kernel_h || w + 2 * padding < kernel_w {
                    return Err(fail(format!("conv kernel {kernel_h}x{kernel_w} larger than padded input {h}x{w}")));
                }
                Ok((
                    out_channels,
                    (h + 2 * padding - kernel_h) / stride + 1,
                    (w + 2 * padding - kernel_w) / stride + 1,
                ))
            }
            LayerSpec::Relu => Ok((c, h, w)),
            LayerSpec::MaxPool { window, stride } => {
                if window == 0 || stride == 0 {
                    return Err(fail("maxpool window and stride must be positive".into()));
                }
                if h < window || w < window {
                    return Err(fail(format!("maxpool window {window} larger than input {h}x{w}")));
                }
                Ok((c, (h - window) / stride + 1, (w - window) / stride + 1))
            }
            LayerSpec::Flatten => Ok((c * h * w, 1, 1)),
            LayerSpec::Dense { in_features, out_features, ref weights, ref bias } => {
                if out_features == 0 {
                    return Err(fail("dense out_features must be positive".into()));
                }
                if in_features != c * h * w {
                    return Err(fail(format!("dense expects {in_features} inputs, previous layer gives {}", c * h * w)));
                }
                let expected = in_features * out_features;
                if weights.len() != expected {
                    return Err(fail(format!("dense weights: expected {expected} values, got {}", weights.len())));
                }
                if bias.len() != out_features {
                    return Err(fail(format!("dense bias: expected {out_features} values, got {}", bias.len())));
                }
                Ok((out_features, 1, 1))
            }
        }
    }
}

type Shape = (usize, usize, usize);

#[derive(Deserialize)]
struct RawSpec {
    input_size: usize,
    #[serde(default = "three")]
    input_channels: usize,
    class_labels: Vec<String>,
    layers: Vec<LayerSpec>,
}

fn three() -> usize {
    3
}

/// A validated feed-forward network; immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct ClassifierSpec {
    input_size: usize,
    input_channels: usize,
    class_labels: Vec<String>,
    layers: Vec<LayerSpec>,
}

impl TryFrom<RawSpec> for ClassifierSpec {
    type Error = ClassifierError;

    fn try_from(raw: RawSpec) -> Result<Self, Self::Error> {
        ClassifierSpec::new(raw.input_size, raw.input_channels, raw.class_labels, raw.layers)
    }
}

impl ClassifierSpec {
    /// Checks that layer shapes chain and the last layer yields one score per label.
    pub fn new(
        input_size: usize,
        input_channels: usize,
        class_labels: Vec<String>,
        layers: Vec<LayerSpec>,
    ) -> Result<Self, ClassifierError> {
        if input_size == 0 {
            return Err(ClassifierError::Spec("input_size must be positive".into()));
        }
        if input_channels != 1 && input_channels != 3 {
            return Err(ClassifierError::Spec(format!("input_channels must be 1 or 3, got {input_channels}")));
        }
        if class_labels.is_empty() {
            return Err(ClassifierError::Spec("at least one class label is required".into()));
        }
        let mut shape = (input_channels, input_size, input_size);
        for (i, layer) in layers.iter().enumerate() {
            shape = layer.output_shape(i, shape)?;
        }
        let outputs = shape.0 * shape.1 * shape.2;
        if outputs != class_labels.len() {
            return Err(ClassifierError::Spec(format!(
                "network produces {outputs} scores but {} class labels are declared",
                class_labels.len()
            )));
        }
        Ok(Self { input_size, input_channels, class_labels, layers })
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn input_channels(&self) -> usize {
        self.input_channels
    }

    pub fn class_labels(&self) -> &[String] {
        &self.class_labels
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    /// Copy with `offset` added to every bias of the final dense or conv layer.
    pub fn with_final_bias_offset(&self, offset: f32) -> Self {
        let mut out = self.clone();
        if let Some(bias) = out.layers.iter_mut().rev().find_map(|l| match l {
            LayerSpec::Dense { bias, .. } | LayerSpec::Conv { bias, .. } => Some(bias),
            _ => None,
        }) {
            bias.iter_mut().for_each(|b| *b += offset);
        }
        out
    }

    /// Resizes and normalises the image into a CHW tensor.
    pub fn preprocess<T: Scalar>(&self, img: &RasterImage) -> Result<Vec<T>, ClassifierError> {
        let n = self.input_size;
        let resized = raster::scale(img, n, n, ResizeMode::Bilinear)
            .map_err(|e| ClassifierError::InvalidInput(e.to_string()))?;
        let src = if self.input_channels == 1 { raster::ensure_grayscale(&resized) } else { resized };
        let ch = src.channels();
        let scale = T::of(1.0 / 255.0);
        let mut out = Vec::with_capacity(self.input_channels * n * n);
        for c in 0..self.input_channels {
            // grayscale input feeds the same plane to every channel
            let sc = if ch == 1 { 0 } else { c };
            out.extend(src.data().iter().skip(sc).step_by(ch).map(|&v| T::of(f64::from(v)) * scale));
        }
        Ok(out)
    }

    /// Pre-softmax scores.
    pub fn logits<T: Scalar>(&self, img: &RasterImage) -> Result<Vec<T>, ClassifierError> {
        let mut x = self.preprocess::<T>(img)?;
        let mut shape = (self.input_channels, self.input_size, self.input_size);
        for layer in &self.layers {
            let (next, out) = apply(layer, &x, shape);
            x = next;
            shape = out;
        }
        Ok(x)
    }

    /// Full forward pass: resize, normalise, layers, softmax.
    pub fn forward<T: Scalar>(&self, img: &RasterImage) -> Result<Probabilities<T>, ClassifierError> {
        Ok(Probabilities::from_logits(&self.logits::<T>(img)?))
    }
}

fn apply<T: Scalar>(layer: &LayerSpec, x: &[T], (c, h, w): Shape) -> (Vec<T>, Shape) {
    let f = |v: f32| T::of(f64::from(v));
    match *layer {
        LayerSpec::Conv { kernel_h, kernel_w, out_channels, stride, padding, ref weights, ref bias, .. } => {
            let oh = (h + 2 * padding - kernel_h) / stride + 1;
            let ow = (w + 2 * padding - kernel_w) / stride + 1;
            let (ph, pw) = (h + 2 * padding, w + 2 * padding);
            let mut xp = vec![T::zero(); c * ph * pw];
            for i in 0..c {
                for y in 0..h {
                    let dst = (i * ph + y + padding) * pw + padding;
                    xp[dst..dst + w].copy_from_slice(&x[(i * h + y) * w..(i * h + y + 1) * w]);
                }
            }
            let mut out = vec![T::zero(); out_channels * oh * ow];
            for o in 0..out_channels {
                let plane = &mut out[o * oh * ow..(o + 1) * oh * ow];
                plane.iter_mut().for_each(|v| *v = f(bias[o]));
                for i in 0..c {
                    for ky in 0..kernel_h {
                        for kx in 0..kernel_w {
                            let wv = f(weights[((o * c + i) * kernel_h + ky) * kernel_w + kx]);
                            for oy in 0..oh {
                                let src = (i * ph + oy * stride + ky) * pw + kx;
                                let dst = &mut plane[oy * ow..(oy + 1) * ow];
                                if stride == 1 {
                                    for (d, &s) in dst.iter_mut().zip(&xp[src..src + ow]) {
                                        *d = *d + wv * s;
                                    }
                                } else {
                                    for (ox, d) in dst.iter_mut().enumerate() {
                                        *d = *d + wv * xp[src + ox * stride];
                                    }
                                }
                            }
                        }
                    }
                }
            }
            (out, (out_channels, oh, ow))
        }
        LayerSpec::Relu => (x.iter().map(|&v| v.max(T::zero())).collect(), (c, h, w)),
        LayerSpec::MaxPool { window, stride } => {
            let oh = (h - window) / stride + 1;
            let ow = (w - window) / stride + 1;
            let mut out = Vec::with_capacity(c * oh * ow);
            for i in 0..c {
                for oy in 0..oh {
                    for ox in 0..ow {
                        let mut m = T::neg_infinity();
                        for ky in 0..window {
                            for kx in 0..window {
                                m = m.max(x[(i * h + oy * stride + ky) * w + ox * stride + kx]);
                            }
                        }
                        out.push(m);
                    }
                }
            }
            (out, (c, oh, ow))
        }
        LayerSpec::Flatten => (x.to_vec(), (c * h * w, 1, 1)),
        LayerSpec::Dense { in_features, out_features, ref weights, ref bias } => {
            let out = (0..out_features)
                .map(|o| {
                    let row = &weights[o * in_features..(o + 1) * in_features];
                    row.iter().zip(x).fold(f(bias[o]), |acc, (&wv, &xv)| acc + f(wv) * xv)
                })
                .collect();
            (out, (out_features, 1, 1))
        }
    }
}

/// The 16 sign classes of the default network, in class-index order.
pub fn lisa_cnn_labels() -> Vec<String> {
    [
        "Added Lane",
        "Keep Right",
        "Lane Ends",
        "Merge",
        "Ped. Crossing",
        "School",
        "School Speed Limit 25",
        "Signal Ahead",
        "Speed Limit 25",
        "Speed Limit 30",
        "Speed Limit 35",
        "Speed Limit 45",
        "Stop",
        "Stop Ahead",
        "Turn Right",
        "Yield",
    ]
    .into_iter()
    .map(String::from)
    .collect()
}

impl ClassifierSpec {
    /// Default architecture with seeded uniform He-style random weights:
    /// 32x32x3 input, three conv3x3 (32, 64, 128 channels, padding 1) each
    /// followed by ReLU and 2x2 max-pool, then a dense layer to 16 classes.
    pub fn lisa_cnn(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::new();
        let mut in_ch = 3;
        for out_ch in [32, 64, 128] {
            let fan_in = in_ch * 9;
            let bound = (6.0 / fan_in as f64).sqrt() as f32;
            let weights = (0..out_ch * fan_in).map(|_| rng.gen_range(-bound..bound)).collect();
            layers.push(LayerSpec::Conv {
                kernel_h: 3,
                kernel_w: 3,
                in_channels: in_ch,
                out_channels: out_ch,
                stride: 1,
                padding: 1,
                weights,
                bias: vec![0.0; out_ch],
            });
            layers.push(LayerSpec::Relu);
            layers.push(LayerSpec::MaxPool { window: 2, stride: 2 });
            in_ch = out_ch;
        }
        let labels = lisa_cnn_labels();
        let in_features = 128 * 4 * 4;
        let bound = (6.0 / in_features as f64).sqrt() as f32;
        layers.push(LayerSpec::Flatten);
        layers.push(LayerSpec::Dense {
            in_features,
            out_features: labels.len(),
            weights: (0..in_features * labels.len()).map(|_| rng.gen_range(-bound..bound)).collect(),
            bias: vec![0.0; labels.len()],
        });
        Self::new(32, 3, labels, layers).expect("default architecture is consistent")
    }
}
