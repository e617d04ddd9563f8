//! `LCNN` weights files.
//!
//! All integers are little-endian `u32`, all reals little-endian IEEE-754 `f32`.
//!
//! ```text
//! "LCNN" version layer_count input_size input_channels class_count
//! class_count x (byte_len utf8_bytes)
//! layer_count x (tag:u8 dims... weights... bias...)
//! ```
//!
//! | tag | kind    | dims                                        | arrays |
//! |-----|---------|---------------------------------------------|--------|
//! | 1   | conv    | kernel_h kernel_w in out stride padding     | weights, bias |
//! | 2   | relu    |                                             | |
//! | 3   | maxpool | window stride                               | |
//! | 4   | flatten |                                             | |
//! | 5   | dense   | in_features out_features                    | weights, bias |
//!
//! Files that do not start with the magic are parsed as the JSON mirror.

use std::path::Path;

use super::{ClassifierError, ClassifierSpec, LayerSpec};
use crate::raster::write_atomic;

pub const LCNN_MAGIC: &[u8; 4] = b"LCNN";
pub const LCNN_VERSION: u32 = 1;

/// Loads and validates a spec from a binary `LCNN` file or its JSON mirror.
pub fn load_spec(path: impl AsRef<Path>) -> Result<ClassifierSpec, ClassifierError> {
    let path = path.as_ref();
    let shown = path.display().to_string();
    let bytes = std::fs::read(path).map_err(|source| ClassifierError::Io { path: shown.clone(), source })?;
    if bytes.starts_with(LCNN_MAGIC) {
        decode(&bytes)
    } else {
        serde_json::from_slice(&bytes).map_err(|e| ClassifierError::Format { path: shown, message: e.to_string() })
    }
}

/// Writes the binary form, or JSON when the extension is `.json`.
pub fn save_spec(spec: &ClassifierSpec, path: impl AsRef<Path>) -> Result<(), ClassifierError> {
    let path = path.as_ref();
    let bytes = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        serde_json::to_vec_pretty(spec).expect("spec serialises")
    } else {
        encode(spec)
    };
    write_atomic(path, &bytes).map_err(|e| ClassifierError::Format { path: path.display().to_string(), message: e.to_string() })
}

pub(crate) fn encode(spec: &ClassifierSpec) -> Vec<u8> {
    let mut out = Vec::new();
    let u = |out: &mut Vec<u8>, v: usize| out.extend_from_slice(&(v as u32).to_le_bytes());
    let reals = |out: &mut Vec<u8>, vs: &[f32]| vs.iter().for_each(|v| out.extend_from_slice(&v.to_le_bytes()));
    out.extend_from_slice(LCNN_MAGIC);
    out.extend_from_slice(&LCNN_VERSION.to_le_bytes());
    u(&mut out, spec.layers().len());
    u(&mut out, spec.input_size());
    u(&mut out, spec.input_channels());
    u(&mut out, spec.class_labels().len());
    for label in spec.class_labels() {
        u(&mut out, label.len());
        out.extend_from_slice(label.as_bytes());
    }
    for layer in spec.layers() {
        match layer {
            LayerSpec::Conv { kernel_h, kernel_w, in_channels, out_channels, stride, padding, weights, bias } => {
                out.push(1);
                for d in [kernel_h, kernel_w, in_channels, out_channels, stride, padding] {
                    u(&mut out, *d);
                }
                reals(&mut out, weights);
                reals(&mut out, bias);
            }
            LayerSpec::Relu => out.push(2),
            LayerSpec::MaxPool { window, stride } => {
                out.push(3);
                u(&mut out, *window);
                u(&mut out, *stride);
            }
            LayerSpec::Flatten => out.push(4),
            LayerSpec::Dense { in_features, out_features, weights, bias } => {
                out.push(5);
                u(&mut out, *in_features);
                u(&mut out, *out_features);
                reals(&mut out, weights);
                reals(&mut out, bias);
            }
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    layer: Option<usize>,
}

impl Reader<'_> {
    fn err(&self, message: String) -> ClassifierError {
        match self.layer {
            Some(layer) => ClassifierError::Layer { layer, message },
            None => ClassifierError::Spec(format!("header: {message}")),
        }
    }

    fn take(&mut self, n: usize, what: &str) -> Result<&[u8], ClassifierError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(self.err(format!("truncated while reading {what} at byte {}", self.pos))),
        }
    }

    fn u8(&mut self, what: &str) -> Result<u8, ClassifierError> {
        Ok(self.take(1, what)?[0])
    }

    fn u32(&mut self, what: &str) -> Result<usize, ClassifierError> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as usize)
    }

    fn reals(&mut self, count: usize, what: &str) -> Result<Vec<f32>, ClassifierError> {
        let n = count.checked_mul(4).ok_or_else(|| self.err(format!("{what}: length overflow")))?;
        let b = self.take(n, what)?;
        Ok(b.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect())
    }
}

pub(crate) fn decode(bytes: &[u8]) -> Result<ClassifierSpec, ClassifierError> {
    let mut r = Reader { bytes, pos: 0, layer: None };
    if r.take(4, "magic")? != LCNN_MAGIC {
        return Err(r.err("bad magic".into()));
    }
    let version = r.u32("version")?;
    if version != LCNN_VERSION as usize {
        return Err(r.err(format!("unsupported version {version}")));
    }
    let layer_count = r.u32("layer count")?;
    let input_size = r.u32("input size")?;
    let input_channels = r.u32("input channels")?;
    let class_count = r.u32("class count")?;
    let mut labels = Vec::with_capacity(class_count.min(1024));
    for i in 0..class_count {
        let len = r.u32("label length")?;
        let raw = r.take(len, "label")?.to_vec();
        labels.push(String::from_utf8(raw).map_err(|_| r.err(format!("label {i} is not UTF-8")))?);
    }
    let mut layers = Vec::with_capacity(layer_count.min(1024));
    for i in 0..layer_count {
        r.layer = Some(i);
        let layer = match r.u8("kind tag")? {
            1 => {
                let kernel_h = r.u32("kernel_h")?;
                let kernel_w = r.u32("kernel_w")?;
                let in_channels = r.u32("in_channels")?;
                let out_channels = r.u32("out_channels")?;
                let stride = r.u32("stride")?;
                let padding = r.u32("padding")?;
                let n = out_channels
                    .checked_mul(in_channels)
                    .and_then(|v| v.checked_mul(kernel_h))
                    .and_then(|v| v.checked_mul(kernel_w))
                    .ok_or_else(|| r.err("conv weight count overflows".into()))?;
                let weights = r.reals(n, "conv weights")?;
                let bias = r.reals(out_channels, "conv bias")?;
                LayerSpec::Conv { kernel_h, kernel_w, in_channels, out_channels, stride, padding, weights, bias }
            }
            2 => LayerSpec::Relu,
            3 => {
                let window = r.u32("window")?;
                let stride = r.u32("stride")?;
                LayerSpec::MaxPool { window, stride }
            }
            4 => LayerSpec::Flatten,
            5 => {
                let in_features = r.u32("in_features")?;
                let out_features = r.u32("out_features")?;
                let n = in_features
                    .checked_mul(out_features)
                    .ok_or_else(|| r.err("dense weight count overflows".into()))?;
                let weights = r.reals(n, "dense weights")?;
                let bias = r.reals(out_features, "dense bias")?;
                LayerSpec::Dense { in_features, out_features, weights, bias }
            }
            tag => return Err(r.err(format!("unknown layer kind tag {tag}"))),
        };
        layers.push(layer);
    }
    r.layer = None;
    if r.pos != bytes.len() {
        return Err(r.err(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    ClassifierSpec::new(input_size, input_channels, labels, layers)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ClassifierSpec {
        ClassifierSpec::new(
            4,
            3,
            vec!["left".into(), "right".into()],
            vec![
                LayerSpec::Conv {
                    kernel_h: 3,
                    kernel_w: 3,
                    in_channels: 3,
                    out_channels: 2,
                    stride: 1,
                    padding: 1,
                    weights: (0..54).map(|i| i as f32 * 0.01 - 0.2).collect(),
                    bias: vec![0.1, -0.1],
                },
                LayerSpec::Relu,
                LayerSpec::MaxPool { window: 2, stride: 2 },
                LayerSpec::Flatten,
                LayerSpec::Dense {
                    in_features: 8,
                    out_features: 2,
                    weights: (0..16).map(|i| (i as f32).sin()).collect(),
                    bias: vec![0.0, 0.25],
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn binary_round_trip() {
        let spec = small();
        let bytes = encode(&spec);
        assert_eq!(&bytes[..4], b"LCNN");
        assert_eq!(decode(&bytes).unwrap(), spec);
    }

    #[test]
    fn files_round_trip_in_both_formats() {
        let dir = tempfile::tempdir().unwrap();
        let spec = small();
        for name in ["w.lcnn", "w.json"] {
            let p = dir.path().join(name);
            save_spec(&spec, &p).unwrap();
            assert_eq!(load_spec(&p).unwrap(), spec);
        }
    }

    #[test]
    fn truncation_names_the_layer() {
        let bytes = encode(&small());
        // drop the final dense bias value
        let err = decode(&bytes[..bytes.len() - 4]).unwrap_err();
        assert!(matches!(err, ClassifierError::Layer { layer: 4, .. }), "{err}");
        assert!(err.to_string().contains("dense bias"));
    }

    #[test]
    fn unknown_tag_and_trailing_bytes() {
        let mut bytes = encode(&small());
        let header = 4 + 5 * 4 + (4 + 4) + (4 + 5);
        assert_eq!(bytes[header], 1);
        bytes[header] = 9;
        let err = decode(&bytes).unwrap_err();
        assert!(matches!(err, ClassifierError::Layer { layer: 0, .. }));
        assert!(err.to_string().contains("unknown layer kind tag 9"));

        let mut long = encode(&small());
        long.push(0);
        assert!(decode(&long).unwrap_err().to_string().contains("trailing"));
    }

    #[test]
    fn shape_errors_surface_from_binary() {
        let mut bytes = encode(&small());
        // patch dense in_features (8 -> 9) and append the extra weights it now needs
        let dense_at = bytes.len() - (1 + 8 + 16 * 4 + 2 * 4);
        assert_eq!(bytes[dense_at], 5);
        bytes[dense_at + 1..dense_at + 5].copy_from_slice(&9u32.to_le_bytes());
        bytes.extend_from_slice(&[0u8; 8]);
        let err = decode(&bytes).unwrap_err();
        assert!(matches!(err, ClassifierError::Layer { layer: 4, .. }), "{err}");
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(load_spec("/nonexistent/w.lcnn"), Err(ClassifierError::Io { .. })));
    }
}
