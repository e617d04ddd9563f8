use std::fs;
use std::io::{Cursor, Write};
use std::path::Path;

use image::codecs::png::PngEncoder;
use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageReader};

use super::{BinaryMask, RasterError, RasterImage};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Format {
    Png,
    Pnm,
}

fn format_for(path: &Path) -> Result<Format, RasterError> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default();
    match ext.as_str() {
        "png" => Ok(Format::Png),
        "pgm" | "ppm" | "pnm" => Ok(Format::Pnm),
        _ => Err(RasterError::UnsupportedFormat { path: path.display().to_string() }),
    }
}

/// Reads a PNG or binary PGM/PPM. Grayscale files stay single-channel; any
/// other colour layout is converted to 8-bit RGB.
pub fn read_image(path: impl AsRef<Path>) -> Result<RasterImage, RasterError> {
    let path = path.as_ref();
    let shown = path.display().to_string();
    format_for(path)?;
    let reader = ImageReader::open(path)
        .map_err(|source| RasterError::Io { path: shown.clone(), source })?
        .with_guessed_format()
        .map_err(|source| RasterError::Io { path: shown.clone(), source })?;
    let decoded = reader
        .decode()
        .map_err(|e| RasterError::Decode { path: shown.clone(), message: e.to_string() })?;
    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    match decoded {
        DynamicImage::ImageLuma8(buf) => RasterImage::new(w, h, 1, buf.into_raw()),
        DynamicImage::ImageLuma16(_) | DynamicImage::ImageLumaA8(_) | DynamicImage::ImageLumaA16(_) => {
            RasterImage::new(w, h, 1, decoded.to_luma8().into_raw())
        }
        other => RasterImage::new(w, h, 3, other.to_rgb8().into_raw()),
    }
}

/// Encodes to PNG or binary PGM/PPM, chosen by file extension, and writes atomically.
pub fn write_image(img: &RasterImage, path: impl AsRef<Path>) -> Result<(), RasterError> {
    let path = path.as_ref();
    let bytes = encode(img, format_for(path)?)
        .map_err(|e| RasterError::Decode { path: path.display().to_string(), message: e.to_string() })?;
    write_atomic(path, &bytes)
}

fn encode(img: &RasterImage, format: Format) -> image::ImageResult<Vec<u8>> {
    let mut buf = Cursor::new(Vec::new());
    let (w, h) = (img.width() as u32, img.height() as u32);
    let color = if img.is_gray() { ExtendedColorType::L8 } else { ExtendedColorType::Rgb8 };
    match format {
        Format::Png => PngEncoder::new(&mut buf).write_image(img.data(), w, h, color)?,
        Format::Pnm => {
            let subtype = if img.is_gray() {
                PnmSubtype::Graymap(SampleEncoding::Binary)
            } else {
                PnmSubtype::Pixmap(SampleEncoding::Binary)
            };
            PnmEncoder::new(&mut buf).with_subtype(subtype).write_image(img.data(), w, h, color)?
        }
    }
    Ok(buf.into_inner())
}

/// Loads a mask; samples >= 128 are set.
pub fn read_mask(path: impl AsRef<Path>) -> Result<BinaryMask, RasterError> {
    let img = read_image(path)?;
    let gray = super::ensure_grayscale(&img);
    Ok(BinaryMask::from_image(&gray))
}

/// Persists a mask as 0/255 grayscale (PGM or PNG by extension).
pub fn write_mask(mask: &BinaryMask, path: impl AsRef<Path>) -> Result<(), RasterError> {
    write_image(&mask.to_image(), path)
}

/// Writes `bytes` to a sibling temporary file, then renames it over `path`.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<(), RasterError> {
    let path = path.as_ref();
    let io_err = |source| RasterError::Io { path: path.display().to_string(), source };
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let tmp = path.with_file_name(format!(".{file_name}.tmp-{}", std::process::id()));
    let mut file = fs::File::create(&tmp).map_err(io_err)?;
    file.write_all(bytes).map_err(io_err)?;
    file.sync_all().map_err(io_err)?;
    drop(file);
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io_err(e)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_layout_is_binary_p5() {
        let img = RasterImage::new(2, 1, 1, vec![0, 255]).unwrap();
        let bytes = encode(&img, Format::Pnm).unwrap();
        assert!(bytes.starts_with(b"P5"));
        assert!(bytes.ends_with(&[0, 255]));
    }

    #[test]
    fn unknown_extension_is_rejected() {
        let img = RasterImage::filled(1, 1, &[0]).unwrap();
        let err = write_image(&img, "/tmp/whatever.jpg").unwrap_err();
        assert!(matches!(err, RasterError::UnsupportedFormat { .. }));
    }

    #[test]
    fn truncated_file_is_a_decode_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("cut.png");
        let img = RasterImage::from_fn_rgb(16, 16, |x, y| [x as u8, y as u8, 0]).unwrap();
        let bytes = encode(&img, Format::Png).unwrap();
        fs::write(&p, &bytes[..bytes.len() / 2]).unwrap();
        assert!(matches!(read_image(&p), Err(RasterError::Decode { .. })));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(read_image("/nonexistent/x.png"), Err(RasterError::Io { .. })));
    }
}
