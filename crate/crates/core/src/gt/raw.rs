//! Raw labels on disk: a 16-bit grayscale PNG whose sample is the line id.

use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, ImageBuffer, ImageFormat, Luma};

use super::LineLabeling;
use crate::error::{Error, Result};

/// PNG bytes of `labeling`; fails with a capacity error above 65535 lines.
pub fn encode_raw_png(labeling: &LineLabeling) -> Result<Vec<u8>> {
    if labeling.n_lines() > u16::MAX as usize {
        return Err(Error::Capacity(format!(
            "{} lines do not fit in a 16-bit label image",
            labeling.n_lines()
        )));
    }
    let samples: Vec<u16> = labeling.labels().iter().map(|&l| l as u16).collect();
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(labeling.width() as u32, labeling.height() as u32, samples)
            .expect("buffer length matches dimensions");
    let mut out = Cursor::new(Vec::new());
    DynamicImage::ImageLuma16(buf)
        .write_to(&mut out, ImageFormat::Png)
        .map_err(|e| Error::Format(format!("cannot encode label image: {e}")))?;
    Ok(out.into_inner())
}

pub fn decode_raw_png(bytes: &[u8]) -> Result<LineLabeling> {
    let img = image::load_from_memory_with_format(bytes, ImageFormat::Png)
        .map_err(|e| Error::Format(format!("cannot decode label image: {e}")))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let labels: Vec<u32> = match img {
        DynamicImage::ImageLuma16(b) => b.into_raw().into_iter().map(u32::from).collect(),
        DynamicImage::ImageLuma8(b) => b.into_raw().into_iter().map(u32::from).collect(),
        other => {
            return Err(Error::Format(format!(
                "label image must be single-channel grayscale, got {:?}",
                other.color()
            )))
        }
    };
    LineLabeling::new(w, h, labels)
}

pub fn write_raw_labels(path: impl AsRef<Path>, labeling: &LineLabeling) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_raw_png(labeling)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_raw_labels(path: impl AsRef<Path>) -> Result<LineLabeling> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_raw_png(&bytes)
}
