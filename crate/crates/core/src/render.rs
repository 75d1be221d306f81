//! Colored overlays for inspection.
//!
//! Lines take colors from a fixed 12-color palette cycling by label id;
//! label 0 renders white.

use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, GrayImage, ImageFormat, Rgb, RgbImage};

use crate::blob::BlobLine;
use crate::error::{Error, Result};
use crate::filter_bank::ResponseField;
use crate::gt::{LineLabeling, PolygonSet};
use crate::imaging::BinaryImage;

pub const PALETTE: [[u8; 3]; 12] = [
    [230, 25, 75],
    [60, 180, 75],
    [0, 130, 200],
    [245, 130, 48],
    [145, 30, 180],
    [70, 190, 190],
    [240, 50, 230],
    [150, 150, 0],
    [0, 128, 128],
    [170, 110, 40],
    [128, 0, 0],
    [0, 0, 128],
];

const WHITE: [u8; 3] = [255, 255, 255];
const INK: [u8; 3] = [0, 0, 0];
const FAINT_INK: [u8; 3] = [200, 200, 200];

/// Palette color of line `label`; white for 0.
pub fn label_color(label: u32) -> [u8; 3] {
    if label == 0 {
        WHITE
    } else {
        PALETTE[(label as usize - 1) % PALETTE.len()]
    }
}

pub fn render_labels(labeling: &LineLabeling) -> RgbImage {
    let (w, h) = (labeling.width() as u32, labeling.height() as u32);
    RgbImage::from_fn(w, h, |x, y| Rgb(label_color(labeling.get(y as usize, x as usize))))
}

/// Ink in black with each polygon's outline in its line color.
pub fn render_polygons(img: &BinaryImage, polys: &PolygonSet) -> RgbImage {
    let (w, h) = (img.width() as u32, img.height() as u32);
    let mut out = RgbImage::from_fn(w, h, |x, y| {
        Rgb(if img.get(y as usize, x as usize) { INK } else { WHITE })
    });
    for (k, poly) in polys.polygons.iter().enumerate() {
        let color = Rgb(label_color(k as u32 + 1));
        for i in 0..poly.len() {
            let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
            let steps = (b.0 - a.0).abs().max((b.1 - a.1).abs()).max(1);
            for t in 0..=steps {
                let x = a.0 + (b.0 - a.0) * t / steps;
                let y = a.1 + (b.1 - a.1) * t / steps;
                if x >= 0 && y >= 0 && (x as u32) < w && (y as u32) < h {
                    out.put_pixel(x as u32, y as u32, color);
                }
            }
        }
    }
    out
}

/// Page ink in light gray with each blob in its own palette color.
pub fn render_blobs(img: &BinaryImage, blobs: &[BlobLine]) -> RgbImage {
    let (w, h) = (img.width() as u32, img.height() as u32);
    let mut out = RgbImage::from_fn(w, h, |x, y| {
        Rgb(if img.get(y as usize, x as usize) {
            FAINT_INK
        } else {
            WHITE
        })
    });
    for (k, b) in blobs.iter().enumerate() {
        let color = Rgb(label_color(k as u32 + 1));
        for &(r, c) in &b.pixels {
            out.put_pixel(c as u32, r as u32, color);
        }
    }
    out
}

/// Maximum response scaled to 0..255, brighter is stronger.
pub fn render_response(field: &ResponseField) -> GrayImage {
    let max = field.global_max();
    let scale = if max > 0.0 { 255.0 / max } else { 0.0 };
    GrayImage::from_fn(field.width as u32, field.height as u32, |x, y| {
        image::Luma([(field.response(y as usize, x as usize) * scale)
            .round()
            .clamp(0.0, 255.0) as u8])
    })
}

pub fn encode_png(img: DynamicImage) -> Result<Vec<u8>> {
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png)
        .map_err(|e| Error::Format(format!("cannot encode PNG: {e}")))?;
    Ok(out.into_inner())
}

pub fn save_png(path: impl AsRef<Path>, img: DynamicImage) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_png(img)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
