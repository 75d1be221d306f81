//! DIVA pixel labeling: every pixel carries an RGB class code.

use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, ImageFormat, RgbImage};

use super::{polygon_mask, PolygonSet};
use crate::error::{Error, Result};
use crate::imaging::BinaryImage;

/// Outside every polygon.
pub const DIVA_BACKGROUND: [u8; 3] = [0, 0, 0];
/// Foreground inside a polygon.
pub const DIVA_TEXT: [u8; 3] = [0, 0, 1];
/// Background inside a polygon.
pub const DIVA_BOUNDARY: [u8; 3] = [128, 0, 0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivaClass {
    Background,
    TextLine,
    Boundary,
}

impl DivaClass {
    pub fn code(self) -> [u8; 3] {
        match self {
            DivaClass::Background => DIVA_BACKGROUND,
            DivaClass::TextLine => DIVA_TEXT,
            DivaClass::Boundary => DIVA_BOUNDARY,
        }
    }

    pub fn from_code(code: [u8; 3]) -> Option<Self> {
        match code {
            DIVA_BACKGROUND => Some(DivaClass::Background),
            DIVA_TEXT => Some(DivaClass::TextLine),
            DIVA_BOUNDARY => Some(DivaClass::Boundary),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivaLabeling {
    pub width: usize,
    pub height: usize,
    pub classes: Vec<DivaClass>,
}

impl DivaLabeling {
    #[inline]
    pub fn get(&self, row: usize, col: usize) -> DivaClass {
        self.classes[row * self.width + col]
    }

    pub fn to_rgb(&self) -> RgbImage {
        let raw: Vec<u8> = self.classes.iter().flat_map(|c| c.code()).collect();
        RgbImage::from_raw(self.width as u32, self.height as u32, raw).expect("buffer length matches dimensions")
    }

    pub fn encode_png(&self) -> Result<Vec<u8>> {
        let mut out = Cursor::new(Vec::new());
        DynamicImage::ImageRgb8(self.to_rgb())
            .write_to(&mut out, ImageFormat::Png)
            .map_err(|e| Error::Format(format!("cannot encode DIVA image: {e}")))?;
        Ok(out.into_inner())
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let bytes = self.encode_png()?;
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
    }

    /// Pixels inside some polygon (text line or boundary class).
    pub fn interior_mask(&self) -> Vec<bool> {
        self.classes.iter().map(|&c| c != DivaClass::Background).collect()
    }

    /// Foreground pixels inside some polygon.
    pub fn text_mask(&self) -> Vec<bool> {
        self.classes.iter().map(|&c| c == DivaClass::TextLine).collect()
    }
}

/// Classifies each pixel by polygon membership and ink. Polygons are clipped
/// to the image.
pub fn diva_encode(img: &BinaryImage, polys: &PolygonSet) -> DivaLabeling {
    let (w, h) = (img.width(), img.height());
    let mut inside = vec![false; w * h];
    for poly in &polys.polygons {
        for (i, b) in polygon_mask(poly, w, h).into_iter().enumerate() {
            inside[i] |= b;
        }
    }
    let classes = inside
        .iter()
        .zip(img.bits())
        .map(|(&inn, &fg)| match (inn, fg) {
            (false, _) => DivaClass::Background,
            (true, true) => DivaClass::TextLine,
            (true, false) => DivaClass::Boundary,
        })
        .collect();
    DivaLabeling {
        width: w,
        height: h,
        classes,
    }
}

/// Reads DIVA PNG bytes; any color outside the three codes is a format error.
pub fn decode_diva(bytes: &[u8]) -> Result<DivaLabeling> {
    let img = image::load_from_memory_with_format(bytes, ImageFormat::Png)
        .map_err(|e| Error::Format(format!("cannot decode DIVA image: {e}")))?
        .to_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let mut classes = Vec::with_capacity(w * h);
    for (i, p) in img.pixels().enumerate() {
        let class = DivaClass::from_code(p.0).ok_or_else(|| {
            Error::Format(format!(
                "pixel ({}, {}) has color {:?}, not a DIVA code",
                i / w,
                i % w,
                p.0
            ))
        })?;
        classes.push(class);
    }
    Ok(DivaLabeling {
        width: w,
        height: h,
        classes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_codes() {
        let img = BinaryImage::from_fn(6, 6, |r, c| r == 2 && c < 4).unwrap();
        let polys = PolygonSet::new(vec![vec![(0, 1), (4, 1), (4, 3), (0, 3)]]);
        let d = diva_encode(&img, &polys);
        assert_eq!(d.get(2, 1), DivaClass::TextLine);
        assert_eq!(d.get(1, 1), DivaClass::Boundary);
        assert_eq!(d.get(5, 5), DivaClass::Background);
        let back = decode_diva(&d.encode_png().unwrap()).unwrap();
        assert_eq!(back, d);
        assert_eq!(d.to_rgb().get_pixel(1, 2).0, [0, 0, 1]);
    }

    #[test]
    fn foreign_color_rejected() {
        let img = RgbImage::from_raw(1, 1, vec![1, 2, 3]).unwrap();
        let mut out = Cursor::new(Vec::new());
        DynamicImage::ImageRgb8(img)
            .write_to(&mut out, ImageFormat::Png)
            .unwrap();
        assert!(matches!(decode_diva(&out.into_inner()), Err(Error::Format(_))));
    }
}
