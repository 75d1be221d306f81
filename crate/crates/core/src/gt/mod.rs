//! Ground-truth forms: raw pixel labels, bounding polygons (PAGE XML) and
//! DIVA RGB pixel labeling.

mod diva;
mod hull;
mod page_xml;
mod raster;
mod raw;

pub use diva::{decode_diva, diva_encode, DivaClass, DivaLabeling, DIVA_BACKGROUND, DIVA_BOUNDARY, DIVA_TEXT};
pub use hull::{concave_hull, convex_hull, polygon_for_pixels, polygons_from_labels};
pub use page_xml::{
    page_xml_from_str, page_xml_to_string, read_page_xml, write_page_xml, PageDocument, PAGE_NAMESPACE,
};
pub use raster::{point_in_polygon, polygon_area2, polygon_mask, polygon_pixels};
pub use raw::{decode_raw_png, encode_raw_png, read_raw_labels, write_raw_labels};

use crate::error::{Error, Result};
use crate::imaging::Pixel;

/// Per-pixel line labels: 0 is background, `k` the k-th text line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineLabeling {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    n_lines: u32,
}

impl LineLabeling {
    /// Validates that every label in `1..=max` occurs.
    pub fn new(width: usize, height: usize, labels: Vec<u32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Format(format!(
                "label matrix must be non-empty, got {width}x{height}"
            )));
        }
        if labels.len() != width * height {
            return Err(Error::Format(format!(
                "label matrix has {} entries, expected {}",
                labels.len(),
                width * height
            )));
        }
        let n_lines = labels.iter().copied().max().unwrap_or(0);
        let mut present = vec![false; n_lines as usize + 1];
        for &l in &labels {
            present[l as usize] = true;
        }
        if let Some(missing) = (1..=n_lines as usize).find(|&k| !present[k]) {
            return Err(Error::Format(format!(
                "line labels must be contiguous: label {missing} is missing below maximum {n_lines}"
            )));
        }
        Ok(LineLabeling {
            width,
            height,
            labels,
            n_lines,
        })
    }

    /// All-background labeling.
    pub fn empty(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![0; width * height])
    }

    /// Line `k + 1` gets the pixels of `lines[k]`; empty lines are dropped
    /// and later lines renumbered. Earlier lines win on overlap.
    pub fn from_lines(width: usize, height: usize, lines: &[Vec<Pixel>]) -> Result<Self> {
        let mut labels = vec![0u32; width * height];
        let mut next = 0u32;
        for line in lines {
            let mut wrote = false;
            for &(r, c) in line {
                let i = r * width + c;
                if labels[i] == 0 {
                    if !wrote {
                        next += 1;
                        wrote = true;
                    }
                    labels[i] = next;
                }
            }
        }
        Self::new(width, height, labels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn n_lines(&self) -> usize {
        self.n_lines as usize
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u32 {
        self.labels[row * self.width + col]
    }

    /// Pixels of each line; index `k` holds line `k + 1`.
    pub fn line_pixels(&self) -> Vec<Vec<Pixel>> {
        let mut out = vec![Vec::new(); self.n_lines as usize];
        for (i, &l) in self.labels.iter().enumerate() {
            if l > 0 {
                out[l as usize - 1].push((i / self.width, i % self.width));
            }
        }
        out
    }
}

/// A closed polygon as `(x, y)` = `(col, row)` integer vertices; the last
/// vertex connects back to the first.
pub type Polygon = Vec<(i64, i64)>;

/// One bounding polygon per text line; index `k` holds line `k + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PolygonSet {
    pub polygons: Vec<Polygon>,
}

impl PolygonSet {
    pub fn new(polygons: Vec<Polygon>) -> Self {
        PolygonSet { polygons }
    }

    pub fn len(&self) -> usize {
        self.polygons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polygons.is_empty()
    }

    /// Interior-or-boundary mask of every polygon, clipped to the image.
    pub fn masks(&self, width: usize, height: usize) -> Vec<Vec<bool>> {
        self.polygons.iter().map(|p| polygon_mask(p, width, height)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labeling_requires_contiguous_labels() {
        assert!(LineLabeling::new(2, 2, vec![0, 1, 2, 2]).is_ok());
        assert!(matches!(
            LineLabeling::new(2, 2, vec![0, 1, 3, 3]),
            Err(Error::Format(_))
        ));
        assert!(LineLabeling::new(2, 2, vec![0, 1, 1]).is_err());
        assert_eq!(LineLabeling::empty(3, 3).unwrap().n_lines(), 0);
    }

    #[test]
    fn from_lines_renumbers_and_keeps_first() {
        let l = LineLabeling::from_lines(4, 1, &[vec![(0, 0)], vec![], vec![(0, 0), (0, 3)]]).unwrap();
        assert_eq!(l.labels(), &[1, 0, 0, 2]);
        assert_eq!(l.line_pixels(), vec![vec![(0, 0)], vec![(0, 3)]]);
    }
}
