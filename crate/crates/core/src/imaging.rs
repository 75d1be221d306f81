//! Raster and connected-component primitives.
//!
//! Pixel coordinates are `(row, col)` throughout. Orientations are measured
//! in degrees counter-clockwise from the +x (column) axis as seen on screen,
//! so the unit direction of an angle `theta` in `(col, row)` terms is
//! `(cos theta, -sin theta)`; see [`direction`].

use std::path::Path;

use crate::error::{Error, Result};

/// A pixel position `(row, col)`.
pub type Pixel = (usize, usize);

/// Unit vector `(dx, dy)` in image coordinates (x = column, y = row, y down)
/// pointing along `theta_deg`.
pub fn direction(theta_deg: f64) -> (f64, f64) {
    let t = theta_deg.to_radians();
    (t.cos(), -t.sin())
}

/// Which gray level counts as ink when loading a raster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Polarity {
    #[default]
    DarkIsForeground,
    LightIsForeground,
}

/// A binarized page; `true` marks foreground (ink).
///
/// The same representation doubles as the blob mask produced by the
/// enhancement stage, see [`BlobMask`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

/// Binary mask of blob-line pixels, same dimensions as the page.
pub type BlobMask = BinaryImage;

impl BinaryImage {
    /// All-background image.
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Format(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        Ok(BinaryImage {
            width,
            height,
            bits: vec![false; width * height],
        })
    }

    /// Build from a row-major bit vector.
    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Format(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if bits.len() != width * height {
            return Err(Error::Format(format!(
                "expected {} pixels, got {}",
                width * height,
                bits.len()
            )));
        }
        Ok(BinaryImage { width, height, bits })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        let mut img = Self::new(width, height)?;
        for r in 0..height {
            for c in 0..width {
                img.bits[r * width + c] = f(r, c);
            }
        }
        Ok(img)
    }

    /// Image with exactly the given pixels set.
    pub fn from_pixels(width: usize, height: usize, pixels: &[Pixel]) -> Result<Self> {
        let mut img = Self::new(width, height)?;
        for &(r, c) in pixels {
            img.set(r, c, true);
        }
        Ok(img)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.width + col]
    }

    /// Like [`get`](Self::get) but treats out-of-range coordinates as background.
    #[inline]
    pub fn get_signed(&self, row: isize, col: isize) -> bool {
        row >= 0
            && col >= 0
            && (row as usize) < self.height
            && (col as usize) < self.width
            && self.bits[row as usize * self.width + col as usize]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.bits[row * self.width + col] = value;
    }

    pub fn count_foreground(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn foreground_pixels(&self) -> Vec<Pixel> {
        let w = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| (i / w, i % w))
            .collect()
    }

    /// Encode as an 8-bit grayscale PNG with black ink on white.
    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let buf: Vec<u8> = self.bits.iter().map(|&b| if b { 0u8 } else { 255u8 }).collect();
        let img = image::GrayImage::from_raw(self.width as u32, self.height as u32, buf)
            .expect("buffer length matches dimensions");
        img.save_with_format(path, image::ImageFormat::Png)
            .map_err(|e| Error::image(path, e))
    }

    /// Threshold an 8-bit gray buffer at mid-range.
    pub fn from_gray(gray: &image::GrayImage, polarity: Polarity) -> Result<Self> {
        let (w, h) = gray.dimensions();
        let bits = gray
            .as_raw()
            .iter()
            .map(|&v| match polarity {
                Polarity::DarkIsForeground => v < 128,
                Polarity::LightIsForeground => v >= 128,
            })
            .collect();
        Self::from_bits(w as usize, h as usize, bits)
    }
}

/// Load a PNG or PGM raster and threshold it at mid-range.
pub fn load_binary_image(path: impl AsRef<Path>, polarity: Polarity) -> Result<BinaryImage> {
    let path = path.as_ref();
    let reader = image::ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    let decoded = reader.decode().map_err(|e| Error::image(path, e))?;
    if decoded.width() == 0 || decoded.height() == 0 {
        return Err(Error::Format(format!("{}: zero-sized image", path.display())));
    }
    BinaryImage::from_gray(&decoded.to_luma8(), polarity)
}

/// Tight bounding box, inclusive on all sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BBox {
    pub top: usize,
    pub left: usize,
    pub bottom: usize,
    pub right: usize,
}

impl BBox {
    pub fn of(pixels: &[Pixel]) -> Option<BBox> {
        let (&(r0, c0), rest) = pixels.split_first()?;
        let mut b = BBox {
            top: r0,
            left: c0,
            bottom: r0,
            right: c0,
        };
        for &(r, c) in rest {
            b.top = b.top.min(r);
            b.bottom = b.bottom.max(r);
            b.left = b.left.min(c);
            b.right = b.right.max(c);
        }
        Some(b)
    }

    pub fn height(&self) -> usize {
        self.bottom - self.top + 1
    }

    pub fn width(&self) -> usize {
        self.right - self.left + 1
    }
}

/// An 8-connected group of foreground pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectedComponent {
    /// 1-based, in raster scan order of each component's first pixel.
    pub id: usize,
    pub pixels: Vec<Pixel>,
    pub bbox: BBox,
    /// `(row, col)` mean of the pixel coordinates.
    pub centroid: (f64, f64),
}

impl ConnectedComponent {
    pub fn from_pixels(id: usize, pixels: Vec<Pixel>) -> Self {
        let bbox = BBox::of(&pixels).expect("component has at least one pixel");
        let centroid = centroid(&pixels);
        ConnectedComponent {
            id,
            pixels,
            bbox,
            centroid,
        }
    }

    /// Bounding-box height in pixels.
    pub fn height(&self) -> usize {
        self.bbox.height()
    }
}

pub(crate) fn centroid(pixels: &[Pixel]) -> (f64, f64) {
    let n = pixels.len() as f64;
    let (sr, sc) = pixels
        .iter()
        .fold((0.0, 0.0), |(a, b), &(r, c)| (a + r as f64, b + c as f64));
    (sr / n, sc / n)
}

pub(crate) const NEIGHBORS_8: [(isize, isize); 8] =
    [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)];

/// 8-connected components of the `true` cells of a row-major grid, each in
/// discovery order, components ordered by their first pixel in scan order.
pub(crate) fn label_regions(width: usize, height: usize, bits: &[bool]) -> Vec<Vec<Pixel>> {
    let mut seen = vec![false; bits.len()];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for start in 0..bits.len() {
        if !bits[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut region = Vec::new();
        while let Some(i) = stack.pop() {
            let (r, c) = (i / width, i % width);
            region.push((r, c));
            for (dr, dc) in NEIGHBORS_8 {
                let (nr, nc) = (r as isize + dr, c as isize + dc);
                if nr < 0 || nc < 0 || nr as usize >= height || nc as usize >= width {
                    continue;
                }
                let j = nr as usize * width + nc as usize;
                if bits[j] && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        region.sort_unstable();
        out.push(region);
    }
    out
}

/// Foreground connected components under 8-connectivity.
pub fn connected_components(img: &BinaryImage) -> Vec<ConnectedComponent> {
    label_regions(img.width, img.height, &img.bits)
        .into_iter()
        .enumerate()
        .map(|(i, px)| ConnectedComponent::from_pixels(i + 1, px))
        .collect()
}

/// Mean and population standard deviation of component heights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeightStats {
    pub mu: f64,
    pub sigma: f64,
}

impl HeightStats {
    /// Filter-bank scale range `[mu/2, (mu + sigma/2)/2]`.
    pub fn scale_range(&self) -> (f64, f64) {
        (self.mu / 2.0, (self.mu + self.sigma / 2.0) / 2.0)
    }
}

pub fn component_height_stats(components: &[ConnectedComponent]) -> Result<HeightStats> {
    if components.is_empty() {
        return Err(Error::Domain("height statistics need at least one component".into()));
    }
    let n = components.len() as f64;
    let mu = components.iter().map(|c| c.height() as f64).sum::<f64>() / n;
    let var = components.iter().map(|c| (c.height() as f64 - mu).powi(2)).sum::<f64>() / n;
    Ok(HeightStats { mu, sigma: var.sqrt() })
}
