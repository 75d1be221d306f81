//! Synthetic pages of oriented and curved dash-chain text lines with exact
//! ground truth.
//!
//! Every line is a chain of glyph-like dashes laid along a straight, arc or
//! sine path, grouped into words. Dash heights vary by up to 40% of the
//! stroke height, extending either above or below the baseline band. Lines
//! are placed one after another at random positions, rejecting positions
//! whose ink comes closer than the clearance to ink already on the page.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gt::LineLabeling;
use crate::imaging::BinaryImage;

/// Placement attempts per line before giving up.
pub const MAX_ATTEMPTS: usize = 1000;
/// Default ink clearance between lines, in units of the tallest stroke.
pub const CLEARANCE_FACTOR: f64 = 3.0;
/// Largest relative deviation of a dash height from the stroke height.
pub const HEIGHT_JITTER: f64 = 0.4;
const SAMPLE_STEP: f64 = 0.25;
const MARGIN: i64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineKind {
    Straight,
    Arc,
    Sine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineSpec {
    pub kind: LineKind,
    /// Degrees counter-clockwise from the x axis, in `[0, 180)`.
    pub orientation: f64,
    /// Inverse radius for arcs, amplitude in pixels for sines (one full
    /// period over the line length); ignored for straight lines.
    #[serde(default)]
    pub curvature: f64,
    pub length: f64,
    pub stroke_height: f64,
    /// Gaps between consecutive words; `n` gaps make `n + 1` words of equal
    /// length.
    #[serde(default)]
    pub word_gaps: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PageSpec {
    pub width: usize,
    pub height: usize,
    pub lines: Vec<LineSpec>,
    pub seed: u64,
    /// Minimum ink distance between lines; defaults to
    /// [`CLEARANCE_FACTOR`] times the tallest stroke height.
    #[serde(default)]
    pub clearance: Option<f64>,
}

impl LineSpec {
    fn validate(&self, i: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::Domain(format!("line {}: {msg}", i + 1)));
        if !(0.0..180.0).contains(&self.orientation) {
            return bad(format!("orientation {} outside [0, 180)", self.orientation));
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return bad(format!("length {} must be positive", self.length));
        }
        if !(self.stroke_height > 0.0 && self.stroke_height.is_finite()) {
            return bad(format!("stroke height {} must be positive", self.stroke_height));
        }
        if !self.curvature.is_finite() {
            return bad("curvature must be finite".into());
        }
        if self.kind == LineKind::Arc && self.curvature.abs() * self.length >= std::f64::consts::TAU {
            return bad("arc would close on itself".into());
        }
        if self.word_gaps.iter().any(|g| !(*g >= 0.0)) {
            return bad("word gaps must be non-negative".into());
        }
        if self.word_gaps.iter().sum::<f64>() >= self.length {
            return bad("word gaps leave no room for words".into());
        }
        Ok(())
    }

    /// Point and unit tangent of the path at parameter `s`, in the line's
    /// own frame (x along the line, y across).
    fn path(&self, s: f64) -> ((f64, f64), (f64, f64)) {
        match self.kind {
            LineKind::Straight => ((s, 0.0), (1.0, 0.0)),
            LineKind::Arc if self.curvature == 0.0 => ((s, 0.0), (1.0, 0.0)),
            LineKind::Arc => {
                let r = 1.0 / self.curvature;
                let a = s * self.curvature;
                ((r * a.sin(), r * (1.0 - a.cos())), (a.cos(), a.sin()))
            }
            LineKind::Sine => {
                let k = std::f64::consts::TAU / self.length;
                let y = self.curvature * (k * s).sin();
                let dy = self.curvature * k * (k * s).cos();
                let n = (1.0 + dy * dy).sqrt();
                ((s, y), (1.0 / n, dy / n))
            }
        }
    }
}

impl PageSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::Domain(format!(
                "page size {}x{} must be positive",
                self.width, self.height
            )));
        }
        if let Some(c) = self.clearance {
            if !(c >= 0.0) {
                return Err(Error::Domain(format!("clearance {c} must be non-negative")));
            }
        }
        for (i, l) in self.lines.iter().enumerate() {
            l.validate(i)?;
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: PageSpec = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line() as u32,
            column: e.column() as u32,
            message: e.to_string(),
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    fn clearance_px(&self) -> f64 {
        self.clearance.unwrap_or_else(|| {
            let hmax = self.lines.iter().map(|l| l.stroke_height).fold(0.0, f64::max);
            CLEARANCE_FACTOR * hmax * (1.0 + HEIGHT_JITTER)
        })
    }

    /// A 420 x 420 page of `n_lines` lines of stroke height 8 alternating
    /// straight and sine paths, with random orientations, lengths 130 to 170
    /// and two word gaps each.
    pub fn mixed(seed: u64, n_lines: usize) -> PageSpec {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5eed);
        let lines = (0..n_lines)
            .map(|i| {
                let sine = i % 2 == 1;
                LineSpec {
                    kind: if sine { LineKind::Sine } else { LineKind::Straight },
                    orientation: rng.random_range(0.0..180.0),
                    curvature: if sine { rng.random_range(4.0..8.0) } else { 0.0 },
                    length: rng.random_range(130.0..170.0),
                    stroke_height: 8.0,
                    word_gaps: vec![rng.random_range(8.0..12.0), rng.random_range(8.0..12.0)],
                }
            })
            .collect();
        PageSpec {
            width: 420,
            height: 420,
            lines,
            seed,
            clearance: None,
        }
    }
}

/// Ink offsets of one line around the origin, deduplicated.
fn render_line(line: &LineSpec, rng: &mut ChaCha8Rng) -> Vec<(i64, i64)> {
    let h = line.stroke_height;
    let n_words = line.word_gaps.len() + 1;
    let word_len = (line.length - line.word_gaps.iter().sum::<f64>()) / n_words as f64;
    let (st, ct) = line.orientation.to_radians().sin_cos();
    let mut pts: Vec<(i64, i64)> = Vec::new();
    let mut start = 0.0;
    for w in 0..n_words {
        let end = start + word_len;
        let mut s = start;
        loop {
            let gw = h * rng.random_range(0.35..0.6);
            let gap = rng.random_range(1.5..3.0);
            let jitter = rng.random_range(-HEIGHT_JITTER..HEIGHT_JITTER);
            let up = rng.random_bool(0.5);
            if s + gw > end {
                break;
            }
            let height = h * (1.0 + jitter);
            let shift = (height - h) / 2.0 * if up { -1.0 } else { 1.0 };
            let center = s + gw / 2.0;
            let ((px, py), (tx, ty)) = line.path(center);
            let (nx, ny) = (-ty, tx);
            let mut u = -gw / 2.0;
            while u <= gw / 2.0 + 1e-9 {
                let mut v = -height / 2.0;
                while v <= height / 2.0 + 1e-9 {
                    let x = px + u * tx + (v + shift) * nx;
                    let y = py + u * ty + (v + shift) * ny;
                    let col = x * ct + y * st;
                    let row = -x * st + y * ct;
                    pts.push((col.round() as i64, row.round() as i64));
                    v += SAMPLE_STEP;
                }
                u += SAMPLE_STEP;
            }
            s += gw + gap;
        }
        start = end + line.word_gaps.get(w).copied().unwrap_or(0.0);
    }
    pts.sort_unstable();
    pts.dedup();
    if let (Some(x0), Some(x1), Some(y0), Some(y1)) = (
        pts.iter().map(|p| p.0).min(),
        pts.iter().map(|p| p.0).max(),
        pts.iter().map(|p| p.1).min(),
        pts.iter().map(|p| p.1).max(),
    ) {
        let (cx, cy) = ((x0 + x1).div_euclid(2), (y0 + y1).div_euclid(2));
        for p in &mut pts {
            p.0 -= cx;
            p.1 -= cy;
        }
    }
    pts
}

/// Renders the page and its per-pixel ground truth; line `k` of the spec
/// is label `k + 1`.
pub fn generate_page(spec: &PageSpec) -> Result<(BinaryImage, LineLabeling)> {
    spec.validate()?;
    let (w, h) = (spec.width as i64, spec.height as i64);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let clearance = spec.clearance_px();
    let reach = clearance.ceil() as i64;
    let mut labels = vec![0u32; spec.width * spec.height];
    let mut blocked = vec![false; spec.width * spec.height];

    for (i, line) in spec.lines.iter().enumerate() {
        let pts = render_line(line, &mut rng);
        let x0 = pts.iter().map(|p| p.0).min().unwrap_or(0);
        let x1 = pts.iter().map(|p| p.0).max().unwrap_or(0);
        let y0 = pts.iter().map(|p| p.1).min().unwrap_or(0);
        let y1 = pts.iter().map(|p| p.1).max().unwrap_or(0);
        let (cx_lo, cx_hi) = (MARGIN - x0, w - 1 - MARGIN - x1);
        let (cy_lo, cy_hi) = (MARGIN - y0, h - 1 - MARGIN - y1);
        if cx_lo > cx_hi || cy_lo > cy_hi {
            return Err(Error::Placement(format!(
                "line {} does not fit on a {}x{} page",
                i + 1,
                w,
                h
            )));
        }
        let mut placed = None;
        for _ in 0..MAX_ATTEMPTS {
            let cx = rng.random_range(cx_lo..=cx_hi);
            let cy = rng.random_range(cy_lo..=cy_hi);
            if pts.iter().all(|&(x, y)| !blocked[((cy + y) * w + cx + x) as usize]) {
                placed = Some((cx, cy));
                break;
            }
        }
        let (cx, cy) = placed.ok_or_else(|| {
            Error::Placement(format!(
                "line {} could not be placed without overlap after {MAX_ATTEMPTS} attempts",
                i + 1
            ))
        })?;
        for &(x, y) in &pts {
            labels[((cy + y) * w + cx + x) as usize] = i as u32 + 1;
        }
        for &(x, y) in &pts {
            let (px, py) = (cx + x, cy + y);
            for dy in -reach..=reach {
                for dx in -reach..=reach {
                    let (qx, qy) = (px + dx, py + dy);
                    if qx >= 0 && qy >= 0 && qx < w && qy < h && ((dx * dx + dy * dy) as f64) < clearance * clearance {
                        blocked[(qy * w + qx) as usize] = true;
                    }
                }
            }
        }
    }
    let img = BinaryImage::from_bits(spec.width, spec.height, labels.iter().map(|&l| l > 0).collect())?;
    let labeling = LineLabeling::new(spec.width, spec.height, labels)?;
    Ok((img, labeling))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn straight(orientation: f64) -> LineSpec {
        LineSpec {
            kind: LineKind::Straight,
            orientation,
            curvature: 0.0,
            length: 80.0,
            stroke_height: 8.0,
            word_gaps: vec![10.0],
        }
    }

    fn page(lines: Vec<LineSpec>) -> PageSpec {
        PageSpec {
            width: 300,
            height: 300,
            lines,
            seed: 7,
            clearance: None,
        }
    }

    #[test]
    fn five_lines_at_thirty_degrees() {
        let spec = page(vec![straight(30.0); 5]);
        let (img, lab) = generate_page(&spec).unwrap();
        assert_eq!(lab.n_lines(), 5);
        assert_eq!(img.count_foreground(), lab.labels().iter().filter(|&&l| l > 0).count());
    }

    #[test]
    fn deterministic() {
        let spec = PageSpec::mixed(3, 4);
        assert_eq!(generate_page(&spec).unwrap(), generate_page(&spec).unwrap());
    }

    #[test]
    fn flat_sine_equals_straight() {
        let mut sine = straight(40.0);
        sine.kind = LineKind::Sine;
        let a = generate_page(&page(vec![straight(40.0)])).unwrap();
        let b = generate_page(&page(vec![sine])).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn impossible_placement_fails() {
        let mut spec = page(vec![straight(0.0); 40]);
        spec.width = 100;
        spec.height = 100;
        assert!(matches!(generate_page(&spec), Err(Error::Placement(_))));
    }

    #[test]
    fn json_spec() {
        let text = r#"{"width": 50, "height": 40, "seed": 1,
            "lines": [{"kind": "arc", "orientation": 10, "curvature": 0.01, "length": 30, "stroke_height": 5}]}"#;
        let spec = PageSpec::from_json(text).unwrap();
        assert_eq!(spec.lines[0].kind, LineKind::Arc);
        assert!(PageSpec::from_json(r#"{"width": 5}"#).is_err());
        let bad = text.replace("\"orientation\": 10", "\"orientation\": 180");
        assert!(matches!(PageSpec::from_json(&bad), Err(Error::Domain(_))));
    }
}
