//! Second-derivative anisotropic Gaussian filter bank.
//!
//! Each kernel is the negated second derivative, taken across the line
//! direction, of a 2-D Gaussian elongated along that direction. Ink is mapped
//! to 1 before filtering, so a stroke of matching width produces a positive
//! ridge along its center line. Responses are scale-normalized (multiplied by
//! the cross-line variance) so that the bank's per-pixel maximum selects the
//! scale whose Gaussian std matches the half-width of the stroke.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{direction, BinaryImage, HeightStats};

/// Filter bank and binarization settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BankConfig {
    pub orientation_step_deg: f64,
    pub n_scales: usize,
    /// Along-line std divided by cross-line std.
    pub aspect: f64,
    pub niblack_k: f64,
    /// Odd window side; `None` derives it from the largest bank scale.
    pub niblack_window: Option<usize>,
    /// Fraction of the global maximum response a blob pixel must exceed.
    pub noise_floor: f64,
    /// Restrict the bank to the single orientation 0 degrees.
    pub baseline_mode: bool,
}

impl Default for BankConfig {
    fn default() -> Self {
        BankConfig {
            orientation_step_deg: 5.0,
            n_scales: 4,
            aspect: 3.0,
            niblack_k: 0.2,
            niblack_window: None,
            noise_floor: 0.05,
            baseline_mode: false,
        }
    }
}

impl BankConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.orientation_step_deg > 0.0 && self.orientation_step_deg <= 180.0) {
            return Err(Error::Config(format!(
                "orientation_step_deg must be in (0, 180], got {}",
                self.orientation_step_deg
            )));
        }
        if self.n_scales == 0 {
            return Err(Error::Config("n_scales must be at least 1".into()));
        }
        if !(self.aspect >= 1.0) {
            return Err(Error::Config(format!("aspect must be >= 1, got {}", self.aspect)));
        }
        if let Some(w) = self.niblack_window {
            if w < 3 || w % 2 == 0 {
                return Err(Error::Config(format!("niblack_window must be odd and >= 3, got {w}")));
            }
        }
        if !(0.0..1.0).contains(&self.noise_floor) {
            return Err(Error::Config(format!(
                "noise_floor must be in [0, 1), got {}",
                self.noise_floor
            )));
        }
        Ok(())
    }

    /// Niblack window for a bank whose largest scale is `max_scale`: the
    /// configured value, or the smallest odd integer >= 4 * max_scale.
    pub fn window_for(&self, max_scale: f64) -> usize {
        self.niblack_window.unwrap_or_else(|| {
            let w = (4.0 * max_scale).ceil().max(3.0) as usize;
            if w % 2 == 0 {
                w + 1
            } else {
                w
            }
        })
    }
}

/// One sampled kernel. Taps are row-major with `2 * radius_y + 1` rows and
/// `2 * radius_x + 1` columns, centered on the middle tap.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterKernel {
    pub orientation: f64,
    pub scale: f64,
    pub aspect: f64,
    pub radius_x: usize,
    pub radius_y: usize,
    pub taps: Vec<f64>,
}

impl FilterKernel {
    pub fn width(&self) -> usize {
        2 * self.radius_x + 1
    }

    pub fn height(&self) -> usize {
        2 * self.radius_y + 1
    }

    /// Tap at offset `(dy, dx)` from the center.
    pub fn tap(&self, dy: isize, dx: isize) -> f64 {
        let r = (dy + self.radius_y as isize) as usize;
        let c = (dx + self.radius_x as isize) as usize;
        self.taps[r * self.width() + c]
    }

    pub fn l1_norm(&self) -> f64 {
        self.taps.iter().map(|t| t.abs()).sum()
    }

    /// Response at one pixel by direct summation with zero padding.
    pub fn response_at(&self, img: &BinaryImage, row: usize, col: usize) -> f64 {
        let (ry, rx) = (self.radius_y as isize, self.radius_x as isize);
        let mut acc = 0.0;
        for dy in -ry..=ry {
            for dx in -rx..=rx {
                if img.get_signed(row as isize + dy, col as isize + dx) {
                    acc += self.tap(dy, dx);
                }
            }
        }
        acc
    }
}

/// Sample the scale-normalized ridge kernel.
///
/// `scale` is the cross-line Gaussian std, `aspect * scale` the along-line
/// std. Support is the 3-std ellipse; taps are then corrected to sum to zero
/// by subtracting a Gaussian-weighted share of the truncation residual.
pub fn build_kernel(scale: f64, orientation: f64, aspect: f64) -> Result<FilterKernel> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::Domain(format!("kernel scale must be positive, got {scale}")));
    }
    if !(aspect >= 1.0) {
        return Err(Error::Domain(format!("kernel aspect must be >= 1, got {aspect}")));
    }
    // fmod is exact, so theta and theta + 180 produce identical bits below.
    let orientation = orientation.rem_euclid(180.0);
    let (ux, uy) = direction(orientation);
    // Cross-line unit normal.
    let (nx, ny) = (-uy, ux);
    let sa = aspect * scale;
    let sb = scale;
    let rx = (3.0 * (sa * sa * ux * ux + sb * sb * nx * nx).sqrt()).ceil() as usize;
    let ry = (3.0 * (sa * sa * uy * uy + sb * sb * ny * ny).sqrt()).ceil() as usize;
    let (w, h) = (2 * rx + 1, 2 * ry + 1);
    let norm = 1.0 / (2.0 * std::f64::consts::PI * sa * sb);
    let mut envelope = vec![0.0; w * h];
    let mut taps = vec![0.0; w * h];
    for r in 0..h {
        let dy = r as f64 - ry as f64;
        for c in 0..w {
            let dx = c as f64 - rx as f64;
            // Along- and across-line coordinates. Squared below, so the
            // sign flip of u and n under +180 degrees does not matter.
            let a = dx * ux + dy * uy;
            let b = dx * nx + dy * ny;
            let m = (a * a) / (sa * sa) + (b * b) / (sb * sb);
            if m > 9.0 {
                continue;
            }
            let g = norm * (-0.5 * m).exp();
            envelope[r * w + c] = g;
            // -d2G/db2 scaled by sb^2.
            taps[r * w + c] = g * (1.0 - (b * b) / (sb * sb));
        }
    }
    let residual: f64 = taps.iter().sum();
    let env_sum: f64 = envelope.iter().sum();
    for (t, e) in taps.iter_mut().zip(&envelope) {
        *t -= residual * e / env_sum;
    }
    Ok(FilterKernel {
        orientation,
        scale,
        aspect,
        radius_x: rx,
        radius_y: ry,
        taps,
    })
}

/// All orientation x scale kernels. Kernel `o * scales.len() + s` has
/// orientation `orientations[o]` and scale `scales[s]`.
#[derive(Debug, Clone)]
pub struct FilterBank {
    pub kernels: Vec<FilterKernel>,
    pub orientations: Vec<f64>,
    pub scales: Vec<f64>,
    pub orientation_step: f64,
    pub aspect: f64,
}

impl FilterBank {
    /// Bank over explicit orientations and scales.
    pub fn new(orientations: Vec<f64>, scales: Vec<f64>, orientation_step: f64, aspect: f64) -> Result<Self> {
        if orientations.is_empty() || scales.is_empty() {
            return Err(Error::Domain(
                "filter bank needs at least one orientation and scale".into(),
            ));
        }
        let kernels = orientations
            .iter()
            .flat_map(|&o| scales.iter().map(move |&s| (o, s)))
            .map(|(o, s)| build_kernel(s, o, aspect))
            .collect::<Result<Vec<_>>>()?;
        Ok(FilterBank {
            kernels,
            orientations,
            scales,
            orientation_step,
            aspect,
        })
    }

    pub fn len(&self) -> usize {
        self.kernels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernels.is_empty()
    }

    pub fn max_scale(&self) -> f64 {
        self.scales.iter().copied().fold(f64::MIN, f64::max)
    }

    pub fn orientation_of(&self, kernel_index: usize) -> f64 {
        self.orientations[kernel_index / self.scales.len()]
    }

    pub fn scale_of(&self, kernel_index: usize) -> f64 {
        self.scales[kernel_index % self.scales.len()]
    }
}

/// Orientations `0, step, 2*step, ... < 180`.
pub fn bank_orientations(step: f64) -> Vec<f64> {
    let n = ((180.0 / step) - 1e-9).ceil().max(1.0) as usize;
    (0..n).map(|i| i as f64 * step).filter(|&o| o < 180.0).collect()
}

/// Scales spanning `[mu/2, (mu + sigma/2)/2]` evenly.
pub fn bank_scales(stats: &HeightStats, n_scales: usize) -> Vec<f64> {
    let (lo, hi) = stats.scale_range();
    if n_scales <= 1 || hi - lo <= 1e-12 * lo.abs().max(1.0) {
        return vec![lo];
    }
    (0..n_scales)
        .map(|i| lo + (hi - lo) * i as f64 / (n_scales - 1) as f64)
        .collect()
}

pub fn build_bank(stats: &HeightStats, config: &BankConfig) -> Result<FilterBank> {
    config.validate()?;
    if !(stats.mu > 0.0) {
        return Err(Error::Domain(format!(
            "mean component height must be positive, got {}",
            stats.mu
        )));
    }
    let orientations = if config.baseline_mode {
        vec![0.0]
    } else {
        bank_orientations(config.orientation_step_deg)
    };
    let scales = bank_scales(stats, config.n_scales);
    FilterBank::new(orientations, scales, config.orientation_step_deg, config.aspect)
}

/// Per-pixel maximum bank response with the maximizing kernel.
#[derive(Debug, Clone)]
pub struct ResponseField {
    pub width: usize,
    pub height: usize,
    /// Maximum response clamped below at 0.
    pub response: Vec<f64>,
    /// Index into the bank of the kernel with the largest raw response
    /// (lowest index on ties).
    pub arg_kernel: Vec<u32>,
    pub orientations: Vec<f64>,
    pub scales: Vec<f64>,
    pub orientation_step: f64,
}

impl ResponseField {
    #[inline]
    pub fn response(&self, row: usize, col: usize) -> f64 {
        self.response[row * self.width + col]
    }

    #[inline]
    pub fn arg_index(&self, row: usize, col: usize) -> usize {
        self.arg_kernel[row * self.width + col] as usize
    }

    #[inline]
    pub fn arg_orientation(&self, row: usize, col: usize) -> f64 {
        self.orientations[self.arg_index(row, col) / self.scales.len()]
    }

    #[inline]
    pub fn arg_scale(&self, row: usize, col: usize) -> f64 {
        self.scales[self.arg_index(row, col) % self.scales.len()]
    }

    pub fn global_max(&self) -> f64 {
        self.response.iter().copied().fold(0.0, f64::max)
    }

    /// Most frequent orientation over the given pixels (lowest on ties).
    pub fn modal_orientation(&self, pixels: impl IntoIterator<Item = (usize, usize)>) -> Option<f64> {
        let mut hist = vec![0usize; self.orientations.len()];
        let mut any = false;
        for (r, c) in pixels {
            hist[self.arg_index(r, c) / self.scales.len()] += 1;
            any = true;
        }
        if !any {
            return None;
        }
        let best = hist
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .map(|(i, _)| i)?;
        Some(self.orientations[best])
    }
}

/// Smallest size >= n whose only prime factors are 2, 3 and 5.
fn fft_size(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut k = m;
        for p in [2, 3, 5] {
            while k % p == 0 {
                k /= p;
            }
        }
        if k == 1 {
            return m;
        }
        m += 1;
    }
}

/// Two-dimensional FFT workspace of fixed padded size.
struct Fft2d {
    rows: usize,
    cols: usize,
    fwd_row: Arc<dyn Fft<f64>>,
    fwd_col: Arc<dyn Fft<f64>>,
    inv_row: Arc<dyn Fft<f64>>,
    inv_col: Arc<dyn Fft<f64>>,
}

fn transpose(src: &[Complex<f64>], dst: &mut [Complex<f64>], rows: usize, cols: usize) {
    const B: usize = 32;
    for r0 in (0..rows).step_by(B) {
        for c0 in (0..cols).step_by(B) {
            for r in r0..(r0 + B).min(rows) {
                for c in c0..(c0 + B).min(cols) {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}

impl Fft2d {
    fn new(rows: usize, cols: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2d {
            rows,
            cols,
            fwd_row: planner.plan_fft_forward(cols),
            fwd_col: planner.plan_fft_forward(rows),
            inv_row: planner.plan_fft_inverse(cols),
            inv_col: planner.plan_fft_inverse(rows),
        }
    }

    /// Forward transform; the result is left transposed (`cols x rows`).
    fn forward(&self, data: &mut Vec<Complex<f64>>, scratch: &mut Vec<Complex<f64>>) {
        self.fwd_row.process(data);
        transpose(data, scratch, self.rows, self.cols);
        self.fwd_col.process(scratch);
        std::mem::swap(data, scratch);
    }

    /// Inverse of [`forward`](Self::forward), input transposed, output in
    /// natural layout, unnormalized.
    fn inverse(&self, data: &mut Vec<Complex<f64>>, scratch: &mut Vec<Complex<f64>>) {
        self.inv_col.process(data);
        transpose(data, scratch, self.cols, self.rows);
        self.inv_row.process(scratch);
        std::mem::swap(data, scratch);
    }
}

struct Best {
    value: Vec<f64>,
    index: Vec<u32>,
}

impl Best {
    fn new(n: usize) -> Self {
        Best {
            value: vec![f64::NEG_INFINITY; n],
            index: vec![u32::MAX; n],
        }
    }

    #[inline]
    fn offer(&mut self, i: usize, v: f64, k: u32) {
        let (bv, bk) = (self.value[i], self.index[i]);
        if v > bv || (v == bv && k < bk) {
            self.value[i] = v;
            self.index[i] = k;
        }
    }

    fn merge(mut self, other: Best) -> Best {
        for i in 0..self.value.len() {
            self.offer(i, other.value[i], other.index[i]);
        }
        self
    }
}

/// Maximum response over the bank at every pixel.
///
/// Kernels are evaluated by FFT convolution, two at a time packed into the
/// real and imaginary parts of one complex kernel. The reduction keeps the
/// largest raw response with the lowest kernel index on ties, so the result
/// does not depend on the parallel schedule.
pub fn enhance(img: &BinaryImage, bank: &FilterBank) -> Result<ResponseField> {
    if bank.is_empty() {
        return Err(Error::Domain("enhance needs a non-empty filter bank".into()));
    }
    let (w, h) = (img.width(), img.height());
    let max_rx = bank.kernels.iter().map(|k| k.radius_x).max().unwrap_or(0);
    let max_ry = bank.kernels.iter().map(|k| k.radius_y).max().unwrap_or(0);
    // Padding by one radius suffices: wrapped reads land in the zero margin.
    let rows = fft_size(h + max_ry);
    let cols = fft_size(w + max_rx);
    let fft = Fft2d::new(rows, cols);

    let mut spectrum = vec![Complex::new(0.0, 0.0); rows * cols];
    for r in 0..h {
        for c in 0..w {
            if img.get(r, c) {
                spectrum[r * cols + c].re = 1.0;
            }
        }
    }
    let mut scratch = vec![Complex::new(0.0, 0.0); rows * cols];
    fft.forward(&mut spectrum, &mut scratch);
    let scale = 1.0 / (rows * cols) as f64;

    let pairs: Vec<(usize, Option<usize>)> = (0..bank.len())
        .step_by(2)
        .map(|i| (i, (i + 1 < bank.len()).then_some(i + 1)))
        .collect();

    let best = pairs
        .par_iter()
        .fold(
            || Best::new(w * h),
            |mut best, &(ka, kb)| {
                let mut buf = vec![Complex::new(0.0, 0.0); rows * cols];
                let mut tmp = vec![Complex::new(0.0, 0.0); rows * cols];
                place_kernel(&mut buf, rows, cols, &bank.kernels[ka], false);
                if let Some(kb) = kb {
                    place_kernel(&mut buf, rows, cols, &bank.kernels[kb], true);
                }
                fft.forward(&mut buf, &mut tmp);
                for (b, s) in buf.iter_mut().zip(&spectrum) {
                    *b *= s;
                }
                fft.inverse(&mut buf, &mut tmp);
                for r in 0..h {
                    for c in 0..w {
                        let v = buf[r * cols + c] * scale;
                        best.offer(r * w + c, v.re, ka as u32);
                        if let Some(kb) = kb {
                            best.offer(r * w + c, v.im, kb as u32);
                        }
                    }
                }
                best
            },
        )
        .reduce(|| Best::new(w * h), Best::merge);

    Ok(ResponseField {
        width: w,
        height: h,
        response: best.value.iter().map(|&v| v.max(0.0)).collect(),
        arg_kernel: best.index,
        orientations: bank.orientations.clone(),
        scales: bank.scales.clone(),
        orientation_step: bank.orientation_step,
    })
}

/// Write kernel taps into a padded buffer with wrap-around centering.
fn place_kernel(buf: &mut [Complex<f64>], rows: usize, cols: usize, k: &FilterKernel, imag: bool) {
    let (ry, rx) = (k.radius_y as isize, k.radius_x as isize);
    for dy in -ry..=ry {
        let r = dy.rem_euclid(rows as isize) as usize;
        for dx in -rx..=rx {
            let c = dx.rem_euclid(cols as isize) as usize;
            let t = k.tap(dy, dx);
            if imag {
                buf[r * cols + c].im = t;
            } else {
                buf[r * cols + c].re = t;
            }
        }
    }
}
