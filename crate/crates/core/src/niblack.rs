//! Niblack local thresholding of the enhanced response.

use crate::filter_bank::ResponseField;
use crate::imaging::BlobMask;

/// Summed-area table with a zero first row and column.
struct Integral {
    cols: usize,
    sum: Vec<f64>,
    sq: Vec<f64>,
}

impl Integral {
    fn new(values: &[f64], width: usize, height: usize) -> Self {
        let cols = width + 1;
        let mut sum = vec![0.0; (height + 1) * cols];
        let mut sq = vec![0.0; (height + 1) * cols];
        for r in 0..height {
            let (mut rs, mut rq) = (0.0, 0.0);
            for c in 0..width {
                let v = values[r * width + c];
                rs += v;
                rq += v * v;
                sum[(r + 1) * cols + c + 1] = sum[r * cols + c + 1] + rs;
                sq[(r + 1) * cols + c + 1] = sq[r * cols + c + 1] + rq;
            }
        }
        Integral { cols, sum, sq }
    }

    /// Sum and sum of squares over rows `r0..r1`, cols `c0..c1`.
    fn window(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> (f64, f64) {
        let at = |t: &[f64], r: usize, c: usize| t[r * self.cols + c];
        let s = at(&self.sum, r1, c1) - at(&self.sum, r0, c1) - at(&self.sum, r1, c0) + at(&self.sum, r0, c0);
        let q = at(&self.sq, r1, c1) - at(&self.sq, r0, c1) - at(&self.sq, r1, c0) + at(&self.sq, r0, c0);
        (s, q)
    }
}

/// Blob pixels: response above `mean + k * std` of the clipped `window`
/// neighborhood and above `noise_floor * global_max`.
///
/// Comparisons carry an absolute tolerance of `1e-9 * global_max` so that
/// summed-area rounding cannot turn a flat window into blob pixels.
pub fn niblack_binarize(field: &ResponseField, window: usize, k: f64, noise_floor: f64) -> BlobMask {
    assert!(window >= 3 && window % 2 == 1, "window must be odd and >= 3");
    let (w, h) = (field.width, field.height);
    let mut mask = BlobMask::new(w, h).expect("field has positive dimensions");
    let gmax = field.global_max();
    if gmax <= 0.0 {
        return mask;
    }
    let tol = 1e-9 * gmax;
    let floor = noise_floor * gmax;
    let integral = Integral::new(&field.response, w, h);
    let half = window / 2;
    for r in 0..h {
        let (r0, r1) = (r.saturating_sub(half), (r + half + 1).min(h));
        for c in 0..w {
            let v = field.response[r * w + c];
            if v <= floor {
                continue;
            }
            let (c0, c1) = (c.saturating_sub(half), (c + half + 1).min(w));
            let n = ((r1 - r0) * (c1 - c0)) as f64;
            let (s, q) = integral.window(r0, r1, c0, c1);
            let mean = s / n;
            let var = (q / n - mean * mean).max(0.0);
            let std = if var.sqrt() <= tol { 0.0 } else { var.sqrt() };
            if v - mean > k * std + tol {
                mask.set(r, c, true);
            }
        }
    }
    mask
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(width: usize, height: usize, response: Vec<f64>) -> ResponseField {
        ResponseField {
            width,
            height,
            arg_kernel: vec![0; response.len()],
            response,
            orientations: vec![0.0],
            scales: vec![1.0],
            orientation_step: 5.0,
        }
    }

    #[test]
    fn constant_field_has_no_blobs() {
        let f = field(9, 7, vec![0.37; 63]);
        assert_eq!(niblack_binarize(&f, 5, 0.2, 0.05).count_foreground(), 0);
    }

    #[test]
    fn zero_k_is_local_mean_threshold() {
        let resp: Vec<f64> = (0..100).map(|i| ((i * 37) % 11) as f64).collect();
        let f = field(10, 10, resp.clone());
        let m = niblack_binarize(&f, 3, 0.0, 0.0);
        for r in 0..10usize {
            for c in 0..10usize {
                let mut s = 0.0;
                let mut n = 0.0;
                for rr in r.saturating_sub(1)..(r + 2).min(10) {
                    for cc in c.saturating_sub(1)..(c + 2).min(10) {
                        s += resp[rr * 10 + cc];
                        n += 1.0;
                    }
                }
                let expect = resp[r * 10 + c] > s / n + 1e-9 * 10.0 && resp[r * 10 + c] > 0.0;
                assert_eq!(m.get(r, c), expect, "({r},{c})");
            }
        }
    }

    #[test]
    fn ridge_crest_is_detected() {
        // Gaussian ridge along row 10.
        let (w, h) = (30, 21);
        let resp: Vec<f64> = (0..w * h)
            .map(|i| {
                let r = (i / w) as f64;
                (-(r - 10.0).powi(2) / 8.0).exp()
            })
            .collect();
        let m = niblack_binarize(&field(w, h, resp), 9, 0.2, 0.05);
        let crest: usize = (0..w).filter(|&c| m.get(10, c)).count();
        assert!(crest * 2 >= w, "{crest}");
        assert!(!m.get(0, 5));
    }
}
