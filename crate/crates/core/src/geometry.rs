//! Small geometric helpers shared by several stages.

use crate::imaging::Pixel;

const INF: f64 = 1e20;

/// 1-D squared distance transform of a sampled function (lower envelope of
/// parabolas).
fn dt_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    let inter =
        |q: usize, p: usize| ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
    for q in 1..n {
        let mut s = inter(q, v[k]);
        while s <= z[k] {
            k -= 1;
            s = inter(q, v[k]);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let d = q as f64 - p as f64;
        *o = d * d + f[p];
    }
}

/// Exact Euclidean distance from every cell to the nearest `true` seed.
/// Cells are `f64::INFINITY` when there is no seed at all.
pub fn distance_transform(width: usize, height: usize, seeds: &[bool]) -> Vec<f64> {
    assert_eq!(seeds.len(), width * height);
    if !seeds.iter().any(|&s| s) {
        return vec![f64::INFINITY; seeds.len()];
    }
    let mut grid: Vec<f64> = seeds.iter().map(|&s| if s { 0.0 } else { INF }).collect();
    let n = width.max(height);
    let mut f = vec![0.0; n];
    let mut out = vec![0.0; n];
    let mut v = vec![0usize; n];
    let mut z = vec![0.0; n + 1];
    for c in 0..width {
        for r in 0..height {
            f[r] = grid[r * width + c];
        }
        dt_1d(&f[..height], &mut out[..height], &mut v, &mut z);
        for r in 0..height {
            grid[r * width + c] = out[r];
        }
    }
    for r in 0..height {
        let row = &mut grid[r * width..(r + 1) * width];
        f[..width].copy_from_slice(row);
        dt_1d(&f[..width], &mut out[..width], &mut v, &mut z);
        row.copy_from_slice(&out[..width]);
    }
    grid.iter().map(|&d| d.sqrt()).collect()
}

pub fn euclid(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

pub fn pixel_f64(p: Pixel) -> (f64, f64) {
    (p.0 as f64, p.1 as f64)
}

/// Number of pixels of the set that touch a non-member pixel (or the image
/// border) in the 8-neighborhood.
pub fn perimeter(pixels: &[Pixel], width: usize, height: usize) -> usize {
    let set: std::collections::HashSet<Pixel> = pixels.iter().copied().collect();
    pixels
        .iter()
        .filter(|&&(r, c)| {
            crate::imaging::NEIGHBORS_8.iter().any(|&(dr, dc)| {
                let (nr, nc) = (r as isize + dr, c as isize + dc);
                nr < 0
                    || nc < 0
                    || nr as usize >= height
                    || nc as usize >= width
                    || !set.contains(&(nr as usize, nc as usize))
            })
        })
        .count()
}
