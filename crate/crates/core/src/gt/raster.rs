//! Exact rasterization of integer polygons.
//!
//! A pixel `(row, col)` belongs to a polygon when its center `(x = col,
//! y = row)` lies inside it or on its boundary. Everything is computed in
//! integer arithmetic, so the result does not depend on rounding.

use super::Polygon;
use crate::imaging::Pixel;

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn edges(poly: &Polygon) -> impl Iterator<Item = ((i64, i64), (i64, i64))> + '_ {
    (0..poly.len()).map(move |i| (poly[i], poly[(i + 1) % poly.len()]))
}

fn on_segment(p: (i64, i64), a: (i64, i64), b: (i64, i64)) -> bool {
    let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
    cross == 0 && p.0 >= a.0.min(b.0) && p.0 <= a.0.max(b.0) && p.1 >= a.1.min(b.1) && p.1 <= a.1.max(b.1)
}

/// Point-in-polygon test, boundary inclusive (even-odd rule).
pub fn point_in_polygon(poly: &Polygon, x: i64, y: i64) -> bool {
    if poly.is_empty() {
        return false;
    }
    let mut inside = false;
    for (a, b) in edges(poly) {
        if on_segment((x, y), a, b) {
            return true;
        }
        if (a.1 > y) != (b.1 > y) {
            // x < intersection x, cross-multiplied by the signed height
            let lhs = (x - a.0) * (b.1 - a.1);
            let rhs = (y - a.1) * (b.0 - a.0);
            let left_of = if b.1 > a.1 { lhs < rhs } else { lhs > rhs };
            if left_of {
                inside = !inside;
            }
        }
    }
    inside
}

/// Twice the signed area (shoelace).
pub fn polygon_area2(poly: &Polygon) -> i64 {
    edges(poly).map(|(a, b)| a.0 * b.1 - b.0 * a.1).sum()
}

/// Row-major membership mask clipped to `width x height`, built by
/// scanlines plus the lattice points of every edge.
pub fn polygon_mask(poly: &Polygon, width: usize, height: usize) -> Vec<bool> {
    let mut mask = vec![false; width * height];
    if poly.is_empty() {
        return mask;
    }
    let (w, h) = (width as i64, height as i64);
    let mut put = |x: i64, y: i64| {
        if x >= 0 && y >= 0 && x < w && y < h {
            mask[(y * w + x) as usize] = true;
        }
    };
    for (a, b) in edges(poly) {
        let (dx, dy) = (b.0 - a.0, b.1 - a.1);
        let g = gcd(dx, dy);
        if g == 0 {
            put(a.0, a.1);
            continue;
        }
        for t in 0..=g {
            put(a.0 + dx / g * t, a.1 + dy / g * t);
        }
    }
    let ymin = poly.iter().map(|p| p.1).min().unwrap().max(0);
    let ymax = poly.iter().map(|p| p.1).max().unwrap().min(h - 1);
    let mut ks = Vec::new();
    for y in ymin..=ymax {
        ks.clear();
        for (a, b) in edges(poly) {
            if (a.1 > y) != (b.1 > y) {
                // crossing x = num / den; keep the largest integer below it
                let (mut num, mut den) = (a.0 * (b.1 - a.1) + (y - a.1) * (b.0 - a.0), b.1 - a.1);
                if den < 0 {
                    num = -num;
                    den = -den;
                }
                ks.push((num - 1).div_euclid(den));
            }
        }
        ks.sort_unstable();
        for pair in ks.chunks_exact(2) {
            for x in (pair[0] + 1).max(0)..=pair[1].min(w - 1) {
                put(x, y);
            }
        }
    }
    mask
}

/// Member pixels of the polygon within the image, in scan order.
pub fn polygon_pixels(poly: &Polygon, width: usize, height: usize) -> Vec<Pixel> {
    polygon_mask(poly, width, height)
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| (i / width, i % width))
        .collect()
}
