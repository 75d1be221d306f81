//! Bounding polygons from pixel sets.
//!
//! A k-nearest-neighbor concave hull (Moreira and Santos) is grown over the
//! boundary pixels of a line, increasing `k` until the walk closes into a
//! simple polygon that holds every pixel. The convex hull is the fallback,
//! and the pixel bounding box covers degenerate inputs.

use super::raster::{point_in_polygon, polygon_area2};
use super::{LineLabeling, Polygon, PolygonSet};
use crate::imaging::Pixel;

type Pt = (i64, i64);

const K_START: usize = 5;
const K_MAX: usize = 80;

fn cross(o: Pt, a: Pt, b: Pt) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn dist2(a: Pt, b: Pt) -> i64 {
    (a.0 - b.0).pow(2) + (a.1 - b.1).pow(2)
}

fn on_box(p: Pt, a: Pt, b: Pt) -> bool {
    p.0 >= a.0.min(b.0) && p.0 <= a.0.max(b.0) && p.1 >= a.1.min(b.1) && p.1 <= a.1.max(b.1)
}

/// Closed segments `ab` and `cd` share at least one point.
fn segments_touch(a: Pt, b: Pt, c: Pt, d: Pt) -> bool {
    let (d1, d2) = (cross(c, d, a), cross(c, d, b));
    let (d3, d4) = (cross(a, b, c), cross(a, b, d));
    if ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)) {
        return true;
    }
    (d1 == 0 && on_box(a, c, d))
        || (d2 == 0 && on_box(b, c, d))
        || (d3 == 0 && on_box(c, a, b))
        || (d4 == 0 && on_box(d, a, b))
}

/// Clockwise turn from `back` to `to`, in `[0, 2 pi)`.
fn clockwise_angle(back: (f64, f64), to: (f64, f64)) -> f64 {
    let ccw = (back.0 * to.1 - back.1 * to.0).atan2(back.0 * to.0 + back.1 * to.1);
    let cw = -ccw;
    if cw < 0.0 {
        cw + std::f64::consts::TAU
    } else {
        cw
    }
}

/// Andrew's monotone chain; collinear points are dropped.
pub fn convex_hull(points: &[Pt]) -> Polygon {
    let mut p: Vec<Pt> = points.to_vec();
    p.sort_unstable();
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let mut lower: Vec<Pt> = Vec::new();
    for &q in &p {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], q) <= 0 {
            lower.pop();
        }
        lower.push(q);
    }
    let mut upper: Vec<Pt> = Vec::new();
    for &q in p.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], q) <= 0 {
            upper.pop();
        }
        upper.push(q);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn hull_walk(points: &[Pt], k: usize) -> Option<Polygon> {
    let first_idx = (0..points.len()).min_by_key(|&i| (points[i].1, points[i].0))?;
    let first = points[first_idx];
    let mut avail = vec![true; points.len()];
    avail[first_idx] = false;
    let mut hull = vec![first];
    let mut current = first;
    let mut back = (-1.0, 0.0);
    let mut step = 2;
    let mut n_avail = points.len() - 1;
    while (current != first || step == 2) && n_avail > 0 {
        if step == 5 {
            avail[first_idx] = true;
            n_avail += 1;
        }
        let mut near: Vec<(i64, Pt, usize)> = (0..points.len())
            .filter(|&i| avail[i])
            .map(|i| (dist2(current, points[i]), points[i], i))
            .collect();
        let kk = k.min(near.len());
        near.select_nth_unstable(kk - 1);
        near.truncate(kk);
        let mut cands: Vec<(f64, i64, usize)> = near
            .iter()
            .map(|&(d, p, i)| {
                let to = ((p.0 - current.0) as f64, (p.1 - current.1) as f64);
                (clockwise_angle(back, to), d, i)
            })
            .collect();
        cands.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut chosen = None;
        for &(_, _, i) in &cands {
            let c = points[i];
            let last = hull.len() - 1;
            let start = usize::from(c == first);
            let clash = (start..last.saturating_sub(1)).any(|j| segments_touch(current, c, hull[j], hull[j + 1]));
            if !clash {
                chosen = Some(i);
                break;
            }
        }
        let i = chosen?;
        let c = points[i];
        back = ((current.0 - c.0) as f64, (current.1 - c.1) as f64);
        hull.push(c);
        current = c;
        avail[i] = false;
        n_avail -= 1;
        step += 1;
    }
    if current != first {
        return None;
    }
    hull.pop();
    if hull.len() < 3 || polygon_area2(&hull) == 0 {
        return None;
    }
    Some(hull)
}

fn contains_all(poly: &Polygon, pixels: &[Pixel]) -> bool {
    pixels.iter().all(|&(r, c)| point_in_polygon(poly, c as i64, r as i64))
}

/// Concave hull of `points` grown from `k = K_START`, or `None` when no `k`
/// up to the point count produces a simple polygon holding every point.
pub fn concave_hull(points: &[Pt]) -> Option<Polygon> {
    let mut p: Vec<Pt> = points.to_vec();
    p.sort_unstable();
    p.dedup();
    if p.len() < 4 {
        return None;
    }
    let pixels: Vec<Pixel> = p.iter().map(|&(x, y)| (y as usize, x as usize)).collect();
    let limit = K_MAX.min(p.len() - 1);
    let mut k = K_START.min(limit);
    loop {
        if let Some(h) = hull_walk(&p, k) {
            if contains_all(&h, &pixels) {
                return Some(h);
            }
        }
        if k >= limit {
            return None;
        }
        k = (k + k.div_ceil(2)).min(limit);
    }
}

fn bbox_polygon(pixels: &[Pixel]) -> Polygon {
    let top = pixels.iter().map(|p| p.0).min().unwrap() as i64;
    let bottom = pixels.iter().map(|p| p.0).max().unwrap() as i64;
    let left = pixels.iter().map(|p| p.1).min().unwrap() as i64;
    let right = pixels.iter().map(|p| p.1).max().unwrap() as i64;
    vec![(left, top), (right, top), (right, bottom), (left, bottom)]
}

fn is_boundary(set: &std::collections::HashSet<Pixel>, (r, c): Pixel) -> bool {
    r == 0
        || c == 0
        || !set.contains(&(r - 1, c))
        || !set.contains(&(r + 1, c))
        || !set.contains(&(r, c - 1))
        || !set.contains(&(r, c + 1))
}

/// Bounding polygon of one line's pixels. Every pixel lies inside or on
/// the returned polygon; an empty input gives an empty polygon.
pub fn polygon_for_pixels(pixels: &[Pixel]) -> Polygon {
    if pixels.is_empty() {
        return Vec::new();
    }
    if pixels.len() < 3 {
        return bbox_polygon(pixels);
    }
    let set: std::collections::HashSet<Pixel> = pixels.iter().copied().collect();
    let boundary: Vec<Pt> = pixels
        .iter()
        .filter(|&&p| is_boundary(&set, p))
        .map(|&(r, c)| (c as i64, r as i64))
        .collect();
    if let Some(h) = concave_hull(&boundary) {
        if contains_all(&h, pixels) {
            return h;
        }
    }
    let all: Vec<Pt> = pixels.iter().map(|&(r, c)| (c as i64, r as i64)).collect();
    let convex = convex_hull(&all);
    if convex.len() >= 3 {
        return convex;
    }
    bbox_polygon(pixels)
}

/// One polygon per line of `labeling`, in label order.
pub fn polygons_from_labels(labeling: &LineLabeling) -> PolygonSet {
    PolygonSet::new(labeling.line_pixels().iter().map(|p| polygon_for_pixels(p)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn contains(poly: &Polygon, pixels: &[Pixel]) -> bool {
        contains_all(poly, pixels)
    }

    #[test]
    fn solid_square() {
        let px: Vec<Pixel> = (0..10).flat_map(|r| (0..10).map(move |c| (r + 3, c + 2))).collect();
        let poly = polygon_for_pixels(&px);
        assert!(contains(&poly, &px));
        assert_eq!(polygon_area2(&poly).abs(), 2 * 81);
    }

    #[test]
    fn c_shape_is_concave() {
        let mut px = Vec::new();
        for r in 0..30 {
            for c in 0..30 {
                if r < 5 || r >= 25 || c < 5 {
                    px.push((r, c));
                }
            }
        }
        let poly = polygon_for_pixels(&px);
        assert!(contains(&poly, &px));
        let all: Vec<Pt> = px.iter().map(|&(r, c)| (c as i64, r as i64)).collect();
        assert!(polygon_area2(&poly).abs() < polygon_area2(&convex_hull(&all)).abs());
    }

    #[test]
    fn tiny_and_collinear_inputs() {
        assert_eq!(polygon_for_pixels(&[(2, 3)]), vec![(3, 2), (3, 2), (3, 2), (3, 2)]);
        let line: Vec<Pixel> = (0..8).map(|c| (4, c)).collect();
        let poly = polygon_for_pixels(&line);
        assert!(contains(&poly, &line));
    }

    #[test]
    fn dashed_line_is_enclosed() {
        let mut px = Vec::new();
        for d in 0..6 {
            for r in 0..8 {
                for c in 0..4 {
                    px.push((10 + r + d % 2, 5 + d * 7 + c));
                }
            }
        }
        let poly = polygon_for_pixels(&px);
        assert!(contains(&poly, &px));
        assert!(poly.len() >= 3);
    }

    #[test]
    fn segment_touch_cases() {
        assert!(segments_touch((0, 0), (4, 4), (0, 4), (4, 0)));
        assert!(segments_touch((0, 0), (4, 0), (4, 0), (6, 2)));
        assert!(!segments_touch((0, 0), (4, 0), (0, 1), (4, 1)));
        assert!(segments_touch((0, 0), (4, 0), (2, 0), (6, 0)));
    }
}
