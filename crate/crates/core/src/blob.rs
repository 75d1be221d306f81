//! Blob-line extraction, validity classification and false-ligature removal.
//!
//! A blob line is valid when a piecewise linear fit of its horizontally
//! aligned pixels stays close to the data everywhere. Invalid blob lines are
//! split at the junctions of their skeleton, and pieces whose orientation
//! disagrees with the locally dominant filter orientation are dropped.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter_bank::ResponseField;
use crate::geometry::perimeter;
use crate::imaging::{centroid, label_regions, BlobMask, Pixel, NEIGHBORS_8};
use crate::skeleton;

/// Number of spline segments fitted per blob line.
pub const SPLINE_KNOTS: usize = 20;
/// A blob line is valid when its worst segment score is below this fraction
/// of the largest filter scale.
pub const VALIDITY_FACTOR: f64 = 0.8;
/// Neighborhood radius for the dominant orientation, in units of total blob
/// area over total blob perimeter.
pub const RADIUS_FACTOR: f64 = 18.0;

/// Connected blob of the binarized response, ideally tracing one text line.
#[derive(Debug, Clone, PartialEq)]
pub struct BlobLine {
    pub id: usize,
    /// Sorted, unique.
    pub pixels: Vec<Pixel>,
    pub skeleton: Vec<Pixel>,
    /// The two extreme skeleton pixels (identical for a one-pixel skeleton).
    pub endpoints: Vec<Pixel>,
    /// Orientation of the first principal axis, degrees in [0, 180).
    pub theta_pca: f64,
}

impl BlobLine {
    /// Blob line with a freshly thinned skeleton.
    pub fn new(id: usize, pixels: Vec<Pixel>) -> Self {
        let skeleton = skeleton::thin(&pixels);
        Self::with_skeleton(id, pixels, skeleton)
    }

    /// Blob line with a given skeleton; endpoints are the ends of its
    /// principal path.
    pub fn with_skeleton(id: usize, mut pixels: Vec<Pixel>, skeleton: Vec<Pixel>) -> Self {
        let path = skeleton::principal_path(&skeleton);
        let endpoints = match (path.first(), path.last()) {
            (Some(&a), Some(&b)) => vec![a, b],
            _ => Vec::new(),
        };
        Self::with_endpoints(id, std::mem::take(&mut pixels), skeleton, endpoints)
    }

    pub fn with_endpoints(id: usize, mut pixels: Vec<Pixel>, mut skeleton: Vec<Pixel>, endpoints: Vec<Pixel>) -> Self {
        pixels.sort_unstable();
        pixels.dedup();
        skeleton.sort_unstable();
        skeleton.dedup();
        let theta_pca = principal_orientation(&pixels).unwrap_or(0.0);
        BlobLine {
            id,
            pixels,
            skeleton,
            endpoints,
            theta_pca,
        }
    }

    pub fn area(&self) -> usize {
        self.pixels.len()
    }

    pub fn centroid(&self) -> (f64, f64) {
        centroid(&self.pixels)
    }

    /// Ordered skeleton path between the two endpoints. For merged blob
    /// lines with a disconnected skeleton this is the largest part's path.
    pub fn principal_path(&self) -> Vec<Pixel> {
        skeleton::principal_path(&self.skeleton)
    }

    /// Mean thickness: area over skeleton length.
    pub fn mean_thickness(&self) -> f64 {
        self.pixels.len() as f64 / self.skeleton.len().max(1) as f64
    }
}

/// 8-connected blobs of the mask, each with its skeleton.
pub fn extract_blob_lines(mask: &BlobMask) -> Vec<BlobLine> {
    label_regions(mask.width(), mask.height(), mask.bits())
        .into_iter()
        .enumerate()
        .map(|(i, px)| BlobLine::new(i + 1, px))
        .collect()
}

/// First principal axis orientation of a pixel cloud, degrees in [0, 180).
pub fn principal_orientation(pixels: &[Pixel]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = pixels.iter().map(|&(r, c)| (c as f64, r as f64)).collect();
    principal_orientation_xy(&pts)
}

/// Same as [`principal_orientation`] for `(x, y)` image-coordinate points.
pub fn principal_orientation_xy(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::Domain("principal axis needs at least two points".into()));
    }
    let n = points.len() as f64;
    let (mx, my) = points.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
    let (mx, my) = (mx / n, my / n);
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    if sxx + syy <= 1e-12 * n {
        return Err(Error::Domain("all points coincide".into()));
    }
    // Axis angle in y-down image coordinates; the orientation convention is
    // counter-clockwise on screen, hence the sign flip.
    let phi = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let theta = (-phi.to_degrees()).rem_euclid(180.0);
    Ok(if theta >= 180.0 { 0.0 } else { theta })
}

/// Rotate `(x, y)` image-coordinate points about their centroid so that
/// direction `theta` becomes the +x axis.
pub fn align_points(points: &[(f64, f64)], theta: f64) -> Vec<(f64, f64)> {
    rotate_about_centroid(points, theta)
}

/// Inverse of [`align_points`].
pub fn unalign_points(points: &[(f64, f64)], theta: f64) -> Vec<(f64, f64)> {
    rotate_about_centroid(points, -theta)
}

fn rotate_about_centroid(points: &[(f64, f64)], theta: f64) -> Vec<(f64, f64)> {
    if points.is_empty() {
        return Vec::new();
    }
    let n = points.len() as f64;
    let (cx, cy) = points.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
    let (cx, cy) = (cx / n, cy / n);
    let (s, c) = theta.to_radians().sin_cos();
    points
        .iter()
        .map(|&(x, y)| {
            let (dx, dy) = (x - cx, y - cy);
            (cx + c * dx - s * dy, cy + s * dx + c * dy)
        })
        .collect()
}

/// Principal orientation of the blob and its pixels aligned horizontally,
/// as `(x, y)` image coordinates.
pub fn principal_orientation_and_align(blob: &BlobLine) -> Result<(f64, Vec<(f64, f64)>)> {
    let pts: Vec<(f64, f64)> = blob.pixels.iter().map(|&(r, c)| (c as f64, r as f64)).collect();
    let theta = principal_orientation_xy(&pts)?;
    Ok((theta, align_points(&pts, theta)))
}

/// Per-segment piecewise linear fit scores.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineFit {
    pub knots: usize,
    /// Mean absolute vertical residual of each segment's least-squares line.
    pub segment_scores: Vec<f64>,
    pub max_score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Validity {
    Valid,
    Invalid,
}

fn segment_score(points: &[(f64, f64)]) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    let n = points.len() as f64;
    let (mx, my) = points.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
    let (mx, my) = (mx / n, my / n);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(x, y) in points {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = if sxx > 1e-12 { sxy / sxx } else { 0.0 };
    points
        .iter()
        .map(|&(x, y)| (y - my - slope * (x - mx)).abs())
        .sum::<f64>()
        / n
}

/// Fit one least-squares line per each of [`SPLINE_KNOTS`] equal-width
/// segments of the aligned x-extent and classify the blob.
pub fn fit_and_classify(aligned: &[(f64, f64)], max_scale: f64) -> (SplineFit, Validity) {
    let mut buckets: Vec<Vec<(f64, f64)>> = vec![Vec::new(); SPLINE_KNOTS];
    if !aligned.is_empty() {
        let xmin = aligned.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let xmax = aligned.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        let span = xmax - xmin;
        for &p in aligned {
            let k = if span > 0.0 {
                (((p.0 - xmin) / span * SPLINE_KNOTS as f64) as usize).min(SPLINE_KNOTS - 1)
            } else {
                0
            };
            buckets[k].push(p);
        }
    }
    let segment_scores: Vec<f64> = buckets.iter().map(|b| segment_score(b)).collect();
    let max_score = segment_scores.iter().copied().fold(0.0, f64::max);
    let validity = if max_score < VALIDITY_FACTOR * max_scale {
        Validity::Valid
    } else {
        Validity::Invalid
    };
    (
        SplineFit {
            knots: SPLINE_KNOTS,
            segment_scores,
            max_score,
        },
        validity,
    )
}

/// Classify a blob line; blobs too small for a principal axis are valid.
pub fn classify(blob: &BlobLine, max_scale: f64) -> Validity {
    match principal_orientation_and_align(blob) {
        Ok((_, aligned)) => fit_and_classify(&aligned, max_scale).1,
        Err(_) => Validity::Valid,
    }
}

/// Split a blob at the bifurcation points of its skeleton.
///
/// Each skeleton arc left after cutting out the junctions becomes a child; every parent pixel goes to the arc it reaches first by a
/// breadth-first walk inside the parent, so children partition the parent.
/// Child ids are 1-based in arc order.
pub fn skeletonize_and_decompose(blob: &BlobLine) -> Vec<BlobLine> {
    if skeleton::bifurcation_points(&blob.skeleton).is_empty() {
        return vec![BlobLine::with_skeleton(1, blob.pixels.clone(), blob.skeleton.clone())];
    }
    let arcs = skeleton::branches(&blob.skeleton);
    if arcs.is_empty() {
        return vec![BlobLine::with_skeleton(1, blob.pixels.clone(), blob.skeleton.clone())];
    }

    let top = blob.pixels.iter().map(|p| p.0).min().unwrap();
    let left = blob.pixels.iter().map(|p| p.1).min().unwrap();
    let w = blob.pixels.iter().map(|p| p.1).max().unwrap() - left + 1;
    let h = blob.pixels.iter().map(|p| p.0).max().unwrap() - top + 1;
    let idx = |p: Pixel| (p.0 - top) * w + (p.1 - left);
    let mut inside = vec![false; w * h];
    for &p in &blob.pixels {
        inside[idx(p)] = true;
    }
    let mut owner = vec![usize::MAX; w * h];
    let mut queue = VecDeque::new();
    for (a, arc) in arcs.iter().enumerate() {
        for &p in arc {
            owner[idx(p)] = a;
            queue.push_back(p);
        }
    }
    while let Some(p) = queue.pop_front() {
        let o = owner[idx(p)];
        for (dr, dc) in NEIGHBORS_8 {
            let (r, c) = (p.0 as isize + dr, p.1 as isize + dc);
            if r < top as isize || c < left as isize {
                continue;
            }
            let q = (r as usize, c as usize);
            if q.0 >= top + h || q.1 >= left + w {
                continue;
            }
            let j = idx(q);
            if inside[j] && owner[j] == usize::MAX {
                owner[j] = o;
                queue.push_back(q);
            }
        }
    }
    let mut parts: Vec<Vec<Pixel>> = vec![Vec::new(); arcs.len()];
    for &p in &blob.pixels {
        let o = owner[idx(p)];
        if o != usize::MAX {
            parts[o].push(p);
        }
    }
    arcs.into_iter()
        .zip(parts)
        .enumerate()
        .map(|(i, (arc, px))| BlobLine::with_skeleton(i + 1, px, arc))
        .collect()
}

/// Settings of the false-ligature removal step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LigatureParams {
    pub gamma: f64,
    /// Pieces deviating more than this from the dominant orientation go.
    pub deviation_threshold_deg: f64,
    /// Use the cost formula exactly as printed, `gamma * (1 - |theta_hist -
    /// cos(theta_pca)|)` with angles in radians, instead of the deviation
    /// form.
    pub literal_deviation_cost: bool,
}

impl Default for LigatureParams {
    fn default() -> Self {
        LigatureParams {
            gamma: 50.0,
            deviation_threshold_deg: 30.0,
            literal_deviation_cost: false,
        }
    }
}

impl LigatureParams {
    /// Log-domain cost above which a piece is removed.
    pub fn threshold(&self) -> f64 {
        self.gamma * (1.0 - self.deviation_threshold_deg.to_radians().cos())
    }

    pub fn cost(&self, theta_hist: f64, theta_pca: f64) -> f64 {
        if self.literal_deviation_cost {
            self.gamma * (1.0 - (theta_hist.to_radians() - theta_pca.to_radians().cos()).abs())
        } else {
            ligature_log_cost(theta_hist, theta_pca, self.gamma)
        }
    }
}

/// Label cost of a piece in the log domain: `gamma * (1 - |cos(delta)|)`.
///
/// Zero when the piece follows the dominant orientation, `gamma` when it is
/// perpendicular. The exponentiated cost overflows for `gamma = 50`, so
/// comparisons stay in this domain.
pub fn ligature_log_cost(theta_hist: f64, theta_pca: f64, gamma: f64) -> f64 {
    let delta = (theta_hist - theta_pca).to_radians();
    gamma * (1.0 - delta.cos().abs())
}

/// Page-level context for the dominant-orientation lookup: the neighborhood
/// radius and the mask of all blob pixels, both fixed before removal so
/// that removal is idempotent.
#[derive(Debug, Clone)]
pub struct LigatureContext {
    pub radius: f64,
    pub mask: BlobMask,
}

impl LigatureContext {
    pub fn new(all_blobs: &[BlobLine], width: usize, height: usize) -> Self {
        let mut mask = BlobMask::new(width, height).expect("positive dimensions");
        let mut area = 0usize;
        let mut perim = 0usize;
        for b in all_blobs {
            for &(r, c) in &b.pixels {
                mask.set(r, c, true);
            }
            area += b.area();
            perim += perimeter(&b.pixels, width, height);
        }
        LigatureContext {
            radius: neighborhood_radius(area, perim),
            mask,
        }
    }
}

/// `18 * area / perimeter`, 0 when there is no perimeter.
pub fn neighborhood_radius(total_area: usize, total_perimeter: usize) -> f64 {
    if total_perimeter == 0 {
        0.0
    } else {
        RADIUS_FACTOR * total_area as f64 / total_perimeter as f64
    }
}

/// Peak of the histogram of best-kernel orientations over blob-mask pixels
/// within `ctx.radius` of the blob centroid; the blob's own principal
/// orientation when no mask pixel is in range.
pub fn dominant_local_orientation(blob: &BlobLine, field: &ResponseField, ctx: &LigatureContext) -> f64 {
    if blob.pixels.is_empty() {
        return blob.theta_pca;
    }
    let (cr, cc) = blob.centroid();
    let rad = ctx.radius;
    let r0 = (cr - rad).floor().max(0.0) as usize;
    let r1 = ((cr + rad).ceil().max(0.0) as usize).min(field.height - 1);
    let c0 = (cc - rad).floor().max(0.0) as usize;
    let c1 = ((cc + rad).ceil().max(0.0) as usize).min(field.width - 1);
    let mut pts = Vec::new();
    for r in r0..=r1 {
        for c in c0..=c1 {
            if ctx.mask.get(r, c) && (r as f64 - cr).powi(2) + (c as f64 - cc).powi(2) <= rad * rad {
                pts.push((r, c));
            }
        }
    }
    field.modal_orientation(pts).unwrap_or(blob.theta_pca)
}

/// Split pieces into `(kept, removed)`.
pub fn partition_ligatures(
    pieces: Vec<BlobLine>,
    field: &ResponseField,
    ctx: &LigatureContext,
    params: &LigatureParams,
) -> (Vec<BlobLine>, Vec<BlobLine>) {
    let tau = params.threshold();
    pieces.into_iter().partition(|b| {
        let hist = dominant_local_orientation(b, field, ctx);
        params.cost(hist, b.theta_pca) <= tau
    })
}

/// Drop decomposed pieces whose orientation deviates from the local
/// dominant orientation by more than the configured threshold.
pub fn remove_false_ligatures(
    pieces: Vec<BlobLine>,
    field: &ResponseField,
    ctx: &LigatureContext,
    params: &LigatureParams,
) -> Vec<BlobLine> {
    partition_ligatures(pieces, field, ctx, params).0
}
