//! Assigning connected components to blob lines.
//!
//! Label 0 is a discard label; label `l >= 1` is blob `l - 1`.

use serde::{Deserialize, Serialize};

use super::{minimize_labeling, EnergyProblem, Labeling};
use crate::blob::BlobLine;
use crate::error::Result;
use crate::geometry::euclid;
use crate::gt::LineLabeling;
use crate::imaging::{BinaryImage, ConnectedComponent};
use crate::merge::support_ratios;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignParams {
    /// Smoothness decay; `None` uses the inverse mean nearest-neighbor
    /// distance between component centroids.
    pub alpha: Option<f64>,
    /// Label cost gain: `h = exp(beta * support)`.
    pub beta: f64,
    /// Neighbors per component before symmetrization.
    pub knn_k: usize,
    /// Percentile of all distances used as the discard cost.
    pub discard_percentile: f64,
}

impl Default for AssignParams {
    fn default() -> Self {
        AssignParams {
            alpha: None,
            beta: -5.0,
            knn_k: 4,
            discard_percentile: 95.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentProblem {
    pub problem: EnergyProblem,
    /// The smoothness decay actually used.
    pub alpha: f64,
    pub discard_cost: f64,
    /// `distances[c][l]`: centroid of component `c` to nearest pixel of blob `l`.
    pub distances: Vec<Vec<f64>>,
}

/// Nearest-rank percentile of `values`; 0 for an empty slice.
fn percentile(values: &[f64], p: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = ((p / 100.0) * v.len() as f64).ceil().clamp(1.0, v.len() as f64) as usize;
    v[rank - 1]
}

fn nearest_pixel_distance(p: (f64, f64), blob: &BlobLine) -> f64 {
    blob.pixels
        .iter()
        .map(|&(r, c)| euclid(p, (r as f64, c as f64)))
        .fold(f64::INFINITY, f64::min)
}

/// Symmetrized k-nearest-neighbor pairs over points, plus the mean
/// nearest-neighbor distance.
fn knn_pairs(points: &[(f64, f64)], k: usize) -> (Vec<(usize, usize)>, f64) {
    let n = points.len();
    let mut pairs = std::collections::BTreeSet::new();
    let mut nn_sum = 0.0;
    for i in 0..n {
        let mut others: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (euclid(points[i], points[j]), j))
            .collect();
        others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        if let Some(&(d, _)) = others.first() {
            nn_sum += d;
        }
        for &(_, j) in others.iter().take(k) {
            pairs.insert((i.min(j), i.max(j)));
        }
    }
    let mean = if n > 1 { nn_sum / n as f64 } else { 0.0 };
    (pairs.into_iter().collect(), mean)
}

/// The labeling problem for `components` against `blobs`; `blobs` must be
/// non-empty.
pub fn build_assignment_problem(
    components: &[ConnectedComponent],
    blobs: &[BlobLine],
    img: &BinaryImage,
    params: &AssignParams,
) -> Result<AssignmentProblem> {
    let n = components.len();
    let m = blobs.len() + 1;
    let distances: Vec<Vec<f64>> = components
        .iter()
        .map(|c| blobs.iter().map(|b| nearest_pixel_distance(c.centroid, b)).collect())
        .collect();
    let all: Vec<f64> = distances.iter().flatten().copied().collect();
    let discard_cost = percentile(&all, params.discard_percentile);

    let mut data = Vec::with_capacity(n * m);
    for row in &distances {
        data.push(discard_cost);
        data.extend_from_slice(row);
    }

    let centroids: Vec<(f64, f64)> = components.iter().map(|c| c.centroid).collect();
    let (pairs, mean_nn) = knn_pairs(&centroids, params.knn_k);
    let alpha = match params.alpha {
        Some(a) => a,
        None if mean_nn > 0.0 => 1.0 / mean_nn,
        None => 1.0,
    };
    let neighbors = pairs
        .into_iter()
        .map(|(a, b)| (a, b, (-alpha * euclid(centroids[a], centroids[b])).exp()))
        .collect();

    let mut label_costs = vec![0.0];
    label_costs.extend(support_ratios(blobs, img).iter().map(|r| (params.beta * r).exp()));

    Ok(AssignmentProblem {
        problem: EnergyProblem::new(n, m, data, neighbors, label_costs)?,
        alpha,
        discard_cost,
        distances,
    })
}

/// Per-pixel line labels from a solved assignment: used blob labels are
/// renumbered `1..k` in blob order, discarded components stay 0.
pub fn labeling_from_assignment(
    components: &[ConnectedComponent],
    assignment: &[usize],
    n_blobs: usize,
    width: usize,
    height: usize,
) -> Result<LineLabeling> {
    let mut renumber = vec![0u32; n_blobs + 1];
    let mut used = vec![false; n_blobs + 1];
    for &l in assignment {
        used[l] = true;
    }
    let mut next = 0;
    for l in 1..=n_blobs {
        if used[l] {
            next += 1;
            renumber[l] = next;
        }
    }
    let mut labels = vec![0u32; width * height];
    for (c, &l) in components.iter().zip(assignment) {
        for &(r, col) in &c.pixels {
            labels[r * width + col] = renumber[l];
        }
    }
    LineLabeling::new(width, height, labels)
}

/// Solves the assignment and returns the solver output alongside the
/// per-pixel labeling.
pub fn assign_components_detailed(
    components: &[ConnectedComponent],
    blobs: &[BlobLine],
    img: &BinaryImage,
    params: &AssignParams,
) -> Result<(LineLabeling, Option<Labeling>)> {
    if blobs.is_empty() || components.is_empty() {
        return Ok((LineLabeling::empty(img.width(), img.height())?, None));
    }
    let ap = build_assignment_problem(components, blobs, img, params)?;
    let sol = minimize_labeling(&ap.problem)?;
    let labeling = labeling_from_assignment(components, &sol.assignment, blobs.len(), img.width(), img.height())?;
    Ok((labeling, Some(sol)))
}

pub fn assign_components(
    components: &[ConnectedComponent],
    blobs: &[BlobLine],
    img: &BinaryImage,
    params: &AssignParams,
) -> Result<LineLabeling> {
    Ok(assign_components_detailed(components, blobs, img, params)?.0)
}
