//! Re-joining broken blob lines with a minimum spanning tree.
//!
//! Vertices are a root plus the two endpoints of every blob line. Each blob's
//! endpoints are tied together at zero cost, every endpoint is tied to the
//! root at a cost that falls with the blob's ink support, and endpoints of
//! different blobs are linked at the cost of how straight the bridge between
//! them would be. After the tree is built the root is cut away; whatever
//! still hangs together is one text line.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::blob::BlobLine;
use crate::error::{Error, Result};
use crate::geometry::{distance_transform, euclid, pixel_f64};
use crate::imaging::{BinaryImage, Pixel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeParams {
    /// Exponent gain of the linearity measure and of the root edges.
    pub gamma_merge: f64,
    /// Geodesic distance from an endpoint to its anchor point; `None` means
    /// twice the largest bank scale.
    pub anchor_d: Option<f64>,
    /// Longest endpoint-to-endpoint bridge considered; `None` means five
    /// times the largest bank scale.
    pub cap_r: Option<f64>,
    /// Weight root edges by the bare normalized overlap instead of
    /// `exp(gamma * (1 - overlap))`.
    pub literal_e2: bool,
}

impl Default for MergeParams {
    fn default() -> Self {
        MergeParams {
            gamma_merge: 5.0,
            anchor_d: None,
            cap_r: None,
            literal_e2: false,
        }
    }
}

impl MergeParams {
    pub fn anchor_distance(&self, max_scale: f64) -> f64 {
        self.anchor_d.unwrap_or(2.0 * max_scale)
    }

    pub fn bridge_cap(&self, max_scale: f64) -> f64 {
        self.cap_r.unwrap_or(5.0 * max_scale)
    }
}

/// An endpoint `u` and the skeleton point `s` some distance inward from it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EndpointAnchor {
    pub endpoint: Pixel,
    pub nearby: Pixel,
}

/// Anchors for both ends of the blob's principal skeleton path. The nearby
/// point sits `d` path steps inward, clamped to the opposite end.
pub fn endpoint_anchors(blob: &BlobLine, d: usize) -> Vec<EndpointAnchor> {
    let path = blob.principal_path();
    if path.is_empty() {
        return Vec::new();
    }
    let last = path.len() - 1;
    let k = d.min(last);
    vec![
        EndpointAnchor {
            endpoint: path[0],
            nearby: path[k],
        },
        EndpointAnchor {
            endpoint: path[last],
            nearby: path[last - k],
        },
    ]
}

/// Local linearity of the bridge `s - u - v - t`:
/// `exp(gamma * ((|s-u| + |u-v| + |v-t|) / |s-t| - 1))`.
pub fn linearity_weight(u: (f64, f64), v: (f64, f64), s: (f64, f64), t: (f64, f64), gamma: f64) -> Result<f64> {
    let st = euclid(s, t);
    if st == 0.0 {
        return Err(Error::Domain("anchor points coincide".into()));
    }
    // The triangle inequality gives ratio >= 1; clamp away rounding.
    let ratio = ((euclid(s, u) + euclid(u, v) + euclid(v, t)) / st).max(1.0);
    Ok((gamma * (ratio - 1.0)).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EdgeKind {
    /// Between the two endpoints of one blob.
    Intra,
    /// Between the root and an endpoint.
    Root,
    /// Between endpoints of different blobs.
    Cross,
}

impl EdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::Intra => "E1",
            EdgeKind::Root => "E2",
            EdgeKind::Cross => "E3",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeEdge {
    pub a: usize,
    pub b: usize,
    pub kind: EdgeKind,
    pub weight: f64,
}

/// Vertex 0 is the root; blob `i` owns vertices `1 + 2i` and `2 + 2i`.
#[derive(Debug, Clone)]
pub struct MergeGraph {
    pub n_blobs: usize,
    /// Endpoint position of each vertex; `None` for the root.
    pub positions: Vec<Option<Pixel>>,
    pub edges: Vec<MergeEdge>,
}

pub const ROOT: usize = 0;

impl MergeGraph {
    pub fn n_vertices(&self) -> usize {
        2 * self.n_blobs + 1
    }

    pub fn endpoint_vertex(blob: usize, end: usize) -> usize {
        1 + 2 * blob + end
    }

    pub fn blob_of(vertex: usize) -> Option<usize> {
        (vertex != ROOT).then(|| (vertex - 1) / 2)
    }

    pub fn edges_of_kind(&self, kind: EdgeKind) -> impl Iterator<Item = &MergeEdge> {
        self.edges.iter().filter(move |e| e.kind == kind)
    }

    /// Edge list as CSV with header `src,dst,kind,weight`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("src,dst,kind,weight\n");
        for e in &self.edges {
            let _ = writeln!(s, "{},{},{},{}", e.a, e.b, e.kind.as_str(), e.weight);
        }
        s
    }
}

/// Image ink within the blob dilated by its rounded mean thickness.
pub fn blob_overlap(blob: &BlobLine, img: &BinaryImage) -> usize {
    if blob.pixels.is_empty() {
        return 0;
    }
    let rad = blob.mean_thickness().round().max(0.0);
    let m = rad as usize;
    let top = blob.pixels.iter().map(|p| p.0).min().unwrap().saturating_sub(m);
    let left = blob.pixels.iter().map(|p| p.1).min().unwrap().saturating_sub(m);
    let bottom = (blob.pixels.iter().map(|p| p.0).max().unwrap() + m).min(img.height() - 1);
    let right = (blob.pixels.iter().map(|p| p.1).max().unwrap() + m).min(img.width() - 1);
    let (w, h) = (right - left + 1, bottom - top + 1);
    let mut seeds = vec![false; w * h];
    for &(r, c) in &blob.pixels {
        seeds[(r - top) * w + (c - left)] = true;
    }
    let dt = distance_transform(w, h, &seeds);
    let mut count = 0;
    for r in 0..h {
        for c in 0..w {
            if dt[r * w + c] <= rad && img.get(r + top, c + left) {
                count += 1;
            }
        }
    }
    count
}

/// Overlap of each blob normalized by the largest overlap on the page.
pub fn support_ratios(blobs: &[BlobLine], img: &BinaryImage) -> Vec<f64> {
    let counts: Vec<usize> = blobs.iter().map(|b| blob_overlap(b, img)).collect();
    let max = counts.iter().copied().max().unwrap_or(0);
    counts
        .iter()
        .map(|&c| if max == 0 { 0.0 } else { c as f64 / max as f64 })
        .collect()
}

pub fn build_merge_graph(blobs: &[BlobLine], img: &BinaryImage, params: &MergeParams, max_scale: f64) -> MergeGraph {
    let ratios = support_ratios(blobs, img);
    build_merge_graph_with_support(blobs, &ratios, params, max_scale)
}

/// Graph construction given precomputed support ratios.
pub fn build_merge_graph_with_support(
    blobs: &[BlobLine],
    ratios: &[f64],
    params: &MergeParams,
    max_scale: f64,
) -> MergeGraph {
    let d = params.anchor_distance(max_scale).round().max(1.0) as usize;
    let cap = params.bridge_cap(max_scale);
    let gamma = params.gamma_merge;
    let n = blobs.len();
    let mut positions = vec![None; 2 * n + 1];
    let mut anchors = vec![None; 2 * n + 1];
    let mut edges = Vec::new();

    for (i, blob) in blobs.iter().enumerate() {
        let an = endpoint_anchors(blob, d);
        for (k, a) in an.iter().enumerate().take(2) {
            let v = MergeGraph::endpoint_vertex(i, k);
            positions[v] = Some(a.endpoint);
            anchors[v] = Some(*a);
        }
        let (va, vb) = (MergeGraph::endpoint_vertex(i, 0), MergeGraph::endpoint_vertex(i, 1));
        edges.push(MergeEdge {
            a: va,
            b: vb,
            kind: EdgeKind::Intra,
            weight: 0.0,
        });
        let w2 = if params.literal_e2 {
            ratios[i]
        } else {
            (gamma * (1.0 - ratios[i])).exp()
        };
        for v in [va, vb] {
            edges.push(MergeEdge {
                a: ROOT,
                b: v,
                kind: EdgeKind::Root,
                weight: w2,
            });
        }
    }

    // Candidate bridges, then a greedy one-per-endpoint selection by
    // ascending weight.
    let mut candidates = Vec::new();
    for va in 1..=2 * n {
        for vb in va + 1..=2 * n {
            let (Some(a), Some(b)) = (anchors[va], anchors[vb]) else {
                continue;
            };
            if MergeGraph::blob_of(va) == MergeGraph::blob_of(vb) {
                continue;
            }
            let (u, v) = (pixel_f64(a.endpoint), pixel_f64(b.endpoint));
            if euclid(u, v) > cap {
                continue;
            }
            let Ok(w) = linearity_weight(u, v, pixel_f64(a.nearby), pixel_f64(b.nearby), gamma) else {
                continue;
            };
            if w.is_finite() {
                candidates.push((w, va, vb));
            }
        }
    }
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut used = vec![false; 2 * n + 1];
    for (w, va, vb) in candidates {
        if used[va] || used[vb] {
            continue;
        }
        used[va] = true;
        used[vb] = true;
        edges.push(MergeEdge {
            a: va,
            b: vb,
            kind: EdgeKind::Cross,
            weight: w,
        });
    }

    MergeGraph {
        n_blobs: n,
        positions,
        edges,
    }
}

struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// Kruskal's algorithm. Returns indices of the tree (forest) edges; ties are
/// broken by `(weight, lower vertex, higher vertex)`.
pub fn minimum_spanning_tree(n_vertices: usize, edges: &[MergeEdge]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..edges.len()).collect();
    let key = |e: &MergeEdge| (e.a.min(e.b), e.a.max(e.b));
    order.sort_by(|&i, &j| {
        edges[i]
            .weight
            .total_cmp(&edges[j].weight)
            .then(key(&edges[i]).cmp(&key(&edges[j])))
            .then(i.cmp(&j))
    });
    let mut ds = DisjointSet::new(n_vertices);
    order
        .into_iter()
        .filter(|&i| ds.union(edges[i].a, edges[i].b))
        .collect()
}

/// Union of several blob lines. Endpoints are the farthest pair among the
/// parts' endpoints.
pub fn merge_blobs(id: usize, parts: &[&BlobLine]) -> BlobLine {
    if parts.len() == 1 {
        let mut b = parts[0].clone();
        b.id = id;
        return b;
    }
    let pixels: Vec<Pixel> = parts.iter().flat_map(|b| b.pixels.iter().copied()).collect();
    let skeleton: Vec<Pixel> = parts.iter().flat_map(|b| b.skeleton.iter().copied()).collect();
    let ends: Vec<Pixel> = parts.iter().flat_map(|b| b.endpoints.iter().copied()).collect();
    let mut best = (f64::NEG_INFINITY, 0, 0);
    for i in 0..ends.len() {
        for j in i + 1..ends.len() {
            let d = euclid(pixel_f64(ends[i]), pixel_f64(ends[j]));
            if d > best.0 {
                best = (d, i, j);
            }
        }
    }
    let endpoints = if ends.len() >= 2 {
        vec![ends[best.1], ends[best.2]]
    } else {
        ends
    };
    BlobLine::with_endpoints(id, pixels, skeleton, endpoints)
}

/// Group blobs connected by the spanning tree once the root is removed.
/// Returns groups of input indices, ordered by their smallest member.
pub fn mst_groups(graph: &MergeGraph) -> Vec<Vec<usize>> {
    let tree = minimum_spanning_tree(graph.n_vertices(), &graph.edges);
    let mut ds = DisjointSet::new(graph.n_vertices());
    for i in tree {
        let e = graph.edges[i];
        if e.a != ROOT && e.b != ROOT {
            ds.union(e.a, e.b);
        }
    }
    // Intra edges always join a blob's own endpoints even on exact ties.
    for b in 0..graph.n_blobs {
        ds.union(MergeGraph::endpoint_vertex(b, 0), MergeGraph::endpoint_vertex(b, 1));
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = std::collections::HashMap::new();
    for b in 0..graph.n_blobs {
        let r = ds.find(MergeGraph::endpoint_vertex(b, 0));
        let g = *slot.entry(r).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(b);
    }
    groups
}

/// Merge blobs that the spanning tree connects without passing the root.
pub fn mst_merge(graph: &MergeGraph, blobs: &[BlobLine]) -> Vec<BlobLine> {
    mst_groups(graph)
        .into_iter()
        .enumerate()
        .map(|(i, g)| {
            let parts: Vec<&BlobLine> = g.iter().map(|&b| &blobs[b]).collect();
            merge_blobs(i + 1, &parts)
        })
        .collect()
}
