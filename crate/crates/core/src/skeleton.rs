//! Morphological thinning and skeleton topology.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::imaging::{label_regions, Pixel, NEIGHBORS_8};

/// Pixel set copied into a padded local raster.
struct Local {
    top: usize,
    left: usize,
    w: usize,
    h: usize,
    bits: Vec<bool>,
}

impl Local {
    fn new(pixels: &[Pixel]) -> Option<Self> {
        let top = pixels.iter().map(|p| p.0).min()?;
        let left = pixels.iter().map(|p| p.1).min()?;
        let bottom = pixels.iter().map(|p| p.0).max()?;
        let right = pixels.iter().map(|p| p.1).max()?;
        // One pixel of background margin on each side.
        let (w, h) = (right - left + 3, bottom - top + 3);
        let mut bits = vec![false; w * h];
        for &(r, c) in pixels {
            bits[(r - top + 1) * w + (c - left + 1)] = true;
        }
        Some(Local { top, left, w, h, bits })
    }

    fn pixels(&self) -> Vec<Pixel> {
        let mut out = Vec::new();
        for r in 1..self.h - 1 {
            for c in 1..self.w - 1 {
                if self.bits[r * self.w + c] {
                    out.push((r - 1 + self.top, c - 1 + self.left));
                }
            }
        }
        out
    }
}

/// Zhang-Suen thinning. Returns the skeleton pixels in scan order.
pub fn thin(pixels: &[Pixel]) -> Vec<Pixel> {
    let Some(mut g) = Local::new(pixels) else {
        return Vec::new();
    };
    let w = g.w;
    let mut to_clear = Vec::new();
    loop {
        let mut changed = false;
        for step in 0..2 {
            to_clear.clear();
            for r in 1..g.h - 1 {
                for c in 1..w - 1 {
                    let i = r * w + c;
                    if !g.bits[i] {
                        continue;
                    }
                    // P2..P9 clockwise from north.
                    let p = [
                        g.bits[i - w],
                        g.bits[i - w + 1],
                        g.bits[i + 1],
                        g.bits[i + w + 1],
                        g.bits[i + w],
                        g.bits[i + w - 1],
                        g.bits[i - 1],
                        g.bits[i - w - 1],
                    ];
                    let b = p.iter().filter(|&&x| x).count();
                    if !(2..=6).contains(&b) {
                        continue;
                    }
                    let a = (0..8).filter(|&k| !p[k] && p[(k + 1) % 8]).count();
                    if a != 1 {
                        continue;
                    }
                    let (n, e, s, wst) = (p[0], p[2], p[4], p[6]);
                    let ok = if step == 0 {
                        !(n && e && s) && !(e && s && wst)
                    } else {
                        !(n && e && wst) && !(n && s && wst)
                    };
                    if ok {
                        to_clear.push(i);
                    }
                }
            }
            for &i in &to_clear {
                g.bits[i] = false;
            }
            changed |= !to_clear.is_empty();
        }
        if !changed {
            break;
        }
    }
    g.pixels()
}

fn neighbors_in(set: &HashSet<Pixel>, p: Pixel) -> impl Iterator<Item = Pixel> + '_ {
    NEIGHBORS_8.iter().filter_map(move |&(dr, dc)| {
        let (r, c) = (p.0 as isize + dr, p.1 as isize + dc);
        if r < 0 || c < 0 {
            return None;
        }
        let q = (r as usize, c as usize);
        set.contains(&q).then_some(q)
    })
}

/// Number of separate neighbor groups around `p` (0 -> 1 transitions in the
/// clockwise ring).
fn crossing_number(set: &HashSet<Pixel>, p: Pixel) -> usize {
    // Clockwise from north.
    const RING: [(isize, isize); 8] = [(-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1)];
    let on = |k: usize| {
        let (dr, dc) = RING[k % 8];
        let (r, c) = (p.0 as isize + dr, p.1 as isize + dc);
        r >= 0 && c >= 0 && set.contains(&(r as usize, c as usize))
    };
    (0..8).filter(|&k| !on(k) && on(k + 1)).count()
}

/// Skeleton pixels where three or more branches meet: at least three
/// skeleton neighbors forming at least three separate groups around the
/// pixel. The group condition keeps staircase corners of a thinned
/// diagonal from counting as junctions.
pub fn bifurcation_points(skeleton: &[Pixel]) -> Vec<Pixel> {
    let set: HashSet<Pixel> = skeleton.iter().copied().collect();
    skeleton
        .iter()
        .copied()
        .filter(|&p| neighbors_in(&set, p).count() >= 3 && crossing_number(&set, p) >= 3)
        .collect()
}

/// Skeleton arcs left after deleting the bifurcation pixels. Two remaining
/// pixels that touch only diagonally and both border the same bifurcation
/// are treated as unlinked; otherwise the arms of a clean cross would still
/// hang together around its deleted center.
pub fn branches(skeleton: &[Pixel]) -> Vec<Vec<Pixel>> {
    let bif: HashSet<Pixel> = bifurcation_points(skeleton).into_iter().collect();
    let rest: HashSet<Pixel> = skeleton.iter().copied().filter(|p| !bif.contains(p)).collect();
    let near_junction = |p: Pixel, q: Pixel| {
        p.0 != q.0
            && p.1 != q.1
            && bif.iter().any(|b| {
                b.0.abs_diff(p.0) <= 1 && b.1.abs_diff(p.1) <= 1 && b.0.abs_diff(q.0) <= 1 && b.1.abs_diff(q.1) <= 1
            })
    };
    let mut order: Vec<Pixel> = rest.iter().copied().collect();
    order.sort_unstable();
    let mut seen: HashSet<Pixel> = HashSet::new();
    let mut arcs = Vec::new();
    for &start in &order {
        if !seen.insert(start) {
            continue;
        }
        let mut arc = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(p) = queue.pop_front() {
            for q in neighbors_in(&rest, p) {
                if !seen.contains(&q) && !near_junction(p, q) {
                    seen.insert(q);
                    arc.push(q);
                    queue.push_back(q);
                }
            }
        }
        arc.sort_unstable();
        arcs.push(arc);
    }
    arcs
}

/// Skeleton pixels with at most one skeleton neighbor.
pub fn end_points(skeleton: &[Pixel]) -> Vec<Pixel> {
    let set: HashSet<Pixel> = skeleton.iter().copied().collect();
    skeleton
        .iter()
        .copied()
        .filter(|&p| neighbors_in(&set, p).count() <= 1)
        .collect()
}

/// BFS over 8-adjacent skeleton pixels; returns hop distances and parents.
fn bfs(set: &HashSet<Pixel>, start: Pixel) -> (HashMap<Pixel, usize>, HashMap<Pixel, Pixel>) {
    let mut dist = HashMap::new();
    let mut parent = HashMap::new();
    let mut queue = VecDeque::new();
    dist.insert(start, 0);
    queue.push_back(start);
    while let Some(p) = queue.pop_front() {
        let d = dist[&p];
        // Deterministic neighbor order.
        let mut next: Vec<Pixel> = neighbors_in(set, p).filter(|q| !dist.contains_key(q)).collect();
        next.sort_unstable();
        for q in next {
            dist.insert(q, d + 1);
            parent.insert(q, p);
            queue.push_back(q);
        }
    }
    (dist, parent)
}

fn farthest(dist: &HashMap<Pixel, usize>) -> Pixel {
    *dist
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map(|(p, _)| p)
        .expect("non-empty")
}

/// Longest shortest path through the largest connected part of the
/// skeleton, from one extreme pixel to the other. For a simple arc this is
/// the arc itself in order.
pub fn principal_path(skeleton: &[Pixel]) -> Vec<Pixel> {
    if skeleton.is_empty() {
        return Vec::new();
    }
    let set: HashSet<Pixel> = skeleton.iter().copied().collect();
    // Largest 8-connected part; smallest pixel breaks ties.
    let parts = split_components(skeleton);
    let part = parts
        .iter()
        .max_by(|a, b| a.len().cmp(&b.len()).then(b[0].cmp(&a[0])))
        .expect("non-empty");
    let start = *part.iter().min().expect("non-empty");
    let (d0, _) = bfs(&set, start);
    let a = farthest(&d0);
    let (da, parent) = bfs(&set, a);
    let b = farthest(&da);
    let mut path = vec![b];
    let mut cur = b;
    while cur != a {
        cur = parent[&cur];
        path.push(cur);
    }
    path.reverse();
    path
}

/// 8-connected parts of a pixel set, each sorted, ordered by first pixel.
pub fn split_components(pixels: &[Pixel]) -> Vec<Vec<Pixel>> {
    if pixels.is_empty() {
        return Vec::new();
    }
    let top = pixels.iter().map(|p| p.0).min().unwrap();
    let left = pixels.iter().map(|p| p.1).min().unwrap();
    let w = pixels.iter().map(|p| p.1).max().unwrap() - left + 1;
    let h = pixels.iter().map(|p| p.0).max().unwrap() - top + 1;
    let mut bits = vec![false; w * h];
    for &(r, c) in pixels {
        bits[(r - top) * w + (c - left)] = true;
    }
    label_regions(w, h, &bits)
        .into_iter()
        .map(|reg| reg.into_iter().map(|(r, c)| (r + top, c + left)).collect())
        .collect()
}
