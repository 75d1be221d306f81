//! Dinic max-flow on real capacities, used to solve binary expansion moves.

use std::collections::VecDeque;

#[derive(Debug, Clone)]
struct Arc {
    to: usize,
    cap: f64,
}

#[derive(Debug, Clone)]
pub struct FlowGraph {
    n: usize,
    arcs: Vec<Arc>,
    adj: Vec<Vec<usize>>,
    eps: f64,
}

impl FlowGraph {
    pub fn new(n: usize) -> Self {
        FlowGraph {
            n,
            arcs: Vec::new(),
            adj: vec![Vec::new(); n],
            eps: 1e-12,
        }
    }

    /// Directed arc `a -> b` with capacity `cap`, paired with a zero reverse
    /// arc. Non-positive capacities are ignored.
    pub fn add_edge(&mut self, a: usize, b: usize, cap: f64) {
        if !(cap > 0.0) {
            return;
        }
        self.eps = self.eps.max(cap * 1e-13);
        self.adj[a].push(self.arcs.len());
        self.arcs.push(Arc { to: b, cap });
        self.adj[b].push(self.arcs.len());
        self.arcs.push(Arc { to: a, cap: 0.0 });
    }

    fn levels(&self, s: usize, t: usize) -> Option<Vec<usize>> {
        let mut level = vec![usize::MAX; self.n];
        level[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            for &e in &self.adj[v] {
                let a = &self.arcs[e];
                if a.cap > self.eps && level[a.to] == usize::MAX {
                    level[a.to] = level[v] + 1;
                    q.push_back(a.to);
                }
            }
        }
        (level[t] != usize::MAX).then_some(level)
    }

    fn augment(&mut self, v: usize, t: usize, pushed: f64, level: &[usize], iter: &mut [usize]) -> f64 {
        if v == t {
            return pushed;
        }
        while iter[v] < self.adj[v].len() {
            let e = self.adj[v][iter[v]];
            let (to, cap) = (self.arcs[e].to, self.arcs[e].cap);
            if cap > self.eps && level[to] == level[v] + 1 {
                let got = self.augment(to, t, pushed.min(cap), level, iter);
                if got > 0.0 {
                    self.arcs[e].cap -= got;
                    self.arcs[e ^ 1].cap += got;
                    return got;
                }
            }
            iter[v] += 1;
        }
        0.0
    }

    /// Maximum flow from `s` to `t`; leaves the residual graph in place.
    pub fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let mut total = 0.0;
        while let Some(level) = self.levels(s, t) {
            let mut iter = vec![0; self.n];
            loop {
                let f = self.augment(s, t, f64::INFINITY, &level, &mut iter);
                if f <= 0.0 {
                    break;
                }
                total += f;
            }
        }
        total
    }

    /// Vertices reachable from `s` in the residual graph (the source side
    /// of a minimum cut after [`max_flow`](Self::max_flow)).
    pub fn source_side(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        seen[s] = true;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            for &e in &self.adj[v] {
                let a = &self.arcs[e];
                if a.cap > self.eps && !seen[a.to] {
                    seen[a.to] = true;
                    q.push_back(a.to);
                }
            }
        }
        seen
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_flow() {
        // CLRS figure: max flow 23.
        let mut g = FlowGraph::new(6);
        for &(a, b, c) in &[
            (0, 1, 16.0),
            (0, 2, 13.0),
            (1, 3, 12.0),
            (2, 1, 4.0),
            (2, 4, 14.0),
            (3, 2, 9.0),
            (3, 5, 20.0),
            (4, 3, 7.0),
            (4, 5, 4.0),
        ] {
            g.add_edge(a, b, c);
        }
        assert!((g.max_flow(0, 5) - 23.0).abs() < 1e-9);
        let side = g.source_side(0);
        assert!(side[0] && !side[5]);
    }
}
