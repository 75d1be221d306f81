//! Discrete labeling with data, Potts smoothness and per-label costs.
//!
//! The energy of an assignment `f` is
//!
//! ```text
//! E(f) = sum_c D(c, f_c) + sum_{(c,c') in N} w(c,c') [f_c != f_c'] + sum_{l used} h_l
//! ```
//!
//! [`minimize_labeling`] runs label-cost expansion moves, each solved exactly
//! as a minimum cut, and finishes small instances with an exact
//! branch-and-bound search.

mod assign;
mod maxflow;

pub use assign::{
    assign_components, assign_components_detailed, build_assignment_problem, labeling_from_assignment, AssignParams,
    AssignmentProblem,
};
pub use maxflow::FlowGraph;

use std::collections::HashSet;

use crate::error::{Error, Result};

/// Problems whose labeling space is at most this large are solved exactly
/// after the expansion sweeps.
pub const EXACT_SEARCH_LIMIT: f64 = 250_000.0;

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyProblem {
    n_elements: usize,
    n_labels: usize,
    /// Row-major `n_elements x n_labels`.
    data: Vec<f64>,
    /// Unordered pairs stored as `(low, high, weight)`.
    neighbors: Vec<(usize, usize, f64)>,
    label_costs: Vec<f64>,
}

impl EnergyProblem {
    pub fn new(
        n_elements: usize,
        n_labels: usize,
        data: Vec<f64>,
        neighbors: Vec<(usize, usize, f64)>,
        label_costs: Vec<f64>,
    ) -> Result<Self> {
        if data.len() != n_elements * n_labels {
            return Err(Error::Domain(format!(
                "data cost matrix has {} entries, expected {}",
                data.len(),
                n_elements * n_labels
            )));
        }
        if label_costs.len() != n_labels {
            return Err(Error::Domain(format!(
                "{} label costs for {} labels",
                label_costs.len(),
                n_labels
            )));
        }
        if data.iter().any(|d| !d.is_finite()) {
            return Err(Error::Domain("data costs must be finite".into()));
        }
        if label_costs.iter().any(|h| !h.is_finite() || *h < 0.0) {
            return Err(Error::Domain("label costs must be finite and non-negative".into()));
        }
        let mut seen = HashSet::new();
        let mut pairs = Vec::with_capacity(neighbors.len());
        for (a, b, w) in neighbors {
            if a == b || a >= n_elements || b >= n_elements {
                return Err(Error::Domain(format!("invalid neighbor pair ({a}, {b})")));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::Domain(format!("neighbor weight {w} must be finite and >= 0")));
            }
            let key = (a.min(b), a.max(b));
            if !seen.insert(key) {
                return Err(Error::Domain(format!("duplicate neighbor pair ({a}, {b})")));
            }
            pairs.push((key.0, key.1, w));
        }
        Ok(EnergyProblem {
            n_elements,
            n_labels,
            data,
            neighbors: pairs,
            label_costs,
        })
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn n_labels(&self) -> usize {
        self.n_labels
    }

    #[inline]
    pub fn data_cost(&self, element: usize, label: usize) -> f64 {
        self.data[element * self.n_labels + label]
    }

    pub fn neighbors(&self) -> &[(usize, usize, f64)] {
        &self.neighbors
    }

    pub fn label_costs(&self) -> &[f64] {
        &self.label_costs
    }

    /// Same problem with label indices permuted: new label `perm[l]` plays
    /// the role of old label `l`.
    pub fn permute_labels(&self, perm: &[usize]) -> EnergyProblem {
        let m = self.n_labels;
        let mut data = vec![0.0; self.data.len()];
        let mut costs = vec![0.0; m];
        for l in 0..m {
            costs[perm[l]] = self.label_costs[l];
            for c in 0..self.n_elements {
                data[c * m + perm[l]] = self.data[c * m + l];
            }
        }
        EnergyProblem {
            data,
            label_costs: costs,
            ..self.clone()
        }
    }
}

/// Result of [`minimize_labeling`].
#[derive(Debug, Clone, PartialEq)]
pub struct Labeling {
    pub assignment: Vec<usize>,
    pub energy: f64,
    /// Energy after initialization, after each sweep, and after the exact
    /// search when it ran.
    pub sweep_energies: Vec<f64>,
}

/// Exact energy of a total assignment.
pub fn evaluate_energy(problem: &EnergyProblem, assignment: &[usize]) -> Result<f64> {
    if assignment.len() != problem.n_elements {
        return Err(Error::Domain(format!(
            "assignment covers {} of {} elements",
            assignment.len(),
            problem.n_elements
        )));
    }
    if let Some(&l) = assignment.iter().find(|&&l| l >= problem.n_labels) {
        return Err(Error::Domain(format!("unknown label {l}")));
    }
    Ok(energy_unchecked(problem, assignment))
}

fn energy_unchecked(p: &EnergyProblem, f: &[usize]) -> f64 {
    let data: f64 = f.iter().enumerate().map(|(c, &l)| p.data_cost(c, l)).sum();
    let smooth: f64 = p
        .neighbors
        .iter()
        .filter(|&&(a, b, _)| f[a] != f[b])
        .map(|&(_, _, w)| w)
        .sum();
    let mut used = vec![false; p.n_labels];
    for &l in f {
        used[l] = true;
    }
    let labels: f64 = used
        .iter()
        .zip(&p.label_costs)
        .filter(|(u, _)| **u)
        .map(|(_, h)| h)
        .sum();
    data + smooth + labels
}

fn improves(new: f64, old: f64) -> bool {
    new < old - 1e-12 * old.abs().max(1.0)
}

/// Binary energy accumulator for one expansion move. Variable value 1
/// (sink side of the cut) means "switch to the expanded label".
struct MoveGraph {
    unary: Vec<(f64, f64)>,
    pairs: Vec<(usize, usize, f64)>,
}

impl MoveGraph {
    fn new(n: usize) -> Self {
        MoveGraph {
            unary: vec![(0.0, 0.0); n],
            pairs: Vec::new(),
        }
    }

    fn add_node(&mut self) -> usize {
        self.unary.push((0.0, 0.0));
        self.unary.len() - 1
    }

    fn unary(&mut self, i: usize, e0: f64, e1: f64) {
        self.unary[i].0 += e0;
        self.unary[i].1 += e1;
    }

    /// Pairwise table `[E00, E01, E10, E11]`, which must be submodular.
    fn pairwise(&mut self, i: usize, j: usize, e: [f64; 4]) {
        let [a, b, c, d] = e;
        self.unary(i, 0.0, c - a);
        self.unary(j, 0.0, d - c);
        let w = b + c - a - d;
        debug_assert!(w >= -1e-9, "non-submodular term");
        if w > 0.0 {
            self.pairs.push((i, j, w));
        }
    }

    /// Minimizing 0/1 values.
    fn solve(self) -> Vec<bool> {
        let n = self.unary.len();
        let (s, t) = (n, n + 1);
        let mut g = FlowGraph::new(n + 2);
        for (i, &(e0, e1)) in self.unary.iter().enumerate() {
            let m = e0.min(e1);
            g.add_edge(s, i, e1 - m);
            g.add_edge(i, t, e0 - m);
        }
        for &(i, j, w) in &self.pairs {
            g.add_edge(i, j, w);
        }
        g.max_flow(s, t);
        let side = g.source_side(s);
        (0..n).map(|i| !side[i]).collect()
    }
}

/// Optimal expansion of `alpha` from `f`, including label costs.
fn expansion_move(p: &EnergyProblem, f: &[usize], alpha: usize) -> Vec<usize> {
    let n = p.n_elements;
    let mut g = MoveGraph::new(n);
    for (c, &fc) in f.iter().enumerate() {
        g.unary(c, p.data_cost(c, fc), p.data_cost(c, alpha));
    }
    for &(a, b, w) in &p.neighbors {
        let (fa, fb) = (f[a], f[b]);
        let ind = |x: usize, y: usize| if x != y { w } else { 0.0 };
        g.pairwise(a, b, [ind(fa, fb), ind(fa, alpha), ind(alpha, fb), 0.0]);
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); p.n_labels];
    for (c, &fc) in f.iter().enumerate() {
        members[fc].push(c);
    }
    for (l, mem) in members.iter().enumerate() {
        let h = p.label_costs[l];
        if h <= 0.0 || mem.is_empty() || l == alpha {
            continue;
        }
        // h is saved only if every member switches: h - h * prod(x).
        let y = g.add_node();
        g.unary(y, h, 0.0);
        for &c in mem {
            g.pairwise(y, c, [0.0, 0.0, h, 0.0]);
        }
    }
    let h_alpha = p.label_costs[alpha];
    if h_alpha > 0.0 && members[alpha].is_empty() {
        // h is paid if any element switches: h - h * prod(1 - x).
        let z = g.add_node();
        g.unary(z, 0.0, h_alpha);
        for c in 0..n {
            g.pairwise(z, c, [0.0, h_alpha, 0.0, 0.0]);
        }
    }
    let x = g.solve();
    f.iter()
        .enumerate()
        .map(|(c, &fc)| if x[c] { alpha } else { fc })
        .collect()
}

/// Depth-first branch and bound over all labelings, seeded with an upper
/// bound. Returns an improving labeling if one exists.
fn exact_search(p: &EnergyProblem, best_energy: f64) -> Option<(Vec<usize>, f64)> {
    let n = p.n_elements;
    let m = p.n_labels;
    let min_data: Vec<f64> = (0..n)
        .map(|c| (0..m).map(|l| p.data_cost(c, l)).fold(f64::INFINITY, f64::min))
        .collect();
    // suffix[c] = sum of min data costs of elements c..n
    let mut suffix = vec![0.0; n + 1];
    for c in (0..n).rev() {
        suffix[c] = suffix[c + 1] + min_data[c];
    }
    // Neighbors of c with a lower index.
    let mut back: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for &(a, b, w) in &p.neighbors {
        back[b].push((a, w));
    }

    struct State<'a> {
        p: &'a EnergyProblem,
        suffix: Vec<f64>,
        back: Vec<Vec<(usize, f64)>>,
        f: Vec<usize>,
        used: Vec<usize>,
        best: f64,
        best_f: Option<Vec<usize>>,
    }

    fn dfs(st: &mut State, c: usize, partial: f64) {
        let n = st.p.n_elements;
        if c == n {
            if improves(partial, st.best) {
                st.best = partial;
                st.best_f = Some(st.f.clone());
            }
            return;
        }
        for l in 0..st.p.n_labels {
            let mut e = partial + st.p.data_cost(c, l);
            if st.used[l] == 0 {
                e += st.p.label_costs[l];
            }
            for &(a, w) in &st.back[c] {
                if st.f[a] != l {
                    e += w;
                }
            }
            if !improves(e + st.suffix[c + 1], st.best) {
                continue;
            }
            st.f[c] = l;
            st.used[l] += 1;
            dfs(st, c + 1, e);
            st.used[l] -= 1;
        }
    }

    let mut st = State {
        p,
        suffix,
        back,
        f: vec![0; n],
        used: vec![0; m],
        best: best_energy,
        best_f: None,
    };
    dfs(&mut st, 0, 0.0);
    let best = st.best;
    st.best_f.map(|f| (f, best))
}

/// Minimize the labeling energy.
///
/// Starts from each element's cheapest label, then sweeps expansion moves
/// over labels in ascending order, accepting a move only when it strictly
/// lowers the energy, until a sweep changes nothing. When the labeling space
/// has at most [`EXACT_SEARCH_LIMIT`] members an exact search finishes the
/// job, so small instances return the global minimum.
pub fn minimize_labeling(problem: &EnergyProblem) -> Result<Labeling> {
    let (n, m) = (problem.n_elements, problem.n_labels);
    if n == 0 || m == 0 {
        return Err(Error::Domain(
            "labeling needs at least one element and one label".into(),
        ));
    }
    let mut f: Vec<usize> = (0..n)
        .map(|c| {
            (0..m)
                .min_by(|&a, &b| {
                    problem
                        .data_cost(c, a)
                        .total_cmp(&problem.data_cost(c, b))
                        .then(a.cmp(&b))
                })
                .expect("m >= 1")
        })
        .collect();
    let mut energy = energy_unchecked(problem, &f);
    let mut sweeps = vec![energy];
    loop {
        let mut improved = false;
        for alpha in 0..m {
            let cand = expansion_move(problem, &f, alpha);
            let e = energy_unchecked(problem, &cand);
            if improves(e, energy) {
                f = cand;
                energy = e;
                improved = true;
            }
        }
        sweeps.push(energy);
        if !improved {
            break;
        }
    }
    if (n as f64) * (m as f64).ln() <= EXACT_SEARCH_LIMIT.ln() {
        if let Some((g, _)) = exact_search(problem, energy) {
            f = g;
            energy = energy_unchecked(problem, &f);
        }
        sweeps.push(energy);
    }
    Ok(Labeling {
        assignment: f,
        energy,
        sweep_energies: sweeps,
    })
}

/// Expansion sweeps only, without the exact finish; exposed for
/// experimentation on large problems and for tests.
pub fn expansion_only(problem: &EnergyProblem, init: Vec<usize>) -> Result<Labeling> {
    let mut f = init;
    let mut energy = evaluate_energy(problem, &f)?;
    let mut sweeps = vec![energy];
    loop {
        let mut improved = false;
        for alpha in 0..problem.n_labels {
            let cand = expansion_move(problem, &f, alpha);
            let e = energy_unchecked(problem, &cand);
            if improves(e, energy) {
                f = cand;
                energy = e;
                improved = true;
            }
        }
        sweeps.push(energy);
        if !improved {
            break;
        }
    }
    Ok(Labeling {
        assignment: f,
        energy,
        sweep_energies: sweeps,
    })
}
