//! Minimization of `F = P + nH Vol` over admissible sets between two bounds.

use std::collections::VecDeque;

use super::{check_containment, functional, ProductGrid, VoxelSet};
use crate::error::{Error, Result};
use crate::scalar::ExactScalar;

/// Smallest and largest minimizers and the minimum value.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimization<S> {
    pub minimal: VoxelSet,
    pub maximal: VoxelSet,
    pub value: S,
    pub unique: bool,
}

/// `(column, level)`.
type Voxel = (usize, usize);

/// Pairwise interaction between two voxels, or a voxel and a fixed one.
fn pair_terms<S: ExactScalar>(grid: &ProductGrid<S>) -> Vec<(Voxel, Voxel, S)> {
    let dw = grid.dw();
    let mut out = Vec::new();
    for j in 0..grid.levels() {
        for (a, b, w) in grid.lateral() {
            out.push(((*a, j), (*b, j), w.clone() * dw.clone()));
        }
    }
    for (c, w) in grid.horizontal().iter().enumerate() {
        for j in 0..grid.levels() - 1 {
            out.push(((c, j), (c, j + 1), w.clone()));
        }
    }
    out
}

fn check_bounds<S: ExactScalar>(grid: &ProductGrid<S>, lower: &VoxelSet, upper: &VoxelSet) -> Result<()> {
    check_containment(grid, lower)?;
    check_containment(grid, upper)?;
    if !lower.is_subset(upper) {
        return Err(Error::InvalidGrid("lower bound is not contained in the upper bound".into()));
    }
    Ok(())
}

struct FlowGraph<S> {
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<S>,
}

impl<S: ExactScalar> FlowGraph<S> {
    fn new(nodes: usize) -> Self {
        Self { adj: vec![Vec::new(); nodes], to: Vec::new(), cap: Vec::new() }
    }

    fn add_edge(&mut self, u: usize, v: usize, c: S) {
        if c <= S::zero() {
            return;
        }
        self.adj[u].push(self.to.len());
        self.to.push(v);
        self.cap.push(c);
        self.adj[v].push(self.to.len());
        self.to.push(u);
        self.cap.push(S::zero());
    }

    fn levels(&self, s: usize) -> Vec<usize> {
        let mut level = vec![usize::MAX; self.adj.len()];
        level[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &e in &self.adj[u] {
                let v = self.to[e];
                if level[v] == usize::MAX && self.cap[e] > S::zero() {
                    level[v] = level[u] + 1;
                    q.push_back(v);
                }
            }
        }
        level
    }

    fn augment(&mut self, u: usize, t: usize, f: S, level: &[usize], it: &mut [usize]) -> S {
        if u == t {
            return f;
        }
        while it[u] < self.adj[u].len() {
            let e = self.adj[u][it[u]];
            let v = self.to[e];
            if self.cap[e] > S::zero() && level[v] == level[u] + 1 {
                let lim = if self.cap[e] < f { self.cap[e].clone() } else { f.clone() };
                let d = self.augment(v, t, lim, level, it);
                if d > S::zero() {
                    self.cap[e] = self.cap[e].clone() - d.clone();
                    self.cap[e ^ 1] = self.cap[e ^ 1].clone() + d.clone();
                    return d;
                }
            }
            it[u] += 1;
        }
        S::zero()
    }

    fn max_flow(&mut self, s: usize, t: usize) {
        let total = self.cap.iter().fold(S::one(), |a, c| a + c.clone());
        loop {
            let level = self.levels(s);
            if level[t] == usize::MAX {
                return;
            }
            let mut it = vec![0; self.adj.len()];
            while self.augment(s, t, total.clone(), &level, &mut it) > S::zero() {}
        }
    }

    /// Nodes from which `t` is reachable in the residual graph.
    fn reaches(&self, t: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[t] = true;
        let mut q = VecDeque::from([t]);
        while let Some(v) = q.pop_front() {
            for &e in &self.adj[v] {
                let u = self.to[e];
                if !seen[u] && self.cap[e ^ 1] > S::zero() {
                    seen[u] = true;
                    q.push_back(u);
                }
            }
        }
        seen
    }
}

/// Minimize `F` over admissible `lower ⊆ E ⊆ upper` by a minimum cut. The minimal minimizer is
/// the source side of the residual graph, the maximal one the complement of the sink side.
pub fn minimize_between<S: ExactScalar>(grid: &ProductGrid<S>, lower: &VoxelSet, upper: &VoxelSet, h: f64) -> Result<Minimization<S>> {
    check_bounds(grid, lower, upper)?;
    let (cols, levels) = (grid.columns(), grid.levels());
    let mut node = vec![usize::MAX; cols * levels];
    let mut free = Vec::new();
    for c in 0..cols {
        for j in 0..levels {
            if upper.get(c, j) && !lower.get(c, j) {
                node[c * levels + j] = free.len();
                free.push((c, j));
            }
        }
    }
    let (s, t) = (free.len(), free.len() + 1);
    let mut g = FlowGraph::new(free.len() + 2);
    let nh = S::from_count(i64::from(grid.n())) * S::from_weight(h) * grid.dw();
    for (k, &(c, _)) in free.iter().enumerate() {
        let a = nh.clone() * grid.volume_weights()[c].clone();
        if a > S::zero() {
            g.add_edge(k, t, a);
        } else {
            g.add_edge(s, k, -a);
        }
    }
    for ((c1, j1), (c2, j2), w) in pair_terms(grid) {
        let (p, q) = (node[c1 * levels + j1], node[c2 * levels + j2]);
        match (p != usize::MAX, q != usize::MAX) {
            (true, true) => {
                g.add_edge(p, q, w.clone());
                g.add_edge(q, p, w);
            }
            (true, false) => fixed_neighbor(&mut g, p, lower.get(c2, j2), w, s, t),
            (false, true) => fixed_neighbor(&mut g, q, lower.get(c1, j1), w, s, t),
            (false, false) => {}
        }
    }
    g.max_flow(s, t);
    let from_source = g.levels(s);
    let to_sink = g.reaches(t);
    let mut minimal = lower.clone();
    let mut maximal = lower.clone();
    for (k, &(c, j)) in free.iter().enumerate() {
        minimal.set(c, j, from_source[k] != usize::MAX);
        maximal.set(c, j, !to_sink[k]);
    }
    let value = functional(grid, &minimal, h)?;
    Ok(Minimization { unique: minimal == maximal, minimal, maximal, value })
}

fn fixed_neighbor<S: ExactScalar>(g: &mut FlowGraph<S>, p: usize, neighbor_occupied: bool, w: S, s: usize, t: usize) {
    if neighbor_occupied {
        g.add_edge(s, p, w);
    } else {
        g.add_edge(p, t, w);
    }
}

/// Largest number of free voxels [`minimize_exhaustive`] accepts.
pub const EXHAUSTIVE_LIMIT: usize = 24;

/// Enumerate every set between the bounds. Minimizers are compared with `==`, so ties are only
/// meaningful for exact scalars.
pub fn minimize_exhaustive<S: ExactScalar>(grid: &ProductGrid<S>, lower: &VoxelSet, upper: &VoxelSet, h: f64) -> Result<Minimization<S>> {
    check_bounds(grid, lower, upper)?;
    let mut free = Vec::new();
    for c in 0..grid.columns() {
        for j in 0..grid.levels() {
            if upper.get(c, j) && !lower.get(c, j) {
                free.push((c, j));
            }
        }
    }
    if free.len() > EXHAUSTIVE_LIMIT {
        return Err(Error::InvalidGrid(format!("{} free voxels exceed the enumeration limit {EXHAUSTIVE_LIMIT}", free.len())));
    }
    let mut best: Option<(S, VoxelSet, VoxelSet)> = None;
    let mut count = 0usize;
    let mut e = lower.clone();
    for mask in 0u64..(1u64 << free.len()) {
        for (k, &(c, j)) in free.iter().enumerate() {
            e.set(c, j, mask >> k & 1 == 1);
        }
        let f = functional(grid, &e, h)?;
        best = match best {
            Some((v, lo, hi)) if f == v => {
                count += 1;
                Some((v, lo.intersection(&e), hi.union(&e)))
            }
            Some((v, lo, hi)) if f > v => Some((v, lo, hi)),
            _ => {
                count = 1;
                Some((f, e.clone(), e.clone()))
            }
        };
    }
    let (value, minimal, maximal) = best.expect("at least one candidate");
    Ok(Minimization { minimal, maximal, value, unique: count == 1 })
}
