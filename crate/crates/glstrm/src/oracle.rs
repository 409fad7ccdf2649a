//! Exact in-memory ground truth for small graphs.
//!
//! Everything here is brute force with size guards: connected k-subset
//! enumeration for the exact graphlet distribution, exact degree-dominating
//! orders by iterated max-degree removal, per-vertex graphlet counts in
//! suffix graphs, and growth-sequence probabilities summed over all addition
//! orders. These routines are the reference the streaming path is tested
//! against; none of them scan a [`GraphSource`](crate::GraphSource) more than
//! once to load it.

use crate::ddorder::VertexOrder;
use crate::edgestream::GraphSource;
use crate::error::Error;
use crate::estimator::{pair_bit, ClassRegistry};
use crate::Result;

pub const MAX_DISTRIBUTION_N: u64 = 1000;
pub const MAX_POSITIVITY_N: u64 = 200;
pub const MAX_SEQUENCE_K: u32 = 5;

/// Adjacency-list graph for the exact routines.
pub struct MemGraph {
    n: usize,
    adj: Vec<Vec<u32>>,
}

impl MemGraph {
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Self {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Self { n, adj }
    }

    /// Loads a source into memory (one pass), guarded by `max_n`.
    pub fn from_source(source: &GraphSource, max_n: u64) -> Result<Self> {
        let edges = source.collect_edges(max_n)?;
        let pairs: Vec<(u32, u32)> = edges.iter().map(|e| (e.u, e.v)).collect();
        Ok(Self::from_edges(source.n() as usize, &pairs))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self, v: u32) -> usize {
        self.adj[v as usize].len()
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adj[v as usize]
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.adj[u as usize].binary_search(&v).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Upper-triangle adjacency mask of the induced subgraph on `members`.
    pub fn induced_mask(&self, members: &[u32]) -> u64 {
        let k = members.len() as u32;
        let mut mask = 0u64;
        for i in 0..members.len() {
            for j in (i + 1)..members.len() {
                if self.has_edge(members[i], members[j]) {
                    mask |= 1 << pair_bit(k, i as u32, j as u32);
                }
            }
        }
        mask
    }
}

/// Exact per-class counts of connected induced k-vertex subgraphs.
pub struct ExactDistribution {
    pub counts: Vec<u64>,
    pub total: u64,
}

impl ExactDistribution {
    pub fn mu(&self) -> Vec<f64> {
        if self.total == 0 {
            return vec![0.0; self.counts.len()];
        }
        self.counts
            .iter()
            .map(|&c| c as f64 / self.total as f64)
            .collect()
    }
}

/// Enumerates every connected induced k-subset exactly once (each subset is
/// generated from its minimum-id vertex, extending only with larger-id
/// exclusive neighbors) and classifies it.
pub fn exact_distribution(
    graph: &MemGraph,
    k: u32,
    registry: &ClassRegistry,
) -> Result<ExactDistribution> {
    if graph.n() as u64 > MAX_DISTRIBUTION_N {
        return Err(Error::Guard(format!(
            "exact distribution guard: n={} > {MAX_DISTRIBUTION_N}",
            graph.n()
        )));
    }
    if registry.k() != k {
        return Err(Error::Validation("registry k mismatch".into()));
    }
    let mut counts = vec![0u64; registry.class_count()];
    enumerate_connected_ksets(graph, k, &mut |members| {
        let mask = graph.induced_mask(members);
        let class = registry.classify(mask)?;
        counts[class as usize] += 1;
        Ok(())
    })?;
    let total = counts.iter().sum();
    Ok(ExactDistribution { counts, total })
}

/// Calls `visit` once per connected induced k-subset of `graph`.
pub fn enumerate_connected_ksets(
    graph: &MemGraph,
    k: u32,
    visit: &mut impl FnMut(&[u32]) -> Result<()>,
) -> Result<()> {
    if k == 0 {
        return Ok(());
    }
    let n = graph.n();
    // blocked = in the current subset or adjacent to it (exclusive-neighbor rule).
    let mut blocked = vec![false; n];
    for seed in 0..n as u32 {
        let mut members = vec![seed];
        let ext: Vec<u32> = graph
            .neighbors(seed)
            .iter()
            .copied()
            .filter(|&u| u > seed)
            .collect();
        blocked[seed as usize] = true;
        for &u in graph.neighbors(seed) {
            blocked[u as usize] = true;
        }
        extend_ksets(graph, k, seed, &mut members, ext, &mut blocked, visit)?;
        blocked[seed as usize] = false;
        for &u in graph.neighbors(seed) {
            blocked[u as usize] = false;
        }
    }
    Ok(())
}

fn extend_ksets(
    graph: &MemGraph,
    k: u32,
    seed: u32,
    members: &mut Vec<u32>,
    mut ext: Vec<u32>,
    blocked: &mut Vec<bool>,
    visit: &mut impl FnMut(&[u32]) -> Result<()>,
) -> Result<()> {
    if members.len() == k as usize {
        return visit(members);
    }
    while let Some(w) = ext.pop() {
        let mut child_ext = ext.clone();
        let mut newly_blocked = Vec::new();
        for &u in graph.neighbors(w) {
            if u > seed && !blocked[u as usize] {
                child_ext.push(u);
                blocked[u as usize] = true;
                newly_blocked.push(u);
            }
        }
        members.push(w);
        extend_ksets(graph, k, seed, members, child_ext, blocked, visit)?;
        members.pop();
        for u in newly_blocked {
            blocked[u as usize] = false;
        }
    }
    Ok(())
}

/// Exact degree-dominating order: repeatedly removes a maximum-degree vertex
/// (ties: smallest id). The result dominates with factor 1.
pub fn exact_dd_order(graph: &MemGraph) -> VertexOrder {
    let n = graph.n();
    let mut degree: Vec<usize> = (0..n).map(|v| graph.degree(v as u32)).collect();
    let mut alive = vec![true; n];
    let mut sequence = Vec::with_capacity(n);
    for _ in 0..n {
        let mut best: Option<u32> = None;
        for v in 0..n {
            if alive[v] && best.is_none_or(|b| degree[v] > degree[b as usize]) {
                best = Some(v as u32);
            }
        }
        let v = best.unwrap();
        alive[v as usize] = false;
        for &u in graph.neighbors(v) {
            if alive[u as usize] {
                degree[u as usize] -= 1;
            }
        }
        sequence.push(v);
    }
    VertexOrder::from_sequence(sequence).unwrap()
}

/// For each vertex `v`, the exact number `N_v` of connected k-subsets of the
/// suffix graph `G(v)` that contain `v`, and the positivity flag `N_v > 0`.
pub fn exact_positivity_and_nv(
    graph: &MemGraph,
    order: &VertexOrder,
    k: u32,
) -> Result<Vec<(bool, u64)>> {
    if graph.n() as u64 > MAX_POSITIVITY_N {
        return Err(Error::Guard(format!(
            "positivity guard: n={} > {MAX_POSITIVITY_N}",
            graph.n()
        )));
    }
    let n = graph.n();
    let mut out = Vec::with_capacity(n);
    for v in 0..n as u32 {
        let rv = order.rank(v);
        // Local relabeling with v = 0 so ESU seeded at 0 enumerates exactly
        // the subsets of G(v) containing v.
        let mut locals = vec![v];
        for u in 0..n as u32 {
            if u != v && order.rank(u) >= rv {
                locals.push(u);
            }
        }
        let mut local_id = vec![u32::MAX; n];
        for (i, &u) in locals.iter().enumerate() {
            local_id[u as usize] = i as u32;
        }
        let mut edges = Vec::new();
        for (i, &u) in locals.iter().enumerate() {
            for &w in graph.neighbors(u) {
                let lw = local_id[w as usize];
                if lw != u32::MAX && lw > i as u32 {
                    edges.push((i as u32, lw));
                }
            }
        }
        let local_graph = MemGraph::from_edges(locals.len(), &edges);
        let mut count = 0u64;
        enumerate_rooted_ksets(&local_graph, k, &mut |_| {
            count += 1;
            Ok(())
        })?;
        out.push((count > 0, count));
    }
    Ok(out)
}

/// ESU seeded only at vertex 0: enumerates connected k-subsets containing 0.
fn enumerate_rooted_ksets(
    graph: &MemGraph,
    k: u32,
    visit: &mut impl FnMut(&[u32]) -> Result<()>,
) -> Result<()> {
    if graph.n() == 0 || k == 0 {
        return Ok(());
    }
    let mut blocked = vec![false; graph.n()];
    let mut members = vec![0u32];
    blocked[0] = true;
    let ext: Vec<u32> = graph.neighbors(0).to_vec();
    for &u in &ext {
        blocked[u as usize] = true;
    }
    extend_ksets(graph, k, 0, &mut members, ext, &mut blocked, visit)
}

/// Probability that uniform cut-edge growth rooted at `root` produces exactly
/// the vertex set `members`, summed over all realizable addition orders.
///
/// Each step from a partial set `T` adds vertex `u` with probability
/// `a(u,T)/cut(T)` where `a` counts edges between `u` and `T` and `cut(T)` is
/// the number of edges of the suffix graph `G(root)` with exactly one
/// endpoint in `T`. Serves as the independent reference for the subset
/// dynamic program in the sampler.
pub fn growth_sequence_probability(
    graph: &MemGraph,
    order: &VertexOrder,
    root: u32,
    members: &[u32],
) -> Result<f64> {
    let k = members.len();
    if k as u32 > MAX_SEQUENCE_K {
        return Err(Error::Guard(format!(
            "sequence-sum guard: k={k} > {MAX_SEQUENCE_K}"
        )));
    }
    if !members.contains(&root) {
        return Err(Error::Validation("root not in member set".into()));
    }
    let r0 = order.rank(root);
    if members.iter().any(|&u| order.rank(u) < r0) {
        return Ok(0.0);
    }
    // Suffix degrees d(u|G(root)) for the cut sizes.
    let suffix_degree: Vec<u64> = members
        .iter()
        .map(|&u| {
            graph
                .neighbors(u)
                .iter()
                .filter(|&&w| order.rank(w) >= r0)
                .count() as u64
        })
        .collect();
    let adj: Vec<Vec<bool>> = members
        .iter()
        .map(|&u| members.iter().map(|&w| graph.has_edge(u, w)).collect())
        .collect();

    let root_pos = members.iter().position(|&u| u == root).unwrap();
    let rest: Vec<usize> = (0..k).filter(|&i| i != root_pos).collect();
    let mut total = 0.0;
    permute_indices(&rest, &mut |sequence| {
        let mut in_t = vec![false; k];
        in_t[root_pos] = true;
        let mut degree_sum = suffix_degree[root_pos];
        let mut internal_edges = 0u64;
        let mut prob = 1.0;
        for &u in sequence {
            let a = (0..k).filter(|&w| in_t[w] && adj[u][w]).count() as u64;
            if a == 0 {
                prob = 0.0;
                break;
            }
            let cut = degree_sum - 2 * internal_edges;
            prob *= a as f64 / cut as f64;
            in_t[u] = true;
            degree_sum += suffix_degree[u];
            internal_edges += a;
        }
        total += prob;
    });
    Ok(total)
}

fn permute_indices(items: &[usize], visit: &mut impl FnMut(&[usize])) {
    let mut work = items.to_vec();
    fn rec(work: &mut [usize], start: usize, visit: &mut impl FnMut(&[usize])) {
        if start == work.len() {
            visit(work);
            return;
        }
        for i in start..work.len() {
            work.swap(start, i);
            rec(work, start + 1, visit);
            work.swap(start, i);
        }
    }
    rec(&mut work, 0, visit);
}
