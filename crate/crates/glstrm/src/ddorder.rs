//! Approximate degree-dominating vertex orders over edge streams.
//!
//! A vertex order dominates with factor `1/(1+ε)` when every vertex has, in
//! the subgraph induced by itself and its successors, at least `1/(1+ε)`
//! times the maximum degree there. Such orders are computed by repeatedly
//! peeling vertices whose degree clears a shrinking threshold.
//!
//! Two streaming variants estimate degrees from sub-sampled digraphs:
//! [`approx_dd_warmup`] builds one digraph per pass, while [`approx_dd_es`]
//! builds a whole block of `q` digraphs per pass (one per upcoming peeling
//! round) so the pass count drops to roughly `T/q`. All Bernoulli draws are
//! keyed by `(seed, peeling round, edge ordinal, direction)`, so the two
//! variants consume identical randomness and produce identical orders.
//!
//! [`baseline_dd`] is the deterministic reference peeler (one exact-degree
//! pass per threshold level), and [`evaluate_order`] measures the realized
//! dominance factor of any order with an external sort and a suffix sweep.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::edgestream::GraphSource;
use crate::error::Error;
use crate::extsort::PairSorter;
use crate::memory::{MemoryMeter, Reservation};
use crate::rngkey;
use crate::Result;

/// A bijection between vertices and order positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexOrder {
    rank: Vec<u32>,
    inverse: Vec<u32>,
}

impl VertexOrder {
    pub fn identity(n: usize) -> Self {
        let seq: Vec<u32> = (0..n as u32).collect();
        Self {
            rank: seq.clone(),
            inverse: seq,
        }
    }

    /// Builds from the position-to-vertex sequence (position = rank).
    pub fn from_sequence(inverse: Vec<u32>) -> Result<Self> {
        let n = inverse.len();
        let mut rank = vec![u32::MAX; n];
        for (pos, &v) in inverse.iter().enumerate() {
            let slot = rank
                .get_mut(v as usize)
                .ok_or_else(|| Error::Validation(format!("vertex {v} out of range")))?;
            if *slot != u32::MAX {
                return Err(Error::Validation(format!("vertex {v} appears twice")));
            }
            *slot = pos as u32;
        }
        Ok(Self { rank, inverse })
    }

    pub fn len(&self) -> usize {
        self.rank.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rank.is_empty()
    }

    #[inline]
    pub fn rank(&self, v: u32) -> u32 {
        self.rank[v as usize]
    }

    pub fn ranks(&self) -> &[u32] {
        &self.rank
    }

    #[inline]
    pub fn vertex_at(&self, position: usize) -> u32 {
        self.inverse[position]
    }

    /// Text format: one dense vertex id per line; line number = rank.
    pub fn write_text(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        for &v in &self.inverse {
            writeln!(out, "{v}")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_text(path: &Path) -> Result<Self> {
        let file = BufReader::new(File::open(path)?);
        let mut seq = Vec::new();
        for line in file.lines() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            seq.push(t.parse::<u32>().map_err(|_| {
                Error::Validation(format!("invalid vertex id {t:?} in order file"))
            })?);
        }
        Self::from_sequence(seq)
    }
}

/// Parameters of the streaming order computation.
#[derive(Debug, Clone)]
pub struct DDConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub c: f64,
    pub seed: u64,
    /// Spend one pass measuring the exact max degree instead of assuming n-1.
    pub exact_delta_init: bool,
    /// Cap (in words, one per stored arc) on sampled arcs held at once.
    pub arc_budget: Option<u64>,
}

impl DDConfig {
    pub fn new(epsilon: f64, delta: f64, c: f64, seed: u64) -> Self {
        Self {
            epsilon,
            delta,
            c,
            seed,
            exact_delta_init: false,
            arc_budget: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Validation("epsilon must be in (0,1)".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Validation("delta must be in (0,1)".into()));
        }
        if !(self.c > 0.0) {
            return Err(Error::Validation("c must be positive".into()));
        }
        Ok(())
    }

    /// ε̂ = ε / (4 + 3ε): the degree-estimate accuracy target.
    pub fn eps_hat(&self) -> f64 {
        self.epsilon / (4.0 + 3.0 * self.epsilon)
    }

    /// K = 1 + ε: a removed vertex has current degree at least Δ/K.
    pub fn k_factor(&self) -> f64 {
        1.0 + self.epsilon
    }

    /// α = 3ε/4: the selection threshold is Δ/(1+α).
    pub fn alpha_sel(&self) -> f64 {
        3.0 * self.epsilon / 4.0
    }

    /// 1 + ε/2: per-round shrink factor of the degree threshold.
    pub fn half_step(&self) -> f64 {
        1.0 + self.epsilon / 2.0
    }

    /// T = ceil(log_{1+ε/2} n): the planned number of peeling rounds.
    pub fn t_iter(&self, n: u64) -> u64 {
        if n <= 1 {
            return 1;
        }
        ((n as f64).ln() / self.half_step().ln()).ceil().max(1.0) as u64
    }

    /// q = max(1, floor(log_{1+ε/2} n^c)): peeling rounds served per pass.
    pub fn q(&self, n: u64) -> u64 {
        if n <= 1 {
            return 1;
        }
        let q = (self.c * (n as f64).ln() / self.half_step().ln()).floor();
        (q as u64).max(1)
    }

    /// p = min(3K/(ε̂²Δ) · ln(2nT/δ), 1) for threshold level `delta_est`.
    ///
    /// Shared by both variants so their floating-point results are
    /// bit-identical for identical inputs.
    pub fn sampling_probability(&self, n: u64, t_iter: u64, delta_est: f64) -> f64 {
        let eh = self.eps_hat();
        let log_term = (2.0 * n as f64 * t_iter as f64 / self.delta).ln();
        (3.0 * self.k_factor() / (eh * eh * delta_est) * log_term).min(1.0)
    }
}

/// One sub-sampled digraph: arcs kept with probability `p` per direction,
/// sorted by source vertex.
#[derive(Debug)]
pub struct SampledDigraph {
    arcs: Vec<(u32, u32)>,
    pub p: f64,
    pub delta_est: f64,
    pub iteration: u64,
}

impl SampledDigraph {
    pub fn arc_count(&self) -> u64 {
        self.arcs.len() as u64
    }

    pub fn arcs(&self) -> &[(u32, u32)] {
        &self.arcs
    }
}

/// Plan for one digraph of a pass: `(peeling round, p, threshold level)`.
#[derive(Debug, Clone, Copy)]
pub struct DigraphPlan {
    pub iteration: u64,
    pub p: f64,
    pub delta_est: f64,
}

/// Builds one digraph per plan entry in a single pass over the source.
///
/// Each direction of each edge of `G[alive]` is kept independently with
/// probability `plan.p`, keyed by `(seed, plan.iteration, edge ordinal,
/// direction)`. Fails with a budget error (naming the offending round) if the
/// arcs held at once would exceed `arc_budget`; the aborted scan is not
/// counted as a pass. The returned reservation covers one word per stored arc
/// and must be held while the graphs are alive.
pub fn sample_digraph_block<'m>(
    source: &GraphSource,
    alive: &[bool],
    plan: &[DigraphPlan],
    seed: u64,
    arc_budget: Option<u64>,
    meter: &'m MemoryMeter,
) -> Result<(Vec<SampledDigraph>, Reservation<'m>)> {
    let mut buffers: Vec<Vec<(u32, u32)>> = plan.iter().map(|_| Vec::new()).collect();
    let mut total_arcs: u64 = 0;
    let mut reservation = meter.charge(0);
    let mut ordinal: u64 = 0;
    source.scan_chunks(|chunk| {
        for e in chunk {
            let t = ordinal;
            ordinal += 1;
            if !alive[e.u as usize] || !alive[e.v as usize] {
                continue;
            }
            for (slot, entry) in plan.iter().enumerate() {
                let mut pushed = 0u64;
                if rngkey::bernoulli(seed, entry.iteration, t, 0, entry.p) {
                    buffers[slot].push((e.u, e.v));
                    pushed += 1;
                }
                if rngkey::bernoulli(seed, entry.iteration, t, 1, entry.p) {
                    buffers[slot].push((e.v, e.u));
                    pushed += 1;
                }
                if pushed > 0 {
                    total_arcs += pushed;
                    reservation.grow(pushed);
                    if let Some(budget) = arc_budget {
                        if total_arcs > budget {
                            return Err(Error::Budget {
                                iteration: entry.iteration,
                                needed_words: total_arcs,
                                budget_words: budget,
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    })?;
    let graphs = buffers
        .into_iter()
        .zip(plan)
        .map(|(mut arcs, entry)| {
            arcs.sort_unstable();
            SampledDigraph {
                arcs,
                p: entry.p,
                delta_est: entry.delta_est,
                iteration: entry.iteration,
            }
        })
        .collect();
    Ok((graphs, reservation))
}

/// Convenience wrapper for a single digraph.
pub fn sample_digraph<'m>(
    source: &GraphSource,
    alive: &[bool],
    p: f64,
    delta_est: f64,
    iteration: u64,
    seed: u64,
    arc_budget: Option<u64>,
    meter: &'m MemoryMeter,
) -> Result<(SampledDigraph, Reservation<'m>)> {
    let (mut graphs, reservation) = sample_digraph_block(
        source,
        alive,
        &[DigraphPlan {
            iteration,
            p,
            delta_est,
        }],
        seed,
        arc_budget,
        meter,
    )?;
    Ok((graphs.pop().unwrap(), reservation))
}

/// Scans the alive vertices in ascending id order; each vertex whose degree
/// estimate `|surviving out-neighbors| / p` clears `Δ/(1+α)` is appended to
/// the order and removed immediately, so later vertices see it gone.
pub fn select_large(
    alive: &mut [bool],
    alive_count: &mut u64,
    graph: &SampledDigraph,
    alpha_sel: f64,
    sequence: &mut Vec<u32>,
) {
    let threshold = graph.delta_est / (1.0 + alpha_sel);
    let arcs = &graph.arcs;
    let mut cursor = 0usize;
    for v in 0..alive.len() as u32 {
        let start = cursor;
        while cursor < arcs.len() && arcs[cursor].0 == v {
            cursor += 1;
        }
        if !alive[v as usize] {
            continue;
        }
        let surviving = arcs[start..cursor]
            .iter()
            .filter(|&&(_, w)| alive[w as usize])
            .count();
        let d_hat = surviving as f64 / graph.p;
        if d_hat >= threshold {
            sequence.push(v);
            alive[v as usize] = false;
            *alive_count -= 1;
        }
    }
    debug_assert_eq!(cursor, arcs.len());
}

/// Per-pass sampling statistics, used by the memory-bound checks.
#[derive(Debug, Clone, Copy)]
pub struct PassStats {
    /// Arcs stored by this pass (all digraphs together).
    pub arcs: u64,
    /// `Σ_j n·Δ·p_j` with Δ the threshold estimate at the start of the pass.
    pub expected_arc_bound: f64,
}

/// Outcome of an order computation.
pub struct OrderResult {
    pub order: VertexOrder,
    /// Scans of the source triggered by this computation.
    pub passes: u64,
    /// Peeling rounds executed.
    pub iterations: u64,
    pub pass_stats: Vec<PassStats>,
}

fn exact_max_degree(source: &GraphSource) -> Result<f64> {
    let mut degree = vec![0u32; source.n() as usize];
    source.scan(|e| {
        degree[e.u as usize] += 1;
        degree[e.v as usize] += 1;
    })?;
    Ok(degree.iter().copied().max().unwrap_or(0) as f64)
}

fn flush_remaining(alive: &[bool], sequence: &mut Vec<u32>) {
    for v in 0..alive.len() as u32 {
        if alive[v as usize] {
            sequence.push(v);
        }
    }
}

/// One digraph per pass: sample `G[U]` at the current threshold's rate, peel,
/// shrink the threshold by `1+ε/2`, repeat. When the threshold drops below 1
/// the remaining vertices (which no positive threshold can select) are
/// appended in ascending id order.
pub fn approx_dd_warmup(
    source: &GraphSource,
    cfg: &DDConfig,
    meter: &MemoryMeter,
) -> Result<OrderResult> {
    cfg.validate()?;
    let n = source.n() as usize;
    let mut sequence = Vec::with_capacity(n);
    let mut alive = vec![true; n];
    let _alive_charge = meter.charge_bytes(n as u64);
    let mut alive_count = n as u64;
    let mut passes = 0u64;
    let mut iterations = 0u64;
    let mut pass_stats = Vec::new();

    if n > 0 && source.m() > 0 {
        let t_iter = cfg.t_iter(source.n());
        let mut delta_est = if cfg.exact_delta_init {
            passes += 1;
            exact_max_degree(source)?
        } else {
            (source.n() - 1) as f64
        };
        while alive_count > 0 {
            if delta_est < 1.0 {
                break;
            }
            let p = cfg.sampling_probability(source.n(), t_iter, delta_est);
            let (graph, arc_charge) = sample_digraph(
                source,
                &alive,
                p,
                delta_est,
                iterations,
                cfg.seed,
                cfg.arc_budget,
                meter,
            )?;
            passes += 1;
            pass_stats.push(PassStats {
                arcs: graph.arc_count(),
                expected_arc_bound: source.n() as f64 * delta_est * p,
            });
            if graph.p >= 1.0 && graph.arc_count() == 0 {
                // At p = 1 an empty sample proves G[U] has no edges left, so
                // no later round can select anything.
                break;
            }
            select_large(
                &mut alive,
                &mut alive_count,
                &graph,
                cfg.alpha_sel(),
                &mut sequence,
            );
            drop(graph);
            drop(arc_charge);
            delta_est /= cfg.half_step();
            iterations += 1;
        }
    }
    flush_remaining(&alive, &mut sequence);
    Ok(OrderResult {
        order: VertexOrder::from_sequence(sequence)?,
        passes,
        iterations,
        pass_stats,
    })
}

/// A block of `q` digraphs per pass, one per upcoming peeling round, with
/// per-round rates `p_j` computed for thresholds `Δ/(1+ε/2)^j`. Rounds then
/// consume the block in order. Identical keying makes this coincide with
/// [`approx_dd_warmup`] draw for draw; with `q = 1` the computation is
/// bit-identical.
pub fn approx_dd_es(
    source: &GraphSource,
    cfg: &DDConfig,
    meter: &MemoryMeter,
) -> Result<OrderResult> {
    cfg.validate()?;
    let n = source.n() as usize;
    let mut passes = 0u64;
    let delta_est = if n == 0 || source.m() == 0 {
        0.0
    } else if cfg.exact_delta_init {
        passes += 1;
        exact_max_degree(source)?
    } else {
        (source.n() - 1) as f64
    };
    es_drive(
        source,
        cfg,
        meter,
        vec![true; n],
        n as u64,
        Vec::with_capacity(n),
        delta_est,
        passes,
    )
}

/// Continues block peeling from a partially peeled state (as left by
/// [`prefix_heuristic`]). Pass accounting accumulates on the state's.
pub fn approx_dd_es_resume(
    source: &GraphSource,
    cfg: &DDConfig,
    meter: &MemoryMeter,
    state: PeelState,
) -> Result<OrderResult> {
    cfg.validate()?;
    es_drive(
        source,
        cfg,
        meter,
        state.alive,
        state.alive_count,
        state.sequence,
        state.delta_est,
        state.passes,
    )
}

#[allow(clippy::too_many_arguments)]
fn es_drive(
    source: &GraphSource,
    cfg: &DDConfig,
    meter: &MemoryMeter,
    mut alive: Vec<bool>,
    mut alive_count: u64,
    mut sequence: Vec<u32>,
    mut delta_est: f64,
    mut passes: u64,
) -> Result<OrderResult> {
    let _alive_charge = meter.charge_bytes(alive.len() as u64);
    let mut iterations = 0u64;
    let mut pass_stats = Vec::new();
    let t_iter = cfg.t_iter(source.n());
    let q = cfg.q(source.n());
    let mut block: std::collections::VecDeque<SampledDigraph> = Default::default();
    let mut block_charge: Option<Reservation> = None;
    'peel: while alive_count > 0 {
        if block.is_empty() {
            block_charge = None;
            let mut plan = Vec::new();
            for j in 0..q {
                let dj = delta_est / cfg.half_step().powi(j as i32);
                if dj < 1.0 {
                    break;
                }
                plan.push(DigraphPlan {
                    iteration: iterations + j,
                    p: cfg.sampling_probability(source.n(), t_iter, dj),
                    delta_est: dj,
                });
            }
            if plan.is_empty() {
                break 'peel;
            }
            let bound: f64 = plan
                .iter()
                .map(|e| source.n() as f64 * delta_est * e.p)
                .sum();
            let (graphs, charge) =
                sample_digraph_block(source, &alive, &plan, cfg.seed, cfg.arc_budget, meter)?;
            passes += 1;
            pass_stats.push(PassStats {
                arcs: graphs.iter().map(|g| g.arc_count()).sum(),
                expected_arc_bound: bound,
            });
            block.extend(graphs);
            block_charge = Some(charge);
        }
        let graph = block.pop_front().unwrap();
        if graph.p >= 1.0 && graph.arc_count() == 0 {
            break 'peel;
        }
        select_large(
            &mut alive,
            &mut alive_count,
            &graph,
            cfg.alpha_sel(),
            &mut sequence,
        );
        iterations += 1;
        if block.is_empty() {
            delta_est = graph.delta_est / cfg.half_step();
            block_charge = None;
        }
    }
    drop(block_charge);
    flush_remaining(&alive, &mut sequence);
    Ok(OrderResult {
        order: VertexOrder::from_sequence(sequence)?,
        passes,
        iterations,
        pass_stats,
    })
}

/// Deterministic reference peeler: one pass computes exact degrees, then each
/// round collects the edges incident to the threshold layer (vertices whose
/// degree clears `Δ/(1+ε)`) in one pass and peels the layer in ascending id
/// order with removal-time degrees, so every removed vertex is guaranteed to
/// clear the threshold at its own removal.
pub fn baseline_dd(source: &GraphSource, epsilon: f64, meter: &MemoryMeter) -> Result<OrderResult> {
    if !(epsilon > 0.0) {
        return Err(Error::Validation("epsilon must be positive".into()));
    }
    let n = source.n() as usize;
    let mut sequence = Vec::with_capacity(n);
    let mut alive = vec![true; n];
    let mut alive_count = n as u64;
    let mut degree = vec![0u32; n];
    let _state_charge = meter.charge_bytes(n as u64 * 5);
    let mut passes = 0u64;
    let mut iterations = 0u64;

    if n > 0 && source.m() > 0 {
        source.scan(|e| {
            degree[e.u as usize] += 1;
            degree[e.v as usize] += 1;
        })?;
        passes += 1;
        let mut delta_true = degree.iter().copied().max().unwrap_or(0);
        while alive_count > 0 && delta_true > 0 {
            iterations += 1;
            let threshold = delta_true as f64 / (1.0 + epsilon);
            let mut layer_slot = vec![u32::MAX; n];
            let mut layer: Vec<u32> = Vec::new();
            for v in 0..n {
                if alive[v] && degree[v] as f64 >= threshold {
                    layer_slot[v] = layer.len() as u32;
                    layer.push(v as u32);
                }
            }
            // One pass: adjacency of the layer restricted to alive vertices.
            let mut layer_adj: Vec<Vec<u32>> = vec![Vec::new(); layer.len()];
            source.scan(|e| {
                let (u, v) = (e.u as usize, e.v as usize);
                if !alive[u] || !alive[v] {
                    return;
                }
                if layer_slot[u] != u32::MAX {
                    layer_adj[layer_slot[u] as usize].push(e.v);
                }
                if layer_slot[v] != u32::MAX {
                    layer_adj[layer_slot[v] as usize].push(e.u);
                }
            })?;
            passes += 1;
            let adj_words: u64 = layer_adj.iter().map(|l| l.len() as u64).sum();
            let _layer_charge = meter.charge(adj_words / 2 + layer.len() as u64);
            // Peel ascending by id with live degrees.
            for (slot, &v) in layer.iter().enumerate() {
                if degree[v as usize] as f64 >= threshold {
                    sequence.push(v);
                    alive[v as usize] = false;
                    alive_count -= 1;
                    for &w in &layer_adj[slot] {
                        if alive[w as usize] {
                            degree[w as usize] -= 1;
                        }
                    }
                }
            }
            delta_true = (0..n)
                .filter(|&v| alive[v])
                .map(|v| degree[v])
                .max()
                .unwrap_or(0);
        }
    }
    flush_remaining(&alive, &mut sequence);
    Ok(OrderResult {
        order: VertexOrder::from_sequence(sequence)?,
        passes,
        iterations,
        pass_stats: Vec::new(),
    })
}

/// Histogram bucket edges for the per-vertex quality measure.
pub const EPS_BUCKETS: [f64; 10] = [0.0, 0.01, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 4.0, 8.0];

/// One evaluated vertex: suffix degree, suffix max degree and
/// `eps = Δ(G(v))/d(v|G(v)) - 1`.
#[derive(Debug, Clone, Copy)]
pub struct QualityRow {
    pub vertex: u32,
    pub d_up: u32,
    pub delta_suffix: u32,
    pub eps: f64,
}

/// Realized order quality: rows for every vertex with positive suffix degree.
#[derive(Debug, Clone)]
pub struct DDQualityReport {
    pub rows: Vec<QualityRow>,
    pub max_eps: f64,
    /// Counts per [`EPS_BUCKETS`] bucket (last bucket is open-ended).
    pub histogram: [u64; 10],
}

impl DDQualityReport {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "vertex,d_up,delta_suffix,eps_v")?;
        for row in &self.rows {
            writeln!(
                out,
                "{},{},{},{}",
                row.vertex, row.d_up, row.delta_suffix, row.eps
            )?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "max_eps": self.max_eps,
            "vertices_evaluated": self.rows.len(),
            "histogram": {
                "bucket_lower_bounds": EPS_BUCKETS,
                "counts": self.histogram,
            },
        })
    }
}

/// Measures the dominance factor of `order` on `source`.
///
/// Re-keys every edge by rank pair `(i, j)`, `i < j`, externally sorts the
/// pairs descending and sweeps suffix graphs from the last vertex backwards,
/// maintaining per-vertex local degrees and the running maximum. When all
/// edges of `G(v)` are in, the vertex's suffix degree and the running maximum
/// give `eps_v`. Ties on `i` are sorted by descending `j`; the sweep result
/// does not depend on the order within a tie group.
pub fn evaluate_order(
    source: &GraphSource,
    order: &VertexOrder,
    scratch_dir: &Path,
    meter: &MemoryMeter,
) -> Result<DDQualityReport> {
    evaluate_order_with_capacity(source, order, scratch_dir, 1 << 21, meter)
}

/// [`evaluate_order`] with an explicit external-sort run capacity (records).
pub fn evaluate_order_with_capacity(
    source: &GraphSource,
    order: &VertexOrder,
    scratch_dir: &Path,
    run_capacity: usize,
    meter: &MemoryMeter,
) -> Result<DDQualityReport> {
    if order.len() as u64 != source.n() {
        return Err(Error::Validation(format!(
            "order covers {} vertices, graph has {}",
            order.len(),
            source.n()
        )));
    }
    if !scratch_dir.is_dir() {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("scratch dir {} is not a directory", scratch_dir.display()),
        )));
    }
    let n = order.len();
    let mut sorter = PairSorter::new(scratch_dir, run_capacity, Some(meter));
    let mut push_err = None;
    source.scan(|e| {
        let (ru, rv) = (order.rank(e.u), order.rank(e.v));
        let pair = if ru < rv { (ru, rv) } else { (rv, ru) };
        if push_err.is_none() {
            if let Err(err) = sorter.push(pair) {
                push_err = Some(err);
            }
        }
    })?;
    if let Some(err) = push_err {
        return Err(err);
    }

    let mut local_deg = vec![0u32; n];
    let _deg_charge = meter.charge_bytes(n as u64 * 4);
    let mut run_max = 0u32;
    let mut rows: Vec<QualityRow> = Vec::new();
    let mut current: Option<u32> = None;
    let emit = |rank: u32, local_deg: &[u32], run_max: u32, rows: &mut Vec<QualityRow>| {
        let d_up = local_deg[rank as usize];
        debug_assert!(d_up > 0);
        rows.push(QualityRow {
            vertex: order.vertex_at(rank as usize),
            d_up,
            delta_suffix: run_max,
            eps: run_max as f64 / d_up as f64 - 1.0,
        });
    };
    sorter.finish(|i, j| {
        if let Some(prev) = current {
            if prev != i {
                emit(prev, &local_deg, run_max, &mut rows);
            }
        }
        current = Some(i);
        local_deg[i as usize] += 1;
        local_deg[j as usize] += 1;
        run_max = run_max
            .max(local_deg[i as usize])
            .max(local_deg[j as usize]);
    })?;
    if let Some(prev) = current {
        emit(prev, &local_deg, run_max, &mut rows);
    }
    rows.reverse(); // ascending rank

    let mut histogram = [0u64; 10];
    let mut max_eps = 0.0f64;
    for row in &rows {
        max_eps = max_eps.max(row.eps);
        let bucket = EPS_BUCKETS
            .iter()
            .rposition(|&lo| row.eps >= lo)
            .unwrap_or(0);
        histogram[bucket] += 1;
    }
    Ok(DDQualityReport {
        rows,
        max_eps,
        histogram,
    })
}

/// Mutable peeling state shared with the in-memory prefix heuristic.
pub struct PeelState {
    pub alive: Vec<bool>,
    pub alive_count: u64,
    pub sequence: Vec<u32>,
    /// Upper bound on the current max degree of the alive graph.
    pub delta_est: f64,
    /// Exact degrees from the most recent full-degree pass; after heuristic
    /// removals they stay exact for prefix vertices and become upper bounds
    /// for the rest.
    pub degrees: Vec<u32>,
    pub passes: u64,
}

impl PeelState {
    /// Builds the state with one exact-degree pass.
    pub fn from_source(source: &GraphSource) -> Result<Self> {
        let n = source.n() as usize;
        let mut degrees = vec![0u32; n];
        let mut passes = 0;
        if source.m() > 0 {
            source.scan(|e| {
                degrees[e.u as usize] += 1;
                degrees[e.v as usize] += 1;
            })?;
            passes = 1;
        }
        let delta_est = degrees.iter().copied().max().unwrap_or(0) as f64;
        Ok(Self {
            alive: vec![true; n],
            alive_count: n as u64,
            sequence: Vec::new(),
            delta_est,
            degrees,
            passes,
        })
    }
}

/// In-memory head start for peeling (off by default).
///
/// Loads the induced subgraph of the largest degree-sorted prefix of alive
/// vertices whose incident-edge volume fits `budget_words`, then compares
/// (i) one simulated block of threshold peeling against (ii) exact max-degree
/// peeling of the prefix, and applies whichever drops the residual max-degree
/// bound further. Exact peeling only removes a vertex while its live degree
/// matches the global degree bound, so every removal is a true max-degree
/// removal and the combined order stays dominating. Uses one pass; a no-op
/// (without a pass) when the budget admits no vertex.
pub fn prefix_heuristic(
    source: &GraphSource,
    cfg: &DDConfig,
    state: &mut PeelState,
    budget_words: u64,
    meter: &MemoryMeter,
) -> Result<bool> {
    let n = source.n() as usize;
    if state.alive_count == 0 || source.m() == 0 {
        return Ok(false);
    }
    // Largest degree-sorted prefix whose incident volume fits the budget.
    let mut by_degree: Vec<u32> = (0..n as u32).filter(|&v| state.alive[v as usize]).collect();
    by_degree.sort_unstable_by(|&a, &b| {
        state.degrees[b as usize]
            .cmp(&state.degrees[a as usize])
            .then(a.cmp(&b))
    });
    let mut volume = 0u64;
    let mut prefix_len = 0usize;
    for &v in &by_degree {
        let next = volume + state.degrees[v as usize] as u64 + 1;
        if next > budget_words {
            break;
        }
        volume = next;
        prefix_len += 1;
    }
    if prefix_len == 0 {
        return Ok(false);
    }
    let prefix = &by_degree[..prefix_len];
    let mut slot = vec![u32::MAX; n];
    for (i, &v) in prefix.iter().enumerate() {
        slot[v as usize] = i as u32;
    }

    // One pass: induced adjacency of the prefix (alive endpoints only).
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); prefix_len];
    source.scan(|e| {
        let (su, sv) = (slot[e.u as usize], slot[e.v as usize]);
        if su != u32::MAX && sv != u32::MAX {
            adj[su as usize].push(sv);
            adj[sv as usize].push(su);
        }
    })?;
    state.passes += 1;
    let _adj_charge = meter.charge(adj.iter().map(|l| l.len() as u64).sum::<u64>() / 2);

    // Degrees of non-prefix alive vertices only shrink, so their stored
    // values upper-bound the residual max degree outside the prefix.
    let outside_bound = (0..n)
        .filter(|&v| state.alive[v] && slot[v] == u32::MAX)
        .map(|v| state.degrees[v])
        .max()
        .unwrap_or(0);

    // Prefix slots in ascending vertex id, matching the scan order of
    // select_large.
    let mut id_order: Vec<usize> = (0..prefix_len).collect();
    id_order.sort_unstable_by_key(|&i| prefix[i]);

    // Option (i): one simulated block of threshold peeling at exact degrees.
    let simulate_block = || -> (Vec<u32>, Vec<u32>) {
        let mut live: Vec<u32> = prefix.iter().map(|&v| state.degrees[v as usize]).collect();
        let mut removed_flags = vec![false; prefix_len];
        let mut removed = Vec::new();
        let q = cfg.q(source.n());
        for j in 0..q {
            let dj = state.delta_est / cfg.half_step().powi(j as i32);
            if dj < 1.0 {
                break;
            }
            let threshold = dj / (1.0 + cfg.alpha_sel());
            for &i in &id_order {
                if !removed_flags[i] && live[i] as f64 >= threshold {
                    removed_flags[i] = true;
                    removed.push(prefix[i]);
                    for &w in &adj[i] {
                        if !removed_flags[w as usize] {
                            live[w as usize] = live[w as usize].saturating_sub(1);
                        }
                    }
                }
            }
        }
        (removed, live)
    };

    // Option (ii): exact max-degree peeling while the prefix holds the
    // global degree bound (ties: smallest id).
    let exact_peel = || -> (Vec<u32>, Vec<u32>) {
        let mut live: Vec<u32> = prefix.iter().map(|&v| state.degrees[v as usize]).collect();
        let mut removed_flags = vec![false; prefix_len];
        let mut removed = Vec::new();
        loop {
            let mut best: Option<usize> = None;
            for i in 0..prefix_len {
                if !removed_flags[i] {
                    let better = match best {
                        None => true,
                        Some(b) => {
                            live[i] > live[b] || (live[i] == live[b] && prefix[i] < prefix[b])
                        }
                    };
                    if better {
                        best = Some(i);
                    }
                }
            }
            let Some(i) = best else { break };
            if live[i] < outside_bound {
                break;
            }
            removed_flags[i] = true;
            removed.push(prefix[i]);
            for &w in &adj[i] {
                if !removed_flags[w as usize] {
                    live[w as usize] = live[w as usize].saturating_sub(1);
                }
            }
        }
        (removed, live)
    };

    let (sim_removed, sim_live) = simulate_block();
    let (exact_removed, exact_live) = exact_peel();
    let residual = |removed: &[u32], live: &[u32]| -> u64 {
        let removed_set: std::collections::HashSet<u32> = removed.iter().copied().collect();
        let prefix_max = prefix
            .iter()
            .enumerate()
            .filter(|(_, v)| !removed_set.contains(v))
            .map(|(i, _)| live[i] as u64)
            .max()
            .unwrap_or(0);
        prefix_max.max(outside_bound as u64)
    };
    let sim_residual = residual(&sim_removed, &sim_live);
    let exact_residual = residual(&exact_removed, &exact_live);
    let (removed, live, new_bound) = if exact_residual <= sim_residual {
        (exact_removed, exact_live, exact_residual)
    } else {
        (sim_removed, sim_live, sim_residual)
    };
    if removed.is_empty() {
        return Ok(false);
    }
    for &v in &removed {
        state.alive[v as usize] = false;
        state.sequence.push(v);
    }
    state.alive_count -= removed.len() as u64;
    for (i, &v) in prefix.iter().enumerate() {
        if state.alive[v as usize] {
            state.degrees[v as usize] = live[i];
        }
    }
    state.delta_est = new_bound as f64;
    Ok(true)
}
