//! Root-sampling weights derived from a vertex order.
//!
//! For each vertex `v`, the up-degree `d(v|G(v))` counts neighbors ranked
//! after `v`, and the positivity flag records whether the connected component
//! of `v` within its suffix graph reaches `k` vertices (i.e. whether any
//! k-graphlet of `G(v)` contains `v`). Positive vertices get weight
//! `d(v|G(v))^(k-1)`; the exact integer normalizer `Z` is their sum.
//!
//! Both quantities come out of a single pass: the pass accumulates up-degrees
//! and spills rank pairs for an external sort, and a descending sweep over
//! the sorted pairs maintains a union-find whose components are exactly the
//! components of each suffix graph as it grows.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::ddorder::VertexOrder;
use crate::edgestream::GraphSource;
use crate::error::Error;
use crate::extsort::PairSorter;
use crate::memory::MemoryMeter;
use crate::Result;

const SIDECAR_MAGIC: &[u8; 8] = b"GLINIT1\0";

/// Per-vertex root-sampling data for graphlet size `k`.
pub struct InitialDistribution {
    pub k: u32,
    pub d_up: Vec<u32>,
    pub positive: Vec<bool>,
    /// Exact integer `Z = Σ_{positive v} d_up(v)^(k-1)`.
    pub z: BigUint,
}

impl InitialDistribution {
    pub fn n(&self) -> usize {
        self.d_up.len()
    }

    /// There is no k-graphlet at all iff `Z = 0`.
    pub fn is_empty(&self) -> bool {
        self.z.is_zero()
    }

    pub fn z_f64(&self) -> f64 {
        self.z.to_f64().unwrap_or(f64::INFINITY)
    }

    /// Unnormalized weight `d_up(v)^(k-1)` for positive `v`, else 0.
    pub fn weight(&self, v: u32) -> f64 {
        if self.positive[v as usize] {
            (self.d_up[v as usize] as f64).powi(self.k as i32 - 1)
        } else {
            0.0
        }
    }

    /// `p(v) = d_up(v)^(k-1) / Z` for positive `v`, else 0.
    pub fn prob(&self, v: u32) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.weight(v) / self.z_f64()
        }
    }

    /// Sidecar format: magic, n, k, per-vertex `(d_up: u32, positive: u8)`,
    /// then `Z` in decimal.
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        out.write_all(SIDECAR_MAGIC)?;
        out.write_all(&(self.n() as u64).to_le_bytes())?;
        out.write_all(&(self.k as u64).to_le_bytes())?;
        for v in 0..self.n() {
            out.write_all(&self.d_up[v].to_le_bytes())?;
            out.write_all(&[self.positive[v] as u8])?;
        }
        let z = self.z.to_str_radix(10);
        out.write_all(&(z.len() as u64).to_le_bytes())?;
        out.write_all(z.as_bytes())?;
        out.flush()?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut file = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 8];
        file.read_exact(&mut magic)?;
        if &magic != SIDECAR_MAGIC {
            return Err(Error::Parse {
                offset: 0,
                message: format!("bad magic in {}", path.display()),
            });
        }
        let mut word = [0u8; 8];
        file.read_exact(&mut word)?;
        let n = u64::from_le_bytes(word) as usize;
        file.read_exact(&mut word)?;
        let k = u64::from_le_bytes(word) as u32;
        let mut d_up = Vec::with_capacity(n);
        let mut positive = Vec::with_capacity(n);
        let mut rec = [0u8; 5];
        for _ in 0..n {
            file.read_exact(&mut rec)?;
            d_up.push(u32::from_le_bytes(rec[..4].try_into().unwrap()));
            positive.push(rec[4] != 0);
        }
        file.read_exact(&mut word)?;
        let z_len = u64::from_le_bytes(word) as usize;
        let mut z_bytes = vec![0u8; z_len];
        file.read_exact(&mut z_bytes)?;
        let z_str = String::from_utf8(z_bytes).map_err(|_| Error::Parse {
            offset: 0,
            message: "normalizer is not valid utf-8".into(),
        })?;
        let z = BigUint::parse_bytes(z_str.as_bytes(), 10).ok_or(Error::Parse {
            offset: 0,
            message: "normalizer is not a decimal integer".into(),
        })?;
        Ok(Self {
            k,
            d_up,
            positive,
            z,
        })
    }
}

/// One pass: `d(v|G(v))` for every vertex (each edge increments the endpoint
/// with the smaller rank).
pub fn up_degrees(source: &GraphSource, order: &VertexOrder) -> Result<Vec<u32>> {
    let mut d_up = vec![0u32; order.len()];
    source.scan(|e| {
        let v = if order.rank(e.u) < order.rank(e.v) {
            e.u
        } else {
            e.v
        };
        d_up[v as usize] += 1;
    })?;
    Ok(d_up)
}

/// One pass: for every vertex, whether its component within its suffix graph
/// has at least `k` vertices.
pub fn positivity(
    source: &GraphSource,
    order: &VertexOrder,
    k: u32,
    scratch_dir: &Path,
    meter: &MemoryMeter,
) -> Result<Vec<bool>> {
    Ok(init_distribution(source, order, k, scratch_dir, meter)?.positive)
}

/// Composes up-degrees, positivity, the exact normalizer and the per-vertex
/// probabilities in a single pass over the source (plus scratch I/O for the
/// rank-pair sort).
///
/// A zero normalizer is not an error here; estimation refuses to run on it.
pub fn init_distribution(
    source: &GraphSource,
    order: &VertexOrder,
    k: u32,
    scratch_dir: &Path,
    meter: &MemoryMeter,
) -> Result<InitialDistribution> {
    if k < 3 {
        return Err(Error::Validation(format!("k must be at least 3, got {k}")));
    }
    if order.len() as u64 != source.n() {
        return Err(Error::Validation(format!(
            "order covers {} vertices, graph has {}",
            order.len(),
            source.n()
        )));
    }
    let n = order.len();
    let mut d_up = vec![0u32; n];
    let _charge = meter.charge_bytes(n as u64 * 4 + n as u64 + n as u64 * 8 * 2);
    let mut sorter = PairSorter::new(scratch_dir, 1 << 21, Some(meter));
    let mut push_err = None;
    source.scan(|e| {
        let (ru, rv) = (order.rank(e.u), order.rank(e.v));
        let (lo, hi, v) = if ru < rv {
            (ru, rv, e.u)
        } else {
            (rv, ru, e.v)
        };
        d_up[v as usize] += 1;
        if push_err.is_none() {
            if let Err(err) = sorter.push((lo, hi)) {
                push_err = Some(err);
            }
        }
    })?;
    if let Some(err) = push_err {
        return Err(err);
    }

    // Descending sweep: after all pairs with min-rank i are united, the
    // union-find holds exactly the edges of G(v_i), so the component size at
    // rank i answers positivity for v_i.
    let mut uf = UnionFind::new(n);
    let mut positive_by_rank = vec![false; n];
    let mut current: Option<u32> = None;
    sorter.finish(|i, j| {
        if let Some(prev) = current {
            if prev != i {
                positive_by_rank[prev as usize] = uf.component_size(prev as usize) >= k as usize;
            }
        }
        current = Some(i);
        uf.union(i as usize, j as usize);
    })?;
    if let Some(prev) = current {
        positive_by_rank[prev as usize] = uf.component_size(prev as usize) >= k as usize;
    }

    let mut positive = vec![false; n];
    for (rank, &flag) in positive_by_rank.iter().enumerate() {
        positive[order.vertex_at(rank) as usize] = flag;
    }
    let mut z = BigUint::zero();
    for v in 0..n {
        if positive[v] {
            z += BigUint::from(d_up[v]).pow(k - 1);
        }
    }
    Ok(InitialDistribution {
        k,
        d_up,
        positive,
        z,
    })
}

struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let grand = self.parent[self.parent[x] as usize];
            self.parent[x] = grand;
            x = grand as usize;
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
    }

    fn component_size(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r] as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edgestream::generate_er;
    use crate::oracle;
    use crate::testutil::*;

    fn scratch() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    #[test]
    fn up_degrees_on_worked_example() {
        let src = toy_source();
        let order = VertexOrder::from_sequence(vec![0, 2, 1, 4, 5, 3]).unwrap();
        let d = up_degrees(&src, &order).unwrap();
        assert_eq!(d[0], 3);
        assert_eq!(d.iter().map(|&x| x as u64).sum::<u64>(), src.m());
        // The last vertex in the order has an empty suffix beyond itself.
        assert_eq!(d[order.vertex_at(5) as usize], 0);
    }

    #[test]
    fn up_degrees_sum_to_m_for_any_order() {
        for seed in 0..5u64 {
            let src = generate_er(120, 700, seed, None).unwrap();
            let perm = shuffled_order(120, seed);
            let d = up_degrees(&src, &perm).unwrap();
            assert_eq!(d.iter().map(|&x| x as u64).sum::<u64>(), src.m());
        }
    }

    fn shuffled_order(n: usize, seed: u64) -> VertexOrder {
        let mut seq: Vec<u32> = (0..n as u32).collect();
        for i in (1..n).rev() {
            let j = (crate::rngkey::mix4(seed, 0x5AFE, i as u64, 0) % (i as u64 + 1)) as usize;
            seq.swap(i, j);
        }
        VertexOrder::from_sequence(seq).unwrap()
    }

    #[test]
    fn positivity_matches_exact_enumeration() {
        let dir = scratch();
        let meter = MemoryMeter::new();
        for seed in 0..6u64 {
            let src = generate_er(60, 150 + 30 * seed, seed, None).unwrap();
            let g = oracle::MemGraph::from_source(&src, 1000).unwrap();
            for k in [3u32, 4, 5] {
                let order = if seed % 2 == 0 {
                    oracle::exact_dd_order(&g)
                } else {
                    shuffled_order(60, seed)
                };
                let init = init_distribution(&src, &order, k, dir.path(), &meter).unwrap();
                let exact = oracle::exact_positivity_and_nv(&g, &order, k).unwrap();
                for v in 0..60 {
                    assert_eq!(init.positive[v], exact[v].0, "seed {seed} k {k} vertex {v}");
                    // A vertex with d_up >= k-1 owns a star of k vertices.
                    if init.d_up[v] >= k - 1 {
                        assert!(init.positive[v]);
                    }
                }
                // Fact: N_v >= d_up^(k-1)/(k-1)^(k-1) for positive vertices.
                for v in 0..60u32 {
                    if exact[v as usize].0 {
                        let lower = (init.d_up[v as usize] as f64).powi(k as i32 - 1)
                            / ((k - 1) as f64).powi(k as i32 - 1);
                        assert!(
                            exact[v as usize].1 as f64 >= lower - 1e-9,
                            "seed {seed} k {k} v {v}: N_v {} < {lower}",
                            exact[v as usize].1
                        );
                    }
                }
                // Z > 0 iff some graphlet exists.
                let total: u64 = exact.iter().map(|&(_, nv)| nv).sum();
                assert_eq!(init.is_empty(), total == 0, "seed {seed} k {k}");
            }
        }
    }

    #[test]
    fn isolated_vertices_are_negative() {
        let src = source_from_edges(4, &[(0, 1), (1, 2)]);
        let dir = scratch();
        let meter = MemoryMeter::new();
        let init =
            init_distribution(&src, &VertexOrder::identity(4), 3, dir.path(), &meter).unwrap();
        assert!(!init.positive[3]);
    }

    #[test]
    fn complete_graph_has_single_positive_root() {
        // In K_k under an exact order only the first vertex sees a full
        // suffix, so Z = (k-1)^(k-1) and its probability is 1.
        for k in [3u32, 4, 5] {
            let mut edges = Vec::new();
            for u in 0..k {
                for v in (u + 1)..k {
                    edges.push((u, v));
                }
            }
            let src = source_from_edges(k as u64, &edges);
            let dir = scratch();
            let meter = MemoryMeter::new();
            let order = VertexOrder::identity(k as usize);
            let init = init_distribution(&src, &order, k, dir.path(), &meter).unwrap();
            assert_eq!(init.positive, {
                let mut p = vec![false; k as usize];
                p[0] = true;
                p
            });
            assert_eq!(init.z, BigUint::from((k - 1) as u64).pow(k - 1));
            assert_eq!(init.prob(0), 1.0);
        }
    }

    #[test]
    fn z_is_zero_without_k_graphlets() {
        // A triangle has no 4-graphlet.
        let src = source_from_edges(3, &[(0, 1), (1, 2), (0, 2)]);
        let dir = scratch();
        let meter = MemoryMeter::new();
        let init =
            init_distribution(&src, &VertexOrder::identity(3), 4, dir.path(), &meter).unwrap();
        assert!(init.is_empty());
        assert!((0..3).all(|v| init.prob(v) == 0.0));
    }

    #[test]
    fn probabilities_sum_to_one() {
        let src = toy_source();
        let dir = scratch();
        let meter = MemoryMeter::new();
        let order = crate::ddorder::baseline_dd(&src, 0.1, &meter)
            .unwrap()
            .order;
        let init = init_distribution(&src, &order, 4, dir.path(), &meter).unwrap();
        let total: f64 = (0..6).map(|v| init.prob(v)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_pass_for_the_combined_computation() {
        let src = toy_source();
        let dir = scratch();
        let meter = MemoryMeter::new();
        let passes_before = src.passes();
        let _ = init_distribution(&src, &VertexOrder::identity(6), 4, dir.path(), &meter).unwrap();
        assert_eq!(src.passes() - passes_before, 1);
    }

    #[test]
    fn sidecar_round_trip() {
        let src = toy_source();
        let dir = scratch();
        let meter = MemoryMeter::new();
        let init =
            init_distribution(&src, &VertexOrder::identity(6), 4, dir.path(), &meter).unwrap();
        let path = dir.path().join("init.sidecar");
        init.write(&path).unwrap();
        let back = InitialDistribution::read(&path).unwrap();
        assert_eq!(back.k, init.k);
        assert_eq!(back.d_up, init.d_up);
        assert_eq!(back.positive, init.positive);
        assert_eq!(back.z, init.z);
    }
}
