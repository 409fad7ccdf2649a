//! Classification of k-vertex graphs and distribution aggregation.
//!
//! Samples are classified by a permutation-minimal canonical code of their
//! induced adjacency matrix and aggregated either with Horvitz-Thompson
//! counters (each sample adds `1/p(S)` to its class) or with the rejection
//! baseline (each sample is accepted with probability `Γ/p(S)` and adds 1).

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::Error;
use crate::rngkey;
use crate::Result;

/// Largest graphlet size the classifier accepts (k! permutations each).
pub const MAX_K: u32 = 8;
/// Largest graphlet size for which the full class registry is enumerated.
pub const MAX_REGISTRY_K: u32 = 6;

/// Bit index of the unordered pair `(i, j)`, `i < j`, in row-major order over
/// the upper triangle. Pair `(0,1)` is the most significant bit of the code.
#[inline]
pub fn pair_bit(k: u32, i: u32, j: u32) -> u32 {
    debug_assert!(i < j && j < k);
    let c = k * (k - 1) / 2;
    let t = i * k - i * (i + 1) / 2 + (j - i - 1);
    c - 1 - t
}

/// True if the adjacency mask describes a connected graph on `k` vertices.
pub fn is_connected(k: u32, adj: u64) -> bool {
    if k == 0 {
        return false;
    }
    let mut visited = 1u32;
    let mut frontier = vec![0u32];
    while let Some(v) = frontier.pop() {
        for w in 0..k {
            if w != v && visited & (1 << w) == 0 {
                let (i, j) = if v < w { (v, w) } else { (w, v) };
                if adj >> pair_bit(k, i, j) & 1 == 1 {
                    visited |= 1 << w;
                    frontier.push(w);
                }
            }
        }
    }
    visited.count_ones() == k
}

/// Canonical code: the minimum, over all `k!` vertex permutations, of the
/// upper-triangular adjacency bit string read row-major.
///
/// Isomorphic inputs map to identical codes. Errors on disconnected input,
/// which guards against corrupted samples (growth only produces connected
/// sets).
pub fn canonical_code(k: u32, adj: u64) -> Result<u64> {
    if !(1..=MAX_K).contains(&k) {
        return Err(Error::Validation(format!("k={k} outside 1..={MAX_K}")));
    }
    if !is_connected(k, adj) {
        return Err(Error::Inconsistency(
            "canonicalize called on a disconnected graph".into(),
        ));
    }
    Ok(canonical_code_unchecked(k, adj))
}

fn canonical_code_unchecked(k: u32, adj: u64) -> u64 {
    let mut perm: Vec<u32> = (0..k).collect();
    let mut best = u64::MAX;
    permute(&mut perm, 0, &mut |p| {
        let mut code = 0u64;
        for i in 0..k {
            for j in (i + 1)..k {
                let (a, b) = if p[i as usize] < p[j as usize] {
                    (p[i as usize], p[j as usize])
                } else {
                    (p[j as usize], p[i as usize])
                };
                code = (code << 1) | (adj >> pair_bit(k, a, b) & 1);
            }
        }
        if code < best {
            best = code;
        }
    });
    best
}

fn permute(items: &mut [u32], start: usize, visit: &mut impl FnMut(&[u32])) {
    if start == items.len() {
        visit(items);
        return;
    }
    for i in start..items.len() {
        items.swap(start, i);
        permute(items, start + 1, visit);
        items.swap(start, i);
    }
}

/// The isomorphism classes of connected k-vertex graphs, indexed in ascending
/// canonical-code order so output files are comparable across runs.
pub struct ClassRegistry {
    k: u32,
    codes: Vec<u64>,
    index: HashMap<u64, u32>,
    /// Memo from raw adjacency mask to class index.
    memo: Mutex<HashMap<u64, u32>>,
}

impl ClassRegistry {
    /// Enumerates all connected graphs on `k` vertices (3 <= k <= 6) and
    /// canonicalizes them. Larger k would need 2^(k(k-1)/2) * k! work.
    pub fn enumerate(k: u32) -> Result<Self> {
        if !(3..=MAX_REGISTRY_K).contains(&k) {
            return Err(Error::Guard(format!(
                "class registry supports 3 <= k <= {MAX_REGISTRY_K}, got {k}"
            )));
        }
        let pairs = k * (k - 1) / 2;
        let mut set = std::collections::BTreeSet::new();
        for adj in 0..(1u64 << pairs) {
            if is_connected(k, adj) {
                set.insert(canonical_code_unchecked(k, adj));
            }
        }
        let codes: Vec<u64> = set.into_iter().collect();
        let index = codes
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, i as u32))
            .collect();
        Ok(Self {
            k,
            codes,
            index,
            memo: Mutex::new(HashMap::new()),
        })
    }

    /// Process-wide cached registries; enumeration is pure and per-k.
    pub fn shared(k: u32) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<u32, Arc<ClassRegistry>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap();
        if let Some(reg) = guard.get(&k) {
            return Ok(reg.clone());
        }
        let reg = Arc::new(Self::enumerate(k)?);
        guard.insert(k, reg.clone());
        Ok(reg)
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Number of isomorphism classes.
    pub fn class_count(&self) -> usize {
        self.codes.len()
    }

    pub fn code_of(&self, class_index: u32) -> u64 {
        self.codes[class_index as usize]
    }

    /// Classifies an adjacency mask, memoizing per distinct pattern.
    pub fn classify(&self, adj: u64) -> Result<u32> {
        if let Some(&idx) = self.memo.lock().unwrap().get(&adj) {
            return Ok(idx);
        }
        let code = canonical_code(self.k, adj)?;
        let idx = *self.index.get(&code).ok_or_else(|| {
            Error::Inconsistency(format!("canonical code {code:#x} missing from registry"))
        })?;
        self.memo.lock().unwrap().insert(adj, idx);
        Ok(idx)
    }

    pub fn index_of_code(&self, code: u64) -> Option<u32> {
        self.index.get(&code).copied()
    }
}

/// Per-class accumulators and the sample count that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionEstimate {
    pub counters: Vec<f64>,
    pub samples_used: u64,
}

impl DistributionEstimate {
    pub fn new(class_count: usize) -> Self {
        Self {
            counters: vec![0.0; class_count],
            samples_used: 0,
        }
    }

    pub fn add_weighted(&mut self, class_index: u32, weight: f64) {
        self.counters[class_index as usize] += weight;
        self.samples_used += 1;
    }

    /// Merges a shard. Counter aggregation is a commutative monoid; callers
    /// merge in fixed class order so results differ only by fp associativity.
    pub fn merge(&mut self, other: &DistributionEstimate) {
        assert_eq!(self.counters.len(), other.counters.len());
        for (a, b) in self.counters.iter_mut().zip(&other.counters) {
            *a += b;
        }
        self.samples_used += other.samples_used;
    }

    pub fn c_hat(&self) -> f64 {
        self.counters.iter().sum()
    }

    /// Normalized distribution, or `None` when no mass was accumulated.
    pub fn mu_hat(&self) -> Option<Vec<f64>> {
        let c = self.c_hat();
        if self.samples_used == 0 || c <= 0.0 {
            return None;
        }
        let mu: Vec<f64> = self.counters.iter().map(|&x| x / c).collect();
        debug_assert!((mu.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        Some(mu)
    }

    /// `C_hat / T`, the estimate of the total graphlet count L.
    pub fn l_estimate(&self) -> Option<f64> {
        if self.samples_used == 0 {
            None
        } else {
            Some(self.c_hat() / self.samples_used as f64)
        }
    }
}

/// Folds a stream of `(class_index, p_sample)` into Horvitz-Thompson counters.
pub fn counter_estimate(
    samples: impl IntoIterator<Item = (u32, f64)>,
    class_count: usize,
) -> Result<DistributionEstimate> {
    let mut est = DistributionEstimate::new(class_count);
    for (class, p) in samples {
        if !(p > 0.0) {
            return Err(Error::Inconsistency(format!(
                "sample probability {p} is not positive"
            )));
        }
        est.add_weighted(class, 1.0 / p);
    }
    Ok(est)
}

/// Rejection baseline: accepts each sample with probability `Γ/p(S)`.
pub struct RejectionEstimator {
    gamma: f64,
    estimate: DistributionEstimate,
    trials: u64,
    accepted: u64,
    seed: u64,
}

impl RejectionEstimator {
    /// `Γ = 1 / ((k-1)! (1+ε)^(k-1) Z)`, a lower bound on every `p(S)`.
    pub fn gamma(k: u32, epsilon: f64, z: f64) -> f64 {
        1.0 / (factorial(k - 1) * (1.0 + epsilon).powi(k as i32 - 1) * z)
    }

    pub fn new(class_count: usize, gamma: f64, seed: u64) -> Self {
        Self {
            gamma,
            estimate: DistributionEstimate::new(class_count),
            trials: 0,
            accepted: 0,
            seed,
        }
    }

    /// Offers one sample; returns whether it was accepted.
    pub fn offer(&mut self, class_index: u32, p_sample: f64) -> Result<bool> {
        if self.gamma > p_sample * (1.0 + 1e-12) {
            return Err(Error::Inconsistency(format!(
                "rejection floor {} exceeds sample probability {}",
                self.gamma, p_sample
            )));
        }
        let trial = self.trials;
        self.trials += 1;
        let accept = rngkey::bernoulli(self.seed, 0xACC, trial, 0, self.gamma / p_sample);
        if accept {
            self.estimate.add_weighted(class_index, 1.0);
            self.accepted += 1;
        } else {
            self.estimate.samples_used += 1;
        }
        Ok(accept)
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn accepted(&self) -> u64 {
        self.accepted
    }

    pub fn estimate(&self) -> &DistributionEstimate {
        &self.estimate
    }
}

pub fn factorial(x: u32) -> f64 {
    (1..=x as u64).map(|i| i as f64).product()
}

/// Number of samples sufficient for an L∞ error of `alpha` with failure
/// probability `delta`, given a `1/(1+epsilon)`-dominating order:
/// `ceil(12 ((k-1)!)^2 (k-1)^(2k-2) (1+ε)^(2k-2) / (α^2 (1-α)^2) · ln(4 m_k / δ))`.
pub fn required_samples(k: u32, epsilon: f64, alpha: f64, delta: f64, m_k: usize) -> u64 {
    assert!(alpha > 0.0 && alpha < 1.0 && delta > 0.0 && delta < 1.0);
    let fact = factorial(k - 1);
    let base = 12.0
        * fact
        * fact
        * ((k - 1) as f64).powi(2 * k as i32 - 2)
        * (1.0 + epsilon).powi(2 * k as i32 - 2);
    let t =
        base / (alpha * alpha * (1.0 - alpha) * (1.0 - alpha)) * (4.0 * m_k as f64 / delta).ln();
    t.ceil() as u64
}

/// `max_i |a_i - b_i|` over two distributions with the same class indexing.
pub fn linf_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Validation(format!(
            "distribution dimensions differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

/// Writes "class_index,canonical_code_hex,count,probability" with every class
/// present (probability 0 when unobserved).
pub fn write_estimate_csv(
    path: &Path,
    registry: &ClassRegistry,
    estimate: &DistributionEstimate,
) -> Result<()> {
    let mu = estimate
        .mu_hat()
        .unwrap_or_else(|| vec![0.0; registry.class_count()]);
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "class_index,canonical_code_hex,count,probability")?;
    for (i, &probability) in mu.iter().enumerate() {
        writeln!(
            out,
            "{},{:x},{},{}",
            i,
            registry.code_of(i as u32),
            estimate.counters[i],
            probability
        )?;
    }
    out.flush()?;
    Ok(())
}
