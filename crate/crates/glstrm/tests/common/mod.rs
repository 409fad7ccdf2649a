//! Graph builders shared by the integration suites.

use glstrm::edgestream::{EdgeRecord, GraphSource};
use glstrm::oracle::MemGraph;

pub fn source_from_edges(n: u64, edges: &[(u32, u32)]) -> GraphSource {
    let recs: Vec<EdgeRecord> = edges.iter().map(|&(a, b)| EdgeRecord::new(a, b)).collect();
    GraphSource::in_memory(n, recs)
}

pub fn memgraph(n: usize, edges: &[(u32, u32)]) -> MemGraph {
    MemGraph::from_edges(n, edges)
}

/// The worked toy graph: 6 vertices, 8 edges.
pub fn toy_edges() -> Vec<(u32, u32)> {
    vec![
        (0, 2),
        (0, 3),
        (0, 4),
        (1, 2),
        (1, 3),
        (1, 5),
        (2, 4),
        (2, 5),
    ]
}

pub fn path_edges(n: u32) -> Vec<(u32, u32)> {
    (0..n.saturating_sub(1)).map(|v| (v, v + 1)).collect()
}

pub fn star_edges(leaves: u32) -> Vec<(u32, u32)> {
    (1..=leaves).map(|v| (0, v)).collect()
}

pub fn grid_edges(rows: u32, cols: u32) -> Vec<(u32, u32)> {
    let mut edges = Vec::new();
    let id = |r: u32, c: u32| r * cols + c;
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((id(r, c), id(r, c + 1)));
            }
            if r + 1 < rows {
                edges.push((id(r, c), id(r + 1, c)));
            }
        }
    }
    edges
}

/// Mean and sample standard deviation.
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var.sqrt())
}

pub fn sample_variance(values: &[f64]) -> f64 {
    let (_, sd) = mean_sd(values);
    sd * sd
}
