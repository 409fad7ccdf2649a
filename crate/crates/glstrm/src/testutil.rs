//! Shared graph builders for unit tests.

use crate::edgestream::{EdgeRecord, GraphSource};
use crate::oracle::MemGraph;

pub fn source_from_edges(n: u64, edges: &[(u32, u32)]) -> GraphSource {
    let recs: Vec<EdgeRecord> = edges.iter().map(|&(a, b)| EdgeRecord::new(a, b)).collect();
    GraphSource::in_memory(n, recs)
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

pub fn toy_source() -> GraphSource {
    source_from_edges(6, &toy_edges())
}

pub fn toy_memgraph() -> MemGraph {
    MemGraph::from_edges(6, &toy_edges())
}

pub fn path_edges(n: u32) -> Vec<(u32, u32)> {
    (0..n.saturating_sub(1)).map(|v| (v, v + 1)).collect()
}

pub fn star_edges(leaves: u32) -> Vec<(u32, u32)> {
    (1..=leaves).map(|v| (0, v)).collect()
}
