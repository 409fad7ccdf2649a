//! Out-of-core estimation of the k-graphlet distribution of a massive graph.
//!
//! The engine never holds the input graph in memory. It reads a cleaned edge
//! list in sequential passes and combines three stages:
//!
//! 1. [`ddorder`] computes an approximate degree-dominating vertex order by
//!    peeling high-degree vertices, estimating degrees from sub-sampled
//!    digraphs so that several peeling rounds share a single pass.
//! 2. [`initdist`] derives per-vertex root-sampling weights from the order.
//! 3. [`sampler`] grows k-vertex connected subgraphs from sampled roots with
//!    one reservoir-sampled cut edge per pass, and [`estimator`] aggregates
//!    them into a distribution estimate with Horvitz-Thompson counters.
//!
//! [`oracle`] provides exact in-memory ground truth for small graphs so the
//! streaming path can be validated end to end.

pub mod ddorder;
pub mod edgestream;
pub mod error;
pub mod estimator;
pub mod extsort;
pub mod initdist;
pub mod memory;
pub mod oracle;
pub mod rngkey;
pub mod sampler;

#[cfg(test)]
pub(crate) mod testutil;

pub use ddorder::VertexOrder;
pub use edgestream::{EdgeRecord, GraphSource};
pub use error::Error;
pub use memory::MemoryMeter;

pub type Result<T> = std::result::Result<T, Error>;
