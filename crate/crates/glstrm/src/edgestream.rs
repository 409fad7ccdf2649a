//! Replayable multi-pass edge sources.
//!
//! A [`GraphSource`] is the only access path to the graph: a cleaned,
//! deduplicated undirected edge list that is scanned sequentially, one full
//! scan per pass. Sources are either file-backed (the cleaned binary format
//! below) or in-memory (tests and small pipelines). Two scans of the same
//! source yield byte-identical record sequences.
//!
//! Cleaned binary format: magic `"GLSTRM1\0"`, then `n` and `m` as u64 LE,
//! then `m` records of two u32 LE vertex ids with `u < v`, in first-appearance
//! order of the raw input.

use std::cell::Cell;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::Error;
use crate::rngkey;
use crate::Result;

pub const MAGIC: &[u8; 8] = b"GLSTRM1\0";
const HEADER_LEN: u64 = 24;

/// One undirected edge of the cleaned graph, stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeRecord {
    pub u: u32,
    pub v: u32,
}

impl EdgeRecord {
    pub fn new(a: u32, b: u32) -> Self {
        debug_assert_ne!(a, b);
        if a < b {
            Self { u: a, v: b }
        } else {
            Self { u: b, v: a }
        }
    }
}

/// Raw input encodings accepted by [`ingest`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    /// Whitespace-separated integer pairs, one edge per line.
    Text,
    /// Consecutive 8-byte records of two u32 LE vertex ids.
    Binary,
}

#[derive(Debug)]
enum Backing {
    Memory(Arc<Vec<EdgeRecord>>),
    File(PathBuf),
}

/// A replayable edge-record source with pass and I/O accounting.
#[derive(Debug)]
pub struct GraphSource {
    n: u64,
    m: u64,
    backing: Backing,
    pass_counter: Cell<u64>,
    bytes_read: Cell<u64>,
}

impl GraphSource {
    /// Wraps an already-cleaned in-memory edge list.
    pub fn in_memory(n: u64, edges: Vec<EdgeRecord>) -> Self {
        debug_assert!(edges.iter().all(|e| e.u < e.v && (e.v as u64) < n));
        let m = edges.len() as u64;
        Self {
            n,
            m,
            backing: Backing::Memory(Arc::new(edges)),
            pass_counter: Cell::new(0),
            bytes_read: Cell::new(0),
        }
    }

    /// Opens a cleaned binary file, validating magic and header.
    pub fn open(path: &Path) -> Result<Self> {
        let mut file = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 8];
        file.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Parse {
                offset: 0,
                message: format!("bad magic in {}", path.display()),
            });
        }
        let mut word = [0u8; 8];
        file.read_exact(&mut word)?;
        let n = u64::from_le_bytes(word);
        file.read_exact(&mut word)?;
        let m = u64::from_le_bytes(word);
        let expected = HEADER_LEN + m * 8;
        let actual = std::fs::metadata(path)?.len();
        if actual != expected {
            return Err(Error::Parse {
                offset: actual.min(expected),
                message: format!("file length {actual}, header implies {expected}"),
            });
        }
        Ok(Self {
            n,
            m,
            backing: Backing::File(path.to_path_buf()),
            pass_counter: Cell::new(0),
            bytes_read: Cell::new(0),
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn passes(&self) -> u64 {
        self.pass_counter.get()
    }

    pub fn bytes_read(&self) -> u64 {
        self.bytes_read.get()
    }

    /// Scans every edge once, in stored order. Counts one pass on success;
    /// an I/O failure surfaces as [`Error::PartialPass`] and the partial scan
    /// is not counted.
    pub fn scan(&self, mut visitor: impl FnMut(EdgeRecord)) -> Result<()> {
        self.scan_chunks(|chunk| {
            for &e in chunk {
                visitor(e);
            }
            Ok(())
        })
    }

    /// Like [`scan`](Self::scan) but hands out contiguous runs of records so
    /// a consumer can fan a chunk out to worker threads within the pass.
    pub fn scan_chunks(&self, mut visitor: impl FnMut(&[EdgeRecord]) -> Result<()>) -> Result<()> {
        match &self.backing {
            Backing::Memory(edges) => {
                visitor(edges)?;
                self.bytes_read.set(self.bytes_read.get() + 8 * self.m);
            }
            Backing::File(path) => {
                let mut file = BufReader::with_capacity(1 << 20, File::open(path)?);
                let mut header = [0u8; HEADER_LEN as usize];
                file.read_exact(&mut header)
                    .map_err(|source| Error::PartialPass { source })?;
                let mut remaining = self.m;
                let mut buf = vec![0u8; 8 * 8192];
                let mut decoded = Vec::with_capacity(8192);
                while remaining > 0 {
                    let take = remaining.min(8192) as usize;
                    let bytes = &mut buf[..8 * take];
                    file.read_exact(bytes)
                        .map_err(|source| Error::PartialPass { source })?;
                    decoded.clear();
                    for rec in bytes.chunks_exact(8) {
                        let u = u32::from_le_bytes(rec[..4].try_into().unwrap());
                        let v = u32::from_le_bytes(rec[4..].try_into().unwrap());
                        decoded.push(EdgeRecord { u, v });
                    }
                    visitor(&decoded)?;
                    self.bytes_read.set(self.bytes_read.get() + 8 * take as u64);
                    remaining -= take as u64;
                }
            }
        }
        self.pass_counter.set(self.pass_counter.get() + 1);
        Ok(())
    }

    /// Collects all edges into memory. Guarded; for oracle-scale graphs only.
    pub fn collect_edges(&self, max_n: u64) -> Result<Vec<EdgeRecord>> {
        if self.n > max_n {
            return Err(Error::Guard(format!(
                "graph has {} vertices, in-memory guard is {max_n}",
                self.n
            )));
        }
        let mut edges = Vec::with_capacity(self.m as usize);
        self.scan(|e| edges.push(e))?;
        Ok(edges)
    }
}

/// Writes a cleaned edge list in the binary format.
pub fn write_cleaned(path: &Path, n: u64, edges: &[EdgeRecord]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(MAGIC)?;
    out.write_all(&n.to_le_bytes())?;
    out.write_all(&(edges.len() as u64).to_le_bytes())?;
    for e in edges {
        out.write_all(&e.u.to_le_bytes())?;
        out.write_all(&e.v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

/// Result of ingesting a raw edge list.
#[derive(Debug)]
pub struct Ingested {
    pub source: GraphSource,
    /// Original id of each dense vertex id, in first-appearance order.
    pub original_ids: Vec<u64>,
}

/// Ingests a raw byte stream into a cleaned source.
///
/// Self-loops, duplicate edges (in either orientation) and directions are
/// removed. Vertex ids are relabeled densely to `0..n-1` preserving
/// first-appearance order; edge order preserves first appearance. When `out`
/// is given the cleaned file is written there, the relabeling map goes to
/// `<out>.map` (one original id per line), and the returned source is
/// file-backed; otherwise it stays in memory.
pub fn ingest(raw: impl Read, format: InputFormat, out: Option<&Path>) -> Result<Ingested> {
    let mut reader = BufReader::new(raw);
    let mut dense: std::collections::HashMap<u64, u32> = std::collections::HashMap::new();
    let mut original_ids: Vec<u64> = Vec::new();
    let mut seen: std::collections::HashSet<u64> = std::collections::HashSet::new();
    let mut edges: Vec<EdgeRecord> = Vec::new();

    let mut add_edge = |a: u64, b: u64| -> Result<()> {
        if a == b {
            return Ok(());
        }
        let mut id = |orig: u64| -> Result<u32> {
            if let Some(&d) = dense.get(&orig) {
                return Ok(d);
            }
            let next = original_ids.len() as u64;
            if next > u32::MAX as u64 {
                return Err(Error::Capacity("more than 2^32 vertices".into()));
            }
            original_ids.push(orig);
            dense.insert(orig, next as u32);
            Ok(next as u32)
        };
        let da = id(a)?;
        let db = id(b)?;
        let e = EdgeRecord::new(da, db);
        let key = ((e.u as u64) << 32) | e.v as u64;
        if seen.insert(key) {
            edges.push(e);
        }
        Ok(())
    };

    match format {
        InputFormat::Text => {
            let mut offset: u64 = 0;
            let mut line = String::new();
            loop {
                line.clear();
                let len = reader.read_line(&mut line)?;
                if len == 0 {
                    break;
                }
                let line_start = offset;
                offset += len as u64;
                let trimmed = line.trim();
                if trimmed.is_empty() {
                    continue;
                }
                let mut it = trimmed.split_whitespace();
                let parse = |tok: Option<&str>| -> Result<u64> {
                    let tok = tok.ok_or(Error::Parse {
                        offset: line_start,
                        message: "expected two vertex ids".into(),
                    })?;
                    tok.parse().map_err(|_| Error::Parse {
                        offset: line_start,
                        message: format!("invalid vertex id {tok:?}"),
                    })
                };
                let a = parse(it.next())?;
                let b = parse(it.next())?;
                if it.next().is_some() {
                    return Err(Error::Parse {
                        offset: line_start,
                        message: "trailing tokens after edge".into(),
                    });
                }
                add_edge(a, b)?;
            }
        }
        InputFormat::Binary => {
            let mut offset: u64 = 0;
            let mut rec = [0u8; 8];
            loop {
                if reader.read(&mut rec[..1])? == 0 {
                    break;
                }
                reader.read_exact(&mut rec[1..]).map_err(|_| Error::Parse {
                    offset,
                    message: "truncated 8-byte edge record".into(),
                })?;
                let a = u32::from_le_bytes(rec[..4].try_into().unwrap()) as u64;
                let b = u32::from_le_bytes(rec[4..].try_into().unwrap()) as u64;
                add_edge(a, b)?;
                offset += 8;
            }
        }
    }

    let n = original_ids.len() as u64;
    let source = match out {
        Some(path) => {
            write_cleaned(path, n, &edges)?;
            let mut map = BufWriter::new(File::create(map_path(path))?);
            for orig in &original_ids {
                writeln!(map, "{orig}")?;
            }
            map.flush()?;
            GraphSource::open(path)?
        }
        None => GraphSource::in_memory(n, edges),
    };
    Ok(Ingested {
        source,
        original_ids,
    })
}

/// Sidecar path of the relabeling map for a cleaned file.
pub fn map_path(cleaned: &Path) -> PathBuf {
    let mut os = cleaned.as_os_str().to_os_string();
    os.push(".map");
    PathBuf::from(os)
}

/// Generates an Erdős–Rényi graph: each unordered pair is drawn independently
/// with probability `m_target / (n(n-1)/2)`. Deterministic given `seed`.
///
/// Pairs are visited in lexicographic order with geometric gap skipping, so
/// the cost is proportional to the number of edges produced.
pub fn generate_er(n: u64, m_target: u64, seed: u64, out: Option<&Path>) -> Result<GraphSource> {
    if n > u32::MAX as u64 {
        return Err(Error::Capacity("more than 2^32 vertices".into()));
    }
    let total_pairs = n * n.saturating_sub(1) / 2;
    if m_target > total_pairs {
        return Err(Error::Validation(format!(
            "m_target {m_target} exceeds the {total_pairs} unordered pairs"
        )));
    }
    let mut edges: Vec<EdgeRecord> = Vec::new();
    if total_pairs > 0 && m_target > 0 {
        let p = m_target as f64 / total_pairs as f64;
        if p >= 1.0 {
            for u in 0..n as u32 {
                for v in (u + 1)..n as u32 {
                    edges.push(EdgeRecord { u, v });
                }
            }
        } else {
            let ln_q = (1.0 - p).ln();
            let mut idx: u64 = 0;
            let mut draw: u64 = 0;
            // Skip to each successful pair with a geometric gap.
            loop {
                let u = rngkey::unit_f64(seed, 0xE5, draw, 0);
                draw += 1;
                let gap = ((1.0 - u).ln() / ln_q).floor();
                if !gap.is_finite() || gap >= (total_pairs - idx) as f64 {
                    break;
                }
                idx += gap as u64;
                if idx >= total_pairs {
                    break;
                }
                edges.push(pair_at(n, idx));
                idx += 1;
                if idx >= total_pairs {
                    break;
                }
            }
        }
    }
    match out {
        Some(path) => {
            write_cleaned(path, n, &edges)?;
            let mut map = BufWriter::new(File::create(map_path(path))?);
            for orig in 0..n {
                writeln!(map, "{orig}")?;
            }
            map.flush()?;
            GraphSource::open(path)
        }
        None => Ok(GraphSource::in_memory(n, edges)),
    }
}

/// Maps a linear index over unordered pairs (lexicographic order) to a pair.
fn pair_at(n: u64, idx: u64) -> EdgeRecord {
    // Row u starts at offset u*n - u*(u+1)/2.
    let offset = |u: u64| u * n - u * (u + 1) / 2;
    let mut u = {
        // Initial estimate from the quadratic; fix up below.
        let nf = n as f64;
        let disc = (2.0 * nf - 1.0) * (2.0 * nf - 1.0) - 8.0 * idx as f64;
        (((2.0 * nf - 1.0) - disc.max(0.0).sqrt()) / 2.0).floor() as u64
    };
    u = u.min(n - 2);
    while offset(u) > idx {
        u -= 1;
    }
    while u < n - 2 && offset(u + 1) <= idx {
        u += 1;
    }
    let v = idx - offset(u) + u + 1;
    EdgeRecord {
        u: u as u32,
        v: v as u32,
    }
}
