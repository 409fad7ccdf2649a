//! External merge sort for fixed-width rank pairs.
//!
//! The order evaluator and the positivity sweep both need the edge list keyed
//! by rank pairs `(i, j)` in descending lexicographic order, which can exceed
//! memory. Records are accumulated into bounded in-memory runs, spilled to
//! scratch files sorted, and merged with a heap. A single run never touches
//! disk.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::memory::MemoryMeter;
use crate::Result;

/// Sorts `(u32, u32)` records descending and yields them to `consumer`.
pub struct PairSorter<'m> {
    scratch_dir: PathBuf,
    run_capacity: usize,
    buffer: Vec<(u32, u32)>,
    runs: Vec<PathBuf>,
    meter: Option<&'m MemoryMeter>,
}

impl<'m> PairSorter<'m> {
    /// `run_capacity` is in records (one record = one 8-byte word).
    pub fn new(scratch_dir: &Path, run_capacity: usize, meter: Option<&'m MemoryMeter>) -> Self {
        Self {
            scratch_dir: scratch_dir.to_path_buf(),
            run_capacity: run_capacity.max(1024),
            buffer: Vec::new(),
            runs: Vec::new(),
            meter,
        }
    }

    pub fn push(&mut self, record: (u32, u32)) -> Result<()> {
        self.buffer.push(record);
        if self.buffer.len() >= self.run_capacity {
            self.spill()?;
        }
        Ok(())
    }

    fn spill(&mut self) -> Result<()> {
        self.buffer.sort_unstable_by(|a, b| b.cmp(a));
        let path = self
            .scratch_dir
            .join(format!("glstrm-run-{}.tmp", self.runs.len()));
        let mut out = BufWriter::new(File::create(&path)?);
        for &(a, b) in &self.buffer {
            out.write_all(&a.to_le_bytes())?;
            out.write_all(&b.to_le_bytes())?;
        }
        out.flush()?;
        self.runs.push(path);
        self.buffer.clear();
        Ok(())
    }

    /// Completes the sort, feeding records to `consumer` in descending order.
    pub fn finish(mut self, mut consumer: impl FnMut(u32, u32)) -> Result<()> {
        let _charge = self
            .meter
            .map(|m| m.charge(self.buffer.len().min(self.run_capacity) as u64));
        if self.runs.is_empty() {
            self.buffer.sort_unstable_by(|a, b| b.cmp(a));
            for &(a, b) in &self.buffer {
                consumer(a, b);
            }
            return Ok(());
        }
        if !self.buffer.is_empty() {
            self.spill()?;
        }
        let mut readers: Vec<RunReader> = self
            .runs
            .iter()
            .map(|p| RunReader::open(p))
            .collect::<Result<_>>()?;
        let mut heap: BinaryHeap<(u32, u32, Reverse<usize>)> = BinaryHeap::new();
        for (idx, reader) in readers.iter_mut().enumerate() {
            if let Some((a, b)) = reader.next()? {
                heap.push((a, b, Reverse(idx)));
            }
        }
        while let Some((a, b, Reverse(idx))) = heap.pop() {
            consumer(a, b);
            if let Some((na, nb)) = readers[idx].next()? {
                heap.push((na, nb, Reverse(idx)));
            }
        }
        for path in &self.runs {
            let _ = std::fs::remove_file(path);
        }
        Ok(())
    }
}

struct RunReader {
    file: BufReader<File>,
}

impl RunReader {
    fn open(path: &Path) -> Result<Self> {
        Ok(Self {
            file: BufReader::with_capacity(1 << 16, File::open(path)?),
        })
    }

    fn next(&mut self) -> Result<Option<(u32, u32)>> {
        let mut rec = [0u8; 8];
        let mut filled = 0;
        while filled < 8 {
            let got = self.file.read(&mut rec[filled..])?;
            if got == 0 {
                if filled == 0 {
                    return Ok(None);
                }
                return Err(std::io::Error::new(
                    std::io::ErrorKind::UnexpectedEof,
                    "truncated scratch run",
                )
                .into());
            }
            filled += got;
        }
        Ok(Some((
            u32::from_le_bytes(rec[..4].try_into().unwrap()),
            u32::from_le_bytes(rec[4..].try_into().unwrap()),
        )))
    }
}
