//! Word-based accounting of algorithmic state.
//!
//! One word is 8 bytes. The meter tracks the memory the algorithms are
//! charged for in the streaming cost model: sampled digraph arcs, adjacency
//! caches, per-vertex arrays, counters and sampler instance state. Allocator
//! overhead and transient buffers are not modeled.

use std::cell::Cell;

#[derive(Debug, Default)]
pub struct MemoryMeter {
    current_words: Cell<u64>,
    peak_words: Cell<u64>,
}

impl MemoryMeter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers `words` of live state and returns a guard that releases it.
    pub fn charge(&self, words: u64) -> Reservation<'_> {
        let cur = self.current_words.get() + words;
        self.current_words.set(cur);
        if cur > self.peak_words.get() {
            self.peak_words.set(cur);
        }
        Reservation { meter: self, words }
    }

    /// Charges `bytes` rounded up to whole words.
    pub fn charge_bytes(&self, bytes: u64) -> Reservation<'_> {
        self.charge(bytes.div_ceil(8))
    }

    pub fn current_words(&self) -> u64 {
        self.current_words.get()
    }

    pub fn peak_words(&self) -> u64 {
        self.peak_words.get()
    }
}

/// RAII handle for a charged allocation.
#[derive(Debug)]
pub struct Reservation<'a> {
    meter: &'a MemoryMeter,
    words: u64,
}

impl Reservation<'_> {
    /// Grows the reservation in place (e.g. one word per sampled arc).
    pub fn grow(&mut self, words: u64) {
        self.words += words;
        let cur = self.meter.current_words.get() + words;
        self.meter.current_words.set(cur);
        if cur > self.meter.peak_words.get() {
            self.meter.peak_words.set(cur);
        }
    }

    pub fn words(&self) -> u64 {
        self.words
    }
}

impl Drop for Reservation<'_> {
    fn drop(&mut self) {
        self.meter
            .current_words
            .set(self.meter.current_words.get() - self.words);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peak_tracks_maximum_of_current() {
        let meter = MemoryMeter::new();
        {
            let _a = meter.charge(100);
            assert_eq!(meter.current_words(), 100);
            {
                let mut b = meter.charge(50);
                b.grow(25);
                assert_eq!(meter.current_words(), 175);
            }
            assert_eq!(meter.current_words(), 100);
        }
        assert_eq!(meter.current_words(), 0);
        assert_eq!(meter.peak_words(), 175);
    }

    #[test]
    fn charge_bytes_rounds_up() {
        let meter = MemoryMeter::new();
        let r = meter.charge_bytes(9);
        assert_eq!(r.words(), 2);
    }
}
