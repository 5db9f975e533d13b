use super::SunflowerGraph;
use serde::{Deserialize, Serialize};
use std::cell::Cell;
use std::sync::atomic::{AtomicU64, Ordering};

#[derive(Debug, Default)]
pub struct Meters {
    neighbor: AtomicU64,
    multiplicity: AtomicU64,
    indicator: AtomicU64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeterSnapshot {
    pub neighbor: u64,
    pub multiplicity: u64,
    pub indicator: u64,
}

impl MeterSnapshot {
    pub fn adjacency_total(&self) -> u64 {
        self.neighbor + self.multiplicity
    }
}

impl Meters {
    pub(crate) fn bump_neighbor(&self) {
        self.neighbor.fetch_add(1, Ordering::Relaxed);
    }
    pub(crate) fn bump_multiplicity(&self) {
        self.multiplicity.fetch_add(1, Ordering::Relaxed);
    }
    pub(crate) fn bump_indicator(&self) {
        self.indicator.fetch_add(1, Ordering::Relaxed);
    }
    fn add(&self, s: MeterSnapshot) {
        self.neighbor.fetch_add(s.neighbor, Ordering::Relaxed);
        self.multiplicity.fetch_add(s.multiplicity, Ordering::Relaxed);
        self.indicator.fetch_add(s.indicator, Ordering::Relaxed);
    }
    pub fn snapshot(&self) -> MeterSnapshot {
        MeterSnapshot {
            neighbor: self.neighbor.load(Ordering::Relaxed),
            multiplicity: self.multiplicity.load(Ordering::Relaxed),
            indicator: self.indicator.load(Ordering::Relaxed),
        }
    }
    pub fn reset(&self) {
        self.neighbor.store(0, Ordering::Relaxed);
        self.multiplicity.store(0, Ordering::Relaxed);
        self.indicator.store(0, Ordering::Relaxed);
    }
}

/// The only view of a graph an explorer is given.
pub trait AdjacencyOracle {
    fn label_bits(&self) -> u32;
    fn degree(&self) -> usize;
    /// Label of the start vertex s.
    fn start(&self) -> u64;
    fn neighbor(&self, v: u64, k: usize) -> u64;
    fn multiplicity(&self, v: u64, w: u64) -> u64;
    fn is_target(&self, v: u64) -> bool;

    fn sentinel_floor(&self) -> u64 {
        1u64 << self.label_bits()
    }
}

impl AdjacencyOracle for SunflowerGraph {
    fn label_bits(&self) -> u32 {
        self.params().label_bits()
    }
    fn degree(&self) -> usize {
        self.params().d()
    }
    fn start(&self) -> u64 {
        self.s_label()
    }
    fn neighbor(&self, v: u64, k: usize) -> u64 {
        self.oracle_neighbors(v, k)
    }
    fn multiplicity(&self, v: u64, w: u64) -> u64 {
        self.oracle_multiplicity(v, w)
    }
    fn is_target(&self, v: u64) -> bool {
        self.indicator_t(v)
    }
}

/// Per-trial meter view. Counts locally, and adds its counts to the graph's
/// shared meters once on [`OracleSession::finish`] or drop.
pub struct OracleSession<'a> {
    graph: &'a SunflowerGraph,
    neighbor: Cell<u64>,
    multiplicity: Cell<u64>,
    indicator: Cell<u64>,
    reconciled: Cell<bool>,
}

impl<'a> OracleSession<'a> {
    pub fn new(graph: &'a SunflowerGraph) -> Self {
        OracleSession {
            graph,
            neighbor: Cell::new(0),
            multiplicity: Cell::new(0),
            indicator: Cell::new(0),
            reconciled: Cell::new(false),
        }
    }

    pub fn counts(&self) -> MeterSnapshot {
        MeterSnapshot {
            neighbor: self.neighbor.get(),
            multiplicity: self.multiplicity.get(),
            indicator: self.indicator.get(),
        }
    }

    pub fn finish(self) -> MeterSnapshot {
        let c = self.counts();
        self.reconcile();
        c
    }

    fn reconcile(&self) {
        if !self.reconciled.replace(true) {
            self.graph.meter_cell().add(self.counts());
        }
    }
}

impl Drop for OracleSession<'_> {
    fn drop(&mut self) {
        self.reconcile();
    }
}

impl AdjacencyOracle for OracleSession<'_> {
    fn label_bits(&self) -> u32 {
        self.graph.params().label_bits()
    }
    fn degree(&self) -> usize {
        self.graph.params().d()
    }
    fn start(&self) -> u64 {
        self.graph.s_label()
    }
    fn neighbor(&self, v: u64, k: usize) -> u64 {
        self.neighbor.set(self.neighbor.get() + 1);
        self.graph.neighbor_raw(v, k)
    }
    fn multiplicity(&self, v: u64, w: u64) -> u64 {
        self.multiplicity.set(self.multiplicity.get() + 1);
        self.graph.multiplicity_raw(v, w)
    }
    fn is_target(&self, v: u64) -> bool {
        self.indicator.set(self.indicator.get() + 1);
        v == self.graph.t_label()
    }
}
