//! The enlarged regular sunflower graph.
//!
//! Vertices carry a structural index `tree * tree_size + offset(layer) + member`
//! that never leaves this module except through the trusted accessors used by
//! the simulator. Everything an explorer sees goes through [`AdjacencyOracle`].

mod artifact;
mod census;
mod oracle;
pub mod permute;

pub use artifact::{GraphArtifact, ARTIFACT_SCHEMA};
pub use census::{closed_form_edges, supervertex_census, Census, CensusRow};
pub use oracle::{AdjacencyOracle, MeterSnapshot, Meters, OracleSession};

use crate::params::{GraphParams, ParamError};
use permute::{derive_key, KeyedPermutation};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::str::FromStr;

/// Materialization cap for the explicit backend.
pub const EXPLICIT_CAP: u64 = 10_000_000;

const TAG_LABEL: u64 = 0x4c_4142_454c;
const TAG_MATCH: u64 = 0x4d_4154_4348;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Explicit,
    Implicit,
}

impl FromStr for Backend {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "explicit" => Ok(Backend::Explicit),
            "implicit" => Ok(Backend::Implicit),
            other => Err(format!("unknown backend '{other}'")),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("explicit backend holds at most {cap} vertices, instance has {vertices}")]
    ExplicitTooLarge { vertices: u64, cap: u64 },
    #[error("operation needs the explicit backend")]
    ImplicitBackendUnsupported,
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("graph artifact i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed graph artifact: {0}")]
    Format(String),
    #[error("graph artifact does not match its rebuild: {0}")]
    ArtifactMismatch(String),
}

/// Structural position: 0-based tree, 0-based layer, member within the layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Coord {
    pub tree: usize,
    pub layer: usize,
    pub member: u64,
}

/// What a label refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelKind {
    Vertex(u64),
    Isolated,
    Unused,
    OutOfRange,
}

#[derive(Debug, Clone)]
enum Matchings {
    Keyed(Vec<KeyedPermutation>),
    Tables { fwd: Vec<Vec<u32>>, inv: Vec<Vec<u32>> },
}

/// Immutable after construction; meters are atomic so shared readers are fine.
#[derive(Debug)]
pub struct SunflowerGraph {
    params: GraphParams,
    backend: Backend,
    label_key: u64,
    labels: KeyedPermutation,
    offsets: Vec<u64>,
    tree_size: u64,
    matchings: Matchings,
    adjacency: Option<Vec<u32>>,
    s_label: u64,
    t_label: u64,
    meters: Meters,
}

pub fn build_graph(params: GraphParams, backend: Backend) -> Result<SunflowerGraph, GraphError> {
    let key = derive_key(params.seed(), &[TAG_LABEL]);
    build_graph_with_label_key(params, backend, key)
}

/// Same edge structure as [`build_graph`], labels drawn from `label_key`.
pub fn build_graph_with_label_key(
    params: GraphParams,
    backend: Backend,
    label_key: u64,
) -> Result<SunflowerGraph, GraphError> {
    let vertices = params.graph_vertices();
    if backend == Backend::Explicit && vertices > EXPLICIT_CAP {
        return Err(GraphError::ExplicitTooLarge { vertices, cap: EXPLICIT_CAP });
    }
    let n = params.n();
    let g = params.matchings();
    let leaves = params.leaves_per_tree();
    let mut offsets = Vec::with_capacity(params.m() + 1);
    let mut acc = 0;
    for j in 0..params.m() {
        offsets.push(acc);
        acc += params.layer_size(j);
    }
    offsets.push(acc);
    let matchings = match backend {
        Backend::Implicit => Matchings::Keyed(
            (0..n * g)
                .map(|p| {
                    let key = derive_key(params.seed(), &[TAG_MATCH, (p / g) as u64, (p % g) as u64]);
                    KeyedPermutation::new(leaves, key)
                })
                .collect(),
        ),
        Backend::Explicit => {
            let mut fwd = Vec::with_capacity(n * g);
            let mut inv = Vec::with_capacity(n * g);
            for p in 0..n * g {
                let key = derive_key(params.seed(), &[TAG_MATCH, (p / g) as u64, (p % g) as u64]);
                let mut rng = ChaCha8Rng::seed_from_u64(key);
                let mut perm: Vec<u32> = (0..leaves as u32).collect();
                perm.shuffle(&mut rng);
                let mut back = vec![0u32; leaves as usize];
                for (k, &v) in perm.iter().enumerate() {
                    back[v as usize] = k as u32;
                }
                fwd.push(perm);
                inv.push(back);
            }
            Matchings::Tables { fwd, inv }
        }
    };
    let labels = KeyedPermutation::new(1u64 << params.label_bits(), label_key);
    let mut graph = SunflowerGraph {
        params,
        backend,
        label_key,
        labels,
        tree_size: acc,
        offsets,
        matchings,
        adjacency: None,
        s_label: 0,
        t_label: 0,
        meters: Meters::default(),
    };
    graph.s_label = graph.label_at(Coord { tree: 0, layer: 0, member: 0 });
    graph.t_label = graph.label_at(Coord { tree: n / 2, layer: 0, member: 0 });
    if backend == Backend::Explicit {
        let d = params.d();
        let mut adj = Vec::with_capacity(vertices as usize * d);
        let mut buf = Vec::with_capacity(d);
        for v in 0..vertices {
            graph.structural_neighbors(v, &mut buf);
            adj.extend(buf.iter().map(|&w| w as u32));
        }
        graph.adjacency = Some(adj);
    }
    Ok(graph)
}

impl SunflowerGraph {
    pub fn params(&self) -> &GraphParams {
        &self.params
    }
    pub fn backend(&self) -> Backend {
        self.backend
    }
    pub fn label_key(&self) -> u64 {
        self.label_key
    }
    pub fn s_label(&self) -> u64 {
        self.s_label
    }
    pub fn t_label(&self) -> u64 {
        self.t_label
    }
    pub fn meters(&self) -> MeterSnapshot {
        self.meters.snapshot()
    }
    pub fn reset_meters(&self) {
        self.meters.reset();
    }
    pub(crate) fn meter_cell(&self) -> &Meters {
        &self.meters
    }

    pub fn sentinel(&self, k: usize) -> u64 {
        k as u64 + (1u64 << self.params.label_bits())
    }

    pub fn index_of(&self, c: Coord) -> u64 {
        debug_assert!(c.tree < self.params.n() && c.layer < self.params.m());
        debug_assert!(c.member < self.params.layer_size(c.layer));
        c.tree as u64 * self.tree_size + self.offsets[c.layer] + c.member
    }

    pub fn coord_of(&self, v: u64) -> Coord {
        debug_assert!(v < self.params.graph_vertices());
        let tree = (v / self.tree_size) as usize;
        let r = v % self.tree_size;
        let layer = self.offsets.partition_point(|&o| o <= r) - 1;
        Coord { tree, layer, member: r - self.offsets[layer] }
    }

    /// Supervertex index in the `layer * n + tree` ordering.
    pub fn supervertex_of(&self, v: u64) -> usize {
        let c = self.coord_of(v);
        c.layer * self.params.n() + c.tree
    }

    pub fn label_of(&self, v: u64) -> u64 {
        self.labels.apply(v)
    }

    pub fn label_at(&self, c: Coord) -> u64 {
        self.label_of(self.index_of(c))
    }

    pub fn classify(&self, label: u64) -> LabelKind {
        if label >= self.labels.size() {
            return LabelKind::OutOfRange;
        }
        let x = self.labels.invert(label);
        if x < self.params.graph_vertices() {
            LabelKind::Vertex(x)
        } else if x < self.params.total_vertices() {
            LabelKind::Isolated
        } else {
            LabelKind::Unused
        }
    }

    fn leaf_partner(&self, pair: usize, r: usize, k: u64, forward: bool) -> u64 {
        let g = self.params.matchings();
        let p = pair * g + r;
        match &self.matchings {
            Matchings::Keyed(perms) => {
                if forward {
                    perms[p].apply(k)
                } else {
                    perms[p].invert(k)
                }
            }
            Matchings::Tables { fwd, inv } => {
                if forward {
                    fwd[p][k as usize] as u64
                } else {
                    inv[p][k as usize] as u64
                }
            }
        }
    }

    /// Forward image of leaf `k` under matching `r` between trees `pair` and `pair+1`.
    pub fn matching_image(&self, pair: usize, r: usize, k: u64) -> u64 {
        self.leaf_partner(pair, r, k, true)
    }

    /// The `d` structural neighbors of `v` with multiplicity.
    pub fn structural_neighbors(&self, v: u64, out: &mut Vec<u64>) {
        out.clear();
        if let Some(adj) = &self.adjacency {
            let d = self.params.d();
            let s = v as usize * d;
            out.extend(adj[s..s + d].iter().map(|&w| w as u64));
            return;
        }
        let (d, m, n) = (self.params.d() as u64, self.params.m(), self.params.n());
        let c = self.coord_of(v);
        let at = |tree: usize, layer: usize, member: u64| self.index_of(Coord { tree, layer, member });
        let prev = (c.tree + n - 1) % n;
        let next = (c.tree + 1) % n;
        if c.layer == 0 {
            out.push(at(prev, 0, 0));
            out.push(at(next, 0, 0));
            out.extend((0..d - 2).map(|k| at(c.tree, 1, k)));
            return;
        }
        let parent = if c.layer == 1 { 0 } else { c.member / (d - 1) };
        out.push(at(c.tree, c.layer - 1, parent));
        if c.layer < m - 1 {
            out.extend((0..d - 1).map(|k| at(c.tree, c.layer + 1, c.member * (d - 1) + k)));
        } else {
            for r in 0..self.params.matchings() {
                out.push(at(next, m - 1, self.leaf_partner(c.tree, r, c.member, true)));
            }
            for r in 0..self.params.matchings() {
                out.push(at(prev, m - 1, self.leaf_partner(prev, r, c.member, false)));
            }
        }
    }

    /// Sorted distinct neighbor labels with multiplicities.
    pub(crate) fn neighbor_labels(&self, label: u64) -> Vec<(u64, u64)> {
        let LabelKind::Vertex(v) = self.classify(label) else {
            return Vec::new();
        };
        let mut buf = Vec::with_capacity(self.params.d());
        self.structural_neighbors(v, &mut buf);
        let mut labels: Vec<u64> = buf.iter().map(|&w| self.label_of(w)).collect();
        labels.sort_unstable();
        let mut out: Vec<(u64, u64)> = Vec::with_capacity(labels.len());
        for l in labels {
            match out.last_mut() {
                Some((last, c)) if *last == l => *c += 1,
                _ => out.push((l, 1)),
            }
        }
        out
    }

    pub(crate) fn neighbor_raw(&self, v: u64, k: usize) -> u64 {
        if k == 0 {
            return self.sentinel(k);
        }
        self.neighbor_labels(v).get(k - 1).map(|&(l, _)| l).unwrap_or_else(|| self.sentinel(k))
    }

    pub(crate) fn multiplicity_raw(&self, v: u64, w: u64) -> u64 {
        self.neighbor_labels(v).iter().find(|&&(l, _)| l == w).map(|&(_, c)| c).unwrap_or(0)
    }

    /// O_{G,1}: the k-th (1-based) distinct neighbor in label order, or the sentinel.
    pub fn oracle_neighbors(&self, v: u64, k: usize) -> u64 {
        self.meters.bump_neighbor();
        self.neighbor_raw(v, k)
    }

    /// O_{G,2}: edge multiplicity.
    pub fn oracle_multiplicity(&self, v: u64, w: u64) -> u64 {
        self.meters.bump_multiplicity();
        self.multiplicity_raw(v, w)
    }

    /// f_t.
    pub fn indicator_t(&self, v: u64) -> bool {
        self.meters.bump_indicator();
        v == self.t_label
    }

    pub fn adjacency(&self) -> Result<&[u32], GraphError> {
        self.adjacency.as_deref().ok_or(GraphError::ImplicitBackendUnsupported)
    }

    /// y = A x over structural indices.
    pub fn adjacency_apply(&self, x: &[f64], y: &mut [f64]) -> Result<(), GraphError> {
        let adj = self.adjacency()?;
        let d = self.params.d();
        for (v, out) in y.iter_mut().enumerate() {
            *out = adj[v * d..(v + 1) * d].iter().map(|&w| x[w as usize]).sum();
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g358(backend: Backend) -> SunflowerGraph {
        build_graph(GraphParams::new(3, 5, 8, 0, 11).unwrap(), backend).unwrap()
    }

    #[test]
    fn vertex_counts() {
        let g = g358(Backend::Explicit);
        assert_eq!(g.params().graph_vertices(), 128);
        assert_eq!(g.adjacency().unwrap().len(), 128 * 3);
        let small = build_graph(GraphParams::new(3, 3, 4, 0, 1).unwrap(), Backend::Explicit).unwrap();
        assert_eq!(small.params().graph_vertices(), 16);
        assert_eq!(small.params().leaves_per_tree(), 2);
        assert_eq!(small.params().matchings(), 1);
    }

    #[test]
    fn coordinates_round_trip() {
        let g = g358(Backend::Implicit);
        for v in 0..128 {
            assert_eq!(g.index_of(g.coord_of(v)), v);
        }
        assert_eq!(g.coord_of(16), Coord { tree: 1, layer: 0, member: 0 });
    }

    #[test]
    fn regular_with_multiplicity() {
        for backend in [Backend::Explicit, Backend::Implicit] {
            let g = g358(backend);
            for v in 0..128 {
                let l = g.label_of(v);
                let total: u64 = g.neighbor_labels(l).iter().map(|&(_, c)| c).sum();
                assert_eq!(total, 3);
            }
        }
    }

    #[test]
    fn adjacency_symmetric() {
        let g = build_graph(GraphParams::new(5, 5, 8, 0, 3).unwrap(), Backend::Explicit).unwrap();
        let mut buf = Vec::new();
        let mut back = Vec::new();
        for v in 0..g.params().graph_vertices() {
            g.structural_neighbors(v, &mut buf);
            for &w in &buf {
                g.structural_neighbors(w, &mut back);
                let fwd = buf.iter().filter(|&&x| x == w).count();
                let rev = back.iter().filter(|&&x| x == v).count();
                assert_eq!(fwd, rev);
            }
        }
    }

    #[test]
    fn explicit_and_keyed_structures_agree_on_trees() {
        let e = g358(Backend::Explicit);
        let i = g358(Backend::Implicit);
        let mut a = Vec::new();
        let mut b = Vec::new();
        for v in 0..128 {
            if e.coord_of(v).layer < 4 {
                e.structural_neighbors(v, &mut a);
                i.structural_neighbors(v, &mut b);
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn s_neighbors_are_two_roots_and_a_child() {
        let g = g358(Backend::Explicit);
        let got: Vec<u64> = (1..=3).map(|k| g.oracle_neighbors(g.s_label(), k)).collect();
        let mut want = vec![
            g.label_at(Coord { tree: 7, layer: 0, member: 0 }),
            g.label_at(Coord { tree: 1, layer: 0, member: 0 }),
            g.label_at(Coord { tree: 0, layer: 1, member: 0 }),
        ];
        want.sort_unstable();
        assert_eq!(got, want);
        assert_eq!(g.oracle_neighbors(g.s_label(), 4), g.sentinel(4));
        assert_eq!(g.meters().neighbor, 4);
    }

    #[test]
    fn isolated_and_unused_labels_answer_sentinel() {
        let p = GraphParams::new(3, 5, 8, 40, 5).unwrap();
        let g = build_graph(p, Backend::Implicit).unwrap();
        assert_eq!(p.label_bits(), 8);
        let iso = g.label_of(130);
        assert_eq!(g.classify(iso), LabelKind::Isolated);
        for k in 1..=3 {
            assert_eq!(g.oracle_neighbors(iso, k), k as u64 + 256);
        }
        assert_eq!(g.oracle_neighbors(1000, 1), 257);
        let unused = g.label_of(200);
        assert_eq!(g.classify(unused), LabelKind::Unused);
        assert_eq!(g.oracle_multiplicity(iso, g.s_label()), 0);
    }

    #[test]
    fn multiplicities_match_reference_examples() {
        let g = g358(Backend::Explicit);
        assert_eq!(g.oracle_multiplicity(g.s_label(), g.t_label()), 0);
        let r2 = g.label_at(Coord { tree: 1, layer: 0, member: 0 });
        assert_eq!(g.oracle_multiplicity(g.s_label(), r2), 1);
        assert!(g.indicator_t(g.t_label()));
        assert!(!g.indicator_t(g.s_label()));
        assert!(!g.indicator_t(g.sentinel(1)));
        let m = g.meters();
        assert_eq!((m.multiplicity, m.indicator), (2, 3));
    }

    #[test]
    fn explicit_cap_enforced() {
        let p = GraphParams::new(7, 11, 8, 0, 0).unwrap();
        assert!(matches!(build_graph(p, Backend::Explicit), Err(GraphError::ExplicitTooLarge { .. })));
        assert!(build_graph(p, Backend::Implicit).is_ok());
    }

    #[test]
    fn labels_injective_over_space() {
        let g = g358(Backend::Implicit);
        let mut seen = [false; 128];
        for v in 0..128 {
            let l = g.label_of(v) as usize;
            assert!(!seen[l]);
            seen[l] = true;
        }
    }

    #[test]
    fn deterministic_labels_and_answers() {
        let a = g358(Backend::Explicit);
        let b = g358(Backend::Explicit);
        assert_eq!(a.adjacency().unwrap(), b.adjacency().unwrap());
        for v in 0..128 {
            assert_eq!(a.label_of(v), b.label_of(v));
        }
    }
}
