//! Expansion measurements on the graph and on the leaf-layer bipartite pieces.

pub mod bipartite;
pub mod lanczos;

pub use bipartite::{bipartite_check, bipartite_delta, BipartiteGraph, BipartiteSummary, CheckMode, DrawVerdict, CHI};
pub use lanczos::{lanczos_top, LanczosResult};

use crate::graph::permute::derive_key;
use crate::graph::{Backend, GraphError, SunflowerGraph};
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashSet;

const TAG_GAP: u64 = 0x4741_5031;
const TAG_SUBSET: u64 = 0x5355_4253;

/// Graphs with fewer vertices use the dense eigensolver.
pub const DENSE_LIMIT: u64 = 5_000;
const LANCZOS_TOL: f64 = 1e-10;
const LANCZOS_MAX_ITER: usize = 2_000;

#[derive(Debug, thiserror::Error)]
pub enum ExpansionError {
    #[error("exhaustive check supports N ≤ {max}, got {n}")]
    ExhaustiveTooLarge { n: usize, max: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("{0}")]
    InvalidInput(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GapMethod {
    Dense,
    Lanczos,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GapReport {
    pub vertices: u64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// d − λ₂.
    pub gap: f64,
    /// gap·(log₂|V|)³.
    pub gap_polylog: f64,
    pub method: GapMethod,
    /// Lanczos Ritz residual bound, 0 for the dense route.
    pub residual: f64,
}

fn require_explicit(g: &SunflowerGraph) -> Result<(), ExpansionError> {
    if g.backend() != Backend::Explicit {
        return Err(GraphError::ImplicitBackendUnsupported.into());
    }
    Ok(())
}

fn dense_adjacency(g: &SunflowerGraph) -> Result<DMatrix<f64>, ExpansionError> {
    let adj = g.adjacency()?;
    let d = g.params().d();
    let nv = adj.len() / d;
    let mut a = DMatrix::zeros(nv, nv);
    for v in 0..nv {
        for &w in &adj[v * d..(v + 1) * d] {
            a[(v, w as usize)] += 1.0;
        }
    }
    Ok(a)
}

pub fn adjacency_gap(g: &SunflowerGraph) -> Result<GapReport, ExpansionError> {
    let method = if g.params().graph_vertices() < DENSE_LIMIT { GapMethod::Dense } else { GapMethod::Lanczos };
    adjacency_gap_with(g, method)
}

/// d − λ₂(A) by the chosen route.
pub fn adjacency_gap_with(g: &SunflowerGraph, method: GapMethod) -> Result<GapReport, ExpansionError> {
    require_explicit(g)?;
    let d = g.params().d() as f64;
    let nv = g.params().graph_vertices();
    let (lambda1, lambda2, residual) = match method {
        GapMethod::Dense => {
            let mut ev: Vec<f64> = dense_adjacency(g)?.symmetric_eigen().eigenvalues.iter().copied().collect();
            ev.sort_by(|a, b| b.total_cmp(a));
            (ev[0], ev[1], 0.0)
        }
        GapMethod::Lanczos => {
            let dim = nv as usize;
            let apply = |x: &[f64], y: &mut [f64]| g.adjacency_apply(x, y).expect("explicit backend");
            let mut rng = ChaCha8Rng::seed_from_u64(derive_key(g.params().seed(), &[TAG_GAP]));
            let start: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            // The uniform vector is the λ₁ = d eigenvector of every d-regular graph.
            let uniform = vec![1.0 / (dim as f64).sqrt(); dim];
            let mut au = vec![0.0; dim];
            apply(&uniform, &mut au);
            let lambda1 = au.iter().zip(&uniform).map(|(a, u)| a * u).sum::<f64>();
            let r = lanczos_top(apply, &start, &[uniform], LANCZOS_TOL, LANCZOS_MAX_ITER);
            (lambda1, r.value, r.residual)
        }
    };
    let gap = d - lambda2;
    Ok(GapReport {
        vertices: nv,
        lambda1,
        lambda2,
        gap,
        gap_polylog: gap * (nv as f64).log2().powi(3),
        method,
        residual,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SizeRow {
    pub size: usize,
    pub samples: u64,
    /// min |Γ(T)\T|/|T|.
    pub min_ratio: f64,
    pub mean_ratio: f64,
}

/// |Γ(T)\T| over structural indices.
pub fn vertex_boundary(g: &SunflowerGraph, t: &HashSet<u64>) -> usize {
    let mut out = HashSet::new();
    let mut nb = Vec::new();
    for &v in t {
        g.structural_neighbors(v, &mut nb);
        out.extend(nb.iter().copied().filter(|w| !t.contains(w)));
    }
    out.len()
}

/// Connected subset grown breadth-first from `start`, neighbors visited in random order.
fn grow_subset<R: Rng>(g: &SunflowerGraph, start: u64, size: usize, rng: &mut R) -> HashSet<u64> {
    let mut t = HashSet::from([start]);
    let mut queue = std::collections::VecDeque::from([start]);
    let mut nb = Vec::new();
    while let Some(v) = queue.pop_front() {
        g.structural_neighbors(v, &mut nb);
        nb.shuffle(rng);
        for &w in &nb {
            if t.len() >= size {
                return t;
            }
            if t.insert(w) {
                queue.push_back(w);
            }
        }
    }
    t
}

/// Trial k grows a subset of size `sizes[k % sizes.len()]`.
pub fn vertex_expansion_sample(g: &SunflowerGraph, trials: u64, sizes: &[usize], seed: u64) -> Result<Vec<SizeRow>, ExpansionError> {
    require_explicit(g)?;
    let nv = g.params().graph_vertices();
    if sizes.is_empty() || sizes.iter().any(|&s| s == 0 || s as u64 > nv / 2) {
        return Err(ExpansionError::InvalidInput(format!("subset sizes must lie in 1..={}", nv / 2)));
    }
    let ratios: Vec<(usize, f64)> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_key(seed, &[TAG_SUBSET]));
            rng.set_stream(k);
            let slot = k as usize % sizes.len();
            let t = grow_subset(g, rng.random_range(0..nv), sizes[slot], &mut rng);
            (slot, vertex_boundary(g, &t) as f64 / t.len() as f64)
        })
        .collect();
    Ok(sizes
        .iter()
        .enumerate()
        .map(|(slot, &size)| {
            let r: Vec<f64> = ratios.iter().filter(|(s, _)| *s == slot).map(|&(_, r)| r).collect();
            SizeRow {
                size,
                samples: r.len() as u64,
                min_ratio: r.iter().copied().fold(f64::INFINITY, f64::min),
                mean_ratio: r.iter().sum::<f64>() / r.len().max(1) as f64,
            }
        })
        .collect())
}

/// 1, 2, 4, … up to |V|/2.
pub fn default_sizes(vertices: u64) -> Vec<usize> {
    std::iter::successors(Some(1usize), |&s| Some(s * 2)).take_while(|&s| s as u64 <= vertices / 2).collect()
}

/// Boundary of one whole tree: (distinct boundary vertices, boundary edges 2 + (d−1)·L, tree size).
pub fn tree_boundary(g: &SunflowerGraph, tree: usize) -> (usize, u64, u64) {
    let p = g.params();
    let size = p.tree_size();
    let t: HashSet<u64> = (tree as u64 * size..(tree as u64 + 1) * size).collect();
    let edges = 2 + (p.d() as u64 - 1) * p.leaves_per_tree();
    (vertex_boundary(g, &t), edges, size)
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpansionReport {
    pub d: usize,
    pub m: usize,
    pub n: usize,
    pub guaranteed: bool,
    pub gap: GapReport,
    pub sizes: Vec<SizeRow>,
    pub min_ratio: f64,
    /// min ratio · n³ (the proof's 1/poly normalization).
    pub ratio_poly: f64,
    /// min ratio · (log₂|V|)³ (the statement's 1/polylog normalization).
    pub ratio_polylog: f64,
    pub chi: f64,
}

pub fn expansion_report(g: &SunflowerGraph, trials: u64, sizes: &[usize], seed: u64) -> Result<ExpansionReport, ExpansionError> {
    let p = g.params();
    let gap = adjacency_gap(g)?;
    let rows = vertex_expansion_sample(g, trials, sizes, seed)?;
    let min_ratio = rows.iter().map(|r| r.min_ratio).fold(f64::INFINITY, f64::min);
    Ok(ExpansionReport {
        d: p.d(),
        m: p.m(),
        n: p.n(),
        guaranteed: p.expansion_guaranteed(),
        gap,
        min_ratio,
        ratio_poly: min_ratio * (p.n() as f64).powi(3),
        ratio_polylog: min_ratio * (p.graph_vertices() as f64).log2().powi(3),
        sizes: rows,
        chi: CHI,
    })
}
