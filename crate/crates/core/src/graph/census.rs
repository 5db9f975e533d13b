//! Supervertex edge counts e_{ij,kl}, recounted from raw adjacency.

use super::{GraphError, SunflowerGraph};
use crate::params::GraphParams;
use serde::Serialize;

/// Closed-form e between supervertices (tree i, layer j) and (tree k, layer l), 0-based.
pub fn closed_form_edges(p: &GraphParams, (i, j): (usize, usize), (k, l): (usize, usize)) -> u64 {
    let n = p.n();
    let next = (i + 1) % n == k;
    let prev = (k + 1) % n == i;
    if i == k && j.abs_diff(l) == 1 {
        p.layer_size(j).max(p.layer_size(l))
    } else if j == 0 && l == 0 && (next || prev) {
        1
    } else if j == p.m() - 1 && l == j && (next || prev) {
        p.matchings() as u64 * p.leaves_per_tree()
    } else {
        0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CensusRow {
    /// 1-based tree and layer indices.
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub l: usize,
    pub counted: u64,
    pub closed_form: u64,
}

#[derive(Debug, Clone)]
pub struct Census {
    m: usize,
    n: usize,
    pub sizes: Vec<u64>,
    counted: Vec<u64>,
    closed: Vec<u64>,
}

impl Census {
    fn at(&self, a: usize, b: usize) -> usize {
        a * self.m * self.n + b
    }

    /// Counted edges between (i,j) and (k,l), 0-based.
    pub fn edges(&self, (i, j): (usize, usize), (k, l): (usize, usize)) -> u64 {
        self.counted[self.at(j * self.n + i, l * self.n + k)]
    }

    pub fn closed(&self, (i, j): (usize, usize), (k, l): (usize, usize)) -> u64 {
        self.closed[self.at(j * self.n + i, l * self.n + k)]
    }

    pub fn matches_closed_form(&self) -> bool {
        self.counted == self.closed
    }

    /// Nonzero entries, either side.
    pub fn rows(&self) -> Vec<CensusRow> {
        let dim = self.m * self.n;
        let mut out = Vec::new();
        for a in 0..dim {
            for b in 0..dim {
                let (c, f) = (self.counted[self.at(a, b)], self.closed[self.at(a, b)]);
                if c != 0 || f != 0 {
                    out.push(CensusRow {
                        i: a % self.n + 1,
                        j: a / self.n + 1,
                        k: b % self.n + 1,
                        l: b / self.n + 1,
                        counted: c,
                        closed_form: f,
                    });
                }
            }
        }
        out
    }
}

pub fn supervertex_census(g: &SunflowerGraph) -> Result<Census, GraphError> {
    let adj = g.adjacency()?;
    let p = *g.params();
    let (m, n, d) = (p.m(), p.n(), p.d());
    let dim = m * n;
    let mut counted = vec![0u64; dim * dim];
    let sv: Vec<usize> = (0..p.graph_vertices()).map(|v| g.supervertex_of(v)).collect();
    for (v, &a) in sv.iter().enumerate() {
        for &w in &adj[v * d..(v + 1) * d] {
            counted[a * dim + sv[w as usize]] += 1;
        }
    }
    let mut closed = vec![0u64; dim * dim];
    for a in 0..dim {
        for b in 0..dim {
            closed[a * dim + b] = closed_form_edges(&p, (a % n, a / n), (b % n, b / n));
        }
    }
    Ok(Census { m, n, sizes: (0..m).map(|j| p.layer_size(j)).collect(), counted, closed })
}
