//! Effective Hamiltonian on the symmetric subspace.
//!
//! Coordinates are ordered `j * n + i` (0-based layer j, tree i). In this
//! basis A restricted to the span of uniform layer states is
//! `(b₁b₁ᵀ + γ b_m b_mᵀ) ⊗ D0 + D1 ⊗ I`.

use crate::graph::{GraphError, SunflowerGraph};
use crate::params::GraphParams;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::io::Write;

/// Couplings of the path factor D1: t₁ = √(d−2), the rest √(d−1).
#[derive(Debug, Clone, PartialEq)]
pub struct PathWeights {
    pub d: usize,
    pub m: usize,
    pub t: Vec<f64>,
    pub gamma: f64,
}

impl PathWeights {
    pub fn new(d: usize, m: usize) -> Self {
        assert!(d >= 3 && m >= 2);
        let mut t = vec![((d - 1) as f64).sqrt(); m - 1];
        t[0] = ((d - 2) as f64).sqrt();
        PathWeights { d, m, t, gamma: (d - 1) as f64 / 2.0 }
    }
}

#[derive(Debug, Clone)]
pub struct EffectiveHamiltonian {
    pub d: usize,
    pub m: usize,
    pub n: usize,
    pub path: PathWeights,
    pub dense: DMatrix<f64>,
}

pub fn build_h(params: &GraphParams) -> EffectiveHamiltonian {
    build_h_dims(params.d(), params.m(), params.n())
}

pub fn build_h_dims(d: usize, m: usize, n: usize) -> EffectiveHamiltonian {
    let path = PathWeights::new(d, m);
    let dim = m * n;
    let mut h = DMatrix::zeros(dim, dim);
    let mut set = |a: usize, b: usize, v: f64| {
        h[(a, b)] = v;
        h[(b, a)] = v;
    };
    for i in 0..n {
        let next = (i + 1) % n;
        set(i, next, 1.0);
        set((m - 1) * n + i, (m - 1) * n + next, path.gamma);
        for j in 0..m - 1 {
            set(j * n + i, (j + 1) * n + i, path.t[j]);
        }
    }
    EffectiveHamiltonian { d, m, n, path, dense: h }
}

impl EffectiveHamiltonian {
    pub fn dim(&self) -> usize {
        self.m * self.n
    }

    /// Index of e_s, the root of the first tree.
    pub fn start_index(&self) -> usize {
        0
    }

    pub fn start_vector(&self) -> Vec<f64> {
        let mut e = vec![0.0; self.dim()];
        e[self.start_index()] = 1.0;
        e
    }

    /// Matrix-free y = H̃ x from the compact form.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let (m, n) = (self.m, self.n);
        for j in 0..m {
            let cycle = if j == 0 {
                1.0
            } else if j == m - 1 {
                self.path.gamma
            } else {
                0.0
            };
            for i in 0..n {
                let mut acc = 0.0;
                if cycle != 0.0 {
                    acc += cycle * (x[j * n + (i + n - 1) % n] + x[j * n + (i + 1) % n]);
                }
                if j > 0 {
                    acc += self.path.t[j - 1] * x[(j - 1) * n + i];
                }
                if j + 1 < m {
                    acc += self.path.t[j] * x[(j + 1) * n + i];
                }
                y[j * n + i] = acc;
            }
        }
    }

    /// Nonzero entries as 1-based (row, col, value) lines.
    pub fn write_triplets<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let dim = self.dim();
        let nnz = self.dense.iter().filter(|v| **v != 0.0).count();
        writeln!(w, "% effective hamiltonian d={} m={} n={}", self.d, self.m, self.n)?;
        writeln!(w, "{dim} {dim} {nnz}")?;
        for c in 0..dim {
            for r in 0..dim {
                let v = self.dense[(r, c)];
                if v != 0.0 {
                    writeln!(w, "{} {} {}", r + 1, c + 1, v)?;
                }
            }
        }
        Ok(())
    }
}

/// V_S x: weight x_{ij}/√s_j on every member of S_{i,j}.
pub fn embed(g: &SunflowerGraph, x: &[f64]) -> Vec<f64> {
    let p = g.params();
    let scale: Vec<f64> = (0..p.m()).map(|j| 1.0 / (p.layer_size(j) as f64).sqrt()).collect();
    (0..p.graph_vertices())
        .map(|v| {
            let c = g.coord_of(v);
            x[c.layer * p.n() + c.tree] * scale[c.layer]
        })
        .collect()
}

/// V_Sᵀ y.
pub fn project(g: &SunflowerGraph, y: &[f64]) -> Vec<f64> {
    let p = g.params();
    let mut out = vec![0.0; p.dim()];
    for (v, &val) in y.iter().enumerate() {
        let c = g.coord_of(v as u64);
        out[c.layer * p.n() + c.tree] += val / (p.layer_size(c.layer) as f64).sqrt();
    }
    out
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn diff_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// ‖A V_S x − V_S H̃ x‖ / ‖x‖.
pub fn invariance_residual(g: &SunflowerGraph, h: &EffectiveHamiltonian, x: &[f64]) -> Result<f64, GraphError> {
    let vx = embed(g, x);
    let mut avx = vec![0.0; vx.len()];
    g.adjacency_apply(&vx, &mut avx)?;
    let mut hx = vec![0.0; x.len()];
    h.apply(x, &mut hx);
    Ok(diff_norm(&avx, &embed(g, &hx)) / norm(x))
}

/// Max invariance residual over e_s, the first leaf state, and `trials` Gaussian vectors.
pub fn verify_invariance(
    g: &SunflowerGraph,
    h: &EffectiveHamiltonian,
    trials: usize,
    seed: u64,
) -> Result<f64, GraphError> {
    let dim = h.dim();
    let mut worst = 0.0f64;
    let mut fixed = vec![h.start_vector()];
    let mut leaf = vec![0.0; dim];
    leaf[(h.m - 1) * h.n] = 1.0;
    fixed.push(leaf);
    for x in &fixed {
        worst = worst.max(invariance_residual(g, h, x)?);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let x: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        worst = worst.max(invariance_residual(g, h, &x)?);
    }
    Ok(worst)
}

/// Residuals ‖(A/d)^k V_S e_s − V_S (H̃/d)^k e_s‖ for k = 0..=k_max.
///
/// Both operators are scaled by d = ‖A‖ so that the iterates stay bounded
/// and the residual measures the identity rather than f64 growth.
pub fn verify_restriction(g: &SunflowerGraph, h: &EffectiveHamiltonian, k_max: usize) -> Result<Vec<f64>, GraphError> {
    g.adjacency()?;
    let d = h.d as f64;
    let mut x = h.start_vector();
    let mut full = embed(g, &x);
    let mut tmp_x = vec![0.0; x.len()];
    let mut tmp_full = vec![0.0; full.len()];
    let mut out = vec![diff_norm(&full, &embed(g, &x))];
    for _ in 0..k_max {
        g.adjacency_apply(&full, &mut tmp_full)?;
        h.apply(&x, &mut tmp_x);
        for (a, b) in full.iter_mut().zip(&tmp_full) {
            *a = b / d;
        }
        for (a, b) in x.iter_mut().zip(&tmp_x) {
            *a = b / d;
        }
        out.push(diff_norm(&full, &embed(g, &x)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, Backend};
    use proptest::prelude::*;

    #[test]
    fn weights_and_entries() {
        let h = build_h_dims(3, 5, 8);
        assert_eq!(h.path.t[0], 1.0);
        assert!(h.path.t[1..].iter().all(|&t| t == 2f64.sqrt()));
        assert_eq!(h.path.gamma, 1.0);
        assert_eq!(build_h_dims(7, 3, 4).path.gamma, 3.0);
        assert_eq!(h.dense[(0, 1)], 1.0);
        assert_eq!(h.dense[(0, 7)], 1.0);
        assert_eq!(h.dense[(0, 8)], 1.0);
        assert_eq!(h.dense[(8, 16)], 2f64.sqrt());
        assert_eq!(h.dense[(8, 9)], 0.0);
        assert_eq!(h.dense, h.dense.transpose());
    }

    #[test]
    fn similarity_row_sums_equal_degree() {
        // Rows of diag(1/√s)·H̃·diag(√s) count neighbours, so each sums to d.
        for (d, m, n) in [(3, 3, 4), (3, 5, 8), (5, 7, 8), (7, 3, 12)] {
            let h = build_h_dims(d, m, n);
            let p = GraphParams::new(d as u64, m as u64, n as u64, 0, 0).unwrap();
            for r in 0..h.dim() {
                let sr = (p.layer_size(r / n) as f64).sqrt();
                let s: f64 = (0..h.dim())
                    .map(|c| h.dense[(r, c)] * (p.layer_size(c / n) as f64).sqrt() / sr)
                    .sum();
                assert!((s - d as f64).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn triplets_list_nonzeros() {
        let h = build_h_dims(3, 3, 4);
        let mut buf = Vec::new();
        h.write_triplets(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[1], "12 12 32");
        assert_eq!(lines.len(), 2 + 32);
    }

    #[test]
    fn invariance_on_figure_instance() {
        let p = GraphParams::new(3, 5, 8, 0, 4).unwrap();
        let g = build_graph(p, Backend::Explicit).unwrap();
        let h = build_h(&p);
        assert!(invariance_residual(&g, &h, &h.start_vector()).unwrap() <= 1e-10);
        assert!(verify_invariance(&g, &h, 100, 1).unwrap() <= 1e-10);
        let r = verify_restriction(&g, &h, 20).unwrap();
        assert_eq!(r[0], 0.0);
        assert!(r[1] <= 1e-10);
        assert!(r.iter().all(|&x| x <= 1e-8));
    }

    #[test]
    fn implicit_backend_refused() {
        let p = GraphParams::new(3, 5, 8, 0, 4).unwrap();
        let g = build_graph(p, Backend::Implicit).unwrap();
        let h = build_h(&p);
        assert!(verify_invariance(&g, &h, 1, 0).is_err());
        assert!(verify_restriction(&g, &h, 2).is_err());
    }

    #[test]
    fn independent_of_seed() {
        let a = build_h(&GraphParams::new(5, 5, 8, 0, 1).unwrap());
        let b = build_h(&GraphParams::new(5, 5, 8, 7, 99).unwrap());
        assert_eq!(a.dense, b.dense);
    }

    proptest! {
        #[test]
        fn structured_apply_matches_dense(
            dm in prop::sample::select(vec![(3usize, 3usize), (3, 5), (5, 5), (7, 3), (5, 7)]),
            n4 in 1usize..5,
            seed: u64,
        ) {
            let h = build_h_dims(dm.0, dm.1, 4 * n4);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<f64> = (0..h.dim()).map(|_| StandardNormal.sample(&mut rng)).collect();
            let mut y = vec![0.0; h.dim()];
            h.apply(&x, &mut y);
            let dense = &h.dense * nalgebra::DVector::from_vec(x);
            for (a, b) in y.iter().zip(dense.iter()) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }

        #[test]
        fn embedding_is_isometric(seed: u64, dm in prop::sample::select(vec![(3u64, 5u64), (5, 3), (3, 3)])) {
            let p = GraphParams::new(dm.0, dm.1, 8, 0, seed).unwrap();
            let g = build_graph(p, Backend::Implicit).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<f64> = (0..p.dim()).map(|_| StandardNormal.sample(&mut rng)).collect();
            let y: Vec<f64> = (0..p.dim()).map(|_| StandardNormal.sample(&mut rng)).collect();
            let ip: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
            let full: f64 = embed(&g, &x).iter().zip(embed(&g, &y)).map(|(a, b)| a * b).sum();
            prop_assert!((ip - full).abs() <= 1e-12 * (1.0 + ip.abs()));
            let back = project(&g, &embed(&g, &x));
            for (a, b) in back.iter().zip(&x) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }
    }
}
