//! Spectrum of H̃ through the cycle ⊗ path factorization.
//!
//! Every eigenpair is λ_j(μ_l, γμ_l) with vector ψ_j ⊗ φ_l, where ψ_j comes
//! from the m×m tridiagonal H₁(μ_l, γμ_l). The dense solver in
//! [`dense_eigenvalues`] is kept only as an independent reference.

pub mod h1;
pub mod modes;
pub mod tridiag;

pub use h1::{h1_determinant, h1_determinant_closed, h1_inverse, h1_matrix};
pub use modes::{cycle_modes, psi1_squared, zero_modes, CycleMode, ZeroModes};
pub use tridiag::{symmetric_tridiagonal_eigen, TridiagEigen};

use crate::hamiltonian::EffectiveHamiltonian;
use nalgebra::DMatrix;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectralError {
    #[error("H1(a,b) is singular")]
    SingularMatrix,
    #[error("continued-fraction pivot vanished at position {index}")]
    ZeroPivot { index: usize },
}

/// Default threshold below which a computed eigenvalue is counted as 0.
pub const ZERO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct EigenPair {
    /// 1-based cycle index.
    pub l: usize,
    /// 1-based rank within H₁(μ_l, γμ_l), ascending.
    pub j: usize,
    pub mu: f64,
    pub lambda: f64,
    /// ‖H̃v − λv‖.
    pub residual: f64,
    #[serde(skip)]
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub d: usize,
    pub m: usize,
    pub n: usize,
    pub pairs: Vec<EigenPair>,
    pub zero_tol: f64,
    /// Smallest |λ| above `zero_tol`.
    pub delta: f64,
    pub zero_count: usize,
    /// Projector onto the span of the factorized eigenvectors counted as 0.
    pub pi0: DMatrix<f64>,
    pub modes: ZeroModes,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GapSummary {
    pub delta: f64,
    /// Δ·m·n².
    pub normalized: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DenseCheck {
    pub max_eigenvalue_deviation: f64,
    pub max_residual: f64,
}

pub fn factor_spectrum(h: &EffectiveHamiltonian) -> SpectrumReport {
    factor_spectrum_with_tol(h, ZERO_TOL)
}

pub fn factor_spectrum_with_tol(h: &EffectiveHamiltonian, zero_tol: f64) -> SpectrumReport {
    let (m, n) = (h.m, h.n);
    let w = &h.path;
    let mut pairs = Vec::with_capacity(m * n);
    let mut hv = vec![0.0; m * n];
    for mode in cycle_modes(n) {
        let diag = h1::h1_diagonal(mode.mu, w.gamma * mode.mu, w);
        let eig = symmetric_tridiagonal_eigen(&diag, &w.t);
        for (j, (lambda, psi)) in eig.values.iter().zip(&eig.vectors).enumerate() {
            let vector = modes::kron(psi, &mode.phi);
            h.apply(&vector, &mut hv);
            let residual = hv.iter().zip(&vector).map(|(a, v)| (a - lambda * v).powi(2)).sum::<f64>().sqrt();
            pairs.push(EigenPair { l: mode.l, j: j + 1, mu: mode.mu, lambda: *lambda, residual, vector });
        }
    }
    let dim = m * n;
    let mut pi0 = DMatrix::zeros(dim, dim);
    let mut zero_count = 0;
    let mut delta = f64::INFINITY;
    for p in &pairs {
        if p.lambda.abs() <= zero_tol {
            zero_count += 1;
            let v = nalgebra::DVector::from_column_slice(&p.vector);
            pi0 += &v * v.transpose();
        } else {
            delta = delta.min(p.lambda.abs());
        }
    }
    let modes = if n % 4 == 0 && m % 2 == 1 {
        zero_modes(h.d, m, n)
    } else {
        ZeroModes { psi: vec![], phi_even: vec![], phi_odd: vec![], eta_odd: vec![], eta_even: vec![] }
    };
    SpectrumReport { d: h.d, m, n, pairs, zero_tol, delta, zero_count, pi0, modes }
}

pub fn spectral_gap(report: &SpectrumReport) -> GapSummary {
    let (m, n) = (report.m as f64, report.n as f64);
    GapSummary { delta: report.delta, normalized: report.delta * m * n * n }
}

/// Ascending eigenvalues from a general dense symmetric solver.
pub fn dense_eigenvalues(h: &EffectiveHamiltonian) -> Vec<f64> {
    let mut v: Vec<f64> = h.dense.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

impl SpectrumReport {
    pub fn sorted_eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.pairs.iter().map(|p| p.lambda).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Compares the factorized spectrum with the dense reference as multisets.
    pub fn check_against_dense(&self, h: &EffectiveHamiltonian) -> DenseCheck {
        let dense = dense_eigenvalues(h);
        let dev = self.sorted_eigenvalues().iter().zip(&dense).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let res = self.pairs.iter().map(|p| p.residual).fold(0.0, f64::max);
        DenseCheck { max_eigenvalue_deviation: dev, max_residual: res }
    }

    /// Π₀ e_s.
    pub fn projected_start(&self) -> Vec<f64> {
        self.pi0.column(0).iter().copied().collect()
    }

    /// ‖Π₀ e_s‖² = (Π₀)_{00}.
    pub fn start_overlap_sq(&self) -> f64 {
        self.pi0[(0, 0)]
    }
}

/// |⟨η^odd|S_{i,1}⟩| and |⟨η^even|S_{i,1}⟩| for trees i = 1..n.
pub fn overlaps(report: &SpectrumReport) -> (Vec<f64>, Vec<f64>) {
    let n = report.n;
    let odd = report.modes.eta_odd.iter().take(n).map(|x| x.abs()).collect();
    let even = report.modes.eta_even.iter().take(n).map(|x| x.abs()).collect();
    (odd, even)
}

/// Max absolute row sum; never below the spectral norm of a symmetric matrix.
pub fn inf_norm_bound(m: &DMatrix<f64>) -> f64 {
    m.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_h_dims, PathWeights};

    #[test]
    fn smallest_instance() {
        let h = build_h_dims(3, 3, 4);
        let r = factor_spectrum(&h);
        assert_eq!(r.pairs.len(), 12);
        let mus: Vec<f64> = cycle_modes(4).iter().map(|c| c.mu).collect();
        assert_eq!(mus, vec![0.0, -2.0, 0.0, 2.0]);
        let s3 = 3f64.sqrt();
        let zero_block: Vec<f64> = r.pairs.iter().filter(|p| p.l == 1).map(|p| p.lambda).collect();
        for (a, b) in zero_block.iter().zip([-s3, 0.0, s3]) {
            assert!((a - b).abs() < 1e-14);
        }
        let c = r.check_against_dense(&h);
        assert!(c.max_eigenvalue_deviation <= 1e-9 && c.max_residual <= 1e-9);
        assert_eq!(r.zero_count, 2);
        let dense = dense_eigenvalues(&h);
        let want = dense.iter().filter(|x| x.abs() > 1e-9).map(|x| x.abs()).fold(f64::INFINITY, f64::min);
        assert!((spectral_gap(&r).delta - want).abs() < 1e-12);
    }

    #[test]
    fn figure_instance_zero_space() {
        let h = build_h_dims(3, 5, 8);
        let r = factor_spectrum(&h);
        assert_eq!(r.zero_count, 2);
        assert!((r.start_overlap_sq() - 0.125).abs() < 1e-12);
        assert!((&h.dense * &r.pi0).amax() <= 1e-10);
        let (odd, even) = overlaps(&r);
        for i in 0..8 {
            if i % 2 == 0 {
                assert!((odd[i] - 0.125f64.sqrt()).abs() < 1e-15);
                assert_eq!(even[i], 0.0);
            } else {
                assert_eq!(odd[i], 0.0);
                assert!((even[i] - 0.125f64.sqrt()).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn norm_bounds() {
        assert_eq!(inf_norm_bound(&DMatrix::identity(4, 4)), 1.0);
        let w = PathWeights::new(3, 5);
        assert!((inf_norm_bound(&h1_matrix(0.0, 0.0, &w)) - 2.0 * 2f64.sqrt()).abs() < 1e-15);
        for (d, m, n) in [(3, 5, 8), (7, 3, 4)] {
            let h = build_h_dims(d, m, n);
            let bound = inf_norm_bound(&h.dense);
            let df = d as f64;
            assert!((bound - (df - 1.0 + (df - 1.0).sqrt())).abs() < 1e-12);
            let top = *dense_eigenvalues(&h).last().unwrap();
            assert!((top - df).abs() < 1e-10);
            assert!(bound >= top);
        }
    }
}
