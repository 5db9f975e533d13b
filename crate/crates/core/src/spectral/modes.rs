//! Eigenvectors of the cycle factor D0 and the closed-form 0-modes.

use crate::hamiltonian::PathWeights;
use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct CycleMode {
    /// 1-based, μ_l = 2cos(2πl/n).
    pub l: usize,
    pub mu: f64,
    pub phi: Vec<f64>,
}

/// μ_l with the exact zeros at 4l/n odd and exact ±2 at l = n/2, n.
pub fn cycle_eigenvalue(l: usize, n: usize) -> f64 {
    if (4 * l).is_multiple_of(n) {
        match (4 * l / n) % 4 {
            0 => 2.0,
            2 => -2.0,
            _ => 0.0,
        }
    } else {
        2.0 * (2.0 * PI * l as f64 / n as f64).cos()
    }
}

/// cos(iπ/2) pattern on 1-based tree i, written at 0-based slot i−1.
fn quarter_pattern(n: usize, sine: bool) -> Vec<f64> {
    let scale = 1.0 / (n as f64 / 2.0).sqrt();
    (1..=n)
        .map(|i| {
            let v = match (i % 4, sine) {
                (0, false) => 1.0,
                (2, false) => -1.0,
                (1, true) => 1.0,
                (3, true) => -1.0,
                _ => 0.0,
            };
            v * scale
        })
        .collect()
}

/// Orthonormal real eigenbasis of D0, one vector per l = 1..=n.
pub fn cycle_modes(n: usize) -> Vec<CycleMode> {
    assert!(n >= 3);
    let nf = n as f64;
    (1..=n)
        .map(|l| {
            let mu = cycle_eigenvalue(l, n);
            let phi = if n.is_multiple_of(4) && l == n / 4 {
                quarter_pattern(n, false)
            } else if n.is_multiple_of(4) && l == 3 * n / 4 {
                quarter_pattern(n, true)
            } else if l == n {
                vec![1.0 / nf.sqrt(); n]
            } else if 2 * l == n {
                (1..=n).map(|i| (if i % 2 == 0 { 1.0 } else { -1.0 }) / nf.sqrt()).collect()
            } else {
                let scale = (2.0 / nf).sqrt();
                let (freq, sine) = if 2 * l < n { (l, false) } else { (n - l, true) };
                (1..=n)
                    .map(|i| {
                        let th = 2.0 * PI * (freq * i) as f64 / nf;
                        scale * if sine { th.sin() } else { th.cos() }
                    })
                    .collect()
            };
            CycleMode { l, mu, phi }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct ZeroModes {
    pub psi: Vec<f64>,
    /// cos(iπ/2)/√(n/2): supported on even i.
    pub phi_even: Vec<f64>,
    /// sin(iπ/2)/√(n/2): supported on odd i.
    pub phi_odd: Vec<f64>,
    /// Ψ ⊗ Φ^odd, the 0-mode overlapping odd-i roots (s is i = 1).
    pub eta_odd: Vec<f64>,
    /// Ψ ⊗ Φ^even.
    pub eta_even: Vec<f64>,
}

/// Ψ_j = 0 at even j, Ψ_{2k+1} = −(t_{2k−1}/t_{2k}) Ψ_{2k−1}, unit norm with Ψ₁ > 0.
pub fn path_zero_mode(w: &PathWeights) -> Vec<f64> {
    assert!(w.m % 2 == 1, "0-mode exists for odd m");
    let mut psi = vec![0.0; w.m];
    psi[0] = 1.0;
    for j in (2..w.m).step_by(2) {
        psi[j] = -psi[j - 2] * w.t[j - 2] / w.t[j - 1];
    }
    let norm = psi.iter().map(|x| x * x).sum::<f64>().sqrt();
    psi.iter_mut().for_each(|x| *x /= norm);
    psi
}

/// |Ψ₁|² = 1/(1 + (d−2)(m−1)/(2(d−1))).
pub fn psi1_squared(d: usize, m: usize) -> f64 {
    let (d, m) = (d as f64, m as f64);
    1.0 / (1.0 + (d - 2.0) * (m - 1.0) / (2.0 * (d - 1.0)))
}

pub fn kron(psi: &[f64], phi: &[f64]) -> Vec<f64> {
    psi.iter().flat_map(|&p| phi.iter().map(move |&f| p * f)).collect()
}

pub fn zero_modes(d: usize, m: usize, n: usize) -> ZeroModes {
    assert!(n.is_multiple_of(4), "0-modes need n divisible by 4");
    let w = PathWeights::new(d, m);
    let psi = path_zero_mode(&w);
    let phi_even = quarter_pattern(n, false);
    let phi_odd = quarter_pattern(n, true);
    ZeroModes {
        eta_odd: kron(&psi, &phi_odd),
        eta_even: kron(&psi, &phi_even),
        psi,
        phi_even,
        phi_odd,
    }
}
