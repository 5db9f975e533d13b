//! Minimax filtering polynomial R_ℓ(x;δ) = T_ℓ(y(x)) / T_ℓ(y(0)),
//! y(x) = −1 + 2(x² − δ²)/(1 − δ²).
//!
//! y(0) < −1, so T_ℓ(y(0)) grows like e^{ℓθ₀} with θ₀ = arccosh|y(0)|. Every
//! evaluation here works with ratios that stay bounded by 1 in magnitude.

use crate::hamiltonian::EffectiveHamiltonian;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FilterError {
    #[error("spectral gap must be positive, got {0}")]
    NonpositiveGap(f64),
    #[error("R_ℓ is evaluated on [-1, 1], got x = {0}")]
    DomainError(f64),
    #[error("invalid filter spec: {0}")]
    InvalidSpec(String),
}

pub fn max_delta() -> f64 {
    1.0 / 12f64.sqrt()
}

fn check_delta(delta: f64) -> Result<(), FilterError> {
    if delta > 0.0 && delta <= max_delta() * (1.0 + 1e-12) {
        Ok(())
    } else {
        Err(FilterError::InvalidSpec(format!("delta {delta} outside (0, 1/sqrt(12)]")))
    }
}

/// 2e^{−√2ℓδ}.
pub fn filter_bound(ell: usize, delta: f64) -> f64 {
    2.0 * (-(2f64.sqrt()) * ell as f64 * delta).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub ell: usize,
    pub delta: f64,
    pub alpha: f64,
    pub eps: f64,
    /// Bookkeeping only.
    pub eps_a: f64,
    /// Bookkeeping only.
    pub eps_prime: f64,
}

impl FilterSpec {
    /// δ = min(Δ/α, 1/√12), ℓ from [`choose_degree`].
    pub fn for_gap(gap: f64, alpha: f64, eps: f64, eps_a: f64, eps_prime: f64) -> Result<Self, FilterError> {
        let ell = choose_degree(gap, alpha, eps)?;
        Ok(FilterSpec { ell, delta: gap_delta(gap, alpha), alpha, eps, eps_a, eps_prime })
    }

    /// Fixed degree; eps is set to the bound it achieves.
    pub fn with_degree(ell: usize, delta: f64, alpha: f64) -> Result<Self, FilterError> {
        check_delta(delta)?;
        if ell == 0 || alpha <= 0.0 {
            return Err(FilterError::InvalidSpec("ell and alpha must be positive".into()));
        }
        Ok(FilterSpec { ell, delta, alpha, eps: filter_bound(ell, delta), eps_a: 0.0, eps_prime: 0.0 })
    }

    pub fn bound(&self) -> f64 {
        filter_bound(self.ell, self.delta)
    }
}

pub fn gap_delta(gap: f64, alpha: f64) -> f64 {
    (gap / alpha).min(max_delta())
}

/// Smallest ℓ ≥ 1 with 2e^{−√2ℓδ} ≤ eps.
pub fn choose_degree(gap: f64, alpha: f64, eps: f64) -> Result<usize, FilterError> {
    if !(gap > 0.0) {
        return Err(FilterError::NonpositiveGap(gap));
    }
    if !(eps > 0.0) || !(alpha > 0.0) {
        return Err(FilterError::InvalidSpec(format!("need eps > 0 and alpha > 0, got eps {eps}, alpha {alpha}")));
    }
    let delta = gap_delta(gap, alpha);
    let raw = (2.0 / eps).ln() / (2f64.sqrt() * delta);
    let mut ell = (raw.ceil() as usize).max(1);
    // ceil can overshoot by one when raw is an integer up to rounding.
    if ell > 1 && filter_bound(ell - 1, delta) <= eps {
        ell -= 1;
    }
    Ok(ell)
}

fn y_of(x: f64, delta: f64) -> f64 {
    let d2 = delta * delta;
    -1.0 + 2.0 * (x * x - d2) / (1.0 - d2)
}

pub fn eval_r(x: f64, ell: usize, delta: f64) -> Result<f64, FilterError> {
    if !(x.abs() <= 1.0) {
        return Err(FilterError::DomainError(x));
    }
    check_delta(delta)?;
    let l = ell as f64;
    let theta0 = (-y_of(0.0, delta)).acosh();
    let sign0 = if ell.is_multiple_of(2) { 1.0 } else { -1.0 };
    let y = y_of(x, delta);
    if y.abs() <= 1.0 {
        let inv_cosh = 2.0 * (-l * theta0).exp() / (1.0 + (-2.0 * l * theta0).exp());
        Ok(sign0 * (l * y.acos()).cos() * inv_cosh)
    } else {
        // Here y < −1 and both numerator and denominator carry the sign (−1)^ℓ.
        let theta = (-y).acosh();
        Ok((l * (theta - theta0)).exp() * (1.0 + (-2.0 * l * theta).exp()) / (1.0 + (-2.0 * l * theta0).exp()))
    }
}

/// R_ℓ(x;δ) by the scaled three-term recurrence; the independent route for [`eval_r`].
pub fn eval_r_recurrence(x: f64, ell: usize, delta: f64) -> f64 {
    let y = y_of(x, delta);
    let y0 = y_of(0.0, delta);
    let mut rho = 1.0 / y0;
    let (mut prev, mut cur) = (1.0, y * rho);
    for _ in 1..ell {
        let rho_next = 1.0 / (2.0 * y0 - rho);
        let next = 2.0 * y * cur * rho_next - prev * rho * rho_next;
        prev = cur;
        cur = next;
        rho = rho_next;
    }
    if ell == 0 {
        1.0
    } else {
        cur
    }
}

/// R_ℓ(H̃/α;δ) e_s by the vector form of the scaled recurrence.
pub fn apply_filter(h: &EffectiveHamiltonian, spec: &FilterSpec) -> Vec<f64> {
    apply_filter_to(h, spec, &h.start_vector())
}

pub fn apply_filter_to(h: &EffectiveHamiltonian, spec: &FilterSpec, v: &[f64]) -> Vec<f64> {
    let dim = h.dim();
    let d2 = spec.delta * spec.delta;
    let scale = 2.0 / (1.0 - d2);
    let a2 = spec.alpha * spec.alpha;
    let mut t1 = vec![0.0; dim];
    let mut t2 = vec![0.0; dim];
    // Y u = −u + (2/(1−δ²))(H̃²u/α² − δ²u).
    let mut apply_y = |u: &[f64], out: &mut Vec<f64>| {
        h.apply(u, &mut t1);
        h.apply(&t1, &mut t2);
        for k in 0..dim {
            out[k] = -u[k] + scale * (t2[k] / a2 - d2 * u[k]);
        }
    };
    let y0 = y_of(0.0, spec.delta);
    let mut rho = 1.0 / y0;
    let mut prev = v.to_vec();
    let mut cur = vec![0.0; dim];
    apply_y(&prev, &mut cur);
    cur.iter_mut().for_each(|c| *c *= rho);
    let mut yu = vec![0.0; dim];
    for _ in 1..spec.ell {
        let rho_next = 1.0 / (2.0 * y0 - rho);
        apply_y(&cur, &mut yu);
        for k in 0..dim {
            let next = 2.0 * yu[k] * rho_next - prev[k] * rho * rho_next;
            prev[k] = cur[k];
            cur[k] = next;
        }
        rho = rho_next;
    }
    cur
}

/// ς = 16ℓ²ε_A/α · [ln(2α/ε_A + 1) + 1]².
pub fn robustness_bound(ell: usize, eps_a: f64, alpha: f64) -> f64 {
    if eps_a == 0.0 {
        return 0.0;
    }
    let l = ell as f64;
    let bracket = (2.0 * alpha / eps_a + 1.0).ln() + 1.0;
    16.0 * l * l * eps_a / alpha * bracket * bracket
}
