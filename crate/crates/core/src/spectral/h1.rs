//! The path factor H₁(a,b): D1 with `a` in the first and `b` in the last diagonal slot.

use super::SpectralError;
use crate::hamiltonian::PathWeights;
use nalgebra::DMatrix;

pub fn h1_diagonal(a: f64, b: f64, w: &PathWeights) -> Vec<f64> {
    let mut diag = vec![0.0; w.m];
    diag[0] = a;
    diag[w.m - 1] = b;
    diag
}

pub fn h1_matrix(a: f64, b: f64, w: &PathWeights) -> DMatrix<f64> {
    let m = w.m;
    let mut h = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(h1_diagonal(a, b, w)));
    for i in 0..m - 1 {
        h[(i, i + 1)] = w.t[i];
        h[(i + 1, i)] = w.t[i];
    }
    h
}

/// β-recursion: β₀ = 1, β₁ = a, β_i = a_i β_{i−1} − t_{i−1}² β_{i−2}; returns β_m.
pub fn h1_determinant(a: f64, b: f64, w: &PathWeights) -> f64 {
    let diag = h1_diagonal(a, b, w);
    let (mut prev, mut cur) = (1.0, diag[0]);
    for i in 1..w.m {
        let next = diag[i] * cur - w.t[i - 1] * w.t[i - 1] * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Odd m: β_m = (−1)^{(m−1)/2} (d−1)^{(m−3)/2} [(d−2) b + (d−1) a].
pub fn h1_determinant_closed(a: f64, b: f64, w: &PathWeights) -> f64 {
    assert!(w.m % 2 == 1, "closed form holds for odd m");
    let d = w.d as f64;
    let sign = if ((w.m - 1) / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * (d - 1.0).powi((w.m as i32 - 3) / 2) * ((d - 2.0) * b + (d - 1.0) * a)
}

/// Inverse from the σ (backward) and δ (forward) continued-fraction recursions.
///
/// For i ≤ j: (H₁⁻¹)_{ij} = (−1)^{i+j} t_i⋯t_{j−1} σ_{j+1}⋯σ_m / (δ_i⋯δ_m).
pub fn h1_inverse(a: f64, b: f64, w: &PathWeights) -> Result<DMatrix<f64>, SpectralError> {
    if a == 0.0 {
        return Err(SpectralError::SingularMatrix);
    }
    let m = w.m;
    let diag = h1_diagonal(a, b, w);
    let t = &w.t;
    let mut sigma = vec![0.0; m];
    sigma[m - 1] = b;
    for i in (0..m - 1).rev() {
        if sigma[i + 1] == 0.0 {
            return Err(SpectralError::ZeroPivot { index: i + 2 });
        }
        sigma[i] = diag[i] - t[i] * t[i] / sigma[i + 1];
    }
    let mut delta = vec![0.0; m];
    delta[0] = a;
    for i in 1..m {
        if delta[i - 1] == 0.0 {
            return Err(SpectralError::ZeroPivot { index: i });
        }
        delta[i] = diag[i] - t[i - 1] * t[i - 1] / delta[i - 1];
    }
    if delta[m - 1] == 0.0 {
        return Err(SpectralError::SingularMatrix);
    }
    // suffix[k] = ∏_{q ≥ k}; index m holds the empty product.
    let mut sigma_tail = vec![1.0; m + 1];
    let mut delta_tail = vec![1.0; m + 1];
    for k in (0..m).rev() {
        sigma_tail[k] = sigma_tail[k + 1] * sigma[k];
        delta_tail[k] = delta_tail[k + 1] * delta[k];
    }
    let mut inv = DMatrix::zeros(m, m);
    for i in 0..m {
        let mut tprod = 1.0;
        for j in i..m {
            if j > i {
                tprod *= t[j - 1];
            }
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            let v = sign * tprod * sigma_tail[j + 1] / delta_tail[i];
            inv[(i, j)] = v;
            inv[(j, i)] = v;
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn three_by_three_determinant() {
        let w = PathWeights::new(3, 3);
        // [[2,1,0],[1,0,√2],[0,√2,2]]: 2(0−2) − 1(2−0) = −6.
        assert!((h1_determinant(2.0, 2.0, &w) + 6.0).abs() < 1e-12);
        assert!((h1_matrix(2.0, 2.0, &w).determinant() + 6.0).abs() < 1e-12);
    }

    #[test]
    fn singular_exactly_at_zero() {
        for (d, m) in [(3, 3), (3, 5), (5, 7), (7, 9)] {
            let w = PathWeights::new(d, m);
            assert_eq!(h1_determinant(0.0, 0.0, &w), 0.0);
            assert!(matches!(h1_inverse(0.0, 0.0, &w), Err(SpectralError::SingularMatrix)));
        }
    }

    #[test]
    fn closed_form_at_gamma_ratio() {
        let w = PathWeights::new(3, 5);
        for mu in [-2.0, -0.5, 0.7, 2.0] {
            assert!((h1_determinant(mu, w.gamma * mu, &w) - 6.0 * mu).abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let w = PathWeights::new(3, 5);
        let a = 2f64.sqrt();
        let inv = h1_inverse(a, w.gamma * a, &w).unwrap();
        let prod = h1_matrix(a, w.gamma * a, &w) * inv;
        assert!((prod - DMatrix::identity(5, 5)).amax() <= 1e-9);
    }

    #[test]
    fn two_by_two_inverse() {
        let w = PathWeights::new(3, 2);
        let inv = h1_inverse(2.0, 3.0, &w).unwrap();
        // [[2,1],[1,3]]⁻¹ = [[3,−1],[−1,2]]/5
        let want = DMatrix::from_row_slice(2, 2, &[0.6, -0.2, -0.2, 0.4]);
        assert!((inv - want).amax() < 1e-15);
    }

    #[test]
    fn zero_b_is_a_pivot_failure() {
        let w = PathWeights::new(3, 5);
        assert!(matches!(h1_inverse(1.0, 0.0, &w), Err(SpectralError::ZeroPivot { .. })));
    }

    proptest! {
        #[test]
        fn recursion_matches_lu(
            d in prop::sample::select(vec![3usize, 5, 7, 9]),
            m in 2usize..22,
            a in -3.0f64..3.0,
            b in -3.0f64..3.0,
        ) {
            let w = PathWeights::new(d, m);
            let beta = h1_determinant(a, b, &w);
            let lu = h1_matrix(a, b, &w).determinant();
            prop_assert!((beta - lu).abs() <= 1e-9 * lu.abs().max(1.0));
            if m % 2 == 1 {
                let closed = h1_determinant_closed(a, b, &w);
                prop_assert!((beta - closed).abs() <= 1e-9 * closed.abs().max(1.0));
            }
        }
    }
}
