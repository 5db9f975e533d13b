//! Symmetric tridiagonal eigensolver: implicit QL with Wilkinson-type shifts.

#[derive(Debug, Clone)]
pub struct TridiagEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// `vectors[k]` pairs with `values[k]`; unit norm.
    pub vectors: Vec<Vec<f64>>,
}

const MAX_SWEEPS: usize = 60;

/// `off[i]` couples rows i and i+1.
pub fn symmetric_tridiagonal_eigen(diag: &[f64], off: &[f64]) -> TridiagEigen {
    let n = diag.len();
    if n == 0 {
        return TridiagEigen { values: vec![], vectors: vec![] };
    }
    assert_eq!(off.len() + 1, n, "off-diagonal length must be n-1");
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    // z[row * n + col]; column col is the running eigenvector.
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut mm = l;
            while mm + 1 < n {
                let dd = d[mm].abs() + d[mm + 1].abs();
                if e[mm].abs() <= f64::EPSILON * dd {
                    break;
                }
                mm += 1;
            }
            if mm == l {
                break;
            }
            sweeps += 1;
            assert!(sweeps <= MAX_SWEEPS, "tridiagonal QL failed to converge");
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[mm] - d[l] + e[l] / (g + if g >= 0.0 { r } else { -r });
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            for i in (l..mm).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[mm] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    let zk = z[k * n + i + 1];
                    z[k * n + i + 1] = s * z[k * n + i] + c * zk;
                    z[k * n + i] = c * z[k * n + i] - s * zk;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[mm] = 0.0;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    TridiagEigen {
        values: order.iter().map(|&k| d[k]).collect(),
        vectors: order.iter().map(|&k| (0..n).map(|r| z[r * n + k]).collect()).collect(),
    }
}
