//! Implicit-shift QL iteration for symmetric tridiagonal matrices.
//!
//! Only the first component of every eigenvector is tracked, which is all a
//! Gauss rule needs. Eigenvector signs are arbitrary; the weights are squares
//! of those components so the sign never matters.

use crate::error::{Error, Result};

/// Maximum QL sweeps spent on a single eigenvalue.
pub const MAX_SWEEPS: usize = 60;

/// Eigenvalues and first eigenvector components, in no particular order.
#[derive(Debug, Clone)]
pub struct TridiagEigen {
    pub values: Vec<f64>,
    pub first_components: Vec<f64>,
}

/// Diagonalizes the symmetric tridiagonal matrix with `diag` on the diagonal
/// and `offdiag[i]` coupling rows `i` and `i + 1`.
pub fn eigen_first_row(diag: &[f64], offdiag: &[f64]) -> Result<TridiagEigen> {
    let n = diag.len();
    assert!(
        n == 0 || offdiag.len() + 1 == n,
        "off-diagonal must have length n - 1"
    );
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(offdiag);
    let mut z = vec![0.0; n];
    if n > 0 {
        z[0] = 1.0;
    }

    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(Error::EigenNoConvergence {
                    index: l,
                    iterations: MAX_SWEEPS,
                });
            }

            // Wilkinson-type shift from the leading 2x2 block.
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0_f64, 1.0_f64, 0.0_f64);
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
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

                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    Ok(TridiagEigen {
        values: d,
        first_components: z,
    })
}
