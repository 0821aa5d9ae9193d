//! Small dense helpers shared by the certificate and embedding code.

use nalgebra::{DMatrix, SymmetricEigen};

/// Smallest eigenvalue of a symmetric matrix.
pub(crate) fn min_eigenvalue(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    let sym = symmetrize(a);
    SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub(crate) fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// Determinants of the leading `k×k` blocks, `k = 1..=n`, each from its own
/// partially pivoted LU factorization.
pub(crate) fn leading_minors(a: &DMatrix<f64>) -> Vec<f64> {
    (1..=a.nrows())
        .map(|k| a.view((0, 0), (k, k)).clone_owned().determinant())
        .collect()
}

/// Pivots of unpivoted Gaussian elimination; pivot `k` equals
/// `M_{k+1} / M_k` whenever the preceding minors are nonzero.
pub(crate) fn elimination_pivots(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut m = a.clone();
    let mut pivots = Vec::with_capacity(n);
    for k in 0..n {
        let p = m[(k, k)];
        pivots.push(p);
        if p == 0.0 {
            break;
        }
        for i in (k + 1)..n {
            let f = m[(i, k)] / p;
            for j in k..n {
                m[(i, j)] -= f * m[(k, j)];
            }
        }
    }
    pivots
}
