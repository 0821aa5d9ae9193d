//! Independent numerical solution of the primal program for small `n`.
//!
//! Log-barrier path following on
//! `max tr Γ_D + μ [log det(G − Γ_D) + Σ log γ_k]`, with damped Newton
//! centering.  Every iterate is strictly feasible, so the final average is
//! a lower bound.  Near the central path `Z = μ (G − Γ_D)⁻¹` is almost dual
//! feasible; rescaling it so that `min Z_kk = 1` gives an upper bound.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::{build_gram, ProblemInstance};
use crate::linalg;

/// Largest `n` accepted by [`numeric_oracle`].
pub const ORACLE_MAX_N: usize = 8;

const MAX_NEWTON_STEPS: usize = 100_000;
const CENTERING_TOL: f64 = 1e-10;
const MAX_CENTERING_STEPS: usize = 200;
const MU_SHRINK: f64 = 0.1;
const MU_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    /// Average efficiency of a strictly feasible point.
    pub value: f64,
    /// Upper bound on the optimum from a rescaled dual point.
    pub upper: f64,
    pub gammas: Vec<f64>,
    pub iterations: usize,
}

fn interior(g: &DMatrix<f64>, gammas: &DVector<f64>) -> bool {
    gammas.iter().all(|&x| x > 0.0) && (g - DMatrix::from_diagonal(gammas)).cholesky().is_some()
}

/// `tr(G Z)/n` for `Z = μ S⁻¹ / min_k (μ S⁻¹)_kk`, a feasible dual point.
fn dual_bound(g: &DMatrix<f64>, gammas: &DVector<f64>, mu: f64) -> f64 {
    let slack = g - DMatrix::from_diagonal(gammas);
    let z = slack.cholesky().expect("interior").inverse() * mu;
    let min_diag = z.diagonal().min();
    (g * z).trace() / min_diag / g.nrows() as f64
}

/// Solves the primal program to within `resolution` in the average
/// efficiency.
pub fn numeric_oracle(instance: &ProblemInstance, resolution: f64) -> Result<OracleResult> {
    let n = instance.n();
    if n > ORACLE_MAX_N {
        return Err(Error::OracleTooLarge { n, max: ORACLE_MAX_N });
    }
    if instance.is_degenerate() {
        return Err(Error::Degenerate {
            n,
            c: instance.c(),
            reason: "the feasible set has empty interior at c = 1",
        });
    }
    if !(resolution > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "oracle resolution must be positive, got {resolution}"
        )));
    }

    let g = build_gram(instance).entries;
    let lam = linalg::min_eigenvalue(&g);
    let mut gammas = DVector::from_element(n, 0.5 * lam);
    let mut mu = 1.0;
    let mut iterations = 0;
    let mut upper = f64::INFINITY;

    loop {
        // Centering for the current μ.
        for _ in 0..MAX_CENTERING_STEPS {
            iterations += 1;
            if iterations > MAX_NEWTON_STEPS {
                return Err(Error::OracleNonConvergence {
                    iterations,
                    residual: mu,
                });
            }
            let slack = &g - DMatrix::from_diagonal(&gammas);
            let inv = slack
                .clone()
                .cholesky()
                .expect("iterates stay interior")
                .inverse();
            let grad = DVector::from_fn(n, |k, _| {
                1.0 / mu - inv[(k, k)] + 1.0 / gammas[k]
            });
            // Negative Hessian: (S⁻¹ ∘ S⁻¹) + diag(1/γ²).
            let neg_hess = DMatrix::from_fn(n, n, |i, j| {
                let d = if i == j { 1.0 / (gammas[i] * gammas[i]) } else { 0.0 };
                inv[(i, j)] * inv[(i, j)] + d
            });
            let step = match neg_hess.cholesky() {
                Some(ch) => ch.solve(&grad),
                None => {
                    return Err(Error::OracleNonConvergence {
                        iterations,
                        residual: mu,
                    })
                }
            };
            let decrement = grad.dot(&step);
            if decrement / 2.0 <= CENTERING_TOL {
                break;
            }
            // Damped Newton: 1/(1 + λ) keeps a self-concordant barrier
            // interior; full steps once the decrement is small.
            let lambda = decrement.sqrt();
            let mut t = if lambda > 0.25 { 1.0 / (1.0 + lambda) } else { 1.0 };
            loop {
                let trial = &gammas + &step * t;
                if interior(&g, &trial) {
                    gammas = trial;
                    break;
                }
                t *= 0.5;
                if t < 1e-16 {
                    return Err(Error::OracleNonConvergence {
                        iterations,
                        residual: mu,
                    });
                }
            }
        }

        let value = gammas.sum() / n as f64;
        // Rounding in S⁻¹ grows as μ shrinks, so keep the tightest bound.
        upper = upper.min(dual_bound(&g, &gammas, mu));
        if upper - value <= resolution {
            return Ok(OracleResult {
                value,
                upper,
                gammas: gammas.iter().copied().collect(),
                iterations,
            });
        }
        if mu < MU_FLOOR {
            return Err(Error::OracleNonConvergence {
                iterations,
                residual: upper - value,
            });
        }
        mu *= MU_SHRINK;
    }
}
