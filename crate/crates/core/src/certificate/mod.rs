//! Optimality certificates for the closed-form solution.
//!
//! The primal problem maximises `tr Γ / n` subject to `G − Γ_D ⪰ 0`,
//! `Γ ⪰ 0`; the dual minimises `tr(GZ) / n` subject to `Z ⪰ 0`,
//! `Z_kk ≥ 1`.  Any feasible primal point is a lower bound and any feasible
//! dual point an upper bound, so a matched pair with zero gap proves
//! optimality.  The dual points used here are rank one, `Z = |u⟩⟨u|`.

mod minors;
mod oracle;

pub use minors::{delta_k, kernel_reduce, minor_ratios, region_one_ratios, KernelResiduals, MinorFactors, MinorMismatch, MinorReport};
pub use oracle::{numeric_oracle, OracleResult, ORACLE_MAX_N};

use serde::{Deserialize, Serialize};

use crate::analytic::{self, Regime};
use crate::error::{Error, Result};
use crate::gram::{build_gram, GramMatrix, ProblemInstance};
use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Allowed negativity of eigenvalues, efficiencies and `u_k² − 1`.
    pub feasibility: f64,
    /// Allowed `|dual − primal|`.
    pub gap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            feasibility: 1e-10,
            gap: 1e-9,
        }
    }
}

/// A candidate diagonal `Γ_D` for the primal problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimalPoint {
    pub gammas: Vec<f64>,
    pub value: f64,
    pub min_gamma: f64,
    /// Smallest eigenvalue of `G − Γ_D`.
    pub min_eigenvalue: f64,
    pub feasible: bool,
}

/// A rank-one dual point `Z = |u⟩⟨u|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualWitness {
    pub u: Vec<f64>,
    /// `⟨u|G|u⟩ / n`.
    pub value: f64,
}

impl DualWitness {
    pub fn new(g: &GramMatrix, u: Vec<f64>) -> Result<Self> {
        if u.len() != g.n() {
            return Err(Error::LengthMismatch {
                expected: g.n(),
                got: u.len(),
            });
        }
        let value = g.quadratic_form(&u) / g.n() as f64;
        Ok(Self { u, value })
    }

    /// `u_k = (−1)^(k+1)`.
    pub fn alternating(g: &GramMatrix) -> Self {
        Self::new(g, alternating_vector(g.n())).expect("length matches")
    }

    /// The alternating vector with entries 2 and `n−1` stretched by `b`.
    ///
    /// For `n = 3` both stretches land on the middle entry, which becomes
    /// `−(2b − 1)`; this keeps `u′_k (G u′)_k` equal to the modified
    /// efficiencies.
    pub fn stretched(g: &GramMatrix, b: f64) -> Result<Self> {
        let n = g.n();
        if n < 3 {
            return Err(Error::WrongRegime {
                n,
                c: g.instance.c(),
                critical: 1.0,
                reason: "the stretched witness needs n >= 3",
            });
        }
        let mut u = alternating_vector(n);
        let base = u.clone();
        u[1] += (b - 1.0) * base[1];
        u[n - 2] += (b - 1.0) * base[n - 2];
        Self::new(g, u)
    }

    /// Efficiencies induced by this witness: `γ_k = u_k (G u)_k`.
    pub fn induced_efficiencies(&self, g: &GramMatrix) -> Vec<f64> {
        let u = nalgebra::DVector::from_column_slice(&self.u);
        let gu = &g.entries * &u;
        u.iter().zip(gu.iter()).map(|(a, b)| a * b).collect()
    }
}

fn alternating_vector(n: usize) -> Vec<f64> {
    (0..n).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect()
}

/// Outcome of [`check_dual`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualCheck {
    pub feasible: bool,
    pub value: f64,
    /// `min_k u_k²`.
    pub min_diagonal: f64,
}

pub fn check_primal(g: &GramMatrix, gammas: &[f64], tol: f64) -> Result<PrimalPoint> {
    if gammas.len() != g.n() {
        return Err(Error::LengthMismatch {
            expected: g.n(),
            got: gammas.len(),
        });
    }
    let min_gamma = gammas.iter().copied().fold(f64::INFINITY, f64::min);
    let min_eigenvalue = linalg::min_eigenvalue(&g.minus_diagonal(gammas));
    Ok(PrimalPoint {
        gammas: gammas.to_vec(),
        value: gammas.iter().sum::<f64>() / g.n() as f64,
        min_gamma,
        min_eigenvalue,
        feasible: min_gamma >= -tol && min_eigenvalue >= -tol,
    })
}

pub fn check_dual(g: &GramMatrix, witness: &DualWitness, tol: f64) -> Result<DualCheck> {
    if witness.u.len() != g.n() {
        return Err(Error::LengthMismatch {
            expected: g.n(),
            got: witness.u.len(),
        });
    }
    let min_diagonal = witness.u.iter().map(|x| x * x).fold(f64::INFINITY, f64::min);
    Ok(DualCheck {
        feasible: min_diagonal >= 1.0 - tol,
        value: g.quadratic_form(&witness.u) / g.n() as f64,
        min_diagonal,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalityCertificate {
    pub instance: ProblemInstance,
    pub regime: Regime,
    pub primal: PrimalPoint,
    pub dual: DualWitness,
    pub dual_check: DualCheck,
    /// `dual.value − primal.value`.
    pub gap: f64,
    pub primal_feasible: bool,
    pub dual_feasible: bool,
    pub tolerance: Tolerances,
    pub certified: bool,
}

/// Flat record of a certificate, the stable JSON/CSV schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateSummary {
    pub n: usize,
    pub c: f64,
    pub regime: Regime,
    pub primal_value: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub primal_feasible: bool,
    pub dual_feasible: bool,
    pub min_eigenvalue: f64,
    pub min_gamma: f64,
    pub min_dual_diagonal: f64,
    pub certified: bool,
}

impl OptimalityCertificate {
    pub fn summary(&self) -> CertificateSummary {
        CertificateSummary {
            n: self.instance.n(),
            c: self.instance.c(),
            regime: self.regime,
            primal_value: self.primal.value,
            dual_value: self.dual_check.value,
            gap: self.gap,
            primal_feasible: self.primal_feasible,
            dual_feasible: self.dual_feasible,
            min_eigenvalue: self.primal.min_eigenvalue,
            min_gamma: self.primal.min_gamma,
            min_dual_diagonal: self.dual_check.min_diagonal,
            certified: self.certified,
        }
    }
}

/// Pairs the closed-form efficiencies with their inducing dual vector and
/// checks both.
pub fn certify(instance: &ProblemInstance, tol: &Tolerances) -> Result<OptimalityCertificate> {
    if instance.is_degenerate() {
        return Err(Error::Degenerate {
            n: instance.n(),
            c: instance.c(),
            reason: "the Gram matrix is singular at c = 1",
        });
    }
    let g = build_gram(instance);
    let profile = analytic::optimal_efficiencies(instance)?;
    let witness = match profile.b {
        None => DualWitness::alternating(&g),
        Some(b) => DualWitness::stretched(&g, b)?,
    };
    let primal = check_primal(&g, profile.gammas(), tol.feasibility)?;
    let dual_check = check_dual(&g, &witness, tol.feasibility)?;
    let gap = dual_check.value - primal.value;
    let certified = primal.feasible && dual_check.feasible && gap.abs() <= tol.gap;
    Ok(OptimalityCertificate {
        instance: *instance,
        regime: profile.regime,
        primal_feasible: primal.feasible,
        dual_feasible: dual_check.feasible,
        primal,
        dual: witness,
        dual_check,
        gap,
        tolerance: *tol,
        certified,
    })
}
