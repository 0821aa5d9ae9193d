//! Hypothesis states, their Gram matrix and the unambiguous POVM.
//!
//! The hypothesis `|Ψ_k⟩ = |0…0 φ…φ⟩` has its first mutated particle at
//! position `k` (1-based).  Two hypotheses `i`, `j` differ on `|i-j|` sites,
//! so `⟨Ψ_i|Ψ_j⟩ = c^|i-j|`.  Everything here lives in the `n`-dimensional
//! span of the hypotheses: the states are the columns of an upper-triangular
//! `R` with `RᵀR = G`, and the reciprocal states are the rows of `R⁻¹`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Pivots of the triangular factor below this value are reported as an
/// ill-conditioned embedding.
pub const PIVOT_FLOOR: f64 = 1e-13;

/// Default tolerance on the smallest eigenvalue of `E₀`.
pub const PSD_TOLERANCE: f64 = 1e-10;

/// A change point discrimination task: `n` particles, overlap `c = ⟨0|φ⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    n: usize,
    c: f64,
}

impl ProblemInstance {
    pub fn new(n: usize, c: f64) -> Result<Self> {
        if n < 2 || !(0.0..=1.0).contains(&c) {
            return Err(Error::InvalidInstance { n, c });
        }
        Ok(Self { n, c })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// All hypotheses coincide at `c = 1`.
    pub fn is_degenerate(&self) -> bool {
        self.c == 1.0
    }
}

/// `G_ij = c^|i-j|`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub instance: ProblemInstance,
    pub entries: DMatrix<f64>,
}

impl GramMatrix {
    pub fn n(&self) -> usize {
        self.instance.n()
    }

    /// Quadratic form `⟨u|G|u⟩`.
    pub fn quadratic_form(&self, u: &[f64]) -> f64 {
        let u = DVector::from_column_slice(u);
        (u.transpose() * &self.entries * &u)[(0, 0)]
    }

    /// `G − diag(γ)`.
    pub fn minus_diagonal(&self, gammas: &[f64]) -> DMatrix<f64> {
        let mut a = self.entries.clone();
        for (k, g) in gammas.iter().enumerate() {
            a[(k, k)] -= g;
        }
        a
    }
}

pub fn build_gram(instance: &ProblemInstance) -> GramMatrix {
    let n = instance.n();
    let c = instance.c();
    let powers: Vec<f64> = (0..n).map(|d| c.powi(d as i32)).collect();
    let entries = DMatrix::from_fn(n, n, |i, j| powers[i.abs_diff(j)]);
    GramMatrix {
        instance: *instance,
        entries,
    }
}

/// Concrete coordinates of the hypothesis and reciprocal states.
#[derive(Debug, Clone, PartialEq)]
pub struct StateEmbedding {
    pub instance: ProblemInstance,
    /// Upper-triangular `R` with `RᵀR = G`; column `k` is `|Ψ_k⟩`.
    pub r_factor: DMatrix<f64>,
    /// Row `k` of `R⁻¹`, i.e. `|Φ̃_k⟩`, with `⟨Φ̃_k|Ψ_l⟩ = δ_kl`.
    pub reciprocal_vectors: Vec<DVector<f64>>,
    r_inverse: DMatrix<f64>,
}

impl StateEmbedding {
    pub fn n(&self) -> usize {
        self.instance.n()
    }

    /// Coordinates of `|Ψ_l⟩` (0-based `l`).
    pub fn state(&self, l: usize) -> DVector<f64> {
        self.r_factor.column(l).clone_owned()
    }

    pub fn r_inverse(&self) -> &DMatrix<f64> {
        &self.r_inverse
    }

    /// `(R⁻¹)ᵀ R⁻¹ = Σ_k |Φ̃_k⟩⟨Φ̃_k|`.
    pub fn reciprocal_frame_operator(&self) -> DMatrix<f64> {
        self.r_inverse.transpose() * &self.r_inverse
    }

    /// Pairwise overlaps `⟨Φ̃_k|Φ̃_l⟩`, which equal `G⁻¹`.
    pub fn reciprocal_gram(&self) -> DMatrix<f64> {
        &self.r_inverse * self.r_inverse.transpose()
    }
}

/// Factors `G = RᵀR` with `R` upper triangular.
pub fn factor_embedding(g: &GramMatrix) -> Result<StateEmbedding> {
    let n = g.n();
    if g.instance.is_degenerate() {
        return Err(Error::SingularGram { n });
    }
    let a = &g.entries;
    let mut r = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        for i in 0..j {
            let mut s = a[(i, j)];
            for k in 0..i {
                s -= r[(k, i)] * r[(k, j)];
            }
            r[(i, j)] = s / r[(i, i)];
        }
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= r[(k, j)] * r[(k, j)];
        }
        let pivot = d.max(0.0).sqrt();
        if !(pivot >= PIVOT_FLOOR) {
            return Err(Error::IllConditioned {
                index: j,
                pivot,
                floor: PIVOT_FLOOR,
            });
        }
        r[(j, j)] = pivot;
    }

    let r_inverse = r
        .clone()
        .solve_upper_triangular(&DMatrix::identity(n, n))
        .ok_or(Error::SingularGram { n })?;
    let reciprocal_vectors = (0..n)
        .map(|k| r_inverse.row(k).transpose().clone_owned())
        .collect();

    Ok(StateEmbedding {
        instance: g.instance,
        r_factor: r,
        reciprocal_vectors,
        r_inverse,
    })
}

/// Unambiguous POVM `E_k = γ_k |Φ̃_k⟩⟨Φ̃_k|`, `E₀ = 1 − Σ E_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    pub elements: Vec<DMatrix<f64>>,
    pub inconclusive: DMatrix<f64>,
    pub gammas: Vec<f64>,
    /// Smallest eigenvalue of `E₀`.
    pub inconclusive_min_eigenvalue: f64,
}

impl Povm {
    /// Outcome probabilities for a pure state: index 0 is the inconclusive
    /// outcome, index `k ≥ 1` claims hypothesis `k`.
    pub fn born_probabilities(&self, state: &DVector<f64>) -> Vec<f64> {
        std::iter::once(&self.inconclusive)
            .chain(self.elements.iter())
            .map(|e| (state.transpose() * e * state)[(0, 0)])
            .collect()
    }

    /// `E₀ + Σ_k E_k`.
    pub fn completeness(&self) -> DMatrix<f64> {
        self.elements
            .iter()
            .fold(self.inconclusive.clone(), |acc, e| acc + e)
    }
}

/// Builds the POVM for the efficiencies `gammas`.  Fails when `E₀` is not
/// positive semidefinite within [`PSD_TOLERANCE`].
pub fn build_povm(embedding: &StateEmbedding, gammas: &[f64]) -> Result<Povm> {
    let n = embedding.n();
    if gammas.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: gammas.len(),
        });
    }
    if let Some((index, &value)) = gammas
        .iter()
        .enumerate()
        .find(|(_, g)| !(-PSD_TOLERANCE..=1.0 + PSD_TOLERANCE).contains(*g))
    {
        return Err(Error::EfficiencyOutOfRange {
            index: index + 1,
            value,
        });
    }

    let elements: Vec<DMatrix<f64>> = embedding
        .reciprocal_vectors
        .iter()
        .zip(gammas)
        .map(|(v, g)| v * v.transpose() * *g)
        .collect();
    let mut inconclusive = DMatrix::<f64>::identity(n, n);
    for e in &elements {
        inconclusive -= e;
    }
    let min_eig = linalg::min_eigenvalue(&inconclusive);
    if min_eig < -PSD_TOLERANCE {
        return Err(Error::InfeasibleProfile {
            min_eigenvalue: min_eig,
        });
    }
    Ok(Povm {
        elements,
        inconclusive,
        gammas: gammas.to_vec(),
        inconclusive_min_eigenvalue: min_eig,
    })
}
