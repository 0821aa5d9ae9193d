//! Executable versions of the leading-minor positivity arguments.
//!
//! Region I: the leading minors `M_k` of `A = G − Γ_D` obey a closed-form
//! ratio `η_k = M_{k+1} / M_k`; positivity of `η_1..η_{n−2}` plus
//! `η_{n−1} = 0` makes `A` positive semidefinite.
//!
//! Region II: `A′ = G − Γ′` has three null vectors, which make every leading
//! minor vanish.  Two of them are projected out with
//! `P = [v₁⊥; e₃; …; e_{n−2}; v_{n−2}⊥]` and the minors of
//! `B = P A′ Pᵀ` are checked instead, together with their conjectured
//! product form `M′_k = R_k · S_k`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::DualWitness;
use crate::analytic::{self, alternating_power, Regime};
use crate::error::{Error, Result};
use crate::gram::{build_gram, ProblemInstance};
use crate::linalg;

/// Largest `n` for which leading minors are taken as direct determinants.
pub const DIRECT_MINOR_MAX_N: usize = 12;

const RATIO_RELATIVE_TOL: f64 = 1e-8;
const FACTOR_RELATIVE_TOL: f64 = 1e-6;
const ZERO_MINOR_TOL: f64 = 1e-9;
const ZERO_RATIO_TOL: f64 = 1e-12;

/// Closed form `M′_k = R_k · S_k` evaluated at one order `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinorFactors {
    pub k: usize,
    pub r: f64,
    pub s: f64,
    pub closed_form: f64,
}

/// `‖A′ v‖` for the three null vectors of the region-II matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelResiduals {
    pub v_first: f64,
    pub v_last: f64,
    pub witness: f64,
}

/// An order `k` where a direct minor and its closed form disagree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinorMismatch {
    pub k: usize,
    pub direct: f64,
    pub closed_form: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinorReport {
    pub instance: ProblemInstance,
    pub regime: Regime,
    /// Region I: `η_0..η_{n−1}`.  Empty in region II.
    pub ratios: Vec<f64>,
    /// `M_1..M_n` (region I, from the ratio products) or `M′_1..M′_{n−2}`
    /// (region II, from the reduced matrix).
    pub minors: Vec<f64>,
    /// `ln |M_k|`, which stays finite when the products underflow.
    pub log_minors: Vec<f64>,
    /// Direct determinants of the leading blocks, for `n ≤ 12`.
    pub direct_minors: Option<Vec<f64>>,
    /// Region II closed-form factors, for `n ≤ 12`.
    pub factors: Vec<MinorFactors>,
    pub kernel: Option<KernelResiduals>,
    pub mismatches: Vec<MinorMismatch>,
    pub all_positive: bool,
}

/// `η_k` for `k = 0..n−1`, without any regime check.
pub fn region_one_ratios(instance: &ProblemInstance) -> Vec<f64> {
    let n = instance.n() as i64;
    let c = instance.c();
    (0..n)
        .map(|k| {
            let tail = alternating_power(c, n - k);
            let fraction = (c + tail) / ((1.0 + c) * (1.0 - tail));
            fraction * (1.0 - c - alternating_power(c, k + 1) - tail)
        })
        .collect()
}

fn relative_error(direct: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        direct.abs()
    } else {
        (direct / reference - 1.0).abs()
    }
}

/// Region I minor chain of `A = G − Γ_D`.
pub fn minor_ratios(instance: &ProblemInstance) -> Result<MinorReport> {
    let critical = analytic::critical_overlap(instance.n())?;
    if instance.c() > critical.value {
        return Err(Error::WrongRegime {
            n: instance.n(),
            c: instance.c(),
            critical: critical.value,
            reason: "the ratio recurrence applies for c <= c*",
        });
    }
    let n = instance.n();
    let ratios = region_one_ratios(instance);

    let mut minors = Vec::with_capacity(n);
    let mut log_minors = Vec::with_capacity(n);
    let (mut prod, mut log_sum) = (1.0, 0.0);
    for eta in &ratios {
        prod *= eta;
        log_sum += eta.abs().ln();
        minors.push(prod);
        log_minors.push(log_sum);
    }

    let mut mismatches = Vec::new();
    let direct_minors = (n <= DIRECT_MINOR_MAX_N).then(|| {
        let g = build_gram(instance);
        let profile = analytic::induced_efficiencies(instance);
        linalg::leading_minors(&g.minus_diagonal(profile.gammas()))
    });
    if let Some(direct) = &direct_minors {
        for k in 1..=n {
            let (d, p) = (direct[k - 1], minors[k - 1]);
            let err = relative_error(d, p);
            let bad = if k == n {
                d.abs() > ZERO_MINOR_TOL
            } else {
                err > RATIO_RELATIVE_TOL
            };
            if bad {
                mismatches.push(MinorMismatch {
                    k,
                    direct: d,
                    closed_form: p,
                    relative_error: err,
                });
            }
        }
    }

    let interior_positive = ratios
        .iter()
        .take(n.saturating_sub(1))
        .skip(1)
        .all(|&eta| eta > 0.0);
    let last_zero = ratios[n - 1].abs() <= ZERO_RATIO_TOL;

    Ok(MinorReport {
        instance: *instance,
        regime: Regime::RegionI,
        ratios,
        minors,
        log_minors,
        direct_minors,
        factors: Vec::new(),
        kernel: None,
        mismatches,
        all_positive: interior_positive && last_zero,
    })
}

/// `Δ_k = [c² + (−1)^k c^(k+1)] + (−1)^(n−1) [c^(n−1) + (−1)^k c^(n−k)]`,
/// the slack separating the last factor of `η_k` from the critical
/// polynomial.  It is non-negative on `k ∈ [0, n−1]` and symmetric under
/// `k ↔ n−1−k`.
pub fn delta_k(instance: &ProblemInstance, k: usize) -> Result<f64> {
    let n = instance.n();
    if k >= n {
        return Err(Error::IndexOutOfRange { k, lo: 0, hi: n - 1 });
    }
    let c = instance.c();
    let sign_k = if k % 2 == 0 { 1.0 } else { -1.0 };
    let sign_n = if (n - 1) % 2 == 0 { 1.0 } else { -1.0 };
    let head = c * c + sign_k * c.powi(k as i32 + 1);
    let tail = c.powi(n as i32 - 1) + sign_k * c.powi((n - k) as i32);
    Ok(head + sign_n * tail)
}

fn floor_half(x: i64) -> i64 {
    x.div_euclid(2)
}

/// Closed-form `R_k` and `S_k`.
fn minor_factors(n: usize, c: f64, k: usize) -> MinorFactors {
    let ki = k as i64;
    let cn = alternating_power(c, n as i64);
    let mut r = (1.0 + c * c).powi(2)
        / (c.powi((k * (k - 1) / 2) as i32) * (c.powi(3) - cn).powi(k as i32 - 1))
        * (1.0 - c).powi((floor_half(ki - 1) + ki - 1) as i32);
    for s in 3..=ki {
        let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
        r *= c.powi(s as i32 + 2) - sign * cn;
    }
    let sign_k = if k % 2 == 0 { 1.0 } else { -1.0 };
    r *= c.powi(k as i32 + 3) + sign_k * cn * (1.0 - c - alternating_power(c, ki));

    let mut s = 1.0;
    for m in 0..=floor_half(ki - 2) {
        s *= (0..=2 * m).map(|j| alternating_power(c, j)).sum::<f64>();
    }
    for q in 0..=floor_half(ki - 3) {
        s *= (0..=q).map(|i| c.powi(2 * i as i32)).sum::<f64>();
    }
    MinorFactors {
        k,
        r,
        s,
        closed_form: r * s,
    }
}

/// `P` with rows `v₁⊥ = (c, 1, 0, …)`, `e₃, …, e_{n−2}`,
/// `v_{n−2}⊥ = (…, 0, 1, c)`, left unnormalised.
fn reduction_operator(n: usize, c: f64) -> DMatrix<f64> {
    let mut p = DMatrix::zeros(n - 2, n);
    p[(0, 0)] = c;
    p[(0, 1)] = 1.0;
    for row in 1..n - 3 {
        p[(row, row + 1)] = 1.0;
    }
    p[(n - 3, n - 2)] = 1.0;
    p[(n - 3, n - 1)] = c;
    p
}

/// Region II kernel reduction of `A′ = G − Γ′`.
pub fn kernel_reduce(instance: &ProblemInstance, tol: f64) -> Result<MinorReport> {
    let n = instance.n();
    let c = instance.c();
    let critical = analytic::critical_overlap(n)?;
    let wrong = |reason| Error::WrongRegime {
        n,
        c,
        critical: critical.value,
        reason,
    };
    if critical.degenerate || c <= critical.value {
        return Err(wrong("kernel reduction applies for c > c*"));
    }
    if n < 5 {
        return Err(wrong("kernel reduction needs n >= 5"));
    }
    if instance.is_degenerate() {
        return Err(Error::Degenerate {
            n,
            c,
            reason: "the Gram matrix is singular at c = 1",
        });
    }

    let g = build_gram(instance);
    let profile = analytic::modified_efficiencies(instance)?;
    let witness = DualWitness::stretched(&g, profile.b.expect("region II profile"))?;
    let a = g.minus_diagonal(profile.gammas());

    let residual = |v: &[f64]| (&a * nalgebra::DVector::from_column_slice(v)).norm();
    let mut v_first = vec![0.0; n];
    v_first[0] = 1.0;
    v_first[1] = -c;
    let mut v_last = vec![0.0; n];
    v_last[n - 2] = -c;
    v_last[n - 1] = 1.0;
    let kernel = KernelResiduals {
        v_first: residual(&v_first),
        v_last: residual(&v_last),
        witness: residual(&witness.u),
    };
    for (name, r) in [
        ("v_1", kernel.v_first),
        ("v_{n-2}", kernel.v_last),
        ("u'", kernel.witness),
    ] {
        if !(r <= tol) {
            return Err(Error::KernelResidual {
                vector: name,
                residual: r,
                tolerance: tol,
            });
        }
    }

    let p = reduction_operator(n, c);
    let b = &p * &a * p.transpose();
    let m = n - 2;

    let direct = (n <= DIRECT_MINOR_MAX_N).then(|| linalg::leading_minors(&b));
    let minors = match &direct {
        Some(d) => d.clone(),
        None => {
            let mut prod = 1.0;
            linalg::elimination_pivots(&b)
                .into_iter()
                .map(|piv| {
                    prod *= piv;
                    prod
                })
                .chain(std::iter::repeat(0.0))
                .take(m)
                .collect()
        }
    };
    let log_minors = minors.iter().map(|x| x.abs().ln()).collect();

    let mut factors = Vec::new();
    let mut mismatches = Vec::new();
    if let Some(direct) = &direct {
        for k in 1..=m {
            let f = minor_factors(n, c, k);
            let d = direct[k - 1];
            let err = relative_error(d, f.closed_form);
            let bad = if k == m {
                d.abs() > ZERO_MINOR_TOL || f.closed_form.abs() > ZERO_MINOR_TOL
            } else {
                err > FACTOR_RELATIVE_TOL
            };
            if bad {
                mismatches.push(MinorMismatch {
                    k,
                    direct: d,
                    closed_form: f.closed_form,
                    relative_error: err,
                });
            }
            factors.push(f);
        }
    }

    let all_positive = minors[..m - 1].iter().all(|&x| x > 0.0) && minors[m - 1].abs() <= ZERO_MINOR_TOL;

    Ok(MinorReport {
        instance: *instance,
        regime: Regime::RegionII,
        ratios: Vec::new(),
        minors,
        log_minors,
        direct_minors: direct,
        factors,
        kernel: Some(kernel),
        mismatches,
        all_positive,
    })
}
