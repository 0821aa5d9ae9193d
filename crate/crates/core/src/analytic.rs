//! Closed-form optimal efficiencies and success probability.
//!
//! Below the critical overlap `c*(n)` the optimum is induced by the
//! alternating dual vector `u_k = (-1)^(k+1)`:
//! `γ_k = Σ_j (-c)^|k-j|`.  At `c*` the second and second-to-last
//! efficiencies reach zero; above it the dual vector is stretched by a factor
//! `b` at those two positions so that they stay at zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::ProblemInstance;

/// Inverse golden ratio, the large-`n` limit of the critical overlap.
pub const INVERSE_GOLDEN_RATIO: f64 = 0.618_033_988_749_894_8;

/// Above this length the geometric sums are evaluated in closed form.
pub const SUMMATION_LIMIT: usize = 1_000_000;

const CRITICAL_RESIDUAL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// `c ≤ c*(n)`: alternating dual vector.
    RegionI,
    /// `c > c*(n)`: modified dual vector, `γ₂ = γ_{n-1} = 0`.
    RegionII,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Regime::RegionI => write!(f, "I"),
            Regime::RegionII => write!(f, "II"),
        }
    }
}

/// Conditional success probabilities `γ_1..γ_n` for one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyProfile {
    pub instance: ProblemInstance,
    pub regime: Regime,
    gammas: Vec<f64>,
    /// Stretch factor of the modified dual vector (region II only).
    pub b: Option<f64>,
}

impl EfficiencyProfile {
    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    /// `γ_k` with 1-based `k`.
    pub fn gamma(&self, k: usize) -> f64 {
        self.gammas[k - 1]
    }

    pub fn mean(&self) -> f64 {
        // Neumaier summation; profiles can have millions of entries.
        let (mut sum, mut carry) = (0.0f64, 0.0f64);
        for &g in &self.gammas {
            let t = sum + g;
            carry += if sum.abs() >= g.abs() { (sum - t) + g } else { (g - t) + sum };
            sum = t;
        }
        (sum + carry) / self.gammas.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessProbability {
    pub instance: ProblemInstance,
    pub value: f64,
    pub regime: Regime,
    /// Region-II correction, zero in region I.
    pub delta: f64,
    /// Set at `c = 1`, where the value 0 is reported by continuity.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalOverlap {
    pub n: usize,
    pub value: f64,
    /// `|1 − c − c² − (−c)^(n−1)|` at `value`.
    pub residual: f64,
    /// No root in `(0, 1)`: the only root is `c = 1` (n = 2 and n = 4), so
    /// region II never occurs for this length.
    pub degenerate: bool,
}

/// `(−c)^m` evaluated as a magnitude with a tracked sign.  Negative `m` is
/// allowed for `c > 0`.
pub fn alternating_power(c: f64, m: i64) -> f64 {
    let magnitude = match i32::try_from(m) {
        Ok(e) => c.powi(e),
        Err(_) => c.powf(m as f64),
    };
    if m.rem_euclid(2) == 0 {
        magnitude
    } else {
        -magnitude
    }
}

/// `Σ_{d=0}^{m−1} (−c)^d` in closed form.
fn alternating_geometric(c: f64, m: usize) -> f64 {
    (1.0 - alternating_power(c, m as i64)) / (1.0 + c)
}

fn induced_by_summation(instance: &ProblemInstance) -> Vec<f64> {
    let n = instance.n();
    let c = instance.c();
    // partial[m] = Σ_{d<m} (−c)^d
    let mut partial = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    let mut term = 1.0;
    partial.push(0.0);
    for _ in 0..n {
        acc += term;
        term *= -c;
        partial.push(acc);
    }
    (1..=n).map(|k| partial[k] + partial[n - k + 1] - 1.0).collect()
}

fn induced_by_closed_form(instance: &ProblemInstance) -> Vec<f64> {
    let n = instance.n();
    let c = instance.c();
    (1..=n)
        .map(|k| alternating_geometric(c, k) + alternating_geometric(c, n - k + 1) - 1.0)
        .collect()
}

/// Efficiencies induced by the alternating dual vector.  No feasibility
/// claim: above `c*` some of them are negative.
pub fn induced_efficiencies(instance: &ProblemInstance) -> EfficiencyProfile {
    let gammas = if instance.n() > SUMMATION_LIMIT {
        induced_by_closed_form(instance)
    } else {
        induced_by_summation(instance)
    };
    EfficiencyProfile {
        instance: *instance,
        regime: Regime::RegionI,
        gammas,
        b: None,
    }
}

/// `γ₂ = γ_{n−1} = [1 − c − c² − (−c)^(n−1)] / (1 + c)`.
pub fn gamma2_closed_form(instance: &ProblemInstance) -> f64 {
    let c = instance.c();
    critical_polynomial(instance.n(), c) / (1.0 + c)
}

fn critical_polynomial(n: usize, c: f64) -> f64 {
    1.0 - c - c * c - alternating_power(c, n as i64 - 1)
}

fn bisect(n: usize, mut lo: f64, mut hi: f64) -> f64 {
    // f(lo) > 0 > f(hi)
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if critical_polynomial(n, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if critical_polynomial(n, lo).abs() <= critical_polynomial(n, hi).abs() {
        lo
    } else {
        hi
    }
}

/// Root of `1 − c − c² − (−c)^(n−1)` in `(0, 1)`.
pub fn critical_overlap(n: usize) -> Result<CriticalOverlap> {
    if n < 2 {
        return Err(Error::InvalidInstance { n, c: f64::NAN });
    }
    let bracket = if n >= 5 {
        Some((0.4, 0.8))
    } else {
        // The low-order polynomials either have a simple root or only touch
        // zero at c = 1, so a sign-change scan is exact enough.
        let steps = 4096;
        (0..steps).find_map(|i| {
            let a = i as f64 / steps as f64;
            let b = (i + 1) as f64 / steps as f64;
            let fb = critical_polynomial(n, b);
            (b < 1.0 && critical_polynomial(n, a) > 0.0 && fb <= 0.0).then_some((a, b))
        })
    };
    match bracket {
        Some((lo, hi)) => {
            debug_assert!(critical_polynomial(n, lo) > 0.0 && critical_polynomial(n, hi) <= 0.0);
            let value = bisect(n, lo, hi);
            let residual = critical_polynomial(n, value).abs();
            debug_assert!(residual <= CRITICAL_RESIDUAL);
            Ok(CriticalOverlap {
                n,
                value,
                residual,
                degenerate: false,
            })
        }
        None => Ok(CriticalOverlap {
            n,
            value: 1.0,
            residual: critical_polynomial(n, 1.0).abs(),
            degenerate: true,
        }),
    }
}

/// Region of an instance; `c = c*` exactly belongs to region I.
pub fn regime(instance: &ProblemInstance) -> Regime {
    let critical = critical_overlap(instance.n()).expect("instance has n >= 2");
    if instance.c() <= critical.value {
        Regime::RegionI
    } else {
        Regime::RegionII
    }
}

fn require_region_two(instance: &ProblemInstance) -> Result<CriticalOverlap> {
    let critical = critical_overlap(instance.n())?;
    let err = |reason| Error::WrongRegime {
        n: instance.n(),
        c: instance.c(),
        critical: critical.value,
        reason,
    };
    if critical.degenerate {
        return Err(err("this length has no region II"));
    }
    if instance.c() < critical.value {
        return Err(err("modified efficiencies need c >= c*"));
    }
    Ok(critical)
}

/// `1 + (−c)^(n−3)`, the normalisation of the region-II correction.
fn stretch_denominator(instance: &ProblemInstance) -> Result<f64> {
    let d = 1.0 + alternating_power(instance.c(), instance.n() as i64 - 3);
    if d == 0.0 {
        return Err(Error::Degenerate {
            n: instance.n(),
            c: instance.c(),
            reason: "1 + (-c)^(n-3) vanishes",
        });
    }
    Ok(d)
}

/// `b = 1 − γ₂ / (1 + (−c)^(n−3))`, chosen so that `γ′₂ = 0`.
pub fn modified_b(instance: &ProblemInstance) -> Result<f64> {
    require_region_two(instance)?;
    Ok(1.0 - gamma2_closed_form(instance) / stretch_denominator(instance)?)
}

/// Explicit form `b = c (1 + [1 + (−c)^(n−5) c] / [(1 + c)(1 + (−c)^(n−3))])`,
/// kept as an independent cross-check of [`modified_b`].
pub fn modified_b_explicit(instance: &ProblemInstance) -> Result<f64> {
    require_region_two(instance)?;
    let n = instance.n() as i64;
    let c = instance.c();
    let num = 1.0 + alternating_power(c, n - 5) * c;
    Ok(c * (1.0 + num / ((1.0 + c) * stretch_denominator(instance)?)))
}

/// `γ′_k = γ_k − (1 − b)[(−c)^|k−2| + (−c)^|n−k−1|]`.
pub fn modified_efficiencies(instance: &ProblemInstance) -> Result<EfficiencyProfile> {
    let b = modified_b(instance)?;
    let n = instance.n() as i64;
    let c = instance.c();
    let induced = induced_efficiencies(instance);
    let gammas = induced
        .gammas
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let k = i as i64 + 1;
            let shift = alternating_power(c, (k - 2).abs()) + alternating_power(c, (n - k - 1).abs());
            g - (1.0 - b) * shift
        })
        .collect();
    Ok(EfficiencyProfile {
        instance: *instance,
        regime: Regime::RegionII,
        gammas,
        b: Some(b),
    })
}

/// The optimal profile for the instance's regime.
pub fn optimal_efficiencies(instance: &ProblemInstance) -> Result<EfficiencyProfile> {
    if instance.is_degenerate() {
        return Err(Error::Degenerate {
            n: instance.n(),
            c: 1.0,
            reason: "all hypotheses coincide",
        });
    }
    match regime(instance) {
        Regime::RegionI => Ok(induced_efficiencies(instance)),
        Regime::RegionII => modified_efficiencies(instance),
    }
}

/// `P_s^I = (1−c)/(1+c) + 2c[1 − (−c)^n] / [n (1+c)²]`, valid as the optimum
/// in region I and evaluated here for any `c`.
pub fn success_region_one(instance: &ProblemInstance) -> f64 {
    let n = instance.n();
    let c = instance.c();
    (1.0 - c) / (1.0 + c)
        + 2.0 * c * (1.0 - alternating_power(c, n as i64)) / (n as f64 * (1.0 + c) * (1.0 + c))
}

/// `Δ = −(2/n) γ₂² / (1 + (−c)^(n−3))`, evaluated for any `c`.
pub fn region_two_delta(instance: &ProblemInstance) -> Result<f64> {
    if instance.n() < 3 {
        return Err(Error::WrongRegime {
            n: instance.n(),
            c: instance.c(),
            critical: 1.0,
            reason: "region II needs n >= 3",
        });
    }
    let g2 = gamma2_closed_form(instance);
    Ok(-2.0 / instance.n() as f64 * g2 * g2 / stretch_denominator(instance)?)
}

/// `P_s^II = P_s^I + Δ`, evaluated for any `c`.
pub fn success_region_two(instance: &ProblemInstance) -> Result<f64> {
    Ok(success_region_one(instance) + region_two_delta(instance)?)
}

pub fn success_probability(instance: &ProblemInstance) -> SuccessProbability {
    let regime = regime(instance);
    if instance.is_degenerate() {
        return SuccessProbability {
            instance: *instance,
            value: 0.0,
            regime,
            delta: 0.0,
            degenerate: true,
        };
    }
    let base = success_region_one(instance);
    let delta = match regime {
        Regime::RegionI => 0.0,
        Regime::RegionII => {
            region_two_delta(instance).expect("region II implies n >= 3 and c < 1")
        }
    };
    SuccessProbability {
        instance: *instance,
        value: base + delta,
        regime,
        delta,
        degenerate: false,
    }
}

/// Large-`n` success probability with the exponentially small terms dropped.
pub fn asymptotic_success(c: f64, n: usize) -> Result<f64> {
    if !(0.0..1.0).contains(&c) || n == 0 {
        return Err(Error::InvalidInstance { n, c });
    }
    let nf = n as f64;
    let base = (1.0 - c) / (1.0 + c) + 2.0 * c / (nf * (1.0 + c) * (1.0 + c));
    if c <= INVERSE_GOLDEN_RATIO {
        Ok(base)
    } else {
        Ok(base + asymptotic_delta(c, n))
    }
}

/// `Δ ≈ −(2/n) [(1 − c − c²)/(1 + c)]²`.
pub fn asymptotic_delta(c: f64, n: usize) -> f64 {
    let r = (1.0 - c - c * c) / (1.0 + c);
    -2.0 / n as f64 * r * r
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn inst(n: usize, c: f64) -> ProblemInstance {
        ProblemInstance::new(n, c).unwrap()
    }

    /// Literal double sum `Σ_j (−c)^|k−j|` with repeated multiplication.
    fn brute_gamma(n: usize, c: f64, k: usize) -> f64 {
        (1..=n)
            .map(|j| {
                let mut p = 1.0;
                for _ in 0..k.abs_diff(j) {
                    p *= -c;
                }
                p
            })
            .sum()
    }

    #[test]
    fn induced_examples() {
        let p = induced_efficiencies(&inst(3, 0.5));
        assert!((p.gamma(1) - 0.75).abs() < 1e-15);
        assert!(p.gamma(2).abs() < 1e-15);
        assert!((p.gamma(3) - 0.75).abs() < 1e-15);
        assert_eq!(induced_efficiencies(&inst(2, 0.0)).gammas(), &[1.0, 1.0]);
        assert!((induced_efficiencies(&inst(4, 0.3)).gamma(2) - 0.49).abs() < 1e-15);
    }

    #[test]
    fn summation_and_closed_form_agree() {
        for n in [2, 3, 7, 20, 101] {
            for c in [0.0, 0.2, 0.5, 0.7, 0.99] {
                let i = inst(n, c);
                let a = induced_by_summation(&i);
                let b = induced_by_closed_form(&i);
                for k in 0..n {
                    assert!((a[k] - b[k]).abs() < 1e-13);
                    assert!((a[k] - brute_gamma(n, c, k + 1)).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn gamma2_examples() {
        assert!(gamma2_closed_form(&inst(3, 0.5)).abs() < 1e-15);
        assert!((gamma2_closed_form(&inst(4, 0.3)) - 0.49).abs() < 1e-15);
        assert!((gamma2_closed_form(&inst(20, 0.7)) + 0.11109).abs() < 1e-5);
    }

    #[test]
    fn critical_overlap_examples() {
        let c3 = critical_overlap(3).unwrap();
        assert!((c3.value - 0.5).abs() < 1e-12);
        assert!(!c3.degenerate);
        let c60 = critical_overlap(60).unwrap();
        assert!((c60.value - 0.618_033_988_7).abs() < 1e-9);
        // n = 4: 1 − c − c² + c³ = (1 − c)²(1 + c), root only at c = 1.
        let c4 = critical_overlap(4).unwrap();
        assert!(c4.degenerate);
        assert_eq!(c4.value, 1.0);
        let c2 = critical_overlap(2).unwrap();
        assert!(c2.degenerate);
        assert!(critical_overlap(1).is_err());
        for n in 3..=80 {
            if n == 4 {
                continue;
            }
            let cs = critical_overlap(n).unwrap();
            assert!(cs.residual <= 1e-12, "n={n}");
            assert!(cs.value > 0.0 && cs.value < 1.0);
        }
    }

    #[test]
    fn degenerate_lengths_stay_in_region_one() {
        for n in [2, 4] {
            for c in [0.3, 0.7, 0.99] {
                let i = inst(n, c);
                assert_eq!(regime(&i), Regime::RegionI);
                assert!(induced_efficiencies(&i).gammas().iter().all(|&g| g >= 0.0));
                assert!(matches!(modified_b(&i), Err(Error::WrongRegime { .. })));
            }
        }
    }

    #[test]
    fn modified_b_examples() {
        for n in [5, 8, 20] {
            let cs = critical_overlap(n).unwrap().value;
            assert!((modified_b(&inst(n, cs)).unwrap() - 1.0).abs() < 1e-12);
        }
        // γ₂ ≈ −0.11109, (−0.7)^17 ≈ −0.0023263
        let b = modified_b(&inst(20, 0.7)).unwrap();
        assert!((b - 1.11135).abs() < 1e-5);
        let c: f64 = 0.75;
        let limit = c * (2.0 + c) / (1.0 + c);
        assert!((modified_b(&inst(400, c)).unwrap() - limit).abs() < 1e-12);
        assert!(matches!(
            modified_b(&inst(20, 0.5)),
            Err(Error::WrongRegime { .. })
        ));
    }

    #[test]
    fn modified_efficiencies_examples() {
        let p = modified_efficiencies(&inst(20, 0.7)).unwrap();
        assert_eq!(p.regime, Regime::RegionII);
        assert!(p.gamma(2).abs() < 1e-10 && p.gamma(19).abs() < 1e-10);
        for k in (1..=20).filter(|k| *k != 2 && *k != 19) {
            assert!(p.gamma(k) > 0.0, "k={k}");
        }
        for n in [5, 9, 20] {
            let i = inst(n, critical_overlap(n).unwrap().value);
            let p = modified_efficiencies(&i).unwrap();
            let q = induced_efficiencies(&i);
            for k in 0..n {
                assert!((p.gammas()[k] - q.gammas()[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn success_examples() {
        let p2 = success_probability(&inst(2, 0.5));
        assert!((p2.value - 0.5).abs() < 1e-15);
        let p15 = success_probability(&inst(15, 0.5));
        assert_eq!(p15.regime, Regime::RegionI);
        assert!((p15.value - 0.362963).abs() < 1e-6);
        assert_eq!(p15.delta, 0.0);
        for c in [0.1, 0.5, 0.9] {
            let v = success_probability(&inst(100_000, c)).value;
            assert!((v - (1.0 - c) / (1.0 + c)).abs() < 1e-5);
        }
        let d = success_probability(&inst(7, 1.0));
        assert!(d.degenerate);
        assert_eq!(d.value, 0.0);
    }

    #[test]
    fn closed_form_path_for_huge_lengths() {
        let big = inst(SUMMATION_LIMIT + 1, 0.4);
        let p = induced_efficiencies(&big);
        assert_eq!(p.gammas().len(), SUMMATION_LIMIT + 1);
        let err = (p.mean() - success_region_one(&big)).abs();
        assert!(err < 1e-12, "err={err}");
    }

    #[test]
    fn asymptotic_examples() {
        for n in [10, 1000] {
            assert_eq!(asymptotic_success(0.0, n).unwrap(), 1.0);
        }
        let c = INVERSE_GOLDEN_RATIO;
        let below = (1.0 - c) / (1.0 + c) + 2.0 * c / (1000.0 * (1.0 + c) * (1.0 + c));
        assert!((asymptotic_success(c, 1000).unwrap() - below).abs() < 1e-15);
        assert!(asymptotic_delta(0.618034, 1000).abs() < 1e-12);
        let exact = success_probability(&inst(10_000, 0.5)).value;
        assert!((asymptotic_success(0.5, 10_000).unwrap() - exact).abs() < 1e-15);
        assert!(asymptotic_success(1.0, 10).is_err());
    }

    #[test]
    fn delta_matches_large_n_limit() {
        for c in [0.65, 0.8, 0.95] {
            for n in [50usize, 200, 1000] {
                let d = region_two_delta(&inst(n, c)).unwrap();
                assert!(d <= 0.0);
                // Dropped terms are of order c^(n−3)/n.
                let bound = c.powi(n as i32 - 3) / n as f64 + 1e-15;
                assert!((d - asymptotic_delta(c, n)).abs() <= bound, "c={c} n={n}");
            }
        }
    }

    #[test]
    fn derivative_continuous_at_critical_overlap() {
        let n = 15;
        let cs = critical_overlap(n).unwrap().value;
        let h = 1e-5;
        let p1 = |c: f64| success_region_one(&inst(n, c));
        let p2 = |c: f64| success_region_two(&inst(n, c)).unwrap();
        let left = (p1(cs + h) - p1(cs - h)) / (2.0 * h);
        let right = (p2(cs + h) - p2(cs - h)) / (2.0 * h);
        assert!((left - right).abs() < 1e-4);
        let h2 = 1e-4;
        let second = |f: &dyn Fn(f64) -> f64| (f(cs + h2) - 2.0 * f(cs) + f(cs - h2)) / (h2 * h2);
        assert!((second(&p1) - second(&p2)).abs() > 1e-3);
    }

    proptest! {
        #[test]
        fn profile_mean_matches_success(n in 2usize..60, c in 0.0f64..0.999) {
            let i = inst(n, c);
            let profile = optimal_efficiencies(&i).unwrap();
            let ps = success_probability(&i);
            prop_assert!((profile.mean() - ps.value).abs() < 1e-12);
            prop_assert_eq!(profile.regime, ps.regime);
            prop_assert!((0.0..=1.0).contains(&ps.value));
            // Left-right mirror symmetry.
            for k in 1..=n {
                prop_assert!((profile.gamma(k) - profile.gamma(n + 1 - k)).abs() < 1e-12);
            }
            if ps.regime == Regime::RegionI {
                prop_assert!(c <= critical_overlap(n).unwrap().value);
            } else {
                prop_assert!(profile.gamma(2).abs() < 1e-10);
                prop_assert!(profile.b.unwrap() >= 1.0);
            }
        }

        #[test]
        fn gamma2_matches_profile(n in 2usize..80, c in 0.0f64..1.0) {
            let i = inst(n, c);
            prop_assert!((gamma2_closed_form(&i) - induced_efficiencies(&i).gamma(2)).abs() < 1e-12);
        }

        #[test]
        fn oscillation_ordering_in_region_one(n in 3usize..60, t in 0.0f64..1.0) {
            let cs = critical_overlap(n).unwrap().value;
            let c = t * cs.min(0.999);
            let p = induced_efficiencies(&inst(n, c));
            let max = p.gammas().iter().copied().fold(f64::MIN, f64::max);
            let min = p.gammas().iter().copied().fold(f64::MAX, f64::min);
            prop_assert!((p.gamma(1) - max).abs() < 1e-12);
            prop_assert!((p.gamma(2) - min).abs() < 1e-12);
            prop_assert!(p.gammas().iter().all(|&g| g >= p.gamma(2) - 1e-12));
        }

        #[test]
        fn both_b_forms_agree(n in 5usize..60, t in 0.0f64..1.0) {
            let cs = critical_overlap(n).unwrap().value;
            let c = cs + t * (0.99 - cs);
            let i = inst(n, c);
            prop_assert!((modified_b(&i).unwrap() - modified_b_explicit(&i).unwrap()).abs() < 1e-10);
        }
    }
}
