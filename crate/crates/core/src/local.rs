//! Online strategies that measure one particle at a time.
//!
//! Site `k` gets an unambiguous two-state measurement with weight
//! `x_k ∈ [c, 1/c]`: it reports `|0⟩` conclusively with probability
//! `1 − c·x_k` and `|φ⟩` with probability `1 − c/x_k`.  A change at `k+1`
//! is identified when site `k` reports `|0⟩` and site `k+1` reports `|φ⟩`,
//! which gives the average success
//!
//! ```text
//! P(x) = (1/n) Σ_{k=0}^{n−1} (1 − c·x_k)(1 − c/x_{k+1}),   x₀ = 0, 1/x_n = 0.
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::ProblemInstance;

/// Number of seeded random starts in [`optimize_weights`].
pub const RANDOM_STARTS: usize = 8;

/// Spacing of the per-coordinate verification grid.
pub const POLISH_RESOLUTION: f64 = 1e-3;

const MAX_POLISH_POINTS: usize = 4000;
const MAX_POLISH_ROUNDS: usize = 20;
const BOX_SLACK: f64 = 1e-12;
const IMPROVEMENT_TOL: f64 = 1e-15;

/// Interior weights `x_1..x_{n−1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalWeights {
    instance: ProblemInstance,
    x: Vec<f64>,
}

impl LocalWeights {
    pub fn new(instance: ProblemInstance, x: Vec<f64>) -> Result<Self> {
        let n = instance.n();
        if x.len() != n - 1 {
            return Err(Error::LengthMismatch {
                expected: n - 1,
                got: x.len(),
            });
        }
        let c = instance.c();
        let (lo, hi) = weight_box(c);
        for (i, &v) in x.iter().enumerate() {
            let inside = if c == 0.0 {
                v > 0.0 && v.is_finite()
            } else {
                v >= lo * (1.0 - BOX_SLACK) && v <= hi * (1.0 + BOX_SLACK)
            };
            if !inside {
                return Err(Error::WeightOutOfBox {
                    index: i + 1,
                    value: v,
                    lo,
                    hi,
                });
            }
        }
        Ok(Self { instance, x })
    }

    pub fn uniform(instance: ProblemInstance) -> Self {
        Self {
            x: vec![1.0; instance.n() - 1],
            instance,
        }
    }

    pub fn instance(&self) -> &ProblemInstance {
        &self.instance
    }

    /// `x_1..x_{n−1}`.
    pub fn values(&self) -> &[f64] {
        &self.x
    }

    /// `x_k` for `k = 0..=n` with the boundary conventions; `x_n` is
    /// returned as infinity.
    pub fn weight(&self, k: usize) -> f64 {
        match k {
            0 => 0.0,
            k if k == self.instance.n() => f64::INFINITY,
            k => self.x[k - 1],
        }
    }

    /// Probability that site `k` (1-based) reports `|0⟩` conclusively.
    pub fn detect_default(&self, k: usize) -> f64 {
        1.0 - self.instance.c() * self.weight(k)
    }

    /// Probability that site `k` (1-based) reports `|φ⟩` conclusively.
    pub fn detect_mutated(&self, k: usize) -> f64 {
        1.0 - self.instance.c() / self.weight(k)
    }
}

fn weight_box(c: f64) -> (f64, f64) {
    if c == 0.0 {
        (0.0, f64::INFINITY)
    } else {
        (c, 1.0 / c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocalStrategyKind {
    EqualEfficiency,
    AlternatingExtremal,
    Optimized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalStrategyResult {
    pub weights: LocalWeights,
    pub success: f64,
    pub strategy_kind: LocalStrategyKind,
    /// Set when the requested strategy does not exist and a fallback was
    /// returned (alternating weights at `c = 0`).
    pub degenerate: bool,
}

impl LocalStrategyResult {
    /// Which of the two reference strategies this result is closer to in
    /// success probability.
    pub fn closest_kind(&self) -> LocalStrategyKind {
        match self.strategy_kind {
            LocalStrategyKind::Optimized => {
                let inst = self.weights.instance;
                let equal = equal_efficiency_success(&inst);
                let alternating = alternating_extremal(&inst).success;
                if (self.success - equal).abs() <= (self.success - alternating).abs() {
                    LocalStrategyKind::EqualEfficiency
                } else {
                    LocalStrategyKind::AlternatingExtremal
                }
            }
            kind => kind,
        }
    }
}

/// `(1 − c)² + 2c(1 − c)/n`.
pub fn equal_efficiency_success(instance: &ProblemInstance) -> f64 {
    let (n, c) = (instance.n() as f64, instance.c());
    (1.0 - c).powi(2) + 2.0 * c * (1.0 - c) / n
}

pub fn equal_efficiency(instance: &ProblemInstance) -> LocalStrategyResult {
    LocalStrategyResult {
        weights: LocalWeights::uniform(*instance),
        success: equal_efficiency_success(instance),
        strategy_kind: LocalStrategyKind::EqualEfficiency,
        degenerate: false,
    }
}

pub fn weighted_success(weights: &LocalWeights) -> f64 {
    let n = weights.instance.n();
    if weights.instance.c() == 0.0 {
        return 1.0;
    }
    let total: f64 = (0..n)
        .map(|k| weights.detect_default(k) * weights.detect_mutated(k + 1))
        .sum();
    total / n as f64
}

/// Default odd position for the unit weight when `n` is even: the middle
/// odd index in `[3, n−3]`, or 1 when that range is empty.
pub fn default_insertion(n: usize) -> usize {
    if n < 6 {
        return 1;
    }
    let mid = n / 2;
    if mid % 2 == 1 {
        mid
    } else {
        mid - 1
    }
}

/// `x_k = 1/c` on odd sites and `c` on even sites.  For even `n` a single
/// `x = 1` is placed at the odd position `insertion` and the pattern
/// resumes so that `x_{n−1} = c`.
pub fn alternating_weights(instance: &ProblemInstance, insertion: Option<usize>) -> Result<LocalWeights> {
    let n = instance.n();
    let c = instance.c();
    if c == 0.0 {
        return Err(Error::Degenerate {
            n,
            c,
            reason: "alternating weights are unbounded at c = 0",
        });
    }
    let pattern = |k: usize| if k % 2 == 1 { 1.0 / c } else { c };
    let x = if n % 2 == 1 {
        if let Some(p) = insertion {
            return Err(Error::InvalidConfig(format!(
                "odd n = {n} takes no unit-weight insertion (got {p})"
            )));
        }
        (1..n).map(pattern).collect()
    } else {
        let p = insertion.unwrap_or_else(|| default_insertion(n));
        if p % 2 == 0 || p >= n {
            return Err(Error::InvalidConfig(format!(
                "insertion position must be odd and in [1, {}], got {p}",
                n - 1
            )));
        }
        (1..n)
            .map(|k| match k.cmp(&p) {
                std::cmp::Ordering::Less => pattern(k),
                std::cmp::Ordering::Equal => 1.0,
                std::cmp::Ordering::Greater => pattern(k + 1),
            })
            .collect()
    };
    LocalWeights::new(*instance, x)
}

/// The strategy that only ever detects one of the two states per site.
pub fn alternating_extremal(instance: &ProblemInstance) -> LocalStrategyResult {
    match alternating_weights(instance, None) {
        Ok(weights) => LocalStrategyResult {
            success: weighted_success(&weights),
            weights,
            strategy_kind: LocalStrategyKind::AlternatingExtremal,
            degenerate: false,
        },
        Err(_) => LocalStrategyResult {
            degenerate: true,
            ..equal_efficiency(instance)
        },
    }
}

/// Contribution of the two terms that involve `x_k` (1-based, interior).
fn local_terms(c: f64, prev: f64, xk: f64, next: f64) -> f64 {
    (1.0 - c * prev) * (1.0 - c / xk) + (1.0 - c * xk) * (1.0 - c / next)
}

/// Exact maximiser of `x ↦ −a·x − b/x` on the box.
fn best_coordinate(c: f64, prev: f64, current: f64, next: f64) -> f64 {
    let b = (c * (1.0 - c * prev)).max(0.0);
    let a = (c * (1.0 - c / next)).max(0.0);
    let (lo, hi) = (c, 1.0 / c);
    match (a > 0.0, b > 0.0) {
        (true, true) => (b / a).sqrt().clamp(lo, hi),
        (false, true) => hi,
        (true, false) => lo,
        (false, false) => current,
    }
}

/// One full cycle of exact coordinate updates.
fn sweep(c: f64, x: &mut [f64]) {
    let m = x.len();
    for i in 0..m {
        let prev = if i == 0 { 0.0 } else { x[i - 1] };
        let next = if i + 1 == m { f64::INFINITY } else { x[i + 1] };
        let candidate = best_coordinate(c, prev, x[i], next);
        if local_terms(c, prev, candidate, next) > local_terms(c, prev, x[i], next) {
            x[i] = candidate;
        }
    }
}

/// Replaces any coordinate by a better point of a uniform grid over the
/// box.  Returns whether something changed.
fn polish(c: f64, x: &mut [f64]) -> bool {
    let (lo, hi) = (c, 1.0 / c);
    let points = (((hi - lo) / POLISH_RESOLUTION).ceil() as usize).clamp(2, MAX_POLISH_POINTS);
    let m = x.len();
    let mut changed = false;
    for i in 0..m {
        let prev = if i == 0 { 0.0 } else { x[i - 1] };
        let next = if i + 1 == m { f64::INFINITY } else { x[i + 1] };
        let mut best = local_terms(c, prev, x[i], next);
        for j in 0..=points {
            let v = lo + (hi - lo) * j as f64 / points as f64;
            let f = local_terms(c, prev, v, next);
            if f > best + IMPROVEMENT_TOL {
                best = f;
                x[i] = v;
                changed = true;
            }
        }
    }
    changed
}

/// Cyclic coordinate ascent from `start`.  Returns the final weights and
/// the objective after every sweep, starting with the initial value.
pub fn coordinate_ascent(start: &LocalWeights, max_sweeps: usize) -> (LocalWeights, Vec<f64>) {
    let inst = start.instance;
    let c = inst.c();
    let mut x = start.x.clone();
    let eval = |x: &[f64]| {
        weighted_success(&LocalWeights {
            instance: inst,
            x: x.to_vec(),
        })
    };
    let mut trace = vec![eval(&x)];
    if c == 0.0 || c == 1.0 {
        return (start.clone(), trace);
    }
    for _ in 0..max_sweeps {
        sweep(c, &mut x);
        let value = eval(&x);
        let last = *trace.last().expect("nonempty");
        trace.push(value);
        if value - last <= IMPROVEMENT_TOL {
            break;
        }
    }
    (LocalWeights { instance: inst, x }, trace)
}

fn random_start(instance: &ProblemInstance, rng: &mut ChaCha8Rng) -> LocalWeights {
    let c = instance.c();
    let span = -c.ln();
    let x = (1..instance.n())
        .map(|_| rng.random_range(-span..=span).exp().clamp(c, 1.0 / c))
        .collect();
    LocalWeights { instance: *instance, x }
}

/// Best local weights found by multi-start coordinate ascent.
///
/// Starts are the uniform weights, the alternating pattern and
/// [`RANDOM_STARTS`] log-uniform vectors drawn from `seed`; `iterations`
/// bounds the sweeps per start.  Ties go to the earliest start.
pub fn optimize_weights(instance: &ProblemInstance, iterations: usize, seed: u64) -> LocalStrategyResult {
    let c = instance.c();
    if c == 0.0 || c == 1.0 {
        return LocalStrategyResult {
            weights: LocalWeights::uniform(*instance),
            success: equal_efficiency_success(instance),
            strategy_kind: LocalStrategyKind::Optimized,
            degenerate: false,
        };
    }
    let mut starts = vec![LocalWeights::uniform(*instance)];
    starts.extend(alternating_weights(instance, None).ok());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    starts.extend((0..RANDOM_STARTS).map(|_| random_start(instance, &mut rng)));

    let finished: Vec<(LocalWeights, f64)> = starts
        .par_iter()
        .map(|s| {
            let (mut w, mut trace) = coordinate_ascent(s, iterations);
            for _ in 0..MAX_POLISH_ROUNDS {
                if !polish(c, &mut w.x) {
                    break;
                }
                (w, trace) = coordinate_ascent(&w, iterations);
            }
            let value = *trace.last().expect("nonempty");
            (w, value)
        })
        .collect();

    let (weights, success) = finished
        .into_iter()
        .reduce(|best, next| if next.1 > best.1 { next } else { best })
        .expect("at least one start");
    LocalStrategyResult {
        weights,
        success,
        strategy_kind: LocalStrategyKind::Optimized,
        degenerate: false,
    }
}

/// Overlap where the alternating strategy overtakes equal efficiencies.
pub fn local_critical_overlap(n: usize) -> Result<f64> {
    if n < 5 {
        return Err(Error::InvalidConfig(format!(
            "the local crossing needs n >= 5, got {n}"
        )));
    }
    let diff = |c: f64| -> Result<f64> {
        let inst = ProblemInstance::new(n, c)?;
        Ok(equal_efficiency_success(&inst) - alternating_extremal(&inst).success)
    };
    let (mut lo, mut hi) = (0.05, 0.95);
    let (f_lo, f_hi) = (diff(lo)?, diff(hi)?);
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoCrossing { n, lo, hi, f_lo, f_hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if diff(mid)?.signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
