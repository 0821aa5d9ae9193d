//! Seeded Monte Carlo runs of the collective and local strategies.
//!
//! Trials are split into fixed-size batches.  Batch `b` draws from a ChaCha8
//! stream seeded with `seed` and stream id `b`, so the tallies do not depend
//! on how batches are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic;
use crate::error::{Error, Result};
use crate::gram::{build_gram, build_povm, factor_embedding, ProblemInstance};
use crate::local::{self, LocalWeights};

pub const BATCH_SIZE: u64 = 4096;

/// Largest `n` for sampling through explicit Born probabilities.
pub const BORN_MAX_N: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    CollectiveOptimal,
    LocalEqual,
    LocalAlternating,
    LocalCustom(Vec<f64>),
}

impl Strategy {
    pub fn is_local(&self) -> bool {
        !matches!(self, Strategy::CollectiveOptimal)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Strategy::CollectiveOptimal => "collective",
            Strategy::LocalEqual => "local-equal",
            Strategy::LocalAlternating => "local-alternating",
            Strategy::LocalCustom(_) => "local-custom",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub instance: ProblemInstance,
    pub strategy: Strategy,
    pub trials: u64,
    pub seed: u64,
}

impl SimulationConfig {
    pub fn new(instance: ProblemInstance, strategy: Strategy, trials: u64, seed: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        Ok(Self {
            instance,
            strategy,
            trials,
            seed,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub config: SimulationConfig,
    pub successes: u64,
    pub inconclusives: u64,
    pub errors_observed: u64,
    pub empirical_rate: f64,
    /// `√(p̂(1 − p̂)/N)` from the empirical rate.
    pub standard_error: f64,
    /// Analytic success probability of the simulated strategy.
    pub target: f64,
}

impl SimulationReport {
    /// Binomial standard deviation of the rate under the analytic target.
    pub fn target_sigma(&self) -> f64 {
        (self.target * (1.0 - self.target) / self.config.trials as f64).sqrt()
    }

    /// `|rate − target|` in units of [`Self::target_sigma`].
    pub fn deviation_sigmas(&self) -> f64 {
        let diff = (self.empirical_rate - self.target).abs();
        let sigma = self.target_sigma();
        if sigma == 0.0 {
            if diff <= 1e-12 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            diff / sigma
        }
    }

    /// No erroneous identification and rate within `k` sigma of target.
    pub fn agrees(&self, k: f64) -> bool {
        self.errors_observed == 0 && self.deviation_sigmas() <= k
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    successes: u64,
    inconclusives: u64,
    errors: u64,
}

impl Tally {
    fn merge(self, other: Self) -> Self {
        Self {
            successes: self.successes + other.successes,
            inconclusives: self.inconclusives + other.inconclusives,
            errors: self.errors + other.errors,
        }
    }
}

/// Outcome of one trial: `Some(k)` is a conclusive guess, `None` inconclusive.
fn tally_guess(guess: Option<usize>, truth: usize, t: &mut Tally) {
    match guess {
        None => t.inconclusives += 1,
        Some(k) if k == truth => t.successes += 1,
        Some(_) => t.errors += 1,
    }
}

fn run_batches<F>(config: &SimulationConfig, trial: F) -> Tally
where
    F: Fn(&mut ChaCha8Rng, &mut Tally) + Sync,
{
    let batches = config.trials.div_ceil(BATCH_SIZE);
    (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(b);
            let len = BATCH_SIZE.min(config.trials - b * BATCH_SIZE);
            let mut t = Tally::default();
            for _ in 0..len {
                trial(&mut rng, &mut t);
            }
            t
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Tally::default(), Tally::merge)
}

fn report(config: &SimulationConfig, t: Tally, target: f64) -> SimulationReport {
    let n = config.trials as f64;
    let rate = t.successes as f64 / n;
    SimulationReport {
        config: config.clone(),
        successes: t.successes,
        inconclusives: t.inconclusives,
        errors_observed: t.errors,
        empirical_rate: rate,
        standard_error: (rate * (1.0 - rate) / n).sqrt(),
        target,
    }
}

fn collective_efficiencies(instance: &ProblemInstance) -> Result<Vec<f64>> {
    if instance.is_degenerate() {
        return Ok(vec![0.0; instance.n()]);
    }
    Ok(analytic::optimal_efficiencies(instance)?.gammas().to_vec())
}

fn wrong_strategy(config: &SimulationConfig, expected: &str) -> Error {
    Error::InvalidConfig(format!(
        "strategy {} cannot be run by the {expected} simulator",
        config.strategy.label()
    ))
}

/// Samples the outcome law `p(k | l) = γ_k δ_kl` of the optimal POVM.
pub fn simulate_collective(config: &SimulationConfig) -> Result<SimulationReport> {
    if config.strategy.is_local() {
        return Err(wrong_strategy(config, "collective"));
    }
    let n = config.instance.n();
    let gammas = collective_efficiencies(&config.instance)?;
    let target = gammas.iter().sum::<f64>() / n as f64;
    let tally = run_batches(config, |rng, t| {
        let l = rng.random_range(0..n);
        let guess = (rng.random::<f64>() < gammas[l]).then_some(l);
        tally_guess(guess, l, t);
    });
    Ok(report(config, tally, target))
}

/// Samples through the Born probabilities of the explicit POVM on the
/// triangular embedding.  Off-diagonal outcomes are kept, so an error
/// count of zero checks unambiguity of the constructed measurement.
pub fn simulate_collective_born(config: &SimulationConfig) -> Result<SimulationReport> {
    if config.strategy.is_local() {
        return Err(wrong_strategy(config, "collective"));
    }
    let n = config.instance.n();
    if n > BORN_MAX_N {
        return Err(Error::InvalidConfig(format!(
            "Born sampling supports n <= {BORN_MAX_N}, got {n}"
        )));
    }
    let gammas = collective_efficiencies(&config.instance)?;
    let target = gammas.iter().sum::<f64>() / n as f64;
    let embedding = factor_embedding(&build_gram(&config.instance))?;
    let povm = build_povm(&embedding, &gammas)?;
    // Row l: cumulative distribution over outcomes 1..=n then inconclusive.
    let tables: Vec<Vec<f64>> = (0..n)
        .map(|l| {
            let p = povm.born_probabilities(&embedding.state(l));
            let mut acc = 0.0;
            p[1..]
                .iter()
                .map(|&q| {
                    acc += q.max(0.0);
                    acc
                })
                .collect()
        })
        .collect();
    let tally = run_batches(config, |rng, t| {
        let l = rng.random_range(0..n);
        let u = rng.random::<f64>();
        let guess = tables[l].iter().position(|&cdf| u < cdf);
        tally_guess(guess, l, t);
    });
    Ok(report(config, tally, target))
}

fn local_weights(config: &SimulationConfig) -> Result<LocalWeights> {
    let inst = config.instance;
    match &config.strategy {
        Strategy::CollectiveOptimal => Err(wrong_strategy(config, "local")),
        Strategy::LocalEqual => Ok(LocalWeights::uniform(inst)),
        Strategy::LocalAlternating => Ok(local::alternating_extremal(&inst).weights),
        Strategy::LocalCustom(x) => LocalWeights::new(inst, x.clone()),
    }
}

/// Walks the sequence site by site.  A conclusive `|0⟩` at site `k − 1`
/// followed by a conclusive `|φ⟩` at site `k` identifies the change at
/// `k`.  Site 0 is virtual and always reports `|0⟩`; site `n` never
/// reports `|0⟩`.
pub fn simulate_local(config: &SimulationConfig) -> Result<SimulationReport> {
    let weights = local_weights(config)?;
    let n = config.instance.n();
    let c = config.instance.c();
    let target = local::weighted_success(&weights);
    // Per-site conclusive probabilities for sites 1..=n.
    let detect_default: Vec<f64> = (1..=n)
        .map(|k| if k == n { 0.0 } else { (1.0 - c * weights.weight(k)).clamp(0.0, 1.0) })
        .collect();
    let detect_mutated: Vec<f64> = (1..=n)
        .map(|k| if k == n { 1.0 } else { (1.0 - c / weights.weight(k)).clamp(0.0, 1.0) })
        .collect();

    let tally = run_batches(config, |rng, t| {
        // First mutated site, 1-based.
        let l = rng.random_range(1..=n);
        let mut previous_default = true;
        let mut guess = None;
        for site in 1..=n {
            let u = rng.random::<f64>();
            let (said_default, said_mutated) = if site < l {
                (u < detect_default[site - 1], false)
            } else {
                (false, u < detect_mutated[site - 1])
            };
            if guess.is_none() && previous_default && said_mutated {
                guess = Some(site);
            }
            previous_default = said_default;
        }
        tally_guess(guess, l, t);
    });
    Ok(report(config, tally, target))
}

/// Dispatches on the configured strategy.
pub fn simulate(config: &SimulationConfig) -> Result<SimulationReport> {
    if config.strategy.is_local() {
        simulate_local(config)
    } else {
        simulate_collective(config)
    }
}
