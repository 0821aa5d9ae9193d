//! Exit-gate checks.  Each criterion prints one PASS/FAIL line with its
//! worst observed deviation; the process fails if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use changepoint::analytic;
use changepoint::certificate::{self, kernel_reduce, minor_ratios, numeric_oracle, Tolerances};
use changepoint::local;
use changepoint::simulator::{self, SimulationConfig, Strategy};
use changepoint::{ProblemInstance, Regime};

struct Outcome {
    pass: bool,
    detail: String,
}

fn inst(n: usize, c: f64) -> ProblemInstance {
    ProblemInstance::new(n, c).unwrap()
}

/// `0.00, 0.01, …, 0.99`.
fn percent_grid() -> Vec<f64> {
    (0..100).map(|i| i as f64 / 100.0).collect()
}

fn certification_sweep() -> Outcome {
    let tol = Tolerances::default();
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut worst_gap: f64 = 0.0;
    for n in 2..=40 {
        for &c in &percent_grid() {
            let cert = certificate::certify(&inst(n, c), &tol).unwrap();
            worst_gap = worst_gap.max(cert.gap.abs());
            if !(cert.primal_feasible && cert.dual_feasible && cert.gap.abs() <= 1e-9) {
                failures.push((n, c));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        pass: failures.is_empty() && secs < 60.0,
        detail: format!(
            "3900 points, {} uncertified, max |gap| {worst_gap:.2e}, {secs:.2} s",
            failures.len()
        ),
    }
}

fn golden_ratio_limit() -> Outcome {
    let lengths: Vec<usize> = (40..=2000).chain([5_000, 10_000, 100_000, 1_000_000, 10_000_000]).collect();
    let worst = lengths
        .iter()
        .map(|&n| (analytic::critical_overlap(n).unwrap().value - 0.618_033_988_7).abs())
        .fold(0.0, f64::max);
    Outcome {
        pass: worst <= 1e-6,
        detail: format!("n in 40..=2000 and up to 1e7, max |c* - 0.6180339887| = {worst:.2e}"),
    }
}

fn efficiency_profile() -> Outcome {
    let p = analytic::optimal_efficiencies(&inst(20, 0.7)).unwrap();
    let g = p.gammas();
    let zeros = g[1].abs() <= 1e-10 && g[18].abs() <= 1e-10;
    let others = g
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != 1 && *k != 18)
        .all(|(_, &x)| x > 0.0);
    let max = g.iter().copied().fold(f64::MIN, f64::max);
    let ends = (g[0] - g[19]).abs() <= 1e-12 && g[0] >= max;
    Outcome {
        pass: zeros && others && ends,
        detail: format!(
            "gamma'_2 = {:.1e}, gamma'_19 = {:.1e}, others positive: {others}, gamma'_1 = gamma'_20 = {:.6} max: {ends}",
            g[1], g[18], g[0]
        ),
    }
}

fn success_curve() -> Outcome {
    let n = 15;
    let cs = analytic::critical_overlap(n).unwrap().value;
    let h = 1e-5;
    let ps = |c: f64| analytic::success_probability(&inst(n, c)).value;
    let left = (ps(cs) - ps(cs - h)) / h;
    let right = (ps(cs + h) - ps(cs)) / h;
    let smooth = (left - right).abs() <= 1e-4;

    let crossing = local::local_critical_overlap(n).unwrap();
    let mut below_worst: (f64, f64) = (0.0, 0.0);
    let mut above_worst: (f64, f64) = (0.0, 0.0);
    for &c in &percent_grid() {
        let i = inst(n, c);
        let opt = local::optimize_weights(&i, 1000, 0).success;
        if c < crossing {
            let d = (opt - local::equal_efficiency_success(&i)).abs();
            if d > below_worst.0 {
                below_worst = (d, c);
            }
        } else {
            let d = (opt - local::alternating_extremal(&i).success).abs();
            if d > above_worst.0 {
                above_worst = (d, c);
            }
        }
    }
    Outcome {
        pass: smooth && below_worst.0 <= 1e-3 && above_worst.0 <= 1e-6,
        detail: format!(
            "derivative jump {:.1e} at c* = {cs:.6}; local crossing {crossing:.6}; \
             max |opt - equal| below {:.2e} (c = {:.2}); max |opt - alternating| above {:.2e} (c = {:.2})",
            (left - right).abs(),
            below_worst.0,
            below_worst.1,
            above_worst.0,
            above_worst.1
        ),
    }
}

fn local_crossing() -> Outcome {
    let c = local::local_critical_overlap(201).unwrap();
    let target = 2f64.sqrt() - 1.0;
    Outcome {
        pass: (c - target).abs() <= 0.02,
        detail: format!("n = 201 crossing {c:.6}, distance {:.2e}", (c - target).abs()),
    }
}

fn oracle_equivalence() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 2..=6 {
        for c in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let i = inst(n, c);
            let o = numeric_oracle(&i, 1e-7).unwrap();
            worst = worst.max((o.value - analytic::success_probability(&i).value).abs());
        }
    }
    Outcome {
        pass: worst <= 2e-4,
        detail: format!("25 instances, max |oracle - closed form| {worst:.2e}"),
    }
}

fn minor_replication() -> Outcome {
    let mut region_one = (0usize, 0usize);
    let mut region_two = (0usize, 0usize);
    let mut first_problem: Option<String> = None;
    let mut note = |msg: String| {
        if first_problem.is_none() {
            first_problem = Some(msg);
        }
    };
    for n in 2..=40 {
        let critical = analytic::critical_overlap(n).unwrap();
        for &c in percent_grid().iter().skip(1) {
            let i = inst(n, c);
            match analytic::regime(&i) {
                // The ratio argument covers the open interval 0 < c < c*.
                Regime::RegionI if c < critical.value => {
                    let r = minor_ratios(&i).unwrap();
                    region_one.0 += 1;
                    if !(r.all_positive && r.mismatches.is_empty()) {
                        region_one.1 += 1;
                        note(format!("region I n={n} c={c}: {:?}", r.mismatches.first()));
                    }
                }
                Regime::RegionII if n >= 5 && c > critical.value => {
                    region_two.0 += 1;
                    match kernel_reduce(&i, 1e-9) {
                        Ok(r) if r.all_positive && r.mismatches.is_empty() => {}
                        Ok(r) => {
                            region_two.1 += 1;
                            let m = r.mismatches.first();
                            note(format!(
                                "region II n={n} c={c}: positive {}, k={:?} direct {:?} closed form {:?}",
                                r.all_positive,
                                m.map(|m| m.k),
                                m.map(|m| m.direct),
                                m.map(|m| m.closed_form)
                            ));
                        }
                        Err(e) => {
                            region_two.1 += 1;
                            note(format!("region II n={n} c={c}: {e}"));
                        }
                    }
                }
                Regime::RegionI | Regime::RegionII => {}
            }
        }
    }
    Outcome {
        pass: region_one.1 == 0 && region_two.1 == 0,
        detail: format!(
            "region I {}/{} ok, region II {}/{} ok{}",
            region_one.0 - region_one.1,
            region_one.0,
            region_two.0 - region_two.1,
            region_two.0,
            first_problem.map(|p| format!("; first failure {p}")).unwrap_or_default()
        ),
    }
}

fn monte_carlo() -> Outcome {
    let cfg = SimulationConfig::new(inst(15, 0.5), Strategy::CollectiveOptimal, 100_000, 2024).unwrap();
    let main = simulator::simulate_collective(&cfg).unwrap();
    let p: f64 = 0.362963;
    let sigma = (p * (1.0 - p) / 1e5).sqrt();
    let within = (main.empirical_rate - p).abs() <= 3.0 * sigma;

    let mut errors = main.errors_observed;
    let mut runs = 1;
    for (n, c) in [(3, 0.2), (8, 0.65), (15, 0.7), (20, 0.9)] {
        let i = inst(n, c);
        for s in [Strategy::CollectiveOptimal, Strategy::LocalEqual, Strategy::LocalAlternating] {
            let r = simulator::simulate(&SimulationConfig::new(i, s, 20_000, 5).unwrap()).unwrap();
            errors += r.errors_observed;
            runs += 1;
        }
        if n <= simulator::BORN_MAX_N {
            let cfg = SimulationConfig::new(i, Strategy::CollectiveOptimal, 20_000, 6).unwrap();
            errors += simulator::simulate_collective_born(&cfg).unwrap().errors_observed;
            runs += 1;
        }
    }
    Outcome {
        pass: within && errors == 0,
        detail: format!(
            "rate {:.6} vs 0.362963, |diff| = {:.2} sigma (sigma {sigma:.5}); {errors} errors over {runs} runs",
            main.empirical_rate,
            (main.empirical_rate - p).abs() / sigma
        ),
    }
}

fn asymptotic_laws() -> Outcome {
    let n = 10_000;
    let limit = [0.2, 0.5, 0.8]
        .iter()
        .map(|&c| (analytic::success_probability(&inst(n, c)).value - (1.0 - c) / (1.0 + c)).abs())
        .fold(0.0, f64::max);
    let ratio = (1..=10)
        .map(|i| i as f64 * 0.05)
        .map(|c| {
            let i = inst(n, c);
            let ps = analytic::success_probability(&i).value;
            ((ps - local::equal_efficiency_success(&i)) / ps - c * c).abs()
        })
        .fold(0.0, f64::max);
    Outcome {
        pass: limit <= 3e-4 && ratio <= 5e-3,
        detail: format!("max |P_s - (1-c)/(1+c)| {limit:.2e}; max |ratio - c^2| {ratio:.2e} for c <= 0.5"),
    }
}

fn dominance() -> Outcome {
    let tol = Tolerances::default();
    let mut worst = f64::MIN;
    let mut points = 0;
    let mut uncertified = 0;
    for n in 2..=26 {
        for j in 0..20 {
            let i = inst(n, j as f64 * 0.05);
            let cert = certificate::certify(&i, &tol).unwrap();
            if !cert.certified {
                uncertified += 1;
            }
            let opt = local::optimize_weights(&i, 1000, 0).success;
            worst = worst.max(opt - cert.primal.value);
            points += 1;
        }
    }
    Outcome {
        pass: worst <= 1e-9 && uncertified == 0,
        detail: format!("{points} points, max (local - collective) {worst:.2e}, {uncertified} uncertified"),
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("certification sweep", certification_sweep),
        ("golden-ratio limit", golden_ratio_limit),
        ("efficiency profile n=20 c=0.7", efficiency_profile),
        ("success curves n=15", success_curve),
        ("local critical overlap", local_crossing),
        ("numeric oracle", oracle_equivalence),
        ("minor positivity", minor_replication),
        ("Monte Carlo agreement", monte_carlo),
        ("asymptotic laws", asymptotic_laws),
        ("local dominance", dominance),
    ];
    let mut failed = Vec::new();
    for (idx, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {:>2} {verdict} {name}: {} [{:.2} s]",
            idx + 1,
            outcome.detail,
            start.elapsed().as_secs_f64()
        );
        if !outcome.pass {
            failed.push(idx + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 10 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {failed:?}");
        ExitCode::FAILURE
    }
}
