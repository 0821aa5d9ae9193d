use changepoint::gram::{build_gram, build_povm, factor_embedding};
use changepoint::simulator::{self, SimulationConfig, Strategy};
use changepoint::{analytic, certificate, local, ProblemInstance, Tolerances};
use proptest::prelude::*;

fn grid() -> Vec<ProblemInstance> {
    let mut out = Vec::new();
    for n in [3, 6, 10, 15, 20] {
        for j in 0..20 {
            out.push(ProblemInstance::new(n, j as f64 * 0.05).unwrap());
        }
    }
    out
}

#[test]
fn simulated_rates_track_analytic_values() {
    for strategy in [Strategy::CollectiveOptimal, Strategy::LocalEqual] {
        let points = grid();
        let mut outliers = 0;
        for (idx, inst) in points.iter().enumerate() {
            let cfg = SimulationConfig::new(*inst, strategy.clone(), 100_000, 1000 + idx as u64).unwrap();
            let r = simulator::simulate(&cfg).unwrap();
            assert_eq!(r.errors_observed, 0);
            assert_eq!(r.successes + r.inconclusives, cfg.trials);
            if r.deviation_sigmas() > 4.0 {
                outliers += 1;
            }
        }
        assert!(outliers <= 1, "{} outliers for {:?}", outliers, strategy);
    }
}

#[test]
fn optimal_povm_realises_closed_form() {
    for inst in grid().into_iter().filter(|i| i.n() <= 10) {
        let gammas = analytic::optimal_efficiencies(&inst).unwrap();
        let emb = factor_embedding(&build_gram(&inst)).unwrap();
        let povm = build_povm(&emb, gammas.gammas()).unwrap();
        assert!(povm.inconclusive_min_eigenvalue >= -1e-10);
        for l in 0..inst.n() {
            let p = povm.born_probabilities(&emb.state(l));
            for (k, &q) in p.iter().enumerate().skip(1) {
                let expected = if k == l + 1 { gammas.gamma(k) } else { 0.0 };
                assert!((q - expected).abs() < 1e-9, "n={} c={} l={l} k={k}", inst.n(), inst.c());
            }
        }
    }
}

#[test]
fn certified_value_matches_reported_probability() {
    for inst in grid() {
        let cert = certificate::certify(&inst, &Tolerances::default()).unwrap();
        let ps = analytic::success_probability(&inst).value;
        assert!(cert.certified);
        assert!((cert.primal.value - ps).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_report_is_error_free(n in 2usize..25, c in 0.0f64..1.0, seed in any::<u64>(), pick in 0usize..3) {
        let inst = ProblemInstance::new(n, c).unwrap();
        let strategy = [Strategy::CollectiveOptimal, Strategy::LocalEqual, Strategy::LocalAlternating][pick].clone();
        let cfg = SimulationConfig::new(inst, strategy, 2000, seed).unwrap();
        let r = simulator::simulate(&cfg).unwrap();
        prop_assert_eq!(r.errors_observed, 0);
        prop_assert_eq!(r.clone(), simulator::simulate(&cfg).unwrap());
    }

    #[test]
    fn local_strategies_stay_below_collective(n in 2usize..40, c in 0.0f64..=1.0) {
        let inst = ProblemInstance::new(n, c).unwrap();
        let ps = analytic::success_probability(&inst).value;
        prop_assert!(local::equal_efficiency_success(&inst) <= ps + 1e-12);
        prop_assert!(local::alternating_extremal(&inst).success <= ps + 1e-12);
    }
}
