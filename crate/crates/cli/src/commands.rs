use rayon::prelude::*;
use serde::Serialize;

use changepoint::analytic::{self, Regime};
use changepoint::certificate::{self, CertificateSummary, MinorReport, Tolerances};
use changepoint::local;
use changepoint::simulator::{self, SimulationConfig, SimulationReport, Strategy};
use changepoint::{Error, ProblemInstance};

use crate::output::{float, write_csv, write_json};
use crate::{CertifyArgs, ComputeArgs, FigureArgs, Format, SimulateArgs, StrategyArg};

/// Efficiencies with magnitude below this are reported as vanishing.
const VANISHING: f64 = 1e-10;
const KERNEL_TOLERANCE: f64 = 1e-9;
const LOCAL_SWEEPS: usize = 1000;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Certification(String),
    #[error("{0}")]
    Statistical(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn usage(e: Error) -> CliError {
    CliError::Usage(e.to_string())
}

fn instance(n: usize, c: f64) -> Result<ProblemInstance, CliError> {
    ProblemInstance::new(n, c).map_err(usage)
}

#[derive(Serialize)]
struct ComputeRecord {
    n: usize,
    c: f64,
    regime: Regime,
    critical_overlap: f64,
    critical_degenerate: bool,
    success: f64,
    delta: f64,
    degenerate: bool,
    stretch: Option<f64>,
    efficiencies: Vec<f64>,
    /// 1-based indices of vanishing efficiencies.
    vanishing: Vec<usize>,
}

pub fn compute(args: &ComputeArgs) -> Result<(), CliError> {
    let inst = instance(args.n, args.c)?;
    let critical = analytic::critical_overlap(args.n).map_err(usage)?;
    let ps = analytic::success_probability(&inst);
    let profile = analytic::optimal_efficiencies(&inst).ok();
    let efficiencies = profile.as_ref().map(|p| p.gammas().to_vec()).unwrap_or_default();
    let record = ComputeRecord {
        n: args.n,
        c: args.c,
        regime: ps.regime,
        critical_overlap: critical.value,
        critical_degenerate: critical.degenerate,
        success: ps.value,
        delta: ps.delta,
        degenerate: ps.degenerate,
        stretch: profile.as_ref().and_then(|p| p.b),
        vanishing: efficiencies
            .iter()
            .enumerate()
            .filter(|(_, g)| g.abs() <= VANISHING)
            .map(|(k, _)| k + 1)
            .collect(),
        efficiencies,
    };
    let path = args.out.output.as_deref();
    match args.out.format {
        Format::Json => write_json(&record, path)?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = record
                .efficiencies
                .iter()
                .enumerate()
                .map(|(k, g)| vec![(k + 1).to_string(), float(*g)])
                .collect();
            write_csv(&["k", "efficiency"], &rows, path)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct CertifyRecord {
    certificate: CertificateSummary,
    efficiencies: Vec<f64>,
    dual_vector: Vec<f64>,
    minors: Option<MinorReport>,
    minors_note: Option<String>,
}

pub const SUMMARY_HEADER: [&str; 12] = [
    "n",
    "c",
    "regime",
    "primal_value",
    "dual_value",
    "gap",
    "primal_feasible",
    "dual_feasible",
    "min_eigenvalue",
    "min_gamma",
    "min_dual_diagonal",
    "certified",
];

fn summary_row(s: &CertificateSummary) -> Vec<String> {
    vec![
        s.n.to_string(),
        float(s.c),
        s.regime.to_string(),
        float(s.primal_value),
        float(s.dual_value),
        float(s.gap),
        s.primal_feasible.to_string(),
        s.dual_feasible.to_string(),
        float(s.min_eigenvalue),
        float(s.min_gamma),
        float(s.min_dual_diagonal),
        s.certified.to_string(),
    ]
}

fn minor_report(inst: &ProblemInstance, regime: Regime) -> Result<MinorReport, Error> {
    match regime {
        Regime::RegionI => certificate::minor_ratios(inst),
        Regime::RegionII => certificate::kernel_reduce(inst, KERNEL_TOLERANCE),
    }
}

/// Inclusive grid `start, start + step, …, stop`, rounded to 12 decimals.
pub fn overlap_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, CliError> {
    let valid = (0.0..=1.0).contains(&start)
        && (0.0..=1.0).contains(&stop)
        && start <= stop
        && step > 0.0
        && step.is_finite();
    if !valid {
        return Err(CliError::Usage(format!(
            "invalid overlap range {start} {stop} {step}: need 0 <= start <= stop <= 1 and step > 0"
        )));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
        .map(|c: f64| c.min(1.0))
        .collect())
}

pub fn certify(args: &CertifyArgs) -> Result<(), CliError> {
    let tol = Tolerances {
        feasibility: args.tol,
        gap: args.tol,
    };
    let path = args.out.output.as_deref();

    if let Some(c) = args.c {
        let inst = instance(args.n, c)?;
        let cert = certificate::certify(&inst, &tol).map_err(|e| CliError::Certification(e.to_string()))?;
        let (minors, minors_note) = match minor_report(&inst, cert.regime) {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let summary = cert.summary();
        match args.out.format {
            Format::Json => write_json(
                &CertifyRecord {
                    certificate: summary.clone(),
                    efficiencies: cert.primal.gammas.clone(),
                    dual_vector: cert.dual.u.clone(),
                    minors,
                    minors_note,
                },
                path,
            )?,
            Format::Csv => write_csv(&SUMMARY_HEADER, &[summary_row(&summary)], path)?,
        }
        return if cert.certified {
            Ok(())
        } else {
            Err(CliError::Certification(format!(
                "n={} c={} not certified: gap {:e}, primal feasible {}, dual feasible {}",
                args.n, c, cert.gap, cert.primal_feasible, cert.dual_feasible
            )))
        };
    }

    let range = args.c_range.as_ref().expect("clap enforces c or c-range");
    let grid = overlap_grid(range[0], range[1], range[2])?;
    let summaries: Vec<Result<CertificateSummary, String>> = grid
        .par_iter()
        .map(|&c| {
            let inst = ProblemInstance::new(args.n, c).map_err(|e| e.to_string())?;
            certificate::certify(&inst, &tol)
                .map(|cert| cert.summary())
                .map_err(|e| format!("c={c}: {e}"))
        })
        .collect();
    let mut ok = Vec::with_capacity(summaries.len());
    for s in summaries {
        ok.push(s.map_err(CliError::Certification)?);
    }
    match args.out.format {
        Format::Json => write_json(&ok, path)?,
        Format::Csv => {
            let rows: Vec<_> = ok.iter().map(summary_row).collect();
            write_csv(&SUMMARY_HEADER, &rows, path)?;
        }
    }
    let failed: Vec<f64> = ok.iter().filter(|s| !s.certified).map(|s| s.c).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Certification(format!(
            "{} of {} points not certified, first at c={}",
            failed.len(),
            ok.len(),
            failed[0]
        )))
    }
}

pub const PROFILE_HEADER: [&str; 3] = ["k", "gamma_induced", "gamma_optimal"];

pub const CURVE_HEADER: [&str; 7] = [
    "c",
    "success",
    "region_one_extension",
    "region_two_extension",
    "local_equal",
    "local_alternating",
    "local_optimized",
];

fn optional(x: Result<f64, Error>) -> String {
    match x {
        Ok(v) if v.is_finite() => float(v),
        _ => String::new(),
    }
}

pub fn figure(args: &FigureArgs) -> Result<(), CliError> {
    let path = args.output.as_deref();
    match args.id {
        1 => {
            let inst = instance(args.n.unwrap_or(20), args.c)?;
            let induced = analytic::induced_efficiencies(&inst);
            let optimal = analytic::optimal_efficiencies(&inst).map_err(usage)?;
            let rows: Vec<Vec<String>> = (1..=inst.n())
                .map(|k| vec![k.to_string(), float(induced.gamma(k)), float(optimal.gamma(k))])
                .collect();
            write_csv(&PROFILE_HEADER, &rows, path)?;
        }
        _ => {
            let n = args.n.unwrap_or(15);
            let grid = overlap_grid(0.0, 1.0, args.step)?;
            let rows: Vec<Vec<String>> = grid
                .par_iter()
                .map(|&c| {
                    let inst = ProblemInstance::new(n, c).expect("grid lies in [0, 1]");
                    vec![
                        float(c),
                        float(analytic::success_probability(&inst).value),
                        float(analytic::success_region_one(&inst)),
                        optional(analytic::success_region_two(&inst)),
                        float(local::equal_efficiency_success(&inst)),
                        float(local::alternating_extremal(&inst).success),
                        float(local::optimize_weights(&inst, LOCAL_SWEEPS, args.seed).success),
                    ]
                })
                .collect();
            write_csv(&CURVE_HEADER, &rows, path)?;
        }
    }
    Ok(())
}

pub const SIMULATION_HEADER: [&str; 8] = ["n", "c", "strategy", "trials", "successes", "rate", "stderr", "seed"];

pub fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let inst = instance(args.n, args.c)?;
    let strategy = match args.strategy {
        StrategyArg::Collective => Strategy::CollectiveOptimal,
        StrategyArg::LocalEqual => Strategy::LocalEqual,
        StrategyArg::LocalAlternating => Strategy::LocalAlternating,
        StrategyArg::LocalCustom => Strategy::LocalCustom(args.weights.clone().unwrap_or_default()),
    };
    if args.born && strategy.is_local() {
        return Err(CliError::Usage("--born applies to the collective strategy only".into()));
    }
    let config = SimulationConfig::new(inst, strategy, args.trials, args.seed).map_err(usage)?;
    let report: SimulationReport = if args.born {
        simulator::simulate_collective_born(&config)
    } else {
        simulator::simulate(&config)
    }
    .map_err(usage)?;

    let path = args.out.output.as_deref();
    match args.out.format {
        Format::Json => write_json(&report, path)?,
        Format::Csv => {
            let row = vec![
                args.n.to_string(),
                float(args.c),
                report.config.strategy.label().to_string(),
                report.config.trials.to_string(),
                report.successes.to_string(),
                float(report.empirical_rate),
                float(report.standard_error),
                report.config.seed.to_string(),
            ];
            write_csv(&SIMULATION_HEADER, &[row], path)?;
        }
    }
    if report.agrees(args.sigmas) {
        Ok(())
    } else {
        Err(CliError::Statistical(format!(
            "rate {} is {:.2} sigma from {} with {} erroneous identifications",
            report.empirical_rate,
            report.deviation_sigmas(),
            report.target,
            report.errors_observed
        )))
    }
}
