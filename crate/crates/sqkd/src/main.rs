use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use mirror_core::adversary::build_depolarizing_attack;
use mirror_core::keyrate::{key_rate, KeyRateResult, DEFAULT_GRID};
use mirror_core::scenarios::{closed_form_statistics, find_threshold, noise_spec, ScenarioConfig};
use mirror_core::statistics::{analytic_statistics, ObservedStatistics, OperationWeights};
use mirror_sqkd::config::{load_statistics, resolve, ScenarioOverrides};
use mirror_sqkd::output::{emit_curve, RunReport};
use mirror_sqkd::parallel;
use serde::Serialize;

const EXIT_USAGE: u8 = 1;
const EXIT_NEGATIVE: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;

/// Key rates, curves, thresholds and Monte Carlo checks for the Mirror SQKD
/// protocol under collective attacks.
#[derive(Parser)]
#[command(name = "mirror-sqkd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON scenario config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// RNG seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Grid points for the entropy minimization.
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
    /// Output file (JSON report, or CSV for `curve`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    scenario: ScenarioOverrides,
}

#[derive(Subcommand)]
enum Command {
    /// Key rate of one scenario or of explicit statistics.
    Rate {
        #[command(flatten)]
        common: Common,
        /// JSON statistics to use instead of the scenario.
        #[arg(long)]
        stats: Option<PathBuf>,
    },
    /// Rate curve over Q_Z as CSV.
    Curve {
        #[command(flatten)]
        common: Common,
        /// First Q_Z.
        #[arg(long, default_value_t = 0.0)]
        start: f64,
        /// Last Q_Z.
        #[arg(long, default_value_t = 0.15)]
        end: f64,
        /// Number of rows.
        #[arg(long, default_value_t = 100)]
        steps: usize,
        /// Also write a JSON report with the rows.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Q_Z at which the rate reaches zero.
    Threshold {
        #[command(flatten)]
        common: Common,
        /// Bisection tolerance on Q_Z.
        #[arg(long, default_value_t = 1e-5)]
        tolerance: f64,
    },
    /// Monte Carlo statistics against the exact values.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Simulated rounds.
        #[arg(long, default_value_t = 1_000_000)]
        rounds: u64,
        /// Allowed deviation in standard errors.
        #[arg(long, default_value_t = 5.0)]
        sigmas: f64,
    },
}

#[derive(Serialize)]
struct RateConfig {
    scenario: Option<ScenarioConfig>,
    statistics: ObservedStatistics,
    grid: usize,
}

#[derive(Serialize)]
struct RateOutput {
    #[serde(flatten)]
    result: KeyRateResult,
    rate_throughput_weighted: f64,
}

#[derive(Serialize)]
struct CurveConfig {
    scenario: ScenarioConfig,
    grid: usize,
    start: f64,
    end: f64,
    steps: usize,
}

#[derive(Serialize)]
struct ThresholdConfig {
    scenario: ScenarioConfig,
    grid: usize,
    tolerance: f64,
}

#[derive(Serialize)]
struct ValidateConfig {
    scenario: ScenarioConfig,
    rounds: u64,
    sigmas: f64,
}

#[derive(Serialize)]
struct FieldCheck {
    field: &'static str,
    analytic: f64,
    monte_carlo: f64,
    std_error: f64,
    z: f64,
    pass: bool,
}

fn rate(common: &Common, stats_path: Option<&PathBuf>) -> anyhow::Result<u8> {
    let start = Instant::now();
    let (scenario, statistics) = match stats_path {
        Some(p) => (None, load_statistics(p)?),
        None => {
            let cfg = resolve(common.config.as_deref(), &common.scenario)?;
            (Some(cfg), closed_form_statistics(&cfg)?)
        }
    };
    let result = key_rate(&statistics, common.grid)?;
    let weighted = result.rate * statistics.m_total;
    println!("rate                      {:.12}", result.rate);
    println!("rate_throughput_weighted  {:.12}", weighted);
    println!("sae_lower                 {:.12}", result.sae_lower);
    println!("h_a_given_b               {:.12}", result.h_a_given_b);
    println!("argmin_re03               {:.12}", result.argmin_re03);
    println!("argmin_re12               {:.12}", result.argmin_re12);
    println!("lambda1                   {:.12}", result.lambda1);
    println!("lambda2                   {:.12}", result.lambda2);
    println!("feasible                  {}", result.feasible);
    if let Some(out) = &common.out {
        let config = RateConfig {
            scenario,
            statistics,
            grid: common.grid,
        };
        let output = RateOutput {
            result,
            rate_throughput_weighted: weighted,
        };
        RunReport::new(
            "rate",
            common.seed,
            config,
            output,
            start.elapsed().as_secs_f64(),
        )
        .write(out)?;
    }
    Ok(if !result.feasible {
        eprintln!("statistics are inconsistent with any collective attack: abort");
        EXIT_INFEASIBLE
    } else if result.rate < 0.0 {
        eprintln!("negative key rate: abort");
        EXIT_NEGATIVE
    } else {
        0
    })
}

fn curve(
    common: &Common,
    start_q: f64,
    end_q: f64,
    steps: usize,
    report: Option<&PathBuf>,
) -> anyhow::Result<u8> {
    let start = Instant::now();
    let cfg = resolve(common.config.as_deref(), &common.scenario)?;
    let rows = parallel::sweep_curve(&cfg, start_q, end_q, steps, common.grid)?;
    emit_curve(&rows, common.out.as_deref())?;
    if let Some(path) = report {
        let config = CurveConfig {
            scenario: cfg,
            grid: common.grid,
            start: start_q,
            end: end_q,
            steps,
        };
        RunReport::new(
            "curve",
            common.seed,
            config,
            &rows,
            start.elapsed().as_secs_f64(),
        )
        .write(path)?;
    }
    Ok(0)
}

fn threshold(common: &Common, tolerance: f64) -> anyhow::Result<u8> {
    let start = Instant::now();
    let cfg = resolve(common.config.as_deref(), &common.scenario)?;
    let q = find_threshold(&cfg, tolerance, common.grid)?;
    println!("threshold  {q:.6}");
    println!("tolerance  {tolerance:e}");
    if let Some(out) = &common.out {
        let config = ThresholdConfig {
            scenario: cfg,
            grid: common.grid,
            tolerance,
        };
        RunReport::new(
            "threshold",
            common.seed,
            config,
            q,
            start.elapsed().as_secs_f64(),
        )
        .write(out)?;
    }
    Ok(0)
}

fn validate(common: &Common, rounds: u64, sigmas: f64) -> anyhow::Result<u8> {
    let start = Instant::now();
    let cfg = resolve(common.config.as_deref(), &common.scenario)?;
    let attack = build_depolarizing_attack(&noise_spec(&cfg)?)?;
    let (exact, _) = analytic_statistics(&attack.first, &attack.second)?;
    let est = parallel::monte_carlo(
        &attack.first,
        &attack.second,
        rounds,
        common.seed,
        OperationWeights::default(),
    )?;
    let checks: Vec<FieldCheck> = ObservedStatistics::FIELD_NAMES
        .iter()
        .zip(exact.values())
        .zip(est.stats.values())
        .zip(est.std_errors.values())
        .map(|(((&field, analytic), monte_carlo), std_error)| {
            let z = (monte_carlo - analytic) / std_error;
            FieldCheck {
                field,
                analytic,
                monte_carlo,
                std_error,
                z,
                pass: z.abs() <= sigmas,
            }
        })
        .collect();
    println!(
        "{:<12} {:>14} {:>14} {:>12} {:>8}",
        "field", "analytic", "monte_carlo", "std_error", "z"
    );
    for c in &checks {
        println!(
            "{:<12} {:>14.8} {:>14.8} {:>12.3e} {:>8.2}  {}",
            c.field,
            c.analytic,
            c.monte_carlo,
            c.std_error,
            c.z,
            if c.pass { "PASS" } else { "FAIL" }
        );
    }
    let all = checks.iter().all(|c| c.pass);
    if let Some(out) = &common.out {
        let config = ValidateConfig {
            scenario: cfg,
            rounds,
            sigmas,
        };
        RunReport::new(
            "validate",
            common.seed,
            config,
            &checks,
            start.elapsed().as_secs_f64(),
        )
        .write(out)?;
    }
    Ok(if all { 0 } else { EXIT_USAGE })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Rate { common, stats } => rate(common, stats.as_ref()),
        Command::Curve {
            common,
            start,
            end,
            steps,
            report,
        } => curve(common, *start, *end, *steps, report.as_ref()).context("curve"),
        Command::Threshold { common, tolerance } => threshold(common, *tolerance),
        Command::Validate {
            common,
            rounds,
            sigmas,
        } => validate(common, *rounds, *sigmas),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
