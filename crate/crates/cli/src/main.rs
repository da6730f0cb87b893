use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use heisenlab_cli::run::{run, RunOptions};
use heisenlab_cli::scenario::parse_scenario;
use heisenlab_cli::{load_verify_config, plot, run_verify, CliError, VerifyOverrides, EXIT_CHECK_FAILURE, EXIT_USAGE};

#[derive(Parser)]
#[command(name = "heisenlab", version, about = "Heisenberg-picture operator dynamics against classical mechanics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario file and write CSV, JSON report and plots.
    Run(RunArgs),
    /// Run the operator-identity suite.
    Verify(VerifyArgs),
    /// Re-render plots from a run report.
    Plot(PlotArgs),
}

#[derive(Args)]
struct RunArgs {
    scenario: PathBuf,
    /// Fock levels per dof.
    #[arg(long)]
    basis_levels: Option<usize>,
    #[arg(long)]
    interior_fraction: Option<f64>,
    /// Tolerance for the scenario's identity checks; enables them.
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    #[arg(long)]
    no_plots: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// JSON verification config; defaults apply to omitted keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    basis_levels: Option<usize>,
    #[arg(long)]
    interior_fraction: Option<f64>,
    /// Overrides every per-check tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct PlotArgs {
    report: PathBuf,
    /// Defaults to the report's directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn dispatch(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Run(args) => {
            let mut scenario = parse_scenario(&args.scenario)?;
            if let Some(n) = args.basis_levels {
                scenario.basis.levels = Some(n);
            }
            if let Some(f) = args.interior_fraction {
                scenario.basis.interior_fraction = f;
            }
            if let Some(t) = args.tolerance {
                scenario.checks = true;
                scenario.check_tolerance = Some(t);
            }
            let opts = RunOptions {
                out_dir: args.out_dir,
                plots: !args.no_plots,
            };
            let (report, path) = run(&scenario, &opts)?;
            println!(
                "{}: max gap {:.3e} ({} oracle, linear: {})",
                scenario.name, report.max_gap, report.classical_oracle, report.linear_scenario_exactness
            );
            if let Some(checks) = &report.checks {
                let passed = checks.iter().filter(|c| c.passed).count();
                println!("checks: {passed}/{} passed", checks.len());
            }
            if !report.expectations_met {
                println!("expectation on the maximum gap not met");
            }
            println!("report: {}", path.display());
            Ok(report.passed)
        }
        Command::Verify(args) => {
            let mut cfg = load_verify_config(args.config.as_deref())?;
            VerifyOverrides {
                basis_levels: args.basis_levels,
                interior_fraction: args.interior_fraction,
                tolerance: args.tolerance,
                seed: args.seed,
            }
            .apply(&mut cfg);
            let (report, path) = run_verify(&cfg, &args.out_dir)?;
            for c in report.failures() {
                println!(
                    "FAIL {}: {} = {} error {:.3e} > {:.1e}",
                    c.name, c.lhs, c.rhs, c.measured_error, c.tolerance
                );
            }
            for a in &report.missing_anchors {
                println!("MISSING {a}");
            }
            println!(
                "verify: {}/{} checks passed; report: {}",
                report.summary.passed,
                report.summary.total,
                path.display()
            );
            Ok(report.all_passed())
        }
        Command::Plot(args) => {
            for name in plot::plot_report(&args.report, args.out_dir.as_deref())? {
                println!("{name}");
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECK_FAILURE),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
