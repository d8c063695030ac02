use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, ValueEnum};
use dynglobal::harness::{
    adoption_sweep, generate_random_scenario, parse_scenario, report_runs, run_scenario, Mode, RunOptions, RunResult,
    Scenario,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Generic,
    Dynamic,
    Both,
}

/// Replay alldifferent scenarios under generic and dynamic adoption and
/// compare their work counters.
#[derive(Debug, Parser)]
#[command(name = "dynglobal", version)]
struct Args {
    /// Scenario file to replay.
    #[arg(long, conflicts_with_all = ["random", "sweep"])]
    scenario: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "both")]
    mode: ModeArg,

    /// Generate a random scenario instead of reading one.
    #[arg(long, conflicts_with = "sweep")]
    random: bool,

    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Maximum number of live variables in a random scenario.
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..=64))]
    pmax: u64,

    /// Number of values in a random scenario or sweep.
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..=64))]
    dmax: u64,

    /// Probability of a DEL step in a random scenario.
    #[arg(long, default_value_t = 0.2)]
    delrate: f64,

    /// Add P full-domain variables one at a time (d = --dmax).
    #[arg(long, value_name = "P")]
    sweep: Option<usize>,

    /// Write per-step counters as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,

    /// Cross-check every CHECK against brute-force filtering when small enough.
    #[arg(long)]
    verify_oracle: bool,

    /// Print the domains after every step.
    #[arg(long)]
    trace: bool,

    /// Print the scenario text before running it.
    #[arg(long)]
    print_scenario: bool,
}

fn load(args: &Args) -> Result<Scenario> {
    if let Some(path) = &args.scenario {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        return parse_scenario(&text).with_context(|| format!("parsing {}", path.display()));
    }
    if args.random {
        if !(0.0..=1.0).contains(&args.delrate) {
            bail!("--delrate must be within 0..1, got {}", args.delrate);
        }
        return Ok(generate_random_scenario(
            args.seed,
            args.pmax as usize,
            args.dmax as usize,
            args.delrate,
        ));
    }
    if let Some(p) = args.sweep {
        return Ok(adoption_sweep(p, args.dmax as usize));
    }
    bail!("one of --scenario, --random or --sweep is required")
}

fn run_modes(scenario: &Scenario, mode: ModeArg, options: RunOptions) -> Result<Vec<RunResult>> {
    let one = |m: Mode| run_scenario(scenario, m, options).with_context(|| format!("{m} run"));
    match mode {
        ModeArg::Generic => Ok(vec![one(Mode::Generic)?]),
        ModeArg::Dynamic => Ok(vec![one(Mode::Dynamic)?]),
        ModeArg::Both => std::thread::scope(|s| {
            let g = s.spawn(|| one(Mode::Generic));
            let d = s.spawn(|| one(Mode::Dynamic));
            let g = g.join().expect("generic run panicked")?;
            let d = d.join().expect("dynamic run panicked")?;
            Ok(vec![g, d])
        }),
    }
}

fn print_checks(scenario: &Scenario, run: &RunResult) {
    for c in &run.checks {
        let state = match &c.domains {
            None => "inconsistent".to_string(),
            Some(doms) => doms
                .iter()
                .map(|(name, vals)| {
                    let vals: Vec<&str> = vals.iter().map(|&v| scenario.value_name(v)).collect();
                    format!("{name}={{{}}}", vals.join(","))
                })
                .collect::<Vec<_>>()
                .join(" "),
        };
        println!("[{}] CHECK at step {}: {state}", run.mode, c.step);
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

/// Returns false when a cross-check failed.
fn real_main() -> Result<bool> {
    let args = Args::parse();
    let scenario = load(&args)?;
    if args.print_scenario {
        print!("{}", scenario.to_text());
    }
    let options = RunOptions {
        verify_oracle: args.verify_oracle,
        trace: args.trace,
    };
    let runs = run_modes(&scenario, args.mode, options)?;

    let mut ok = true;
    for run in &runs {
        for line in &run.trace {
            println!("{line}");
        }
        print_checks(&scenario, run);
        if run.restore_mismatches > 0 {
            eprintln!(
                "[{}] {} POPs did not restore the earlier state",
                run.mode, run.restore_mismatches
            );
            ok = false;
        }
        if args.verify_oracle {
            println!(
                "[{}] oracle: {} checks, {} mismatches",
                run.mode, run.oracle_checks, run.oracle_mismatches
            );
            ok &= run.oracle_mismatches == 0;
        }
    }
    if let [g, d] = &runs[..] {
        let differing = g.checks.iter().zip(&d.checks).filter(|(a, b)| a != b).count();
        if differing > 0 || g.checks.len() != d.checks.len() {
            eprintln!("generic and dynamic disagree on {differing} CHECKs");
            ok = false;
        }
    }

    let refs: Vec<&RunResult> = runs.iter().collect();
    let report = report_runs(&refs);
    print!("{}", report.text);
    if let Some(path) = &args.csv {
        std::fs::write(path, &report.csv).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(ok)
}
