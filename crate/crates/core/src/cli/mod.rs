//! Command-line front end: configuration parsing, CSV artifacts and the
//! `check`, `select`, `simulate`, `bounds` and `verify-assumption` commands.
//!
//! Exit codes: `0` success, `2` when the command ran but its verdict is
//! negative (condition not satisfied, bound violated, assumption violated),
//! `1` on any error.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{
    cmd_bounds, cmd_check, cmd_select, cmd_simulate, cmd_verify_assumption, load_config, read_run_artifacts,
    resolve_pins, CheckOutcome, CliError, RunArtifacts, SimulateOutcome,
};
pub use config::{parse_config, ConfigError, ConfigErrors, InitialStates, Realized, RunConfig, TriggerBlock};

#[derive(Debug, Parser)]
#[command(name = "pinsync", version, about = "Pinning synchronization with event-triggered impulses")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `seed` in the configuration.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the synchronization condition for the configured pins.
    Check(Common),
    /// Run the greedy pin selection and print every examined set.
    Select(Common),
    /// Simulate the network and write trace, events and summary.
    Simulate(Common),
    /// Check logged inter-event gaps against their lower bounds.
    Bounds(Common),
    /// Sample the one-sided Lipschitz inequality on a box.
    VerifyAssumption(Common),
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(command: Command) -> Result<i32, CliError> {
    let (common, name) = match &command {
        Command::Check(c) => (c, "check"),
        Command::Select(c) => (c, "select"),
        Command::Simulate(c) => (c, "simulate"),
        Command::Bounds(c) => (c, "bounds"),
        Command::VerifyAssumption(c) => (c, "verify-assumption"),
    };
    let cfg = load_config(&common.config, common.seed)?;
    let out = common.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    match name {
        "check" => {
            let r = cmd_check(&cfg, &out)?;
            println!("pins: [{}]", output::fmt_nodes(r.pins.indices()));
            match r.report.lambda_max_abar {
                Some(l) => println!("lambda_max(Abar) = {l:.6}"),
                None => println!("lambda_max(Abar) undefined: every node pinned"),
            }
            println!("minimum coupling = {:.6}", r.report.min_coupling);
            println!("c = {} -> {}", r.c, if r.report.satisfied { "satisfied" } else { "NOT satisfied" });
            Ok(if r.report.satisfied { 0 } else { 2 })
        }
        "select" => {
            let sel = cmd_select(&cfg, &out)?;
            println!("{:>3}  {:<24} {:>14} {:>14}  satisfied", "l", "pins", "lambda_max", "gamma/|lambda|");
            for t in &sel.trail {
                println!(
                    "{:>3}  {:<24} {:>14} {:>14.6}  {}",
                    t.pins.len(),
                    format!("[{}]", output::fmt_nodes(t.pins.indices())),
                    t.report.lambda_max_abar.map_or("-".to_string(), |l| format!("{l:.6}")),
                    t.report.min_coupling,
                    t.report.satisfied
                );
            }
            let n = cfg.spec.n_nodes();
            if sel.pins.len() == n {
                println!("every node pinned: synchronization holds for any c > 0");
            }
            Ok(0)
        }
        "simulate" => {
            let r = cmd_simulate(&cfg, &out)?;
            let (first, last) = (r.trace.first(), r.trace.last());
            println!("pins: [{}]", output::fmt_nodes(r.realized.pins.indices()));
            println!("V: {:.6e} -> {:.6e}", first.v_total, last.v_total);
            println!("W: {:.6e} -> {:.6e}", first.w, last.w);
            println!("c: {:.6} -> {:.6}", first.c, last.c);
            for nz in &r.zeno.nodes {
                println!("node {}: {} events, min gap {}", nz.node, nz.count, output::fmt_opt(nz.min_gap));
            }
            println!("artifacts written to {}", out.display());
            Ok(0)
        }
        "bounds" => {
            let rb = cmd_bounds(&cfg, &out)?;
            let checked = rb.events.iter().filter(|e| e.sound.is_some()).count();
            println!("{} events, {} gaps checked, {} violations", rb.events.len(), checked, rb.violations);
            Ok(if rb.violations == 0 { 0 } else { 2 })
        }
        _ => {
            let rep = cmd_verify_assumption(&cfg, &out)?;
            println!(
                "{} samples, {} violations, empirical gamma_hat = {}",
                rep.n_samples,
                rep.violation_count,
                output::fmt_opt(rep.empirical_gamma_hat)
            );
            Ok(if rep.violation_count == 0 { 0 } else { 2 })
        }
    }
}
