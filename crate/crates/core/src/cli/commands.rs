//! The five subcommands as library functions. Each writes its CSV artifacts
//! into `out` and returns the computed result.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::config::{parse_config, ConfigError, ConfigErrors, Realized, RunConfig};
use super::output::{fmt_nodes, fmt_num, fmt_opt, parse_nodes, parse_num, read_key_values, write_atomic, Csv};
use crate::bounds::{analyze_run, zeno_diagnostics, BoundsError, RunBounds, RunBoundsInput, ZenoReport};
use crate::model::{verify_one_sided_bound, ModelError, OneSidedReport};
use crate::simulator::{simulate, EventLog, EventRecord, HybridTrace, NodeTrigger, SimError};
use crate::spectral::{check_sync_condition, select_pinned_nodes, ConditionReport, PinSet, Selection, SpectralError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigErrors),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("missing run artifact {0}; run `simulate` with the same --out first")]
    MissingRunArtifacts(PathBuf),
    #[error("malformed run artifact {path}: {message}")]
    BadArtifact { path: PathBuf, message: String },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Reads and validates a configuration file; `seed` overrides the file's seed.
pub fn load_config(path: &Path, seed: Option<u64>) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
    let mut cfg = parse_config(&text, path.parent())?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

/// Explicit pins from the configuration, otherwise the greedy selection at
/// the nominal coupling strength.
pub fn resolve_pins(cfg: &RunConfig) -> PinSet {
    match &cfg.pins {
        Some(p) => p.clone(),
        None => select_pinned_nodes(&cfg.spec.topology, cfg.gamma(), cfg.nominal_c()).pins,
    }
}

fn write(out: &Path, name: &str, csv: &Csv) -> Result<(), CliError> {
    let path = out.join(name);
    write_atomic(&path, csv.as_str()).map_err(|source| CliError::Write { path, source })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub pins: PinSet,
    pub c: f64,
    pub report: ConditionReport,
}

/// Evaluates the synchronization condition; writes `check.csv`.
pub fn cmd_check(cfg: &RunConfig, out: &Path) -> Result<CheckOutcome, CliError> {
    let pins = resolve_pins(cfg);
    let c = cfg.nominal_c();
    let report = check_sync_condition(cfg.gamma(), c, &cfg.spec.topology, &pins)?;
    let mut csv = Csv::with_header(&["key", "value"]);
    csv.kv("gamma", fmt_num(cfg.gamma()));
    csv.kv("c", fmt_num(c));
    csv.kv("pins", fmt_nodes(pins.indices()));
    csv.kv("lambda_max_abar", fmt_opt(report.lambda_max_abar));
    csv.kv("min_coupling", fmt_num(report.min_coupling));
    csv.kv("satisfied", report.satisfied.to_string());
    write(out, "check.csv", &csv)?;
    Ok(CheckOutcome { pins, c, report })
}

/// Runs the greedy pin selection; writes `select.csv` with one row per examined set.
pub fn cmd_select(cfg: &RunConfig, out: &Path) -> Result<Selection, CliError> {
    let sel = select_pinned_nodes(&cfg.spec.topology, cfg.gamma(), cfg.nominal_c());
    let n = cfg.spec.n_nodes();
    let mut csv = Csv::with_header(&["l", "pins", "lambda_max_abar", "min_coupling", "satisfied", "note"]);
    for trial in &sel.trail {
        let note = if trial.pins.len() == n { "all nodes pinned" } else { "" };
        csv.row(&[
            trial.pins.len().to_string(),
            fmt_nodes(trial.pins.indices()),
            fmt_opt(trial.report.lambda_max_abar),
            fmt_num(trial.report.min_coupling),
            trial.report.satisfied.to_string(),
            note.to_string(),
        ]);
    }
    write(out, "select.csv", &csv)?;
    Ok(sel)
}

#[derive(Debug, Clone)]
pub struct SimulateOutcome {
    pub realized: Realized,
    pub trace: HybridTrace,
    pub log: EventLog,
    pub zeno: ZenoReport,
}

/// Simulates the hybrid system; writes `trace.csv`, `events.csv`, `summary.csv`.
pub fn cmd_simulate(cfg: &RunConfig, out: &Path) -> Result<SimulateOutcome, CliError> {
    let pins = resolve_pins(cfg);
    let realized = cfg.realize(pins)?;
    let sim = cfg.sim_config(&realized)?;
    let (trace, log) = simulate(&sim)?;
    let zeno = zeno_diagnostics(&log, (cfg.t0, cfg.t_end), realized.pins.indices())?;

    write(out, "trace.csv", &trace_csv(&trace))?;
    write(out, "events.csv", &events_csv(&log))?;
    write(out, "summary.csv", &summary_csv(cfg, &realized, &trace, &log, &zeno)?)?;
    Ok(SimulateOutcome { realized, trace, log, zeno })
}

fn trace_csv(trace: &HybridTrace) -> Csv {
    let (nn, n) = (trace.n_nodes, trace.dim);
    let mut header = vec!["t".to_string(), "jump".to_string(), "c".to_string()];
    for i in 1..=nn {
        for j in 1..=n {
            header.push(format!("x_{i}_{j}"));
        }
    }
    header.extend((1..=n).map(|j| format!("z_{j}")));
    header.extend((1..=nn).map(|i| format!("V_{i}")));
    header.push("V".into());
    header.push("W".into());
    let mut csv = Csv::with_header(&header);
    let mut cells = Vec::with_capacity(header.len());
    for r in &trace.rows {
        cells.clear();
        cells.push(fmt_num(r.t));
        cells.push((r.jump as u8).to_string());
        cells.push(fmt_num(r.c));
        cells.extend(r.states.iter().map(|x| fmt_num(*x)));
        cells.extend(r.z.iter().map(|x| fmt_num(*x)));
        cells.extend(r.v.iter().map(|x| fmt_num(*x)));
        cells.push(fmt_num(r.v_total));
        cells.push(fmt_num(r.w));
        csv.row(&cells);
    }
    csv
}

fn events_csv(log: &EventLog) -> Csv {
    let mut csv = Csv::with_header(&["node", "k", "t", "V_before", "V_after", "c_at_event"]);
    for e in &log.records {
        csv.row(&[
            e.node.to_string(),
            e.k.to_string(),
            fmt_num(e.t),
            fmt_num(e.v_before),
            fmt_num(e.v_after),
            fmt_num(e.c),
        ]);
    }
    csv
}

fn summary_csv(
    cfg: &RunConfig,
    realized: &Realized,
    trace: &HybridTrace,
    log: &EventLog,
    zeno: &ZenoReport,
) -> Result<Csv, CliError> {
    let cond = check_sync_condition(cfg.gamma(), cfg.nominal_c(), &cfg.spec.topology, &realized.pins)?;
    let (first, last) = (trace.first(), trace.last());
    let mut csv = Csv::with_header(&["key", "value"]);
    csv.kv("seed", cfg.seed.to_string());
    csv.kv("dynamics", cfg.dynamics_kind.name());
    csv.kv("n_nodes", cfg.spec.n_nodes().to_string());
    csv.kv("dim", cfg.spec.dim().to_string());
    csv.kv("gamma", fmt_num(cfg.gamma()));
    csv.kv("t0", fmt_num(cfg.t0));
    csv.kv("t_end", fmt_num(cfg.t_end));
    csv.kv("step", fmt_num(cfg.step));
    csv.kv("event_tol", fmt_num(cfg.event_tol));
    csv.kv("pins", fmt_nodes(realized.pins.indices()));
    csv.kv("lambda_max_abar", fmt_opt(cond.lambda_max_abar));
    csv.kv("min_coupling", fmt_num(cond.min_coupling));
    for (&i, t) in realized.pins.indices().iter().zip(&realized.triggers) {
        csv.kv(&format!("alpha_{i}"), fmt_num(t.alpha));
        csv.kv(&format!("beta_{i}"), fmt_num(t.beta));
        csv.kv(&format!("d_{i}"), fmt_num(t.d));
    }
    csv.kv("V0", fmt_num(first.v_total));
    csv.kv("W0", fmt_num(first.w));
    csv.kv("final_V", fmt_num(last.v_total));
    csv.kv("final_W", fmt_num(last.w));
    csv.kv("W_max", fmt_num(trace.w_max()));
    csv.kv("c0", fmt_num(first.c));
    csv.kv("final_c", fmt_num(last.c));
    csv.kv("c_max", fmt_num(trace.c_max()));
    csv.kv("events_total", log.len().to_string());
    for nz in &zeno.nodes {
        csv.kv(&format!("events_{}", nz.node), nz.count.to_string());
        csv.kv(&format!("min_gap_{}", nz.node), fmt_opt(nz.min_gap));
        csv.kv(&format!("mean_gap_{}", nz.node), fmt_opt(nz.mean_gap));
    }
    csv.kv("global_min_gap", fmt_opt(zeno.global_min_gap));
    Ok(csv)
}

/// Everything `bounds` needs from a finished run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunArtifacts {
    pub pins: PinSet,
    pub triggers: Vec<NodeTrigger>,
    pub t0: f64,
    pub t_end: f64,
    pub event_tol: f64,
    pub w0: f64,
    pub w_max: f64,
    pub c_max: f64,
    pub log: EventLog,
}

/// Reads `summary.csv` and `events.csv` from a simulate output directory.
pub fn read_run_artifacts(dir: &Path, n_nodes: usize) -> Result<RunArtifacts, CliError> {
    let summary_path = dir.join("summary.csv");
    let events_path = dir.join("events.csv");
    for p in [&summary_path, &events_path] {
        if !p.is_file() {
            return Err(CliError::MissingRunArtifacts(p.clone()));
        }
    }
    let read = |p: &Path| fs::read_to_string(p).map_err(|source| CliError::Read { path: p.to_path_buf(), source });
    let bad = |p: &Path, m: String| CliError::BadArtifact { path: p.to_path_buf(), message: m };

    let kv: BTreeMap<String, String> = read_key_values(&read(&summary_path)?).map_err(|m| bad(&summary_path, m))?;
    let num = |key: &str| -> Result<f64, CliError> {
        kv.get(key).and_then(|s| parse_num(s)).ok_or_else(|| bad(&summary_path, format!("missing or invalid `{key}`")))
    };
    let pin_list = kv
        .get("pins")
        .and_then(|s| parse_nodes(s))
        .ok_or_else(|| bad(&summary_path, "missing or invalid `pins`".into()))?;
    let pins = PinSet::new(pin_list, n_nodes).map_err(|e| bad(&summary_path, e.to_string()))?;
    let mut triggers = Vec::with_capacity(pins.len());
    for &i in pins.indices() {
        triggers.push(NodeTrigger {
            alpha: num(&format!("alpha_{i}"))?,
            beta: num(&format!("beta_{i}"))?,
            d: num(&format!("d_{i}"))?,
        });
    }

    let text = read(&events_path)?;
    let mut records = Vec::new();
    for (n, line) in text.lines().enumerate().skip(1) {
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        let parsed = (cells.len() == 6).then(|| {
            Some(EventRecord {
                node: cells[0].parse().ok()?,
                k: cells[1].parse().ok()?,
                t: parse_num(cells[2])?,
                v_before: parse_num(cells[3])?,
                v_after: parse_num(cells[4])?,
                c: parse_num(cells[5])?,
            })
        });
        match parsed.flatten() {
            Some(r) => records.push(r),
            None => return Err(bad(&events_path, format!("line {}: malformed event row", n + 1))),
        }
    }
    Ok(RunArtifacts {
        pins,
        triggers,
        t0: num("t0")?,
        t_end: num("t_end")?,
        event_tol: num("event_tol")?,
        w0: num("W0")?,
        w_max: num("W_max")?,
        c_max: num("c_max")?,
        log: EventLog { records },
    })
}

/// Compares each logged inter-event gap with its lower bound `T_k`; reads a
/// previous `simulate` output from `out` and writes `bounds.csv` and
/// `event_bounds.csv`.
pub fn cmd_bounds(cfg: &RunConfig, out: &Path) -> Result<RunBounds, CliError> {
    let run = read_run_artifacts(out, cfg.spec.n_nodes())?;
    let input = RunBoundsInput {
        topology: &cfg.spec.topology,
        inner: &cfg.spec.inner,
        pins: &run.pins,
        triggers: &run.triggers,
        gamma: cfg.gamma(),
        c: run.c_max,
        t0: run.t0,
        w0: run.w0,
        w_sup: run.w_max,
        log: &run.log,
        epsilon: cfg.epsilon,
        mu: cfg.mu,
        event_tol: run.event_tol,
    };
    let rb = analyze_run(&input)?;

    let mut csv = Csv::with_header(&["key", "value"]);
    csv.kv("epsilon", fmt_num(rb.epsilon));
    csv.kv("c", fmt_num(run.c_max));
    csv.kv("theta", fmt_opt(rb.theta.as_ref().ok().copied()));
    let p = rb.params.as_ref();
    csv.kv("mu", fmt_opt(p.map(|p| p.mu)));
    csv.kv("alpha_hat", fmt_opt(p.map(|p| p.alpha_hat)));
    csv.kv("beta_check", fmt_opt(p.map(|p| p.beta_check)));
    csv.kv("M_proof", fmt_opt(rb.m_proof));
    csv.kv("M_observed", fmt_num(rb.m_observed));
    for s in &rb.sigmas {
        csv.kv(&format!("sigma_proof_{}", s.node), fmt_opt(s.proof.as_ref().ok().copied()));
        csv.kv(&format!("sigma_observed_{}", s.node), fmt_opt(s.observed.as_ref().ok().copied()));
        csv.kv(&format!("sigma_used_{}", s.node), fmt_num(s.used));
    }
    let checked = rb.events.iter().filter(|e| e.sound.is_some()).count();
    csv.kv("events", rb.events.len().to_string());
    csv.kv("gaps_checked", checked.to_string());
    csv.kv("violations", rb.violations.to_string());
    write(out, "bounds.csv", &csv)?;

    let mut ev = Csv::with_header(&["node", "k", "t", "T_k", "gap", "sound"]);
    for e in &rb.events {
        ev.row(&[
            e.node.to_string(),
            e.k.to_string(),
            fmt_num(e.t),
            fmt_opt(e.bound.as_ref().ok().copied()),
            fmt_opt(e.gap),
            e.sound.map_or("NA".to_string(), |s| s.to_string()),
        ]);
    }
    write(out, "event_bounds.csv", &ev)?;
    Ok(rb)
}

/// Samples the one-sided Lipschitz inequality on the configured box; writes `verify.csv`.
pub fn cmd_verify_assumption(cfg: &RunConfig, out: &Path) -> Result<OneSidedReport, CliError> {
    let v = cfg
        .verify
        .as_ref()
        .ok_or_else(|| CliError::Config(ConfigErrors(vec![ConfigError::MissingField("verify".into())])))?;
    let rep = verify_one_sided_bound(&cfg.spec.dynamics, &cfg.spec.inner, &v.bounds, v.samples, cfg.seed)?;
    let mut csv = Csv::with_header(&["key", "value"]);
    csv.kv("gamma", fmt_num(rep.gamma));
    csv.kv("samples", rep.n_samples.to_string());
    csv.kv("seed", rep.seed.to_string());
    for (k, (lo, hi)) in rep.bounds.iter().enumerate() {
        csv.kv(&format!("box_{}", k + 1), format!("{} {}", fmt_num(*lo), fmt_num(*hi)));
    }
    csv.kv("violations", rep.violation_count.to_string());
    csv.kv("empirical_gamma_hat", fmt_opt(rep.empirical_gamma_hat));
    write(out, "verify.csv", &csv)?;
    Ok(rep)
}
