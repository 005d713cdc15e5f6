//! JSON run configuration.
//!
//! Every problem in a document is collected and reported together, each with
//! the path of the offending field.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde_json::{Map, Value};

use crate::model::{
    fixture_topology8, Chen, CouplingPolicy, InnerCoupling, Linear, NetworkSpec, NodeDynamics, Topology, Zero,
    CHEN_GAMMA,
};
use crate::rng::SplitMix64;
use crate::simulator::{NodeTrigger, SimConfig, SimError, TriggerParams};
use crate::spectral::PinSet;

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Syntax { line: usize, column: usize, message: String },
    UnknownField(String),
    MissingField(String),
    InvariantViolation { path: String, message: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Syntax { line, column, message } => {
                write!(f, "syntax error at {line}:{column}: {message}")
            }
            ConfigError::UnknownField(p) => write!(f, "unknown field `{p}`"),
            ConfigError::MissingField(p) => write!(f, "missing field `{p}`"),
            ConfigError::InvariantViolation { path, message } => write!(f, "`{path}`: {message}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, e) in self.0.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DynamicsKind {
    Chen,
    Linear,
    Zero,
}

impl DynamicsKind {
    pub fn name(self) -> &'static str {
        match self {
            DynamicsKind::Chen => "chen",
            DynamicsKind::Linear => "linear",
            DynamicsKind::Zero => "zero",
        }
    }
}

/// Optional per-node overrides; missing values are filled at realization.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TriggerBlock {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub d: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialStates {
    /// `x_ij` drawn uniformly from the open interval `(low, high)`.
    Random {
        low: f64,
        high: f64,
    },
    Literal(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyBlock {
    pub bounds: Vec<(f64, f64)>,
    pub samples: usize,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub spec: NetworkSpec,
    pub dynamics_kind: DynamicsKind,
    /// `None` selects pins with the greedy procedure at the nominal coupling.
    pub pins: Option<PinSet>,
    pub triggers: BTreeMap<usize, TriggerBlock>,
    pub default_betas: Vec<f64>,
    pub t0: f64,
    pub t_end: f64,
    pub step: f64,
    pub event_tol: f64,
    pub max_events_per_node: usize,
    pub initial: InitialStates,
    pub z0: Vec<f64>,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub epsilon: f64,
    pub mu: Option<f64>,
    pub verify: Option<VerifyBlock>,
}

/// Trigger values actually used by a run, in pin order.
#[derive(Debug, Clone, PartialEq)]
pub struct Realized {
    pub pins: PinSet,
    pub triggers: Vec<NodeTrigger>,
    pub initial_states: Vec<Vec<f64>>,
}

pub const DEFAULT_BETAS: [f64; 3] = [0.8, 0.6, 0.9];

impl RunConfig {
    pub fn gamma(&self) -> f64 {
        self.spec.dynamics.gamma()
    }

    /// Coupling strength used by `check`/`select`: fixed `c`, the saturation
    /// cap, or `c0` for the unsaturated adaptive law.
    pub fn nominal_c(&self) -> f64 {
        match self.spec.coupling {
            CouplingPolicy::Fixed { c } => c,
            CouplingPolicy::SaturatedAdaptive { cap, .. } => cap,
            CouplingPolicy::Adaptive { c0, .. } => c0,
        }
    }

    /// Resolves pins, draws random initial data and gains, and fills α_i.
    ///
    /// Draw order from `SplitMix64(seed)`: all `x_ij` (node-major) when
    /// initial states are random, then one `d_i ∈ (0,1)` per pinned node
    /// lacking an explicit gain, in pin order.
    pub fn realize(&self, pins: PinSet) -> Result<Realized, SimError> {
        let (nn, n) = (self.spec.n_nodes(), self.spec.dim());
        let mut rng = SplitMix64::new(self.seed);
        let initial_states = match &self.initial {
            InitialStates::Literal(v) => v.clone(),
            InitialStates::Random { low, high } => {
                (0..nn).map(|_| (0..n).map(|_| rng.uniform_open(*low, *high)).collect()).collect()
            }
        };
        let mut triggers = Vec::with_capacity(pins.len());
        for (pos, &i) in pins.indices().iter().enumerate() {
            let block = self.triggers.get(&i).copied().unwrap_or_default();
            let d = match block.d {
                Some(d) => d,
                None => rng.uniform_open(0.0, 1.0),
            };
            let beta = block.beta.unwrap_or(self.default_betas[pos % self.default_betas.len()]);
            let alpha = match block.alpha {
                Some(a) => a,
                None => {
                    let v0: f64 = initial_states[i].iter().zip(&self.z0).map(|(x, z)| (x - z) * (x - z)).sum();
                    1.01 * v0
                }
            };
            triggers.push(NodeTrigger { alpha, beta, d });
        }
        Ok(Realized { pins, triggers, initial_states })
    }

    pub fn sim_config(&self, realized: &Realized) -> Result<SimConfig, SimError> {
        let mut cfg = SimConfig::new(
            self.spec.clone(),
            realized.pins.clone(),
            TriggerParams::new(realized.triggers.clone())?,
            realized.initial_states.clone(),
            self.z0.clone(),
        )
        .with_horizon(self.t0, self.t_end)
        .with_step(self.step)
        .with_event_tol(self.event_tol);
        cfg.max_events_per_node = self.max_events_per_node;
        Ok(cfg)
    }
}

struct Ctx {
    errors: Vec<ConfigError>,
}

impl Ctx {
    fn violation(&mut self, path: &str, message: impl Into<String>) {
        self.errors.push(ConfigError::InvariantViolation { path: path.to_string(), message: message.into() });
    }

    fn missing(&mut self, path: &str) {
        self.errors.push(ConfigError::MissingField(path.to_string()));
    }
}

struct Fields<'a> {
    path: String,
    map: &'a Map<String, Value>,
    seen: Vec<&'static str>,
}

impl<'a> Fields<'a> {
    fn new(path: &str, map: &'a Map<String, Value>) -> Self {
        Self { path: path.to_string(), map, seen: Vec::new() }
    }

    fn sub(&self, key: &str) -> String {
        if self.path.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.path)
        }
    }

    fn get(&mut self, key: &'static str) -> Option<&'a Value> {
        self.seen.push(key);
        self.map.get(key)
    }

    fn required(&mut self, ctx: &mut Ctx, key: &'static str) -> Option<&'a Value> {
        let v = self.get(key);
        if v.is_none() {
            ctx.missing(&self.sub(key));
        }
        v
    }

    fn f64_or(&mut self, ctx: &mut Ctx, key: &'static str, default: Option<f64>) -> Option<f64> {
        match self.get(key) {
            Some(v) => as_f64(ctx, &self.sub(key), v),
            None if default.is_some() => default,
            None => {
                ctx.missing(&self.sub(key));
                None
            }
        }
    }

    fn finish(self, ctx: &mut Ctx) {
        for k in self.map.keys() {
            if !self.seen.contains(&k.as_str()) {
                ctx.errors.push(ConfigError::UnknownField(self.sub(k)));
            }
        }
    }
}

fn as_f64(ctx: &mut Ctx, path: &str, v: &Value) -> Option<f64> {
    match v.as_f64() {
        Some(x) if x.is_finite() => Some(x),
        _ => {
            ctx.violation(path, "expected a finite number");
            None
        }
    }
}

fn as_object<'a>(ctx: &mut Ctx, path: &str, v: &'a Value) -> Option<&'a Map<String, Value>> {
    let o = v.as_object();
    if o.is_none() {
        ctx.violation(path, "expected an object");
    }
    o
}

fn as_vector(ctx: &mut Ctx, path: &str, v: &Value) -> Option<Vec<f64>> {
    let arr = match v.as_array() {
        Some(a) => a,
        None => {
            ctx.violation(path, "expected an array of numbers");
            return None;
        }
    };
    let mut out = Vec::with_capacity(arr.len());
    let mut ok = true;
    for (k, x) in arr.iter().enumerate() {
        match as_f64(ctx, &format!("{path}[{k}]"), x) {
            Some(x) => out.push(x),
            None => ok = false,
        }
    }
    ok.then_some(out)
}

fn as_matrix(ctx: &mut Ctx, path: &str, v: &Value) -> Option<Vec<Vec<f64>>> {
    let arr = match v.as_array() {
        Some(a) => a,
        None => {
            ctx.violation(path, "expected a matrix (array of rows)");
            return None;
        }
    };
    let mut rows = Vec::with_capacity(arr.len());
    let mut ok = true;
    for (k, r) in arr.iter().enumerate() {
        match as_vector(ctx, &format!("{path}[{k}]"), r) {
            Some(r) => rows.push(r),
            None => ok = false,
        }
    }
    ok.then_some(rows)
}

fn square(ctx: &mut Ctx, path: &str, rows: Vec<Vec<f64>>) -> Option<DMatrix<f64>> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        ctx.violation(path, "expected a non-empty square matrix");
        return None;
    }
    Some(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// Parses a configuration document. A relative topology file path resolves
/// against `base_dir`; `output_dir` stays relative to the working directory.
pub fn parse_config(text: &str, base_dir: Option<&Path>) -> Result<RunConfig, ConfigErrors> {
    let root: Value = serde_json::from_str(text).map_err(|e| {
        ConfigErrors(vec![ConfigError::Syntax { line: e.line(), column: e.column(), message: e.to_string() }])
    })?;
    let mut ctx = Ctx { errors: Vec::new() };
    let Some(map) = root.as_object() else {
        return Err(ConfigErrors(vec![ConfigError::InvariantViolation {
            path: "$".into(),
            message: "top level must be an object".into(),
        }]));
    };
    let base = base_dir.map(Path::to_path_buf).unwrap_or_default();
    let mut f = Fields::new("", map);

    let topology = f.required(&mut ctx, "topology").and_then(|v| parse_topology(&mut ctx, v, &base));
    let inner = f.required(&mut ctx, "inner").and_then(|v| parse_inner(&mut ctx, v));
    let dynamics = f.required(&mut ctx, "dynamics").and_then(|v| parse_dynamics(&mut ctx, v));
    let coupling = f.required(&mut ctx, "coupling").and_then(|v| parse_coupling(&mut ctx, v));

    let n_nodes = topology.as_ref().map(Topology::n_nodes);
    let dim = dynamics.as_ref().map(|(d, _)| d.dim());

    let pins = match f.get("pins") {
        None => None,
        Some(Value::String(s)) if s == "auto" => None,
        Some(v) => parse_pins(&mut ctx, v, n_nodes),
    };
    let triggers = match f.get("triggers") {
        None => BTreeMap::new(),
        Some(v) => parse_triggers(&mut ctx, v, n_nodes),
    };
    let default_betas = match f.get("default_betas") {
        None => DEFAULT_BETAS.to_vec(),
        Some(v) => match as_vector(&mut ctx, "default_betas", v) {
            Some(b) if !b.is_empty() && b.iter().all(|x| *x > 0.0) => b,
            Some(_) => {
                ctx.violation("default_betas", "must be a non-empty list of positive numbers");
                Vec::new()
            }
            None => Vec::new(),
        },
    };

    let t0 = f.f64_or(&mut ctx, "t0", Some(0.0));
    let t_end = f.f64_or(&mut ctx, "t_end", None);
    let step = f.f64_or(&mut ctx, "step", Some(crate::simulator::DEFAULT_STEP));
    let event_tol = f.f64_or(&mut ctx, "event_tol", Some(crate::simulator::DEFAULT_EVENT_TOL));
    if let (Some(a), Some(b)) = (t0, t_end) {
        if b <= a {
            ctx.violation("t_end", "must exceed t0");
        }
        if let Some(h) = step {
            if !(h > 0.0 && h <= b - a) {
                ctx.violation("step", "must lie in (0, t_end - t0]");
            }
            if let Some(tol) = event_tol {
                if !(tol > 0.0 && tol < h) {
                    ctx.violation("event_tol", "must lie in (0, step)");
                }
            }
        }
    }
    let max_events_per_node = match f.get("max_events_per_node") {
        None => crate::simulator::DEFAULT_MAX_EVENTS,
        Some(v) => match v.as_u64() {
            Some(x) if x > 0 => x as usize,
            _ => {
                ctx.violation("max_events_per_node", "expected a positive integer");
                1
            }
        },
    };

    let initial = f.required(&mut ctx, "initial").and_then(|v| parse_initial(&mut ctx, v, n_nodes, dim));
    let z0 = f.required(&mut ctx, "z0").and_then(|v| as_vector(&mut ctx, "z0", v));
    if let (Some(z), Some(n)) = (&z0, dim) {
        if z.len() != n {
            ctx.violation("z0", format!("expected {n} entries, got {}", z.len()));
        }
    }
    let seed = match f.get("seed") {
        None => 0,
        Some(v) => v.as_u64().unwrap_or_else(|| {
            ctx.violation("seed", "expected a nonnegative integer");
            0
        }),
    };
    let output_dir = match f.get("output_dir") {
        None => PathBuf::from("out"),
        Some(Value::String(s)) => PathBuf::from(s),
        Some(_) => {
            ctx.violation("output_dir", "expected a string");
            PathBuf::new()
        }
    };
    let (epsilon, mu) = match f.get("bounds") {
        None => (Some(1.0), None),
        Some(v) => parse_bounds_block(&mut ctx, v),
    };
    let verify = f.get("verify").and_then(|v| parse_verify(&mut ctx, v, dim));
    f.finish(&mut ctx);

    if let (Some(inner), Some((d, _))) = (&inner, &dynamics) {
        if inner.dim() != d.dim() {
            ctx.violation("inner", format!("dimension {} does not match dynamics dimension {}", inner.dim(), d.dim()));
        }
    }

    if !ctx.errors.is_empty() {
        return Err(ConfigErrors(ctx.errors));
    }
    let (dynamics, dynamics_kind) = dynamics.expect("checked");
    let spec =
        NetworkSpec::new(topology.expect("checked"), inner.expect("checked"), dynamics, coupling.expect("checked"))
            .map_err(|e| {
                ConfigErrors(vec![ConfigError::InvariantViolation { path: "$".into(), message: e.to_string() }])
            })?;
    Ok(RunConfig {
        spec,
        dynamics_kind,
        pins,
        triggers,
        default_betas,
        t0: t0.expect("checked"),
        t_end: t_end.expect("checked"),
        step: step.expect("checked"),
        event_tol: event_tol.expect("checked"),
        max_events_per_node,
        initial: initial.expect("checked"),
        z0: z0.expect("checked"),
        seed,
        output_dir,
        epsilon: epsilon.expect("checked"),
        mu,
        verify,
    })
}

fn parse_topology(ctx: &mut Ctx, v: &Value, base: &Path) -> Option<Topology> {
    let result = match v {
        Value::String(s) if s == "fixture8" => return Some(fixture_topology8()),
        Value::String(s) => Topology::from_file(base.join(s)).map_err(|e| e.to_string()),
        Value::Array(_) => {
            let rows = as_matrix(ctx, "topology", v)?;
            crate::model::validate_topology(&rows).map_err(|e| e.to_string())
        }
        _ => Err("expected a matrix, a file path, or \"fixture8\"".to_string()),
    };
    result.map_err(|m| ctx.violation("topology", m)).ok()
}

fn parse_inner(ctx: &mut Ctx, v: &Value) -> Option<InnerCoupling> {
    // a flat list is the diagonal
    let m = match v.as_array() {
        Some(a) if a.iter().all(Value::is_number) => {
            let d = as_vector(ctx, "inner", v)?;
            if d.is_empty() {
                ctx.violation("inner", "empty diagonal");
                return None;
            }
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d))
        }
        _ => {
            let rows = as_matrix(ctx, "inner", v)?;
            square(ctx, "inner", rows)?
        }
    };
    InnerCoupling::new(m).map_err(|e| ctx.violation("inner", e.to_string())).ok()
}

fn parse_dynamics(ctx: &mut Ctx, v: &Value) -> Option<(NodeDynamics, DynamicsKind)> {
    let map = as_object(ctx, "dynamics", v)?;
    let mut f = Fields::new("dynamics", map);
    let kind = f.required(ctx, "kind").and_then(Value::as_str).map(str::to_string);
    let out = match kind.as_deref() {
        Some("chen") => {
            let gamma = f.f64_or(ctx, "gamma", Some(CHEN_GAMMA));
            gamma.and_then(|g| {
                NodeDynamics::new(Chen, g)
                    .map_err(|e| ctx.violation("dynamics.gamma", e.to_string()))
                    .ok()
                    .map(|d| (d, DynamicsKind::Chen))
            })
        }
        Some("linear") => {
            let m = f
                .required(ctx, "matrix")
                .and_then(|m| as_matrix(ctx, "dynamics.matrix", m))
                .and_then(|rows| square(ctx, "dynamics.matrix", rows));
            let gamma = f.f64_or(ctx, "gamma", None);
            match (m, gamma) {
                (Some(matrix), Some(g)) => NodeDynamics::new(Linear { matrix }, g)
                    .map_err(|e| ctx.violation("dynamics.gamma", e.to_string()))
                    .ok()
                    .map(|d| (d, DynamicsKind::Linear)),
                _ => None,
            }
        }
        Some("zero") => {
            let dim = f.required(ctx, "dim").and_then(|d| {
                let r = d.as_u64().filter(|x| *x > 0);
                if r.is_none() {
                    ctx.violation("dynamics.dim", "expected a positive integer");
                }
                r
            });
            let gamma = f.f64_or(ctx, "gamma", Some(0.0));
            match (dim, gamma) {
                (Some(dim), Some(g)) => NodeDynamics::new(Zero { dim: dim as usize }, g)
                    .map_err(|e| ctx.violation("dynamics.gamma", e.to_string()))
                    .ok()
                    .map(|d| (d, DynamicsKind::Zero)),
                _ => None,
            }
        }
        Some(other) => {
            ctx.violation("dynamics.kind", format!("unknown dynamics `{other}` (chen, linear, zero)"));
            None
        }
        None => None,
    };
    f.finish(ctx);
    out
}

fn parse_coupling(ctx: &mut Ctx, v: &Value) -> Option<CouplingPolicy> {
    let map = as_object(ctx, "coupling", v)?;
    let mut f = Fields::new("coupling", map);
    let kind = f.required(ctx, "kind").and_then(Value::as_str).map(str::to_string);
    let policy = match kind.as_deref() {
        Some("fixed") => f.f64_or(ctx, "c", None).map(|c| CouplingPolicy::Fixed { c }),
        Some("adaptive") => {
            let c0 = f.f64_or(ctx, "c0", Some(0.0));
            let zeta = f.f64_or(ctx, "zeta", None);
            c0.zip(zeta).map(|(c0, zeta)| CouplingPolicy::Adaptive { c0, zeta })
        }
        Some("saturated_adaptive") => {
            let c0 = f.f64_or(ctx, "c0", Some(0.0));
            let zeta = f.f64_or(ctx, "zeta", None);
            let cap = f.f64_or(ctx, "cap", None);
            match (c0, zeta, cap) {
                (Some(c0), Some(zeta), Some(cap)) => Some(CouplingPolicy::SaturatedAdaptive { c0, zeta, cap }),
                _ => None,
            }
        }
        Some(other) => {
            ctx.violation("coupling.kind", format!("unknown policy `{other}` (fixed, adaptive, saturated_adaptive)"));
            None
        }
        None => None,
    };
    f.finish(ctx);
    let policy = policy?;
    policy.validate().map_err(|e| ctx.violation("coupling", e.to_string())).ok()?;
    Some(policy)
}

fn parse_pins(ctx: &mut Ctx, v: &Value, n_nodes: Option<usize>) -> Option<PinSet> {
    let arr = match v.as_array() {
        Some(a) => a,
        None => {
            ctx.violation("pins", "expected a list of node indices or \"auto\"");
            return None;
        }
    };
    let mut idx = Vec::with_capacity(arr.len());
    for (k, x) in arr.iter().enumerate() {
        match x.as_u64() {
            Some(i) => idx.push(i as usize),
            None => ctx.violation(&format!("pins[{k}]"), "expected a node index"),
        }
    }
    let n = n_nodes?;
    PinSet::new(idx, n).map_err(|e| ctx.violation("pins", e.to_string())).ok()
}

fn parse_triggers(ctx: &mut Ctx, v: &Value, n_nodes: Option<usize>) -> BTreeMap<usize, TriggerBlock> {
    let mut out = BTreeMap::new();
    let Some(map) = as_object(ctx, "triggers", v) else {
        return out;
    };
    for (key, block) in map {
        let Ok(i) = key.parse::<usize>() else {
            ctx.violation(&format!("triggers.{key}"), "keys must be node indices");
            continue;
        };
        let path = format!("triggers[{i}]");
        if let Some(n) = n_nodes {
            if i >= n {
                ctx.violation(&path, format!("node index out of range for {n} nodes"));
            }
        }
        let Some(bm) = as_object(ctx, &path, block) else {
            continue;
        };
        let mut f = Fields::new(&path, bm);
        let mut tb = TriggerBlock::default();
        if let Some(x) = f.get("alpha") {
            tb.alpha = as_f64(ctx, &f.sub("alpha"), x);
            if tb.alpha.is_some_and(|a| a <= 0.0) {
                ctx.violation(&f.sub("alpha"), "must be positive");
            }
        }
        if let Some(x) = f.get("beta") {
            tb.beta = as_f64(ctx, &f.sub("beta"), x);
            if tb.beta.is_some_and(|b| b <= 0.0) {
                ctx.violation(&f.sub("beta"), "must be positive");
            }
        }
        if let Some(x) = f.get("d") {
            tb.d = as_f64(ctx, &f.sub("d"), x);
            if tb.d.is_some_and(|d| !(d > 0.0 && d < 1.0)) {
                ctx.violation(&f.sub("d"), "must be in open interval (0,1)");
            }
        }
        f.finish(ctx);
        out.insert(i, tb);
    }
    out
}

fn parse_initial(ctx: &mut Ctx, v: &Value, n_nodes: Option<usize>, dim: Option<usize>) -> Option<InitialStates> {
    let map = as_object(ctx, "initial", v)?;
    let mut f = Fields::new("initial", map);
    let random = f.get("random");
    let states = f.get("states");
    f.finish(ctx);
    match (random, states) {
        (Some(r), None) => {
            let rm = as_object(ctx, "initial.random", r)?;
            let mut rf = Fields::new("initial.random", rm);
            let low = rf.f64_or(ctx, "low", Some(-1.0));
            let high = rf.f64_or(ctx, "high", Some(1.0));
            rf.finish(ctx);
            let (low, high) = low.zip(high)?;
            if low >= high {
                ctx.violation("initial.random", "need low < high");
                return None;
            }
            Some(InitialStates::Random { low, high })
        }
        (None, Some(s)) => {
            let rows = as_matrix(ctx, "initial.states", s)?;
            if let Some(n) = n_nodes {
                if rows.len() != n {
                    ctx.violation("initial.states", format!("expected {n} node states, got {}", rows.len()));
                }
            }
            if let Some(d) = dim {
                for (k, r) in rows.iter().enumerate() {
                    if r.len() != d {
                        ctx.violation(&format!("initial.states[{k}]"), format!("expected {d} entries"));
                    }
                }
            }
            Some(InitialStates::Literal(rows))
        }
        _ => {
            ctx.violation("initial", "exactly one of `random` or `states` is required");
            None
        }
    }
}

fn parse_bounds_block(ctx: &mut Ctx, v: &Value) -> (Option<f64>, Option<f64>) {
    let Some(map) = as_object(ctx, "bounds", v) else {
        return (None, None);
    };
    let mut f = Fields::new("bounds", map);
    let eps = f.f64_or(ctx, "epsilon", Some(1.0));
    if eps.is_some_and(|e| e <= 0.0) {
        ctx.violation("bounds.epsilon", "must be positive");
    }
    let mu = match f.get("mu") {
        None | Some(Value::Null) => None,
        Some(x) => {
            let m = as_f64(ctx, "bounds.mu", x);
            if m.is_some_and(|m| m <= 0.0) {
                ctx.violation("bounds.mu", "must be positive");
            }
            m
        }
    };
    f.finish(ctx);
    (eps, mu)
}

fn parse_verify(ctx: &mut Ctx, v: &Value, dim: Option<usize>) -> Option<VerifyBlock> {
    let map = as_object(ctx, "verify", v)?;
    let mut f = Fields::new("verify", map);
    let rows = f.required(ctx, "box").and_then(|b| as_matrix(ctx, "verify.box", b));
    let samples = f.required(ctx, "samples").and_then(|s| {
        let r = s.as_u64().filter(|x| *x > 0);
        if r.is_none() {
            ctx.violation("verify.samples", "expected a positive integer");
        }
        r
    });
    f.finish(ctx);
    let rows = rows?;
    let mut bounds = Vec::with_capacity(rows.len());
    for (k, r) in rows.iter().enumerate() {
        if r.len() != 2 || r[0] > r[1] {
            ctx.violation(&format!("verify.box[{k}]"), "expected [low, high] with low <= high");
        } else {
            bounds.push((r[0], r[1]));
        }
    }
    if let Some(d) = dim {
        if rows.len() != d {
            ctx.violation("verify.box", format!("expected {d} intervals"));
        }
    }
    Some(VerifyBlock { bounds, samples: samples? as usize })
}
