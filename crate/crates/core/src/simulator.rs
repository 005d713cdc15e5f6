//! Hybrid closed-loop simulation: coupled flow between events, per-node
//! threshold triggers, impulses on pinned nodes and the adaptive coupling law.
//!
//! The flow is integrated in error coordinates `(e_1, …, e_N, z, c)` with
//! `e_i = x_i − z`, using
//!
//! ```text
//! ė_i = f(t, z + e_i) − f(t, z) + c Σ_j a_ij Γ e_j + c (Σ_j a_ij) Γ z
//! ```
//!
//! which is the difference of the node and isolated-node equations term for
//! term. Impulses then scale `e_i` directly and the consensus manifold
//! `e ≡ 0` is preserved exactly.

use thiserror::Error;

use crate::integrator::Rk4;
use crate::model::{ModelError, NetworkSpec};
use crate::spectral::PinSet;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("impulse gain {0} is outside (0, 1)")]
    GainOutOfRange(f64),
    #[error("node {node}: V_i(t0) = {v0} is not below alpha = {alpha}")]
    StartupViolation { node: usize, v0: f64, alpha: f64 },
    #[error("state became non-finite at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("node {node} exceeded {limit} events")]
    EventStorm { node: usize, limit: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Trigger and impulse parameters of one pinned node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeTrigger {
    pub alpha: f64,
    pub beta: f64,
    pub d: f64,
}

impl NodeTrigger {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(SimError::InvalidConfig(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(SimError::InvalidConfig(format!("beta must be positive, got {}", self.beta)));
        }
        if !(self.d > 0.0 && self.d < 1.0) {
            return Err(SimError::GainOutOfRange(self.d));
        }
        Ok(())
    }

    /// `α exp(−β (t − t0))`
    pub fn threshold(&self, t: f64, t0: f64) -> f64 {
        self.alpha * (-self.beta * (t - t0)).exp()
    }
}

/// Per-pin trigger parameters, aligned with the order of the [`PinSet`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TriggerParams {
    per_pin: Vec<NodeTrigger>,
}

impl TriggerParams {
    pub fn new(per_pin: Vec<NodeTrigger>) -> Result<Self, SimError> {
        for t in &per_pin {
            t.validate()?;
        }
        Ok(Self { per_pin })
    }

    pub fn as_slice(&self) -> &[NodeTrigger] {
        &self.per_pin
    }

    pub fn len(&self) -> usize {
        self.per_pin.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_pin.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub spec: NetworkSpec,
    pub pins: PinSet,
    pub triggers: TriggerParams,
    pub t0: f64,
    pub t_end: f64,
    pub step: f64,
    pub initial_states: Vec<Vec<f64>>,
    pub initial_isolated: Vec<f64>,
    pub event_tol: f64,
    pub max_events_per_node: usize,
}

pub const DEFAULT_STEP: f64 = 1e-3;
pub const DEFAULT_EVENT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_EVENTS: usize = 1_000_000;
const MAX_BISECTIONS: usize = 60;

impl SimConfig {
    /// Config over `[0, 20]` with the default step and event tolerance.
    pub fn new(
        spec: NetworkSpec,
        pins: PinSet,
        triggers: TriggerParams,
        initial_states: Vec<Vec<f64>>,
        initial_isolated: Vec<f64>,
    ) -> Self {
        Self {
            spec,
            pins,
            triggers,
            t0: 0.0,
            t_end: 20.0,
            step: DEFAULT_STEP,
            initial_states,
            initial_isolated,
            event_tol: DEFAULT_EVENT_TOL,
            max_events_per_node: DEFAULT_MAX_EVENTS,
        }
    }

    pub fn with_horizon(mut self, t0: f64, t_end: f64) -> Self {
        self.t0 = t0;
        self.t_end = t_end;
        self
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn with_event_tol(mut self, tol: f64) -> Self {
        self.event_tol = tol;
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidConfig(m));
        let (nn, n) = (self.spec.n_nodes(), self.spec.dim());
        if !(self.t0.is_finite() && self.t_end.is_finite() && self.t_end > self.t0) {
            return bad(format!("need t_end > t0, got [{}, {}]", self.t0, self.t_end));
        }
        if !(self.step > 0.0 && self.step <= self.t_end - self.t0) {
            return bad(format!("step {} must lie in (0, t_end - t0]", self.step));
        }
        if !(self.event_tol > 0.0 && self.event_tol < self.step) {
            return bad(format!("event_tol {} must lie in (0, step)", self.event_tol));
        }
        if self.max_events_per_node == 0 {
            return bad("max_events_per_node must be positive".into());
        }
        if self.initial_states.len() != nn {
            return Err(SimError::DimensionMismatch { expected: nn, got: self.initial_states.len() });
        }
        for s in &self.initial_states {
            if s.len() != n {
                return Err(SimError::DimensionMismatch { expected: n, got: s.len() });
            }
        }
        if self.initial_isolated.len() != n {
            return Err(SimError::DimensionMismatch { expected: n, got: self.initial_isolated.len() });
        }
        if self.pins.indices().iter().any(|&p| p >= nn) {
            return bad("pin index out of range".into());
        }
        if self.triggers.len() != self.pins.len() {
            return bad(format!("{} trigger blocks for {} pinned nodes", self.triggers.len(), self.pins.len()));
        }
        for t in self.triggers.as_slice() {
            t.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Jump {
    Flow = 0,
    Pre = 1,
    Post = 2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub jump: Jump,
    pub c: f64,
    /// Node states `x_i`, row-major by node.
    pub states: Vec<f64>,
    pub z: Vec<f64>,
    pub v: Vec<f64>,
    pub v_total: f64,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridTrace {
    pub n_nodes: usize,
    pub dim: usize,
    pub rows: Vec<TraceRow>,
}

impl HybridTrace {
    pub fn first(&self) -> &TraceRow {
        &self.rows[0]
    }

    pub fn last(&self) -> &TraceRow {
        self.rows.last().expect("trace has the initial row")
    }

    pub fn state(&self, row: usize, node: usize) -> &[f64] {
        &self.rows[row].states[node * self.dim..(node + 1) * self.dim]
    }

    /// Largest recorded `W` over the run.
    pub fn w_max(&self) -> f64 {
        self.rows.iter().map(|r| r.w).fold(0.0, f64::max)
    }

    pub fn c_max(&self) -> f64 {
        self.rows.iter().map(|r| r.c).fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventRecord {
    pub node: usize,
    /// 1-based event ordinal for this node.
    pub k: usize,
    pub t: f64,
    pub v_before: f64,
    pub v_after: f64,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EventLog {
    pub records: Vec<EventRecord>,
}

impl EventLog {
    pub fn for_node(&self, node: usize) -> impl Iterator<Item = &EventRecord> {
        self.records.iter().filter(move |r| r.node == node)
    }

    pub fn count(&self, node: usize) -> usize {
        self.for_node(node).count()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }
}

/// `f(t, x_i) + c Σ_j a_ij Γ x_j` for every node.
pub fn coupled_vector_field(
    spec: &NetworkSpec,
    t: f64,
    states: &[Vec<f64>],
    c_now: f64,
) -> Result<Vec<Vec<f64>>, SimError> {
    let (nn, n) = (spec.n_nodes(), spec.dim());
    if states.len() != nn {
        return Err(SimError::DimensionMismatch { expected: nn, got: states.len() });
    }
    if let Some(s) = states.iter().find(|s| s.len() != n) {
        return Err(SimError::DimensionMismatch { expected: n, got: s.len() });
    }
    let gx: Vec<Vec<f64>> = states
        .iter()
        .map(|x| {
            let mut g = vec![0.0; n];
            spec.inner.apply(x, &mut g);
            g
        })
        .collect();
    let a = spec.topology.entries();
    let mut out = vec![vec![0.0; n]; nn];
    for (i, o) in out.iter_mut().enumerate() {
        spec.dynamics.eval(t, &states[i], o);
        for (j, g) in gx.iter().enumerate() {
            let aij = a[(i, j)];
            if aij != 0.0 {
                for k in 0..n {
                    o[k] += c_now * aij * g[k];
                }
            }
        }
    }
    Ok(out)
}

/// `V_i ≥ α_i exp(−β_i (t − t0))`
pub fn trigger_fired(v_i: f64, alpha_i: f64, beta_i: f64, t: f64, t0: f64) -> bool {
    v_i >= alpha_i * (-beta_i * (t - t0)).exp()
}

/// `e ↦ (1 − d) e`
pub fn apply_impulse(e: &[f64], d: f64) -> Result<Vec<f64>, SimError> {
    if !(d > 0.0 && d < 1.0) {
        return Err(SimError::GainOutOfRange(d));
    }
    Ok(e.iter().map(|v| (1.0 - d) * v).collect())
}

/// `ζ Σ_{j unpinned} (x_j − z)ᵀ Γ (x_j − z)`
pub fn adaptive_coupling_rate(spec: &NetworkSpec, pins: &PinSet, states: &[Vec<f64>], z: &[f64], zeta: f64) -> f64 {
    let n = spec.dim();
    let mut e = vec![0.0; n];
    let mut acc = 0.0;
    for j in pins.unpinned(spec.n_nodes()) {
        for k in 0..n {
            e[k] = states[j][k] - z[k];
        }
        acc += spec.inner.quad_form(&e);
    }
    zeta * acc
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovComponents {
    pub v: Vec<f64>,
    pub total: f64,
    /// Sum over unpinned nodes.
    pub w: f64,
}

pub fn lyapunov_components(states: &[Vec<f64>], z: &[f64], pins: &PinSet) -> Result<LyapunovComponents, SimError> {
    let mut v = Vec::with_capacity(states.len());
    for x in states {
        if x.len() != z.len() {
            return Err(SimError::DimensionMismatch { expected: z.len(), got: x.len() });
        }
        v.push(x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum::<f64>());
    }
    Ok(components_from(v, pins))
}

fn components_from(v: Vec<f64>, pins: &PinSet) -> LyapunovComponents {
    let total = v.iter().sum();
    let w = v.iter().enumerate().filter(|(i, _)| !pins.contains(*i)).map(|(_, x)| x).sum();
    LyapunovComponents { v, total, w }
}

/// Error-coordinate flow with scratch buffers.
struct Flow<'a> {
    spec: &'a NetworkSpec,
    unpinned: Vec<usize>,
    row_sums: Vec<f64>,
    zeta: Option<f64>,
    cap: Option<f64>,
    ge: Vec<f64>,
    gz: Vec<f64>,
    xi: Vec<f64>,
    fx: Vec<f64>,
}

impl<'a> Flow<'a> {
    fn new(spec: &'a NetworkSpec, pins: &PinSet) -> Self {
        let (nn, n) = (spec.n_nodes(), spec.dim());
        let a = spec.topology.entries();
        Self {
            spec,
            unpinned: pins.unpinned(nn),
            row_sums: (0..nn).map(|i| (0..nn).map(|j| a[(i, j)]).sum()).collect(),
            zeta: spec.coupling.zeta(),
            cap: spec.coupling.cap(),
            ge: vec![0.0; nn * n],
            gz: vec![0.0; n],
            xi: vec![0.0; n],
            fx: vec![0.0; n],
        }
    }

    fn rhs(&mut self, saturated: bool, t: f64, y: &[f64], dy: &mut [f64]) {
        let (nn, n) = (self.spec.n_nodes(), self.spec.dim());
        let zi = nn * n;
        let ci = zi + n;
        let z = &y[zi..ci];
        let c_raw = y[ci];
        let (c, frozen) = match self.cap {
            Some(cap) if saturated || c_raw >= cap => (c_raw.min(cap), true),
            _ => (c_raw, false),
        };
        let inner = &self.spec.inner;
        let a = self.spec.topology.entries();

        for j in 0..nn {
            inner.apply(&y[j * n..(j + 1) * n], &mut self.ge[j * n..(j + 1) * n]);
        }
        inner.apply(z, &mut self.gz);

        let (dnodes, rest) = dy.split_at_mut(zi);
        let dz = &mut rest[..n];
        self.spec.dynamics.eval(t, z, dz);
        for i in 0..nn {
            let e = &y[i * n..(i + 1) * n];
            for k in 0..n {
                self.xi[k] = z[k] + e[k];
            }
            self.spec.dynamics.eval(t, &self.xi, &mut self.fx);
            let out = &mut dnodes[i * n..(i + 1) * n];
            for k in 0..n {
                out[k] = self.fx[k] - dz[k];
            }
            for j in 0..nn {
                let aij = a[(i, j)];
                if aij != 0.0 {
                    for k in 0..n {
                        out[k] += c * aij * self.ge[j * n + k];
                    }
                }
            }
            let rs = self.row_sums[i];
            if rs != 0.0 {
                for k in 0..n {
                    out[k] += c * rs * self.gz[k];
                }
            }
        }

        dy[ci] = match self.zeta {
            Some(zeta) if !frozen => {
                zeta * self.unpinned.iter().map(|&j| inner.quad_form(&y[j * n..(j + 1) * n])).sum::<f64>()
            }
            _ => 0.0,
        };
    }

    fn step(&mut self, rk: &mut Rk4, saturated: bool, t: f64, y: &[f64], h: f64, out: &mut [f64]) {
        let mut f = |t: f64, y: &[f64], dy: &mut [f64]| self.rhs(saturated, t, y, dy);
        rk.step(&mut f, t, y, h, out);
        if let Some(cap) = self.cap {
            let ci = out.len() - 1;
            out[ci] = out[ci].min(cap);
        }
    }
}

struct Layout {
    nn: usize,
    n: usize,
}

impl Layout {
    fn ci(&self) -> usize {
        self.nn * self.n + self.n
    }

    fn v(&self, y: &[f64], i: usize) -> f64 {
        y[i * self.n..(i + 1) * self.n].iter().map(|e| e * e).sum()
    }

    fn row(&self, y: &[f64], t: f64, jump: Jump, pins: &PinSet) -> TraceRow {
        let zi = self.nn * self.n;
        let z = y[zi..zi + self.n].to_vec();
        let mut states = Vec::with_capacity(zi);
        for i in 0..self.nn {
            for k in 0..self.n {
                states.push(z[k] + y[i * self.n + k]);
            }
        }
        let comps = components_from((0..self.nn).map(|i| self.v(y, i)).collect(), pins);
        TraceRow { t, jump, c: y[self.ci()], states, z, v: comps.v, v_total: comps.total, w: comps.w }
    }
}

/// Runs the closed loop from `t0` to `t_end`.
///
/// Steps land on the grid `t0 + m·h`. After each step every pinned node's
/// trigger is evaluated; if any fired, the earliest crossing inside the step
/// is localized by bisection on a re-integrated partial step, the step is cut
/// there, and every node whose trigger holds at that instant receives its
/// impulse in ascending node order. Pre- and post-impulse rows share the
/// event timestamp.
pub fn simulate(config: &SimConfig) -> Result<(HybridTrace, EventLog), SimError> {
    config.validate()?;
    let spec = &config.spec;
    let lay = Layout { nn: spec.n_nodes(), n: spec.dim() };
    let (nn, n) = (lay.nn, lay.n);
    let zi = nn * n;
    let ci = lay.ci();
    let len = ci + 1;
    let t0 = config.t0;

    let mut y = vec![0.0; len];
    for (i, x) in config.initial_states.iter().enumerate() {
        for k in 0..n {
            y[i * n + k] = x[k] - config.initial_isolated[k];
        }
    }
    y[zi..ci].copy_from_slice(&config.initial_isolated);
    y[ci] = spec.coupling.initial();
    if y.iter().any(|v| !v.is_finite()) {
        return Err(SimError::NonFiniteState { t: t0 });
    }

    // pinned nodes in ascending index order with their triggers
    let mut pinned: Vec<(usize, NodeTrigger)> =
        config.pins.indices().iter().copied().zip(config.triggers.as_slice().iter().copied()).collect();
    pinned.sort_by_key(|p| p.0);
    for &(i, trig) in &pinned {
        let v0 = lay.v(&y, i);
        if v0 >= trig.alpha {
            return Err(SimError::StartupViolation { node: i, v0, alpha: trig.alpha });
        }
    }

    let cap = spec.coupling.cap();
    let mut saturated = cap.is_some_and(|cap| y[ci] >= cap);
    let mut flow = Flow::new(spec, &config.pins);
    let mut rk = Rk4::new(len);

    let span = config.t_end - t0;
    let ratio = span / config.step;
    let n_steps = if (ratio - ratio.round()).abs() < 1e-9 * ratio.max(1.0) {
        ratio.round() as usize
    } else {
        ratio.ceil() as usize
    };
    let grid = |m: usize| if m >= n_steps { config.t_end } else { t0 + m as f64 * config.step };

    let mut rows = vec![lay.row(&y, t0, Jump::Flow, &config.pins)];
    let mut log = EventLog::default();
    let mut counts = vec![0usize; nn];
    let mut y_new = vec![0.0; len];
    let mut y_probe = vec![0.0; len];
    let gap = |y: &[f64], t: f64, i: usize, trig: &NodeTrigger| lay.v(y, i) - trig.threshold(t, t0);

    let mut t = t0;
    let mut m = 0usize;
    while m < n_steps {
        let t_next = grid(m + 1);
        let dt = t_next - t;
        flow.step(&mut rk, saturated, t, &y, dt, &mut y_new);
        if y_new.iter().any(|v| !v.is_finite()) {
            return Err(SimError::NonFiniteState { t: t_next });
        }

        let fired: Vec<&(usize, NodeTrigger)> =
            pinned.iter().filter(|(i, trig)| gap(&y_new, t_next, *i, trig) >= 0.0).collect();

        if fired.is_empty() {
            std::mem::swap(&mut y, &mut y_new);
            t = t_next;
            m += 1;
            if cap.is_some_and(|cap| y[ci] >= cap) {
                saturated = true;
            }
            rows.push(lay.row(&y, t, Jump::Flow, &config.pins));
            continue;
        }

        let mut tau = dt;
        for &&(i, trig) in &fired {
            let (mut lo, mut hi) = (0.0, tau);
            // the running minimum may already be below this node's crossing
            flow.step(&mut rk, saturated, t, &y, hi, &mut y_probe);
            if hi < dt && gap(&y_probe, t + hi, i, &trig) < 0.0 {
                continue;
            }
            for _ in 0..MAX_BISECTIONS {
                if hi - lo <= config.event_tol {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                flow.step(&mut rk, saturated, t, &y, mid, &mut y_probe);
                if gap(&y_probe, t + mid, i, &trig) >= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            tau = hi;
        }

        let t_event = if tau >= dt {
            m += 1;
            std::mem::swap(&mut y, &mut y_new);
            t_next
        } else {
            flow.step(&mut rk, saturated, t, &y, tau, &mut y_probe);
            if y_probe.iter().any(|v| !v.is_finite()) {
                return Err(SimError::NonFiniteState { t: t + tau });
            }
            std::mem::swap(&mut y, &mut y_probe);
            t + tau
        };
        t = t_event;
        if cap.is_some_and(|cap| y[ci] >= cap) {
            saturated = true;
        }
        rows.push(lay.row(&y, t, Jump::Pre, &config.pins));

        for &(i, trig) in &pinned {
            if gap(&y, t, i, &trig) < 0.0 {
                continue;
            }
            let v_before = lay.v(&y, i);
            for e in &mut y[i * n..(i + 1) * n] {
                *e *= 1.0 - trig.d;
            }
            let v_after = lay.v(&y, i);
            debug_assert!(v_after < trig.threshold(t, t0), "impulse left node {i} on threshold");
            counts[i] += 1;
            if counts[i] > config.max_events_per_node {
                return Err(SimError::EventStorm { node: i, limit: config.max_events_per_node });
            }
            log.records.push(EventRecord { node: i, k: counts[i], t, v_before, v_after, c: y[ci] });
        }
        rows.push(lay.row(&y, t, Jump::Post, &config.pins));
    }

    Ok((HybridTrace { n_nodes: nn, dim: n, rows }, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        fixture_topology8, validate_topology, Chen, CouplingPolicy, InnerCoupling, NodeDynamics, Topology, Zero,
    };

    fn zero_spec(topology: Topology, dim: usize, coupling: CouplingPolicy) -> NetworkSpec {
        NetworkSpec::new(
            topology,
            InnerCoupling::identity(dim),
            NodeDynamics::new(Zero { dim }, 0.0).unwrap(),
            coupling,
        )
        .unwrap()
    }

    fn single_node_config() -> SimConfig {
        let spec = zero_spec(validate_topology(&[vec![0.0]]).unwrap(), 3, CouplingPolicy::Fixed { c: 1.0 });
        SimConfig::new(
            spec,
            PinSet::all(1),
            TriggerParams::new(vec![NodeTrigger { alpha: 1.0, beta: 1.0, d: 0.5 }]).unwrap(),
            vec![vec![0.5, 0.0, 0.0]],
            vec![0.0; 3],
        )
        .with_horizon(0.0, 5.0)
    }

    #[test]
    fn coupled_field_examples() {
        let two = validate_topology(&[vec![-1.0, 1.0], vec![1.0, -1.0]]).unwrap();
        let spec = zero_spec(two, 2, CouplingPolicy::Fixed { c: 1.0 });
        let d = coupled_vector_field(&spec, 0.0, &[vec![1.0, 0.0], vec![0.0, 0.0]], 1.0).unwrap();
        assert_eq!(d, vec![vec![-1.0, 0.0], vec![1.0, 0.0]]);

        let decoupled = validate_topology(&[vec![0.0; 3], vec![0.0; 3], vec![0.0; 3]]).unwrap();
        let chen = NetworkSpec::new(
            decoupled,
            InnerCoupling::identity(3),
            NodeDynamics::chen(),
            CouplingPolicy::Fixed { c: 5.0 },
        )
        .unwrap();
        let xs = vec![vec![1.0, 1.0, 1.0], vec![0.1, -0.2, 0.1], vec![0.0; 3]];
        let d = coupled_vector_field(&chen, 0.0, &xs, 5.0).unwrap();
        for (x, dx) in xs.iter().zip(&d) {
            assert_eq!(dx.as_slice(), crate::model::chen_vector_field(0.0, x).unwrap());
        }
    }

    #[test]
    fn coupled_field_vanishes_on_consensus() {
        let spec = NetworkSpec::new(
            fixture_topology8(),
            InnerCoupling::diagonal(&[1.0, 2.0, 1.0]).unwrap(),
            NodeDynamics::chen(),
            CouplingPolicy::Fixed { c: 8.0 },
        )
        .unwrap();
        let s = vec![1.5, -2.0, 7.0];
        let d = coupled_vector_field(&spec, 0.0, &vec![s.clone(); 8], 8.0).unwrap();
        let f = crate::model::chen_vector_field(0.0, &s).unwrap();
        for row in d {
            assert_eq!(row.as_slice(), f);
        }
        assert!(matches!(
            coupled_vector_field(&spec, 0.0, &vec![s; 7], 8.0),
            Err(SimError::DimensionMismatch { expected: 8, got: 7 })
        ));
    }

    #[test]
    fn trigger_examples() {
        assert!(trigger_fired(2.0, 2.0, 0.5, 3.0, 3.0));
        assert!(!trigger_fired(0.0, 1.0, 1.0, 100.0, 0.0));
        assert!(!trigger_fired(0.3678, 1.0, 1.0, 1.0, 0.0));
        assert!(trigger_fired(0.3679, 1.0, 1.0, 1.0, 0.0));
    }

    #[test]
    fn impulse_examples() {
        assert_eq!(apply_impulse(&[2.0, 0.0, 0.0], 0.5).unwrap(), vec![1.0, 0.0, 0.0]);
        assert_eq!(apply_impulse(&[4.0, -4.0, 0.0], 0.25).unwrap(), vec![3.0, -3.0, 0.0]);
        let e = [0.3, -1.7, 2.2];
        let out = apply_impulse(&e, 1e-9).unwrap();
        for (a, b) in e.iter().zip(&out) {
            assert!(((a - b) / a).abs() <= 2e-9);
        }
        assert!(matches!(apply_impulse(&e, 1.0), Err(SimError::GainOutOfRange(_))));
        assert!(matches!(apply_impulse(&e, 0.0), Err(SimError::GainOutOfRange(_))));
    }

    #[test]
    fn adaptive_rate_examples() {
        let gamma = InnerCoupling::diagonal(&[1.0, 2.0, 1.0]).unwrap();
        let three = validate_topology(&[vec![-1.0, 1.0, 0.0], vec![1.0, -2.0, 1.0], vec![0.0, 1.0, -1.0]]).unwrap();
        let spec =
            NetworkSpec::new(three, gamma, NodeDynamics::chen(), CouplingPolicy::Adaptive { c0: 0.0, zeta: 1.0 })
                .unwrap();
        let z = vec![0.0; 3];
        let pins = PinSet::new(vec![0, 2], 3).unwrap();
        let states = vec![vec![9.0, 9.0, 9.0], vec![1.0, 0.0, 0.0], vec![5.0, 0.0, 0.0]];
        assert_eq!(adaptive_coupling_rate(&spec, &pins, &states, &z, 1.0), 1.0);

        let pins = PinSet::new(vec![0], 3).unwrap();
        let states = vec![vec![9.0, 9.0, 9.0], vec![0.0, 1.0, 0.0], vec![0.0, 1.0, 0.0]];
        assert_eq!(adaptive_coupling_rate(&spec, &pins, &states, &z, 2.0), 8.0);

        let zero = vec![vec![0.0; 3]; 3];
        assert_eq!(adaptive_coupling_rate(&spec, &pins, &zero, &z, 2.0), 0.0);
        assert_eq!(adaptive_coupling_rate(&spec, &PinSet::all(3), &states, &z, 2.0), 0.0);
    }

    #[test]
    fn lyapunov_examples() {
        let z = vec![1.0, 1.0, 1.0];
        let c = lyapunov_components(&[z.clone(), z.clone()], &z, &PinSet::empty()).unwrap();
        assert_eq!(c.total, 0.0);
        let c = lyapunov_components(&[vec![4.0, 5.0, 1.0]], &z, &PinSet::empty()).unwrap();
        assert_eq!(c.v, vec![25.0]);
        let pins = PinSet::new(vec![0], 2).unwrap();
        let c = lyapunov_components(&[vec![2.0, 1.0, 1.0], vec![1.0, 2.0, 1.0]], &z, &pins).unwrap();
        assert_eq!((c.total, c.w), (2.0, 1.0));
        assert!(lyapunov_components(&[vec![1.0]], &z, &pins).is_err());
    }

    #[test]
    fn single_node_closed_form_events() {
        let (trace, log) = simulate(&single_node_config()).unwrap();
        let times: Vec<f64> = log.records.iter().map(|r| r.t).collect();
        let want = [4.0_f64.ln(), 16.0_f64.ln(), 64.0_f64.ln()];
        assert_eq!(times.len(), 3);
        for (t, w) in times.iter().zip(want) {
            assert!((t - w).abs() < 1e-6, "{t} vs {w}");
        }
        assert!((log.records[0].v_after - 0.0625).abs() < 1e-15);
        for r in &log.records {
            assert!((r.v_after - 0.25 * r.v_before).abs() <= 1e-12 * r.v_before);
        }
        // pre/post rows share timestamps
        let jumps = trace.rows.iter().filter(|r| r.jump != Jump::Flow).count();
        assert_eq!(jumps, 6);
        for w in trace.rows.windows(2) {
            if w[1].jump == Jump::Post {
                assert_eq!(w[0].jump, Jump::Pre);
                assert_eq!(w[0].t, w[1].t);
            } else {
                assert!(w[1].t > w[0].t);
            }
        }
        assert_eq!(trace.last().t, 5.0);
    }

    #[test]
    fn startup_violation_rejected() {
        let mut cfg = single_node_config();
        cfg.initial_states = vec![vec![1.0, 0.0, 0.0]];
        assert!(matches!(simulate(&cfg), Err(SimError::StartupViolation { node: 0, .. })));
    }

    #[test]
    fn config_validation() {
        let cfg = single_node_config().with_horizon(1.0, 1.0);
        assert!(matches!(simulate(&cfg), Err(SimError::InvalidConfig(_))));
        let cfg = single_node_config().with_step(0.0);
        assert!(matches!(simulate(&cfg), Err(SimError::InvalidConfig(_))));
        let cfg = single_node_config().with_event_tol(1.0);
        assert!(matches!(simulate(&cfg), Err(SimError::InvalidConfig(_))));
        let mut cfg = single_node_config();
        cfg.triggers = TriggerParams::default();
        assert!(matches!(simulate(&cfg), Err(SimError::InvalidConfig(_))));
        assert!(matches!(
            TriggerParams::new(vec![NodeTrigger { alpha: 1.0, beta: 1.0, d: 1.0 }]),
            Err(SimError::GainOutOfRange(_))
        ));
    }

    #[test]
    fn event_storm_guard() {
        let mut cfg = single_node_config();
        cfg.max_events_per_node = 2;
        assert!(matches!(simulate(&cfg), Err(SimError::EventStorm { node: 0, limit: 2 })));
    }

    #[test]
    fn consensus_data_stays_synchronized() {
        let spec = NetworkSpec::new(
            fixture_topology8(),
            InnerCoupling::diagonal(&[1.0, 2.0, 1.0]).unwrap(),
            NodeDynamics::chen(),
            CouplingPolicy::Fixed { c: 8.0 },
        )
        .unwrap();
        let z0 = vec![0.1, -0.2, 0.1];
        let pins = PinSet::new(vec![5, 0], 8).unwrap();
        let trig = NodeTrigger { alpha: 0.5, beta: 0.8, d: 0.3 };
        let cfg = SimConfig::new(spec, pins, TriggerParams::new(vec![trig, trig]).unwrap(), vec![z0.clone(); 8], z0)
            .with_horizon(0.0, 2.0);
        let (trace, log) = simulate(&cfg).unwrap();
        assert!(log.is_empty());
        for row in &trace.rows {
            assert!(row.v_total == 0.0);
        }
    }

    #[test]
    fn divergence_reported_not_panicking() {
        // unpinned, uncoupled linear blow-up y' = 800 y overflows within the horizon
        let spec = NetworkSpec::new(
            validate_topology(&[vec![0.0]]).unwrap(),
            InnerCoupling::identity(1),
            NodeDynamics::new(crate::model::Linear { matrix: nalgebra::DMatrix::from_element(1, 1, 800.0) }, 800.0)
                .unwrap(),
            CouplingPolicy::Fixed { c: 1.0 },
        )
        .unwrap();
        let cfg = SimConfig::new(spec, PinSet::empty(), TriggerParams::default(), vec![vec![1.0]], vec![0.0])
            .with_horizon(0.0, 2.0);
        assert!(matches!(simulate(&cfg), Err(SimError::NonFiniteState { .. })));
    }

    #[test]
    fn saturated_coupling_respects_cap() {
        let spec = NetworkSpec::new(
            fixture_topology8(),
            InnerCoupling::diagonal(&[1.0, 2.0, 1.0]).unwrap(),
            NodeDynamics::new(Chen, crate::model::CHEN_GAMMA).unwrap(),
            CouplingPolicy::SaturatedAdaptive { c0: 0.0, zeta: 5.0, cap: 2.0 },
        )
        .unwrap();
        let z0 = vec![0.1, -0.2, 0.1];
        let mut xs = vec![z0.clone(); 8];
        xs[2] = vec![0.6, 0.3, -0.4];
        let cfg = SimConfig::new(spec, PinSet::empty(), TriggerParams::default(), xs, z0).with_horizon(0.0, 1.0);
        let (trace, _) = simulate(&cfg).unwrap();
        assert!(trace.rows.iter().all(|r| r.c <= 2.0));
        assert_eq!(trace.last().c, 2.0);
        for w in trace.rows.windows(2) {
            assert!(w[1].c >= w[0].c);
        }
    }
}
