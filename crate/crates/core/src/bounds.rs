//! Inter-event lower bounds and Zeno diagnostics.
//!
//! With `ε > 0`, `0 < μ < β̌`:
//!
//! ```text
//! θ   = (N−l) c² γ² l² max_{i unpinned, j pinned} a_ij² / (2ε)
//! α̂   = θ · max_j α_j,        β̌ = min_j β_j
//! M   = W(t0) + α̂ / (β̌ − μ)
//! σ_i = 2‖Γ‖ (γ α_i − c a_ii √α_i (Σ_j √α_j + (N−l) √M))
//! ```
//!
//! and `T_k` is the positive root of
//! `(1−d_i)² V_i(t_k) + σ_i T = α_i exp(−β_i (t_k + T − t0))`.

use thiserror::Error;

use crate::model::{InnerCoupling, Topology};
use crate::simulator::{EventLog, NodeTrigger};
use crate::spectral::PinSet;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error("no pinned nodes")]
    NoPinnedNodes,
    #[error("no unpinned nodes")]
    NoUnpinnedNodes,
    #[error("node {0} is pinned but has no connections (a_ii = 0)")]
    IsolatedPinnedNode(usize),
    #[error("node {0} is not pinned")]
    NotPinned(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("V_k = {v_k} is not on the threshold {threshold}")]
    PreconditionViolation { v_k: f64, threshold: f64 },
    #[error("event times for node {0} are not strictly increasing")]
    UnsortedLog(usize),
    #[error("event at t = {0} lies outside the horizon")]
    OutOfHorizon(f64),
}

/// `(1/(2ε)) (N−l) c² γ² l² max a_ij²` over unpinned rows and pinned columns.
pub fn theta(topology: &Topology, pins: &PinSet, c: f64, gamma: f64, epsilon: f64) -> Result<f64, BoundsError> {
    if !(epsilon > 0.0) {
        return Err(BoundsError::InvalidParameter("epsilon must be positive".into()));
    }
    let n = topology.n_nodes();
    let l = pins.len();
    if l == 0 {
        return Err(BoundsError::NoPinnedNodes);
    }
    let free = pins.unpinned(n);
    if free.is_empty() {
        return Err(BoundsError::NoUnpinnedNodes);
    }
    let max_sq = free
        .iter()
        .flat_map(|&i| pins.indices().iter().map(move |&j| (i, j)))
        .map(|(i, j)| topology.get(i, j).powi(2))
        .fold(0.0, f64::max);
    let (nl, lf) = ((n - l) as f64, l as f64);
    Ok(nl * c * c * gamma * gamma * lf * lf * max_sq / (2.0 * epsilon))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundParams {
    pub epsilon: f64,
    pub mu: f64,
    pub theta: f64,
    pub alpha_hat: f64,
    pub beta_check: f64,
    pub m: f64,
}

impl BoundParams {
    /// `mu = None` selects `β̌ / 2`.
    pub fn new(
        epsilon: f64,
        mu: Option<f64>,
        theta: f64,
        alphas: &[f64],
        betas: &[f64],
        w0: f64,
    ) -> Result<Self, BoundsError> {
        if alphas.is_empty() || betas.is_empty() {
            return Err(BoundsError::NoPinnedNodes);
        }
        if !(epsilon > 0.0) {
            return Err(BoundsError::InvalidParameter("epsilon must be positive".into()));
        }
        let alpha_max = alphas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let beta_check = betas.iter().cloned().fold(f64::INFINITY, f64::min);
        let mu = mu.unwrap_or(0.5 * beta_check);
        if !(mu > 0.0 && mu < beta_check) {
            return Err(BoundsError::InvalidParameter(format!("mu = {mu} must lie in (0, {beta_check})")));
        }
        let alpha_hat = theta * alpha_max;
        Ok(Self { epsilon, mu, theta, alpha_hat, beta_check, m: w0 + alpha_hat / (beta_check - mu) })
    }
}

/// Upper bound on `V̇_i` between events of pinned node `node`.
///
/// `alphas` follows the pin order. `M` must be nonnegative.
#[allow(clippy::too_many_arguments)]
pub fn sigma_i(
    topology: &Topology,
    inner: &InnerCoupling,
    pins: &PinSet,
    node: usize,
    gamma: f64,
    c: f64,
    alphas: &[f64],
    m: f64,
) -> Result<f64, BoundsError> {
    let pos = pins.position(node).ok_or(BoundsError::NotPinned(node))?;
    if alphas.len() != pins.len() {
        return Err(BoundsError::InvalidParameter("one alpha per pinned node".into()));
    }
    if !(m >= 0.0) {
        return Err(BoundsError::InvalidParameter("M must be nonnegative".into()));
    }
    let a_ii = topology.get(node, node);
    if a_ii == 0.0 {
        return Err(BoundsError::IsolatedPinnedNode(node));
    }
    let n_free = (topology.n_nodes() - pins.len()) as f64;
    let alpha_i = alphas[pos];
    let sum_sqrt: f64 = alphas.iter().map(|a| a.sqrt()).sum();
    Ok(2.0 * inner.spectral_norm() * (gamma * alpha_i - c * a_ii * alpha_i.sqrt() * (sum_sqrt + n_free * m.sqrt())))
}

const ON_THRESHOLD_TOL: f64 = 1e-9;

/// Positive root `T` of `(1−d)² V_k + σ T = α exp(−β (t_k + T − t0))`.
///
/// `σ = 0` is accepted: the right side still decreases strictly, so the
/// root exists and equals `−2 ln(1−d) / β`.
pub fn inter_event_lower_bound(
    v_k: f64,
    t_k: f64,
    t0: f64,
    alpha: f64,
    beta: f64,
    d: f64,
    sigma: f64,
) -> Result<f64, BoundsError> {
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(BoundsError::InvalidParameter("alpha and beta must be positive".into()));
    }
    if !(d > 0.0 && d < 1.0) {
        return Err(BoundsError::InvalidParameter(format!("gain d = {d} outside (0, 1)")));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(BoundsError::InvalidParameter(format!("sigma = {sigma} must be nonnegative")));
    }
    let threshold = alpha * (-beta * (t_k - t0)).exp();
    if !((v_k - threshold).abs() <= ON_THRESHOLD_TOL * threshold) {
        return Err(BoundsError::PreconditionViolation { v_k, threshold });
    }

    let base = (1.0 - d) * (1.0 - d) * v_k;
    let residual = |tt: f64| base + sigma * tt - alpha * (-beta * (t_k + tt - t0)).exp();

    let mut hi = 1.0;
    while residual(hi) <= 0.0 {
        hi *= 2.0;
    }
    // bisect until the bracket collapses to adjacent floats
    let mut lo = 0.0;
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let r = residual(mid);
        if r == 0.0 {
            return Ok(mid);
        }
        if r > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(if residual(lo).abs() <= residual(hi).abs() && lo > 0.0 { lo } else { hi })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeZeno {
    pub node: usize,
    pub count: usize,
    /// `None` with fewer than two events.
    pub min_gap: Option<f64>,
    pub mean_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZenoReport {
    pub nodes: Vec<NodeZeno>,
    pub global_min_gap: Option<f64>,
}

impl ZenoReport {
    pub fn node(&self, i: usize) -> Option<&NodeZeno> {
        self.nodes.iter().find(|n| n.node == i)
    }
}

/// Per-node event counts and inter-event gaps for `nodes`.
pub fn zeno_diagnostics(log: &EventLog, horizon: (f64, f64), nodes: &[usize]) -> Result<ZenoReport, BoundsError> {
    for r in &log.records {
        if r.t < horizon.0 || r.t > horizon.1 {
            return Err(BoundsError::OutOfHorizon(r.t));
        }
    }
    let mut out = Vec::with_capacity(nodes.len());
    for &i in nodes {
        let times: Vec<f64> = log.for_node(i).map(|r| r.t).collect();
        let gaps: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
        if gaps.iter().any(|g| !(*g > 0.0)) {
            return Err(BoundsError::UnsortedLog(i));
        }
        let min_gap = gaps.iter().cloned().reduce(f64::min);
        let mean_gap = (!gaps.is_empty()).then(|| gaps.iter().sum::<f64>() / gaps.len() as f64);
        out.push(NodeZeno { node: i, count: times.len(), min_gap, mean_gap });
    }
    let global_min_gap = out.iter().filter_map(|n| n.min_gap).reduce(f64::min);
    Ok(ZenoReport { nodes: out, global_min_gap })
}

/// Inputs for checking logged inter-event gaps against `T_k`.
#[derive(Debug, Clone)]
pub struct RunBoundsInput<'a> {
    pub topology: &'a Topology,
    pub inner: &'a InnerCoupling,
    pub pins: &'a PinSet,
    /// Trigger parameters in pin order.
    pub triggers: &'a [NodeTrigger],
    pub gamma: f64,
    /// Coupling strength used in `θ` and `σ_i`; for adaptive runs the largest observed value.
    pub c: f64,
    pub t0: f64,
    pub w0: f64,
    /// Observed supremum of `W` over the run.
    pub w_sup: f64,
    pub log: &'a EventLog,
    pub epsilon: f64,
    pub mu: Option<f64>,
    pub event_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeSigma {
    pub node: usize,
    /// σ_i with the proof's `M`.
    pub proof: Result<f64, BoundsError>,
    /// σ_i with `M` replaced by the observed supremum of `W`.
    pub observed: Result<f64, BoundsError>,
    /// σ actually used for `T_k`. For an isolated pinned node the coupling
    /// term vanishes and `2‖Γ‖γα_i` remains.
    pub used: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventBound {
    pub node: usize,
    pub k: usize,
    pub t: f64,
    pub bound: Result<f64, BoundsError>,
    /// Time to the node's next event, if any.
    pub gap: Option<f64>,
    /// `gap ≥ T_k − 2·event_tol`
    pub sound: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunBounds {
    pub epsilon: f64,
    pub theta: Result<f64, BoundsError>,
    pub params: Option<BoundParams>,
    pub m_proof: Option<f64>,
    pub m_observed: f64,
    pub sigmas: Vec<NodeSigma>,
    pub events: Vec<EventBound>,
    pub violations: usize,
}

/// Evaluates `θ`, `σ_i` and `T_k` for every logged event and compares each
/// `T_k` with the observed gap to the next event of the same node.
pub fn analyze_run(input: &RunBoundsInput<'_>) -> Result<RunBounds, BoundsError> {
    let pins = input.pins;
    if input.triggers.len() != pins.len() {
        return Err(BoundsError::InvalidParameter("one trigger per pinned node".into()));
    }
    let alphas: Vec<f64> = input.triggers.iter().map(|t| t.alpha).collect();
    let betas: Vec<f64> = input.triggers.iter().map(|t| t.beta).collect();
    let all_pinned = pins.len() == input.topology.n_nodes();

    let theta = theta(input.topology, pins, input.c, input.gamma, input.epsilon);
    let params = match (&theta, all_pinned) {
        (Ok(th), _) => Some(BoundParams::new(input.epsilon, input.mu, *th, &alphas, &betas, input.w0)?),
        // no unpinned nodes: W ≡ 0 and θ plays no role
        (Err(_), true) if !alphas.is_empty() => {
            Some(BoundParams::new(input.epsilon, input.mu, 0.0, &alphas, &betas, input.w0)?)
        }
        _ => None,
    };
    let m_proof = params.as_ref().map(|p| p.m);
    let m_observed = input.w_sup.max(0.0);

    let sigmas: Vec<NodeSigma> = pins
        .indices()
        .iter()
        .enumerate()
        .map(|(pos, &i)| {
            let s = |m: f64| sigma_i(input.topology, input.inner, pins, i, input.gamma, input.c, &alphas, m);
            let proof = match m_proof {
                Some(m) => s(m),
                None => Err(theta.clone().err().unwrap_or(BoundsError::NoPinnedNodes)),
            };
            let observed = s(m_observed);
            let used = match &observed {
                Ok(v) => *v,
                Err(_) => 2.0 * input.inner.spectral_norm() * input.gamma * alphas[pos],
            };
            NodeSigma { node: i, proof, observed, used }
        })
        .collect();

    let mut events = Vec::with_capacity(input.log.len());
    for rec in &input.log.records {
        let Some(pos) = pins.position(rec.node) else {
            return Err(BoundsError::NotPinned(rec.node));
        };
        let trig = input.triggers[pos];
        let v_k = trig.threshold(rec.t, input.t0);
        let bound = inter_event_lower_bound(v_k, rec.t, input.t0, trig.alpha, trig.beta, trig.d, sigmas[pos].used);
        let gap = input.log.for_node(rec.node).find(|r| r.k == rec.k + 1).map(|next| next.t - rec.t);
        let sound = match (&bound, gap) {
            (Ok(b), Some(g)) => Some(g >= b - 2.0 * input.event_tol),
            _ => None,
        };
        events.push(EventBound { node: rec.node, k: rec.k, t: rec.t, bound, gap, sound });
    }
    let violations = events.iter().filter(|e| e.sound == Some(false)).count();

    Ok(RunBounds { epsilon: input.epsilon, theta, params, m_proof, m_observed, sigmas, events, violations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_topology;
    use crate::simulator::EventRecord;

    fn rec(node: usize, k: usize, t: f64) -> EventRecord {
        EventRecord { node, k, t, v_before: 1.0, v_after: 0.5, c: 1.0 }
    }

    fn k4() -> Topology {
        // complete graph on four nodes
        Topology::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap()
    }

    #[test]
    fn theta_direct_formula() {
        let pins = PinSet::new(vec![0, 1], 4).unwrap();
        assert_eq!(theta(&k4(), &pins, 1.0, 1.0, 1.0).unwrap(), 4.0);
        assert_eq!(theta(&k4(), &pins, 1.0, 1.0, 2.0).unwrap(), 2.0);
    }

    #[test]
    fn theta_disconnected_blocks_and_errors() {
        let t = Topology::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        let pins = PinSet::new(vec![0, 1], 4).unwrap();
        assert_eq!(theta(&t, &pins, 3.0, 2.0, 1.0).unwrap(), 0.0);
        assert_eq!(theta(&t, &PinSet::empty(), 1.0, 1.0, 1.0), Err(BoundsError::NoPinnedNodes));
        assert_eq!(theta(&t, &PinSet::all(4), 1.0, 1.0, 1.0), Err(BoundsError::NoUnpinnedNodes));
    }

    #[test]
    fn sigma_direct_substitution() {
        let t = validate_topology(&[vec![-1.0, 1.0], vec![1.0, -1.0]]).unwrap();
        let pins = PinSet::new(vec![0], 2).unwrap();
        let g = InnerCoupling::identity(2);
        assert_eq!(sigma_i(&t, &g, &pins, 0, 1.0, 1.0, &[1.0], 1.0).unwrap(), 6.0);
        // gamma = 0 keeps only the coupling term
        assert_eq!(sigma_i(&t, &g, &pins, 0, 0.0, 1.0, &[1.0], 1.0).unwrap(), 4.0);
        let g3 = InnerCoupling::diagonal(&[3.0, 3.0]).unwrap();
        assert!((sigma_i(&t, &g3, &pins, 0, 1.0, 1.0, &[1.0], 1.0).unwrap() - 18.0).abs() < 1e-12);
        assert_eq!(sigma_i(&t, &g, &pins, 1, 1.0, 1.0, &[1.0], 1.0), Err(BoundsError::NotPinned(1)));
    }

    #[test]
    fn sigma_isolated_node() {
        let t = validate_topology(&[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let pins = PinSet::new(vec![1], 2).unwrap();
        let g = InnerCoupling::identity(1);
        assert_eq!(sigma_i(&t, &g, &pins, 1, 1.0, 1.0, &[1.0], 0.0), Err(BoundsError::IsolatedPinnedNode(1)));
    }

    #[test]
    fn bound_params_derivation() {
        let p = BoundParams::new(1.0, None, 2.0, &[1.0, 3.0], &[0.8, 0.6], 0.5).unwrap();
        assert_eq!(p.alpha_hat, 6.0);
        assert_eq!(p.beta_check, 0.6);
        assert!((p.mu - 0.3).abs() < 1e-15);
        assert!((p.m - (0.5 + 6.0 / 0.3)).abs() < 1e-12);
        assert!(BoundParams::new(1.0, Some(0.6), 2.0, &[1.0], &[0.6], 0.0).is_err());
    }

    #[test]
    fn lower_bound_scalar_root() {
        let t = inter_event_lower_bound(1.0, 0.0, 0.0, 1.0, 2.0_f64.ln(), 0.5, 1.0).unwrap();
        // independent root of 0.25 + T = 2^-T
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if 0.25 + mid - 2.0_f64.powf(-mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert!((t - lo).abs() < 1e-6);
        assert!((t - 0.471_309_556_6).abs() < 1e-6);
    }

    #[test]
    fn lower_bound_limits() {
        let t = inter_event_lower_bound(1.0, 0.0, 0.0, 1.0, 1.0, 1e-6, 1.0).unwrap();
        assert!(t > 0.0 && t < 1e-5);
        let a = inter_event_lower_bound(1.0, 0.0, 0.0, 1.0, 1.0, 0.5, 1.0).unwrap();
        let b = inter_event_lower_bound(1.0, 0.0, 0.0, 1.0, 1.0, 0.5, 10.0).unwrap();
        assert!(b < a);
        // σ = 0 has the closed form −2 ln(1−d)/β
        let c = inter_event_lower_bound(1.0, 0.0, 0.0, 1.0, 0.5, 0.5, 0.0).unwrap();
        assert!((c - 4.0 * 2.0_f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn lower_bound_precondition() {
        assert!(matches!(
            inter_event_lower_bound(0.9, 0.0, 0.0, 1.0, 1.0, 0.5, 1.0),
            Err(BoundsError::PreconditionViolation { .. })
        ));
    }

    #[test]
    fn zeno_examples() {
        let log = EventLog { records: vec![rec(2, 1, 1.0), rec(2, 2, 2.0), rec(2, 3, 4.0)] };
        let r = zeno_diagnostics(&log, (0.0, 5.0), &[2]).unwrap();
        let n = r.node(2).unwrap();
        assert_eq!(n.count, 3);
        assert_eq!(n.min_gap, Some(1.0));
        assert_eq!(n.mean_gap, Some(1.5));
        assert_eq!(r.global_min_gap, Some(1.0));

        let r = zeno_diagnostics(&EventLog::default(), (0.0, 5.0), &[0, 1]).unwrap();
        assert!(r.nodes.iter().all(|n| n.count == 0 && n.min_gap.is_none()));
        assert_eq!(r.global_min_gap, None);
    }

    #[test]
    fn zeno_rejects_unsorted() {
        let log = EventLog { records: vec![rec(0, 1, 2.0), rec(0, 2, 1.0)] };
        assert_eq!(zeno_diagnostics(&log, (0.0, 5.0), &[0]), Err(BoundsError::UnsortedLog(0)));
        assert!(matches!(zeno_diagnostics(&log, (0.0, 1.5), &[0]), Err(BoundsError::OutOfHorizon(_))));
    }
}
