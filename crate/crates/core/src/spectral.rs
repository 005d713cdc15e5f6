//! Spectral side of the synchronization condition: the reduced matrix on
//! unpinned nodes, its largest eigenvalue, and the greedy pin selection.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::model::Topology;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("matrix is empty")]
    EmptyMatrix,
    #[error("matrix is not square")]
    NotSquare,
    #[error("every node is pinned; the reduced matrix is empty")]
    AllNodesPinned,
    #[error("pin index {index} out of range for {len} nodes")]
    PinOutOfRange { index: usize, len: usize },
    #[error("node {0} is pinned more than once")]
    DuplicatePin(usize),
}

/// Ordered set of distinct pinned node indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PinSet {
    pinned: Vec<usize>,
}

impl PinSet {
    pub fn new(pinned: Vec<usize>, n_nodes: usize) -> Result<Self, SpectralError> {
        for (k, &p) in pinned.iter().enumerate() {
            if p >= n_nodes {
                return Err(SpectralError::PinOutOfRange { index: p, len: n_nodes });
            }
            if pinned[..k].contains(&p) {
                return Err(SpectralError::DuplicatePin(p));
            }
        }
        Ok(Self { pinned })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn all(n_nodes: usize) -> Self {
        Self { pinned: (0..n_nodes).collect() }
    }

    pub fn len(&self) -> usize {
        self.pinned.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pinned.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.pinned
    }

    pub fn contains(&self, i: usize) -> bool {
        self.pinned.contains(&i)
    }

    /// Position of node `i` within the pin order.
    pub fn position(&self, i: usize) -> Option<usize> {
        self.pinned.iter().position(|&p| p == i)
    }

    /// Unpinned indices in ascending order.
    pub fn unpinned(&self, n_nodes: usize) -> Vec<usize> {
        (0..n_nodes).filter(|i| !self.contains(*i)).collect()
    }

    fn with(&self, i: usize) -> Self {
        let mut pinned = self.pinned.clone();
        pinned.push(i);
        Self { pinned }
    }
}

/// Principal submatrix of `A` on the unpinned indices.
pub fn reduced_matrix(topology: &Topology, pins: &PinSet) -> Result<DMatrix<f64>, SpectralError> {
    let n = topology.n_nodes();
    if let Some(&p) = pins.indices().iter().find(|&&p| p >= n) {
        return Err(SpectralError::PinOutOfRange { index: p, len: n });
    }
    let free = pins.unpinned(n);
    if free.is_empty() {
        return Err(SpectralError::AllNodesPinned);
    }
    Ok(DMatrix::from_fn(free.len(), free.len(), |r, c| topology.get(free[r], free[c])))
}

const SYMMETRY_TOL: f64 = 1e-10;
const MAX_SWEEPS: usize = 100;

/// All eigenvalues of a symmetric matrix, ascending, by cyclic Jacobi sweeps.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>, SpectralError> {
    let n = m.nrows();
    if n == 0 {
        return Err(SpectralError::EmptyMatrix);
    }
    if m.ncols() != n {
        return Err(SpectralError::NotSquare);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOL {
                return Err(SpectralError::NotSymmetric(i, j));
            }
        }
    }

    let mut a = (m + m.transpose()) * 0.5;
    let total = a.norm();
    let target = 1e-14 * total;

    for _ in 0..MAX_SWEEPS {
        let off = off_diagonal_norm(&a);
        if off <= target || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut a, p, q, c, s);
            }
        }
    }

    let mut eig: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    eig.sort_by(|x, y| x.total_cmp(y));
    Ok(eig)
}

fn off_diagonal_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

// a <- Jᵀ a J with J the plane rotation in (p, q) that zeroes a[p][q]
fn rotate(a: &mut DMatrix<f64>, p: usize, q: usize, c: f64, s: f64) {
    let n = a.nrows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
}

pub fn lambda_max_symmetric(m: &DMatrix<f64>) -> Result<f64, SpectralError> {
    Ok(*symmetric_eigenvalues(m)?.last().expect("non-empty"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionReport {
    /// Largest eigenvalue of the reduced matrix; `None` when every node is pinned.
    pub lambda_max_abar: Option<f64>,
    /// `γ / |λ_max(Ā)|`. `0` when every node is pinned, `+∞` when `λ_max(Ā) ≥ 0`.
    pub min_coupling: f64,
    pub satisfied: bool,
}

/// Checks `γI + cĀ < 0`, which for symmetric `Ā` is `γ + c·λ_max(Ā) < 0`.
///
/// Eigenvalues within `1e-12·max(1, ‖Ā‖)` of zero are reported as exactly zero.
pub fn check_sync_condition(
    gamma: f64,
    c: f64,
    topology: &Topology,
    pins: &PinSet,
) -> Result<ConditionReport, SpectralError> {
    let abar = match reduced_matrix(topology, pins) {
        Ok(m) => m,
        Err(SpectralError::AllNodesPinned) => {
            return Ok(ConditionReport { lambda_max_abar: None, min_coupling: 0.0, satisfied: true })
        }
        Err(e) => return Err(e),
    };
    let mut lambda = lambda_max_symmetric(&abar)?;
    if lambda.abs() <= 1e-12 * abar.norm().max(1.0) {
        lambda = 0.0;
    }
    let min_coupling = if lambda < 0.0 { gamma / lambda.abs() } else { f64::INFINITY };
    Ok(ConditionReport { lambda_max_abar: Some(lambda), min_coupling, satisfied: gamma + c * lambda < 0.0 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialSet {
    pub pins: PinSet,
    pub report: ConditionReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub pins: PinSet,
    /// One entry per examined set: the mandatory set first, then each addition.
    pub trail: Vec<TrialSet>,
}

/// Pins every node of degree `≤ γ/c`, then adds the largest-degree unpinned
/// node (lowest index on ties) until the condition holds or all nodes are pinned.
pub fn select_pinned_nodes(topology: &Topology, gamma: f64, c: f64) -> Selection {
    let n = topology.n_nodes();
    let degrees = topology.degrees();
    let threshold = gamma / c;
    let mandatory: Vec<usize> = (0..n).filter(|&i| degrees[i] <= threshold).collect();
    let mut pins = PinSet { pinned: mandatory };
    let mut trail = Vec::new();
    loop {
        let report = check_sync_condition(gamma, c, topology, &pins)
            .expect("validated topology yields a symmetric reduced matrix");
        trail.push(TrialSet { pins: pins.clone(), report });
        if report.satisfied {
            break;
        }
        let next = pins
            .unpinned(n)
            .into_iter()
            .max_by(|&a, &b| degrees[a].total_cmp(&degrees[b]).then(b.cmp(&a)))
            .expect("unsatisfied condition implies an unpinned node");
        pins = pins.with(next);
    }
    Selection { pins, trail }
}
