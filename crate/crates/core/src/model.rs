//! Network model: coupling topology, inner coupling, node dynamics and the
//! coupling-strength policy.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::rng::SplitMix64;
use crate::spectral;

/// One violated topology invariant. Indices are zero-based.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TopologyViolation {
    #[error("matrix is empty")]
    Empty,
    #[error("matrix is not square: row {row} has {len} entries, expected {expected}")]
    NonSquare { row: usize, len: usize, expected: usize },
    #[error("entry ({0}, {1}) is not finite")]
    NonFinite(usize, usize),
    #[error("a[{0}][{1}] != a[{1}][{0}]")]
    AsymmetricEntry(usize, usize),
    #[error("off-diagonal entry ({0}, {1}) is negative")]
    NegativeOffDiagonal(usize, usize),
    #[error("row {0} does not sum to zero")]
    RowSumNonzero(usize),
    #[error("diagonal entry ({0}, {0}) is positive")]
    PositiveDiagonal(usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub struct TopologyError(pub Vec<TopologyViolation>);

impl fmt::Display for TopologyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid topology:")?;
        for v in &self.0 {
            write!(f, " [{v}]")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("node index {index} out of range for {len} nodes")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("inner coupling matrix is not positive definite (smallest eigenvalue {0})")]
    NotPositiveDefinite(f64),
    #[error("inner coupling matrix must be square and non-empty")]
    BadInnerShape,
    #[error("one-sided bound gamma must be finite and nonnegative, got {0}")]
    NegativeGamma(f64),
    #[error("invalid coupling policy: {0}")]
    InvalidCoupling(String),
    #[error("sampling box has zero width in every coordinate")]
    DegenerateBox,
    #[error("sampling box interval {0} is not finite or is reversed")]
    InvalidBox(usize),
    #[error("n_samples must be at least 1")]
    NoSamples,
    #[error("topology file: {0}")]
    Io(#[from] std::io::Error),
    #[error("topology file line {line}: cannot parse {token:?}")]
    Parse { line: usize, token: String },
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

/// Symmetric, zero-row-sum coupling matrix with nonnegative off-diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    entries: DMatrix<f64>,
}

/// Checks a raw matrix against every topology invariant and reports all
/// violations at once.
pub fn validate_topology(raw: &[Vec<f64>]) -> Result<Topology, TopologyError> {
    let n = raw.len();
    if n == 0 {
        return Err(TopologyError(vec![TopologyViolation::Empty]));
    }
    let mut violations = Vec::new();
    for (row, r) in raw.iter().enumerate() {
        if r.len() != n {
            violations.push(TopologyViolation::NonSquare { row, len: r.len(), expected: n });
        }
    }
    if !violations.is_empty() {
        return Err(TopologyError(violations));
    }
    for (i, r) in raw.iter().enumerate() {
        for (j, &v) in r.iter().enumerate() {
            if !v.is_finite() {
                violations.push(TopologyViolation::NonFinite(i, j));
            }
        }
    }
    if !violations.is_empty() {
        return Err(TopologyError(violations));
    }

    for i in 0..n {
        for j in (i + 1)..n {
            if raw[i][j] != raw[j][i] {
                violations.push(TopologyViolation::AsymmetricEntry(i, j));
            }
        }
    }
    for (i, r) in raw.iter().enumerate() {
        for (j, &v) in r.iter().enumerate() {
            if i != j && v < 0.0 {
                violations.push(TopologyViolation::NegativeOffDiagonal(i, j));
            }
        }
    }
    for (i, r) in raw.iter().enumerate() {
        let sum: f64 = r.iter().sum();
        let scale = r.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        if sum.abs() > 1e-12 * scale {
            violations.push(TopologyViolation::RowSumNonzero(i));
        }
    }
    for (i, r) in raw.iter().enumerate() {
        if r[i] > 0.0 {
            violations.push(TopologyViolation::PositiveDiagonal(i));
        }
    }

    if violations.is_empty() {
        Ok(Topology { entries: DMatrix::from_fn(n, n, |i, j| raw[i][j]) })
    } else {
        Err(TopologyError(violations))
    }
}

impl Topology {
    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self, TopologyError> {
        validate_topology(&matrix_rows(m))
    }

    /// Reads the plain-text format: one row per line, whitespace-separated
    /// decimals. Blank lines and lines starting with `#` are skipped.
    pub fn parse_text(text: &str) -> Result<Self, ModelError> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>().map_err(|_| ModelError::Parse { line: lineno + 1, token: tok.to_string() })
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Ok(validate_topology(&rows)?)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        Self::parse_text(&std::fs::read_to_string(path)?)
    }

    pub fn n_nodes(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        matrix_rows(&self.entries)
    }

    pub fn degree(&self, i: usize) -> Result<f64, ModelError> {
        node_degree(self, i)
    }

    pub fn degrees(&self) -> Vec<f64> {
        (0..self.n_nodes()).map(|i| self.entries[(i, i)].abs()).collect()
    }

    /// Builds the zero-row-sum matrix of an undirected graph with unit weights.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, TopologyError> {
        let mut m = DMatrix::zeros(n, n);
        for &(i, j) in edges {
            if i != j && i < n && j < n {
                m[(i, j)] = 1.0;
                m[(j, i)] = 1.0;
            }
        }
        for i in 0..n {
            let s: f64 = (0..n).filter(|&j| j != i).map(|j| m[(i, j)]).sum();
            m[(i, i)] = -s;
        }
        Self::from_matrix(&m)
    }
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// `|a_ii|`, the degree of node `i`.
pub fn node_degree(topology: &Topology, i: usize) -> Result<f64, ModelError> {
    let n = topology.n_nodes();
    if i >= n {
        return Err(ModelError::IndexOutOfRange { index: i, len: n });
    }
    Ok(topology.entries[(i, i)].abs())
}

/// Canonical 8-node test network: connected, unit weights, degrees 3 to 6.
pub fn fixture_topology8() -> Topology {
    Topology::parse_text(include_str!("../fixtures/topology8.txt")).expect("bundled fixture topology is valid")
}

/// Positive definite inner coupling matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerCoupling {
    matrix: DMatrix<f64>,
    spectral_norm: f64,
}

impl InnerCoupling {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self, ModelError> {
        if matrix.nrows() == 0 || matrix.nrows() != matrix.ncols() {
            return Err(ModelError::BadInnerShape);
        }
        let sym = (&matrix + matrix.transpose()) * 0.5;
        let eig = spectral::symmetric_eigenvalues(&sym).map_err(|_| ModelError::BadInnerShape)?;
        let smallest = eig[0];
        if !(smallest > 1e-12) {
            return Err(ModelError::NotPositiveDefinite(smallest));
        }
        let gram = matrix.transpose() * &matrix;
        let spectral_norm =
            spectral::lambda_max_symmetric(&gram).map_err(|_| ModelError::BadInnerShape)?.max(0.0).sqrt();
        Ok(Self { matrix, spectral_norm })
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self, ModelError> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn identity(n: usize) -> Self {
        Self::new(DMatrix::identity(n, n)).expect("identity is positive definite")
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        self.spectral_norm
    }

    /// `out = Γ x`
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let n = self.dim();
        for (r, o) in out.iter_mut().enumerate().take(n) {
            *o = (0..n).map(|k| self.matrix[(r, k)] * x[k]).sum();
        }
    }

    /// `eᵀ Γ e`
    pub fn quad_form(&self, e: &[f64]) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for r in 0..n {
            for k in 0..n {
                acc += e[r] * self.matrix[(r, k)] * e[k];
            }
        }
        acc
    }
}

/// Right-hand side of an isolated node, `ż = f(t, z)`.
pub trait VectorField: Send + Sync {
    fn dim(&self) -> usize;
    /// Writes `f(t, z)` into `out`. Both slices have length `dim()`.
    fn eval(&self, t: f64, z: &[f64], out: &mut [f64]);
}

/// Chen system with parameters (35, 3, 28).
#[derive(Debug, Clone, Copy, Default)]
pub struct Chen;

/// One-sided bound commonly quoted for the Chen system with `Γ = diag(1, 2, 1)`.
pub const CHEN_GAMMA: f64 = 30.9342;

pub fn chen_vector_field(_t: f64, z: &[f64]) -> Result<[f64; 3], ModelError> {
    if z.len() != 3 {
        return Err(ModelError::DimensionMismatch { expected: 3, got: z.len() });
    }
    Ok(chen_rhs(z))
}

#[inline]
fn chen_rhs(z: &[f64]) -> [f64; 3] {
    [35.0 * z[1] - 35.0 * z[0], -7.0 * z[0] - z[0] * z[2] + 28.0 * z[1], z[0] * z[1] - 3.0 * z[2]]
}

impl VectorField for Chen {
    fn dim(&self) -> usize {
        3
    }

    fn eval(&self, _t: f64, z: &[f64], out: &mut [f64]) {
        out[..3].copy_from_slice(&chen_rhs(z));
    }
}

/// `f(z) = M z`
#[derive(Debug, Clone)]
pub struct Linear {
    pub matrix: DMatrix<f64>,
}

impl VectorField for Linear {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn eval(&self, _t: f64, z: &[f64], out: &mut [f64]) {
        let n = self.matrix.nrows();
        for (r, o) in out.iter_mut().enumerate().take(n) {
            *o = (0..n).map(|k| self.matrix[(r, k)] * z[k]).sum();
        }
    }
}

/// `f ≡ 0`
#[derive(Debug, Clone, Copy)]
pub struct Zero {
    pub dim: usize,
}

impl VectorField for Zero {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, _t: f64, _z: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
    }
}

/// Adapts a closure into a [`VectorField`].
pub struct FnField<F> {
    dim: usize,
    f: F,
}

impl<F> FnField<F>
where
    F: Fn(f64, &[f64], &mut [f64]) + Send + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> VectorField for FnField<F>
where
    F: Fn(f64, &[f64], &mut [f64]) + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, t: f64, z: &[f64], out: &mut [f64]) {
        (self.f)(t, z, out)
    }
}

/// Node vector field together with its one-sided bound `γ` (with `K = γI`).
#[derive(Clone)]
pub struct NodeDynamics {
    field: Arc<dyn VectorField>,
    gamma: f64,
}

impl fmt::Debug for NodeDynamics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NodeDynamics").field("dim", &self.dim()).field("gamma", &self.gamma).finish()
    }
}

impl NodeDynamics {
    pub fn new(field: impl VectorField + 'static, gamma: f64) -> Result<Self, ModelError> {
        Self::from_arc(Arc::new(field), gamma)
    }

    pub fn from_arc(field: Arc<dyn VectorField>, gamma: f64) -> Result<Self, ModelError> {
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(ModelError::NegativeGamma(gamma));
        }
        Ok(Self { field, gamma })
    }

    pub fn chen() -> Self {
        Self::new(Chen, CHEN_GAMMA).expect("valid gamma")
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    #[inline]
    pub fn eval(&self, t: f64, z: &[f64], out: &mut [f64]) {
        self.field.eval(t, z, out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CouplingPolicy {
    Fixed {
        c: f64,
    },
    Adaptive {
        c0: f64,
        zeta: f64,
    },
    /// Adaptive law clamped at `cap` from the first instant `c(t)` reaches it.
    SaturatedAdaptive {
        c0: f64,
        zeta: f64,
        cap: f64,
    },
}

impl CouplingPolicy {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: &str| Err(ModelError::InvalidCoupling(m.to_string()));
        match *self {
            CouplingPolicy::Fixed { c } => {
                if !(c.is_finite() && c > 0.0) {
                    return bad("fixed c must be positive");
                }
            }
            CouplingPolicy::Adaptive { c0, zeta } => {
                if !(c0.is_finite() && c0 >= 0.0) {
                    return bad("c0 must be nonnegative");
                }
                if !(zeta.is_finite() && zeta > 0.0) {
                    return bad("zeta must be positive");
                }
            }
            CouplingPolicy::SaturatedAdaptive { c0, zeta, cap } => {
                CouplingPolicy::Adaptive { c0, zeta }.validate()?;
                if !(cap.is_finite() && cap > c0) {
                    return bad("cap must exceed c0");
                }
            }
        }
        Ok(())
    }

    pub fn initial(&self) -> f64 {
        match *self {
            CouplingPolicy::Fixed { c } => c,
            CouplingPolicy::Adaptive { c0, .. } | CouplingPolicy::SaturatedAdaptive { c0, .. } => c0,
        }
    }

    pub fn zeta(&self) -> Option<f64> {
        match *self {
            CouplingPolicy::Fixed { .. } => None,
            CouplingPolicy::Adaptive { zeta, .. } | CouplingPolicy::SaturatedAdaptive { zeta, .. } => Some(zeta),
        }
    }

    pub fn cap(&self) -> Option<f64> {
        match *self {
            CouplingPolicy::SaturatedAdaptive { cap, .. } => Some(cap),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NetworkSpec {
    pub topology: Topology,
    pub inner: InnerCoupling,
    pub dynamics: NodeDynamics,
    pub coupling: CouplingPolicy,
}

impl NetworkSpec {
    pub fn new(
        topology: Topology,
        inner: InnerCoupling,
        dynamics: NodeDynamics,
        coupling: CouplingPolicy,
    ) -> Result<Self, ModelError> {
        if inner.dim() != dynamics.dim() {
            return Err(ModelError::DimensionMismatch { expected: dynamics.dim(), got: inner.dim() });
        }
        coupling.validate()?;
        Ok(Self { topology, inner, dynamics, coupling })
    }

    pub fn n_nodes(&self) -> usize {
        self.topology.n_nodes()
    }

    pub fn dim(&self) -> usize {
        self.dynamics.dim()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OneSidedReport {
    pub gamma: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub bounds: Vec<(f64, f64)>,
    pub violation_count: usize,
    /// Largest sampled `(x−y)ᵀ(f(x)−f(y)) / (x−y)ᵀΓ(x−y)`; `None` if every
    /// sampled pair coincided.
    pub empirical_gamma_hat: Option<f64>,
}

/// Monte Carlo check of `(x−y)ᵀ(f(t,x)−f(t,y)) ≤ γ (x−y)ᵀΓ(x−y)` on a box.
///
/// Pairs are drawn coordinate by coordinate, `x` first then `y`, from the
/// seeded [`SplitMix64`] stream, evaluated at `t = 0`.
pub fn verify_one_sided_bound(
    dynamics: &NodeDynamics,
    inner: &InnerCoupling,
    bounds: &[(f64, f64)],
    n_samples: usize,
    seed: u64,
) -> Result<OneSidedReport, ModelError> {
    let n = dynamics.dim();
    if inner.dim() != n {
        return Err(ModelError::DimensionMismatch { expected: n, got: inner.dim() });
    }
    if bounds.len() != n {
        return Err(ModelError::DimensionMismatch { expected: n, got: bounds.len() });
    }
    if n_samples == 0 {
        return Err(ModelError::NoSamples);
    }
    for (k, &(lo, hi)) in bounds.iter().enumerate() {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(ModelError::InvalidBox(k));
        }
    }
    if bounds.iter().all(|&(lo, hi)| lo == hi) {
        return Err(ModelError::DegenerateBox);
    }

    let gamma = dynamics.gamma();
    let mut rng = SplitMix64::new(seed);
    let (mut x, mut y, mut fx, mut fy, mut d) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut violation_count = 0;
    let mut gamma_hat: Option<f64> = None;

    for _ in 0..n_samples {
        for (xi, &(lo, hi)) in x.iter_mut().zip(bounds) {
            *xi = rng.uniform(lo, hi);
        }
        for (yi, &(lo, hi)) in y.iter_mut().zip(bounds) {
            *yi = rng.uniform(lo, hi);
        }
        dynamics.eval(0.0, &x, &mut fx);
        dynamics.eval(0.0, &y, &mut fy);
        for k in 0..n {
            d[k] = x[k] - y[k];
        }
        let lhs: f64 = (0..n).map(|k| d[k] * (fx[k] - fy[k])).sum();
        let quad = inner.quad_form(&d);
        let rhs = gamma * quad;
        if lhs - rhs > 1e-9 * (1.0 + rhs.abs()) {
            violation_count += 1;
        }
        if quad > 0.0 {
            let q = lhs / quad;
            gamma_hat = Some(gamma_hat.map_or(q, |g| g.max(q)));
        }
    }

    Ok(OneSidedReport {
        gamma,
        n_samples,
        seed,
        bounds: bounds.to_vec(),
        violation_count,
        empirical_gamma_hat: gamma_hat,
    })
}
