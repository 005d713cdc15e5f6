//! Classical fixed-step fourth-order Runge–Kutta over flat state vectors.

/// Reusable stage buffers for one system dimension.
#[derive(Debug, Clone)]
pub struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        Self { k1: vec![0.0; dim], k2: vec![0.0; dim], k3: vec![0.0; dim], k4: vec![0.0; dim], tmp: vec![0.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.k1.len()
    }

    /// Advances `y` at time `t` by `h`, writing the result into `out`.
    ///
    /// `rhs(t, y, dy)` must fill `dy` with the derivative at `(t, y)`.
    pub fn step<F>(&mut self, rhs: &mut F, t: f64, y: &[f64], h: f64, out: &mut [f64])
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let n = self.dim();
        debug_assert_eq!(y.len(), n);
        debug_assert_eq!(out.len(), n);
        let half = 0.5 * h;

        rhs(t, y, &mut self.k1);
        for i in 0..n {
            self.tmp[i] = y[i] + half * self.k1[i];
        }
        rhs(t + half, &self.tmp, &mut self.k2);
        for i in 0..n {
            self.tmp[i] = y[i] + half * self.k2[i];
        }
        rhs(t + half, &self.tmp, &mut self.k3);
        for i in 0..n {
            self.tmp[i] = y[i] + h * self.k3[i];
        }
        rhs(t + h, &self.tmp, &mut self.k4);
        for i in 0..n {
            out[i] = y[i] + h / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }
}

/// Integrates from `t0` to `t1` in `n_steps` equal steps and returns the end state.
pub fn integrate<F>(mut rhs: F, t0: f64, y0: &[f64], t1: f64, n_steps: usize) -> Vec<f64>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let mut rk = Rk4::new(y0.len());
    let h = (t1 - t0) / n_steps as f64;
    let mut y = y0.to_vec();
    let mut next = vec![0.0; y0.len()];
    for m in 0..n_steps {
        rk.step(&mut rhs, t0 + m as f64 * h, &y, h, &mut next);
        std::mem::swap(&mut y, &mut next);
    }
    y
}
