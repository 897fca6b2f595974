//! Log-barrier interior-point method for
//! `max Σx  s.t.  Ax ≤ b,  ln Σ_j exp(w_j + s·x_j) ≤ ln B` (per group).

use nalgebra::{DMatrix, DVector};

/// Per-group convex budget row: `ln Σ_j exp(offsets_j + slope·x_{vars_j}) ≤ log_budget`.
#[derive(Debug, Clone)]
pub(crate) struct ExpRow {
    pub vars: Vec<usize>,
    pub offsets: Vec<f64>,
    pub slope: f64,
    pub log_budget: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct LinRow {
    pub vars: Vec<usize>,
    pub cap: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct BarrierProblem {
    pub num_vars: usize,
    pub lin: Vec<LinRow>,
    pub exp: Vec<ExpRow>,
}

#[derive(Debug, Clone)]
pub(crate) struct BarrierResult {
    pub x: Vec<f64>,
    pub newton_steps: usize,
    pub converged: bool,
}

pub(crate) struct BarrierOptions {
    pub gap_tol: f64,
    pub max_newton: usize,
}

impl ExpRow {
    /// Softmax weights and log-sum-exp value at `x`.
    fn eval(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let z: Vec<f64> = self
            .vars
            .iter()
            .zip(&self.offsets)
            .map(|(&v, &w)| w + self.slope * x[v])
            .collect();
        let top = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = z.iter().map(|v| (v - top).exp()).collect();
        let s: f64 = e.iter().sum();
        (top + s.ln(), e.iter().map(|v| v / s).collect())
    }
}

impl BarrierProblem {
    fn slacks(&self, x: &[f64]) -> Option<(Vec<f64>, Vec<(f64, Vec<f64>)>)> {
        let mut lin = Vec::with_capacity(self.lin.len());
        for row in &self.lin {
            let s = row.cap - row.vars.iter().map(|&v| x[v]).sum::<f64>();
            if !(s > 0.0) {
                return None;
            }
            lin.push(s);
        }
        let mut exp = Vec::with_capacity(self.exp.len());
        for row in &self.exp {
            let (lse, p) = row.eval(x);
            let s = row.log_budget - lse;
            if !(s > 0.0) {
                return None;
            }
            exp.push((s, p));
        }
        Some((lin, exp))
    }

    fn merit(&self, t: f64, x: &[f64]) -> Option<f64> {
        let (lin, exp) = self.slacks(x)?;
        let obj: f64 = x.iter().sum();
        Some(-t * obj - lin.iter().map(|s| s.ln()).sum::<f64>() - exp.iter().map(|(s, _)| s.ln()).sum::<f64>())
    }

    fn constraint_count(&self) -> usize {
        self.lin.len() + self.exp.len()
    }
}

/// Follows the central path from the strictly feasible `start`.
pub(crate) fn solve(p: &BarrierProblem, start: Vec<f64>, opts: &BarrierOptions) -> BarrierResult {
    let n = p.num_vars;
    let mut x = start;
    debug_assert!(p.slacks(&x).is_some(), "start must be strictly feasible");
    if n == 0 {
        return BarrierResult {
            x,
            newton_steps: 0,
            converged: true,
        };
    }
    let m = p.constraint_count().max(1) as f64;
    let mut t = 1.0;
    let mu = 12.0;
    let mut steps = 0;
    loop {
        // Centering. The merit is scaled by t, so a decrement of 1e-8 leaves
        // an objective error near 1e-8/t.
        let mut centering = 0;
        loop {
            centering += 1;
            if centering > 200 {
                break;
            }
            if steps >= opts.max_newton {
                return BarrierResult {
                    x,
                    newton_steps: steps,
                    converged: false,
                };
            }
            let (lin, exp) = p.slacks(&x).expect("iterate stays interior");
            let mut grad = DVector::from_element(n, -t);
            let mut hess = DMatrix::<f64>::zeros(n, n);
            for (row, &s) in p.lin.iter().zip(&lin) {
                let inv = 1.0 / s;
                for &a in &row.vars {
                    grad[a] += inv;
                    for &b in &row.vars {
                        hess[(a, b)] += inv * inv;
                    }
                }
            }
            for (row, (s, w)) in p.exp.iter().zip(&exp) {
                // f = lse - log_budget, ∇f = slope·w, ∇²f = slope²(diag w - w wᵀ).
                let inv = 1.0 / s;
                let c = row.slope;
                for (i, &a) in row.vars.iter().enumerate() {
                    grad[a] += inv * c * w[i];
                    hess[(a, a)] += inv * c * c * w[i];
                    for (j, &b) in row.vars.iter().enumerate() {
                        hess[(a, b)] += c * c * w[i] * w[j] * (inv * inv - inv);
                    }
                }
            }
            let step = newton_direction(&hess, &grad);
            let decrement = -grad.dot(&step);
            steps += 1;
            if decrement / 2.0 < 1e-8 {
                break;
            }
            let f0 = p.merit(t, &x).expect("interior");
            let mut s = 1.0;
            let mut accepted = false;
            for _ in 0..80 {
                let cand: Vec<f64> = x.iter().zip(step.iter()).map(|(a, d)| a + s * d).collect();
                if let Some(f) = p.merit(t, &cand) {
                    if f <= f0 - 0.25 * s * decrement {
                        x = cand;
                        accepted = true;
                        break;
                    }
                }
                s *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if m / t < opts.gap_tol {
            return BarrierResult {
                x,
                newton_steps: steps,
                converged: true,
            };
        }
        t *= mu;
    }
}

fn newton_direction(hess: &DMatrix<f64>, grad: &DVector<f64>) -> DVector<f64> {
    let scale = hess.diagonal().iter().cloned().fold(0.0, f64::max).max(1e-300);
    let mut reg = 0.0;
    loop {
        let mut h = hess.clone();
        for i in 0..h.nrows() {
            h[(i, i)] += reg;
        }
        if let Some(ch) = h.cholesky() {
            return -ch.solve(grad);
        }
        reg = if reg == 0.0 { 1e-14 * scale } else { reg * 100.0 };
    }
}
