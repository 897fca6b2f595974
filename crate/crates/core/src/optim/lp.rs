//! Dense primal simplex for `max cᵀx  s.t.  Ax ≤ b, x ≥ 0` with `b ≥ 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-12;
const MAX_PIVOTS: usize = 100_000;

/// One inequality row `Σ coeff·x_var ≤ cap`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpRow {
    pub coeffs: Vec<(usize, f64)>,
    pub cap: f64,
    /// Free-form tag carried into the binding-constraint report.
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub rows: Vec<LpRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// One nonnegative dual multiplier per row.
    pub duals: Vec<f64>,
    pub pivots: usize,
}

impl LpProblem {
    /// Sum-rate objective (all ones) over `num_vars` variables.
    pub fn sum_rate(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: vec![1.0; num_vars],
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, coeffs: Vec<(usize, f64)>, cap: f64, label: impl Into<String>) {
        self.rows.push(LpRow {
            coeffs,
            cap,
            label: label.into(),
        });
    }

    pub fn validate(&self) -> Result<()> {
        if self.objective.len() != self.num_vars {
            return Err(Error::DimensionMismatch("objective length".into()));
        }
        for row in &self.rows {
            if !row.coeffs.iter().any(|&(_, c)| c != 0.0) {
                return Err(Error::InvalidConfig(format!("row `{}` has no nonzero coefficient", row.label)));
            }
            if row.coeffs.iter().any(|&(v, c)| v >= self.num_vars || !c.is_finite()) {
                return Err(Error::DimensionMismatch(format!("row `{}` coefficients", row.label)));
            }
            if !row.cap.is_finite() || row.cap < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "row `{}` cap {} must be finite and nonnegative",
                    row.label, row.cap
                )));
            }
        }
        Ok(())
    }

    /// `Σ coeff·x` for one row.
    pub fn row_value(&self, row: usize, x: &[f64]) -> f64 {
        self.rows[row].coeffs.iter().map(|&(v, c)| c * x[v]).sum()
    }

    /// Largest violation of any row or of nonnegativity.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = (0..self.rows.len()).map(|i| self.row_value(i, x) - self.rows[i].cap);
        let signs = x.iter().map(|v| -v);
        rows.chain(signs).fold(0.0, f64::max)
    }
}

/// Solves the LP with Bland's rule. The slack basis is the starting vertex.
pub fn solve_lp(p: &LpProblem) -> Result<LpSolution> {
    p.validate()?;
    let m = p.rows.len();
    let n = p.num_vars;
    let width = n + m + 1;
    // Row i < m: constraint; row m: reduced costs (c_j - z_j), last column is -objective.
    let mut t = vec![0.0; (m + 1) * width];
    for (i, row) in p.rows.iter().enumerate() {
        for &(v, c) in &row.coeffs {
            t[i * width + v] += c;
        }
        t[i * width + n + i] = 1.0;
        t[i * width + width - 1] = row.cap;
    }
    t[m * width..m * width + n].copy_from_slice(&p.objective);
    let mut basis: Vec<usize> = (n..n + m).collect();

    let mut pivots = 0;
    loop {
        let entering = (0..n + m).find(|&j| t[m * width + j] > PIVOT_TOL);
        let Some(e) = entering else { break };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let a = t[i * width + e];
            if a > PIVOT_TOL {
                let ratio = t[i * width + width - 1] / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - 1e-14 || (ratio <= lr + 1e-14 && basis[i] < basis[li]) {
                            Some((i, ratio))
                        } else {
                            Some((li, lr))
                        }
                    }
                };
            }
        }
        let Some((r, _)) = leave else {
            return Err(Error::Unbounded);
        };
        pivot(&mut t, width, m, r, e);
        basis[r] = e;
        pivots += 1;
        if pivots > MAX_PIVOTS {
            return Err(Error::NonConvergence { iterations: pivots });
        }
    }

    let mut x = vec![0.0; n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            x[b] = t[i * width + width - 1].max(0.0);
        }
    }
    let duals = (0..m).map(|i| (-t[m * width + n + i]).max(0.0)).collect();
    let objective = p.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution {
        x,
        objective,
        duals,
        pivots,
    })
}

fn pivot(t: &mut [f64], width: usize, m: usize, r: usize, e: usize) {
    let inv = 1.0 / t[r * width + e];
    for j in 0..width {
        t[r * width + j] *= inv;
    }
    t[r * width + e] = 1.0;
    for i in 0..=m {
        if i == r {
            continue;
        }
        let f = t[i * width + e];
        if f == 0.0 {
            continue;
        }
        for j in 0..width {
            t[i * width + j] -= f * t[r * width + j];
        }
        t[i * width + e] = 0.0;
    }
}
