//! Brute-force oracles shared by the integration test targets.

/// Solves the square system in place; `None` when it is singular.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Best vertex of `{Ax ≤ b, x ≥ 0}` by enumerating every basis.
pub fn vertex_enumeration(obj: &[f64], a: &[Vec<f64>], b: &[f64]) -> f64 {
    let n = obj.len();
    let mut rows: Vec<(Vec<f64>, f64)> = a.iter().cloned().zip(b.iter().copied()).collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = -1.0;
        rows.push((e, 0.0));
    }
    let mut best = f64::NEG_INFINITY;
    let total = rows.len();
    let mut pick: Vec<usize> = (0..n).collect();
    loop {
        let sys: Vec<Vec<f64>> = pick.iter().map(|&i| rows[i].0.clone()).collect();
        let rhs: Vec<f64> = pick.iter().map(|&i| rows[i].1).collect();
        if let Some(x) = solve_square(sys, rhs) {
            let feasible = rows
                .iter()
                .all(|(r, cap)| r.iter().zip(&x).map(|(c, v)| c * v).sum::<f64>() <= cap + 1e-9 * (1.0 + cap.abs()));
            if feasible {
                best = best.max(obj.iter().zip(&x).map(|(c, v)| c * v).sum());
            }
        }
        // next combination
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if pick[i] < total - n + i {
                pick[i] += 1;
                for j in i + 1..n {
                    pick[j] = pick[j - 1] + 1;
                }
                break;
            }
        }
    }
}
