use crate::error::{Error, Result};

/// Water-filling power allocation.
///
/// Maximizes `Σ log₂(1 + g_n p_n / σ²)` subject to `Σ p_n ≤ budget`, giving
/// `p_n = max(0, μ - σ²/g_n)` with the water level `μ` chosen so the budget is
/// spent exactly. Zero gains receive no power.
pub fn waterfill(gains: &[f64], budget: f64, noise: f64) -> Result<Vec<f64>> {
    if gains.is_empty() || !gains.iter().any(|&g| g > 0.0) {
        return Err(Error::EmptyGains);
    }
    let mut alloc = vec![0.0; gains.len()];
    if budget <= 0.0 {
        return Ok(alloc);
    }
    let level = water_level(gains, budget, noise);
    for (p, &g) in alloc.iter_mut().zip(gains) {
        if g > 0.0 {
            *p = (level - noise / g).max(0.0);
        }
    }
    Ok(alloc)
}

/// The water level `μ` for [`waterfill`].
pub fn water_level(gains: &[f64], budget: f64, noise: f64) -> f64 {
    let mut floors: Vec<f64> = gains
        .iter()
        .filter(|&&g| g > 0.0)
        .map(|&g| noise / g)
        .collect();
    floors.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut acc = 0.0;
    let mut level = 0.0;
    for (i, f) in floors.iter().enumerate() {
        acc += f;
        let candidate = (budget + acc) / (i + 1) as f64;
        level = candidate;
        if i + 1 == floors.len() || floors[i + 1] >= candidate {
            break;
        }
    }
    level
}

/// `Σ log₂(1 + g_n p_n / σ²)`
pub fn waterfill_objective(gains: &[f64], alloc: &[f64], noise: f64) -> f64 {
    gains
        .iter()
        .zip(alloc)
        .map(|(g, p)| (1.0 + g * p / noise).log2())
        .sum()
}
