use serde::{Deserialize, Serialize};

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl MeanEstimate {
    /// `None` for an empty sample. A single sample has zero standard error.
    pub fn from_samples(v: &[f64]) -> Option<Self> {
        if v.is_empty() {
            return None;
        }
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let std_error = if v.len() > 1 {
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        Some(Self {
            mean,
            std_error,
            samples: v.len(),
        })
    }
}

/// `a - b` for every seed present in both series. Inputs are `(seed, value)`.
pub fn paired_differences(a: &[(u64, f64)], b: &[(u64, f64)]) -> Vec<f64> {
    let lookup: std::collections::BTreeMap<u64, f64> = b.iter().copied().collect();
    a.iter()
        .filter_map(|(s, x)| lookup.get(s).map(|y| x - y))
        .collect()
}
