use serde::{Deserialize, Serialize};

/// Mean, population standard deviation and maximum of a batch of `S_T` scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreStats {
    pub mean: f64,
    pub std: f64,
    pub best: i64,
}

impl ScoreStats {
    /// Panics on an empty slice.
    pub fn from_scores(scores: &[i64]) -> Self {
        assert!(!scores.is_empty(), "statistics of an empty score list");
        let n = scores.len() as f64;
        let mean = scores.iter().map(|&s| s as f64).sum::<f64>() / n;
        let var = scores.iter().map(|&s| (s as f64 - mean).powi(2)).sum::<f64>() / n;
        Self {
            mean,
            std: var.sqrt(),
            best: *scores.iter().max().unwrap(),
        }
    }
}

/// Sample variance (n − 1 denominator).
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
}
