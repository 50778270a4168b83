//! Small summary statistics shared by the estimators.

use serde::{Deserialize, Serialize};

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub samples: usize,
}

impl MeanEstimate {
    /// Two-pass mean and standard error of the mean.
    pub fn from_samples(xs: &[f64]) -> Self {
        let m = xs.len();
        if m == 0 {
            return MeanEstimate {
                mean: f64::NAN,
                std_err: f64::NAN,
                samples: 0,
            };
        }
        let mean = xs.iter().sum::<f64>() / m as f64;
        let std_err = if m > 1 {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
            (var / m as f64).sqrt()
        } else {
            0.0
        };
        MeanEstimate {
            mean,
            std_err,
            samples: m,
        }
    }

    /// Binomial proportion `hits / m` with standard error `√(p(1-p)/m)`.
    pub fn proportion(hits: usize, m: usize) -> Self {
        if m == 0 {
            return Self::from_samples(&[]);
        }
        let p = hits as f64 / m as f64;
        MeanEstimate {
            mean: p,
            std_err: (p * (1.0 - p) / m as f64).sqrt(),
            samples: m,
        }
    }
}

/// Linear-interpolation quantile of an ascending slice (`q` in `[0, 1]`).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        len => {
            let pos = q.clamp(0.0, 1.0) * (len - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            let frac = pos - lo as f64;
            sorted[lo] + (sorted[hi] - sorted[lo]) * frac
        }
    }
}

/// Mean, median and interquartile range of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub iqr: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        let mut sorted = xs.to_vec();
        sorted.sort_by(f64::total_cmp);
        let q1 = quantile_sorted(&sorted, 0.25);
        let q3 = quantile_sorted(&sorted, 0.75);
        Summary {
            count: xs.len(),
            mean: if xs.is_empty() {
                f64::NAN
            } else {
                xs.iter().sum::<f64>() / xs.len() as f64
            },
            median: quantile_sorted(&sorted, 0.5),
            q1,
            q3,
            iqr: q3 - q1,
        }
    }
}
