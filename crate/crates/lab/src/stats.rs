//! Small sample-statistics helpers for experiment summaries.

pub fn mean(xs: &[f64]) -> f64 {
    assert!(!xs.is_empty(), "mean of empty slice");
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Standard error of the mean (sample standard deviation over sqrt(n));
/// zero for a single observation.
pub fn standard_error(xs: &[f64]) -> f64 {
    let n = xs.len();
    assert!(n > 0, "standard error of empty slice");
    if n == 1 {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

/// Quantile with linear interpolation between order statistics,
/// `q` in `[0, 1]`.
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    assert!(!xs.is_empty(), "quantile of empty slice");
    assert!((0.0..=1.0).contains(&q), "quantile level out of range");
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let w = pos - lo as f64;
        sorted[lo] * (1.0 - w) + sorted[hi] * w
    }
}

/// Ordinary least squares fit of `y = slope * x + intercept`.
#[derive(Clone, Copy, Debug)]
pub struct Ols {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope (residual-based; zero for 2 points).
    pub slope_se: f64,
}

pub fn ols(xs: &[f64], ys: &[f64]) -> Ols {
    assert_eq!(xs.len(), ys.len(), "ols input length mismatch");
    let n = xs.len();
    assert!(n >= 2, "ols needs at least two points");
    let mx = mean(xs);
    let my = mean(ys);
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    assert!(sxx > 0.0, "ols needs nonconstant x");
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_se = if n > 2 {
        let ss_res: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| {
                let r = y - (slope * x + intercept);
                r * r
            })
            .sum();
        (ss_res / (n - 2) as f64 / sxx).sqrt()
    } else {
        0.0
    };
    Ols {
        slope,
        intercept,
        slope_se,
    }
}
