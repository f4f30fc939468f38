//! Small descriptive-statistics helpers shared by the summary and classifier code.

/// Arithmetic mean. Returns `NaN` for an empty slice.
pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Mean and sample variance (n - 1 denominator), computed in two passes.
///
/// A single observation has variance 0.
pub fn mean_variance(xs: &[f64]) -> (f64, f64) {
    let m = mean(xs);
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (m, ss / (xs.len() - 1) as f64)
}

/// One-sample t-statistic of the mean against zero: `mean / (sd / sqrt(n))`.
///
/// A zero-variance sample gives `±inf` when its mean is nonzero and `None`
/// when the mean is zero too (nothing to test).
pub fn t_statistic(xs: &[f64]) -> Option<f64> {
    let (m, var) = mean_variance(xs);
    let se = (var / xs.len() as f64).sqrt();
    if se > 0.0 {
        Some(m / se)
    } else if m > 0.0 {
        Some(f64::INFINITY)
    } else if m < 0.0 {
        Some(f64::NEG_INFINITY)
    } else {
        None
    }
}
