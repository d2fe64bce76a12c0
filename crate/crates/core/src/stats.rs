//! Small summary statistics used by the estimators.

/// Sample mean and standard error `sd / sqrt(n)` (unbiased variance).
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Mean and standard error from integer counts; exact for all-equal input.
pub fn count_mean_stderr(counts: &[u64]) -> (f64, f64) {
    let xs: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    if counts.windows(2).all(|w| w[0] == w[1]) {
        return (xs.first().copied().unwrap_or(f64::NAN), 0.0);
    }
    mean_stderr(&xs)
}

/// Result of fitting `y = c + b t`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
    pub intercept_stderr: f64,
    pub slope_stderr: f64,
    pub residuals: Vec<f64>,
}

/// Weighted least squares for `y = c + b t` with per-point standard errors.
///
/// Points whose error is zero would get infinite weight; when any error is
/// zero the fit falls back to ordinary least squares.
pub fn weighted_line_fit(t: &[f64], y: &[f64], sigma: &[f64]) -> LinearFit {
    assert!(t.len() == y.len() && y.len() == sigma.len() && t.len() >= 2);
    let unweighted = sigma.iter().any(|&s| s <= 0.0 || !s.is_finite());
    let w: Vec<f64> = sigma.iter().map(|&s| if unweighted { 1.0 } else { 1.0 / (s * s) }).collect();
    let sw: f64 = w.iter().sum();
    let st: f64 = w.iter().zip(t).map(|(w, t)| w * t).sum();
    let sy: f64 = w.iter().zip(y).map(|(w, y)| w * y).sum();
    let tbar = st / sw;
    let ybar = sy / sw;
    let stt: f64 = w.iter().zip(t).map(|(w, t)| w * (t - tbar).powi(2)).sum();
    let sty: f64 = w.iter().zip(t).zip(y).map(|((w, t), y)| w * (t - tbar) * (y - ybar)).sum();
    let slope = if stt > 0.0 { sty / stt } else { 0.0 };
    let intercept = ybar - slope * tbar;
    let residuals: Vec<f64> = t.iter().zip(y).map(|(t, y)| y - intercept - slope * t).collect();
    let (var_c, var_b) = if unweighted {
        // residual-based errors; zero residuals give zero error
        let dof = (t.len() as f64 - 2.0).max(1.0);
        let s2 = residuals.iter().map(|r| r * r).sum::<f64>() / dof;
        (s2 * (1.0 / sw + tbar * tbar / stt), s2 / stt)
    } else {
        (1.0 / sw + tbar * tbar / stt, 1.0 / stt)
    };
    LinearFit {
        intercept,
        slope,
        intercept_stderr: var_c.max(0.0).sqrt(),
        slope_stderr: var_b.max(0.0).sqrt(),
        residuals,
    }
}

/// Ordinary least-squares slope of `y` on `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let xb = x.iter().sum::<f64>() / n;
    let yb = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - xb) * (b - yb)).sum();
    let sxx: f64 = x.iter().map(|a| (a - xb).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_error() {
        let (m, s) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!(count_mean_stderr(&[0, 0, 0]), (0.0, 0.0));
    }

    #[test]
    fn exact_line_is_recovered() {
        let t = [0.1, 0.05, 0.025];
        let y: Vec<f64> = t.iter().map(|t| 0.05 + 0.25 * t).collect();
        let fit = weighted_line_fit(&t, &y, &[0.01, 0.02, 0.03]);
        assert!((fit.intercept - 0.05).abs() < 1e-12);
        assert!((fit.slope - 0.25).abs() < 1e-10);
        let flat = weighted_line_fit(&t, &[0.0; 3], &[0.0; 3]);
        assert_eq!((flat.intercept, flat.intercept_stderr), (0.0, 0.0));
    }
}
