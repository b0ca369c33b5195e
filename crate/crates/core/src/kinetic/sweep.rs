/// Distances over an ε sweep with the least-squares slope of
/// `log distance` against `log ε`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SweepResult {
    pub s: usize,
    pub n: usize,
    pub eps: Vec<f64>,
    pub distances: Vec<f64>,
    pub fitted_order: f64,
    /// Root mean square of the fit residuals in log space.
    pub residual: f64,
    pub r_squared: f64,
}

/// Least-squares line through `(ln x, ln y)`: slope, RMS residual and R².
///
/// Non-positive values make the fit undefined and yield NaN.
pub fn log_log_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let m = x.len().min(y.len());
    if m < 2 || x.iter().chain(y).take(2 * m).any(|v| v.is_nan() || *v <= 0.0) {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let lx: Vec<f64> = x[..m].iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y[..m].iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / m as f64;
    let my = ly.iter().sum::<f64>() / m as f64;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = ly.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let sse: f64 = lx.iter().zip(&ly).map(|(a, b)| (b - my - slope * (a - mx)).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    (slope, (sse / m as f64).sqrt(), r2)
}

pub fn fit_order(s: usize, n: usize, eps: &[f64], distances: Vec<f64>) -> SweepResult {
    let (fitted_order, residual, r_squared) = log_log_fit(eps, &distances);
    SweepResult { s, n, eps: eps.to_vec(), distances, fitted_order, residual, r_squared }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let x = [0.5, 0.25, 0.125, 0.0625];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(1.5)).collect();
        let (slope, res, r2) = log_log_fit(&x, &y);
        assert!((slope - 1.5).abs() < 1e-12);
        assert!(res < 1e-12);
        assert!((r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_distance_is_undefined() {
        assert!(log_log_fit(&[1.0, 0.5], &[0.0, 0.0]).0.is_nan());
    }
}
