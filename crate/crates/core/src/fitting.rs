//! Least-squares line fitting used for convergence-order estimates.

use serde::Serialize;

use crate::error::{Error, Result};

/// A fitted power law `error = constant * eps^slope`.
#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    /// The fitted order.
    pub slope: f64,
    /// `e^intercept` of the log-log fit.
    pub constant: f64,
    /// Root-mean-square deviation of the fit in log space.
    pub residual: f64,
}

/// Fit `error = C * eps^p` through `(eps, error)` points by least squares
/// on logarithmic axes. Requires at least three points with positive
/// coordinates and distinct eps.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 3 {
        return Err(Error::DegenerateFit { needed: 3, got: points.len() });
    }
    let mut logs = Vec::with_capacity(points.len());
    for &(eps, err) in points {
        if !(eps > 0.0 && err > 0.0 && eps.is_finite() && err.is_finite()) {
            return Err(Error::DegenerateFit { needed: 3, got: logs.len() });
        }
        logs.push((eps.ln(), err.ln()));
    }
    let (slope, intercept) = fit_line(&logs)?;
    let ss: f64 = logs
        .iter()
        .map(|&(x, y)| {
            let d = y - (slope * x + intercept);
            d * d
        })
        .sum();
    Ok(FitResult {
        slope,
        constant: intercept.exp(),
        residual: (ss / logs.len() as f64).sqrt(),
    })
}

/// Slope of the least-squares line through `(x, y)` points.
///
/// Panics-free convenience for test code; use [`fit_line`] when the
/// intercept or input validation matters.
pub fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    fit_line(points).map(|(m, _)| m).unwrap_or(f64::NAN)
}

/// Least-squares fit `y = m x + b`; returns `(m, b)`.
///
/// Requires at least two points with distinct abscissae.
pub fn fit_line(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    let n = points.len();
    if n < 2 {
        return Err(Error::DegenerateFit { needed: 2, got: n });
    }
    let nf = n as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let mx = sx / nf;
    let my = sy / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, y) in points {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx <= 0.0 {
        return Err(Error::DegenerateFit { needed: 2, got: 1 });
    }
    let m = sxy / sxx;
    Ok((m, my - m * mx))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let pts: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 3.0 * i as f64 - 1.0)).collect();
        let (m, b) = fit_line(&pts).unwrap();
        assert!((m - 3.0).abs() < 1e-12);
        assert!((b + 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(fit_line(&[(1.0, 2.0)]).is_err());
        assert!(fit_line(&[(1.0, 2.0), (1.0, 3.0)]).is_err());
    }

    #[test]
    fn exact_power_laws() {
        let pts: Vec<(f64, f64)> =
            [0.1f64, 0.05, 0.025].iter().map(|&e| (e, 7.0 * e.powi(4))).collect();
        let fit = fit_power_law(&pts).unwrap();
        assert!((fit.slope - 4.0).abs() < 1e-10);
        assert!((fit.constant - 7.0).abs() < 1e-10);
        assert!(fit.residual < 1e-12);

        let pts: Vec<(f64, f64)> =
            [0.1f64, 0.05, 0.035, 0.025].iter().map(|&e| (e, e.powf(5.5))).collect();
        let fit = fit_power_law(&pts).unwrap();
        assert!((fit.slope - 5.5).abs() < 1e-12);
    }

    #[test]
    fn power_law_needs_three_points() {
        assert!(fit_power_law(&[(0.1, 1.0), (0.05, 0.5)]).is_err());
        assert!(fit_power_law(&[(0.1, 1.0), (0.05, 0.5), (0.025, 0.0)]).is_err());
    }
}
