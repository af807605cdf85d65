//! Least-squares line fits.

use crate::error::{Error, Result};

/// Ordinary least-squares line `y ≈ slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Root-mean-square residual.
    pub rms_residual: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "line fit needs ≥ 2 paired points, got {} x and {} y",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if !(sxx > 0.0) {
        return Err(Error::InvalidArgument("line fit needs at least two distinct abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    if !(slope.is_finite() && intercept.is_finite()) {
        return Err(Error::NonFinite("line fit produced a non-finite coefficient".into()));
    }
    Ok(LineFit {
        slope,
        intercept,
        r_squared,
        rms_residual: (sse / n).sqrt(),
    })
}

/// Least-squares line through `(ln ε, ln value)`.
pub fn loglog_fit(pairs: &[(f64, f64)]) -> Result<LineFit> {
    if pairs.len() < 3 {
        return Err(Error::InvalidArgument(format!("log-log fit needs ≥ 3 pairs, got {}", pairs.len())));
    }
    for &(eps, v) in pairs {
        if !(eps > 0.0) {
            return Err(Error::InvalidArgument(format!("nonpositive ε = {eps}")));
        }
        if !(v > 0.0) {
            return Err(Error::InvalidArgument(format!("nonpositive value {v} at ε = {eps}")));
        }
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    linear_fit(&xs, &ys)
}
