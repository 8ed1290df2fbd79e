//! Least squares fits for the decay and scaling experiments.
//!
//! [`fit_exponential_decay`] treats per-point standard errors as known and
//! propagates them into the slope error without rescaling; that is the
//! right model when the inputs are Monte Carlo means with their own error
//! bars. [`fit_power_law`] has no error bars to lean on, so its slope error
//! uses the residual variance.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::Error;
use crate::Result;

/// Weighted line fit of `y = intercept - slope * x`.
#[derive(Debug, Clone, PartialEq)]
pub struct LineFit {
    /// Decay rate: positive when `y` falls with `x`.
    pub slope: f64,
    pub slope_std_error: f64,
    pub intercept: f64,
    pub intercept_std_error: f64,
    /// Weighted residual sum of squares (chi squared).
    pub rss: f64,
    pub points: usize,
}

fn line_fit(xs: &[f64], ys: &[f64], weights: &[f64]) -> Result<(f64, f64, f64, f64, f64)> {
    let mut s = 0.0;
    let mut sx = 0.0;
    let mut sy = 0.0;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for ((&x, &y), &w) in xs.iter().zip(ys).zip(weights) {
        s += w;
        sx += w * x;
        sy += w * y;
        sxx += w * x * x;
        sxy += w * x * y;
    }
    let delta = s * sxx - sx * sx;
    if !(delta.is_finite() && delta > 0.0) || delta <= 1e-12 * s * sxx {
        return Err(Error::DegenerateFit("no spread in the abscissa".into()));
    }
    let b = (s * sxy - sx * sy) / delta;
    let a = (sxx * sy - sx * sxy) / delta;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .zip(weights)
        .map(|((&x, &y), &w)| {
            let r = y - a - b * x;
            w * r * r
        })
        .sum();
    let var_b = s / delta;
    let var_a = sxx / delta;
    Ok((a, b, var_a, var_b, rss))
}

/// Fits `mean_log_norm = intercept - slope * n` by weighted least squares.
///
/// `points` holds `(n, mean_log_norm, std_error)` triples; weights are
/// `1 / std_error^2`. Needs at least 3 distinct abscissas and strictly
/// positive errors.
pub fn fit_exponential_decay(points: &[(f64, f64, f64)]) -> Result<LineFit> {
    if points.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    let mut distinct: Vec<f64> = points.iter().map(|p| p.0).collect();
    distinct.sort_by(|a, b| a.partial_cmp(b).expect("finite abscissa"));
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "need at least 3 distinct abscissas, got {}",
            distinct.len()
        )));
    }
    for &(x, y, se) in points {
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::DegenerateFit("non-finite point".into()));
        }
        if !(se.is_finite() && se > 0.0) {
            return Err(Error::DegenerateFit(format!(
                "standard errors must be positive and finite, got {se}"
            )));
        }
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let ws: Vec<f64> = points.iter().map(|p| 1.0 / (p.2 * p.2)).collect();
    let (a, b, var_a, var_b, rss) = line_fit(&xs, &ys, &ws)?;
    Ok(LineFit {
        slope: -b,
        slope_std_error: var_b.sqrt(),
        intercept: a,
        intercept_std_error: var_a.sqrt(),
        rss,
        points: points.len(),
    })
}

/// Power law fit `rate = prefactor * width^(-alpha)` on log-log axes.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub alpha: f64,
    pub alpha_std_error: f64,
    pub prefactor: f64,
    /// Residual sum of squares in log-log coordinates.
    pub rss: f64,
    pub points: usize,
}

/// Fits `log rate = log prefactor - alpha * log width` by unweighted least
/// squares over at least 3 distinct widths; rates must be positive.
pub fn fit_power_law(widths: &[f64], rates: &[f64]) -> Result<ScalingFit> {
    if widths.len() != rates.len() {
        return Err(Error::InvalidDimension(format!(
            "{} widths vs {} rates",
            widths.len(),
            rates.len()
        )));
    }
    if widths.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "need at least 3 widths, got {}",
            widths.len()
        )));
    }
    let mut distinct = widths.to_vec();
    distinct.sort_by(|a, b| a.partial_cmp(b).expect("finite widths"));
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "need at least 3 distinct widths, got {}",
            distinct.len()
        )));
    }
    for (&w, &r) in widths.iter().zip(rates) {
        if !(w.is_finite() && w > 0.0 && r.is_finite() && r > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "power law needs positive widths and rates, got ({w}, {r})"
            )));
        }
    }
    let xs: Vec<f64> = widths.iter().map(|w| w.ln()).collect();
    let ys: Vec<f64> = rates.iter().map(|r| r.ln()).collect();
    let ws: Vec<f64> = widths.iter().map(|_| 1.0).collect();
    let (a, b, _, var_b_unit, rss) = line_fit(&xs, &ys, &ws)?;
    // Unweighted fit: scale the slope variance by the residual variance.
    let dof = (widths.len() - 2) as f64;
    let sigma_sq = if dof > 0.0 { rss / dof } else { 0.0 };
    Ok(ScalingFit {
        alpha: -b,
        alpha_std_error: (var_b_unit * sigma_sq).sqrt(),
        prefactor: a.exp(),
        rss,
        points: widths.len(),
    })
}
