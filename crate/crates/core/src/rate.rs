//! Convergence-rate fits `err ~ C h^p`.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    /// Exponent `p`.
    pub p: f64,
    /// Constant `C`.
    pub c: f64,
}

/// Least-squares line through `(ln h, ln err)`.
pub fn fit_rate(h: &[f64], err: &[f64]) -> Result<RateFit> {
    if h.len() != err.len() {
        return Err(Error::DimensionMismatch { left: h.len(), right: err.len() });
    }
    if h.len() < 2 {
        return Err(Error::param("samples", "need at least two points to fit a rate"));
    }
    if h.iter().chain(err).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::param("samples", "rate fit needs positive finite values"));
    }
    let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = err.iter().map(|v| v.ln()).collect();
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::param("h", "all step sizes are equal"));
    }
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let p = sxy / sxx;
    Ok(RateFit { p, c: (my - p * mx).exp() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_power_law() {
        let h = [0.1, 0.05, 0.025, 0.0125];
        let e: Vec<f64> = h.iter().map(|v: &f64| 3.0 * v.powf(0.5)).collect();
        let f = fit_rate(&h, &e).unwrap();
        assert!((f.p - 0.5).abs() < 1e-12 && (f.c - 3.0).abs() < 1e-11);
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(fit_rate(&[0.1], &[1.0]).is_err());
        assert!(fit_rate(&[0.1, 0.1], &[1.0, 2.0]).is_err());
        assert!(fit_rate(&[0.1, 0.2], &[0.0, 2.0]).is_err());
    }
}
