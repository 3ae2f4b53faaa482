//! Curve operators of the once-punctured torus and their trace functions.
//!
//! With level `r` (default `N + a` for color `a`), `hbar = pi/r`,
//! `alpha = a hbar` and
//!
//! ```text
//! u(x) = -( sin(hbar(x+a)) sin(hbar x) / (sin(hbar(x+(a+1)/2)) sin(hbar(x+(a-1)/2))) )^(1/2)
//! ```
//!
//! `T^gamma` is diagonal `-2cos(hbar(n+(a+1)/2))`, `T^delta` has `u_max(i,j)`
//! on both off-diagonals, and `T^zeta` carries the phases
//! `(n+1, n) -> u_{n+1} e^{i hbar(n+1/2)}`, `(n-1, n) -> u_n e^{-i hbar(n-1/2)}`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rate::{fit_rate, RateFit};
use crate::sphere::{QuantParams, SpherePoint};
use crate::symbol::symbol_of_matrix;
use crate::trig_matrix::{BandMatrix, OffsetRule};
use crate::window::{default_window, l2_distance, Window};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Curve {
    Gamma,
    Delta,
    Zeta,
}

impl FromStr for Curve {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gamma" => Ok(Curve::Gamma),
            "delta" => Ok(Curve::Delta),
            "zeta" => Ok(Curve::Zeta),
            _ => Err(Error::param("curve", format!("expected gamma, delta or zeta, got `{s}`"))),
        }
    }
}

impl fmt::Display for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Curve::Gamma => "gamma",
            Curve::Delta => "delta",
            Curve::Zeta => "zeta",
        })
    }
}

/// `prod sin(num) / prod sin(den)` after cancelling equal arguments.
pub fn sine_ratio(num: &[f64], den: &[f64]) -> Result<f64> {
    let mut den: Vec<Option<f64>> = den.iter().copied().map(Some).collect();
    let mut value = 1.0;
    for &x in num {
        let hit = den.iter_mut().find(|d| matches!(d, Some(y) if (x - *y).abs() <= 8.0 * f64::EPSILON * (1.0 + x.abs())));
        match hit {
            Some(slot) => *slot = None,
            None => value *= x.sin(),
        }
    }
    for y in den.into_iter().flatten() {
        let s = y.sin();
        if s.abs() < 1e-300 {
            return Err(Error::ZeroDenominator { what: format!("sin({y})") });
        }
        value /= s;
    }
    Ok(value)
}

fn neg_sqrt(ratio: f64, what: &str) -> Result<f64> {
    if ratio < -1e-14 {
        return Err(Error::param("color", format!("negative radicand {ratio:e} in {what}")));
    }
    Ok(-ratio.max(0.0).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub curve: Curve,
    pub n: usize,
    pub color: u32,
    pub level: f64,
}

impl CurveSpec {
    /// Level `N + color`: the smallest for which every `u_n`, `1 <= n <= N-1`,
    /// is finite, real and nonzero.
    pub fn new(curve: Curve, n: usize, color: u32) -> Result<Self> {
        Self::with_level(curve, n, color, (n + color as usize) as f64)
    }

    pub fn with_level(curve: Curve, n: usize, color: u32, level: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::param("N", format!("need N >= 2, got {n}")));
        }
        if color % 2 == 0 {
            return Err(Error::param("color", format!("must be odd and positive, got {color}")));
        }
        if !(level > 0.0 && level.is_finite()) {
            return Err(Error::param("level", format!("{level} must be positive")));
        }
        let spec = Self { curve, n, color, level };
        for m in 0..n {
            spec.u(m as f64)?;
        }
        Ok(spec)
    }

    pub fn hbar(&self) -> f64 {
        PI / self.level
    }

    pub fn alpha(&self) -> f64 {
        self.hbar() * self.color as f64
    }

    /// `u(x)` with equal sine arguments cancelled symbolically (the
    /// offsets `a, 0` against `(a+1)/2, (a-1)/2` coincide exactly for `a = 1`).
    pub fn u(&self, x: f64) -> Result<f64> {
        let a = self.color as f64;
        let h = self.hbar();
        let num = [a, 0.0];
        let den = [(a + 1.0) / 2.0, (a - 1.0) / 2.0];
        let mut value = 1.0;
        let mut used = [false; 2];
        for off in num {
            match den.iter().enumerate().position(|(i, d)| !used[i] && *d == off) {
                Some(i) => used[i] = true,
                None => value *= (h * (x + off)).sin(),
            }
        }
        for (i, off) in den.iter().enumerate() {
            if used[i] {
                continue;
            }
            let s = (h * (x + off)).sin();
            if s == 0.0 || (h * (x + off)) % PI == 0.0 {
                return Err(Error::ZeroDenominator { what: format!("u({x}): sin(hbar ({x} + {off}))") });
            }
            value /= s;
        }
        neg_sqrt(value, "u_n")
    }
}

/// The curve operator as a band matrix on the TQFT grid `t = n hbar`.
pub fn curve_operator(spec: &CurveSpec) -> Result<BandMatrix> {
    let h = spec.hbar();
    let a = spec.color as f64;
    let s = *spec;
    let u = move |t: f64| s.u(t / h).unwrap_or(f64::NAN);
    match spec.curve {
        Curve::Gamma => BandMatrix::new(spec.n, h, OffsetRule::Min)?
            .with_band(0, Arc::new(move |t: f64| Complex64::new(-2.0 * (t + h * (a + 1.0) / 2.0).cos(), 0.0))),
        Curve::Delta => {
            let g: crate::trig_matrix::Profile = Arc::new(move |t: f64| Complex64::new(u(t), 0.0));
            BandMatrix::new(spec.n, h, OffsetRule::Max)?.with_band(1, g.clone())?.with_band(-1, g)
        }
        Curve::Zeta => BandMatrix::new(spec.n, h, OffsetRule::Max)?
            .with_band(1, Arc::new(move |t: f64| Complex64::from_polar(u(t), t - h / 2.0)))?
            .with_band(-1, Arc::new(move |t: f64| Complex64::from_polar(u(t), -(t - h / 2.0)))),
    }
}

/// Bands `(k, f_k(tau))` of the naive symbol at semiclassical parameter
/// `hbar` (0 for the trace function), for a given `alpha`.
pub fn trace_bands(curve: Curve, alpha: f64, tau: f64, hbar: f64) -> Result<Vec<(i64, Complex64)>> {
    let h = hbar;
    match curve {
        Curve::Gamma => Ok(vec![(0, Complex64::new(-2.0 * (tau + (alpha + h) / 2.0).cos(), 0.0))]),
        Curve::Delta | Curve::Zeta => {
            let up = neg_sqrt(
                sine_ratio(&[tau + alpha + h, tau + h], &[tau + (alpha + h) / 2.0, tau + (alpha + 3.0 * h) / 2.0])?,
                "delta symbol",
            )?;
            let down = neg_sqrt(
                sine_ratio(&[tau + alpha, tau], &[tau + (alpha + h) / 2.0, tau + (alpha - h) / 2.0])?,
                "delta symbol",
            )?;
            if curve == Curve::Delta {
                Ok(vec![(1, Complex64::new(up, 0.0)), (-1, Complex64::new(down, 0.0))])
            } else {
                let ph = Complex64::from_polar(1.0, h / 2.0);
                Ok(vec![
                    (1, ph * Complex64::from_polar(up, tau)),
                    (-1, ph * Complex64::from_polar(down, -tau)),
                ])
            }
        }
    }
}

/// Naive symbol `sum_k e^{ik theta} f_k(tau)` at `hbar_eval`; at
/// `hbar_eval = 0` this is the trace function.
pub fn trace_symbol(spec: &CurveSpec, tau: f64, theta: f64, hbar_eval: f64) -> Result<Complex64> {
    trace_symbol_alpha(spec.curve, spec.alpha(), tau, theta, hbar_eval)
}

pub fn trace_symbol_alpha(curve: Curve, alpha: f64, tau: f64, theta: f64, hbar: f64) -> Result<Complex64> {
    Ok(trace_bands(curve, alpha, tau, hbar)?
        .into_iter()
        .map(|(k, f)| f * Complex64::from_polar(1.0, k as f64 * theta))
        .sum())
}

/// `c` in `sigma_delta(tau, theta, 0) ~ -c sqrt(tau) cos(theta)` as `tau -> 0`.
pub fn delta_pole_constant(alpha: f64) -> f64 {
    2.0 * alpha.sin().sqrt() / (alpha / 2.0).sin()
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceErrorRow {
    pub n: usize,
    pub hbar: f64,
    pub err: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceErrorReport {
    pub curve: Curve,
    pub color: u32,
    pub tau_window: (f64, f64),
    pub rows: Vec<TraceErrorRow>,
    pub fit: RateFit,
}

/// Parallels and angles of the comparison grid inside `[lo, hi]`.
pub const TRACE_GRID_TAUS: usize = 9;
pub const TRACE_GRID_THETAS: usize = 4;

/// Error of the operator symbol against the trace function at one `N`:
/// max over the grid of `||sigma[T](z) a - f(z) a|| / ||a||`, where the
/// classical side is `xi -> sum_k f_k(t) e^{ik theta} a~(xi + k)` with TQFT
/// angle `t = tau(z) N hbar_T` (the grid index `N tau` read on the TQFT grid).
pub fn symbol_trace_error_at(spec: &CurveSpec, tau_window: (f64, f64)) -> Result<f64> {
    let (lo, hi) = tau_window;
    if !(0.0 < lo && lo < hi && hi < 1.0) {
        return Err(Error::param("window", format!("[{lo}, {hi}] must lie strictly inside (0, 1)")));
    }
    let params = QuantParams::frame(spec.n)?;
    let a = default_window(&params);
    let t_op = curve_operator(spec)?;
    let sym = symbol_of_matrix(&t_op, &params)?;
    let norm_a = a.l2_norm();
    let ht = spec.hbar();
    let mut points = Vec::new();
    for i in 0..TRACE_GRID_TAUS {
        let tau = lo + (hi - lo) * i as f64 / (TRACE_GRID_TAUS - 1) as f64;
        for j in 0..TRACE_GRID_THETAS {
            points.push(SpherePoint::new(tau, 2.0 * PI * (j as f64 + 0.25) / TRACE_GRID_THETAS as f64)?);
        }
    }
    let errs: Vec<Result<f64>> = points
        .par_iter()
        .map(|z| {
            let quantum = sym.at(z)?.apply(&a);
            let t = z.tau() * spec.n as f64 * ht;
            let bands: Vec<(i64, Complex64)> = trace_bands(spec.curve, spec.alpha(), t, 0.0)?
                .into_iter()
                .map(|(k, f)| (k, f * Complex64::from_polar(1.0, k as f64 * z.theta())))
                .collect();
            let base = a.clone();
            let kmax = bands.iter().map(|b| b.0.abs()).max().unwrap_or(0) as f64;
            let (elo, ehi) = a.effective_support();
            let classical = Window::from_fn(
                spec.n,
                (a.support().0 - kmax, a.support().1 + kmax),
                "classical",
                Arc::new(move |xi| bands.iter().map(|(k, f)| f * base.ft(xi + *k as f64)).sum()),
            )?
            .with_effective_support(elo - kmax, ehi + kmax);
            Ok(l2_distance(&quantum, &classical) / norm_a)
        })
        .collect();
    let mut worst = 0.0f64;
    for e in errs {
        worst = worst.max(e?);
    }
    Ok(worst)
}

/// `symbol_trace_error_at` over increasing `N`, with the fitted exponent of
/// `err ~ C hbar^p` (`hbar = pi/level`).
pub fn symbol_trace_error(curve: Curve, color: u32, ns: &[usize], tau_window: (f64, f64)) -> Result<TraceErrorReport> {
    if ns.len() < 2 {
        return Err(Error::param("Ns", "need at least two dimensions"));
    }
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let spec = CurveSpec::new(curve, n, color)?;
        rows.push(TraceErrorRow { n, hbar: spec.hbar(), err: symbol_trace_error_at(&spec, tau_window)? });
    }
    let h: Vec<f64> = rows.iter().map(|r| r.hbar).collect();
    let e: Vec<f64> = rows.iter().map(|r| r.err).collect();
    let fit = fit_rate(&h, &e)?;
    Ok(TraceErrorReport { curve, color, tau_window, rows, fit })
}
