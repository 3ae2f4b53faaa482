//! Windows: the density `a` through its Fourier transform `a~`, band limited.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use statrs::function::erf::erf;

use crate::error::{Error, Result};
use crate::quadrature::integrate_panels;
use crate::sphere::{QuantParams, SpherePoint};

pub type WindowFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// Default Gaussian parameters in the Fourier variable.
pub const DEFAULT_CENTER: f64 = 0.5;
pub const DEFAULT_WIDTH: f64 = 0.2;

/// `a~` with compact support `[lo, hi]`; evaluation outside returns 0 without
/// calling the underlying function.
#[derive(Clone)]
pub struct Window {
    n: usize,
    ft: WindowFn,
    support: (f64, f64),
    effective: (f64, f64),
    label: String,
}

impl fmt::Debug for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Window")
            .field("n", &self.n)
            .field("support", &self.support)
            .field("effective", &self.effective)
            .field("label", &self.label)
            .finish()
    }
}

impl Window {
    /// Window from an arbitrary transform, supported on `support`.
    pub fn from_fn(n: usize, support: (f64, f64), label: impl Into<String>, ft: WindowFn) -> Result<Self> {
        if !(support.0 <= support.1) {
            return Err(Error::param("support", "empty interval"));
        }
        Ok(Self { n, ft, support, effective: support, label: label.into() })
    }

    /// Narrow the interval outside of which `a~` is known to vanish in
    /// floating point (used to skip empty quadrature panels).
    pub fn with_effective_support(mut self, lo: f64, hi: f64) -> Self {
        self.effective = (lo.max(self.support.0), hi.min(self.support.1));
        self
    }

    pub fn effective_support(&self) -> (f64, f64) {
        self.effective
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn ft(&self, xi: f64) -> Complex64 {
        if xi < self.support.0 || xi > self.support.1 || xi.is_nan() {
            Complex64::new(0.0, 0.0)
        } else {
            (self.ft)(xi)
        }
    }

    /// `||a~||_{L^2}`, by panelled Gauss-Legendre over the support
    /// (unit-length panels, 48 nodes each).
    pub fn l2_norm(&self) -> f64 {
        let (lo, hi) = self.support;
        let panels = ((hi - lo).ceil() as usize).max(1);
        let breaks: Vec<f64> = (0..=panels).map(|j| lo + (hi - lo) * j as f64 / panels as f64).collect();
        integrate_panels(&breaks, 48, |x| self.ft(x).norm_sqr()).sqrt()
    }
}

/// `a~(xi) = c exp(-(xi - center)^2 / (2 width^2))` on `[0, N]`, zero
/// outside, `c` chosen so that `||a~||_{L^2[0,N]} = 1`.
pub fn make_gaussian_window(params: &QuantParams, center: f64, width: f64) -> Result<Window> {
    let n = params.n() as f64;
    if !(center > 0.0 && center < n) {
        return Err(Error::param("center", format!("{center} not in (0, {n})")));
    }
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::param("width", format!("{width} must be positive")));
    }
    // int_0^N exp(-(x-c)^2/w^2) dx
    let mass = 0.5 * width * PI.sqrt() * (erf((n - center) / width) + erf(center / width));
    let c = mass.sqrt().recip();
    let s = 2.0 * width * width;
    let ft: WindowFn = Arc::new(move |xi: f64| {
        let d = xi - center;
        Complex64::new(c * (-d * d / s).exp(), 0.0)
    });
    // beyond 40 widths even a~ itself underflows to 0
    Ok(Window::from_fn(params.n(), (0.0, n), format!("gaussian:{center},{width}"), ft)?
        .with_effective_support(center - 40.0 * width, center + 40.0 * width))
}

/// Gaussian with center 0.5 and width 0.2, independent of `N`.
pub fn default_window(params: &QuantParams) -> Window {
    make_gaussian_window(params, DEFAULT_CENTER, DEFAULT_WIDTH).expect("default window parameters are valid")
}

/// `a~(tau(z)/hbar - n)` for `n = 0..N-1`.
pub fn window_samples(a: &Window, z: &SpherePoint, params: &QuantParams) -> Vec<Complex64> {
    let s = z.tau() / params.hbar();
    (0..params.n()).map(|k| a.ft(s - k as f64)).collect()
}

/// `||u~ - v~||_{L^2}` over the union of effective supports (unit panels,
/// 24 Gauss-Legendre nodes each, aligned with integer jump points).
pub fn l2_distance(u: &Window, v: &Window) -> f64 {
    let lo = u.effective_support().0.min(v.effective_support().0).floor();
    let hi = u.effective_support().1.max(v.effective_support().1).ceil();
    let breaks: Vec<f64> = (0..=((hi - lo) as usize)).map(|j| lo + j as f64).collect();
    integrate_panels(&breaks, 24, |x| (u.ft(x) - v.ft(x)).norm_sqr()).sqrt()
}

/// Command-line window description, `gaussian:center,width`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WindowSpec {
    Gaussian { center: f64, width: f64 },
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec::Gaussian { center: DEFAULT_CENTER, width: DEFAULT_WIDTH }
    }
}

impl WindowSpec {
    pub fn build(&self, params: &QuantParams) -> Result<Window> {
        match *self {
            WindowSpec::Gaussian { center, width } => make_gaussian_window(params, center, width),
        }
    }
}

impl FromStr for WindowSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::param("window", format!("expected gaussian:center,width, got `{s}`"));
        let rest = s.strip_prefix("gaussian:").ok_or_else(bad)?;
        let (c, w) = rest.split_once(',').ok_or_else(bad)?;
        let center = c.trim().parse::<f64>().map_err(|_| bad())?;
        let width = w.trim().parse::<f64>().map_err(|_| bad())?;
        Ok(WindowSpec::Gaussian { center, width })
    }
}
