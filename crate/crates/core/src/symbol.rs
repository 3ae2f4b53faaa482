//! Operator-valued symbols acting on windows in the Fourier variable.
//!
//! A component `(k, c, m)` acts at a point `z` with `t = tau(z)/hbar` as
//!
//! ```text
//! out(xi) = c(z) * m(t - xi) * a~(xi + k)
//! ```
//!
//! i.e. `m(t - i d_x)` composed with the shift `e^{ikx}`. Sampled at
//! `xi = t - n` this reads `out_n = c m(n) a~_{n-k}`, so a symbol at fixed `z`
//! is a banded operator on the sample grid with row index `n`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::frame::FrameContext;
use crate::sphere::{CMatrix, QuantParams, SpherePoint};
use crate::trig_matrix::BandMatrix;
use crate::window::{Window, WindowFn};

pub type Prefactor = Arc<dyn Fn(&SpherePoint) -> Result<Complex64> + Send + Sync>;
pub type Multiplier = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Smooth step `u^2 (3 - 2u)` on `[0, 1]`.
pub fn smoothstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * (3.0 - 2.0 * u)
}

/// `chi_[a,b]`: 0 below `a`, rising on `(a, a+1/2)`, 1 on `[a+1/2, b-1/2]`,
/// falling on `(b-1/2, b)`, 0 above `b`.
#[derive(Debug, Clone, Copy)]
pub struct CutoffProfile {
    pub a: f64,
    pub b: f64,
    pub shape: fn(f64) -> f64,
}

impl CutoffProfile {
    pub fn new(a: f64, b: f64) -> Self {
        Self { a, b, shape: smoothstep }
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.a || x >= self.b {
            0.0
        } else if x < self.a + 0.5 {
            (self.shape)(2.0 * (x - self.a))
        } else if x > self.b - 0.5 {
            (self.shape)(2.0 * (self.b - x))
        } else {
            1.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    Mu,
    Nu,
}

/// `chi_[1/2, N-1/2](s) sqrt(s/(N-s))`.
pub fn mu(s: f64, n: usize) -> f64 {
    let nf = n as f64;
    let chi = CutoffProfile::new(0.5, nf - 0.5).eval(s);
    if chi == 0.0 {
        return 0.0;
    }
    chi * (s / (nf - s)).sqrt()
}

/// `chi_[-1/2, N-3/2](s) sqrt((N-s-1)/(s+1))`.
pub fn nu(s: f64, n: usize) -> f64 {
    let nf = n as f64;
    let chi = CutoffProfile::new(-0.5, nf - 1.5).eval(s);
    if chi == 0.0 {
        return 0.0;
    }
    chi * ((nf - s - 1.0) / (s + 1.0)).sqrt()
}

/// `mu_k(s) = prod_{j<k} mu(s - j)`, `nu_k(s) = prod_{j<k} nu(s + j)`.
pub fn ladder_weight(kind: Ladder, k: usize, s: f64, n: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::param("k", "ladder order must be at least 1"));
    }
    if n < 2 {
        return Err(Error::param("N", "need N >= 2"));
    }
    let mut w = 1.0;
    for j in 0..k {
        w *= match kind {
            Ladder::Mu => mu(s - j as f64, n),
            Ladder::Nu => nu(s + j as f64, n),
        };
        if w == 0.0 {
            break;
        }
    }
    Ok(w)
}

/// Weight attached to band `k`: `mu_k`, `nu_|k|` or 1.
pub fn band_weight(k: i64, s: f64, n: usize) -> f64 {
    match k {
        0 => 1.0,
        k if k > 0 => ladder_weight(Ladder::Mu, k as usize, s, n).unwrap_or(0.0),
        k => ladder_weight(Ladder::Nu, k.unsigned_abs() as usize, s, n).unwrap_or(0.0),
    }
}

/// `conj(z)^(-k)`, singular at the south pole for `k > 0` and at the north
/// pole for `k < 0`.
pub fn conj_z_power(k: i64) -> Prefactor {
    Arc::new(move |z: &SpherePoint| {
        if k == 0 {
            return Ok(ONE);
        }
        if k > 0 && z.is_south_pole() {
            return Err(Error::Pole { tau: 0.0, what: "prefactor conj(z)^-k" });
        }
        if k < 0 && z.is_north_pole() {
            return Err(Error::Pole { tau: 1.0, what: "prefactor conj(z)^-k" });
        }
        let ln_r = 0.5 * (z.tau().ln() - (-z.tau()).ln_1p());
        Ok(Complex64::from_polar((-(k as f64) * ln_r).exp(), k as f64 * z.theta()))
    })
}

#[derive(Clone)]
pub struct Component {
    pub shift: i64,
    pub prefactor: Prefactor,
    pub multiplier: Multiplier,
}

/// `z -> Sigma(z)`, a finite sum of components.
#[derive(Clone)]
pub struct OperatorSymbol {
    params: QuantParams,
    components: Vec<Component>,
}

impl fmt::Debug for OperatorSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OperatorSymbol")
            .field("n", &self.params.n())
            .field("shifts", &self.components.iter().map(|c| c.shift).collect::<Vec<_>>())
            .finish()
    }
}

impl OperatorSymbol {
    pub fn new(params: &QuantParams, components: Vec<Component>) -> Self {
        Self { params: params.clone(), components }
    }

    pub fn identity(params: &QuantParams) -> Self {
        Self::new(
            params,
            vec![Component { shift: 0, prefactor: Arc::new(|_| Ok(ONE)), multiplier: Arc::new(|_| ONE) }],
        )
    }

    pub fn params(&self) -> &QuantParams {
        &self.params
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    /// Largest `|k|`.
    pub fn bandwidth(&self) -> usize {
        self.components.iter().map(|c| c.shift.unsigned_abs() as usize).max().unwrap_or(0)
    }

    /// `c Sigma`.
    pub fn scaled(&self, c: Complex64) -> Self {
        let components = self
            .components
            .iter()
            .map(|comp| {
                let m = comp.multiplier.clone();
                Component { shift: comp.shift, prefactor: comp.prefactor.clone(), multiplier: Arc::new(move |s| c * m(s)) }
            })
            .collect();
        Self::new(&self.params, components)
    }

    /// `Sigma + Sigma'`.
    pub fn sum(&self, other: &Self) -> Self {
        let mut components = self.components.clone();
        components.extend(other.components.iter().cloned());
        Self::new(&self.params, components)
    }

    /// Freeze the prefactors at `z`.
    pub fn at(&self, z: &SpherePoint) -> Result<SymbolAt> {
        let mut terms = Vec::with_capacity(self.components.len());
        for comp in &self.components {
            terms.push((comp.shift, (comp.prefactor)(z)?, comp.multiplier.clone()));
        }
        Ok(SymbolAt { n: self.params.n(), t: z.tau() / self.params.hbar(), terms })
    }
}

/// A symbol at a fixed point: `sum_k c_k m_k(t - xi) e^{ikx}`.
#[derive(Clone)]
pub struct SymbolAt {
    n: usize,
    t: f64,
    terms: Vec<(i64, Complex64, Multiplier)>,
}

impl SymbolAt {
    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, Complex64, &Multiplier)> {
        self.terms.iter().map(|(k, c, m)| (*k, *c, m))
    }

    /// Output at `xi` for input `a`.
    pub fn eval(&self, a: &Window, xi: f64) -> Complex64 {
        let s = self.t - xi;
        let mut acc = ZERO;
        for (k, c, m) in &self.terms {
            let input = a.ft(xi + *k as f64);
            if input == ZERO || *c == ZERO {
                continue;
            }
            acc += c * m(s) * input;
        }
        acc
    }

    /// The transformed window; its support grows by the largest shifts.
    pub fn apply(&self, a: &Window) -> Window {
        let kmax = self.terms.iter().map(|t| t.0).max().unwrap_or(0) as f64;
        let kmin = self.terms.iter().map(|t| t.0).min().unwrap_or(0) as f64;
        let (lo, hi) = a.support();
        let (elo, ehi) = a.effective_support();
        let this = self.clone();
        let base = a.clone();
        let ft: WindowFn = Arc::new(move |xi| this.eval(&base, xi));
        Window::from_fn(self.n, (lo - kmax, hi - kmin), format!("sigma({})", a.label()), ft)
            .expect("support stays ordered")
            .with_effective_support(elo - kmax, ehi - kmin)
    }

    /// Sample-grid matrix `G[n][n-k] += c_k m_k(n)` on rows and columns `0..N`.
    pub fn grid_matrix(&self) -> CMatrix {
        let n = self.n as i64;
        let mut g = CMatrix::zeros(self.n, self.n);
        for (k, c, m) in &self.terms {
            for row in 0.max(*k)..n.min(n + k) {
                g[(row as usize, (row - k) as usize)] += c * m(row as f64);
            }
        }
        g
    }
}

/// `Sigma(z)` applied to `a`.
pub fn apply_symbol(s: &OperatorSymbol, z: &SpherePoint, a: &Window) -> Result<Window> {
    Ok(s.at(z)?.apply(a))
}

/// `sigma[N_gamma]`: band `k` becomes `(k, conj(z)^-k, s -> gamma_k-row(s) w_k(s))`
/// with `w_k = mu_k` for `k > 0` and `nu_|k|` for `k < 0`.
pub fn symbol_of_matrix(m: &BandMatrix, params: &QuantParams) -> Result<OperatorSymbol> {
    if m.n() != params.n() {
        return Err(Error::DimensionMismatch { left: m.n(), right: params.n() });
    }
    let n = params.n();
    let components = m
        .band_indices()
        .into_iter()
        .map(|k| {
            let mm = m.clone();
            let mult: Multiplier = Arc::new(move |s| {
                let w = band_weight(k, s, n);
                if w == 0.0 {
                    ZERO
                } else {
                    mm.row_profile(k, s) * w
                }
            });
            Component { shift: k, prefactor: conj_z_power(k), multiplier: mult }
        })
        .collect();
    Ok(OperatorSymbol::new(params, components))
}

/// `Sigma_1^+ = sigma[M_1^+]` and `Sigma_1^- = sigma[M_1^-]`.
pub fn sigma1_plus(params: &QuantParams) -> OperatorSymbol {
    let n = params.n();
    OperatorSymbol::new(
        params,
        vec![Component { shift: 1, prefactor: conj_z_power(1), multiplier: Arc::new(move |s| Complex64::new(mu(s, n), 0.0)) }],
    )
}

pub fn sigma1_minus(params: &QuantParams) -> OperatorSymbol {
    let n = params.n();
    OperatorSymbol::new(
        params,
        vec![Component { shift: -1, prefactor: conj_z_power(-1), multiplier: Arc::new(move |s| Complex64::new(nu(s, n), 0.0)) }],
    )
}

/// `S1 S2`: `(k1, c1, m1)(k2, c2, m2) = (k1 + k2, c1 c2, s -> m1(s) m2(s - k1))`.
pub fn compose_symbols(s1: &OperatorSymbol, s2: &OperatorSymbol) -> Result<OperatorSymbol> {
    if s1.params.n() != s2.params.n() || s1.params.hbar() != s2.params.hbar() {
        return Err(Error::param("symbols", "composition needs matching parameters"));
    }
    let mut components = Vec::with_capacity(s1.components.len() * s2.components.len());
    for a in &s1.components {
        for b in &s2.components {
            let (k1, pa, pb, ma, mb) = (a.shift, a.prefactor.clone(), b.prefactor.clone(), a.multiplier.clone(), b.multiplier.clone());
            components.push(Component {
                shift: a.shift + b.shift,
                prefactor: Arc::new(move |z| Ok(pa(z)? * pb(z)?)),
                multiplier: Arc::new(move |s| {
                    let x = ma(s);
                    if x == ZERO {
                        ZERO
                    } else {
                        x * mb(s - k1 as f64)
                    }
                }),
            });
        }
    }
    Ok(OperatorSymbol::new(&s1.params, components))
}

/// `R_j(s) = sqrt(C(s + j)/C(s))` with `C` clamped to `[0, N-1]`.
pub fn c_ratio(ctx: &FrameContext, j: i64, s: f64) -> f64 {
    (ctx.cn_extended(s + j as f64) / ctx.cn_extended(s)).sqrt()
}

/// Closed form of `sigma * C`: component `k` picks up `sqrt(C(s)/C(s-k))`.
pub fn star_c(s: &OperatorSymbol, ctx: &FrameContext) -> Result<OperatorSymbol> {
    if s.params.n() != ctx.n() {
        return Err(Error::DimensionMismatch { left: s.params.n(), right: ctx.n() });
    }
    let components = s
        .components
        .iter()
        .map(|comp| {
            let (k, m, c) = (comp.shift, comp.multiplier.clone(), ctx.clone());
            let mult: Multiplier = Arc::new(move |s| {
                let x = m(s);
                if x == ZERO || k == 0 {
                    return x;
                }
                x * c_ratio(&c, k, s - k as f64)
            });
            Component { shift: k, prefactor: comp.prefactor.clone(), multiplier: mult }
        })
        .collect();
    Ok(OperatorSymbol::new(&s.params, components))
}

/// `(sigma * C)(z) a` by the angular average
/// `(1/M) sum_j sigma(z e^{-i theta_j}) C(|z| e^{i theta_j})`, where
/// `C(w) = sum_{|l| <= K} e^{i l theta(w)} R_l(t - D)` and `M` uniform nodes.
pub fn c_factor_quadrature(s: &OperatorSymbol, z: &SpherePoint, a: &Window, ctx: &FrameContext, m_nodes: usize) -> Result<Window> {
    let kmax = s.bandwidth() as i64;
    if m_nodes < 2 * kmax as usize + 1 {
        return Err(Error::GridTooSmall(format!("{m_nodes} angular nodes for bandwidth {kmax}")));
    }
    let t = z.tau() / s.params.hbar();
    let mut frozen = Vec::with_capacity(m_nodes);
    for j in 0..m_nodes {
        let th = 2.0 * PI * j as f64 / m_nodes as f64;
        frozen.push((th, s.at(&z.rotated(-th))?));
    }
    let (lo, hi) = a.support();
    let (elo, ehi) = a.effective_support();
    let (base, c) = (a.clone(), ctx.clone());
    let ft: WindowFn = Arc::new(move |xi| {
        let mut acc = ZERO;
        for (th, sym) in &frozen {
            for (k, ck, m) in sym.terms() {
                let input = base.ft(xi + k as f64);
                if input == ZERO || ck == ZERO {
                    continue;
                }
                let row = t - xi;
                let mk = m(row);
                if mk == ZERO {
                    continue;
                }
                // C acts first, at row index row - k
                let mut cfac = ZERO;
                for l in -kmax..=kmax {
                    cfac += Complex64::from_polar(c_ratio(&c, l, row - k as f64), l as f64 * th);
                }
                acc += ck * mk * cfac * input;
            }
        }
        acc / m_nodes as f64
    });
    Ok(Window::from_fn(ctx.n(), (lo - kmax as f64, hi + kmax as f64), format!("sigma*C({})", a.label()), ft)?
        .with_effective_support(elo - kmax as f64, ehi + kmax as f64))
}

/// `(sigma * C)(z) a` in closed form, cross-checked against the angular
/// quadrature on the sample grid `xi = t - n` (relative tolerance `1e-8`).
pub fn c_factor_convolve(s: &OperatorSymbol, z: &SpherePoint, a: &Window, ctx: &FrameContext) -> Result<Window> {
    let closed = star_c(s, ctx)?.at(z)?.apply(a);
    let m_nodes = 4 * s.bandwidth() + 1;
    let quad = c_factor_quadrature(s, z, a, ctx, m_nodes)?;
    let t = z.tau() / s.params.hbar();
    let (mut dev, mut scale) = (0.0f64, 0.0f64);
    for n in 0..ctx.n() {
        let xi = t - n as f64;
        let c = closed.ft(xi);
        dev = dev.max((c - quad.ft(xi)).norm());
        scale = scale.max(c.norm());
    }
    if dev > 1e-8 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Inconsistent { what: "sigma * C closed form vs angular quadrature", deviation: dev / scale });
    }
    Ok(closed)
}

/// `s_N(tau, theta) = sum_k e^{ik theta} gamma_k(tau)`.
pub fn naive_symbol(m: &BandMatrix) -> impl Fn(f64, f64) -> Complex64 + Send + Sync {
    let m = m.clone();
    move |tau, theta| {
        m.band_indices()
            .into_iter()
            .map(|k| Complex64::from_polar(1.0, k as f64 * theta) * m.profile(k, tau))
            .sum()
    }
}

/// Classical action at `z`: `xi -> sum_k gamma_k(tau') e^{ik theta} a~(xi + k)`
/// with `tau' = tau(z) * scale` (the matrix's own grid variable).
pub fn classical_window(m: &BandMatrix, z: &SpherePoint, scale: f64, a: &Window) -> Window {
    let coeffs: Vec<(i64, Complex64)> = m
        .band_indices()
        .into_iter()
        .map(|k| (k, Complex64::from_polar(1.0, k as f64 * z.theta()) * m.profile(k, z.tau() * scale)))
        .collect();
    let kmax = coeffs.iter().map(|c| c.0).max().unwrap_or(0) as f64;
    let kmin = coeffs.iter().map(|c| c.0).min().unwrap_or(0) as f64;
    let (lo, hi) = a.support();
    let (elo, ehi) = a.effective_support();
    let base = a.clone();
    let ft: WindowFn = Arc::new(move |xi| coeffs.iter().map(|(k, c)| c * base.ft(xi + *k as f64)).sum());
    Window::from_fn(a.n(), (lo - kmax, hi - kmin), format!("classical({})", a.label()), ft)
        .expect("support stays ordered")
        .with_effective_support(elo - kmax, ehi - kmin)
}
