//! Gauss-Legendre rules and tensor-product quadratures for `dmu_N`.
//!
//! In polar coordinates `dmu_N = (1/2pi) (1 - tau)^(N-1) dtau dtheta`. The
//! rules here store a *reduced* tau weight (plain `dtau` weight) so that
//! callers can fold `(1 - tau)^(N-1)` into scaled basis values instead of
//! multiplying huge and tiny numbers; see [`crate::sphere::scaled_basis`].

use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sphere::{QuantParams, SpherePoint};

/// Gauss-Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "gauss_legendre needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d.is_finite() {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[n - 1 - i] = z;
        x[i] = -z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|t| half * t).collect(),
    )
}

/// Composite Gauss-Legendre integral of `f` over consecutive panels given by
/// `breaks` (ascending), `per_panel` nodes each.
pub fn integrate_panels<F: FnMut(f64) -> f64>(breaks: &[f64], per_panel: usize, mut f: F) -> f64 {
    let (x, w) = gauss_legendre(per_panel);
    let mut total = 0.0;
    for pair in breaks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b <= a {
            continue;
        }
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut s = 0.0;
        for (t, wt) in x.iter().zip(&w) {
            s += wt * f(mid + half * t);
        }
        total += half * s;
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RuleKind {
    /// One Gauss-Legendre rule on the whole tau interval.
    Legendre,
    /// Composite rule with breakpoints at `tau = j/N`.
    Panels { per_panel: usize },
}

/// Tensor-product rule for `dmu_N`: tau nodes times a uniform theta grid.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    n: usize,
    taus: Vec<f64>,
    tau_weights: Vec<f64>,
    n_theta: usize,
    kind: RuleKind,
}

#[derive(Debug, Clone, Copy)]
pub struct Node {
    pub point: SpherePoint,
    pub weight: f64,
}

#[derive(Serialize)]
struct CsvRow {
    tau: f64,
    theta: f64,
    weight: f64,
}

fn check_theta(params: &QuantParams, n_theta: usize) -> Result<()> {
    let need = 2 * params.n() + 1;
    if n_theta < need {
        return Err(Error::GridTooSmall(format!("n_theta = {n_theta} < 2N+1 = {need}")));
    }
    Ok(())
}

impl QuadratureRule {
    /// Gauss-Legendre in tau (exact for `tau^j (1-tau)^(N-1-j)` products up to
    /// degree `2 n_tau - 1`) and a uniform theta grid.
    pub fn sphere(params: &QuantParams, n_tau: usize, n_theta: usize) -> Result<Self> {
        if n_tau < params.n() {
            return Err(Error::GridTooSmall(format!("n_tau = {n_tau} < N = {}", params.n())));
        }
        check_theta(params, n_theta)?;
        let (taus, tau_weights) = gauss_legendre_on(n_tau, 0.0, 1.0);
        Ok(Self { n: params.n(), taus, tau_weights, n_theta, kind: RuleKind::Legendre })
    }

    /// Composite rule with panels `[j/N, (j+1)/N]`, aligned with the support
    /// edges of every window sample `a~(N tau - n)`.
    pub fn frame(params: &QuantParams, per_panel: usize, n_theta: usize) -> Result<Self> {
        if per_panel == 0 {
            return Err(Error::GridTooSmall("per_panel = 0".into()));
        }
        check_theta(params, n_theta)?;
        let n = params.n();
        let (x, w) = gauss_legendre_on(per_panel, 0.0, 1.0 / n as f64);
        let mut taus = Vec::with_capacity(n * per_panel);
        let mut tau_weights = Vec::with_capacity(n * per_panel);
        for j in 0..n {
            let off = j as f64 / n as f64;
            for (t, wt) in x.iter().zip(&w) {
                taus.push(off + t);
                tau_weights.push(*wt);
            }
        }
        Ok(Self { n, taus, tau_weights, n_theta, kind: RuleKind::Panels { per_panel } })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    /// Exactness metadata `(n_tau, n_theta)`.
    pub fn exactness(&self) -> (usize, usize) {
        (self.taus.len(), self.n_theta)
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    /// Plain `dtau` weights (without `(1-tau)^(N-1)` or `1/2pi`).
    pub fn tau_weights(&self) -> &[f64] {
        &self.tau_weights
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn theta(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n_theta as f64
    }

    /// Weight to pair with *scaled* basis values, i.e. the `dmu_N` weight of
    /// node `(i, j)` divided by `(1 - tau_i)^(N-1)`.
    pub fn scaled_weight(&self, i: usize) -> f64 {
        self.tau_weights[i] / self.n_theta as f64
    }

    /// True `dmu_N` weight of node `(i, j)` (independent of `j`).
    pub fn weight(&self, i: usize) -> f64 {
        let t = self.taus[i];
        self.scaled_weight(i) * (1.0 - t).powi(self.n as i32 - 1)
    }

    pub fn len(&self) -> usize {
        self.taus.len() * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn nodes(&self) -> impl Iterator<Item = Node> + '_ {
        (0..self.taus.len()).flat_map(move |i| {
            (0..self.n_theta).map(move |j| Node {
                point: SpherePoint::new_unchecked(self.taus[i], self.theta(j)),
                weight: self.weight(i),
            })
        })
    }

    pub fn total_weight(&self) -> f64 {
        (0..self.taus.len()).map(|i| self.weight(i) * self.n_theta as f64).sum()
    }

    /// CSV with header `tau,theta,weight`, one row per node.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for node in self.nodes() {
            wr.serialize(CsvRow { tau: node.point.tau(), theta: node.point.theta(), weight: node.weight })?;
        }
        wr.flush()?;
        Ok(())
    }
}
