//! The quantized sphere: `H_N`, coherent states, standard Toeplitz
//! quantization and the Husimi symbol.
//!
//! Inner products are antilinear in the first slot, `<f, g> = sum conj(f_n) g_n`
//! in the orthonormal basis `phi_n(z) = sqrt(N!/(n!(N-1-n)!)) z^n`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::QuadratureRule;

pub type CMatrix = DMatrix<Complex64>;

/// Which of the two semiclassical parameters a computation uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Convention {
    /// `hbar = 1/N`: grid points `n hbar` fill `[0, 1)` and `tau/hbar` spans the
    /// window support `[0, N]`.
    Frame,
    /// `hbar = pi/N`.
    Tqft,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantParams {
    n: usize,
    hbar: f64,
    convention: Convention,
    ln_norm: Arc<[f64]>,
}

impl QuantParams {
    pub fn new(n: usize, convention: Convention) -> Result<Self> {
        if n < 2 {
            return Err(Error::param("N", format!("need N >= 2, got {n}")));
        }
        let hbar = match convention {
            Convention::Frame => 1.0 / n as f64,
            Convention::Tqft => PI / n as f64,
        };
        // ln sqrt(N binom(N-1, k)), built by the ratio recurrence
        let mut ln_norm = Vec::with_capacity(n);
        let mut lb = 0.0f64;
        for k in 0..n {
            if k > 0 {
                lb += ((n - k) as f64).ln() - (k as f64).ln();
            }
            ln_norm.push(0.5 * ((n as f64).ln() + lb));
        }
        Ok(Self { n, hbar, convention, ln_norm: ln_norm.into() })
    }

    pub fn frame(n: usize) -> Result<Self> {
        Self::new(n, Convention::Frame)
    }

    pub fn tqft(n: usize) -> Result<Self> {
        Self::new(n, Convention::Tqft)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    /// `ln sqrt(N!/(k!(N-1-k)!))`.
    pub fn ln_basis_norm(&self, k: usize) -> f64 {
        self.ln_norm[k]
    }

    pub(crate) fn check_index(&self, k: i64) -> Result<usize> {
        if k < 0 || k as usize >= self.n {
            return Err(Error::OutOfRange { index: k, len: self.n });
        }
        Ok(k as usize)
    }
}

/// A point of the sphere in `(tau, theta)` coordinates, `z = sqrt(tau/(1-tau)) e^{i theta}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint {
    tau: f64,
    theta: f64,
}

impl SpherePoint {
    pub fn new(tau: f64, theta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::param("tau", format!("{tau} not in [0, 1]")));
        }
        if !theta.is_finite() {
            return Err(Error::param("theta", "not finite"));
        }
        Ok(Self { tau, theta: theta.rem_euclid(2.0 * PI) })
    }

    pub(crate) fn new_unchecked(tau: f64, theta: f64) -> Self {
        Self { tau, theta }
    }

    /// Point with coordinate `z` (finite, so never the north pole).
    pub fn from_z(z: Complex64) -> Self {
        let w = z.norm_sqr();
        Self { tau: w / (1.0 + w), theta: z.arg().rem_euclid(2.0 * PI) }
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn is_south_pole(&self) -> bool {
        self.tau == 0.0
    }

    pub fn is_north_pole(&self) -> bool {
        self.tau == 1.0
    }

    /// `|z|`, infinite at the north pole.
    pub fn modulus(&self) -> f64 {
        (self.tau / (1.0 - self.tau)).sqrt()
    }

    /// `z`, or `None` at the north pole.
    pub fn z(&self) -> Option<Complex64> {
        if self.is_north_pole() {
            None
        } else {
            Some(Complex64::from_polar(self.modulus(), self.theta))
        }
    }

    /// Same parallel, angle shifted by `dtheta`.
    pub fn rotated(&self, dtheta: f64) -> Self {
        Self { tau: self.tau, theta: (self.theta + dtheta).rem_euclid(2.0 * PI) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    Phi,
    Psi,
}

/// Element of `H_N` as coefficients in the `phi_n` or `psi_n` basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub coeffs: Vec<Complex64>,
    pub basis: Basis,
}

impl StateVector {
    pub fn new(coeffs: Vec<Complex64>, basis: Basis) -> Result<Self> {
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::param("coeffs", "non-finite entry"));
        }
        Ok(Self { coeffs, basis })
    }

    pub fn basis_vector(n_dim: usize, k: usize, basis: Basis) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n_dim];
        coeffs[k] = Complex64::new(1.0, 0.0);
        Self { coeffs, basis }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Coefficient-space inner product; both vectors must share a basis.
    pub fn dot(&self, other: &Self) -> Result<Complex64> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch("dot of PHI and PSI coefficients"));
        }
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch { left: self.len(), right: other.len() });
        }
        Ok(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.conj() * b).sum())
    }
}

/// `phi_n(z)`. At the north pole every `n >= 1` is infinite and reported as
/// [`Error::Pole`]; values too large for `f64` give [`Error::Overflow`].
pub fn eval_basis(params: &QuantParams, n: i64, z: &SpherePoint) -> Result<Complex64> {
    let n = params.check_index(n)?;
    if n == 0 {
        return Ok(Complex64::new(params.ln_basis_norm(0).exp(), 0.0));
    }
    if z.is_south_pole() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if z.is_north_pole() {
        return Err(Error::Pole { tau: 1.0, what: "basis function" });
    }
    let ln_abs = params.ln_basis_norm(n) + 0.5 * n as f64 * (z.tau.ln() - (-z.tau).ln_1p());
    if ln_abs > 709.0 {
        return Err(Error::Overflow { tau: z.tau, what: "basis function" });
    }
    Ok(Complex64::from_polar(ln_abs.exp(), n as f64 * z.theta))
}

/// Amplitudes `|phi_n(z)| (1-tau)^((N-1)/2)` for all `n`; finite on the
/// whole sphere including both poles.
pub fn scaled_amplitudes(params: &QuantParams, tau: f64) -> Vec<f64> {
    let n = params.n();
    let mut out = vec![0.0; n];
    if tau <= 0.0 {
        out[0] = params.ln_basis_norm(0).exp();
        return out;
    }
    if tau >= 1.0 {
        out[n - 1] = params.ln_basis_norm(n - 1).exp();
        return out;
    }
    let lt = tau.ln();
    let l1 = (-tau).ln_1p();
    for (k, o) in out.iter_mut().enumerate() {
        let e = params.ln_basis_norm(k) + 0.5 * k as f64 * lt + 0.5 * (n - 1 - k) as f64 * l1;
        *o = e.exp();
    }
    out
}

/// `phi_n(z) (1-tau)^((N-1)/2)` for all `n`.
pub fn scaled_basis(params: &QuantParams, z: &SpherePoint) -> Vec<Complex64> {
    scaled_amplitudes(params, z.tau)
        .into_iter()
        .enumerate()
        .map(|(k, a)| Complex64::from_polar(a, k as f64 * z.theta))
        .collect()
}

/// Coherent state `rho_{z0}` in the `phi` basis: coefficient `n` is `conj(phi_n(z0))`.
pub fn coherent_state(params: &QuantParams, z0: &SpherePoint) -> Result<StateVector> {
    if z0.is_north_pole() {
        return Err(Error::Pole { tau: 1.0, what: "coherent state" });
    }
    let coeffs = (0..params.n() as i64)
        .map(|k| eval_basis(params, k, z0).map(|v| v.conj()))
        .collect::<Result<Vec<_>>>()?;
    StateVector::new(coeffs, Basis::Phi)
}

/// `rho_{z0} (1-tau0)^((N-1)/2)`, defined everywhere (at the north pole it is
/// `sqrt(N) phi_{N-1}` up to phase).
pub fn coherent_state_scaled(params: &QuantParams, z0: &SpherePoint) -> StateVector {
    let coeffs = scaled_basis(params, z0).into_iter().map(|c| c.conj()).collect();
    StateVector { coeffs, basis: Basis::Phi }
}

/// Evaluate the polynomial with `phi`-coefficients `f` at `z`.
pub fn eval_state(params: &QuantParams, f: &StateVector, z: &SpherePoint) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, c) in f.coeffs.iter().enumerate() {
        if *c != Complex64::new(0.0, 0.0) {
            acc += c * eval_basis(params, k as i64, z)?;
        }
    }
    Ok(acc)
}

/// Numerical rule for `dmu_N`; see [`QuadratureRule::sphere`].
pub fn sphere_quadrature(params: &QuantParams, n_tau: usize, n_theta: usize) -> Result<QuadratureRule> {
    QuadratureRule::sphere(params, n_tau, n_theta)
}

/// Matrix of `T^N[f] = int f |rho_z><rho_z| dmu_N` in the `phi` basis,
/// `T_mn = int f conj(phi_m) phi_n dmu_N`.
///
/// The theta sums go through an FFT per tau node; the accumulation over tau
/// nodes runs in node order for every entry, so results do not depend on the
/// number of threads.
pub fn toeplitz_quantize<F>(params: &QuantParams, f: F, rule: &QuadratureRule) -> Result<CMatrix>
where
    F: Fn(&SpherePoint) -> Complex64 + Sync,
{
    let n = params.n();
    if rule.dim() != n {
        return Err(Error::DimensionMismatch { left: rule.dim(), right: n });
    }
    let n_theta = rule.n_theta();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n_theta);
    let taus = rule.taus();

    // per tau node: amplitudes and angular coefficients G_k, k = -(N-1)..=N-1
    let per_node: Vec<(Vec<f64>, Vec<Complex64>)> = taus
        .par_iter()
        .map(|&tau| {
            let mut buf: Vec<Complex64> = (0..n_theta)
                .map(|j| f(&SpherePoint::new_unchecked(tau, rule.theta(j))))
                .collect();
            fft.process(&mut buf);
            let g = (-(n as i64 - 1)..=(n as i64 - 1))
                .map(|k| buf[(-k).rem_euclid(n_theta as i64) as usize] / n_theta as f64)
                .collect();
            (scaled_amplitudes(params, tau), g)
        })
        .collect();

    for (i, (_, g)) in per_node.iter().enumerate() {
        if g.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite { tau: taus[i], theta: f64::NAN });
        }
    }

    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|m| {
            let mut row = vec![Complex64::new(0.0, 0.0); n];
            for (i, (amp, g)) in per_node.iter().enumerate() {
                let w = rule.tau_weights()[i] * amp[m];
                if w == 0.0 {
                    continue;
                }
                for (col, r) in row.iter_mut().enumerate() {
                    // k = n - m, offset by N-1 into g
                    *r += g[col + n - 1 - m] * (w * amp[col]);
                }
            }
            row
        })
        .collect();
    Ok(CMatrix::from_fn(n, n, |r, c| rows[r][c]))
}

/// Husimi symbol `<rho_z|T|rho_z> / <rho_z|rho_z>`. Uses the scaled coherent
/// state, so the north pole gives the limit `T_{N-1,N-1}`.
pub fn husimi(params: &QuantParams, t: &CMatrix, z: &SpherePoint) -> Result<Complex64> {
    let n = params.n();
    if t.nrows() != n || t.ncols() != n {
        return Err(Error::DimensionMismatch { left: t.nrows(), right: n });
    }
    let rho = coherent_state_scaled(params, z);
    let norm2: f64 = rho.coeffs.iter().map(|c| c.norm_sqr()).sum();
    if norm2 == 0.0 {
        return Err(Error::param("z", "zero-norm coherent state"));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for r in 0..n {
        let mut row = Complex64::new(0.0, 0.0);
        for c in 0..n {
            row += t[(r, c)] * rho.coeffs[c];
        }
        acc += rho.coeffs[r].conj() * row;
    }
    Ok(acc / norm2)
}
