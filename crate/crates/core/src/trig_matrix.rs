//! Banded trigonometric matrices `N_gamma = sum_k N_{k;gamma_k}`.
//!
//! Band `k` holds the entries `(i, i - k)`: positive `k` lies below the
//! diagonal. Entry `(i, i - k)` is `gamma_k(hbar * p)` with `p = min(i, i - k)`
//! or `max(i, i - k)` depending on the [`OffsetRule`].

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{building_vector, building_vector_scaled, FrameContext};
use crate::sphere::{Basis, CMatrix, SpherePoint, StateVector};

pub type Profile = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum OffsetRule {
    #[default]
    Min,
    Max,
}

#[derive(Clone)]
enum BandData {
    Profile(Profile),
    /// Entry `(i, i - k)` stored at index `i`.
    Table(Vec<Complex64>),
}

#[derive(Clone)]
pub struct BandMatrix {
    n: usize,
    hbar: f64,
    rule: OffsetRule,
    bands: BTreeMap<i64, BandData>,
}

impl fmt::Debug for BandMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BandMatrix")
            .field("n", &self.n)
            .field("hbar", &self.hbar)
            .field("rule", &self.rule)
            .field("bands", &self.bands.keys().collect::<Vec<_>>())
            .finish()
    }
}

pub fn constant(c: Complex64) -> Profile {
    Arc::new(move |_| c)
}

pub fn real_profile<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Profile {
    Arc::new(move |t| Complex64::new(f(t), 0.0))
}

impl BandMatrix {
    pub fn new(n: usize, hbar: f64, rule: OffsetRule) -> Result<Self> {
        if n < 1 {
            return Err(Error::param("N", "empty matrix"));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::param("hbar", format!("{hbar} must be positive")));
        }
        Ok(Self { n, hbar, rule, bands: BTreeMap::new() })
    }

    fn check_band(&self, k: i64) -> Result<()> {
        if k.unsigned_abs() as usize >= self.n {
            return Err(Error::param("k", format!("band {k} needs |k| < N = {}", self.n)));
        }
        Ok(())
    }

    /// Add (or replace) band `k` with profile `gamma_k`.
    pub fn with_band(mut self, k: i64, gamma: Profile) -> Result<Self> {
        self.check_band(k)?;
        self.bands.insert(k, BandData::Profile(gamma));
        Ok(self)
    }

    /// Band `k` from explicit entries, `values[i]` at `(i, i - k)`; indices
    /// without a matrix entry are ignored.
    pub fn with_table(mut self, k: i64, values: Vec<Complex64>) -> Result<Self> {
        self.check_band(k)?;
        if values.len() != self.n {
            return Err(Error::DimensionMismatch { left: values.len(), right: self.n });
        }
        self.bands.insert(k, BandData::Table(values));
        Ok(self)
    }

    /// Every nonzero diagonal of `m` as a tabulated band.
    pub fn from_dense(m: &CMatrix, hbar: f64) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { left: m.nrows(), right: m.ncols() });
        }
        let n = m.nrows();
        let mut out = Self::new(n, hbar, OffsetRule::Min)?;
        for k in -(n as i64 - 1)..=(n as i64 - 1) {
            let vals: Vec<Complex64> = (0..n as i64)
                .map(|i| if (0..n as i64).contains(&(i - k)) { m[(i as usize, (i - k) as usize)] } else { ZERO })
                .collect();
            if vals.iter().any(|v| *v != ZERO) {
                out.bands.insert(k, BandData::Table(vals));
            }
        }
        Ok(out)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn rule(&self) -> OffsetRule {
        self.rule
    }

    pub fn band_indices(&self) -> Vec<i64> {
        self.bands.keys().copied().collect()
    }

    /// Largest `|k|` present (0 for an empty matrix).
    pub fn bandwidth(&self) -> usize {
        self.bands.keys().map(|k| k.unsigned_abs() as usize).max().unwrap_or(0)
    }

    /// Grid offset: entry `(i, i - k)` uses grid point `i - offset(k)`.
    fn offset(&self, k: i64) -> i64 {
        match self.rule {
            OffsetRule::Min => k.max(0),
            OffsetRule::Max => k.min(0),
        }
    }

    fn valid_rows(&self, k: i64) -> (i64, i64) {
        (k.max(0), self.n as i64 - 1 + k.min(0))
    }

    /// `gamma_k(tau)`; tabulated bands interpolate linearly between grid points.
    pub fn profile(&self, k: i64, tau: f64) -> Complex64 {
        match self.bands.get(&k) {
            None => ZERO,
            Some(BandData::Profile(g)) => g(tau),
            Some(BandData::Table(v)) => self.interpolate(k, v, tau / self.hbar + self.offset(k) as f64),
        }
    }

    fn interpolate(&self, k: i64, v: &[Complex64], row: f64) -> Complex64 {
        let (lo, hi) = self.valid_rows(k);
        let r = row.clamp(lo as f64, hi as f64);
        let i0 = r.floor() as i64;
        let frac = r - i0 as f64;
        if frac == 0.0 || i0 >= hi {
            return v[i0 as usize];
        }
        v[i0 as usize] * (1.0 - frac) + v[i0 as usize + 1] * frac
    }

    /// Band `k` as a function of a real row index `s`: the entry `(s, s - k)`
    /// on integers; the grid point is clamped to `0..=N-1`.
    pub fn row_profile(&self, k: i64, s: f64) -> Complex64 {
        match self.bands.get(&k) {
            None => ZERO,
            Some(BandData::Profile(g)) => {
                let p = (s - self.offset(k) as f64).clamp(0.0, (self.n - 1) as f64);
                g(self.hbar * p)
            }
            Some(BandData::Table(v)) => self.interpolate(k, v, s),
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        let k = i as i64 - j as i64;
        match self.bands.get(&k) {
            None => ZERO,
            Some(BandData::Table(v)) => v[i],
            Some(BandData::Profile(g)) => g(self.hbar * (i as i64 - self.offset(k)) as f64),
        }
    }

    pub fn dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.n, self.n);
        for &k in self.bands.keys() {
            let (lo, hi) = self.valid_rows(k);
            for i in lo..=hi {
                m[(i as usize, (i - k) as usize)] = self.entry(i as usize, (i - k) as usize);
            }
        }
        m
    }

    /// Dense product, re-banded with tabulated diagonals.
    pub fn mul(&self, other: &BandMatrix) -> Result<BandMatrix> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { left: self.n, right: other.n });
        }
        BandMatrix::from_dense(&(self.dense() * other.dense()), self.hbar)
    }

    /// `M_1^+`: ones on band `+1` (just below the diagonal), `hbar = 1/N`.
    pub fn m1_plus(n: usize) -> Result<Self> {
        Self::new(n, 1.0 / n as f64, OffsetRule::Min)?.with_band(1, constant(ONE))
    }

    /// `M_1^-`: ones on band `-1`.
    pub fn m1_minus(n: usize) -> Result<Self> {
        Self::new(n, 1.0 / n as f64, OffsetRule::Min)?.with_band(-1, constant(ONE))
    }

    /// `M_1 = M_1^+ + M_1^-`.
    pub fn m1(n: usize) -> Result<Self> {
        Self::m1_plus(n)?.with_band(-1, constant(ONE))
    }

    /// `M_{1,alpha}`: `alpha` on both off-diagonals, evaluated at the larger index.
    pub fn m1_alpha(n: usize, alpha: Profile) -> Result<Self> {
        Self::new(n, 1.0 / n as f64, OffsetRule::Max)?.with_band(1, alpha.clone())?.with_band(-1, alpha)
    }

    /// `M_{2,beta}`: `beta` on bands `+-2`, evaluated at the larger index.
    pub fn m2_beta(n: usize, beta: Profile) -> Result<Self> {
        Self::new(n, 1.0 / n as f64, OffsetRule::Max)?.with_band(2, beta.clone())?.with_band(-2, beta)
    }

    pub fn diagonal(n: usize, gamma0: Profile) -> Result<Self> {
        Self::new(n, 1.0 / n as f64, OffsetRule::Min)?.with_band(0, gamma0)
    }

    /// Hermitian tridiagonal: `d` on the diagonal, `kappa` on band `+1`,
    /// `conj(kappa)` on band `-1`.
    pub fn hermitian_tridiagonal(n: usize, hbar: f64, rule: OffsetRule, d: Profile, kappa: Profile) -> Result<Self> {
        let conj = kappa.clone();
        Self::new(n, hbar, rule)?
            .with_band(0, d)?
            .with_band(1, kappa)?
            .with_band(-1, Arc::new(move |t| conj(t).conj()))
    }
}

/// `A B - B A`.
pub fn matrix_commutator(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if a.shape() != b.shape() || a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch { left: a.nrows(), right: b.nrows() });
    }
    Ok(a * b - b * a)
}

fn check_frame(m: &BandMatrix, ctx: &FrameContext) -> Result<()> {
    if m.n() != ctx.n() {
        return Err(Error::DimensionMismatch { left: m.n(), right: ctx.n() });
    }
    Ok(())
}

/// `M psi_z^a` with `M` read in the `psi` basis; result in `psi` coordinates.
pub fn act_on_frame(m: &BandMatrix, ctx: &FrameContext, z: &SpherePoint) -> Result<StateVector> {
    check_frame(m, ctx)?;
    let d = building_vector(ctx, z)?.to_psi(ctx)?;
    Ok(apply_dense(m, &d))
}

/// As [`act_on_frame`], times `(1 - tau)^((N-1)/2)`; finite at the poles.
pub fn act_on_frame_scaled(m: &BandMatrix, ctx: &FrameContext, z: &SpherePoint) -> Result<StateVector> {
    check_frame(m, ctx)?;
    let d = building_vector_scaled(ctx, z).to_psi(ctx)?;
    Ok(apply_dense(m, &d))
}

fn apply_dense(m: &BandMatrix, v: &StateVector) -> StateVector {
    let n = m.n();
    let mut out = vec![ZERO; n];
    for k in m.band_indices() {
        let (lo, hi) = m.valid_rows(k);
        for i in lo..=hi {
            let j = (i - k) as usize;
            out[i as usize] += m.entry(i as usize, j) * v.coeffs[j];
        }
    }
    StateVector { coeffs: out, basis: Basis::Psi }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::QuantParams;
    use crate::window::default_window;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn m1_is_zero_one_tridiagonal() {
        let m = BandMatrix::m1(5).unwrap().dense();
        for i in 0..5usize {
            for j in 0..5usize {
                let e = if i.abs_diff(j) == 1 { 1.0 } else { 0.0 };
                assert_eq!(m[(i, j)], c(e));
            }
        }
        let a = BandMatrix::m1_alpha(5, constant(ONE)).unwrap().dense();
        assert_eq!(a, m);
    }

    #[test]
    fn toy_products_are_exact() {
        let n = 6;
        let p = BandMatrix::m1_plus(n).unwrap().dense();
        let q = BandMatrix::m1_minus(n).unwrap().dense();
        let mut e0 = CMatrix::identity(n, n);
        e0[(0, 0)] = ZERO;
        assert_eq!(&p * &q, e0);
        let mut en = CMatrix::identity(n, n);
        en[(n - 1, n - 1)] = ZERO;
        assert_eq!(&q * &p, en);
    }

    #[test]
    fn commutator_examples() {
        let p = BandMatrix::m1_plus(5).unwrap().dense();
        let q = BandMatrix::m1_minus(5).unwrap().dense();
        let k = matrix_commutator(&p, &q).unwrap();
        let expect = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(-1.0), ZERO, ZERO, ZERO, c(1.0)]));
        assert_eq!(k, expect);
        assert_eq!(k.trace(), ZERO);
        assert_eq!(matrix_commutator(&p, &p).unwrap(), CMatrix::zeros(5, 5));
        assert!(matrix_commutator(&p, &CMatrix::zeros(4, 4)).is_err());
    }

    #[test]
    fn offset_rules() {
        let g = real_profile(|t| t);
        let min = BandMatrix::new(4, 0.25, OffsetRule::Min).unwrap().with_band(1, g.clone()).unwrap().with_band(-1, g.clone()).unwrap();
        let max = BandMatrix::new(4, 0.25, OffsetRule::Max).unwrap().with_band(1, g.clone()).unwrap().with_band(-1, g).unwrap();
        assert_eq!(min.entry(2, 1), c(0.25));
        assert_eq!(min.entry(1, 2), c(0.25));
        assert_eq!(max.entry(2, 1), c(0.5));
        assert_eq!(max.entry(1, 2), c(0.5));
        assert!(BandMatrix::new(4, 0.25, OffsetRule::Min).unwrap().with_band(4, constant(ONE)).is_err());
    }

    #[test]
    fn hermitian_profiles_give_hermitian_matrix() {
        let m = BandMatrix::hermitian_tridiagonal(
            7,
            0.3,
            OffsetRule::Max,
            real_profile(|t| t.cos()),
            Arc::new(|t: f64| Complex64::from_polar(1.0 + t, t)),
        )
        .unwrap()
        .dense();
        assert!((&m - m.adjoint()).norm() < 1e-14);
    }

    #[test]
    fn from_dense_round_trips() {
        let m = BandMatrix::m2_beta(6, real_profile(|t| 1.0 + t)).unwrap();
        let d = m.dense();
        let t = BandMatrix::from_dense(&d, m.hbar()).unwrap();
        assert_eq!(t.dense(), d);
        assert_eq!(t.band_indices(), vec![-2, 2]);
        assert_eq!(t.row_profile(2, 3.0), d[(3, 1)]);
    }

    #[test]
    fn frame_action_of_simple_matrices() {
        let p = QuantParams::frame(10).unwrap();
        let ctx = FrameContext::new(&p, default_window(&p)).unwrap();
        let z = SpherePoint::new(0.43, 0.8).unwrap();
        let d = building_vector(&ctx, &z).unwrap().to_psi(&ctx).unwrap();
        let id = BandMatrix::diagonal(10, constant(ONE)).unwrap();
        assert_eq!(act_on_frame(&id, &ctx, &z).unwrap(), d);
        let tau = BandMatrix::diagonal(10, real_profile(|t| t)).unwrap();
        let out = act_on_frame(&tau, &ctx, &z).unwrap();
        for k in 0..10 {
            assert!((out.coeffs[k] - d.coeffs[k] * (k as f64 / 10.0)).norm() < 1e-15);
        }
    }
}
