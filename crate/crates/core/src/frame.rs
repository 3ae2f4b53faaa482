//! Building vectors `psi_z^a`, frame coefficients `C_n`, the renormalized
//! basis `psi_n = sqrt(C_n) phi_n` and the inner product `<.,.>_a`.
//!
//! Frame computations use `hbar = 1/N`, so `tau/hbar = N tau` and the window
//! sample for row `n` is `a~(N tau - n)`.

use std::sync::Arc;

use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre_on, QuadratureRule};
use crate::sphere::{scaled_amplitudes, Basis, CMatrix, QuantParams, SpherePoint, StateVector};
use crate::window::Window;

/// Gauss-Legendre nodes per unit panel `[j/N, (j+1)/N]` for frame integrals.
pub const FRAME_PANEL_NODES: usize = 40;

struct Inner {
    params: QuantParams,
    window: Window,
    cn: Vec<f64>,
    dn: Vec<f64>,
    rule: QuadratureRule,
    unit_rule: (Vec<f64>, Vec<f64>),
}

/// Immutable frame data for one window; cheap to clone.
#[derive(Clone)]
pub struct FrameContext(Arc<Inner>);

impl std::fmt::Debug for FrameContext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FrameContext")
            .field("n", &self.0.params.n())
            .field("window", &self.0.window)
            .finish()
    }
}

impl FrameContext {
    pub fn new(params: &QuantParams, window: Window) -> Result<Self> {
        if window.n() != params.n() {
            return Err(Error::DimensionMismatch { left: window.n(), right: params.n() });
        }
        let n = params.n();
        let rule = QuadratureRule::frame(params, FRAME_PANEL_NODES, 4 * n)?;
        let unit_rule = gauss_legendre_on(FRAME_PANEL_NODES, 0.0, 1.0);
        let mut ctx = Inner { params: params.clone(), window, cn: Vec::new(), dn: Vec::new(), rule, unit_rule };
        let cn = (0..n).map(|k| beta_integral(&ctx, k as f64)).collect::<Result<Vec<_>>>()?;
        ctx.dn = cn.iter().map(|c| c.sqrt().recip()).collect();
        ctx.cn = cn;
        Ok(Self(Arc::new(ctx)))
    }

    pub fn params(&self) -> &QuantParams {
        &self.0.params
    }

    pub fn window(&self) -> &Window {
        &self.0.window
    }

    pub fn n(&self) -> usize {
        self.0.params.n()
    }

    /// `C_n` for `n = 0..N-1`.
    pub fn cn(&self) -> &[f64] {
        &self.0.cn
    }

    /// `D_n = C_n^{-1/2}`.
    pub fn dn(&self) -> &[f64] {
        &self.0.dn
    }

    /// Composite rule with panels at the window support edges.
    pub fn rule(&self) -> &QuadratureRule {
        &self.0.rule
    }

    /// `C` at a real argument, clamped to `[0, N-1]`; integers (up to rounding
    /// noise) hit the table.
    pub fn cn_extended(&self, xi: f64) -> f64 {
        let top = (self.n() - 1) as f64;
        let x = xi.clamp(0.0, top);
        // grid arguments reached through xi = t - n, s = t - xi carry rounding
        let r = x.round();
        if (x - r).abs() <= 1e-11 * top.max(1.0) {
            return self.0.cn[r as usize];
        }
        // positivity holds wherever the window overlaps the Beta mass; fall
        // back to the nearest table entry if the integral underflows
        beta_integral(&self.0, x).unwrap_or_else(|_| self.0.cn[x.round() as usize])
    }
}

/// `N Gamma(N)/(Gamma(x+1) Gamma(N-x)) int |a~(N tau - x)|^2 tau^x (1-tau)^(N-1-x) dtau`.
fn beta_integral(ctx: &Inner, x: f64) -> Result<f64> {
    let n = ctx.params.n();
    let nf = n as f64;
    let ln_pref = if x.fract() == 0.0 {
        2.0 * ctx.params.ln_basis_norm(x as usize)
    } else {
        nf.ln() + ln_gamma(nf) - ln_gamma(x + 1.0) - ln_gamma(nf - x)
    };
    let p = nf - 1.0 - x;
    let (lo, hi) = ctx.window.effective_support();
    let a = &ctx.window;
    let log_weight = |tau: f64| ln_pref + x * tau.ln() + p * (-tau).ln_1p();
    let (ux, uw) = &ctx.unit_rule;
    let mut total = 0.0;
    // panels [x + j, x + j + 1]/N in tau, i.e. unit panels in the window variable
    let mut j = lo.max(0.0).floor();
    while j < hi && (x + j) / nf < 1.0 {
        let t0 = (x + j) / nf;
        let t1 = ((x + j + 1.0) / nf).min(1.0);
        let last = t1 >= 1.0;
        let mut s = 0.0;
        for (u, w) in ux.iter().zip(uw) {
            let (tau, jac) = if last && p.fract() != 0.0 {
                // tau = 1 - v^2 smooths (1 - tau)^p at the endpoint
                let v0 = (1.0 - t0).sqrt();
                let v = v0 * u;
                (1.0 - v * v, 2.0 * v * v0)
            } else {
                (t0 + (t1 - t0) * u, t1 - t0)
            };
            if tau <= 0.0 || tau >= 1.0 {
                continue;
            }
            let amp = a.ft(nf * tau - x).norm_sqr();
            if amp == 0.0 {
                continue;
            }
            s += w * jac * amp * log_weight(tau).exp();
        }
        total += s;
        j += 1.0;
    }
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::Underflow { xi: x });
    }
    Ok(total)
}

/// `C_xi` for real `0 <= xi <= N-1` (Gamma-continued binomial prefactor).
pub fn cn_coefficient(ctx: &FrameContext, xi: f64) -> Result<f64> {
    let top = (ctx.n() - 1) as f64;
    if !(0.0..=top).contains(&xi) {
        return Err(Error::param("xi", format!("{xi} not in [0, {top}]")));
    }
    if xi.fract() == 0.0 {
        return Ok(ctx.cn()[xi as usize]);
    }
    beta_integral(&ctx.0, xi)
}

/// Coefficients of `psi_z^w` times `(1 - tau)^((N-1)/2)` in the `phi` basis:
/// `w~(N tau - n) conj(phi_n(z)) (1-tau)^((N-1)/2)`. Finite on the whole sphere.
pub fn building_vector_scaled_with(params: &QuantParams, w: &Window, z: &SpherePoint) -> Vec<Complex64> {
    let s = z.tau() / params.hbar();
    scaled_amplitudes(params, z.tau())
        .into_iter()
        .enumerate()
        .map(|(k, amp)| {
            if amp == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            w.ft(s - k as f64) * Complex64::from_polar(amp, -(k as f64) * z.theta())
        })
        .collect()
}

/// `psi_z^w = sum_n w~(tau/hbar - n) conj(phi_n(z)) phi_n` for an arbitrary
/// window `w` (e.g. one transformed by a symbol).
pub fn building_vector_with(params: &QuantParams, w: &Window, z: &SpherePoint) -> Result<StateVector> {
    let s = z.tau() / params.hbar();
    let mut coeffs = Vec::with_capacity(params.n());
    for k in 0..params.n() {
        let wk = w.ft(s - k as f64);
        if wk == Complex64::new(0.0, 0.0) {
            coeffs.push(wk);
            continue;
        }
        coeffs.push(wk * crate::sphere::eval_basis(params, k as i64, z)?.conj());
    }
    StateVector::new(coeffs, Basis::Phi)
}

/// `psi_z^a` in the `phi` basis.
pub fn building_vector(ctx: &FrameContext, z: &SpherePoint) -> Result<StateVector> {
    building_vector_with(ctx.params(), ctx.window(), z)
}

/// `psi_z^a (1 - tau)^((N-1)/2)` in the `phi` basis.
pub fn building_vector_scaled(ctx: &FrameContext, z: &SpherePoint) -> StateVector {
    StateVector { coeffs: building_vector_scaled_with(ctx.params(), ctx.window(), z), basis: Basis::Phi }
}

impl StateVector {
    /// Coefficients relative to `psi_n = sqrt(C_n) phi_n`.
    pub fn to_psi(&self, ctx: &FrameContext) -> Result<StateVector> {
        self.check_len(ctx)?;
        match self.basis {
            Basis::Psi => Ok(self.clone()),
            Basis::Phi => Ok(StateVector {
                coeffs: self.coeffs.iter().zip(ctx.dn()).map(|(c, d)| c * d).collect(),
                basis: Basis::Psi,
            }),
        }
    }

    /// Coefficients relative to `phi_n`.
    pub fn to_phi(&self, ctx: &FrameContext) -> Result<StateVector> {
        self.check_len(ctx)?;
        match self.basis {
            Basis::Phi => Ok(self.clone()),
            Basis::Psi => Ok(StateVector {
                coeffs: self.coeffs.iter().zip(ctx.dn()).map(|(c, d)| c / d).collect(),
                basis: Basis::Phi,
            }),
        }
    }

    fn check_len(&self, ctx: &FrameContext) -> Result<()> {
        if self.len() != ctx.n() {
            return Err(Error::DimensionMismatch { left: self.len(), right: ctx.n() });
        }
        Ok(())
    }
}

/// `<f, g>_a = sum_n conj(f_n) g_n / C_n` for `phi` coefficients; plain
/// coefficient product for `psi` coefficients.
pub fn a_inner(ctx: &FrameContext, f: &StateVector, g: &StateVector) -> Result<Complex64> {
    if f.basis != g.basis {
        return Err(Error::BasisMismatch("a_inner needs both vectors in the same basis"));
    }
    f.check_len(ctx)?;
    g.check_len(ctx)?;
    Ok(match f.basis {
        Basis::Psi => f.coeffs.iter().zip(&g.coeffs).map(|(a, b)| a.conj() * b).sum(),
        Basis::Phi => f
            .coeffs
            .iter()
            .zip(&g.coeffs)
            .zip(ctx.cn())
            .map(|((a, b), c)| a.conj() * b / c)
            .sum(),
    })
}

/// `int |psi_z^a><psi_z^a| dmu_N` in the `phi` basis, by the given rule.
/// Terms are accumulated in node order.
pub fn frame_gram(ctx: &FrameContext, rule: &QuadratureRule) -> Result<CMatrix> {
    let n = ctx.n();
    if rule.dim() != n {
        return Err(Error::DimensionMismatch { left: rule.dim(), right: n });
    }
    let n_theta = rule.n_theta();
    // e_k = (1/n_theta) sum_j e^{i k theta_j}, k = -(N-1)..=N-1
    let e: Vec<Complex64> = (-(n as i64 - 1)..=(n as i64 - 1))
        .map(|k| {
            (0..n_theta).map(|j| Complex64::from_polar(1.0, k as f64 * rule.theta(j))).sum::<Complex64>()
                / n_theta as f64
        })
        .collect();
    let mut g = CMatrix::zeros(n, n);
    let s = ctx.params().hbar().recip();
    for (i, &tau) in rule.taus().iter().enumerate() {
        let amp = scaled_amplitudes(ctx.params(), tau);
        let u: Vec<Complex64> = (0..n).map(|k| ctx.window().ft(s * tau - k as f64) * amp[k]).collect();
        let w = rule.tau_weights()[i];
        for m in 0..n {
            if u[m] == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..n {
                // b_m conj(b_k) carries e^{-i(m-k) theta}
                g[(m, k)] += u[m] * u[k].conj() * e[k + n - 1 - m] * w;
            }
        }
    }
    Ok(g)
}

/// `F(z) = <psi_z^a, f>_a`.
pub fn coherent_transform(ctx: &FrameContext, f: &StateVector, z: &SpherePoint) -> Result<Complex64> {
    let b = building_vector(ctx, z)?;
    a_inner(ctx, &b, &f.to_phi(ctx)?)
}

/// `F(z) (1 - tau)^((N-1)/2)`, finite on the whole sphere.
pub fn coherent_transform_scaled(ctx: &FrameContext, f: &StateVector, z: &SpherePoint) -> Result<Complex64> {
    let b = building_vector_scaled(ctx, z);
    a_inner(ctx, &b, &f.to_phi(ctx)?)
}

/// `(n, C_n, C_n - 1, N (C_n - 1))` rows.
pub fn cn_table(ctx: &FrameContext) -> Vec<(usize, f64, f64, f64)> {
    let nf = ctx.n() as f64;
    ctx.cn().iter().enumerate().map(|(k, &c)| (k, c, c - 1.0, nf * (c - 1.0))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_panels;
    use crate::window::{default_window, make_gaussian_window};

    fn ctx(n: usize) -> FrameContext {
        let p = QuantParams::frame(n).unwrap();
        FrameContext::new(&p, default_window(&p)).unwrap()
    }

    #[test]
    fn cn_positive_and_dn_consistent() {
        let c = ctx(16);
        for (cn, dn) in c.cn().iter().zip(c.dn()) {
            assert!(*cn > 0.0);
            assert!((dn * cn.sqrt() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn cn_matches_independent_integral() {
        // N = 4, n = 1: 4*3 int |a~(4t - 1)|^2 t (1-t)^2 dt on [1/4, 1]
        let c = ctx(4);
        let a = c.window().clone();
        let v = integrate_panels(&[0.25, 0.5, 0.75, 1.0], 60, |t| 12.0 * a.ft(4.0 * t - 1.0).norm_sqr() * t * (1.0 - t).powi(2));
        assert!((c.cn()[1] / v - 1.0).abs() < 1e-12, "{} vs {v}", c.cn()[1]);
    }

    #[test]
    fn cn_real_argument_is_continuous() {
        let c = ctx(16);
        for k in [1usize, 7, 14] {
            let left = cn_coefficient(&c, k as f64 - 1e-7).unwrap();
            let right = cn_coefficient(&c, k as f64 + 1e-7).unwrap();
            let mid = c.cn()[k];
            assert!((left / mid - 1.0).abs() < 1e-5 && (right / mid - 1.0).abs() < 1e-5);
        }
        assert!(cn_coefficient(&c, 15.5).is_err());
        assert!(cn_coefficient(&c, -0.1).is_err());
        assert_eq!(c.cn_extended(-3.0), c.cn()[0]);
    }

    #[test]
    fn building_vector_at_south_pole() {
        let c = ctx(8);
        let b = building_vector(&c, &SpherePoint::new(0.0, 0.3).unwrap()).unwrap();
        let expect = c.window().ft(0.0) * 8f64.sqrt();
        assert!((b.coeffs[0] - expect).norm() < 1e-14);
        assert!(b.coeffs[1..].iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn building_vector_concentrates() {
        let p = QuantParams::frame(32).unwrap();
        let a = make_gaussian_window(&p, 0.05, 0.3).unwrap();
        let c = FrameContext::new(&p, a).unwrap();
        let b = building_vector_scaled(&c, &SpherePoint::new(0.5, 0.0).unwrap());
        let imax = (0..32).max_by(|&i, &j| b.coeffs[i].norm().total_cmp(&b.coeffs[j].norm())).unwrap();
        assert_eq!(imax, 16);
    }

    #[test]
    fn north_pole_is_signalled() {
        let c = ctx(8);
        let north = SpherePoint::new(1.0, 0.0).unwrap();
        assert!(matches!(building_vector(&c, &north), Err(Error::Pole { .. })));
        let b = building_vector_scaled(&c, &north);
        assert!(b.coeffs.iter().all(|x| x.re.is_finite() && x.im.is_finite()));
    }

    #[test]
    fn basis_round_trip_and_a_inner() {
        let c = ctx(12);
        let f = StateVector::new((0..12).map(|k| Complex64::new(k as f64, 1.0 - k as f64)).collect(), Basis::Phi).unwrap();
        let back = f.to_psi(&c).unwrap().to_phi(&c).unwrap();
        for (x, y) in f.coeffs.iter().zip(&back.coeffs) {
            assert!((x - y).norm() <= 1e-14 * x.norm().max(1.0));
        }
        let phi3 = StateVector::basis_vector(12, 3, Basis::Phi);
        assert!((a_inner(&c, &phi3, &phi3).unwrap().re - 1.0 / c.cn()[3]).abs() < 1e-12 / c.cn()[3]);
        let psi3 = StateVector::basis_vector(12, 3, Basis::Psi).to_phi(&c).unwrap();
        assert!((a_inner(&c, &psi3, &psi3).unwrap() - 1.0).norm() < 1e-12);
        let phi5 = StateVector::basis_vector(12, 5, Basis::Phi);
        assert_eq!(a_inner(&c, &phi3, &phi5).unwrap(), Complex64::new(0.0, 0.0));
        assert!(a_inner(&c, &phi3, &StateVector::basis_vector(12, 3, Basis::Psi)).is_err());
    }

    #[test]
    fn gram_is_diag_cn() {
        let c = ctx(16);
        let g = frame_gram(&c, c.rule()).unwrap();
        for m in 0..16 {
            for k in 0..16 {
                if m == k {
                    assert!((g[(m, m)].re / c.cn()[m] - 1.0).abs() < 1e-8);
                } else {
                    assert!(g[(m, k)].norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn transform_at_own_point_is_norm() {
        let c = ctx(10);
        let z0 = SpherePoint::new(0.37, 1.2).unwrap();
        let b = building_vector(&c, &z0).unwrap();
        let f0 = coherent_transform(&c, &b, &z0).unwrap();
        let nrm = a_inner(&c, &b, &b).unwrap();
        assert!(f0.im.abs() < 1e-14 * f0.re && (f0 - nrm).norm() < 1e-13 * nrm.re && f0.re > 0.0);
    }
}
