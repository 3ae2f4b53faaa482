//! The a-Toeplitz quantizer
//! `Op_a(Sigma) = int |psi_z^{(Sigma * C)(z) a}>_a <psi_z^a|_a dmu_N(z)`.
//!
//! Matrices are returned in the `psi` basis, where `<.,.>_a` is the plain
//! coefficient product, so the bra is `psi` coordinates of `psi_z^a`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frame::{building_vector_scaled_with, frame_gram, FrameContext};
use crate::quadrature::QuadratureRule;
use crate::sphere::{CMatrix, SpherePoint};
use crate::symbol::{star_c, symbol_of_matrix, OperatorSymbol};
use crate::trig_matrix::BandMatrix;

#[derive(Debug, Clone)]
pub struct ATopQuantizer {
    ctx: FrameContext,
    rule: QuadratureRule,
}

impl ATopQuantizer {
    /// Frame-panel rule with `per_panel` tau nodes per panel and `n_theta`
    /// angles, accepted only if it reproduces the frame Gram matrix
    /// (off-diagonal `< 1e-10`, diagonal within `1e-8` of `C_n`).
    pub fn new(ctx: &FrameContext, per_panel: usize, n_theta: usize) -> Result<Self> {
        let q = Self::unvalidated(ctx, per_panel, n_theta)?;
        let g = frame_gram(ctx, &q.rule)?;
        let n = ctx.n();
        let mut dev = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let d = if i == j { (g[(i, i)].re / ctx.cn()[i] - 1.0).abs().max(g[(i, i)].im.abs() * 1e-2) } else { g[(i, j)].norm() * 1e-2 };
                dev = dev.max(d);
            }
        }
        if dev > 1e-8 {
            return Err(Error::Inconsistent { what: "quadrature rule vs frame Gram matrix", deviation: dev });
        }
        Ok(q)
    }

    /// Same rule without the Gram check (for refinement studies).
    pub fn unvalidated(ctx: &FrameContext, per_panel: usize, n_theta: usize) -> Result<Self> {
        let rule = QuadratureRule::frame(ctx.params(), per_panel, n_theta)?;
        Ok(Self { ctx: ctx.clone(), rule })
    }

    /// Default refined rule: 40 nodes per panel, `4N` angles.
    pub fn refined(ctx: &FrameContext) -> Result<Self> {
        Self::new(ctx, crate::frame::FRAME_PANEL_NODES, 4 * ctx.n())
    }

    pub fn ctx(&self) -> &FrameContext {
        &self.ctx
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }
}

/// `Op_a(Sigma)` in the `psi` basis. Tau nodes are processed in parallel and
/// summed in node order.
pub fn a_toeplitz_quantize(q: &ATopQuantizer, s: &OperatorSymbol) -> Result<CMatrix> {
    let ctx = &q.ctx;
    let p = ctx.params();
    let n = ctx.n();
    let sc = star_c(s, ctx)?;
    let rule = &q.rule;
    let partials: Vec<Result<CMatrix>> = rule
        .taus()
        .par_iter()
        .enumerate()
        .map(|(i, &tau)| {
            let w = rule.scaled_weight(i);
            let mut acc = CMatrix::zeros(n, n);
            for j in 0..rule.n_theta() {
                let z = SpherePoint::new(tau, rule.theta(j))?;
                let d: Vec<Complex64> =
                    building_vector_scaled_with(p, ctx.window(), &z).iter().zip(ctx.dn()).map(|(c, d)| c * d).collect();
                let out = sc.at(&z)?.apply(ctx.window());
                let b: Vec<Complex64> =
                    building_vector_scaled_with(p, &out, &z).iter().zip(ctx.dn()).map(|(c, d)| c * d).collect();
                if b.iter().chain(&d).any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                    return Err(Error::NonFinite { tau, theta: z.theta() });
                }
                for r in 0..n {
                    if b[r] == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let br = b[r] * w;
                    for c in 0..n {
                        acc[(r, c)] += br * d[c].conj();
                    }
                }
            }
            Ok(acc)
        })
        .collect();
    let mut total = CMatrix::zeros(n, n);
    for part in partials {
        total += part?;
    }
    Ok(total)
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundtripReport {
    pub n: usize,
    pub per_panel: usize,
    pub n_theta: usize,
    /// `||Op_a(sigma[M]) - M||_F / ||M||_F`.
    pub rel_frobenius: f64,
    pub max_entry_residual: f64,
    /// `|Op_a(sigma[M]) - M|` entrywise, row-major.
    pub residuals: Vec<Vec<f64>>,
}

/// Quantize `sigma[M]` and compare with `M` (read in the `psi` basis).
pub fn roundtrip_report(q: &ATopQuantizer, m: &BandMatrix) -> Result<RoundtripReport> {
    let s = symbol_of_matrix(m, q.ctx.params())?;
    let b = a_toeplitz_quantize(q, &s)?;
    let md = m.dense();
    let diff = &b - &md;
    let n = m.n();
    let residuals: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| diff[(i, j)].norm()).collect()).collect();
    let max_entry_residual = residuals.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
    let (per_panel, n_theta) = match q.rule.kind() {
        crate::quadrature::RuleKind::Panels { per_panel } => (per_panel, q.rule.n_theta()),
        crate::quadrature::RuleKind::Legendre => (q.rule.taus().len(), q.rule.n_theta()),
    };
    Ok(RoundtripReport { n, per_panel, n_theta, rel_frobenius: diff.norm() / md.norm(), max_entry_residual, residuals })
}
