use atoeplitz::frame::*;
use atoeplitz::quadrature::integrate_panels;
use atoeplitz::sphere::*;
use atoeplitz::window::*;
use num_complex::Complex64;
use std::f64::consts::PI;

fn ctx(n: usize) -> FrameContext {
    let p = QuantParams::frame(n).unwrap();
    FrameContext::new(&p, default_window(&p)).unwrap()
}

// Independent 30-digit quadrature of the defining integral (Gaussian 0.5/0.2).
#[test]
fn cn_matches_high_precision_oracle() {
    let cases = [
        (4usize, 0usize, 0.67313114188433354121),
        (4, 1, 0.43617590905022770176),
        (4, 3, 0.67304824406268343512),
        (16, 0, 0.62648418196129600083),
        (16, 7, 0.20254069584801565486),
        (16, 15, 0.62640952665730828485),
    ];
    for (n, k, expect) in cases {
        let c = ctx(n);
        assert!((c.cn()[k] / expect - 1.0).abs() < 1e-12, "N={n} n={k}: {}", c.cn()[k]);
    }
}

#[test]
fn cn_real_argument_matches_oracle() {
    let c = ctx(16);
    assert!((cn_coefficient(&c, 6.3).unwrap() / 0.20449091689743927798 - 1.0).abs() < 1e-10);
    assert!((cn_coefficient(&c, 14.75).unwrap() / 0.49999990356913403958 - 1.0).abs() < 1e-9);
}

#[test]
fn resolution_of_identity() {
    let c = ctx(16);
    let g = frame_gram(&c, c.rule()).unwrap();
    let mut psi = g.clone();
    for i in 0..16 {
        for j in 0..16 {
            psi[(i, j)] *= c.dn()[i] * c.dn()[j];
        }
    }
    assert!((psi - CMatrix::identity(16, 16)).camax() < 1e-8);
}

#[test]
fn parseval_through_coherent_transform() {
    let n = 12;
    let c = ctx(n);
    let f = StateVector::new((0..n).map(|k| Complex64::new(1.0 / (1.0 + k as f64), (k as f64).sin())).collect(), Basis::Phi).unwrap();
    let g = StateVector::new((0..n).map(|k| Complex64::new((k as f64 * 0.7).cos(), 0.3)).collect(), Basis::Phi).unwrap();
    let rule = c.rule();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut accf = 0.0;
    for (i, &tau) in rule.taus().iter().enumerate() {
        for j in 0..rule.n_theta() {
            let z = SpherePoint::new(tau, rule.theta(j)).unwrap();
            let ff = coherent_transform_scaled(&c, &f, &z).unwrap();
            let gg = coherent_transform_scaled(&c, &g, &z).unwrap();
            acc += ff.conj() * gg * rule.scaled_weight(i);
            accf += ff.norm_sqr() * rule.scaled_weight(i);
        }
    }
    let exact = a_inner(&c, &f, &g).unwrap();
    assert!((acc - exact).norm() < 1e-8 * exact.norm());
    let nf = a_inner(&c, &f, &f).unwrap().re;
    assert!((accf / nf - 1.0).abs() < 1e-8);
}

#[test]
fn building_vector_norm_two_ways() {
    let c = ctx(10);
    let z = SpherePoint::new(0.52, 0.4).unwrap();
    let b = building_vector(&c, &z).unwrap();
    let direct: f64 = (0..10)
        .map(|k| (c.window().ft(10.0 * 0.52 - k as f64) * eval_basis(c.params(), k as i64, &z).unwrap()).norm_sqr())
        .sum();
    assert!((b.norm().powi(2) / direct - 1.0).abs() < 1e-12);
}

#[test]
fn coherent_transform_at_south_pole_is_single_term() {
    let c = ctx(8);
    let phi0 = StateVector::basis_vector(8, 0, Basis::Phi);
    let f = coherent_transform(&c, &phi0, &SpherePoint::new(0.0, 0.0).unwrap()).unwrap();
    let expect = c.window().ft(0.0).conj() * 8f64.sqrt() / c.cn()[0];
    assert!((f - expect).norm() < 1e-14);
}

// The interior coefficients carry the Beta-density height: sqrt(2 pi N t(1-t)) C_n = 1 + O(1/N).
#[test]
fn cn_interior_asymptotics_with_stirling_factor() {
    let mut consts = Vec::new();
    for n in [64usize, 128, 256] {
        let c = ctx(n);
        let mut worst = 0.0f64;
        for k in 0..n {
            let t = k as f64 / n as f64;
            if (0.2..=0.8).contains(&t) {
                let scaled = (2.0 * PI * n as f64 * t * (1.0 - t)).sqrt() * c.cn()[k];
                worst = worst.max((scaled - 1.0).abs());
            }
        }
        consts.push(worst * n as f64);
    }
    for c in &consts[1..] {
        assert!((c / consts[0] - 1.0).abs() < 0.3, "{consts:?}");
    }
}

#[test]
fn cn_edge_limit_without_extra_factor() {
    let c = ctx(256);
    let a = c.window().clone();
    let breaks: Vec<f64> = (0..=12).map(|j| j as f64).collect();
    let limit = integrate_panels(&breaks, 40, |l| a.ft(l).norm_sqr() * (-l).exp());
    assert!((c.cn()[0] / limit - 1.0).abs() < 0.01);
}

#[test]
fn cn_ratio_tends_to_one() {
    let mut prev = f64::INFINITY;
    for n in [32usize, 64, 128, 256] {
        let c = ctx(n);
        let worst = (n / 5..4 * n / 5).map(|k| ((c.cn()[k - 1] / c.cn()[k]).sqrt() - 1.0).abs()).fold(0.0, f64::max);
        assert!(worst * (n as f64) < 5.0);
        assert!(worst < prev);
        prev = worst;
    }
}

#[test]
fn symmetric_window_gives_symmetric_coefficients() {
    let p = QuantParams::frame(256).unwrap();
    let c = FrameContext::new(&p, make_gaussian_window(&p, 0.5, 0.1).unwrap()).unwrap();
    for k in 0..256 {
        assert!((c.cn()[k] / c.cn()[255 - k] - 1.0).abs() < 0.05);
    }
}

#[test]
fn window_mismatch_is_rejected() {
    let p8 = QuantParams::frame(8).unwrap();
    let p9 = QuantParams::frame(9).unwrap();
    assert!(FrameContext::new(&p9, default_window(&p8)).is_err());
}
