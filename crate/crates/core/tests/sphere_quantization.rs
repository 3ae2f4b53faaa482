use atoeplitz::sphere::*;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gram(p: &QuantParams, rule: &atoeplitz::quadrature::QuadratureRule) -> CMatrix {
    let n = p.n();
    let mut g = CMatrix::zeros(n, n);
    for node in rule.nodes() {
        let v: Vec<Complex64> = (0..n as i64).map(|k| eval_basis(p, k, &node.point).unwrap()).collect();
        for i in 0..n {
            for j in 0..n {
                g[(i, j)] += v[i].conj() * v[j] * node.weight;
            }
        }
    }
    g
}

#[test]
fn gram_matrix_is_identity() {
    let p = QuantParams::frame(8).unwrap();
    let rule = sphere_quadrature(&p, 8, 17).unwrap();
    let dev = (gram(&p, &rule) - CMatrix::identity(8, 8)).camax();
    assert!(dev < 1e-12, "{dev:e}");
    assert!((rule.total_weight() - 0.125).abs() < 1e-12 * 0.125);
}

#[test]
fn theta_orthogonality_is_exact_in_floating_point_scale() {
    let p = QuantParams::frame(6).unwrap();
    let rule = sphere_quadrature(&p, 6, 13).unwrap();
    let g = gram(&p, &rule);
    for i in 0..6 {
        for j in 0..6 {
            if i != j {
                assert!(g[(i, j)].norm() < 1e-15);
            }
        }
    }
}

#[test]
fn reproducing_property() {
    let n = 16;
    let p = QuantParams::frame(n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let f = StateVector::new(
            (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect(),
            Basis::Phi,
        )
        .unwrap();
        for _ in 0..20 {
            let z0 = SpherePoint::new(rng.gen_range(0.0..0.95), rng.gen_range(0.0..6.28)).unwrap();
            let rho = coherent_state(&p, &z0).unwrap();
            let lhs = rho.dot(&f).unwrap();
            let rhs = eval_state(&p, &f, &z0).unwrap();
            let scale = f.norm() * rho.norm();
            assert!((lhs - rhs).norm() < 1e-10 * scale, "{lhs} vs {rhs}");
        }
    }
}

#[test]
fn reproducing_basis_function_example() {
    let p = QuantParams::frame(4).unwrap();
    let z0 = SpherePoint::new(0.62, 2.4).unwrap();
    let phi1 = StateVector::basis_vector(4, 1, Basis::Phi);
    let v = coherent_state(&p, &z0).unwrap().dot(&phi1).unwrap();
    assert!((v - eval_basis(&p, 1, &z0).unwrap()).norm() < 1e-12);
}

#[test]
fn toeplitz_of_one_is_identity() {
    let p = QuantParams::frame(16).unwrap();
    let rule = sphere_quadrature(&p, 16, 33).unwrap();
    let t = toeplitz_quantize(&p, |_| Complex64::new(1.0, 0.0), &rule).unwrap();
    assert!((t - CMatrix::identity(16, 16)).camax() < 1e-12);
}

#[test]
fn toeplitz_of_real_function_is_hermitian() {
    let p = QuantParams::frame(12).unwrap();
    let rule = sphere_quadrature(&p, 14, 27).unwrap();
    let t = toeplitz_quantize(&p, |z| Complex64::new((3.0 * z.tau()).sin() * (2.0 * z.theta()).cos() + z.theta().sin(), 0.0), &rule).unwrap();
    assert!((&t - t.adjoint()).camax() < 1e-12);
}

#[test]
fn toeplitz_of_tau_rationals() {
    // (n+1)/(N+1), exact Beta-integral values
    let p = QuantParams::frame(5).unwrap();
    let rule = sphere_quadrature(&p, 5, 11).unwrap();
    let t = toeplitz_quantize(&p, |z| Complex64::new(z.tau(), 0.0), &rule).unwrap();
    for (k, expect) in [1.0 / 6.0, 2.0 / 6.0, 3.0 / 6.0, 4.0 / 6.0, 5.0 / 6.0].iter().enumerate() {
        assert!((t[(k, k)].re - expect).abs() < 1e-14);
    }
}

#[test]
fn husimi_of_tau_first_order_term() {
    // H(T[tau])(z) = ((N-1) tau + 1)/(N+1) exactly
    for n in [32usize, 64] {
        let p = QuantParams::frame(n).unwrap();
        let rule = sphere_quadrature(&p, n, 2 * n + 1).unwrap();
        let t = toeplitz_quantize(&p, |z| Complex64::new(z.tau(), 0.0), &rule).unwrap();
        for tau in [0.0, 0.25, 0.5, 0.8, 1.0] {
            let h = husimi(&p, &t, &SpherePoint::new(tau, 1.0).unwrap()).unwrap();
            let exact = ((n as f64 - 1.0) * tau + 1.0) / (n as f64 + 1.0);
            assert!((h.re - exact).abs() < 1e-13 && h.im.abs() < 1e-13);
        }
    }
    let p = QuantParams::frame(128).unwrap();
    let rule = sphere_quadrature(&p, 128, 257).unwrap();
    let t = toeplitz_quantize(&p, |z| Complex64::new(z.tau(), 0.0), &rule).unwrap();
    let h = husimi(&p, &t, &SpherePoint::new(0.5, 0.0).unwrap()).unwrap();
    assert!((h.re - 0.5).abs() < 1e-13);
}

#[test]
fn thread_count_does_not_change_bits() {
    let p = QuantParams::frame(24).unwrap();
    let rule = sphere_quadrature(&p, 30, 49).unwrap();
    let f = |z: &SpherePoint| Complex64::new(z.tau().powi(3), (z.theta() * 3.0).sin() * z.tau());
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| toeplitz_quantize(&p, f, &rule).unwrap());
    let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| toeplitz_quantize(&p, f, &rule).unwrap());
    assert_eq!(one, many);
}

#[test]
fn quadrature_csv_is_deterministic() {
    let p = QuantParams::frame(3).unwrap();
    let rule = sphere_quadrature(&p, 3, 7).unwrap();
    let (mut a, mut b) = (Vec::new(), Vec::new());
    rule.write_csv(&mut a).unwrap();
    rule.write_csv(&mut b).unwrap();
    assert_eq!(a, b);
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 22);
}
