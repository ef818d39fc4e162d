mod common;

use common::cx;
use num_complex::Complex64 as C;
use std::f64::consts::PI;
use znrh::numerics::*;
use znrh::Error;

/// Complete elliptic integral K(k) = pi / (2 agm(1, k')) for 0 < k < 1.
fn ellk(k2: f64) -> f64 {
    let (mut a, mut b) = (1.0f64, (1.0 - k2).sqrt());
    for _ in 0..40 {
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    PI / (2.0 * a)
}

#[test]
fn beta_integral_with_endpoint_singularities() {
    let spec = QuadratureSpec::with_exponents(-1.0 / 3.0, -2.0 / 3.0);
    let v = integrate_segment(|_, da, db| da.powf(-1.0 / 3.0) * db.powf(-2.0 / 3.0), cx(0.0, 0.0), cx(1.0, 0.0), &spec).unwrap();
    let want = 2.0 * PI / 3f64.sqrt();
    assert!((v - want).norm() < 1e-12, "{v} vs {want}");
}

#[test]
fn complex_segment_integral() {
    // integral of exp(z) from 0 to 1 + i
    let b = cx(1.0, 1.0);
    let v = integrate_segment(|l, _, _| l.exp(), cx(0.0, 0.0), b, &QuadratureSpec::default()).unwrap();
    assert!((v - (b.exp() - 1.0)).norm() < 1e-13);
}

#[test]
fn gauss_legendre_is_exact_on_polynomials() {
    let (x, w) = gauss_legendre(12);
    assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    for deg in 0..24 {
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg)).sum();
        let want = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
        assert!((s - want).abs() < 1e-14, "degree {deg}");
    }
}

#[test]
fn hypergeometric_closed_forms() {
    // F(1,1;2;z) = -log(1-z)/z in each evaluation region
    for z in [cx(0.3, 0.1), cx(-2.0, 0.0), cx(0.9, 0.4), cx(0.2, 1.4), cx(3.0, -0.5)] {
        let f = hyp2f1(1.0, 1.0, 2.0, z).unwrap();
        let want = -(C::new(1.0, 0.0) - z).ln() / z;
        assert!((f - want).norm() < 1e-12 * want.norm(), "z = {z}: {f} vs {want}");
    }
    // F(a,b;b;z) = (1-z)^(-a)
    for z in [cx(0.45, 0.0), cx(0.8, -0.3), cx(-5.0, 1.0)] {
        let f = hyp2f1(0.3, 0.7, 0.7, z).unwrap();
        let want = (C::new(1.0, 0.0) - z).powf(-0.3);
        assert!((f - want).norm() < 1e-12 * want.norm(), "z = {z}");
    }
}

#[test]
fn hypergeometric_matches_agm() {
    for k2 in [0.1, 0.5, 0.8, 0.97] {
        let f = hyp2f1(0.5, 0.5, 1.0, cx(k2, 0.0)).unwrap();
        let want = 2.0 * ellk(k2) / PI;
        assert!((f - want).norm() < 1e-12, "k^2 = {k2}: {f} vs {want}");
    }
}

#[test]
fn hypergeometric_ode_and_symmetry() {
    let (a, b, c) = (1.0 / 3.0, 2.0 / 3.0, 1.0);
    for z in [cx(0.3, 0.2), cx(0.7, -0.1), cx(-1.5, 0.4)] {
        let f = |z: C| vec![hyp2f1(a, b, c, z).unwrap()];
        let d1 = richardson_derivative(f, z, cx(1.0, 0.0), 1e-2)[0];
        let fp = |z: C| richardson_derivative(f, z, cx(1.0, 0.0), 1e-2);
        let d2 = richardson_derivative(fp, z, cx(1.0, 0.0), 1e-2)[0];
        let v = f(z)[0];
        let res = z * (1.0 - z) * d2 + (c - (a + b + 1.0) * z) * d1 - a * b * v;
        assert!(res.norm() < 1e-8, "z = {z}: residual {}", res.norm());
        let swapped = hyp2f1(b, a, c, z).unwrap();
        assert!((swapped - v).norm() < 1e-14 * v.norm());
    }
}

#[test]
fn hypergeometric_rejects_bad_arguments() {
    assert!(matches!(hyp2f1(0.5, 0.5, 1.0, cx(1.5, 0.0)), Err(Error::DomainError(_))));
    assert!(matches!(hyp2f1(0.5, 0.5, -2.0, cx(0.2, 0.0)), Err(Error::DomainError(_))));
}

#[test]
fn tracking_square_roots() {
    let roots = |z: C| {
        let r = z.sqrt();
        vec![r, -r]
    };
    let around: Vec<C> = (0..=32).map(|k| C::from_polar(1.0, 2.0 * PI * k as f64 / 32.0)).collect();
    let (v, perm) = track_root(&PathSpec::new(around), roots, 0).unwrap();
    assert_eq!(perm, vec![1, 0]);
    assert!((v + 1.0).norm() < 1e-12);
    let away: Vec<C> = (0..=32).map(|k| cx(3.0, 0.0) + C::from_polar(1.0, 2.0 * PI * k as f64 / 32.0)).collect();
    let (v, perm) = track_root(&PathSpec::new(away), roots, 0).unwrap();
    assert_eq!(perm, vec![0, 1]);
    assert!((v - 2.0).norm() < 1e-12);
}

#[test]
fn tracking_cube_roots_permutes_cyclically() {
    let roots = |z: C| {
        let r = z.powf(1.0 / 3.0);
        (0..3).map(|k| r * C::from_polar(1.0, 2.0 * PI * k as f64 / 3.0)).collect::<Vec<_>>()
    };
    let path: Vec<C> = (0..=48).map(|k| C::from_polar(2.0, 2.0 * PI * k as f64 / 48.0)).collect();
    let (_, perm) = track_root(&PathSpec::new(path), roots, 0).unwrap();
    assert_eq!(perm, vec![1, 2, 0]);
}

#[test]
fn clearance_check() {
    let mut p = PathSpec::new(vec![cx(-1.0, 0.1), cx(1.0, 0.1)]);
    p.min_clearance = 0.2;
    assert_eq!(p.check_clearance(&[cx(0.0, 0.0)]), Err(Error::PathThroughBranchPoint));
    p.min_clearance = 0.05;
    assert!(p.check_clearance(&[cx(0.0, 0.0)]).is_ok());
}
