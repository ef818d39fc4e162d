mod common;

use common::{cx, real_points};
use num_complex::Complex64 as C;
use std::f64::consts::PI;
use znrh::curve::Region;
use znrh::{Error, Side, ZnCurve};

fn curves() -> Vec<ZnCurve> {
    vec![
        ZnCurve::new(2, &real_points(&[0.0, 1.0, 3.0])).unwrap(),
        ZnCurve::new(3, &real_points(&[0.0, 0.4, 1.0])).unwrap(),
        ZnCurve::new(3, &[cx(0.0, 0.1), cx(0.7, -0.2), cx(1.5, 0.0), cx(2.2, 0.3), cx(3.0, 0.0)]).unwrap(),
        ZnCurve::new(4, &real_points(&[-1.0, 0.0, 0.5, 1.7, 2.0])).unwrap(),
    ]
}

#[test]
fn genus_and_arity() {
    for (n, k, g) in [(2, 3, 1), (3, 3, 2), (3, 5, 4), (4, 5, 6), (2, 5, 2)] {
        let l: Vec<C> = (0..k).map(|i| cx(i as f64, 0.0)).collect();
        assert_eq!(ZnCurve::new(n, &l).unwrap().genus(), g);
    }
    assert_eq!(ZnCurve::new(3, &real_points(&[0.0, 1.0])).unwrap_err(), Error::BadArity(2));
    assert_eq!(ZnCurve::new(3, &real_points(&[0.0, 1.0, 1.0])).unwrap_err(), Error::DuplicatePoints);
    assert!(matches!(ZnCurve::new(1, &real_points(&[0.0, 1.0, 2.0])), Err(Error::Validation(_))));
}

#[test]
fn points_are_sorted_by_real_part() {
    let c = ZnCurve::new(3, &real_points(&[2.0, 0.0, 1.0])).unwrap();
    assert_eq!(c.lambdas, real_points(&[0.0, 1.0, 2.0]));
    assert!((c.p(cx(1.0, 0.0))).norm() > 0.0);
    assert!(c.q(cx(1.0, 0.0)).norm() == 0.0);
}

#[test]
fn sheets_solve_the_curve_equation() {
    for curve in curves() {
        let n = curve.n;
        for l in [cx(0.3, 0.7), cx(-2.0, -0.4), cx(5.0, 1.0)] {
            let want = curve.p(l) * curve.q(l).powi(n as i32 - 1);
            let y1 = curve.y_value(l, 1, Side::Auto).unwrap();
            for s in 1..=n {
                let y = curve.y_value(l, s, Side::Auto).unwrap();
                assert!((y.powi(n as i32) - want).norm() < 1e-12 * want.norm());
                let ratio = y / y1;
                let expect = C::from_polar(1.0, 2.0 * PI * (s - 1) as f64 / n as f64);
                assert!((ratio - expect).norm() < 1e-13);
            }
        }
    }
}

#[test]
fn first_sheet_asymptotics() {
    for curve in curves() {
        let e = curve.m as f64 + 1.0 / curve.n as f64;
        let l = cx(0.0, 1e6);
        let y = curve.y_value(l, 1, Side::Auto).unwrap();
        let lead = C::from_polar(1e6f64.powf(e), e * PI / 2.0);
        assert!((y / lead - 1.0).norm() < 1e-4, "N = {}", curve.n);
    }
}

#[test]
fn boundary_values_on_the_contour() {
    for curve in curves() {
        for k in 0..=curve.npoints() {
            for l in znrh::rh::piece_samples(&curve, k, 4) {
                assert_eq!(curve.region(l), Region::Contour(k));
                let up = curve.y_value(l, 1, Side::Plus).unwrap();
                let down = curve.y_value(l, 1, Side::Minus).unwrap();
                let want = if k % 2 == 1 { curve.rho } else { cx(1.0, 0.0) };
                assert!((down - up * want).norm() < 1e-12 * up.norm(), "piece {k}");
                // nearby off-contour values agree with the boundary values
                let nrm = cx(0.0, 1e-9);
                let above = curve.y_value(l + nrm, 1, Side::Auto).unwrap();
                let below = curve.y_value(l - nrm, 1, Side::Auto).unwrap();
                assert!((above - up).norm() < 1e-6 * up.norm());
                assert!((below - down).norm() < 1e-6 * up.norm());
            }
        }
        let on_cut = (curve.lambda(1) + curve.lambda(2)) * 0.5;
        assert_eq!(curve.y_value(on_cut, 1, Side::Auto).unwrap_err(), Error::CutAmbiguity);
        assert_eq!(curve.y_value(curve.lambda(2), 2, Side::Auto).unwrap(), cx(0.0, 0.0));
    }
}

#[test]
fn crossing_rules_are_inverse() {
    for curve in curves() {
        for k in 0..=curve.npoints() {
            for s in 1..=curve.n {
                let down = curve.sheet_after_crossing_down(k, s);
                assert_eq!(curve.sheet_after_crossing_up(k, down), s);
            }
        }
    }
}

#[test]
fn differentials_sum_to_zero_over_the_fiber() {
    for curve in curves() {
        let l = cx(0.37, 0.81);
        let g = curve.genus();
        let mut acc = vec![cx(0.0, 0.0); g];
        for s in 1..=curve.n {
            for (a, v) in acc.iter_mut().zip(curve.du(l, s, Side::Auto).unwrap()) {
                *a += v;
            }
        }
        assert!(acc.iter().all(|x| x.norm() < 1e-12));
    }
}

#[test]
fn differential_exponents_at_branch_points() {
    for curve in curves() {
        for i in 1..=curve.npoints() {
            for s in 0..curve.n - 1 {
                let e = curve.du_exponent(i, s);
                let li = curve.lambda(i);
                let dir = C::from_polar(1.0, 1.1);
                let (r1, r2) = (1e-5, 1e-6);
                let a = curve.du(li + dir * r1, 1, Side::Auto).unwrap()[curve.m * s].norm();
                let b = curve.du(li + dir * r2, 1, Side::Auto).unwrap()[curve.m * s].norm();
                let slope = (a / b).ln() / (r2 / r1).ln();
                assert!((slope - e).abs() < 1e-3, "point {i}, s = {s}: {slope} vs {e}");
                assert!(e < 1.0);
            }
        }
    }
}

#[test]
fn fiber_lists_all_sheets() {
    for curve in curves() {
        let l = cx(-0.3, 0.9);
        let f = curve.fiber(l);
        for (s, y) in f.iter().enumerate() {
            assert!((y - curve.y_value(l, s + 1, Side::Auto).unwrap()).norm() < 1e-13 * y.norm());
        }
    }
}
