#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use znrh::curve::CycleKind;
use znrh::kernels::CurvePoint;
use znrh::numerics::gauss_legendre;
use znrh::ZnCurve;

pub fn cx(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn real_points(xs: &[f64]) -> Vec<C> {
    xs.iter().map(|x| cx(*x, 0.0)).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn max_abs(m: &DMatrix<C>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn identity(n: usize) -> DMatrix<C> {
    DMatrix::identity(n, n)
}

/// Constants of modulus in [1/2, 2] with random phase.
pub fn random_constants(r: &mut ChaCha8Rng, count: usize) -> Vec<C> {
    (0..count)
        .map(|_| C::from_polar(r.gen_range(0.5..2.0), r.gen_range(-3.0..3.0)))
        .collect()
}

/// Branch points with increasing real parts and small imaginary parts.
pub fn random_lambdas(r: &mut ChaCha8Rng, count: usize) -> Vec<C> {
    let mut x = 0.0;
    (0..count)
        .map(|_| {
            x += r.gen_range(0.6..1.4);
            cx(x, r.gen_range(-0.3..0.3))
        })
        .collect()
}

/// Points off the contour and away from the branch points.
pub fn random_points(curve: &ZnCurve, r: &mut ChaCha8Rng, count: usize) -> Vec<CurvePoint> {
    let lo = curve.lambdas.iter().map(|x| x.re).fold(f64::MAX, f64::min) - 1.0;
    let hi = curve.lambdas.iter().map(|x| x.re).fold(f64::MIN, f64::max) + 1.0;
    let gap = curve.min_gap();
    let mut out = Vec::new();
    while out.len() < count {
        let l = cx(r.gen_range(lo..hi), r.gen_range(-1.5..1.5));
        if curve.height_above_contour(l).abs() < 0.05 * gap || curve.lambdas.iter().any(|x| (x - l).norm() < 0.1 * gap) {
            continue;
        }
        out.push(CurvePoint::new(l, r.gen_range(1..=curve.n)));
    }
    out
}

/// The N roots of y^N = p q^(N-1) by brute force from the polynomial value.
fn fiber(curve: &ZnCurve, l: C) -> Vec<C> {
    let v = curve.p(l) * curve.q(l).powi(curve.n as i32 - 1);
    let n = curve.n as f64;
    let r0 = v.powf(1.0 / n);
    (0..curve.n).map(|k| r0 * C::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n)).collect()
}

/// Integral of the raw differentials lambda^(j-1) q^s / y^(s+1) around a closed
/// polygon, with y continued by nearest-root matching on a fine grid.
pub fn loop_integral(curve: &ZnCurve, vertices: &[C], y_start: C) -> Vec<C> {
    let g = curve.genus();
    let (x, w) = gauss_legendre(20);
    let mut acc = vec![cx(0.0, 0.0); g];
    let mut y = y_start;
    for e in vertices.windows(2) {
        let (a, b) = (e[0], e[1]);
        let panels = 400;
        for p in 0..panels {
            let pa = a + (b - a) * (p as f64 / panels as f64);
            let pb = a + (b - a) * ((p + 1) as f64 / panels as f64);
            let half = (pb - pa) * 0.5;
            let mid = (pa + pb) * 0.5;
            let mut nodes: Vec<(f64, f64)> = x.iter().copied().zip(w.iter().copied()).collect();
            nodes.sort_by(|u, v| u.0.total_cmp(&v.0));
            for (t, wt) in nodes {
                let l = mid + half * t;
                let f = fiber(curve, l);
                y = *f.iter().min_by(|u, v| (*u - y).norm().total_cmp(&(*v - y).norm())).unwrap();
                let q = curve.q(l);
                for s in 0..curve.n - 1 {
                    let base = q.powi(s as i32) / y.powi(s as i32 + 1);
                    let mut lp = cx(1.0, 0.0);
                    for j in 0..curve.m {
                        acc[j + curve.m * s] += lp * base * half * wt;
                        lp *= l;
                    }
                }
            }
        }
    }
    acc
}

/// Raw period matrices (rows: differentials, columns: cycles) by loop quadrature.
pub fn loop_periods(curve: &ZnCurve, h: f64) -> (DMatrix<C>, DMatrix<C>) {
    let g = curve.genus();
    let mut a = DMatrix::from_element(g, g, cx(0.0, 0.0));
    let mut b = a.clone();
    for (kind, target) in [(CycleKind::Alpha, &mut a), (CycleKind::Beta, &mut b)] {
        for idx in 1..=g {
            let leg = &curve.cycle_path(kind, idx, h)[0];
            let v0 = leg.path.vertices[0];
            let y0 = curve.y_value(v0, leg.path.start_sheet, znrh::Side::Auto).unwrap();
            let col = loop_integral(curve, &leg.path.vertices, y0);
            for r in 0..g {
                target[(r, idx - 1)] = col[r];
            }
        }
    }
    (a, b)
}

/// Quadrature nodes along a polygon: (lambda, sheet label, weight d lambda),
/// with the sheet followed by continuity of y.
pub fn polygon_nodes(curve: &ZnCurve, vertices: &[C], start_sheet: usize, panels: usize) -> Vec<(C, usize, C)> {
    let (x, w) = gauss_legendre(16);
    let mut nodes: Vec<(f64, f64)> = x.iter().copied().zip(w.iter().copied()).collect();
    nodes.sort_by(|u, v| u.0.total_cmp(&v.0));
    let mut y = curve.y_value(vertices[0], start_sheet, znrh::Side::Auto).unwrap();
    let mut out = Vec::new();
    for e in vertices.windows(2) {
        let (a, b) = (e[0], e[1]);
        for p in 0..panels {
            let pa = a + (b - a) * (p as f64 / panels as f64);
            let pb = a + (b - a) * ((p + 1) as f64 / panels as f64);
            let half = (pb - pa) * 0.5;
            let mid = (pa + pb) * 0.5;
            for (t, wt) in &nodes {
                let l = mid + half * *t;
                let mut best = (1, f64::INFINITY, y);
                for s in 1..=curve.n {
                    let ys = curve.y_value(l, s, znrh::Side::Auto).unwrap();
                    let d = (ys - y).norm();
                    if d < best.1 {
                        best = (s, d, ys);
                    }
                }
                y = best.2;
                out.push((l, best.0, half * *wt));
            }
        }
    }
    out
}
