//! Quadrature, the Gauss hypergeometric function and root continuation.

use crate::error::{Error, Result};
use num_complex::Complex64 as C;
use std::f64::consts::PI;

pub const I: C = C { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// number of step halvings allowed
    pub max_subdivisions: usize,
    /// behaviour (t-a)^alpha (b-t)^beta, used to widen the node range
    pub endpoint_exponents: (f64, f64),
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: 1e-13,
            rel_tol: 1e-14,
            max_subdivisions: 9,
            endpoint_exponents: (0.0, 0.0),
        }
    }
}

impl QuadratureSpec {
    pub fn with_exponents(alpha: f64, beta: f64) -> Self {
        QuadratureSpec { endpoint_exponents: (alpha, beta), ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b) = self.endpoint_exponents;
        if !(self.abs_tol > 0.0) || a <= -1.0 || b <= -1.0 {
            return Err(Error::Validation("quadrature spec".into()));
        }
        Ok(())
    }
}

/// Tanh-sinh integration of a vector-valued integrand over the segment [a, b].
///
/// The integrand receives `(lambda, lambda - a, b - lambda)` where the two
/// differences are computed without cancellation near the endpoints.
/// The returned error estimate is the difference between the last two levels.
pub fn tanh_sinh_vec<F>(f: F, a: C, b: C, dim: usize, spec: &QuadratureSpec) -> Result<(Vec<C>, f64)>
where
    F: Fn(C, C, C) -> Vec<C>,
{
    spec.validate()?;
    let half = (b - a) * 0.5;
    let (alpha, beta) = spec.endpoint_exponents;
    let decay = (1.0 + alpha.min(beta)).max(0.05);
    // nodes are dropped once the weight times the worst endpoint growth underflows
    let node = |t: f64| -> Option<(f64, f64, f64)> {
        let s = 0.5 * PI * t.sinh();
        let e = (2.0 * s.abs()).exp();
        if !e.is_finite() {
            return None;
        }
        // 1 - |x| without cancellation
        let small = 2.0 / (e + 1.0);
        if small < 1e-300 {
            return None;
        }
        let ch = (0.5 * PI * t.sinh()).cosh();
        let w = 0.5 * PI * t.cosh() / (ch * ch);
        if w * small.powf(-(1.0 - decay)) < 1e-300 {
            return None;
        }
        let (one_plus, one_minus) = if s >= 0.0 { (2.0 - small, small) } else { (small, 2.0 - small) };
        Some((w, one_plus, one_minus))
    };
    let eval = |t: f64, acc: &mut Vec<C>| -> bool {
        match node(t) {
            None => false,
            Some((w, op, om)) => {
                let da = half * op;
                let db = half * om;
                let lam = if op < om { a + da } else { b - db };
                let v = f(lam, da, db);
                if v.iter().any(|x| !(x.re.is_finite() && x.im.is_finite())) {
                    return false;
                }
                for (k, x) in v.iter().enumerate() {
                    acc[k] += *x * w;
                }
                true
            }
        }
    };
    let tmax = 7.0;
    let mut sum = vec![C::new(0.0, 0.0); dim];
    let mut h = 1.0;
    // level 0
    {
        let mut k = 0i64;
        loop {
            let t = k as f64 * h;
            if t > tmax {
                break;
            }
            let ok = eval(t, &mut sum);
            if k != 0 {
                eval(-t, &mut sum);
            }
            if !ok && k > 0 {
                break;
            }
            k += 1;
        }
    }
    let mut prev: Vec<C> = sum.iter().map(|s| *s * h * half).collect();
    let mut err = f64::INFINITY;
    for level in 1..=spec.max_subdivisions {
        h *= 0.5;
        let mut k = 1i64;
        loop {
            let t = k as f64 * h;
            if t > tmax {
                break;
            }
            let a1 = eval(t, &mut sum);
            let a2 = eval(-t, &mut sum);
            if !a1 && !a2 {
                break;
            }
            k += 2;
        }
        let cur: Vec<C> = sum.iter().map(|s| *s * h * half).collect();
        err = cur.iter().zip(prev.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        let scale = cur.iter().map(|x| x.norm()).fold(0.0, f64::max);
        prev = cur;
        if prev.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
            return Err(Error::NonConvergence("non-finite integrand".into()));
        }
        if level >= 3 && err <= spec.abs_tol.max(spec.rel_tol * scale) {
            return Ok((prev, err));
        }
    }
    let scale = prev.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if err <= 1e3 * spec.abs_tol.max(spec.rel_tol * scale) {
        return Ok((prev, err));
    }
    Err(Error::NonConvergence(format!("error estimate {err:e}")))
}

/// Scalar tanh-sinh integration over [a, b]; the integrand gets `(lambda, lambda-a, b-lambda)`.
pub fn integrate_segment<F>(f: F, a: C, b: C, spec: &QuadratureSpec) -> Result<C>
where
    F: Fn(C, C, C) -> C,
{
    tanh_sinh_vec(|l, da, db| vec![f(l, da, db)], a, b, 1, spec).map(|(v, _)| v[0])
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

fn f21_series(a: C, b: C, cc: C, z: C) -> Result<C> {
    let mut term = C::new(1.0, 0.0);
    let mut sum = term;
    for n in 0..4000 {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((cc + nf) * (nf + 1.0)) * z;
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() && n > 2 {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence("2F1 series".into()))
}

/// Taylor stepping of the hypergeometric equation from a regular point.
fn f21_ode(a: C, b: C, cc: C, z: C) -> Result<C> {
    // start on the disc |z| = 0.4 along the ray to z
    let dir = z / z.norm();
    let mut z0 = dir * 0.4;
    let mut f = f21_series(a, b, cc, z0)?;
    let mut fp = a * b / cc * f21_series(a + 1.0, b + 1.0, cc + 1.0, z0)?;
    let mut guard = 0;
    while (z - z0).norm() > 0.0 {
        guard += 1;
        if guard > 10_000 {
            return Err(Error::NonConvergence("2F1 continuation".into()));
        }
        let radius = z0.norm().min((C::new(1.0, 0.0) - z0).norm());
        let dist = (z - z0).norm();
        let hmax = 0.45 * radius;
        let h = if dist <= hmax { z - z0 } else { (z - z0) * (hmax / dist) };
        let p2 = z0 * (1.0 - z0);
        let p1 = cc - (a + b + 1.0) * z0;
        let q = 1.0 - 2.0 * z0;
        let mut coef = vec![f, fp];
        let mut val = f + fp * h;
        let mut der = fp;
        let mut hp = h;
        for n in 0..400usize {
            let nf = n as f64;
            let fn1 = coef[n + 1];
            let fn0 = coef[n];
            let next = ((a + nf) * (b + nf) * fn0 - (q * nf + p1) * (nf + 1.0) * fn1)
                / (p2 * (nf + 2.0) * (nf + 1.0));
            coef.push(next);
            der += next * (nf + 2.0) * hp;
            hp *= h;
            let t = next * hp;
            val += t;
            if t.norm() < 1e-18 * val.norm() && n > 4 {
                break;
            }
        }
        f = val;
        fp = der;
        z0 += h;
        if (z - z0).norm() < 1e-15 * z.norm().max(1.0) {
            break;
        }
    }
    Ok(f)
}

/// Gauss hypergeometric function F(a, b; c; z).
pub fn gauss_2f1(a: C, b: C, cc: C, z: C) -> Result<C> {
    if cc.im == 0.0 && cc.re <= 0.0 && cc.re.fract() == 0.0 {
        return Err(Error::DomainError("c is a non-positive integer".into()));
    }
    if z.im == 0.0 && z.re >= 1.0 {
        return Err(Error::DomainError("z on the cut [1, inf)".into()));
    }
    if z.norm() <= 0.5 {
        return f21_series(a, b, cc, z);
    }
    let w = z / (z - 1.0);
    if w.norm() <= 0.5 {
        // Pfaff transformation
        let pre = (C::new(1.0, 0.0) - z).powc(-a);
        return Ok(pre * f21_series(a, cc - b, cc, w)?);
    }
    f21_ode(a, b, cc, z)
}

/// Real-parameter convenience wrapper.
pub fn hyp2f1(a: f64, b: f64, cc: f64, z: C) -> Result<C> {
    gauss_2f1(C::new(a, 0.0), C::new(b, 0.0), C::new(cc, 0.0), z)
}

#[derive(Debug, Clone)]
pub struct PathSpec {
    pub vertices: Vec<C>,
    pub start_sheet: usize,
    pub min_clearance: f64,
}

impl PathSpec {
    pub fn new(vertices: Vec<C>) -> Self {
        PathSpec { vertices, start_sheet: 1, min_clearance: 0.0 }
    }

    /// Error if a segment comes closer than `min_clearance` to one of `points`.
    pub fn check_clearance(&self, points: &[C]) -> Result<()> {
        for w in self.vertices.windows(2) {
            for p in points {
                if segment_distance(w[0], w[1], *p) < self.min_clearance {
                    return Err(Error::PathThroughBranchPoint);
                }
            }
        }
        Ok(())
    }
}

pub fn segment_distance(a: C, b: C, p: C) -> f64 {
    let d = b - a;
    let l2 = d.norm_sqr();
    if l2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * d.conj()).re / l2).clamp(0.0, 1.0);
    (a + d * t - p).norm()
}

fn nearest(cands: &[C], v: C) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, x) in cands.iter().enumerate() {
        let d = (x - v).norm();
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

fn min_separation(c: &[C]) -> f64 {
    let mut m = f64::INFINITY;
    for i in 0..c.len() {
        for j in i + 1..c.len() {
            m = m.min((c[i] - c[j]).norm());
        }
    }
    m
}

/// Continue every root of `curve_values` along the path.
///
/// Returns the continuation of root `start_index` (index into the candidate
/// list at the first vertex) and the induced map `perm[i] = j`: candidate `i`
/// at the start arrives at candidate `j` at the end.
pub fn track_root<F>(path: &PathSpec, curve_values: F, start_index: usize) -> Result<(C, Vec<usize>)>
where
    F: Fn(C) -> Vec<C>,
{
    let verts = &path.vertices;
    if verts.is_empty() {
        return Err(Error::Validation("empty path".into()));
    }
    let mut cur = curve_values(verts[0]);
    let n = cur.len();
    for w in verts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mut t = 0.0f64;
        let mut dt: f64 = 1.0 / 16.0;
        while t < 1.0 {
            let step = dt.min(1.0 - t);
            let p = a + (b - a) * (t + step);
            let cand = curve_values(p);
            let sep = min_separation(&cand);
            let mut next = vec![C::new(0.0, 0.0); n];
            let mut ok = true;
            let mut used = vec![false; n];
            for i in 0..n {
                let (j, d) = nearest(&cand, cur[i]);
                if used[j] || 10.0 * d >= sep {
                    ok = false;
                    break;
                }
                used[j] = true;
                next[i] = cand[j];
            }
            if ok {
                cur = next;
                t += step;
                dt = (dt * 1.5).min(0.25);
            } else {
                dt *= 0.5;
                if dt < 1e-12 {
                    return Err(Error::AmbiguousMatching(format!("{p}")));
                }
            }
        }
    }
    let last = curve_values(*verts.last().unwrap());
    let mut perm = vec![0; n];
    for i in 0..n {
        perm[i] = nearest(&last, cur[i]).0;
    }
    Ok((cur[start_index], perm))
}

/// Richardson-extrapolated central difference of a vector valued map along direction `dir`.
pub fn richardson_derivative<F>(f: F, x: C, dir: C, h: f64) -> Vec<C>
where
    F: Fn(C) -> Vec<C>,
{
    let d = |h: f64| -> Vec<C> {
        let p = f(x + dir * h);
        let m = f(x - dir * h);
        p.iter().zip(m.iter()).map(|(a, b)| (a - b) / (2.0 * h)).collect()
    };
    let d1 = d(h);
    let d2 = d(h / 2.0);
    let d3 = d(h / 4.0);
    let r1: Vec<C> = d1.iter().zip(d2.iter()).map(|(a, b)| (b * 4.0 - a) / 3.0).collect();
    let r2: Vec<C> = d2.iter().zip(d3.iter()).map(|(a, b)| (b * 4.0 - a) / 3.0).collect();
    r1.iter().zip(r2.iter()).map(|(a, b)| (b * 16.0 - a) / 15.0).collect()
}

/// Largest entry modulus of a complex matrix.
pub fn max_abs(m: &nalgebra::DMatrix<C>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
