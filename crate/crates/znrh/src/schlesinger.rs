//! Schlesinger matrices, the tau function and the Thomae formula.

use crate::curve::{Region, Side, ZnCurve};
use crate::error::{Error, Result};
use crate::numerics::{max_abs, richardson_derivative};
use crate::periods::{ray_integral, PeriodData};
use crate::rh::{sigma_n, u_sigma_u_inv, MonodromySet, RHSolution};
use crate::theta::{Characteristics, ThetaParams};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;
use rayon::prelude::*;
use std::f64::consts::PI;

fn zero() -> C {
    C::new(0.0, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ASource {
    ClosedForm,
    Residue,
}

#[derive(Debug, Clone)]
pub struct SchlesingerData {
    /// A_1 .. A_{2m+1}
    pub a: Vec<DMatrix<C>>,
    pub a_inf: DMatrix<C>,
    pub lambda0: C,
    pub source: ASource,
}

impl SchlesingerData {
    fn from_list(a: Vec<DMatrix<C>>, lambda0: C, source: ASource) -> Self {
        let n = a[0].nrows();
        let mut a_inf = DMatrix::from_element(n, n, zero());
        for x in &a {
            a_inf -= x;
        }
        SchlesingerData { a, a_inf, lambda0, source }
    }

    pub fn trace_residual(&self) -> f64 {
        self.a.iter().map(|x| x.trace().norm()).fold(0.0, f64::max)
    }

    /// |A_inf + sum A_k|
    pub fn sum_residual(&self) -> f64 {
        let mut s = self.a_inf.clone();
        for x in &self.a {
            s += x;
        }
        max_abs(&s)
    }

    /// Largest distance between the sorted spectrum of A_k and diag(sigma_N).
    pub fn eigen_residual(&self) -> f64 {
        let n = self.a_inf.nrows();
        let sig = sigma_n(n);
        let mut worst = 0.0f64;
        for x in &self.a {
            let ev = match nalgebra::Schur::new(x.clone()).eigenvalues() {
                Some(v) => v,
                None => return f64::INFINITY,
            };
            let mut ev: Vec<C> = ev.iter().copied().collect();
            ev.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
            for (e, s) in ev.iter().zip(sig.iter()) {
                worst = worst.max((e - s).norm());
            }
        }
        worst
    }

    pub fn max_difference(&self, other: &SchlesingerData) -> f64 {
        self.a.iter().zip(other.a.iter()).map(|(x, y)| max_abs(&(x - y))).fold(0.0, f64::max)
    }
}

/// A_k = (-1)^(k-1) U sigma_N U^{-1}, the constant solution for c = d = 1.
pub fn canonical_a(n: usize, k: usize) -> DMatrix<C> {
    let base = u_sigma_u_inv(n);
    if k % 2 == 1 {
        base
    } else {
        -base
    }
}

/// d/dlambda_k of log theta[ch](0) and of the gradient of log theta[ch](0).
struct ThetaConstantJet {
    value: C,
    grad_log: Vec<C>,
    d_log: C,
    d_grad_log: Vec<C>,
}

fn theta_constant_jet(tp: &ThetaParams, ch: &Characteristics, dpi: &DMatrix<C>) -> Result<ThetaConstantJet> {
    let g = tp.genus();
    let ev = tp.eval(&vec![zero(); g], ch, 3)?;
    let th = ev.value;
    let dth = tp.along_pi(&ev, dpi);
    let dgrad = tp.grad_along_pi(&ev, dpi);
    let grad_log: Vec<C> = ev.grad.iter().map(|x| x / th).collect();
    let d_grad_log = (0..g).map(|l| dgrad[l] / th - ev.grad[l] * dth / (th * th)).collect();
    Ok(ThetaConstantJet { value: th, grad_log, d_log: dth / th, d_grad_log })
}

/// d log theta[ch](Z) for a variation dZ of the argument and dPi of the period matrix.
fn dlog_theta(tp: &ThetaParams, ch: &Characteristics, z: &DVector<C>, dz: &DVector<C>, dpi: &DMatrix<C>) -> Result<(C, C)> {
    let ev = tp.eval(z.as_slice(), ch, 2)?;
    let mut d = tp.along_pi(&ev, dpi);
    for (gi, di) in ev.grad.iter().zip(dz.iter()) {
        d += gi * di;
    }
    Ok((ev.value, d / ev.value))
}

/// Schlesinger matrices from the closed formulas for the diagonal and
/// off-diagonal entries (heat equation plus Rauch variation).
pub fn a_matrices_closed(sol: &RHSolution) -> Result<SchlesingerData> {
    let pd = &sol.periods;
    let curve = &pd.curve;
    let (n, m) = (curve.n, curve.m);
    let g = curve.genus();
    let l0 = sol.lambda0;
    let tp = &sol.theta;
    let ch = &sol.chars;
    let zero_ch = Characteristics::zero(g);
    let raw0 = pd.abel_raw(l0, Side::Plus)?;
    let d0: Vec<C> = curve.diffs(l0);
    let du1 = curve.du_sheet1_from_diffs(l0, &d0, Side::Plus);
    let log_pq: C = (1..=curve.npoints())
        .map(|i| {
            let t = 1.0 / (l0 - curve.lambda(i));
            if i % 2 == 1 {
                t
            } else {
                -t
            }
        })
        .sum();
    let nn = n as f64;
    let coeff = |r: usize, s: usize| -> C {
        let mut acc = zero();
        for j in 0..n {
            let p = 2.0 * j as f64 - nn + 1.0;
            acc += C::from_polar(1.0, PI * (s as f64 - r as f64) * p / nn) * p;
        }
        acc / (2.0 * nn * nn)
    };
    let mut out = Vec::with_capacity(2 * m + 1);
    for k in 1..=2 * m + 1 {
        let lk = curve.lambda(k);
        let der = pd.derivative(k)?;
        let dpi = pd.rauch(k)?;
        let dnorm = &der.dnorm;
        let jet_e = theta_constant_jet(tp, ch, &dpi)?;
        let jet_0 = theta_constant_jet(tp, &zero_ch, &dpi)?;
        let draw0 = ray_integral(curve, l0, true, Some(k - 1), &pd.spec)?;
        // d du(l0)/d lambda_k on sheet 1
        let ddu1: Vec<C> = (0..g)
            .map(|i| {
                let s = i / m;
                du1[i] * curve.du_exponent(k, s) / (l0 - lk)
            })
            .collect();
        let mut a = DMatrix::from_element(n, n, zero());
        let v: Vec<DVector<C>> = (1..=n).map(|s| pd.normalize(&raw0, s)).collect();
        let dv: Vec<DVector<C>> = (1..=n)
            .map(|s| {
                let mut r = raw0.clone();
                let mut dr = draw0.clone();
                curve.apply_sheet_phase(r.as_mut_slice(), s);
                curve.apply_sheet_phase(dr.as_mut_slice(), s);
                dnorm * r + &pd.norm * dr
            })
            .collect();
        let pref = (l0 - lk) * (l0 - lk);
        for s in 1..=n {
            let mut w = DVector::from_vec(du1.clone());
            let mut dw = DVector::from_vec(ddu1.clone());
            curve.apply_sheet_phase(w.as_mut_slice(), s);
            curve.apply_sheet_phase(dw.as_mut_slice(), s);
            let wn = &pd.norm * &w;
            let dwn = dnorm * &w + &pd.norm * &dw;
            let mut acc = zero();
            for l in 0..g {
                acc += jet_e.d_grad_log[l] * wn[l] + jet_e.grad_log[l] * dwn[l];
            }
            a[(s - 1, s - 1)] = pref * acc;
        }
        let d_log_pq = if k % 2 == 1 { 1.0 / ((l0 - lk) * (l0 - lk)) } else { -1.0 / ((l0 - lk) * (l0 - lk)) };
        for r in 1..=n {
            for s in 1..=n {
                if r == s {
                    continue;
                }
                let z = &v[s - 1] - &v[r - 1];
                let dz = &dv[s - 1] - &dv[r - 1];
                let (te, dle) = dlog_theta(tp, ch, &z, &dz, &dpi)?;
                let (t0, dl0) = dlog_theta(tp, &zero_ch, &z, &dz, &dpi)?;
                if t0.norm() < 1e-13 * jet_0.value.norm() {
                    return Err(Error::ThetaDenominatorZero);
                }
                let ratio = te / t0 * jet_0.value / jet_e.value;
                let dratio = ratio * (dle - dl0 + jet_0.d_log - jet_e.d_log);
                a[(r - 1, s - 1)] = pref * coeff(r, s) * (d_log_pq * ratio + log_pq * dratio);
            }
        }
        out.push(a);
    }
    Ok(SchlesingerData::from_list(out, l0, ASource::ClosedForm))
}

/// Quadrature nodes on a circle around lambda_k, rotated away from the contour.
/// Returns (nodes, dlambda weights with the 1/(2 pi i) factor) and the
/// smallest node distance to the contour.
pub fn residue_nodes(curve: &ZnCurve, k: usize, count: usize) -> (Vec<C>, Vec<C>, f64) {
    let lk = curve.lambda(k);
    let r = curve.min_gap() / 8.0;
    let clearance = |off: f64| -> f64 {
        (0..count)
            .map(|i| {
                let p = lk + C::from_polar(r, 2.0 * PI * (i as f64 + off) / count as f64);
                curve.height_above_contour(p).abs()
            })
            .fold(f64::INFINITY, f64::min)
    };
    let mut best = (0.0, -1.0);
    for t in 0..32 {
        let off = t as f64 / 32.0;
        let c = clearance(off);
        if c > best.1 {
            best = (off, c);
        }
    }
    let mut nodes = Vec::with_capacity(count);
    let mut w = Vec::with_capacity(count);
    for i in 0..count {
        let dz = C::from_polar(r, 2.0 * PI * (i as f64 + best.0) / count as f64);
        nodes.push(lk + dz);
        w.push(dz / count as f64);
    }
    (nodes, w, best.1)
}

/// Y'(l) Y(l)^{-1} by Richardson-extrapolated central differences.
pub fn log_derivative_fd(sol: &RHSolution, l: C, h: f64) -> Result<DMatrix<C>> {
    let n = sol.n();
    let side = match sol.curve().region(l) {
        Region::Plus => Side::Plus,
        Region::Minus => Side::Minus,
        Region::Contour(_) => return Err(Error::CutAmbiguity),
    };
    if sol.curve().height_above_contour(l).abs() <= 1.01 * h {
        return Err(Error::StepUnderflow);
    }
    let err = std::cell::RefCell::new(None);
    let f = |x: C| -> Vec<C> {
        match sol.y(x, side) {
            Ok(y) => y.iter().copied().collect(),
            Err(e) => {
                *err.borrow_mut() = Some(e);
                vec![zero(); n * n]
            }
        }
    };
    let d = richardson_derivative(f, l, C::new(1.0, 0.0), h);
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    let dy = DMatrix::from_column_slice(n, n, &d);
    let y = sol.y(l, side)?;
    let yi = y.try_inverse().ok_or(Error::ThetaDenominatorZero)?;
    Ok(dy * yi)
}

const RESIDUE_NODES: usize = 48;

fn residue_samples(sol: &RHSolution, k: usize) -> Result<(Vec<DMatrix<C>>, Vec<C>)> {
    let (nodes, w, clearance) = residue_nodes(sol.curve(), k, RESIDUE_NODES);
    let r = sol.curve().min_gap() / 8.0;
    let h = (0.01 * r).min(0.5 * clearance);
    if h < 1e-9 * r {
        return Err(Error::StepUnderflow);
    }
    let vals: Result<Vec<DMatrix<C>>> = nodes.par_iter().map(|x| log_derivative_fd(sol, *x, h)).collect();
    Ok((vals?, w))
}

/// A_k = Res Y' Y^{-1} by contour quadrature (independent oracle).
pub fn a_matrices_residue(sol: &RHSolution) -> Result<SchlesingerData> {
    let m = sol.curve().m;
    let n = sol.n();
    let mut out = Vec::new();
    for k in 1..=2 * m + 1 {
        let (vals, w) = residue_samples(sol, k)?;
        let mut acc = DMatrix::from_element(n, n, zero());
        for (v, wi) in vals.iter().zip(w.iter()) {
            acc += v * *wi;
        }
        out.push(acc);
    }
    Ok(SchlesingerData::from_list(out, sol.lambda0, ASource::Residue))
}

/// d log tau / d lambda_k = (1/2) Res Tr (Y' Y^{-1})^2 by contour quadrature.
pub fn tau_log_derivatives_residue(sol: &RHSolution) -> Result<Vec<C>> {
    let m = sol.curve().m;
    let mut out = Vec::new();
    for k in 1..=2 * m + 1 {
        let (vals, w) = residue_samples(sol, k)?;
        let mut acc = zero();
        for (v, wi) in vals.iter().zip(w.iter()) {
            acc += (v * v).trace() * *wi;
        }
        out.push(acc * 0.5);
    }
    Ok(out)
}

/// Right sides of the Schlesinger system; `with_l0` drops the lambda0 terms when false.
pub fn schlesinger_rhs(a: &[DMatrix<C>], lambdas: &[C], l0: C, j: usize, k: usize, with_l0: bool) -> DMatrix<C> {
    let comm = |x: &DMatrix<C>, y: &DMatrix<C>| x * y - y * x;
    let n = a[0].nrows();
    if j != k {
        let c = comm(&a[k], &a[j]);
        let mut r = &c / (lambdas[k] - lambdas[j]);
        if with_l0 {
            r -= &c / (l0 - lambdas[j]);
        }
        r
    } else {
        let mut r = DMatrix::from_element(n, n, zero());
        for i in 0..a.len() {
            if i != k {
                r -= comm(&a[k], &a[i]) / (lambdas[k] - lambdas[i]);
            }
        }
        r
    }
}

fn solve_at(curve: &ZnCurve, ch: &Characteristics, l0: C, ms: &MonodromySet, lambdas: &[C]) -> Result<SchlesingerData> {
    let cv = ZnCurve::with_ordering(curve.n, lambdas)?;
    let pd = PeriodData::new(&cv)?;
    let sol = RHSolution::new(pd, ch.clone(), l0, Some(ms.clone()))?;
    a_matrices_closed(&sol)
}

#[derive(Debug, Clone)]
pub struct SchlesingerResidual {
    /// max over j, k of |dA_k/dlambda_j - rhs|
    pub residual: f64,
    /// same with the lambda0 terms omitted (negative control)
    pub without_l0_terms: f64,
}

/// Finite-difference check of the Schlesinger system over re-solved problems.
pub fn schlesinger_residual(sol: &RHSolution, h: f64) -> Result<SchlesingerResidual> {
    let curve = sol.curve().clone();
    let ms = sol.monodromy.clone().ok_or_else(|| Error::Validation("solution has no monodromy data".into()))?;
    let np = curve.npoints();
    let base = a_matrices_closed(sol)?;
    let lambdas = curve.lambdas.clone();
    // configurations lambda_j + t h for t in {-2,-1,1,2}
    let jobs: Vec<(usize, f64)> = (0..np).flat_map(|j| [-2.0, -1.0, 1.0, 2.0].into_iter().map(move |t| (j, t))).collect();
    let solved: Result<Vec<SchlesingerData>> = jobs
        .par_iter()
        .map(|(j, t)| {
            let mut l = lambdas.clone();
            l[*j] += h * t;
            solve_at(&curve, &sol.chars, sol.lambda0, &ms, &l)
        })
        .collect();
    let solved = solved?;
    let mut res = 0.0f64;
    let mut res_ctrl = 0.0f64;
    for j in 0..np {
        let s = &solved[4 * j..4 * j + 4];
        for k in 0..np {
            let e = C::new(8.0, 0.0);
            let d = (&s[0].a[k] - &s[1].a[k] * e + &s[2].a[k] * e - &s[3].a[k]) / C::new(12.0 * h, 0.0);
            let rhs = schlesinger_rhs(&base.a, &lambdas, sol.lambda0, j, k, true);
            let rhs_ctrl = schlesinger_rhs(&base.a, &lambdas, sol.lambda0, j, k, false);
            res = res.max(max_abs(&(&d - rhs)));
            res_ctrl = res_ctrl.max(max_abs(&(&d - rhs_ctrl)));
        }
    }
    Ok(SchlesingerResidual { residual: res, without_l0_terms: res_ctrl })
}

/// Exponents of the tau product factor.
pub fn tau_exponents(n: usize) -> (f64, f64) {
    let nn = n as f64;
    ((nn * nn - 1.0) / (6.0 * nn), (nn * nn - 1.0) / (12.0 * nn))
}

fn pair_products(curve: &ZnCurve) -> (Vec<(usize, usize)>, Vec<(usize, usize)>, Vec<(usize, usize)>) {
    let np = curve.npoints();
    let mut odd = Vec::new();
    let mut even = Vec::new();
    let mut all = Vec::new();
    for i in 1..=np {
        for j in i + 1..=np {
            all.push((i, j));
            if i % 2 == 1 && j % 2 == 1 {
                odd.push((i, j));
            }
            if i % 2 == 0 && j % 2 == 0 {
                even.push((i, j));
            }
        }
    }
    (odd, even, all)
}

/// Product of (lambda_i - lambda_j)^e over pairs, each factor on the principal branch.
fn pair_power(curve: &ZnCurve, pairs: &[(usize, usize)], e: f64) -> C {
    pairs.iter().map(|(i, j)| (curve.lambda(*i) - curve.lambda(*j)).powf(e)).product()
}

fn pair_log_derivative(curve: &ZnCurve, pairs: &[(usize, usize)], e: f64, k: usize) -> C {
    let mut s = zero();
    for (i, j) in pairs {
        let d = curve.lambda(*i) - curve.lambda(*j);
        if *i == k {
            s += e / d;
        } else if *j == k {
            s -= e / d;
        }
    }
    s
}

#[derive(Debug, Clone)]
pub struct TauReport {
    pub value: C,
    pub theta_ratio: C,
    pub product_factor: C,
    /// d log tau / d lambda_k, k = 1..2m+1, from the closed formula
    pub log_derivatives: Vec<C>,
}

pub fn tau(sol: &RHSolution) -> Result<TauReport> {
    let curve = sol.curve();
    let (a, b) = tau_exponents(curve.n);
    let (odd, even, all) = pair_products(curve);
    let theta_ratio = sol.theta_char_zero() / sol.theta_zero();
    let product_factor = pair_power(curve, &odd, a) * pair_power(curve, &even, a) / pair_power(curve, &all, b);
    let g = curve.genus();
    let zero_ch = Characteristics::zero(g);
    let mut logd = Vec::new();
    for k in 1..=curve.npoints() {
        let dpi = sol.periods.rauch(k)?;
        let ev_e = sol.theta.eval(&vec![zero(); g], &sol.chars, 2)?;
        let ev_0 = sol.theta.eval(&vec![zero(); g], &zero_ch, 2)?;
        let d = sol.theta.along_pi(&ev_e, &dpi) / ev_e.value - sol.theta.along_pi(&ev_0, &dpi) / ev_0.value
            + pair_log_derivative(curve, &odd, a, k)
            + pair_log_derivative(curve, &even, a, k)
            - pair_log_derivative(curve, &all, b, k);
        logd.push(d);
    }
    Ok(TauReport { value: theta_ratio * product_factor, theta_ratio, product_factor, log_derivatives: logd })
}

/// The second form of tau with theta(0) replaced through the Thomae formula.
/// Returns (tau2, xi) with tau = xi tau2; xi^8 = 1 when the Thomae formula holds.
pub fn tau_thomae_form(sol: &RHSolution) -> Result<(C, C)> {
    let curve = sol.curve();
    let (n, m) = (curve.n as f64, curve.m as f64);
    let (_, b) = tau_exponents(curve.n);
    let c = (n - 1.0) * (n - 2.0) / (12.0 * n);
    let (odd, even, all) = pair_products(curve);
    let det: C = sol.periods.a_blocks.iter().map(|x| x.determinant()).product();
    let t2 = C::new(0.0, 2.0 * PI).powf((n - 1.0) * m / 2.0) * sol.theta_char_zero() / det.sqrt()
        / pair_power(curve, &all, b)
        / pair_power(curve, &odd, c)
        / pair_power(curve, &even, c);
    let t1 = tau(sol)?.value;
    Ok((t2, t1 / t2))
}

#[derive(Debug, Clone)]
pub struct ThomaeReport {
    pub lhs: C,
    pub rhs: C,
    pub relative_error: f64,
    /// relative error of the moduli only
    pub modulus_error: f64,
}

/// theta(0)^8 against prod det A_s^4 / (2 pi i)^(4(N-1)m) times the branch point products.
pub fn thomae_check(pd: &PeriodData) -> Result<ThomaeReport> {
    let curve = &pd.curve;
    let (n, m) = (curve.n, curve.m);
    let tp = ThetaParams::new(&pd.pi)?;
    let g = curve.genus();
    let th = tp.theta0(&vec![zero(); g])?;
    let lhs = th.powi(8);
    let (odd, even, _) = pair_products(curve);
    let det: C = pd.a_blocks.iter().map(|x| x.determinant().powi(4)).product();
    let e = 2.0 * (n as f64 - 1.0);
    let mut rhs = det / C::new(0.0, 2.0 * PI).powi(4 * ((n - 1) * m) as i32);
    for (i, j) in odd.iter().chain(even.iter()) {
        rhs *= (curve.lambda(*i) - curve.lambda(*j)).powf(e);
    }
    Ok(ThomaeReport {
        lhs,
        rhs,
        relative_error: (lhs - rhs).norm() / lhs.norm(),
        modulus_error: (lhs.norm() - rhs.norm()).abs() / lhs.norm(),
    })
}

/// Characteristics [delta; eps] with eps + Pi delta = x (real characteristics).
pub fn chars_from_vector(pi: &DMatrix<C>, x: &DVector<C>) -> Result<Characteristics> {
    let g = pi.nrows();
    let y = pi.map(|z| z.im);
    let yi = y.try_inverse().ok_or(Error::SingularCharacteristics)?;
    let im = DVector::from_iterator(g, x.iter().map(|z| z.im));
    let delta = yi * im;
    let mut eps = Vec::with_capacity(g);
    for i in 0..g {
        let mut s = x[i];
        for j in 0..g {
            s -= pi[(i, j)] * delta[j];
        }
        eps.push(C::new(s.re, 0.0));
    }
    Ok(Characteristics {
        eps,
        delta: delta.iter().map(|d| C::new(*d, 0.0)).collect(),
        provenance: crate::theta::Provenance::Manual,
    })
}

/// Characteristic of K_inf - sum_{i<g} v(P_i) for points on the curve; theta vanishes there.
pub fn riemann_vanishing_chars(pd: &PeriodData, points: &[(C, usize)]) -> Result<Characteristics> {
    let mut x = pd.riemann_constants()?;
    for (l, s) in points {
        x -= pd.abel(*l, *s, Side::Auto)?;
    }
    chars_from_vector(&pd.pi, &x)
}

#[derive(Debug, Clone)]
pub struct MalgrangeSample {
    pub chars: Characteristics,
    /// theta[eps, delta](0) / theta(0)
    pub theta_ratio: C,
    pub tau: Option<C>,
}

/// theta[eps, delta](0)/theta(0) and tau over a list of characteristics.
pub fn malgrange_probe(pd: &PeriodData, grid: &[Characteristics]) -> Result<Vec<MalgrangeSample>> {
    let tp = ThetaParams::new(&pd.pi)?;
    let g = pd.genus();
    let z = vec![zero(); g];
    let t0 = tp.theta0(&z)?;
    let curve = &pd.curve;
    let (a, b) = tau_exponents(curve.n);
    let (odd, even, all) = pair_products(curve);
    let pf = pair_power(curve, &odd, a) * pair_power(curve, &even, a) / pair_power(curve, &all, b);
    grid.iter()
        .map(|ch| {
            let r = tp.theta(&z, ch)? / t0;
            Ok(MalgrangeSample { chars: ch.clone(), theta_ratio: r, tau: Some(r * pf) })
        })
        .collect()
}

/// The product factor of tau on its own (theta ratio excluded).
pub fn tau_product_factor(curve: &ZnCurve) -> C {
    let (a, b) = tau_exponents(curve.n);
    let (odd, even, all) = pair_products(curve);
    pair_power(curve, &odd, a) * pair_power(curve, &even, a) / pair_power(curve, &all, b)
}
