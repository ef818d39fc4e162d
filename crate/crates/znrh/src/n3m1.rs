//! The trigonal curve y^3 = (l - l1)(l - l3)(l - l2)^2: elliptic periods,
//! reduction of the genus two theta function to Jacobi thetas, the modular
//! parameter t(T) and the Jacobi form of the RH solution and tau function.

use crate::curve::Side;
use crate::error::{Error, Result};
use crate::numerics::hyp2f1;
use crate::rh::RHSolution;
use crate::theta::{jacobi_theta, Characteristics, ThetaParams};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;
use std::f64::consts::PI;

fn ci(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn rho() -> C {
    C::from_polar(1.0, 2.0 * PI / 3.0)
}

fn i_over_sqrt3() -> C {
    ci(0.0, 1.0 / 3f64.sqrt())
}

#[derive(Debug, Clone)]
pub struct EllipticData {
    pub lambdas: [C; 3],
    /// the modular parameter T with Pi = [[2T, T], [T, 2T]]
    pub big_t: C,
    /// cross ratio (l2 - l1)/(l3 - l1)
    pub t: C,
    pub p: C,
    pub k2_plus: C,
    pub k2_minus: C,
    pub a1: C,
    pub a2: C,
    pub b1: C,
    pub b2: C,
    pub pi: DMatrix<C>,
}

impl EllipticData {
    pub fn cube_root_span(&self) -> C {
        (self.lambdas[2] - self.lambdas[0]).powf(1.0 / 3.0)
    }

    /// The alpha and beta period matrices in the block form
    /// [[A1, rho^2 A1], [A2, rho A2]] and [[B1, -rho B1], [B2, -rho^2 B2]].
    pub fn period_blocks(&self) -> (DMatrix<C>, DMatrix<C>) {
        let r = rho();
        let a = DMatrix::from_row_slice(2, 2, &[self.a1, r * r * self.a1, self.a2, r * self.a2]);
        let b = DMatrix::from_row_slice(2, 2, &[self.b1, -r * self.b1, self.b2, -r * r * self.b2]);
        (a, b)
    }
}

pub fn pi_of_t(big_t: C) -> DMatrix<C> {
    DMatrix::from_row_slice(2, 2, &[big_t * 2.0, big_t, big_t, big_t * 2.0])
}

/// T(t) = (i/sqrt 3) F(1/3,2/3;1;1-t) / F(1/3,2/3;1;t).
pub fn big_t_of_t(t: C) -> Result<C> {
    let f0 = hyp2f1(1.0 / 3.0, 2.0 / 3.0, 1.0, t)?;
    let f1 = hyp2f1(1.0 / 3.0, 2.0 / 3.0, 1.0, ci(1.0, 0.0) - t)?;
    Ok(i_over_sqrt3() * f1 / f0)
}

pub fn periods_n3m1(l1: C, l2: C, l3: C) -> Result<EllipticData> {
    let tol = 1e-12 * (l1.norm() + l2.norm() + l3.norm()).max(1.0);
    if (l1 - l2).norm() < tol || (l2 - l3).norm() < tol || (l1 - l3).norm() < tol {
        return Err(Error::DuplicatePoints);
    }
    let span = l3 - l1;
    let t = (l2 - l1) / span;
    let cr = span.powf(1.0 / 3.0);
    let f0 = hyp2f1(1.0 / 3.0, 2.0 / 3.0, 1.0, t)?;
    let f1 = hyp2f1(1.0 / 3.0, 2.0 / 3.0, 1.0, ci(1.0, 0.0) - t)?;
    let r = rho();
    let a1 = (ci(1.0, 0.0) - r * r) * f0 * (2.0 * PI / 3f64.sqrt()) / cr;
    let a2 = -r * a1 / cr;
    let b1 = ci(0.0, 2.0 * PI) * f1 / cr;
    let b2 = b1 / cr;
    let big_t = b1 / (a1 * (ci(1.0, 0.0) - r));
    if !(big_t.im > 0.0) {
        return Err(Error::DomainError(format!("Im T = {} is not positive", big_t.im)));
    }
    let pm = p_and_moduli(big_t)?;
    Ok(EllipticData {
        lambdas: [l1, l2, l3],
        big_t,
        t,
        p: pm.p,
        k2_plus: pm.k2_plus,
        k2_minus: pm.k2_minus,
        a1,
        a2,
        b1,
        b2,
        pi: pi_of_t(big_t),
    })
}

fn theta3_const(tau: C) -> Result<C> {
    jacobi_theta(3, ci(0.0, 0.0), tau)
}

fn check_upper(big_t: C) -> Result<()> {
    if big_t.im > 0.0 {
        Ok(())
    } else {
        Err(Error::DomainError(format!("Im T = {} is not positive", big_t.im)))
    }
}

/// t = 27 a (a - b)^2 / (3a + b)^3 with a = theta_3^4(0;3T), b = theta_3^4(0;T).
pub fn t_of_big_t(big_t: C) -> Result<C> {
    check_upper(big_t)?;
    let a = theta3_const(big_t * 3.0)?.powi(4);
    let b = theta3_const(big_t)?.powi(4);
    Ok(a * (a - b).powi(2) * 27.0 / (a * 3.0 + b).powi(3))
}

/// t = 1 - (theta[0 0; 2/3 1/3](0) / theta(0))^3 on Pi(T).
pub fn t_from_third_characteristic(big_t: C) -> Result<C> {
    check_upper(big_t)?;
    let tp = ThetaParams::new(&pi_of_t(big_t))?;
    let z = [ci(0.0, 0.0); 2];
    let ch = Characteristics::real(&[2.0 / 3.0, 1.0 / 3.0], &[0.0, 0.0]);
    let r = tp.theta(&z, &ch)? / tp.theta0(&z)?;
    Ok(ci(1.0, 0.0) - r.powi(3))
}

#[derive(Debug, Clone, Copy)]
pub struct PModuli {
    pub p: C,
    pub k2_plus: C,
    pub k2_minus: C,
    /// t recomputed from p through the algebraic relation
    pub t_from_p: C,
}

pub fn k2_from_p(p: C) -> (C, C) {
    let one = ci(1.0, 0.0);
    let minus = (p + one).powi(3) * (ci(3.0, 0.0) - p) / (p * 16.0);
    let plus = (p + one) * (ci(3.0, 0.0) - p).powi(3) / (p.powi(3) * 16.0);
    (plus, minus)
}

pub fn t_from_p(p: C) -> C {
    let p2 = p * p;
    p2 * (p2 - 9.0).powi(2) / (p2 + 3.0).powi(3)
}

pub fn p_and_moduli(big_t: C) -> Result<PModuli> {
    check_upper(big_t)?;
    let p = theta3_const(big_t * 3.0)?.powi(2) * 3.0 / theta3_const(big_t)?.powi(2);
    let (k2_plus, k2_minus) = k2_from_p(p);
    Ok(PModuli { p, k2_plus, k2_minus, t_from_p: t_from_p(p) })
}

/// Residual of the degree three modular equation sqrt(k l) + sqrt(k' l') = 1
/// linking the moduli of the two isogenous elliptic curves.
pub fn modular_equation_residual(k2_plus: C, k2_minus: C) -> f64 {
    let one = ci(1.0, 0.0);
    let kk = (k2_plus * k2_minus).sqrt().sqrt();
    let kp = ((one - k2_plus) * (one - k2_minus)).sqrt().sqrt();
    (kk + kp - one).norm()
}

fn cubic_roots(c3: C, c2: C, c1: C, c0: C) -> Vec<C> {
    // eigenvalues of the companion matrix
    let m = DMatrix::from_row_slice(
        3,
        3,
        &[-c2 / c3, -c1 / c3, -c0 / c3, ci(1.0, 0.0), ci(0.0, 0.0), ci(0.0, 0.0), ci(0.0, 0.0), ci(1.0, 0.0), ci(0.0, 0.0)],
    );
    m.schur().eigenvalues().map(|v| v.iter().copied().collect()).unwrap_or_default()
}

/// The six roots p of t(p) = t.
pub fn p_roots(t: C) -> Vec<C> {
    // s (s - 9)^2 - t (s + 3)^3 with s = p^2
    let one = ci(1.0, 0.0);
    let c3 = one - t;
    let c2 = ci(-18.0, 0.0) - t * 9.0;
    let c1 = ci(81.0, 0.0) - t * 27.0;
    let c0 = -t * 27.0;
    let mut out = Vec::new();
    for s in cubic_roots(c3, c2, c1, c0) {
        let r = s.sqrt();
        out.push(r);
        out.push(-r);
    }
    out
}

/// The root of t(p) = t on the branch of p(T(t)).
pub fn select_p(t: C) -> Result<C> {
    let reference = p_and_moduli(big_t_of_t(t)?)?.p;
    let best = p_roots(t)
        .into_iter()
        .min_by(|a, b| (a - reference).norm().total_cmp(&(b - reference).norm()))
        .ok_or_else(|| Error::BranchSelection("no roots".into()))?;
    if (best - reference).norm() > 1e-6 * reference.norm() {
        return Err(Error::BranchSelection(format!("closest root {best} is far from {reference}")));
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy)]
pub struct GoursatReport {
    pub lhs: C,
    pub rhs: C,
    pub residual: f64,
    pub p: C,
    /// |t(p) - t| for the selected root
    pub root_residual: f64,
}

/// (2/sqrt 3) F(1/3,2/3;1;t) against (1/2) (p^2+3)/p^(3/2) F(1/2,1/2;1;k_+^2).
pub fn goursat_check(t: C) -> Result<GoursatReport> {
    let p = select_p(t)?;
    let (k2_plus, _) = k2_from_p(p);
    let lhs = hyp2f1(1.0 / 3.0, 2.0 / 3.0, 1.0, t)? * (2.0 / 3f64.sqrt());
    let rhs = (p * p + 3.0) / p.powf(1.5) * hyp2f1(0.5, 0.5, 1.0, k2_plus)? * 0.5;
    Ok(GoursatReport { lhs, rhs, residual: (lhs - rhs).norm() / lhs.norm(), p, root_residual: (t_from_p(p) - t).norm() })
}

/// The covering coordinates (xi, w) onto the genus two hyperelliptic curve.
pub fn cover_coordinates(lambdas: &[C; 3], l: C, y: C) -> (C, C) {
    let [l1, l2, l3] = *lambdas;
    let xi = y / (l - l2);
    let w = (l * l - l * l2 * 2.0 + l2 * (l1 + l3) - l1 * l3) / (l - l2);
    (xi, w)
}

/// |w^2 - (xi^6 + 2(l1 + l3 - 2 l2) xi^3 + (l1 - l3)^2)| relative to |w|^2.
pub fn cover_residual(lambdas: &[C; 3], l: C, y: C) -> f64 {
    let [l1, l2, l3] = *lambdas;
    let (xi, w) = cover_coordinates(lambdas, l, y);
    let rhs = xi.powi(6) + (l1 + l3 - l2 * 2.0) * xi.powi(3) * 2.0 + (l1 - l3).powi(2);
    (w * w - rhs).norm() / (w * w).norm().max(1.0)
}

/// beta periods of dv_+ = dv_1 - 2 dv_2 and dv_- = dv_1 read off a period matrix.
pub fn isogeny_periods(pi: &DMatrix<C>) -> (C, C) {
    // beta_+ = -phi_+(beta_2) and beta_- = phi_-(beta_2)
    let plus = -(pi[(0, 1)] - pi[(1, 1)] * 2.0);
    let minus = pi[(0, 1)];
    (plus, minus)
}

/// Pushforwards (w_+, w_-) of a genus two Abel vector.
pub fn pushforward(z: &DVector<C>) -> (C, C) {
    (z[0] - z[1] * 2.0, z[0])
}

/// The sum theta_3(e1;6T) theta_3(e2;2T) + theta_2(e1;6T) theta_2(e2;2T).
pub fn jacobi_pair_sum(e1: C, e2: C, big_t: C) -> Result<C> {
    let t6 = big_t * 6.0;
    let t2 = big_t * 2.0;
    Ok(jacobi_theta(3, e1, t6)? * jacobi_theta(3, e2, t2)? + jacobi_theta(2, e1, t6)? * jacobi_theta(2, e2, t2)?)
}

/// theta[eps, delta](z; Pi(T)) through Jacobi theta functions.
pub fn decompose_theta(z: &[C], ch: &Characteristics, big_t: C) -> Result<C> {
    check_upper(big_t)?;
    if z.len() != 2 || ch.genus() != 2 {
        return Err(Error::Validation("decomposition needs genus two data".into()));
    }
    let (e, d) = (&ch.eps, &ch.delta);
    let pi = pi_of_t(big_t);
    let mut quad = ci(0.0, 0.0);
    let mut lin = ci(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            quad += d[i] * pi[(i, j)] * d[j];
        }
        lin += (z[i] + e[i]) * d[i];
    }
    let pre = (ci(0.0, PI) * quad + ci(0.0, 2.0 * PI) * lin).exp();
    let e1 = z[0] + z[1] + e[0] + e[1] + big_t * 3.0 * (d[0] + d[1]);
    let e2 = z[0] - z[1] + e[0] - e[1] + big_t * (d[0] - d[1]);
    Ok(pre * jacobi_pair_sum(e1, e2, big_t)?)
}

/// Unimodular change of basis M = [[1, -1], [0, -1]] (M^2 = 1) preserving
/// Pi(T); it turns (z1 + z2, z1 - z2) into (w_+, w_-).
pub fn reduction_basis() -> [[f64; 2]; 2] {
    [[1.0, -1.0], [0.0, -1.0]]
}

/// Characteristics in the reduced basis: eps' = M eps, delta' = M^T delta.
pub fn reduced_characteristics(ch: &Characteristics) -> Characteristics {
    let m = reduction_basis();
    let (e, d) = (&ch.eps, &ch.delta);
    let eps = vec![e[0] * m[0][0] + e[1] * m[0][1], e[0] * m[1][0] + e[1] * m[1][1]];
    let delta = vec![d[0] * m[0][0] + d[1] * m[1][0], d[0] * m[0][1] + d[1] * m[1][1]];
    Characteristics { eps, delta, provenance: ch.provenance }
}

/// theta[ch](z) / theta(z) in Jacobi form, z given through the pushforwards.
fn jacobi_ratio(w_plus: C, w_minus: C, ch: &Characteristics, big_t: C) -> Result<C> {
    let r = reduced_characteristics(ch);
    let (e, d) = (&r.eps, &r.delta);
    // <z, delta> is invariant under the change of basis
    let z = [w_minus, (w_minus - w_plus) * 0.5];
    let lin: C = z[0] * ch.delta[0] + z[1] * ch.delta[1];
    let num = jacobi_pair_sum(
        w_plus + e[0] + e[1] + big_t * 3.0 * (d[0] + d[1]),
        w_minus + e[0] - e[1] + big_t * (d[0] - d[1]),
        big_t,
    )?;
    let den = jacobi_pair_sum(w_plus, w_minus, big_t)?;
    if den.norm() < 1e-300 {
        return Err(Error::ThetaDenominatorZero);
    }
    Ok((ci(0.0, 2.0 * PI) * lin).exp() * num / den)
}

/// Y(l) assembled from Jacobi theta functions of the two isogenous elliptic
/// curves, with the Abel differences taken from the genus two solution.
pub fn y_jacobi(sol: &RHSolution, big_t: C, l: C, side: Side) -> Result<DMatrix<C>> {
    if sol.n() != 3 || sol.curve().m != 1 {
        return Err(Error::Validation("the Jacobi form needs N = 3, m = 1".into()));
    }
    let x = sol.x(l, side)?;
    let s = match side {
        Side::Auto => match sol.curve().region(l) {
            crate::curve::Region::Minus => Side::Minus,
            crate::curve::Region::Plus => Side::Plus,
            crate::curve::Region::Contour(_) => return Err(Error::CutAmbiguity),
        },
        other => other,
    };
    let raw = sol.periods.abel_raw(l, s)?;
    let diffs = sol.abel_diffs(&raw);
    let norm = jacobi_ratio(ci(0.0, 0.0), ci(0.0, 0.0), &sol.chars, big_t)?;
    let mut y = x.clone();
    for r in 0..3 {
        for c in 0..3 {
            let (wp, wm) = pushforward(&diffs[r][c]);
            y[(r, c)] = x[(r, c)] * jacobi_ratio(wp, wm, &sol.chars, big_t)? / norm;
        }
    }
    Ok(y)
}

#[derive(Debug, Clone, Copy)]
pub struct TauN3M1 {
    pub value: C,
    pub prefactor: C,
    pub theta_ratio: C,
}

/// tau(l1, l2, l3) = ((l1-l3)/((l1-l2)(l2-l3)))^(2/9) exp(2 pi i [T q(delta) + <eps, delta>])
/// times the ratio of Jacobi theta sums, q(delta) = delta1^2 + delta1 delta2 + delta2^2.
pub fn tau_n3m1(lambdas: &[C; 3], c: &[C; 2], d: &[C; 2]) -> Result<TauN3M1> {
    for (i, x) in c.iter().chain(d.iter()).enumerate() {
        if x.norm() == 0.0 {
            return Err(Error::ZeroConstant(i + 1));
        }
    }
    let [l1, l2, l3] = *lambdas;
    let ed = periods_n3m1(l1, l2, l3)?;
    let big_t = ed.big_t;
    let log2 = |x: C| x.ln() / ci(0.0, 2.0 * PI);
    let eps = [log2(c[0]), log2(c[1])];
    let delta = [log2(d[0]), log2(d[1])];
    let quad = delta[0] * delta[0] + delta[0] * delta[1] + delta[1] * delta[1];
    let lin = eps[0] * delta[0] + eps[1] * delta[1];
    let num = jacobi_pair_sum(
        eps[0] + eps[1] + big_t * 3.0 * (delta[0] + delta[1]),
        eps[0] - eps[1] + big_t * (delta[0] - delta[1]),
        big_t,
    )?;
    let den = jacobi_pair_sum(ci(0.0, 0.0), ci(0.0, 0.0), big_t)?;
    let theta_ratio = (ci(0.0, 2.0 * PI) * (big_t * quad + lin)).exp() * num / den;
    let prefactor = ((l1 - l3) / ((l1 - l2) * (l2 - l3))).powf(2.0 / 9.0);
    Ok(TauN3M1 { value: prefactor * theta_ratio, prefactor, theta_ratio })
}

#[derive(Debug, Clone, Copy)]
pub struct HalphenReport {
    pub t: C,
    pub omega: [C; 3],
    /// max over the three equations of |lhs - rhs| / max(1, |lhs|)
    pub halphen_residual: f64,
    pub schwarzian_residual: f64,
    pub r_term: C,
}

/// Derivatives of t(T) up to order 3 by the trapezoidal Cauchy formula on a circle of radius h.
fn t_derivatives(big_t: C, h: f64) -> Result<[C; 4]> {
    let nodes = 96;
    let mut d = [ci(0.0, 0.0); 4];
    for j in 0..nodes {
        let u = C::from_polar(1.0, 2.0 * PI * j as f64 / nodes as f64);
        let f = t_of_big_t(big_t + u * h)?;
        let mut un = ci(1.0, 0.0);
        for dk in d.iter_mut() {
            *dk += f / un;
            un *= u * h;
        }
    }
    let mut fact = 1.0;
    for (k, dk) in d.iter_mut().enumerate() {
        if k > 0 {
            fact *= k as f64;
        }
        *dk *= fact / nodes as f64;
    }
    Ok(d)
}

/// The general Halphen system and the Schwarzian equation for t(T) with
/// exponent differences (alpha, beta, gamma); the curve has (1/3, 0, 0).
pub fn halphen_check(big_t: C, h: f64, params: (f64, f64, f64)) -> Result<HalphenReport> {
    check_upper(big_t)?;
    if !(h > 1e-6) {
        return Err(Error::StepUnderflow);
    }
    if h >= 0.5 * big_t.im {
        return Err(Error::DomainError("derivative radius reaches the real axis".into()));
    }
    let [t, t1, t2, t3] = t_derivatives(big_t, h)?;
    let one = ci(1.0, 0.0);
    // log derivatives of t1, t and t - 1 along with their derivatives
    let l1 = t2 / t1;
    let l1p = t3 / t1 - l1 * l1;
    let lt = t1 / t;
    let ltp = t2 / t - lt * lt;
    let ls = t1 / (t - one);
    let lsp = t2 / (t - one) - ls * ls;
    let w1 = (l1 - lt - ls) * -0.5;
    let w2 = (l1 - ls) * -0.5;
    let w3 = (l1 - lt) * -0.5;
    let dw1 = (l1p - ltp - lsp) * -0.5;
    let dw2 = (l1p - lsp) * -0.5;
    let dw3 = (l1p - ltp) * -0.5;
    let (a, b, g) = params;
    let r = (w1 - w2) * (w3 - w1) * (a * a) + (w2 - w3) * (w1 - w2) * (b * b) + (w3 - w1) * (w2 - w3) * (g * g);
    let eqs = [
        (dw1, w2 * w3 - w1 * (w2 + w3) + r),
        (dw2, w1 * w3 - w2 * (w1 + w3) + r),
        (dw3, w1 * w2 - w3 * (w1 + w2) + r),
    ];
    let halphen_residual = eqs.iter().fold(0.0f64, |acc, (l, rr)| acc.max((l - rr).norm() / l.norm().max(1.0)));
    let schw = t3 / t1 - (t2 / t1).powi(2) * 1.5;
    let v = (one * (1.0 - b * b)) / (t * t) + (one * (1.0 - g * g)) / ((t - one) * (t - one))
        + (one * (b * b + g * g - a * a - 1.0)) / (t * (t - one));
    let lhs = schw + t1 * t1 * 0.5 * v;
    let schwarzian_residual = lhs.norm() / schw.norm().max(1.0);
    Ok(HalphenReport { t, omega: [w1, w2, w3], halphen_residual, schwarzian_residual, r_term: r })
}

/// Characteristics shifted by (-2/3, 1/3) Pi, i.e. d1 -> d1 e^(-4 pi i/3) and d2 -> d2 e^(2 pi i/3).
pub fn third_shift_constants(d: &[C; 2]) -> [C; 2] {
    [d[0] * C::from_polar(1.0, -4.0 * PI / 3.0), d[1] * C::from_polar(1.0, 2.0 * PI / 3.0)]
}

/// The coordinates (eta, z_+, z_-) of the covers onto the Legendre curves
/// z^2 = eta (1 - eta)(1 - k^2 eta), at the point (l, y).
pub fn quotient_coordinates(ed: &EllipticData, l: C, y: C) -> Result<(C, C, C)> {
    let [l1, l2, l3] = ed.lambdas;
    let kap = ed.cube_root_span();
    let (p2, one) = (ed.p * ed.p, ci(1.0, 0.0));
    let a = (l - l2) * kap;
    let dy = y * ((one / (l - l1) + one / (l - l3) + ci(2.0, 0.0) / (l - l2)) / 3.0);
    let (um, up) = (y - a, y + a);
    let (u, v) = (um * um, up * up);
    let (du, dv) = (um * (dy - kap) * 2.0, up * (dy + kap) * 2.0);
    let num = p2 * u + v * 3.0;
    let den = p2 * ed.k2_plus * u + ed.k2_minus * v * 3.0;
    if den.norm() == 0.0 {
        return Err(Error::DomainError("eta has a pole at this point".into()));
    }
    let dnum = p2 * du + dv * 3.0;
    let dden = p2 * ed.k2_plus * du + ed.k2_minus * dv * 3.0;
    let eta = num / den;
    let deta = (dnum * den - num * dden) / (den * den);
    let k_plus = theta3_const(ed.big_t * 3.0)?.powi(2) * (PI / 2.0);
    let k_minus = theta3_const(ed.big_t)?.powi(2) * (PI / 2.0);
    let r = rho();
    let z_plus = ed.a1 * (one + r) / (k_plus * 4.0) * y * y / um * deta;
    let z_minus = ed.a1 * (one - r) / (k_minus * 4.0) * y * y / up * deta;
    Ok((eta, z_plus, z_minus))
}

/// Relative residuals of the two Legendre equations at (l, y).
pub fn quotient_residual(ed: &EllipticData, l: C, y: C) -> Result<(f64, f64)> {
    let (eta, zp, zm) = quotient_coordinates(ed, l, y)?;
    let one = ci(1.0, 0.0);
    let leg = |z: C, k2: C| {
        let rhs = eta * (one - eta) * (one - k2 * eta);
        (z * z - rhs).norm() / rhs.norm().max((z * z).norm())
    };
    Ok((leg(zp, ed.k2_plus), leg(zm, ed.k2_minus)))
}
