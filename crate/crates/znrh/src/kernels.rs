//! Prime form, Bergmann and Szego kernels.
//!
//! Kernel values are coefficients in the d(lambda) trivialization. Points are
//! labelled by a sheet and, on the contour, a side.

use crate::curve::{Side, ZnCurve};
use crate::error::{Error, Result};
use crate::periods::{BranchDivisor, PeriodData};
use crate::theta::{Characteristics, ThetaParams};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;
use std::f64::consts::PI;

fn zero() -> C {
    C::new(0.0, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub lambda: C,
    pub sheet: usize,
    pub side: Side,
}

impl CurvePoint {
    pub fn new(lambda: C, sheet: usize) -> Self {
        CurvePoint { lambda, sheet, side: Side::Auto }
    }
}

/// All 2^(2g) half-integer characteristics.
pub fn half_integer_chars(g: usize) -> Vec<Characteristics> {
    let mut out = Vec::with_capacity(1 << (2 * g));
    for bits in 0..(1u64 << (2 * g)) {
        let eps: Vec<f64> = (0..g).map(|i| if bits >> i & 1 == 1 { 0.5 } else { 0.0 }).collect();
        let delta: Vec<f64> = (0..g).map(|i| if bits >> (g + i) & 1 == 1 { 0.5 } else { 0.0 }).collect();
        out.push(Characteristics::real(&eps, &delta));
    }
    out
}

/// First odd half-integer characteristic with |grad theta[gamma](0)| > 1e-6.
pub fn find_odd_char(tp: &ThetaParams) -> Result<(Characteristics, Vec<C>)> {
    let g = tp.genus();
    let z = vec![zero(); g];
    for ch in half_integer_chars(g) {
        if ch.parity() != Some(1) {
            continue;
        }
        let ev = tp.eval(&z, &ch, 1)?;
        let norm = ev.grad.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return Ok((ch, ev.grad));
        }
    }
    Err(Error::NoneFound("every odd half-integer characteristic is singular".into()))
}

#[derive(Debug, Clone)]
pub struct KernelContext {
    pub periods: PeriodData,
    pub theta: ThetaParams,
    pub gamma: Characteristics,
    grad_gamma: Vec<C>,
}

impl KernelContext {
    pub fn new(periods: PeriodData) -> Result<Self> {
        let theta = ThetaParams::new(&periods.pi)?;
        let (gamma, grad_gamma) = find_odd_char(&theta)?;
        Ok(KernelContext { periods, theta, gamma, grad_gamma })
    }

    pub fn with_gamma(periods: PeriodData, gamma: Characteristics) -> Result<Self> {
        let theta = ThetaParams::new(&periods.pi)?;
        if gamma.parity() != Some(1) {
            return Err(Error::Validation("gamma must be an odd half-integer characteristic".into()));
        }
        let ev = theta.eval(&vec![zero(); theta.genus()], &gamma, 1)?;
        if ev.grad.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt() <= 1e-6 {
            return Err(Error::SingularCharacteristics);
        }
        Ok(KernelContext { periods, theta, gamma, grad_gamma: ev.grad })
    }

    pub fn curve(&self) -> &ZnCurve {
        &self.periods.curve
    }

    pub fn abel(&self, p: &CurvePoint) -> Result<DVector<C>> {
        self.periods.abel(p.lambda, p.sheet, p.side)
    }

    pub fn dv(&self, p: &CurvePoint) -> Result<DVector<C>> {
        self.periods.dv(p.lambda, p.sheet, p.side)
    }

    /// h(P)^2 = sum_j d_j theta[gamma](0) dv_j(P) / d lambda
    pub fn h_squared(&self, p: &CurvePoint) -> Result<C> {
        let dv = self.dv(p)?;
        Ok(dv.iter().zip(self.grad_gamma.iter()).map(|(a, b)| a * b).sum())
    }

    /// Principal square root of h^2.
    pub fn h(&self, p: &CurvePoint) -> Result<C> {
        let h2 = self.h_squared(p)?;
        if h2.norm() < 1e-14 {
            return Err(Error::DegenerateH);
        }
        Ok(h2.sqrt())
    }

    fn delta_v(&self, p: &CurvePoint, q: &CurvePoint) -> Result<DVector<C>> {
        Ok(self.abel(p)? - self.abel(q)?)
    }

    pub fn prime_form(&self, p: &CurvePoint, q: &CurvePoint) -> Result<C> {
        let z = self.delta_v(p, q)?;
        let t = self.theta.theta(z.as_slice(), &self.gamma)?;
        Ok(t / (self.h(p)? * self.h(q)?))
    }

    pub fn prime_form_squared(&self, p: &CurvePoint, q: &CurvePoint) -> Result<C> {
        let z = self.delta_v(p, q)?;
        let t = self.theta.theta(z.as_slice(), &self.gamma)?;
        Ok(t * t / (self.h_squared(p)? * self.h_squared(q)?))
    }

    /// theta[ch](v(P) - v(Q)) / (theta[ch](0) E(P, Q))
    pub fn szego(&self, p: &CurvePoint, q: &CurvePoint, ch: &Characteristics) -> Result<C> {
        let g = self.periods.genus();
        let t0 = self.theta.theta(&vec![zero(); g], ch)?;
        let t00 = self.theta.theta0(&vec![zero(); g])?;
        if t0.norm() <= 1e-10 * t00.norm() {
            return Err(Error::SingularCharacteristics);
        }
        let z = self.delta_v(p, q)?;
        let t = self.theta.theta(z.as_slice(), ch)?;
        Ok(t / (t0 * self.prime_form(p, q)?))
    }

    /// d_lambda d_mu log E(P, Q) from the Hessian of log theta[gamma].
    pub fn bergmann(&self, p: &CurvePoint, q: &CurvePoint) -> Result<C> {
        let z = self.delta_v(p, q)?;
        let ev = self.theta.eval(z.as_slice(), &self.gamma, 2)?;
        let dp = self.dv(p)?;
        let dq = self.dv(q)?;
        let t = ev.value;
        let g = z.len();
        let mut acc = zero();
        for i in 0..g {
            for j in 0..g {
                let l = ev.hess[(i, j)] / t - ev.grad[i] * ev.grad[j] / (t * t);
                acc -= l * dp[i] * dq[j];
            }
        }
        Ok(acc)
    }

    /// |S[e] S[-e] - omega - sum d_k d_l log theta[e](0) dv_k(P) dv_l(Q)|, relative.
    pub fn fay_residual(&self, p: &CurvePoint, q: &CurvePoint, ch: &Characteristics) -> Result<f64> {
        let g = self.periods.genus();
        let z0 = vec![zero(); g];
        let neg = ch.neg();
        let z = self.delta_v(p, q)?;
        let tg = self.theta.theta(z.as_slice(), &self.gamma)?;
        let e2 = tg * tg / (self.h_squared(p)? * self.h_squared(q)?);
        let a = self.theta.theta(z.as_slice(), ch)? / self.theta.theta(&z0, ch)?;
        let b = self.theta.theta(z.as_slice(), &neg)? / self.theta.theta(&z0, &neg)?;
        let lhs = a * b / e2;
        let ev = self.theta.eval(&z0, ch, 2)?;
        let dp = self.dv(p)?;
        let dq = self.dv(q)?;
        let mut corr = zero();
        for k in 0..g {
            for l in 0..g {
                let h = ev.hess[(k, l)] / ev.value - ev.grad[k] * ev.grad[l] / (ev.value * ev.value);
                corr += h * dp[k] * dq[l];
            }
        }
        let rhs = self.bergmann(p, q)? + corr;
        Ok((lhs - rhs).norm() / lhs.norm().max(rhs.norm()))
    }

    /// Relative residual of the determinant identity for point sets ps, qs.
    pub fn det_identity_residual(&self, ps: &[CurvePoint], qs: &[CurvePoint], ch: &Characteristics) -> Result<f64> {
        let n = ps.len();
        if qs.len() != n || n == 0 {
            return Err(Error::Validation("point sets must have equal positive length".into()));
        }
        let g = self.periods.genus();
        let mut s = DMatrix::from_element(n, n, zero());
        for j in 0..n {
            for k in 0..n {
                s[(j, k)] = self.szego(&ps[j], &qs[k], ch)?;
            }
        }
        let lhs = s.determinant();
        let mut z = DVector::from_element(g, zero());
        for j in 0..n {
            z += self.delta_v(&ps[j], &qs[j])?;
        }
        let mut rhs = self.theta.theta(z.as_slice(), ch)? / self.theta.theta(&vec![zero(); g], ch)?;
        for j in 0..n {
            for k in j + 1..n {
                rhs *= self.prime_form(&ps[j], &ps[k])? * self.prime_form(&qs[k], &qs[j])?;
            }
        }
        for j in 0..n {
            for k in 0..n {
                rhs /= self.prime_form(&ps[j], &qs[k])?;
            }
        }
        Ok((lhs - rhs).norm() / lhs.norm().max(rhs.norm()))
    }
}

fn side_of(curve: &ZnCurve, p: &CurvePoint) -> Result<Side> {
    match p.side {
        Side::Auto => match curve.region(p.lambda) {
            crate::curve::Region::Plus => Ok(Side::Plus),
            crate::curve::Region::Minus => Ok(Side::Minus),
            crate::curve::Region::Contour(_) => Err(Error::CutAmbiguity),
        },
        s => Ok(s),
    }
}

fn label_phase(n: usize, sheet: usize) -> C {
    C::from_polar(1.0, PI * (sheet as f64 - 1.0) / n as f64)
}

fn kernel_sum(n: usize, lp: C, lq: C, x: C) -> C {
    let mut acc = zero();
    for s in 0..n {
        acc += x.powi(n as i32 - 1 - 2 * s as i32);
    }
    acc / (n as f64 * (lp - lq))
}

/// Closed-form Szego kernel with zero characteristics.
pub fn szego_zero(curve: &ZnCurve, p: &CurvePoint, q: &CurvePoint) -> Result<C> {
    let n = curve.n;
    let fp = curve.f_value(p.lambda, side_of(curve, p)?) * label_phase(n, p.sheet);
    let fq = curve.f_value(q.lambda, side_of(curve, q)?) * label_phase(n, q.sheet);
    Ok(kernel_sum(n, p.lambda, q.lambda, fq / fp))
}

/// (prod_I (l - l_i) / prod_J (l - l_j))^(1/(2N)) on the labelled sheet; equals 1/F for I = even points.
fn g_index(curve: &ZnCurve, l: C, side: Side, sheet: usize, index_set: &[usize]) -> C {
    let n = curve.n as f64;
    let mut v = 1.0 / (curve.f_value(l, side) * label_phase(curve.n, sheet));
    for i in 1..=curve.npoints() {
        let in_i = index_set.contains(&i);
        if i % 2 == 1 && in_i {
            v *= (l - curve.lambda(i)).powf(1.0 / n);
        } else if i % 2 == 0 && !in_i {
            v *= (l - curve.lambda(i)).powf(-1.0 / n);
        }
    }
    v
}

/// Closed-form Szego kernel for the divisor (N-1) sum_{i in I} P_i.
pub fn szego_dm(curve: &ZnCurve, p: &CurvePoint, q: &CurvePoint, index_set: &[usize]) -> Result<C> {
    if index_set.len() != curve.m || index_set.iter().any(|i| *i == 0 || *i > curve.npoints()) {
        return Err(Error::Validation("index set must hold m distinct branch indices".into()));
    }
    let gp = g_index(curve, p.lambda, side_of(curve, p)?, p.sheet, index_set);
    let gq = g_index(curve, q.lambda, side_of(curve, q)?, q.sheet, index_set);
    Ok(kernel_sum(curve.n, p.lambda, q.lambda, gp / gq))
}

/// Characteristics of (N-1) sum_{i in I} U_i - K_inf.
pub fn dm_characteristics(pd: &PeriodData, index_set: &[usize]) -> Characteristics {
    let w = (pd.curve.n - 1) as i64;
    let d = BranchDivisor { weights: index_set.iter().map(|i| (*i, w)).collect() };
    pd.divisor_characteristics(&d)
}

/// Second-order coefficient of (z(P) - z(Q)) S[0] in the coordinate z with
/// lambda = phi(z); `phi` holds phi', phi'', phi''' at the point.
pub fn szego_zero_c2(curve: &ZnCurve, l: C, phi: [C; 3]) -> C {
    let n = curve.n as f64;
    let mut dlog = zero();
    for i in 1..=curve.npoints() {
        let t = 1.0 / (l - curve.lambda(i));
        dlog += if i % 2 == 1 { t } else { -t };
    }
    let dz = dlog * phi[0];
    let schwarz = phi[2] / phi[0] - 1.5 * (phi[1] / phi[0]).powi(2);
    schwarz / 12.0 + (n * n - 1.0) / (24.0 * n * n) * dz * dz
}

/// Smallest |a - zeta b| / |b| over 2N-th roots of unity zeta.
pub fn residual_mod_roots(a: C, b: C, order: usize) -> (f64, usize) {
    let mut best = (f64::INFINITY, 0);
    for k in 0..order {
        let z = C::from_polar(1.0, 2.0 * PI * k as f64 / order as f64);
        let r = (a - z * b).norm() / b.norm();
        if r < best.0 {
            best = (r, k);
        }
    }
    best
}
