//! Monodromy data, the canonical solution X and the theta solution Y.

use crate::curve::{Region, Side, ZnCurve};
use crate::error::{Error, Result};
use crate::numerics::{gauss_legendre, max_abs};
use crate::periods::PeriodData;
use crate::theta::{Characteristics, Provenance, ThetaParams};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;
use std::f64::consts::PI;

fn zero() -> C {
    C::new(0.0, 0.0)
}

/// The cyclic quasi-permutation P_N: ones below the diagonal and (-1)^(N-1) in the corner.
pub fn p_matrix(n: usize) -> DMatrix<C> {
    let mut p = DMatrix::from_element(n, n, zero());
    for i in 1..n {
        p[(i, i - 1)] = C::new(1.0, 0.0);
    }
    p[(0, n - 1)] = C::new(if n % 2 == 1 { 1.0 } else { -1.0 }, 0.0);
    p
}

/// Diagonal of sigma_N: (2j - N + 1) / (2N), j = 0..N-1.
pub fn sigma_n(n: usize) -> Vec<f64> {
    (0..n).map(|j| (2.0 * j as f64 - n as f64 + 1.0) / (2.0 * n as f64)).collect()
}

/// U with first row of ones and U_{rj} = omega_j^{-(r-1)}, omega_j = exp(2 pi i sigma_j).
pub fn u_matrix(n: usize) -> DMatrix<C> {
    let sig = sigma_n(n);
    DMatrix::from_fn(n, n, |r, j| C::from_polar(1.0, -2.0 * PI * sig[j] * r as f64))
}

pub fn u_inverse(n: usize) -> DMatrix<C> {
    let sig = sigma_n(n);
    DMatrix::from_fn(n, n, |j, s| C::from_polar(1.0 / n as f64, 2.0 * PI * sig[j] * s as f64))
}

/// U sigma_N U^{-1}
pub fn u_sigma_u_inv(n: usize) -> DMatrix<C> {
    let sig = sigma_n(n);
    let d = DMatrix::from_fn(n, n, |i, j| if i == j { C::new(sig[i], 0.0) } else { zero() });
    u_matrix(n) * d * u_inverse(n)
}

#[derive(Debug, Clone)]
pub struct MonodromySet {
    pub n: usize,
    pub m: usize,
    pub c: Vec<C>,
    pub d: Vec<C>,
    /// G_0 .. G_{2m+2}
    pub g: Vec<DMatrix<C>>,
    /// M_1 .. M_{2m+2}; the last one is M_inf
    pub mats: Vec<DMatrix<C>>,
    pub p_n: DMatrix<C>,
    pub sigma: Vec<f64>,
    pub u: DMatrix<C>,
}

impl MonodromySet {
    /// M_k for k = 1..2m+2 (2m+2 is infinity).
    pub fn m_k(&self, k: usize) -> &DMatrix<C> {
        &self.mats[k - 1]
    }

    /// Jump matrix on the contour piece (lambda_k, lambda_{k+1}).
    pub fn jump(&self, k: usize) -> &DMatrix<C> {
        &self.g[k]
    }
}

pub fn build_monodromy(n: usize, m: usize, c: &[C], d: &[C]) -> Result<MonodromySet> {
    let g = (n - 1) * m;
    if c.len() != g || d.len() != g {
        return Err(Error::Validation(format!("expected {g} constants c and d")));
    }
    for (i, x) in c.iter().chain(d.iter()).enumerate() {
        if x.norm() == 0.0 {
            return Err(Error::ZeroConstant(i % g + 1));
        }
    }
    let id = DMatrix::<C>::identity(n, n);
    let mut gs = vec![id.clone(); 2 * m + 3];
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    for k in 1..=m {
        let ck = |s: usize| c[k - 1 + s * m];
        let mut odd = DMatrix::from_element(n, n, zero());
        odd[(0, n - 1)] = ck(0) * sign;
        for i in 1..n - 1 {
            odd[(i, i - 1)] = ck(i) / ck(i - 1);
        }
        odd[(n - 1, n - 2)] = 1.0 / ck(n - 2);
        gs[2 * k - 1] = odd;
        let mut diag = DMatrix::from_element(n, n, zero());
        let mut prod = C::new(1.0, 0.0);
        for s in 0..n - 1 {
            let v = d[k - 1 + s * m];
            diag[(s, s)] = v;
            prod *= v;
        }
        diag[(n - 1, n - 1)] = 1.0 / prod;
        gs[2 * k] = diag;
    }
    gs[2 * m + 1] = p_matrix(n);
    let mut mats = Vec::with_capacity(2 * m + 2);
    for k in 1..=2 * m + 2 {
        let inv = gs[k - 1].clone().try_inverse().ok_or(Error::ZeroConstant(k))?;
        mats.push(&gs[k] * inv);
    }
    Ok(MonodromySet {
        n,
        m,
        c: c.to_vec(),
        d: d.to_vec(),
        g: gs,
        mats,
        p_n: p_matrix(n),
        sigma: sigma_n(n),
        u: u_matrix(n),
    })
}

fn log_over_2pii(z: C) -> C {
    z.ln() / C::new(0.0, 2.0 * PI)
}

/// Characteristics from the monodromy constants (principal logarithms).
pub fn chars_from_constants(ms: &MonodromySet) -> Characteristics {
    let (n, m) = (ms.n, ms.m);
    let g = (n - 1) * m;
    let mut eps = vec![zero(); g];
    for s in 0..n - 1 {
        for k in 0..m {
            let i = k + s * m;
            eps[i] = if k + 1 < m { log_over_2pii(ms.c[i] / ms.c[i + 1]) } else { log_over_2pii(ms.c[i]) };
        }
    }
    let delta = ms.d.iter().map(|x| log_over_2pii(*x)).collect();
    Characteristics { eps, delta, provenance: Provenance::FromConstants }
}

/// Inverse of `chars_from_constants`.
pub fn constants_from_chars(n: usize, m: usize, ch: &Characteristics) -> (Vec<C>, Vec<C>) {
    let g = (n - 1) * m;
    let e = |x: C| (C::new(0.0, 2.0 * PI) * x).exp();
    let mut c = vec![zero(); g];
    for s in 0..n - 1 {
        for k in (0..m).rev() {
            let i = k + s * m;
            c[i] = if k + 1 < m { c[i + 1] * e(ch.eps[i]) } else { e(ch.eps[i]) };
        }
    }
    let d = ch.delta.iter().map(|x| e(*x)).collect();
    (c, d)
}

/// True when the constants are N-th roots of unity in the pattern
/// c_{k+sm} = xi_k^(s+1), d_{k+sm} = zeta_k.
pub fn is_reducible_pattern(ms: &MonodromySet, tol: f64) -> bool {
    let n = ms.n as i32;
    let root = |x: C| (x.powi(n) - 1.0).norm() < tol;
    for k in 0..ms.m {
        let xi = ms.c[k];
        let zeta = ms.d[k];
        if !root(xi) || !root(zeta) {
            return false;
        }
        for s in 0..ms.n - 1 {
            if (ms.c[k + s * ms.m] - xi.powi(s as i32 + 1)).norm() > tol
                || (ms.d[k + s * ms.m] - zeta).norm() > tol
            {
                return false;
            }
        }
    }
    true
}

/// Scalar factors of the reducible representation: M_{2k-1} = f_{2k-1} P_N,
/// M_{2k} = f_{2k} P_N^{-1}; returns the residual of that structure.
pub fn reducible_residual(ms: &MonodromySet) -> f64 {
    let pinv = ms.p_n.clone().try_inverse().unwrap();
    let mut worst = 0.0f64;
    for k in 1..=2 * ms.m + 1 {
        let base = if k % 2 == 1 { &ms.p_n } else { &pinv };
        let mk = ms.m_k(k);
        // scalar multiple of base
        let mut idx = (0, 0);
        for i in 0..ms.n {
            for j in 0..ms.n {
                if base[(i, j)].norm() > 0.5 {
                    idx = (i, j);
                }
            }
        }
        let f = mk[(idx.0, idx.1)] / base[(idx.0, idx.1)];
        worst = worst.max(max_abs(&(mk - base * f)));
        worst = worst.max((f.powi(ms.n as i32) - 1.0).norm());
    }
    worst
}

/// F(l)/F(l0) raised to the odd powers used by X.
fn x_from_f(n: usize, ratio: C) -> DMatrix<C> {
    let nn = n as f64;
    DMatrix::from_fn(n, n, |r, s| {
        let base = C::from_polar(1.0, PI * (s as f64 - r as f64) / nn) * ratio;
        let mut acc = zero();
        for j in 0..n {
            acc += base.powi(2 * j as i32 - n as i32 + 1);
        }
        acc / nn
    })
}

fn side_for(curve: &ZnCurve, l: C, side: Side) -> Result<Side> {
    match side {
        Side::Auto => match curve.region(l) {
            Region::Plus => Ok(Side::Plus),
            Region::Minus => Ok(Side::Minus),
            Region::Contour(_) => Err(Error::CutAmbiguity),
        },
        s => Ok(s),
    }
}

/// Canonical solution X(l) = U ((p/q)(l) (q/p)(l0))^sigma U^{-1}.
pub fn canonical_x(curve: &ZnCurve, l0: C, l: C, side: Side) -> Result<DMatrix<C>> {
    let s = side_for(curve, l, side)?;
    let f = curve.f_value(l, s);
    let f0 = curve.f_value(l0, Side::Plus);
    Ok(x_from_f(curve.n, f / f0))
}

/// X assembled directly as U R^sigma U^{-1}.
pub fn canonical_x_matrix_form(curve: &ZnCurve, l0: C, l: C, side: Side) -> Result<DMatrix<C>> {
    let s = side_for(curve, l, side)?;
    let ratio = curve.f_value(l, s) / curve.f_value(l0, Side::Plus);
    let n = curve.n;
    let sig = sigma_n(n);
    let d = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            ratio.powf(0.0) * ratio.powi((2.0 * n as f64 * sig[i]).round() as i32)
        } else {
            zero()
        }
    });
    Ok(u_matrix(n) * d * u_inverse(n))
}

#[derive(Debug, Clone)]
pub struct RHSolution {
    pub periods: PeriodData,
    pub theta: ThetaParams,
    pub chars: Characteristics,
    pub monodromy: Option<MonodromySet>,
    pub lambda0: C,
    v0_raw: DVector<C>,
    f0: C,
    theta_e0: C,
    theta_00: C,
}

/// Columns Z_{rs} = J^{s-1} v(l) - J^{r-1} v(l0) stacked as [r][s].
pub type AbelDiffs = Vec<Vec<DVector<C>>>;

impl RHSolution {
    pub fn new(periods: PeriodData, chars: Characteristics, lambda0: C, monodromy: Option<MonodromySet>) -> Result<Self> {
        if periods.curve.region(lambda0) != Region::Plus {
            return Err(Error::Validation("lambda0 must lie strictly above the contour".into()));
        }
        let theta = ThetaParams::new(&periods.pi)?;
        let g = periods.genus();
        if chars.genus() != g {
            return Err(Error::Validation("characteristic length does not match the genus".into()));
        }
        let z0 = vec![zero(); g];
        let theta_e0 = theta.theta(&z0, &chars)?;
        let theta_00 = theta.theta0(&z0)?;
        if theta_e0.norm() <= 1e-10 * theta_00.norm() {
            return Err(Error::SolvabilityViolation(theta_e0.norm() / theta_00.norm()));
        }
        let v0_raw = periods.abel_raw(lambda0, Side::Plus)?;
        let f0 = periods.curve.f_value(lambda0, Side::Plus);
        Ok(RHSolution { periods, theta, chars, monodromy, lambda0, v0_raw, f0, theta_e0, theta_00 })
    }

    pub fn curve(&self) -> &ZnCurve {
        &self.periods.curve
    }

    pub fn n(&self) -> usize {
        self.periods.curve.n
    }

    pub fn theta_char_zero(&self) -> C {
        self.theta_e0
    }

    pub fn theta_zero(&self) -> C {
        self.theta_00
    }

    pub fn v0(&self, sheet: usize) -> DVector<C> {
        self.periods.normalize(&self.v0_raw, sheet)
    }

    pub fn abel_diffs(&self, raw: &DVector<C>) -> AbelDiffs {
        let n = self.n();
        let vs: Vec<DVector<C>> = (1..=n).map(|s| self.periods.normalize(raw, s)).collect();
        let v0s: Vec<DVector<C>> = (1..=n).map(|r| self.v0(r)).collect();
        (0..n).map(|r| (0..n).map(|s| &vs[s] - &v0s[r]).collect()).collect()
    }

    /// Theta ratio factor of Y_rs for the given Abel difference.
    pub fn ratio(&self, z: &DVector<C>) -> Result<C> {
        let num = self.theta.theta(z.as_slice(), &self.chars)?;
        let den = self.theta.theta0(z.as_slice())?;
        if den.norm() < 1e-13 * self.theta_00.norm() {
            return Err(Error::ThetaDenominatorZero);
        }
        Ok(num / den * self.theta_00 / self.theta_e0)
    }

    /// Y from an F value and Abel differences (used by continuation as well).
    pub fn assemble(&self, f: C, z: &AbelDiffs) -> Result<DMatrix<C>> {
        let n = self.n();
        let x = x_from_f(n, f / self.f0);
        let mut y = x.clone();
        for r in 0..n {
            for s in 0..n {
                y[(r, s)] = x[(r, s)] * self.ratio(&z[r][s])?;
            }
        }
        Ok(y)
    }

    pub fn x(&self, l: C, side: Side) -> Result<DMatrix<C>> {
        canonical_x(self.curve(), self.lambda0, l, side)
    }

    /// Y(l); on the contour `side` selects the boundary value.
    pub fn y(&self, l: C, side: Side) -> Result<DMatrix<C>> {
        let s = side_for(self.curve(), l, side)?;
        let raw = self.periods.abel_raw(l, s)?;
        let f = self.curve().f_value(l, s);
        self.assemble(f, &self.abel_diffs(&raw))
    }
}

pub fn solve_y(curve: &ZnCurve, ms: &MonodromySet, lambda0: C) -> Result<RHSolution> {
    let pd = PeriodData::new(curve)?;
    let ch = chars_from_constants(ms);
    RHSolution::new(pd, ch, lambda0, Some(ms.clone()))
}

/// Sample points strictly inside contour piece k (lambda_k, lambda_{k+1}).
pub fn piece_samples(curve: &ZnCurve, k: usize, count: usize) -> Vec<C> {
    let np = curve.npoints();
    (0..count)
        .map(|i| {
            let t = (i as f64 + 0.5) / count as f64;
            if k == 0 {
                curve.lambdas[0] - 0.05 - 3.0 * t
            } else if k == np {
                curve.lambdas[np - 1] + 0.05 + 3.0 * t
            } else {
                let (a, b) = (curve.lambdas[k - 1], curve.lambdas[k]);
                a + (b - a) * (0.04 + 0.92 * t)
            }
        })
        .collect()
}

/// Max residual |Y_- - Y_+ G_k| / max(1, |Y_+|) over samples on every contour piece.
pub fn jump_residuals(sol: &RHSolution, per_piece: usize) -> Result<Vec<f64>> {
    let ms = sol.monodromy.as_ref().ok_or_else(|| Error::Validation("solution has no monodromy data".into()))?;
    let curve = sol.curve();
    let mut out = Vec::new();
    for k in 0..=curve.npoints() {
        let mut worst = 0.0f64;
        for l in piece_samples(curve, k, per_piece) {
            let yp = sol.y(l, Side::Plus)?;
            let ym = sol.y(l, Side::Minus)?;
            let r = max_abs(&(&ym - &yp * ms.jump(k))) / max_abs(&yp).max(1.0);
            worst = worst.max(r);
        }
        out.push(worst);
    }
    Ok(out)
}

/// Residual of X_- = X_+ P_N on the cuts and continuity on the gaps.
pub fn x_jump_residual(curve: &ZnCurve, l0: C, per_piece: usize) -> Result<f64> {
    let p = p_matrix(curve.n);
    let mut worst = 0.0f64;
    for k in 0..=curve.npoints() {
        for l in piece_samples(curve, k, per_piece) {
            let xp = canonical_x(curve, l0, l, Side::Plus)?;
            let xm = canonical_x(curve, l0, l, Side::Minus)?;
            let want = if k % 2 == 1 { &xp * &p } else { xp.clone() };
            worst = worst.max(max_abs(&(xm - want)) / max_abs(&xp).max(1.0));
        }
    }
    Ok(worst)
}

/// State carried along a path: label of every starting sheet, label of F and
/// the accumulated raw Abel integral for each starting sheet.
struct Continuation {
    sheet: Vec<usize>,
    f_label: i32,
    acc: Vec<DVector<C>>,
}

fn region_side(r: Region) -> Side {
    match r {
        Region::Minus => Side::Minus,
        _ => Side::Plus,
    }
}

/// Points where the segment [a, b] crosses the contour, as parameters in (0, 1).
fn contour_crossings(curve: &ZnCurve, a: C, b: C) -> Vec<f64> {
    let h = |t: f64| curve.height_above_contour(a + (b - a) * t);
    let steps = 64;
    let mut out = Vec::new();
    let mut prev = h(0.0);
    for i in 1..=steps {
        let t1 = i as f64 / steps as f64;
        let cur = h(t1);
        if prev * cur < 0.0 {
            let (mut lo, mut hi) = ((i - 1) as f64 / steps as f64, t1);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if h(mid) * prev > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.push(0.5 * (lo + hi));
        }
        prev = cur;
    }
    out
}

fn nearest_label(cands: &[C], v: C) -> Result<usize> {
    let mut d: Vec<(f64, usize)> = cands.iter().enumerate().map(|(i, c)| ((c - v).norm(), i)).collect();
    d.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    if d.len() > 1 && 10.0 * d[0].0 >= d[1].0 {
        return Err(Error::AmbiguousMatching(format!("{v}")));
    }
    Ok(d[0].1)
}

/// Continue sheet labels, F and the Abel integrals along a closed polyline.
fn continue_along(sol: &RHSolution, path: &[C]) -> Result<Continuation> {
    let curve = sol.curve();
    let n = curve.n;
    let g = curve.genus();
    let (gx, gw) = gauss_legendre(24);
    let mut st = Continuation {
        sheet: (1..=n).collect(),
        f_label: 0,
        acc: vec![DVector::from_element(g, zero()); n],
    };
    let y_on = |l: C, side: Side, label: usize| -> C {
        let d = curve.diffs(l);
        curve.y1_from_diffs(&d, side) * curve.rho.powi(label as i32 - 1)
    };
    let f_on = |l: C, side: Side, label: i32| -> C {
        curve.f_value(l, side) * C::from_polar(1.0, PI * label as f64 / n as f64)
    };
    let mut prev_side: Option<Side> = None;
    for w in path.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mut cuts = contour_crossings(curve, a, b);
        cuts.insert(0, 0.0);
        cuts.push(1.0);
        for piece in cuts.windows(2) {
            let (t0, t1) = (piece[0], piece[1]);
            let pa = a + (b - a) * t0;
            let pb = a + (b - a) * t1;
            let mid = 0.5 * (pa + pb);
            let side = region_side(curve.region(mid));
            if let Some(before) = prev_side {
                if before != side {
                    // crossing at pa: match labels by continuity of y and F
                    let ycands: Vec<C> = (1..=n).map(|t| y_on(pa, side, t)).collect();
                    for s in 0..n {
                        let yv = y_on(pa, before, st.sheet[s]);
                        st.sheet[s] = nearest_label(&ycands, yv)? + 1;
                    }
                    let fcands: Vec<C> = (0..2 * n as i32).map(|t| f_on(pa, side, t)).collect();
                    let fv = f_on(pa, before, st.f_label);
                    st.f_label = nearest_label(&fcands, fv)? as i32;
                }
            }
            prev_side = Some(side);
            let mut raw = DVector::from_element(g, zero());
            for (x, wt) in gx.iter().zip(gw.iter()) {
                let l = mid + (pb - pa) * (0.5 * x);
                let d = curve.diffs(l);
                let du = curve.du_sheet1_from_diffs(l, &d, side);
                for i in 0..g {
                    raw[i] += du[i] * (pb - pa) * (0.5 * wt);
                }
            }
            for s in 0..n {
                let mut v = raw.clone();
                curve.apply_sheet_phase(v.as_mut_slice(), st.sheet[s]);
                st.acc[s] += v;
            }
        }
    }
    Ok(st)
}

fn circle(center: C, radius: f64, start_angle: f64, clockwise: bool, vertices: usize) -> Vec<C> {
    let dir = if clockwise { -1.0 } else { 1.0 };
    (0..=vertices)
        .map(|i| center + C::from_polar(radius, start_angle + dir * 2.0 * PI * i as f64 / vertices as f64))
        .collect()
}

/// Continue Y(l*) around a closed polyline starting and ending at path[0].
pub fn continue_y(sol: &RHSolution, path: &[C]) -> Result<(DMatrix<C>, DMatrix<C>, Vec<usize>)> {
    let curve = sol.curve();
    let n = curve.n;
    let start = path[0];
    let side = side_for(curve, start, Side::Auto)?;
    let y0 = sol.y(start, side)?;
    let st = continue_along(sol, path)?;
    let raw = sol.periods.abel_raw(start, side)?;
    let f = curve.f_value(start, side) * C::from_polar(1.0, PI * st.f_label as f64 / n as f64);
    let mut z = sol.abel_diffs(&raw);
    for r in 0..n {
        for s in 0..n {
            let add = &sol.periods.norm * &st.acc[s];
            z[r][s] += add;
        }
    }
    let y1 = sol.assemble(f, &z)?;
    Ok((y0, y1, st.sheet))
}

/// Loop around lambda_k (counterclockwise) or, for k = 2m+2, the clockwise loop
/// around infinity.
pub fn monodromy_loop(curve: &ZnCurve, k: usize) -> Vec<C> {
    let np = curve.npoints();
    if k == np + 1 {
        let c: C = curve.lambdas.iter().sum::<C>() / np as f64;
        let r = 2.0 + curve.lambdas.iter().map(|x| (x - c).norm()).fold(0.0, f64::max) * 1.5;
        circle(c, r, 0.5 * PI, true, 512)
    } else {
        let r = curve.min_gap() / 4.0;
        circle(curve.lambda(k), r, 0.5 * PI, false, 256)
    }
}

/// Monodromy of Y around lambda_k by analytic continuation of the formula.
pub fn monodromy_of_solution(sol: &RHSolution, k: usize) -> Result<DMatrix<C>> {
    let path = monodromy_loop(sol.curve(), k);
    let (y0, y1, _) = continue_y(sol, &path)?;
    let inv = y0.try_inverse().ok_or(Error::ThetaDenominatorZero)?;
    Ok(inv * y1)
}

#[derive(Debug, Clone)]
pub struct ShiftReport {
    /// j_k with M~_k = exp(2 pi i j_k / N) M_k, k = 1..2m+1
    pub multipliers: Vec<i64>,
    pub multiplier_residual: f64,
    pub sum_mod_n: i64,
    /// residual of the single-valuedness of (Y~_rs / Y_rs)^N around every lambda_k
    pub single_valued_residual: f64,
    pub shifted: RHSolution,
}

/// Compare the solution with the one whose characteristics are shifted by `shift`.
pub fn shift_check(sol: &RHSolution, shift: &Characteristics) -> Result<ShiftReport> {
    let curve = sol.curve().clone();
    let (n, m) = (curve.n, curve.m);
    let ch2 = sol.chars.add(shift);
    let ms = sol.monodromy.as_ref().ok_or_else(|| Error::Validation("solution has no monodromy data".into()))?;
    let (c2, d2) = constants_from_chars(n, m, &ch2);
    let ms2 = build_monodromy(n, m, &c2, &d2)?;
    let shifted = RHSolution::new(sol.periods.clone(), ch2, sol.lambda0, Some(ms2.clone()))?;
    let mut mult = Vec::new();
    let mut mres = 0.0f64;
    for k in 1..=2 * m + 1 {
        let a = ms.m_k(k);
        let b = ms2.m_k(k);
        let mut best = (0i64, f64::INFINITY);
        for j in 0..n as i64 {
            let f = C::from_polar(1.0, 2.0 * PI * j as f64 / n as f64);
            let r = max_abs(&(b - a * f));
            if r < best.1 {
                best = (j, r);
            }
        }
        mult.push(best.0);
        mres = mres.max(best.1);
    }
    let sum_mod_n = mult.iter().sum::<i64>().rem_euclid(n as i64);
    // (Y~/Y)^N continued around each branch point returns to the entry on the
    // sheet reached by the continuation
    let mut sv = 0.0f64;
    for k in 1..=2 * m + 1 {
        let path = monodromy_loop(&curve, k);
        let (ya, yb, sheets) = continue_y(sol, &path)?;
        let (ta, tb, _) = continue_y(&shifted, &path)?;
        for r in 0..n {
            for s in 0..n {
                let before = (ta[(r, s)] / ya[(r, s)]).powi(n as i32);
                let after = (tb[(r, s)] / yb[(r, s)]).powi(n as i32);
                let s2 = sheets[s] - 1;
                let target = (ta[(r, s2)] / ya[(r, s2)]).powi(n as i32);
                let scale = before.norm().max(target.norm()).max(1e-300);
                sv = sv.max((after - target).norm() / scale);
            }
        }
    }
    Ok(ShiftReport { multipliers: mult, multiplier_residual: mres, sum_mod_n, single_valued_residual: sv, shifted })
}
