//! The singular cyclic curve y^N = p(lambda) q(lambda)^(N-1).
//!
//! Branch points lambda_1..lambda_{2m+1} are ordered by real part; the roots of
//! p have odd index and those of q even index.  The cut system consists of the
//! segments [lambda_{2l-1}, lambda_{2l}] and the horizontal ray from
//! lambda_{2m+1} to +inf.  The contour L is the polyline
//! -inf -> lambda_1 -> ... -> lambda_{2m+1} -> +inf and C+ lies to its left.
//!
//! Sheet 1 is the branch of y that behaves like lambda^(m+1/N) (principal power)
//! along the positive imaginary axis.  On every cut the value on the lower
//! side is rho times the value on the upper side.

use crate::error::{Error, Result};
use crate::numerics::{PathSpec, I};
use num_complex::Complex64 as C;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Auto,
    /// boundary value from C+
    Plus,
    /// boundary value from C-
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Plus,
    Minus,
    /// on the contour, piece index k means (lambda_k, lambda_{k+1}) with
    /// lambda_0 = lambda_{2m+2} = infinity
    Contour(usize),
}

#[derive(Debug, Clone)]
pub struct ZnCurve {
    pub n: usize,
    pub m: usize,
    pub lambdas: Vec<C>,
    pub rho: C,
}

#[derive(Debug, Clone, Copy)]
pub struct SheetedPoint {
    pub lambda: C,
    pub sheet: usize,
    pub y: C,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CycleKind {
    Alpha,
    Beta,
}

/// One leg of a realized cycle: a polyline travelled on a fixed starting sheet.
#[derive(Debug, Clone)]
pub struct CycleLeg {
    pub path: PathSpec,
}

fn pow_side(w: C, e: f64, side: Side) -> C {
    let r = w.norm();
    if r == 0.0 {
        return C::new(0.0, 0.0);
    }
    let mut arg = w.arg();
    if side != Side::Auto && w.re < 0.0 && w.im.abs() <= 1e-11 * r {
        arg = if side == Side::Plus { -PI } else { PI };
    }
    C::from_polar(r.powf(e), e * arg)
}

impl ZnCurve {
    /// Curve with branch points sorted by real part; real parts must be distinct.
    pub fn new(n: usize, lambdas: &[C]) -> Result<Self> {
        let mut l = lambdas.to_vec();
        l.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap_or(std::cmp::Ordering::Equal));
        Self::with_ordering(n, &l)
    }

    /// Curve with the branch points taken in the given order (no sorting).
    /// The order must still have strictly increasing real parts.
    pub fn with_ordering(n: usize, lambdas: &[C]) -> Result<Self> {
        if n < 2 {
            return Err(Error::Validation("N must be at least 2".into()));
        }
        let k = lambdas.len();
        if k % 2 == 0 {
            return Err(Error::BadArity(k));
        }
        for i in 0..k {
            if !lambdas[i].re.is_finite() || !lambdas[i].im.is_finite() {
                return Err(Error::Validation("non-finite branch point".into()));
            }
            for j in i + 1..k {
                if (lambdas[i] - lambdas[j]).norm() == 0.0 {
                    return Err(Error::DuplicatePoints);
                }
            }
        }
        for w in lambdas.windows(2) {
            if !(w[1].re > w[0].re) {
                return Err(Error::Validation(
                    "branch points must have strictly increasing real parts".into(),
                ));
            }
        }
        Ok(ZnCurve {
            n,
            m: (k - 1) / 2,
            lambdas: lambdas.to_vec(),
            rho: C::from_polar(1.0, 2.0 * PI / n as f64),
        })
    }

    pub fn genus(&self) -> usize {
        (self.n - 1) * self.m
    }

    pub fn npoints(&self) -> usize {
        2 * self.m + 1
    }

    /// 1-based branch point index.
    pub fn lambda(&self, k: usize) -> C {
        self.lambdas[k - 1]
    }

    pub fn p(&self, l: C) -> C {
        (0..=self.m).map(|i| l - self.lambdas[2 * i]).product()
    }

    pub fn q(&self, l: C) -> C {
        (0..self.m).map(|i| l - self.lambdas[2 * i + 1]).product()
    }

    pub fn diffs(&self, l: C) -> Vec<C> {
        self.lambdas.iter().map(|x| l - x).collect()
    }

    /// exp(i pi e) prod_l w_l^e zeta^e with w_l = (l-l_{2l-1})/(l-l_{2l}) and
    /// zeta = -(l - l_{2m+1}); behaves like lambda^e along the positive
    /// imaginary axis and equals (p/q)^e up to that normalization.
    pub fn psi_from_diffs(&self, d: &[C], e: f64, side: Side) -> C {
        let mut v = C::from_polar(1.0, PI * e);
        for l in 0..self.m {
            v *= pow_side(d[2 * l] / d[2 * l + 1], e, side);
        }
        v * pow_side(-d[2 * self.m], e, side)
    }

    /// Sheet-1 value of y from the differences lambda - lambda_i.
    pub fn y1_from_diffs(&self, d: &[C], side: Side) -> C {
        let qv: C = (0..self.m).map(|l| d[2 * l + 1]).product();
        qv * self.psi_from_diffs(d, 1.0 / self.n as f64, side)
    }

    fn check_cut(&self, l: C, side: Side) -> Result<()> {
        if side != Side::Auto {
            return Ok(());
        }
        if let Region::Contour(k) = self.region(l) {
            if k % 2 == 1 {
                return Err(Error::CutAmbiguity);
            }
        }
        Ok(())
    }

    /// y on the given sheet (1-based); zero at branch points.
    pub fn y_value(&self, l: C, sheet: usize, side: Side) -> Result<C> {
        if self.lambdas.iter().any(|x| *x == l) {
            return Ok(C::new(0.0, 0.0));
        }
        self.check_cut(l, side)?;
        let d = self.diffs(l);
        Ok(self.y1_from_diffs(&d, side) * self.rho.powi(sheet as i32 - 1))
    }

    pub fn point(&self, l: C, sheet: usize, side: Side) -> Result<SheetedPoint> {
        Ok(SheetedPoint { lambda: l, sheet, y: self.y_value(l, sheet, side)? })
    }

    /// F = (p/q)^(1/(2N)) with F ~ lambda^(1/(2N)) along the positive imaginary axis.
    pub fn f_value(&self, l: C, side: Side) -> C {
        let d = self.diffs(l);
        self.psi_from_diffs(&d, 0.5 / self.n as f64, side)
    }

    /// Height of the contour polyline at abscissa x.
    fn contour_height(&self, x: f64) -> (f64, usize) {
        let k = self.lambdas.len();
        if x <= self.lambdas[0].re {
            return (self.lambdas[0].im, 0);
        }
        if x >= self.lambdas[k - 1].re {
            return (self.lambdas[k - 1].im, k);
        }
        for i in 0..k - 1 {
            let (a, b) = (self.lambdas[i], self.lambdas[i + 1]);
            if x <= b.re {
                let t = (x - a.re) / (b.re - a.re);
                return (a.im + t * (b.im - a.im), i + 1);
            }
        }
        unreachable!()
    }

    pub fn region(&self, l: C) -> Region {
        let (h, piece) = self.contour_height(l.re);
        let scale = 1.0 + l.norm();
        if (l.im - h).abs() <= 1e-13 * scale {
            Region::Contour(piece)
        } else if l.im > h {
            Region::Plus
        } else {
            Region::Minus
        }
    }

    /// Signed vertical distance to the contour (positive in C+).
    pub fn height_above_contour(&self, l: C) -> f64 {
        l.im - self.contour_height(l.re).0
    }

    /// Exponents e_i such that du_{j+sm} behaves like (lambda - lambda_i)^(-e_i).
    pub fn du_exponent(&self, i: usize, s: usize) -> f64 {
        let n = self.n as f64;
        let s1 = (s + 1) as f64;
        if i % 2 == 1 {
            s1 / n
        } else {
            s1 * (n - 1.0) / n - s as f64
        }
    }

    /// Values of du_{j+sm} = lambda^(j-1) q^s / y^(s+1) on sheet 1 from differences.
    pub fn du_sheet1_from_diffs(&self, l: C, d: &[C], side: Side) -> Vec<C> {
        let y = self.y1_from_diffs(d, side);
        let qv: C = (0..self.m).map(|k| d[2 * k + 1]).product();
        let g = self.genus();
        let mut out = vec![C::new(0.0, 0.0); g];
        let mut qs_over_y = 1.0 / y;
        for s in 0..self.n - 1 {
            let mut lp = C::new(1.0, 0.0);
            for j in 0..self.m {
                out[j + self.m * s] = lp * qs_over_y;
                lp *= l;
            }
            qs_over_y *= qv / y;
        }
        out
    }

    /// du on an arbitrary sheet: pullback by J^(sheet-1).
    pub fn du(&self, l: C, sheet: usize, side: Side) -> Result<Vec<C>> {
        self.check_cut(l, side)?;
        let d = self.diffs(l);
        let mut v = self.du_sheet1_from_diffs(l, &d, side);
        self.apply_sheet_phase(&mut v, sheet);
        Ok(v)
    }

    /// Multiply raw sheet-1 du data by the phase of sheet `sheet`.
    pub fn apply_sheet_phase(&self, v: &mut [C], sheet: usize) {
        let r = sheet as i32 - 1;
        for s in 0..self.n - 1 {
            let ph = self.rho.powi(-r * (s as i32 + 1));
            for j in 0..self.m {
                v[j + self.m * s] *= ph;
            }
        }
    }

    /// Sheet change when crossing piece k of the contour going from C+ to C-.
    pub fn sheet_after_crossing_down(&self, k: usize, sheet: usize) -> usize {
        if k % 2 == 1 {
            if sheet == 1 {
                self.n
            } else {
                sheet - 1
            }
        } else {
            sheet
        }
    }

    pub fn sheet_after_crossing_up(&self, k: usize, sheet: usize) -> usize {
        if k % 2 == 1 {
            if sheet == self.n {
                1
            } else {
                sheet + 1
            }
        } else {
            sheet
        }
    }

    /// Minimal distance between branch points.
    pub fn min_gap(&self) -> f64 {
        let mut g = f64::INFINITY;
        for i in 0..self.lambdas.len() {
            for j in i + 1..self.lambdas.len() {
                g = g.min((self.lambdas[i] - self.lambdas[j]).norm());
            }
        }
        g
    }

    /// All N values of y over a base point.
    pub fn fiber(&self, l: C) -> Vec<C> {
        let d = self.diffs(l);
        let y1 = self.y1_from_diffs(&d, Side::Auto);
        (0..self.n).map(|s| y1 * self.rho.powi(s as i32)).collect()
    }

    /// Polygonal realization of alpha_{j+km} or beta_{j+km}, with offset h.
    ///
    /// Alpha: counterclockwise polygon around lambda_1..lambda_{2j} on sheet k+1.
    /// Beta: from lambda_{2j+1} to lambda_{2j} on sheet k+1 (just above the gap),
    /// around lambda_{2j} onto sheet N, back below the gap and around
    /// lambda_{2j+1} to close.
    pub fn cycle_path(&self, kind: CycleKind, index: usize, h: f64) -> Vec<CycleLeg> {
        let m = self.m;
        let j = (index - 1) % m + 1;
        let k = (index - 1) / m;
        match kind {
            CycleKind::Alpha => {
                let pts: Vec<C> = self.lambdas[..2 * j].to_vec();
                let mut v = Vec::new();
                v.push(pts[0] - h);
                for p in &pts {
                    v.push(*p - I * h);
                }
                v.push(pts[pts.len() - 1] + h);
                for p in pts.iter().rev() {
                    v.push(*p + I * h);
                }
                v.push(pts[0] - h);
                let mut ps = PathSpec::new(v);
                ps.start_sheet = k + 1;
                ps.min_clearance = 0.5 * h;
                vec![CycleLeg { path: ps }]
            }
            CycleKind::Beta => {
                let a = self.lambda(2 * j);
                let b = self.lambda(2 * j + 1);
                let d = b - a;
                let u = d / d.norm();
                let nrm = I * u;
                // on sheet k+1 above the gap from b to a
                let start = b - u * h + nrm * h;
                let mut v = vec![start, a + u * h + nrm * h];
                // turn around a: each ccw turn crosses the cut downwards and lowers
                // the sheet by one; going from sheet k+1 to sheet N takes k+1 turns (mod N)
                let turns = (k + 1) % self.n;
                for _ in 0..turns {
                    v.push(a - u * h + nrm * h);
                    v.push(a - u * h - nrm * h);
                    v.push(a + u * h - nrm * h);
                    v.push(a + u * h + nrm * h);
                }
                // back along the gap below, now on sheet N
                v.pop();
                v.push(b - u * h - nrm * h);
                // close around b: each ccw turn crosses the cut upwards and raises
                // the sheet by one, so k+1 turns bring sheet N back to sheet k+1
                let back = turns;
                let mut closing = Vec::new();
                for t in 0..back {
                    if t > 0 {
                        closing.push(b - u * h - nrm * h);
                    }
                    closing.push(b + u * h - nrm * h);
                    closing.push(b + u * h + nrm * h);
                    closing.push(b - u * h + nrm * h);
                }
                if back == 0 {
                    closing.push(b - u * h + nrm * h);
                }
                v.extend(closing);
                let mut ps = PathSpec::new(v);
                ps.start_sheet = k + 1;
                ps.min_clearance = 0.5 * h;
                vec![CycleLeg { path: ps }]
            }
        }
    }
}
