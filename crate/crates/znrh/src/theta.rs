//! Riemann theta functions with complex characteristics.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Provenance {
    FromConstants,
    FromDivisor,
    Manual,
}

/// Characteristics [delta; eps]: theta[eps, delta](z) sums over n + delta.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Characteristics {
    pub eps: Vec<C>,
    pub delta: Vec<C>,
    pub provenance: Provenance,
}

impl Characteristics {
    pub fn zero(g: usize) -> Self {
        Characteristics {
            eps: vec![C::new(0.0, 0.0); g],
            delta: vec![C::new(0.0, 0.0); g],
            provenance: Provenance::Manual,
        }
    }

    pub fn real(eps: &[f64], delta: &[f64]) -> Self {
        Characteristics {
            eps: eps.iter().map(|x| C::new(*x, 0.0)).collect(),
            delta: delta.iter().map(|x| C::new(*x, 0.0)).collect(),
            provenance: Provenance::Manual,
        }
    }

    pub fn genus(&self) -> usize {
        self.eps.len()
    }

    pub fn add(&self, o: &Characteristics) -> Characteristics {
        Characteristics {
            eps: self.eps.iter().zip(&o.eps).map(|(a, b)| a + b).collect(),
            delta: self.delta.iter().zip(&o.delta).map(|(a, b)| a + b).collect(),
            provenance: self.provenance,
        }
    }

    pub fn scale(&self, f: f64) -> Characteristics {
        Characteristics {
            eps: self.eps.iter().map(|a| a * f).collect(),
            delta: self.delta.iter().map(|a| a * f).collect(),
            provenance: self.provenance,
        }
    }

    pub fn neg(&self) -> Characteristics {
        self.scale(-1.0)
    }

    /// Representative with real parts in [-1, 1) (imaginary parts untouched).
    pub fn reduced(&self) -> Characteristics {
        let red = |x: &C| {
            let mut r = x.re - 2.0 * ((x.re + 1.0) / 2.0).floor();
            if r >= 1.0 {
                r -= 2.0;
            }
            C::new(r, x.im)
        };
        Characteristics {
            eps: self.eps.iter().map(red).collect(),
            delta: self.delta.iter().map(red).collect(),
            provenance: self.provenance,
        }
    }

    /// 4 <delta, eps> mod 2 for half-integer characteristics (0 even, 1 odd).
    pub fn parity(&self) -> Option<u8> {
        let mut s = 0.0;
        for (d, e) in self.delta.iter().zip(&self.eps) {
            if d.im != 0.0 || e.im != 0.0 {
                return None;
            }
            let (dd, ee) = (2.0 * d.re, 2.0 * e.re);
            if (dd - dd.round()).abs() > 1e-12 || (ee - ee.round()).abs() > 1e-12 {
                return None;
            }
            s += dd.round() * ee.round();
        }
        Some((s.rem_euclid(2.0)) as u8)
    }

    /// eps + Pi delta
    pub fn vector(&self, pi: &DMatrix<C>) -> DVector<C> {
        let d = DVector::from_vec(self.delta.clone());
        DVector::from_vec(self.eps.clone()) + pi * d
    }
}

/// Riemann matrix together with the Cholesky factor of its imaginary part.
#[derive(Debug, Clone)]
pub struct ThetaParams {
    pub pi: DMatrix<C>,
    pub tol: f64,
    y_inv: DMatrix<f64>,
    /// upper triangular R with Im Pi = R^T R
    r: DMatrix<f64>,
    /// ellipsoid radius in units of pi * |R x|^2
    pub trunc_radius: f64,
}

/// Value and derivatives of theta at one point.
#[derive(Debug, Clone)]
pub struct ThetaEval {
    pub value: C,
    pub grad: Vec<C>,
    pub hess: DMatrix<C>,
    /// third derivatives, flattened as [a * g * g + b * g + c]
    pub third: Vec<C>,
}

impl ThetaParams {
    pub fn new(pi: &DMatrix<C>) -> Result<Self> {
        Self::with_tol(pi, 1e-15)
    }

    pub fn with_tol(pi: &DMatrix<C>, tol: f64) -> Result<Self> {
        let g = pi.nrows();
        let y = DMatrix::from_fn(g, g, |i, j| 0.5 * (pi[(i, j)].im + pi[(j, i)].im));
        let eig = y.clone().symmetric_eigen();
        let lmin = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(lmin > 1e-8) {
            return Err(Error::IllConditioned(lmin));
        }
        let chol = y.clone().cholesky().ok_or(Error::IllConditioned(lmin))?;
        let r = chol.l().transpose();
        let y_inv = chol.inverse();
        // terms with pi|R x|^2 > R2 are below tol relative to the largest one;
        // the margin covers the polynomial factors of third derivatives
        let trunc = -tol.ln() + 3.0 * (1.0 + (g as f64) * 4.0).ln() + 6.0;
        Ok(ThetaParams { pi: pi.clone(), tol, y_inv, r, trunc_radius: trunc })
    }

    pub fn genus(&self) -> usize {
        self.pi.nrows()
    }

    /// Integer points n with pi |R (n - c)|^2 <= trunc_radius.
    fn lattice_points(&self, c: &[f64]) -> Vec<Vec<i64>> {
        let g = self.genus();
        let bound = self.trunc_radius / PI;
        let mut out = Vec::new();
        let mut n = vec![0i64; g];
        self.enumerate(g, c, bound, &mut n, &mut out);
        out
    }

    fn enumerate(&self, level: usize, c: &[f64], rem: f64, n: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if level == 0 {
            out.push(n.clone());
            return;
        }
        let i = level - 1;
        let g = self.genus();
        let mut shift = 0.0;
        for j in i + 1..g {
            shift += self.r[(i, j)] * (n[j] as f64 - c[j]);
        }
        let rii = self.r[(i, i)];
        // |rii (n_i - c_i) + shift|^2 <= rem
        let center = c[i] - shift / rii;
        let half = rem.max(0.0).sqrt() / rii;
        let lo = (center - half).ceil() as i64;
        let hi = (center + half).floor() as i64;
        for k in lo..=hi {
            let t = rii * (k as f64 - c[i]) + shift;
            let r2 = rem - t * t;
            if r2 < 0.0 {
                continue;
            }
            n[i] = k;
            self.enumerate(level - 1, c, r2, n, out);
        }
    }

    /// theta[eps, delta](z) and derivatives in z up to `order` (0..=3).
    pub fn eval(&self, z: &[C], ch: &Characteristics, order: usize) -> Result<ThetaEval> {
        let g = self.genus();
        if z.len() != g || ch.eps.len() != g || ch.delta.len() != g {
            return Err(Error::Validation("dimension mismatch in theta".into()));
        }
        // shifted argument w = z + eps and summation variable x = n + delta
        let w: Vec<C> = (0..g).map(|i| z[i] + ch.eps[i]).collect();
        let pid: Vec<C> = (0..g)
            .map(|i| (0..g).map(|j| self.pi[(i, j)] * ch.delta[j]).sum::<C>() + w[i])
            .collect();
        let im: Vec<f64> = pid.iter().map(|x| x.im).collect();
        let center: Vec<f64> = (0..g)
            .map(|i| -(0..g).map(|j| self.y_inv[(i, j)] * im[j]).sum::<f64>())
            .collect();
        let pts = self.lattice_points(&center);
        // exponent at the center, used as a common scale
        let expo = |x: &[C]| -> C {
            let mut q = C::new(0.0, 0.0);
            for i in 0..g {
                let mut row = C::new(0.0, 0.0);
                for j in 0..g {
                    row += self.pi[(i, j)] * x[j];
                }
                q += x[i] * (row * 0.5 + w[i]);
            }
            C::new(0.0, 2.0 * PI) * q
        };
        let mut value = C::new(0.0, 0.0);
        let mut grad = vec![C::new(0.0, 0.0); g];
        let mut hess = DMatrix::from_element(g, g, C::new(0.0, 0.0));
        let mut third = vec![C::new(0.0, 0.0); if order >= 3 { g * g * g } else { 0 }];
        let tpi = C::new(0.0, 2.0 * PI);
        let mut x = vec![C::new(0.0, 0.0); g];
        for n in &pts {
            for i in 0..g {
                x[i] = C::new(n[i] as f64, 0.0) + ch.delta[i];
            }
            let t = expo(&x).exp();
            value += t;
            if order >= 1 {
                let xs: Vec<C> = x.iter().map(|v| v * tpi).collect();
                for a in 0..g {
                    let ta = t * xs[a];
                    grad[a] += ta;
                    if order >= 2 {
                        for b in 0..g {
                            let tab = ta * xs[b];
                            hess[(a, b)] += tab;
                            if order >= 3 {
                                for cidx in 0..g {
                                    third[(a * g + b) * g + cidx] += tab * xs[cidx];
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(ThetaEval { value, grad, hess, third })
    }

    pub fn theta(&self, z: &[C], ch: &Characteristics) -> Result<C> {
        Ok(self.eval(z, ch, 0)?.value)
    }

    pub fn theta0(&self, z: &[C]) -> Result<C> {
        self.theta(z, &Characteristics::zero(self.genus()))
    }

    /// Derivative of theta[ch](z) with respect to the symmetric matrix entry
    /// Pi_kl (k != l moves both entries) through the heat equation.
    pub fn d_dpi(&self, ev: &ThetaEval, k: usize, l: usize) -> C {
        let f = if k == l { 2.0 } else { 1.0 };
        ev.hess[(k, l)] / (C::new(0.0, 2.0 * PI) * f)
    }

    /// Directional derivative of theta[ch](z) along dPi (full symmetric matrix).
    pub fn along_pi(&self, ev: &ThetaEval, dpi: &DMatrix<C>) -> C {
        let g = self.genus();
        let mut s = C::new(0.0, 0.0);
        for a in 0..g {
            for b in 0..g {
                s += ev.hess[(a, b)] * dpi[(a, b)];
            }
        }
        s / C::new(0.0, 4.0 * PI)
    }

    /// Directional derivative of the gradient along dPi (needs order 3).
    pub fn grad_along_pi(&self, ev: &ThetaEval, dpi: &DMatrix<C>) -> Vec<C> {
        let g = self.genus();
        (0..g)
            .map(|l| {
                let mut s = C::new(0.0, 0.0);
                for a in 0..g {
                    for b in 0..g {
                        s += ev.third[(l * g + a) * g + b] * dpi[(a, b)];
                    }
                }
                s / C::new(0.0, 4.0 * PI)
            })
            .collect()
    }
}

/// Jacobi theta functions theta_2 and theta_3 in the convention
/// theta_3(z; tau) = sum exp(i pi n^2 tau + 2 i pi n z).
pub fn jacobi_theta(k: u8, z: C, tau: C) -> Result<C> {
    if !(tau.im > 1e-8) {
        return Err(Error::IllConditioned(tau.im));
    }
    let shift = match k {
        2 => 0.5,
        3 => 0.0,
        _ => return Err(Error::Validation(format!("jacobi theta index {k}"))),
    };
    // center the sum where |term| peaks
    let c = -z.im / tau.im - shift;
    let half = (40.0 / (PI * tau.im)).sqrt() + 2.0;
    let lo = (c - half).floor() as i64;
    let hi = (c + half).ceil() as i64;
    let mut s = C::new(0.0, 0.0);
    for n in lo..=hi {
        let x = n as f64 + shift;
        s += (C::new(0.0, PI) * x * x * tau + C::new(0.0, 2.0 * PI) * x * z).exp();
    }
    Ok(s)
}

/// Reduce x modulo the lattice Z^g + Pi Z^g; returns the reduced vector and
/// the integer vectors (n, k) with x = reduced + n + Pi k.
pub fn lattice_reduce(pi: &DMatrix<C>, x: &DVector<C>) -> (DVector<C>, Vec<i64>, Vec<i64>) {
    let g = pi.nrows();
    let y = DMatrix::from_fn(g, g, |i, j| pi[(i, j)].im);
    let yi = y.try_inverse().unwrap_or_else(|| DMatrix::identity(g, g));
    let imx = DVector::from_fn(g, |i, _| x[i].im);
    let kf = yi * imx;
    let k: Vec<i64> = kf.iter().map(|v| v.round() as i64).collect();
    let kc = DVector::from_fn(g, |i, _| C::new(k[i] as f64, 0.0));
    let r1 = x - pi * kc;
    let n: Vec<i64> = r1.iter().map(|v| v.re.round() as i64).collect();
    let red = DVector::from_fn(g, |i, _| r1[i] - n[i] as f64);
    (red, n, k)
}
