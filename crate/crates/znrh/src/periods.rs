//! Periods, normalized differentials, Abel maps and characteristics.
//!
//! Cycle integrals are reduced to integrals of du along the upper side of
//! the cuts (sheet 1) and along the gaps between them:
//!   alpha_{j+rm} runs counterclockwise around the cuts 1..j on sheet r+1,
//!   beta_{j+rm} integrates (J^r - J^(N-1)) du from lambda_{2j+1} to lambda_{2j}.
//! Abel maps start at infinity and follow a vertical ray, from +i inf for
//! points of C+ and from -i inf for points of C-.

use crate::curve::{Region, Side, ZnCurve};
use crate::error::{Error, Result};
use crate::numerics::{tanh_sinh_vec, QuadratureSpec, I};
use crate::theta::{lattice_reduce, Characteristics, Provenance};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;
use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct PeriodData {
    pub curve: ZnCurve,
    pub a_blocks: Vec<DMatrix<C>>,
    pub b_blocks: Vec<DMatrix<C>>,
    pub r_a: DMatrix<C>,
    pub r_b: DMatrix<C>,
    pub a: DMatrix<C>,
    pub b: DMatrix<C>,
    /// A^{-1}: dv = A^{-1} du
    pub norm: DMatrix<C>,
    pub pi: DMatrix<C>,
    /// raw integrals of du along the upper side of cut l (sheet 1)
    pub cut_integrals: Vec<DVector<C>>,
    /// raw integrals of du over the gap [lambda_{2j}, lambda_{2j+1}] (sheet 1)
    pub gap_integrals: Vec<DVector<C>>,
    pub k_inf: DVector<C>,
    pub spec: QuadratureSpec,
}

/// Weighted sum of branch points; index 0 stands for infinity.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BranchDivisor {
    pub weights: Vec<(usize, i64)>,
}

impl BranchDivisor {
    pub fn degree(&self) -> i64 {
        self.weights.iter().map(|w| w.1).sum()
    }
}

/// Index of du_{k+ms} (k 1-based, s 0-based) in the flat 0-based basis.
pub fn du_index(m: usize, k: usize, s: usize) -> usize {
    (k - 1) + m * s
}

fn sheet_phase(curve: &ZnCurve, r: usize, s: usize) -> C {
    // pullback of du_{.+sm} by J^r
    curve.rho.powi(-((r * (s + 1)) as i32))
}

fn diffs_on_segment(curve: &ZnCurve, ia: usize, ib: usize, l: C, da: C, db: C) -> Vec<C> {
    curve
        .lambdas
        .iter()
        .enumerate()
        .map(|(i, x)| {
            if i == ia {
                da
            } else if i == ib {
                -db
            } else {
                l - x
            }
        })
        .collect()
}

fn worst_exponent(curve: &ZnCurve, i: usize) -> f64 {
    (0..curve.n - 1).map(|s| curve.du_exponent(i + 1, s)).fold(f64::MIN, f64::max)
}

/// Raw q^s/y^(s+1) factors and du values on sheet 1.
fn du_parts(curve: &ZnCurve, l: C, d: &[C], side: Side) -> (Vec<C>, Vec<C>) {
    let y = curve.y1_from_diffs(d, side);
    let qv: C = (0..curve.m).map(|k| d[2 * k + 1]).product();
    let mut h = Vec::with_capacity(curve.n - 1);
    let mut cur = 1.0 / y;
    for _ in 0..curve.n - 1 {
        h.push(cur);
        cur *= qv / y;
    }
    let g = curve.genus();
    let mut du = vec![C::new(0.0, 0.0); g];
    for s in 0..curve.n - 1 {
        let mut lp = C::new(1.0, 0.0);
        for j in 0..curve.m {
            du[j + curve.m * s] = lp * h[s];
            lp *= l;
        }
    }
    (h, du)
}

/// d/d lambda_k of the integrand of a segment integral after the affine
/// reparametrization lambda = lambda_a + (lambda_b - lambda_a) tau.
fn segment_derivative_integrand(
    curve: &ZnCurve,
    ia: usize,
    ib: usize,
    k: usize,
    l: C,
    d: &[C],
    side: Side,
) -> Vec<C> {
    let (h, du) = du_parts(curve, l, d, side);
    let len = curve.lambdas[ib] - curve.lambdas[ia];
    let tau = d[ia] / len;
    let one_minus = -d[ib] / len;
    let m = curve.m;
    let mut out = vec![C::new(0.0, 0.0); curve.genus()];
    for s in 0..curve.n - 1 {
        let ea = curve.du_exponent(ia + 1, s);
        let eb = curve.du_exponent(ib + 1, s);
        let mut others = C::new(0.0, 0.0);
        for i in 0..curve.npoints() {
            if i != ia && i != ib {
                others += curve.du_exponent(i + 1, s) / d[i];
            }
        }
        // multiplier common to all j, plus the weight of the d/dlambda term
        let (base, weight) = if k == ia {
            ((ea + eb - 1.0) / len - one_minus * others, one_minus)
        } else if k == ib {
            ((1.0 - ea - eb) / len - tau * others, tau)
        } else {
            (C::new(curve.du_exponent(k + 1, s), 0.0) / d[k], C::new(0.0, 0.0))
        };
        let mut lpm1 = C::new(0.0, 0.0);
        for j in 0..m {
            let idx = j + m * s;
            let mut v = du[idx] * base;
            if j >= 1 {
                v += weight * (j as f64) * lpm1 * h[s];
            }
            out[idx] = v;
            lpm1 = if j == 0 { C::new(1.0, 0.0) } else { lpm1 * l };
        }
    }
    out
}

/// Integral of du (or of its lambda_k derivative) along the straight segment
/// between adjacent branch points ia < ib on sheet 1.
pub fn segment_integral(
    curve: &ZnCurve,
    ia: usize,
    ib: usize,
    side: Side,
    deriv: Option<usize>,
    spec: &QuadratureSpec,
) -> Result<DVector<C>> {
    let a = curve.lambdas[ia];
    let b = curve.lambdas[ib];
    let mut sp = *spec;
    sp.endpoint_exponents = (-worst_exponent(curve, ia), -worst_exponent(curve, ib));
    let g = curve.genus();
    let f = |l: C, da: C, db: C| -> Vec<C> {
        let d = diffs_on_segment(curve, ia, ib, l, da, db);
        match deriv {
            None => du_parts(curve, l, &d, side).1,
            Some(k) => segment_derivative_integrand(curve, ia, ib, k, l, &d, side),
        }
    };
    let (v, _) = tanh_sinh_vec(f, a, b, g, &sp)?;
    Ok(DVector::from_vec(v))
}

fn ray_scale(curve: &ZnCurve, l: C) -> f64 {
    1.0 + curve.lambdas.iter().map(|x| (x - l).norm()).fold(0.0, f64::max)
}

/// Raw sheet-1 integral of du from +-i inf along the vertical ray to `l`.
/// `from_above` selects +i inf (points of C+ or the upper boundary values).
/// With `deriv = Some(k)` the integrand is differentiated in lambda_k
/// (requires `l` different from lambda_k).
pub fn ray_integral(
    curve: &ZnCurve,
    l: C,
    from_above: bool,
    deriv: Option<usize>,
    spec: &QuadratureSpec,
) -> Result<DVector<C>> {
    let n = curve.n as f64;
    let sigma = if from_above { 1.0 } else { -1.0 };
    let t0 = ray_scale(curve, l);
    let side = if from_above { Side::Plus } else { Side::Minus };
    let base: Vec<C> = curve.lambdas.iter().map(|x| l - x).collect();
    let end_bp = base.iter().position(|d| d.norm() == 0.0);
    let mut sp = *spec;
    sp.endpoint_exponents = (0.0, end_bp.map(|i| -worst_exponent(curve, i)).unwrap_or(0.0));
    let g = curve.genus();
    let f = |u: C, _du: C, dbu: C| -> Vec<C> {
        let u = u.re;
        let one_minus_u = dbu.re;
        if u <= 0.0 {
            return vec![C::new(0.0, 0.0); g];
        }
        // lambda - l = sigma i t0 (u^-N - 1)
        let off = if one_minus_u < 0.5 { (-n * (-one_minus_u).ln_1p()).exp_m1() } else { u.powf(-n) - 1.0 };
        let shift = I * (sigma * t0 * off);
        let d: Vec<C> = base.iter().map(|b| b + shift).collect();
        let lam = l + shift;
        let jac = I * (sigma * t0 * (-n) * u.powf(-n - 1.0));
        let (_, du) = du_parts(curve, lam, &d, side);
        let mut v = du;
        if let Some(k) = deriv {
            for s in 0..curve.n - 1 {
                let e = curve.du_exponent(k + 1, s) / d[k];
                for j in 0..curve.m {
                    v[j + curve.m * s] *= e;
                }
            }
        }
        v.iter().map(|x| x * jac).collect()
    };
    let (v, _) = tanh_sinh_vec(f, C::new(0.0, 0.0), C::new(1.0, 0.0), g, &sp)?;
    Ok(DVector::from_vec(v))
}

fn kron_blocks(small: &DMatrix<C>, m: usize) -> DMatrix<C> {
    let k = small.nrows();
    DMatrix::from_fn(k * m, k * m, |i, j| {
        if i % m == j % m {
            small[(i / m, j / m)]
        } else {
            C::new(0.0, 0.0)
        }
    })
}

/// Structural matrices R_A and R_B (already tensored with 1_m).
pub fn structural_matrices(curve: &ZnCurve) -> (DMatrix<C>, DMatrix<C>) {
    let n = curve.n;
    let rho = curve.rho;
    let ra = DMatrix::from_fn(n - 1, n - 1, |i, k| {
        let (i, k) = ((i + 1) as i32, (k + 1) as i32);
        (rho.powi(-i * (k - 1)) - rho.powi(-i * k)) / (1.0 - rho.powi(-i))
    });
    let rb = DMatrix::from_fn(n - 1, n - 1, |i, k| {
        let (i, k) = ((i + 1) as i32, (k + 1) as i32);
        let nn = n as i32;
        (rho.powi(-i * (k - 1)) - rho.powi(-i * (nn - 1))) / (1.0 - rho.powi(-(nn - 1) * i))
    });
    (kron_blocks(&ra, curve.m), kron_blocks(&rb, curve.m))
}

/// Assemble A and B (full g x g) from raw cut and gap integrals.
fn assemble(curve: &ZnCurve, cuts: &[DVector<C>], gaps: &[DVector<C>]) -> (DMatrix<C>, DMatrix<C>) {
    let m = curve.m;
    let g = curve.genus();
    let rho = curve.rho;
    let mut a = DMatrix::from_element(g, g, C::new(0.0, 0.0));
    let mut b = DMatrix::from_element(g, g, C::new(0.0, 0.0));
    for s in 0..curve.n - 1 {
        let js = rho.powi(-((s + 1) as i32));
        for k in 0..m {
            let row = k + m * s;
            let mut acc = C::new(0.0, 0.0);
            for j in 0..m {
                acc += cuts[j][row];
                for r in 0..curve.n - 1 {
                    let col = j + m * r;
                    let ph = sheet_phase(curve, r, s);
                    a[(row, col)] = ph * (js - 1.0) * acc;
                    b[(row, col)] = -(ph - rho.powi((s + 1) as i32)) * gaps[j][row];
                }
            }
        }
    }
    (a, b)
}

fn blocks_of(curve: &ZnCurve, full: &DMatrix<C>) -> Vec<DMatrix<C>> {
    let m = curve.m;
    (0..curve.n - 1)
        .map(|s| DMatrix::from_fn(m, m, |k, j| full[(k + m * s, j)]))
        .collect()
}

fn inverse_checked(a: &DMatrix<C>) -> Result<DMatrix<C>> {
    let sv = a.clone().svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let cond = smax / smin;
    if !(cond < 1e12) {
        return Err(Error::SingularNormalization(cond));
    }
    a.clone().try_inverse().ok_or(Error::SingularNormalization(cond))
}

/// Block matrices A_s and B_s, s = 1..N-1.
pub fn block_periods(curve: &ZnCurve) -> Result<(Vec<DMatrix<C>>, Vec<DMatrix<C>>)> {
    let pd = PeriodData::new(curve)?;
    Ok((pd.a_blocks, pd.b_blocks))
}

pub fn period_matrix(curve: &ZnCurve) -> Result<PeriodData> {
    PeriodData::new(curve)
}

/// Derivatives of A, B and Pi in one branch point.
#[derive(Debug, Clone)]
pub struct PeriodDerivative {
    pub da: DMatrix<C>,
    pub db: DMatrix<C>,
    pub dnorm: DMatrix<C>,
    pub dpi: DMatrix<C>,
}

impl PeriodData {
    pub fn new(curve: &ZnCurve) -> Result<Self> {
        Self::with_spec(curve, QuadratureSpec::default())
    }

    pub fn with_spec(curve: &ZnCurve, spec: QuadratureSpec) -> Result<Self> {
        let m = curve.m;
        let mut cuts = Vec::with_capacity(m);
        let mut gaps = Vec::with_capacity(m);
        for l in 0..m {
            cuts.push(segment_integral(curve, 2 * l, 2 * l + 1, Side::Plus, None, &spec)?);
            gaps.push(segment_integral(curve, 2 * l + 1, 2 * l + 2, Side::Auto, None, &spec)?);
        }
        let (a, b) = assemble(curve, &cuts, &gaps);
        let norm = inverse_checked(&a)?;
        let pi = &norm * &b;
        let (r_a, r_b) = structural_matrices(curve);
        let a_blocks = blocks_of(curve, &a);
        let b_blocks = blocks_of(curve, &b);
        let mut pd = PeriodData {
            curve: curve.clone(),
            a_blocks,
            b_blocks,
            r_a,
            r_b,
            a,
            b,
            norm,
            pi,
            cut_integrals: cuts,
            gap_integrals: gaps,
            k_inf: DVector::from_element(curve.genus(), C::new(0.0, 0.0)),
            spec,
        };
        pd.k_inf = pd.riemann_constants()?;
        Ok(pd)
    }

    pub fn genus(&self) -> usize {
        self.curve.genus()
    }

    /// Pi reassembled from the block data and the structural matrices.
    pub fn pi_structured(&self) -> Result<DMatrix<C>> {
        let m = self.curve.m;
        let g = self.genus();
        let mut diag = DMatrix::from_element(g, g, C::new(0.0, 0.0));
        for s in 0..self.curve.n - 1 {
            let ai = inverse_checked(&self.a_blocks[s])?;
            let blk = ai * &self.b_blocks[s];
            for i in 0..m {
                for j in 0..m {
                    diag[(i + m * s, j + m * s)] = blk[(i, j)];
                }
            }
        }
        let rai = inverse_checked(&self.r_a)?;
        Ok(rai * diag * &self.r_b)
    }

    /// Apply the sheet phase of `sheet` to raw sheet-1 data and normalize.
    pub fn normalize(&self, raw: &DVector<C>, sheet: usize) -> DVector<C> {
        let mut v = raw.clone();
        self.curve.apply_sheet_phase(v.as_mut_slice(), sheet);
        &self.norm * v
    }

    /// Normalized differentials dv/dlambda at a point of the given sheet.
    pub fn dv(&self, l: C, sheet: usize, side: Side) -> Result<DVector<C>> {
        let du = self.curve.du(l, sheet, side)?;
        Ok(&self.norm * DVector::from_vec(du))
    }

    fn resolve_side(&self, l: C, side: Side) -> Result<bool> {
        match side {
            Side::Plus => Ok(true),
            Side::Minus => Ok(false),
            Side::Auto => match self.curve.region(l) {
                Region::Plus => Ok(true),
                Region::Minus => Ok(false),
                Region::Contour(_) => Err(Error::CutAmbiguity),
            },
        }
    }

    /// Raw sheet-1 Abel integral from infinity with the C+/C- path rule.
    pub fn abel_raw(&self, l: C, side: Side) -> Result<DVector<C>> {
        let above = self.resolve_side(l, side)?;
        ray_integral(&self.curve, l, above, None, &self.spec)
    }

    /// v(P) = integral of dv from infinity to P = (l, sheet).
    pub fn abel(&self, l: C, sheet: usize, side: Side) -> Result<DVector<C>> {
        Ok(self.normalize(&self.abel_raw(l, side)?, sheet))
    }

    /// Abel map between two sheeted points along the prescribed ray paths.
    pub fn abel_map(&self, from: (C, usize, Side), to: (C, usize, Side)) -> Result<DVector<C>> {
        if from == to {
            return Ok(DVector::from_element(self.genus(), C::new(0.0, 0.0)));
        }
        Ok(self.abel(to.0, to.1, to.2)? - self.abel(from.0, from.1, from.2)?)
    }

    /// U_k = integral from infinity to lambda_k (through C+).
    pub fn u_vector(&self, k: usize) -> Result<DVector<C>> {
        self.abel(self.curve.lambda(k), 1, Side::Plus)
    }

    /// K_inf = (N-1) sum_k U_{2k}.
    pub fn riemann_constants(&self) -> Result<DVector<C>> {
        let mut k = DVector::from_element(self.genus(), C::new(0.0, 0.0));
        for j in 1..=self.curve.m {
            k += self.u_vector(2 * j)?;
        }
        Ok(k * C::new((self.curve.n - 1) as f64, 0.0))
    }

    /// Rational characteristic table [U_k], k = 1..2m+1.
    pub fn branch_characteristics(&self) -> Vec<Characteristics> {
        branch_table(self.curve.n, self.curve.m)
    }

    /// Max residual of v(lambda_k) - (eps + Pi delta) modulo the lattice.
    pub fn verify_branch_characteristics(&self) -> Result<f64> {
        let mut worst = 0.0f64;
        for (k, ch) in self.branch_characteristics().iter().enumerate() {
            let u = self.u_vector(k + 1)?;
            let x = u - ch.vector(&self.pi);
            let (red, _, _) = lattice_reduce(&self.pi, &x);
            worst = worst.max(red.iter().map(|v| v.norm()).fold(0.0, f64::max));
        }
        if worst > 1e-6 {
            return Err(Error::ConventionMismatch(format!("branch characteristic residual {worst:e}")));
        }
        Ok(worst)
    }

    /// Characteristics of sum s_i U_i - (N-1) sum_k U_{2k} from the tables.
    pub fn divisor_characteristics(&self, d: &BranchDivisor) -> Characteristics {
        divisor_chars(self.curve.n, self.curve.m, d)
    }

    /// Residuals of the four branch point identities (max abs over all indices).
    pub fn car_residuals(&self) -> Result<[f64; 4]> {
        let n = self.curve.n;
        let m = self.curve.m;
        let nf = n as f64;
        let mut res = [0.0f64; 4];
        // integrals along the upper side of cut l from its right end to its left end
        let cut_v: Vec<DVector<C>> = self.cut_integrals.iter().map(|c| -(&self.norm * c)).collect();
        // cut m+1 is the ray: integral from infinity to lambda_{2m+1}
        let ray_v = self.u_vector(2 * m + 1)?;
        let gap_v: Vec<DVector<C>> = self.gap_integrals.iter().map(|c| -(&self.norm * c)).collect();
        for k in 1..=m {
            for s in 0..n - 1 {
                let idx = du_index(m, k, s);
                let want = (nf - 1.0 - s as f64) / nf;
                res[0] = res[0].max((cut_v[k - 1][idx] - want).norm());
                let next = if k < m { &cut_v[k] } else { &ray_v };
                res[1] = res[1].max((next[idx] + want).norm());
                for j in 1..=m {
                    if j != k && j != k + 1 {
                        let idxj = du_index(m, j, s);
                        res[2] = res[2].max(next[idxj].norm());
                    }
                }
                for j in 1..=m {
                    let mut want4 = self.pi[(idx, j - 1)] * ((nf - 1.0) / nf);
                    for r in 1..n - 1 {
                        want4 -= self.pi[(idx, j - 1 + r * m)] / nf;
                    }
                    res[3] = res[3].max((gap_v[j - 1][idx] - want4).norm());
                }
            }
        }
        Ok(res)
    }

    /// Residual of the J-action relations on the cycles, evaluated on periods.
    pub fn j_action_residual(&self) -> f64 {
        let n = self.curve.n;
        let m = self.curve.m;
        let g = self.genus();
        let mut worst = 0.0f64;
        // J^* du_{.+sm} = rho^-(s+1) du_{.+sm}; integral over J gamma equals
        // integral of the pulled back form over gamma
        for row in 0..g {
            let s = row / m;
            let ph = self.curve.rho.powi(-((s + 1) as i32));
            for i in 0..m {
                for sc in 0..n - 1 {
                    let col = i + m * sc;
                    let ja = self.a[(row, col)] * ph;
                    let want_a = if sc + 1 < n - 1 {
                        self.a[(row, i + m * (sc + 1))]
                    } else {
                        -(0..n - 1).map(|t| self.a[(row, i + m * t)]).sum::<C>()
                    };
                    worst = worst.max((ja - want_a).norm());
                    let jb = self.b[(row, col)] * ph;
                    let want_b = if sc + 1 < n - 1 {
                        self.b[(row, i + m * (sc + 1))] - self.b[(row, i)]
                    } else {
                        -self.b[(row, i)]
                    };
                    worst = worst.max((jb - want_b).norm());
                }
            }
        }
        worst
    }

    /// Analytic derivative of the periods in lambda_k (k 1-based).
    pub fn derivative(&self, k: usize) -> Result<PeriodDerivative> {
        let curve = &self.curve;
        let m = curve.m;
        let mut cuts = Vec::with_capacity(m);
        let mut gaps = Vec::with_capacity(m);
        for l in 0..m {
            cuts.push(segment_integral(curve, 2 * l, 2 * l + 1, Side::Plus, Some(k - 1), &self.spec)?);
            gaps.push(segment_integral(curve, 2 * l + 1, 2 * l + 2, Side::Auto, Some(k - 1), &self.spec)?);
        }
        let (da, db) = assemble(curve, &cuts, &gaps);
        let dnorm = -(&self.norm * &da * &self.norm);
        let dpi = &self.norm * (&db - &da * &self.pi);
        Ok(PeriodDerivative { da, db, dnorm, dpi })
    }

    /// dPi/dlambda_k from the residue of sum_s dv_i dv_j / dlambda at lambda_k.
    pub fn rauch(&self, k: usize) -> Result<DMatrix<C>> {
        let curve = &self.curve;
        let g = self.genus();
        let lk = curve.lambda(k);
        let radius = curve.min_gap() / 4.0;
        let nodes = 96;
        let mut acc = DMatrix::from_element(g, g, C::new(0.0, 0.0));
        for t in 0..nodes {
            // offset the nodes so none sits on the contour
            let ang = 2.0 * PI * (t as f64 + 0.37) / nodes as f64;
            let dz = C::from_polar(radius, ang);
            let l = lk + dz;
            let d: Vec<C> = curve.lambdas.iter().map(|x| l - x).collect();
            let raw = DVector::from_vec(du_parts(curve, l, &d, Side::Auto).1);
            for sheet in 1..=curve.n {
                let v = self.normalize(&raw, sheet);
                for i in 0..g {
                    for j in 0..g {
                        acc[(i, j)] += v[i] * v[j] * dz;
                    }
                }
            }
        }
        Ok(acc * (C::new(0.0, 2.0 * PI) / nodes as f64))
    }

    pub fn rauch_derivative(&self, i: usize, j: usize, k: usize) -> Result<C> {
        Ok(self.rauch(i)?[(j, k)])
    }

    /// d/dlambda_k of the Abel map v(l) on the given sheet (l in C+ or C-, not a branch point).
    pub fn abel_derivative(&self, l: C, sheet: usize, side: Side, k: usize, dnorm: &DMatrix<C>) -> Result<DVector<C>> {
        let above = self.resolve_side(l, side)?;
        let raw = ray_integral(&self.curve, l, above, None, &self.spec)?;
        let draw = ray_integral(&self.curve, l, above, Some(k - 1), &self.spec)?;
        let mut r = raw;
        let mut dr = draw;
        self.curve.apply_sheet_phase(r.as_mut_slice(), sheet);
        self.curve.apply_sheet_phase(dr.as_mut_slice(), sheet);
        Ok(dnorm * r + &self.norm * dr)
    }
}

/// The rational tables [U_k] for the curve with parameters (N, m).
pub fn branch_table(n: usize, m: usize) -> Vec<Characteristics> {
    let g = (n - 1) * m;
    let nf = n as f64;
    let mut out = Vec::with_capacity(2 * m + 1);
    for idx in 1..=2 * m + 1 {
        let mut eps = vec![0.0; g];
        let mut delta = vec![0.0; g];
        // U_{2k+1}: delta = -1/N at positions > k; U_{2k}: positions >= k
        let (k, first) = if idx % 2 == 1 { ((idx - 1) / 2, (idx - 1) / 2 + 1) } else { (idx / 2, idx / 2) };
        for s in 1..n {
            for pos in 1..=m {
                let flat = pos - 1 + m * (s - 1);
                if pos >= first {
                    delta[flat] = -1.0 / nf;
                }
                if k >= 1 && pos == k {
                    eps[flat] = s as f64 / nf;
                }
            }
        }
        let mut ch = Characteristics::real(&eps, &delta);
        ch.provenance = Provenance::FromDivisor;
        out.push(ch);
    }
    out
}

/// Characteristics of sum s_i [U_i] - (N-1) sum_k [U_{2k}]; infinity contributes zero.
pub fn divisor_chars(n: usize, m: usize, d: &BranchDivisor) -> Characteristics {
    let table = branch_table(n, m);
    let g = (n - 1) * m;
    let mut acc = Characteristics::zero(g);
    if d.weights.iter().all(|w| w.1 == 0) {
        acc.provenance = Provenance::FromDivisor;
        return acc;
    }
    for &(i, w) in &d.weights {
        if i >= 1 {
            acc = acc.add(&table[i - 1].scale(w as f64));
        }
    }
    for k in 1..=m {
        acc = acc.add(&table[2 * k - 1].scale(-((n - 1) as f64)));
    }
    acc.provenance = Provenance::FromDivisor;
    acc
}
