//! Command-line front end: JSON configuration in, JSON reports and CSV grids out.
//!
//! Exit codes: 0 pass, 1 check failure, 2 validation error, 3 numerical
//! failure, 4 solvability violation.

use crate::curve::{Region, Side, ZnCurve};
use crate::error::Error;
use crate::kernels::{self, CurvePoint, KernelContext};
use crate::n3m1;
use crate::numerics::max_abs;
use crate::periods::PeriodData;
use crate::rh::{self, MonodromySet, RHSolution};
use crate::schlesinger;
use crate::theta::Characteristics;
use clap::{Parser, Subcommand};
use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_SOLVABILITY: i32 = 4;

pub const SUITES: [&str; 6] = ["jumps", "monodromy", "schlesinger", "thomae", "fay", "n3m1"];

#[derive(Parser, Debug)]
#[command(name = "znrh", version, about = "Theta-function solutions of Z_N Riemann-Hilbert problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// output directory for report.json and grid.csv
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// tolerance override NAME=VALUE (repeatable)
    #[arg(long = "tol", global = true)]
    pub tol: Vec<String>,
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,
    /// print the report as JSON instead of a table
    #[arg(long, global = true)]
    pub json: bool,
    /// extra checks, e.g. rauch (repeatable)
    #[arg(long = "check", global = true)]
    pub check: Vec<String>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// period matrix, branch characteristics and their invariants
    Periods,
    /// Y on a grid, the A_k and tau
    Solve,
    /// run an invariant suite: jumps, monodromy, schlesinger, thomae, fay, n3m1
    Verify { suite: String },
    /// the N = 3, m = 1 pipeline on a built-in configuration
    DemoN3m1,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunConfig {
    #[serde(rename = "N")]
    pub n: usize,
    pub m: usize,
    pub lambdas: Vec<[f64; 2]>,
    #[serde(default)]
    pub c: Vec<[f64; 2]>,
    #[serde(default)]
    pub d: Vec<[f64; 2]>,
    #[serde(default)]
    pub lambda0: Option<[f64; 2]>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub eval_points: Vec<[f64; 2]>,
}

fn cx(p: [f64; 2]) -> C {
    C::new(p[0], p[1])
}

fn pair(z: C) -> [f64; 2] {
    [z.re, z.im]
}

fn mat_json(m: &DMatrix<C>) -> Value {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| pair(m[(i, j)])).collect()).collect();
    json!(rows)
}

fn vec_json(v: &[C]) -> Value {
    json!(v.iter().map(|z| pair(*z)).collect::<Vec<_>>())
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    /// "max" passes when value < tol, "min" when value > tol
    pub kind: String,
    pub pass: bool,
}

impl Check {
    pub fn below(name: &str, value: f64, tol: f64) -> Self {
        Check { name: name.into(), value, tol, kind: "max".into(), pass: value < tol }
    }

    pub fn above(name: &str, value: f64, tol: f64) -> Self {
        Check { name: name.into(), value, tol, kind: "min".into(), pass: value > tol }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub seed: u64,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub data: Value,
    #[serde(skip)]
    pub grid: Option<String>,
}

impl Report {
    fn new(command: &str, seed: u64, checks: Vec<Check>, data: Value) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Report { command: command.into(), seed, pass, checks, data, grid: None }
    }

    pub fn failing(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect()
    }

    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} (seed {})", self.command, self.seed);
        for c in &self.checks {
            let op = if c.kind == "max" { "<" } else { ">" };
            let _ = writeln!(s, "  {:<40} {:>12.3e} {} {:<9.1e} {}", c.name, c.value, op, c.tol, if c.pass { "pass" } else { "FAIL" });
        }
        let _ = writeln!(s, "{}", if self.pass { "all checks pass" } else { "some checks FAILED" });
        s
    }
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn validation(msg: impl Into<String>) -> Self {
        CliError { code: EXIT_VALIDATION, message: msg.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::SolvabilityViolation(_) => EXIT_SOLVABILITY,
            Error::Validation(_)
            | Error::BadArity(_)
            | Error::DuplicatePoints
            | Error::DomainError(_)
            | Error::CutAmbiguity
            | Error::ZeroConstant(_) => EXIT_VALIDATION,
            _ => EXIT_NUMERICAL,
        };
        CliError { code, message: e.to_string() }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

pub fn default_tolerances() -> BTreeMap<String, f64> {
    let pairs = [
        ("symmetry", 1e-9),
        ("branch", 1e-8),
        ("structure", 1e-8),
        ("rauch", 1e-6),
        ("jumps", 1e-8),
        ("identity", 1e-10),
        ("det_nonzero", 1e-8),
        ("monodromy", 1e-7),
        ("residue", 1e-6),
        ("trace", 1e-10),
        ("eigen", 1e-6),
        ("schlesinger", 1e-5),
        ("control", 1e-2),
        ("perturbation", 1e-4),
        ("tau", 1e-6),
        ("thomae", 1e-8),
        ("fay", 1e-7),
        ("det", 1e-7),
        ("gamma", 1e-9),
        ("szego", 1e-8),
        ("decompose", 1e-10),
        ("roundtrip", 1e-8),
        ("goursat", 1e-10),
        ("halphen", 1e-8),
        ("n3m1", 1e-8),
    ];
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

pub struct Context {
    pub config: RunConfig,
    pub tol: BTreeMap<String, f64>,
    pub seed: u64,
    pub checks: Vec<String>,
}

impl Context {
    pub fn new(config: RunConfig, overrides: &[String], seed: u64, checks: Vec<String>) -> CliResult<Self> {
        let mut tol = default_tolerances();
        for (k, v) in &config.tolerances {
            tol.insert(k.clone(), *v);
        }
        for o in overrides {
            let (k, v) = o.split_once('=').ok_or_else(|| CliError::validation(format!("--tol expects NAME=VALUE, got {o}")))?;
            let v: f64 = v.parse().map_err(|_| CliError::validation(format!("tolerance {k} is not a number")))?;
            tol.insert(k.to_string(), v);
        }
        validate(&config)?;
        Ok(Context { config, tol, seed, checks })
    }

    fn t(&self, name: &str) -> f64 {
        self.tol.get(name).copied().unwrap_or(1e-8)
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    pub fn curve(&self) -> CliResult<ZnCurve> {
        let l: Vec<C> = self.config.lambdas.iter().map(|p| cx(*p)).collect();
        Ok(ZnCurve::new(self.config.n, &l)?)
    }

    pub fn constants(&self) -> (Vec<C>, Vec<C>) {
        let g = (self.config.n - 1) * self.config.m;
        let get = |v: &Vec<[f64; 2]>| if v.is_empty() { vec![C::new(1.0, 0.0); g] } else { v.iter().map(|p| cx(*p)).collect() };
        (get(&self.config.c), get(&self.config.d))
    }

    pub fn lambda0(&self, curve: &ZnCurve) -> C {
        match self.config.lambda0 {
            Some(p) => cx(p),
            None => default_lambda0(curve),
        }
    }

    pub fn monodromy(&self) -> CliResult<MonodromySet> {
        let (c, d) = self.constants();
        Ok(rh::build_monodromy(self.config.n, self.config.m, &c, &d)?)
    }

    pub fn solve(&self) -> CliResult<RHSolution> {
        let curve = self.curve()?;
        let ms = self.monodromy()?;
        Ok(rh::solve_y(&curve, &ms, self.lambda0(&curve))?)
    }
}

/// A base point above the middle of the branch points.
pub fn default_lambda0(curve: &ZnCurve) -> C {
    let np = curve.npoints() as f64;
    let c: C = curve.lambdas.iter().sum::<C>() / np;
    let top = curve.lambdas.iter().map(|x| x.im).fold(f64::MIN, f64::max);
    C::new(c.re + 0.1 * curve.min_gap(), top + 0.5 * curve.min_gap().max(0.2))
}

pub fn validate(cfg: &RunConfig) -> CliResult<()> {
    if cfg.n < 2 {
        return Err(CliError::validation(format!("N must be at least 2, got {}", cfg.n)));
    }
    if cfg.m < 1 {
        return Err(CliError::validation("m must be at least 1"));
    }
    if cfg.lambdas.len() != 2 * cfg.m + 1 {
        return Err(CliError::validation(format!(
            "expected 2m+1 = {} branch points, got {}",
            2 * cfg.m + 1,
            cfg.lambdas.len()
        )));
    }
    let g = (cfg.n - 1) * cfg.m;
    for (name, v) in [("c", &cfg.c), ("d", &cfg.d)] {
        if !v.is_empty() && v.len() != g {
            return Err(CliError::validation(format!("expected (N-1)m = {g} values of {name}, got {}", v.len())));
        }
        if v.iter().any(|p| p[0] == 0.0 && p[1] == 0.0) {
            return Err(CliError::validation(format!("a constant in {name} is zero")));
        }
    }
    let all = cfg.lambdas.iter().chain(cfg.lambda0.iter()).chain(cfg.eval_points.iter());
    if all.flatten().any(|x| !x.is_finite()) {
        return Err(CliError::validation("non-finite coordinate"));
    }
    if let Some(l0) = cfg.lambda0 {
        let l: Vec<C> = cfg.lambdas.iter().map(|p| cx(*p)).collect();
        let curve = ZnCurve::new(cfg.n, &l)?;
        if curve.region(cx(l0)) != Region::Plus {
            return Err(CliError::validation("lambda0 must lie strictly above the contour"));
        }
    }
    Ok(())
}

pub fn load_config(path: &Path) -> CliResult<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::validation(format!("malformed config: {e}")))
}

/// Random points off the contour and away from the branch points.
pub fn random_points(curve: &ZnCurve, rng: &mut ChaCha8Rng, count: usize) -> Vec<CurvePoint> {
    let lo = curve.lambdas.iter().map(|x| x.re).fold(f64::MAX, f64::min) - 1.0;
    let hi = curve.lambdas.iter().map(|x| x.re).fold(f64::MIN, f64::max) + 1.0;
    let gap = curve.min_gap();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let l = C::new(rng.gen_range(lo..hi), rng.gen_range(-1.5..1.5));
        if curve.height_above_contour(l).abs() < 0.05 * gap {
            continue;
        }
        if curve.lambdas.iter().any(|x| (x - l).norm() < 0.1 * gap) {
            continue;
        }
        out.push(CurvePoint::new(l, rng.gen_range(1..=curve.n)));
    }
    out
}

pub fn cmd_periods(ctx: &Context) -> CliResult<Report> {
    let curve = ctx.curve()?;
    let pd = PeriodData::new(&curve)?;
    let mut checks = Vec::new();
    let sym = max_abs(&(&pd.pi - pd.pi.transpose()));
    checks.push(Check::below("pi_symmetric", sym, ctx.t("symmetry")));
    let im = DMatrix::from_fn(pd.genus(), pd.genus(), |i, j| 0.5 * (pd.pi[(i, j)].im + pd.pi[(j, i)].im));
    let min_eig = im.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
    checks.push(Check::above("im_pi_min_eigenvalue", min_eig, 0.0));
    checks.push(Check::below("branch_characteristics", pd.verify_branch_characteristics()?, ctx.t("branch")));
    let car = pd.car_residuals()?;
    for (i, r) in car.iter().enumerate() {
        checks.push(Check::below(&format!("car{}", i + 1), *r, ctx.t("branch")));
    }
    checks.push(Check::below("j_action", pd.j_action_residual(), ctx.t("branch")));
    let mut data = json!({
        "N": curve.n,
        "m": curve.m,
        "lambdas": vec_json(&curve.lambdas),
        "pi": mat_json(&pd.pi),
        "a_blocks": pd.a_blocks.iter().map(mat_json).collect::<Vec<_>>(),
        "b_blocks": pd.b_blocks.iter().map(mat_json).collect::<Vec<_>>(),
        "k_inf": vec_json(pd.riemann_constants()?.as_slice()),
        "branch_table": pd.branch_characteristics().iter().map(|ch| json!({
            "eps": ch.eps.iter().map(|x| x.re).collect::<Vec<_>>(),
            "delta": ch.delta.iter().map(|x| x.re).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    });
    if curve.n == 3 && curve.m == 1 {
        let ed = n3m1::periods_n3m1(curve.lambda(1), curve.lambda(2), curve.lambda(3))?;
        checks.push(Check::below("pi_structure_2T_T", max_abs(&(&pd.pi - &ed.pi)), ctx.t("structure")));
        data["T"] = json!(pair(ed.big_t));
    }
    if ctx.checks.iter().any(|c| c == "rauch") {
        let table = rauch_table(&curve, &pd)?;
        let worst = table.iter().fold(0.0f64, |a, b| a.max(*b));
        checks.push(Check::below("rauch_vs_fd", worst, ctx.t("rauch")));
        data["rauch_residuals"] = json!(table);
    }
    Ok(Report::new("periods", ctx.seed, checks, data))
}

/// |dPi/dlambda_k (residue formula) - finite difference| for each k.
pub fn rauch_table(curve: &ZnCurve, pd: &PeriodData) -> CliResult<Vec<f64>> {
    let h = 1e-3 * curve.min_gap();
    let mut out = Vec::new();
    for k in 1..=curve.npoints() {
        let mut pis = Vec::new();
        for t in [-2.0, -1.0, 1.0, 2.0] {
            let mut l = curve.lambdas.clone();
            l[k - 1] += h * t;
            let c2 = ZnCurve::with_ordering(curve.n, &l)?;
            pis.push(PeriodData::new(&c2)?.pi);
        }
        let e = C::new(8.0, 0.0);
        let fd = (&pis[0] - &pis[1] * e + &pis[2] * e - &pis[3]) / C::new(12.0 * h, 0.0);
        out.push(max_abs(&(fd - pd.rauch(k)?)));
    }
    Ok(out)
}

fn grid_points(ctx: &Context, curve: &ZnCurve, l0: C) -> Vec<C> {
    if !ctx.config.eval_points.is_empty() {
        return ctx.config.eval_points.iter().map(|p| cx(*p)).collect();
    }
    let gap = curve.min_gap();
    let mut out = vec![l0];
    for k in 0..8 {
        let a = std::f64::consts::PI * (k as f64 + 0.25) / 4.0;
        out.push(l0 + C::from_polar(0.5 * gap.max(0.2), a));
    }
    out.retain(|l| !matches!(curve.region(*l), Region::Contour(_)));
    out
}

fn push_rows(csv: &mut String, l: C, label: &str, y: &DMatrix<C>) {
    for r in 0..y.nrows() {
        for s in 0..y.ncols() {
            let _ = writeln!(csv, "{:.17e},{:.17e},{}_{}_{},{:.17e},{:.17e}", l.re, l.im, label, r + 1, s + 1, y[(r, s)].re, y[(r, s)].im);
        }
    }
}

pub const CSV_HEADER: &str = "lambda_re,lambda_im,entry,re,im";

pub fn cmd_solve(ctx: &Context) -> CliResult<Report> {
    let sol = ctx.solve()?;
    let curve = sol.curve().clone();
    let ms = sol.monodromy.clone().expect("solve_y attaches monodromy");
    let mut csv = format!("{CSV_HEADER}\n");
    for l in grid_points(ctx, &curve, sol.lambda0) {
        push_rows(&mut csv, l, "Y", &sol.y(l, Side::Auto)?);
    }
    // boundary values on every contour piece, for re-verification of the jumps
    let mut pieces = Vec::new();
    for k in 0..=curve.npoints() {
        for l in rh::piece_samples(&curve, k, 3) {
            push_rows(&mut csv, l, "Yplus", &sol.y(l, Side::Plus)?);
            push_rows(&mut csv, l, "Yminus", &sol.y(l, Side::Minus)?);
            pieces.push(json!({"piece": k, "lambda": pair(l)}));
        }
    }
    let sd = schlesinger::a_matrices_closed(&sol)?;
    let tau = schlesinger::tau(&sol)?;
    let y0 = sol.y(sol.lambda0, Side::Plus)?;
    let id = DMatrix::<C>::identity(curve.n, curve.n);
    let jumps = rh::jump_residuals(&sol, 10)?;
    let checks = vec![
        Check::below("y_at_lambda0", max_abs(&(y0 - id)), ctx.t("identity")),
        Check::below("jumps", jumps.iter().copied().fold(0.0, f64::max), ctx.t("jumps")),
    ];
    let data = json!({
        "N": curve.n,
        "m": curve.m,
        "lambdas": vec_json(&curve.lambdas),
        "lambda0": pair(sol.lambda0),
        "log_branch": "principal logarithm, eps = log c / (2 pi i), delta = log d / (2 pi i)",
        "eps": vec_json(&sol.chars.eps),
        "delta": vec_json(&sol.chars.delta),
        "jumps": ms.g.iter().map(mat_json).collect::<Vec<_>>(),
        "contour_samples": pieces,
        "a": sd.a.iter().map(mat_json).collect::<Vec<_>>(),
        "a_inf": mat_json(&sd.a_inf),
        "tau": pair(tau.value),
        "tau_log_derivatives": vec_json(&tau.log_derivatives),
    });
    let mut rep = Report::new("solve", ctx.seed, checks, data);
    rep.grid = Some(csv);
    Ok(rep)
}

pub fn suite_jumps(ctx: &Context, sol: &RHSolution) -> CliResult<Vec<Check>> {
    let n = sol.n();
    let mut checks = Vec::new();
    let jumps = rh::jump_residuals(sol, 10)?;
    for (k, r) in jumps.iter().enumerate() {
        checks.push(Check::below(&format!("jump_G{k}"), *r, ctx.t("jumps")));
    }
    let y0 = sol.y(sol.lambda0, Side::Plus)?;
    checks.push(Check::below("y_at_lambda0", max_abs(&(y0 - DMatrix::<C>::identity(n, n))), ctx.t("identity")));
    let mut rng = ctx.rng();
    let pts = random_points(sol.curve(), &mut rng, 20);
    let mut min_det = f64::INFINITY;
    for p in &pts {
        min_det = min_det.min(sol.y(p.lambda, Side::Auto)?.determinant().norm());
    }
    checks.push(Check::above("min_abs_det_y", min_det, ctx.t("det_nonzero")));
    // perturbing one characteristic must break the jumps against the original G_k
    let ms = sol.monodromy.clone().expect("monodromy attached");
    let g = sol.periods.genus();
    let mut weakest = f64::INFINITY;
    for i in 0..2 * g {
        let mut ch = sol.chars.clone();
        if i < g {
            ch.eps[i] += 0.01;
        } else {
            ch.delta[i - g] += 0.01;
        }
        let s2 = RHSolution::new(sol.periods.clone(), ch, sol.lambda0, Some(ms.clone()))?;
        let r = rh::jump_residuals(&s2, 4)?.into_iter().fold(0.0, f64::max);
        weakest = weakest.min(r);
    }
    checks.push(Check::above("perturbed_characteristic_jump", weakest, ctx.t("perturbation")));
    Ok(checks)
}

pub fn suite_monodromy(ctx: &Context, sol: &RHSolution) -> CliResult<Vec<Check>> {
    let ms = sol.monodromy.clone().expect("monodromy attached");
    let np = sol.curve().npoints();
    let mut checks = Vec::new();
    for k in 1..=np + 1 {
        let m = rh::monodromy_of_solution(sol, k)?;
        checks.push(Check::below(&format!("monodromy_M{k}"), max_abs(&(m - ms.m_k(k))), ctx.t("monodromy")));
    }
    let pinv = ms.p_n.clone().try_inverse().expect("P_N is invertible");
    checks.push(Check::below("m_inf_is_p_inverse", max_abs(&(ms.m_k(np + 1) - pinv)), ctx.t("identity")));
    let mut prod = DMatrix::<C>::identity(ms.n, ms.n);
    for k in 1..=np + 1 {
        prod = ms.m_k(k) * prod;
    }
    checks.push(Check::below("cyclic_product", max_abs(&(prod - DMatrix::<C>::identity(ms.n, ms.n))), ctx.t("identity")));
    Ok(checks)
}

pub fn suite_schlesinger(ctx: &Context, sol: &RHSolution) -> CliResult<Vec<Check>> {
    let closed = schlesinger::a_matrices_closed(sol)?;
    let residue = schlesinger::a_matrices_residue(sol)?;
    let mut checks = vec![
        Check::below("closed_vs_residue", closed.max_difference(&residue), ctx.t("residue")),
        Check::below("trace", closed.trace_residual(), ctx.t("trace")),
        Check::below("eigenvalues_sigma", closed.eigen_residual(), ctx.t("eigen")),
        Check::below("sum_with_a_inf", closed.sum_residual(), ctx.t("trace")),
    ];
    let (c, d) = ctx.constants();
    let canonical = c.iter().chain(d.iter()).all(|z| (z - 1.0).norm() < 1e-14);
    if canonical {
        let mut worst = 0.0f64;
        for (k, a) in closed.a.iter().enumerate() {
            worst = worst.max(max_abs(&(a - schlesinger::canonical_a(sol.n(), k + 1))));
        }
        checks.push(Check::below("canonical_constant_solution", worst, ctx.t("identity")));
    }
    let h = 1e-3 * sol.curve().min_gap();
    let fd = schlesinger::schlesinger_residual(sol, h)?;
    checks.push(Check::below("schlesinger_fd", fd.residual, ctx.t("schlesinger")));
    if !canonical {
        checks.push(Check::above("control_without_lambda0_terms", fd.without_l0_terms, ctx.t("control")));
    }
    Ok(checks)
}

pub fn suite_thomae(ctx: &Context, sol: &RHSolution) -> CliResult<Vec<Check>> {
    let th = schlesinger::thomae_check(&sol.periods)?;
    let tau = schlesinger::tau(sol)?;
    let res = schlesinger::tau_log_derivatives_residue(sol)?;
    let worst = tau.log_derivatives.iter().zip(&res).map(|(a, b)| (a - b).norm() / b.norm().max(1.0)).fold(0.0, f64::max);
    Ok(vec![
        Check::below("thomae_relative", th.relative_error, ctx.t("thomae")),
        Check::below("tau_log_derivative_vs_residue", worst, ctx.t("tau")),
    ])
}

/// Two odd half-integer characteristics with non-vanishing gradient at 0.
fn two_odd_chars(kc: &KernelContext) -> CliResult<Vec<Characteristics>> {
    let g = kc.periods.genus();
    let z = vec![C::new(0.0, 0.0); g];
    let mut out = Vec::new();
    for ch in kernels::half_integer_chars(g) {
        if ch.parity() != Some(1) {
            continue;
        }
        let ev = kc.theta.eval(&z, &ch, 1)?;
        if ev.grad.iter().map(|x| x.norm()).fold(0.0, f64::max) > 1e-3 {
            out.push(ch);
        }
        if out.len() == 2 {
            break;
        }
    }
    Ok(out)
}

pub fn suite_fay(ctx: &Context, sol: &RHSolution) -> CliResult<Vec<Check>> {
    let kc = KernelContext::new(sol.periods.clone())?;
    let curve = sol.curve().clone();
    let mut rng = ctx.rng();
    let pts = random_points(&curve, &mut rng, 20);
    let ch = &sol.chars;
    let mut fay = 0.0f64;
    let mut szego0 = 0.0f64;
    for w in pts.chunks(2) {
        fay = fay.max(kc.fay_residual(&w[0], &w[1], ch)?);
        let zero = Characteristics::zero(kc.periods.genus());
        let a = kc.szego(&w[0], &w[1], &zero)?;
        let b = kernels::szego_zero(&curve, &w[0], &w[1])?;
        szego0 = szego0.max(kernels::residual_mod_roots(a, b, 2).0);
    }
    let det2 = kc.det_identity_residual(&pts[0..2], &pts[2..4], ch)?;
    let det3 = kc.det_identity_residual(&pts[4..7], &pts[7..10], ch)?;
    let mut checks = vec![
        Check::below("fay", fay, ctx.t("fay")),
        Check::below("det_n2", det2, ctx.t("det")),
        Check::below("det_n3", det3, ctx.t("det")),
        Check::below("szego_zero_closed_form", szego0, ctx.t("szego")),
    ];
    let odd = two_odd_chars(&kc)?;
    if odd.len() == 2 {
        let k2 = KernelContext::with_gamma(sol.periods.clone(), odd[1].clone())?;
        let k1 = KernelContext::with_gamma(sol.periods.clone(), odd[0].clone())?;
        let mut worst = 0.0f64;
        for w in pts.chunks(2) {
            let a = k1.prime_form_squared(&w[0], &w[1])?;
            let b = k2.prime_form_squared(&w[0], &w[1])?;
            worst = worst.max((a - b).norm() / a.norm());
        }
        checks.push(Check::below("prime_form_gamma_independence", worst, ctx.t("gamma")));
    }
    Ok(checks)
}

/// The N = 3, m = 1 checks for a solution on that curve.
pub fn suite_n3m1(ctx: &Context, sol: &RHSolution) -> CliResult<(Vec<Check>, Value)> {
    let curve = sol.curve().clone();
    if curve.n != 3 || curve.m != 1 {
        return Err(CliError::validation("suite n3m1 needs N = 3 and m = 1"));
    }
    let (l1, l2, l3) = (curve.lambda(1), curve.lambda(2), curve.lambda(3));
    let ed = n3m1::periods_n3m1(l1, l2, l3)?;
    let mut checks = vec![Check::below("pi_structure", max_abs(&(&sol.periods.pi - &ed.pi)), ctx.t("structure"))];
    let mut rng = ctx.rng();
    let tp = &sol.theta;
    let mut dec = 0.0f64;
    for _ in 0..20 {
        let mut r = || rng.gen_range(-0.5..0.5);
        let z = [C::new(r(), r()), C::new(r(), r())];
        let ch = Characteristics::real(&[r(), r()], &[r(), r()]);
        let a = tp.theta(&z, &ch)?;
        let b = n3m1::decompose_theta(&z, &ch, ed.big_t)?;
        dec = dec.max((a - b).norm() / a.norm());
    }
    checks.push(Check::below("decompose_theta", dec, ctx.t("decompose")));
    let t_round = (n3m1::t_of_big_t(ed.big_t)? - ed.t).norm();
    checks.push(Check::below("t_of_T_roundtrip", t_round, ctx.t("roundtrip")));
    let t_third = (n3m1::t_from_third_characteristic(ed.big_t)? - ed.t).norm();
    checks.push(Check::below("t_third_characteristic", t_third, ctx.t("roundtrip")));
    checks.push(Check::below("t_of_p", (ed.t - n3m1::t_from_p(ed.p)).norm(), ctx.t("roundtrip")));
    checks.push(Check::below("modular_equation", n3m1::modular_equation_residual(ed.k2_plus, ed.k2_minus), ctx.t("roundtrip")));
    if ed.t.im.abs() < 1e-12 && ed.t.re > 0.0 && ed.t.re < 1.0 {
        let gr = n3m1::goursat_check(ed.t)?;
        checks.push(Check::below("goursat", gr.residual, ctx.t("goursat")));
    }
    let h = n3m1::halphen_check(ed.big_t, 0.05 * ed.big_t.im, (1.0 / 3.0, 0.0, 0.0))?;
    checks.push(Check::below("halphen", h.halphen_residual, ctx.t("halphen")));
    checks.push(Check::below("schwarzian", h.schwarzian_residual, ctx.t("halphen")));
    let (bp, bm) = n3m1::isogeny_periods(&sol.periods.pi);
    checks.push(Check::below("isogeny_periods", (bp - ed.big_t * 3.0).norm().max((bm - ed.big_t).norm()), ctx.t("structure")));
    let mut yj = 0.0f64;
    let mut cover = 0.0f64;
    for p in random_points(&curve, &mut rng, 10) {
        let y = sol.y(p.lambda, Side::Auto)?;
        let j = n3m1::y_jacobi(sol, ed.big_t, p.lambda, Side::Auto)?;
        yj = yj.max(max_abs(&(&y - j)) / max_abs(&y).max(1.0));
        let yv = curve.y_value(p.lambda, p.sheet, Side::Auto)?;
        cover = cover.max(n3m1::cover_residual(&ed.lambdas, p.lambda, yv));
        let (qp, qm) = n3m1::quotient_residual(&ed, p.lambda, yv)?;
        cover = cover.max(qp).max(qm);
    }
    checks.push(Check::below("y_jacobi_vs_generic", yj, ctx.t("n3m1")));
    checks.push(Check::below("cover_identities", cover, ctx.t("n3m1")));
    let ms = sol.monodromy.clone().expect("monodromy attached");
    let tj = n3m1::tau_n3m1(&ed.lambdas, &[ms.c[0], ms.c[1]], &[ms.d[0], ms.d[1]])?;
    let tg = schlesinger::tau(sol)?;
    let ratio_res = (tj.theta_ratio - tg.theta_ratio).norm() / tg.theta_ratio.norm();
    let (pref_res, _) = kernels::residual_mod_roots(tj.prefactor, tg.product_factor, 9);
    checks.push(Check::below("tau_theta_ratio", ratio_res, ctx.t("n3m1")));
    checks.push(Check::below("tau_prefactor_mod_9th_roots", pref_res, ctx.t("n3m1")));
    let data = json!({
        "T": pair(ed.big_t),
        "t": pair(ed.t),
        "p": pair(ed.p),
        "k2_plus": pair(ed.k2_plus),
        "k2_minus": pair(ed.k2_minus),
        "A1": pair(ed.a1),
        "B1": pair(ed.b1),
        "tau": pair(tj.value),
    });
    Ok((checks, data))
}

pub fn cmd_verify(ctx: &Context, suite: &str) -> CliResult<Report> {
    if !SUITES.contains(&suite) {
        return Err(CliError::validation(format!("unknown suite {suite}; expected one of {}", SUITES.join(", "))));
    }
    let sol = ctx.solve()?;
    let mut data = json!({"suite": suite});
    let checks = match suite {
        "jumps" => suite_jumps(ctx, &sol)?,
        "monodromy" => suite_monodromy(ctx, &sol)?,
        "schlesinger" => suite_schlesinger(ctx, &sol)?,
        "thomae" => suite_thomae(ctx, &sol)?,
        "fay" => suite_fay(ctx, &sol)?,
        _ => {
            let (c, d) = suite_n3m1(ctx, &sol)?;
            data["n3m1"] = d;
            c
        }
    };
    Ok(Report::new(&format!("verify {suite}"), ctx.seed, checks, data))
}

/// The built-in N = 3, m = 1 configuration; the seed moves lambda_2 and the constants.
pub fn demo_config(seed: u64) -> RunConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = rng.gen_range(0.2..0.8);
    let mut unit = || {
        let r: f64 = rng.gen_range(0.7..1.4);
        let a: f64 = rng.gen_range(-3.0..3.0);
        [r * a.cos(), r * a.sin()]
    };
    let c = vec![unit(), unit()];
    let d = vec![unit(), unit()];
    RunConfig {
        n: 3,
        m: 1,
        lambdas: vec![[0.0, 0.0], [t, 0.0], [1.0, 0.0]],
        c,
        d,
        lambda0: Some([0.45, 0.6]),
        tolerances: BTreeMap::new(),
        eval_points: Vec::new(),
    }
}

pub fn cmd_demo_n3m1(ctx: &Context) -> CliResult<Report> {
    let sol = ctx.solve()?;
    let (mut checks, mut data) = suite_n3m1(ctx, &sol)?;
    checks.extend(suite_jumps(ctx, &sol)?.into_iter().filter(|c| c.name.starts_with("jump")));
    data["config"] = serde_json::to_value(&ctx.config).unwrap_or(Value::Null);
    Ok(Report::new("demo-n3m1", ctx.seed, checks, data))
}

/// Run a parsed command line; returns the exit code and the text to print.
pub fn run(cli: &Cli) -> (i32, String) {
    match run_inner(cli) {
        Ok(rep) => {
            let text = if cli.json {
                serde_json::to_string_pretty(&rep).unwrap_or_default()
            } else {
                rep.table()
            };
            if let Some(dir) = &cli.out {
                if let Err(e) = write_outputs(dir, &rep) {
                    return (EXIT_VALIDATION, e.message);
                }
            }
            let code = if rep.pass { EXIT_PASS } else { EXIT_CHECK_FAILED };
            let text = if rep.pass { text } else { format!("{text}failing checks: {}\n", rep.failing().join(", ")) };
            (code, text)
        }
        Err(e) => {
            let msg = if e.code == EXIT_SOLVABILITY { format!("not solvable: {}", e.message) } else { e.message };
            (e.code, msg)
        }
    }
}

fn run_inner(cli: &Cli) -> CliResult<Report> {
    let config = match (&cli.command, &cli.config) {
        (Command::DemoN3m1, None) => demo_config(cli.seed),
        (_, Some(p)) => load_config(p)?,
        (_, None) => return Err(CliError::validation("--config is required")),
    };
    let ctx = Context::new(config, &cli.tol, cli.seed, cli.check.clone())?;
    match &cli.command {
        Command::Periods => cmd_periods(&ctx),
        Command::Solve => cmd_solve(&ctx),
        Command::Verify { suite } => cmd_verify(&ctx, suite),
        Command::DemoN3m1 => cmd_demo_n3m1(&ctx),
    }
}

pub fn write_outputs(dir: &Path, rep: &Report) -> CliResult<()> {
    let io = |e: std::io::Error| CliError::validation(format!("cannot write to {}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    let text = serde_json::to_string_pretty(rep).map_err(|e| CliError { code: EXIT_NUMERICAL, message: e.to_string() })?;
    std::fs::write(dir.join("report.json"), text).map_err(io)?;
    if let Some(g) = &rep.grid {
        std::fs::write(dir.join("grid.csv"), g).map_err(io)?;
    }
    Ok(())
}
