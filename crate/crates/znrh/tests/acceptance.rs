//! One line per acceptance criterion. The process fails when a criterion
//! fails for a reason not listed in `DOCUMENTED`.

mod common;

use common::*;
use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use rand::Rng;
use std::f64::consts::PI;
use std::time::Instant;
use znrh::kernels::{self, residual_mod_roots, szego_zero, CurvePoint, KernelContext};
use znrh::n3m1;
use znrh::numerics::max_abs;
use znrh::periods::BranchDivisor;
use znrh::rh::{self, RHSolution};
use znrh::schlesinger;
use znrh::{Characteristics, PeriodData, Side, ZnCurve};

const L0: C = C::new(0.45, 0.6);

/// Known failures: the closed-form Szego kernel for (N-1) sum_{i in I} P_i
/// with N >= 3 and I other than the even branch points.
const DOCUMENTED: &[&str] = &["szego_dm N>=3 I!=evens"];

/// Worst value per named check: the largest for upper bounds, the smallest for lower bounds.
struct Line {
    entries: Vec<Entry>,
}

struct Entry {
    name: String,
    value: f64,
    tol: f64,
    upper: bool,
}

impl Entry {
    fn pass(&self) -> bool {
        if self.upper {
            self.value < self.tol
        } else {
            self.value > self.tol
        }
    }
}

impl Line {
    fn new() -> Self {
        Line { entries: Vec::new() }
    }

    fn below(&mut self, name: &str, v: f64, tol: f64) {
        self.push(name, v, tol, true);
    }

    fn above(&mut self, name: &str, v: f64, tol: f64) {
        self.push(name, v, tol, false);
    }

    fn push(&mut self, name: &str, v: f64, tol: f64, upper: bool) {
        // NaN counts as the worst value
        match self.entries.iter_mut().find(|e| e.name == name) {
            Some(e) => {
                let worse = if upper { !(v <= e.value) } else { !(v >= e.value) };
                if worse {
                    e.value = v;
                }
            }
            None => self.entries.push(Entry { name: name.into(), value: v, tol, upper }),
        }
    }

    fn pass(&self) -> bool {
        self.entries.iter().all(Entry::pass)
    }

    fn failing(&self) -> Vec<String> {
        self.entries.iter().filter(|e| !e.pass()).map(|e| e.name.clone()).collect()
    }

    fn summary(&self) -> String {
        self.entries
            .iter()
            .map(|e| {
                let op = match (e.upper, e.pass()) {
                    (true, true) => "<",
                    (false, true) => ">",
                    (true, false) => " >= ",
                    (false, false) => " <= ",
                };
                format!("{} {:.1e}{op}{:.0e}", e.name, e.value, e.tol)
            })
            .collect::<Vec<_>>()
            .join(", ")
    }
}

fn configs() -> Vec<(usize, Vec<f64>)> {
    let mut out = Vec::new();
    for n in [2, 3, 4] {
        out.push((n, vec![0.0, 0.4, 1.0]));
        out.push((n, vec![0.0, 0.5, 1.2, 2.0, 3.1]));
    }
    out
}

fn solve(n: usize, xs: &[f64], seed: u64) -> RHSolution {
    let curve = ZnCurve::new(n, &real_points(xs)).unwrap();
    let g = curve.genus();
    let mut r = rng(seed);
    let ms = rh::build_monodromy(n, curve.m, &random_constants(&mut r, g), &random_constants(&mut r, g)).unwrap();
    rh::solve_y(&curve, &ms, L0).unwrap()
}

fn solver_configs() -> Vec<(usize, Vec<f64>)> {
    vec![(2, vec![0.0, 1.0, 3.0]), (3, vec![0.0, 0.4, 1.0]), (3, vec![0.0, 0.5, 1.2, 2.0, 3.1]), (4, vec![0.0, 0.5, 1.2])]
}

fn c1() -> Line {
    let mut l = Line::new();
    for pts in [[cx(0.0, 0.0), cx(0.3, 0.0), cx(1.0, 0.0)], [cx(-1.0, 0.0), cx(0.5, 0.0), cx(2.0, 0.0)], [cx(0.0, 0.0), cx(0.6, 0.25), cx(1.4, -0.1)]] {
        let pd = PeriodData::new(&ZnCurve::new(3, &pts).unwrap()).unwrap();
        let ed = n3m1::periods_n3m1(pts[0], pts[1], pts[2]).unwrap();
        l.below("Pi=[[2T,T],[T,2T]]", max_abs(&(&pd.pi - &ed.pi)), 1e-8);
    }
    for (n, xs) in configs() {
        let pd = PeriodData::new(&ZnCurve::new(n, &real_points(&xs)).unwrap()).unwrap();
        let g = pd.genus();
        l.below("symmetry", max_abs(&(&pd.pi - pd.pi.transpose())), 1e-9);
        let im = DMatrix::from_fn(g, g, |i, j| 0.5 * (pd.pi[(i, j)].im + pd.pi[(j, i)].im));
        l.above("min eig Im Pi", im.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min), 0.0);
    }
    l
}

fn c2() -> Line {
    let mut l = Line::new();
    for (n, xs) in configs() {
        let pd = PeriodData::new(&ZnCurve::new(n, &real_points(&xs)).unwrap()).unwrap();
        let car = pd.car_residuals().unwrap();
        l.below("car1-4", car.iter().copied().fold(0.0, f64::max), 1e-8);
        l.below("[U_k] tables", pd.verify_branch_characteristics().unwrap(), 1e-8);
        l.below("J action", pd.j_action_residual(), 1e-8);
    }
    l
}

fn c3() -> Line {
    let mut l = Line::new();
    for (n, xs) in configs() {
        let curve = ZnCurve::new(n, &real_points(&xs)).unwrap();
        l.below("X jumps", rh::x_jump_residual(&curve, L0, 10).unwrap(), 1e-10);
        let x0 = rh::canonical_x(&curve, L0, L0, Side::Plus).unwrap();
        l.below("X(l0)=1", max_abs(&(x0 - identity(n))), 1e-10);
        let mut r = rng(3);
        for p in random_points(&curve, &mut r, 10) {
            let x = rh::canonical_x(&curve, L0, p.lambda, Side::Auto).unwrap();
            for row in 0..n {
                for col in 0..n {
                    let s = szego_zero(&curve, &CurvePoint::new(p.lambda, col + 1), &CurvePoint::new(L0, row + 1)).unwrap();
                    l.below("X vs Szego zero", (x[(row, col)] - s * (p.lambda - L0)).norm(), 1e-10);
                }
            }
        }
    }
    l
}

fn c4() -> Line {
    let mut l = Line::new();
    for (i, (n, xs)) in solver_configs().into_iter().enumerate() {
        let sol = solve(n, &xs, 40 + i as u64);
        let ms = sol.monodromy.clone().unwrap();
        l.below("Y jumps", rh::jump_residuals(&sol, 10).unwrap().into_iter().fold(0.0, f64::max), 1e-8);
        l.below("Y(l0)=1", max_abs(&(sol.y(L0, Side::Plus).unwrap() - identity(n))), 1e-10);
        let mut r = rng(4);
        for p in random_points(sol.curve(), &mut r, 100) {
            l.above("min |det Y|", sol.y(p.lambda, Side::Auto).unwrap().determinant().norm(), 1e-8);
        }
        let np = xs.len();
        for k in 1..=np + 1 {
            let m = rh::monodromy_of_solution(&sol, k).unwrap();
            let want = &ms.g[k] * ms.g[k - 1].clone().try_inverse().unwrap();
            l.below("monodromy", max_abs(&(m - want)), 1e-7);
        }
        let pinv = rh::p_matrix(n).try_inverse().unwrap();
        l.below("M_inf=P^-1", max_abs(&(ms.m_k(np + 1) - pinv)), 1e-10);
    }
    l
}

fn c5() -> Line {
    let mut l = Line::new();
    let cases = [(2, vec![0.0, 1.0, 3.0]), (2, vec![0.0, 0.5, 1.2, 2.0, 3.1]), (3, vec![0.0, 0.4, 1.0]), (3, vec![0.0, 0.5, 1.2, 2.0, 3.1]), (4, vec![0.0, 0.5, 1.2])];
    for (i, (n, xs)) in cases.into_iter().enumerate() {
        let sol = solve(n, &xs, 50 + i as u64);
        let kc = KernelContext::new(sol.periods.clone()).unwrap();
        let curve = sol.curve().clone();
        let g = curve.genus();
        let mut r = rng(5);
        let pts = random_points(&curve, &mut r, 40);
        let zero = Characteristics::zero(g);
        for w in pts.chunks(2) {
            let a = kc.szego(&w[0], &w[1], &zero).unwrap();
            l.below("szegoN0", residual_mod_roots(a, szego_zero(&curve, &w[0], &w[1]).unwrap(), 2).0, 1e-8);
        }
        // every m-subset of the branch points
        let np = curve.npoints();
        let subsets: Vec<Vec<usize>> = if curve.m == 1 { (1..=np).map(|i| vec![i]).collect() } else { (1..=np).flat_map(|i| (i + 1..=np).map(move |j| vec![i, j])).collect() };
        for set in subsets {
            let ch = kernels::dm_characteristics(&kc.periods, &set);
            let evens = set.iter().all(|i| i % 2 == 0);
            let name = if n == 2 { "szego_dm N=2".to_string() } else if evens { "szego_dm N>=3 I=evens".to_string() } else { "szego_dm N>=3 I!=evens".to_string() };
            for w in pts[..20].chunks(2) {
                let a = kc.szego(&w[0], &w[1], &ch).unwrap();
                let b = kernels::szego_dm(&curve, &w[0], &w[1], &set).unwrap();
                l.below(&name, residual_mod_roots(a, b, 2 * n).0, 1e-8);
            }
        }
        for w in pts[..20].chunks(2) {
            l.below("Fay", kc.fay_residual(&w[0], &w[1], &sol.chars).unwrap(), 1e-7);
        }
        l.below("det n=2", kc.det_identity_residual(&pts[0..2], &pts[2..4], &sol.chars).unwrap(), 1e-7);
        l.below("det n=3", kc.det_identity_residual(&pts[4..7], &pts[7..10], &sol.chars).unwrap(), 1e-7);
        let z = vec![cx(0.0, 0.0); g];
        let odd: Vec<Characteristics> = kernels::half_integer_chars(g)
            .into_iter()
            .filter(|c| c.parity() == Some(1))
            .filter(|c| kc.theta.eval(&z, c, 1).unwrap().grad.iter().any(|x| x.norm() > 1e-3))
            .take(3)
            .collect();
        let base = KernelContext::with_gamma(sol.periods.clone(), odd[0].clone()).unwrap();
        for gamma in &odd[1..] {
            let other = KernelContext::with_gamma(sol.periods.clone(), gamma.clone()).unwrap();
            for w in pts[..20].chunks(2) {
                let a = base.prime_form_squared(&w[0], &w[1]).unwrap();
                let b = other.prime_form_squared(&w[0], &w[1]).unwrap();
                l.below("gamma independence", (a - b).norm() / a.norm(), 1e-9);
            }
        }
    }
    l
}

fn c6() -> Line {
    let mut l = Line::new();
    for (i, (n, xs)) in solver_configs().into_iter().enumerate() {
        let sol = solve(n, &xs, 60 + i as u64);
        let closed = schlesinger::a_matrices_closed(&sol).unwrap();
        let residue = schlesinger::a_matrices_residue(&sol).unwrap();
        l.below("closed vs residue", closed.max_difference(&residue), 1e-6);
        l.below("trace", closed.trace_residual(), 1e-10);
        l.below("eigenvalues", closed.eigen_residual(), 1e-6);
        let fd = schlesinger::schlesinger_residual(&sol, 1e-3 * sol.curve().min_gap()).unwrap();
        l.below("FD Schlesinger", fd.residual, 1e-5);
        let curve = sol.curve().clone();
        let one = vec![cx(1.0, 0.0); curve.genus()];
        let unit = rh::solve_y(&curve, &rh::build_monodromy(n, curve.m, &one, &one).unwrap(), L0).unwrap();
        for (k, a) in schlesinger::a_matrices_closed(&unit).unwrap().a.iter().enumerate() {
            l.below("canonical A_k", max_abs(&(a - schlesinger::canonical_a(n, k + 1))), 1e-10);
        }
    }
    l
}

fn c7() -> Line {
    let mut l = Line::new();
    for (i, (n, xs)) in solver_configs().into_iter().enumerate() {
        let sol = solve(n, &xs, 70 + i as u64);
        let t = schlesinger::tau(&sol).unwrap();
        let res = schlesinger::tau_log_derivatives_residue(&sol).unwrap();
        for (a, b) in t.log_derivatives.iter().zip(&res) {
            l.below("dlog tau vs residue", (a - b).norm() / b.norm().max(1.0), 1e-6);
        }
    }
    for n in [2, 3] {
        for xs in [vec![0.0, 0.4, 1.0], vec![0.0, 0.5, 1.2, 2.0, 3.1]] {
            let pd = PeriodData::new(&ZnCurve::new(n, &real_points(&xs)).unwrap()).unwrap();
            l.below("Thomae", schlesinger::thomae_check(&pd).unwrap().relative_error, 1e-8);
        }
    }
    let (a, b) = schlesinger::tau_exponents(3);
    l.below("exponents 4/9, 2/9", (a - 4.0 / 9.0).abs().max((b - 2.0 / 9.0).abs()), 1e-15);
    let pts = [cx(0.0, 0.0), cx(0.4, 0.1), cx(1.0, -0.2)];
    let curve = ZnCurve::new(3, &pts).unwrap();
    let (l1, l2, l3) = (curve.lambda(1), curve.lambda(2), curve.lambda(3));
    let want = (l1 - l3).powf(4.0 / 9.0) / ((l1 - l2) * (l1 - l3) * (l2 - l3)).powf(2.0 / 9.0);
    l.below("assembled product", residual_mod_roots(schlesinger::tau_product_factor(&curve), want, 9).0, 1e-12);
    l
}

fn c8() -> Line {
    let mut l = Line::new();
    let w = C::from_polar(1.0, 2.0 * PI / 3.0);
    let ms = rh::build_monodromy(3, 2, &[w, w * w, w * w, w.powi(4)], &[w * w, w, w * w, w]).unwrap();
    l.above("reducible pattern", if rh::is_reducible_pattern(&ms, 1e-12) { 1.0 } else { 0.0 }, 0.5);
    l.below("reducible matrices", rh::reducible_residual(&ms), 1e-12);
    let sol = solve(3, &[0.0, 0.4, 1.0], 80);
    let rep = rh::shift_check(&sol, &Characteristics::real(&[0.0, 0.0], &[-4.0 / 3.0, 2.0 / 3.0])).unwrap();
    let expected = rep.multipliers == vec![0, 2, 1];
    l.below("multipliers e^(4pi i/3), e^(2pi i/3)", if expected { rep.multiplier_residual } else { f64::INFINITY }, 1e-9);
    l.below("monodromy free", rep.single_valued_residual, 1e-7);
    let sol = solve(3, &[0.0, 0.5, 1.2, 2.0, 3.1], 81);
    let shift = sol.periods.divisor_characteristics(&BranchDivisor { weights: vec![(1, 1), (2, 2), (5, 1)] });
    let rep = rh::shift_check(&sol, &shift).unwrap();
    l.below("multipliers", rep.multiplier_residual, 1e-9);
    l.below("monodromy free", rep.single_valued_residual, 1e-7);
    l
}

fn c9() -> Line {
    let mut l = Line::new();
    let mut r = rng(9);
    let big_t = n3m1::big_t_of_t(cx(0.4, 0.0)).unwrap();
    let tp = znrh::ThetaParams::new(&n3m1::pi_of_t(big_t)).unwrap();
    for _ in 0..20 {
        let mut u = || r.gen_range(-0.5..0.5);
        let z = [cx(u(), u()), cx(u(), u())];
        let ch = Characteristics::real(&[u(), u()], &[u(), u()]);
        let a = tp.theta(&z, &ch).unwrap();
        l.below("decompose", (a - n3m1::decompose_theta(&z, &ch, big_t).unwrap()).norm() / a.norm(), 1e-10);
    }
    for t in [0.2, 0.5, 0.8] {
        let t = cx(t, 0.0);
        let bt = n3m1::big_t_of_t(t).unwrap();
        l.below("t(T) roundtrip", (n3m1::t_of_big_t(bt).unwrap() - t).norm(), 1e-8);
        l.below("Goursat", n3m1::goursat_check(t).unwrap().residual, 1e-10);
        let h = n3m1::halphen_check(bt, 0.05 * bt.im, (1.0 / 3.0, 0.0, 0.0)).unwrap();
        l.below("Halphen", h.halphen_residual, 1e-8);
        l.below("Schwarzian", h.schwarzian_residual, 1e-8);
    }
    for (i, pts) in [[cx(0.0, 0.0), cx(0.3, 0.0), cx(1.0, 0.0)], [cx(0.0, 0.0), cx(0.6, 0.25), cx(1.4, -0.1)]].into_iter().enumerate() {
        let curve = ZnCurve::new(3, &pts).unwrap();
        let mut rr = rng(90 + i as u64);
        let ms = rh::build_monodromy(3, 1, &random_constants(&mut rr, 2), &random_constants(&mut rr, 2)).unwrap();
        let sol = rh::solve_y(&curve, &ms, L0).unwrap();
        let ed = n3m1::periods_n3m1(pts[0], pts[1], pts[2]).unwrap();
        for p in random_points(&curve, &mut rr, 10) {
            let y = sol.y(p.lambda, Side::Auto).unwrap();
            let j = n3m1::y_jacobi(&sol, ed.big_t, p.lambda, Side::Auto).unwrap();
            l.below("Y_jacobi", max_abs(&(&y - j)) / max_abs(&y).max(1.0), 1e-8);
        }
        let tj = n3m1::tau_n3m1(&pts, &[ms.c[0], ms.c[1]], &[ms.d[0], ms.d[1]]).unwrap();
        let tg = schlesinger::tau(&sol).unwrap();
        l.below("tau_n3m1", residual_mod_roots(tj.value, tg.value, 9).0, 1e-8);
    }
    l
}

fn c10() -> Line {
    let mut l = Line::new();
    for (i, (n, xs)) in solver_configs().into_iter().enumerate() {
        let sol = solve(n, &xs, 100 + i as u64);
        let fd = schlesinger::schlesinger_residual(&sol, 1e-3 * sol.curve().min_gap()).unwrap();
        l.above("without l0 terms", fd.without_l0_terms, 1e-2);
        let ms = sol.monodromy.clone().unwrap();
        let g = sol.periods.genus();
        for k in 0..2 * g {
            let mut ch = sol.chars.clone();
            if k < g {
                ch.eps[k] += 0.01;
            } else {
                ch.delta[k - g] += 0.01;
            }
            let s2 = RHSolution::new(sol.periods.clone(), ch, L0, Some(ms.clone())).unwrap();
            l.above("perturbed jump", rh::jump_residuals(&s2, 4).unwrap().into_iter().fold(0.0, f64::max), 1e-4);
        }
    }
    l
}

fn main() {
    let criteria: [(&str, fn() -> Line); 10] = [
        ("period structure", c1),
        ("branch-point characteristics", c2),
        ("canonical solution", c3),
        ("theta solution", c4),
        ("kernels", c5),
        ("Schlesinger", c6),
        ("tau and Thomae", c7),
        ("reducibility and shifts", c8),
        ("N=3, m=1 specialization", c9),
        ("negative controls", c10),
    ];
    let mut unexpected = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let line = f();
        let status = if line.pass() { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {status} {name} ({:.1}s): {}", i + 1, t.elapsed().as_secs_f64(), line.summary());
        for f in line.failing() {
            if DOCUMENTED.contains(&f.as_str()) {
                println!("             documented failure: {f}");
            } else {
                unexpected.push(format!("{}: {f}", i + 1));
            }
        }
    }
    if !unexpected.is_empty() {
        println!("unexpected failures: {}", unexpected.join("; "));
        std::process::exit(1);
    }
}
