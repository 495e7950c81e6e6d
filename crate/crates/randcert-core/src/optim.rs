//! Smooth constrained minimization: a PHR augmented Lagrangian whose
//! subproblems are solved by a projected BFGS method on box bounds, a seeded
//! Halton start sampler, and a deterministic multistart driver.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::math::sqrt;

/// Golden-section minimization of a unimodal function on `[lo, hi]`.
/// Returns `(argmin, min)`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let r = (sqrt(5.0) - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let x = (a + b) / 2.0;
    (x, f(x))
}

/// Values and first derivatives of a constrained problem at one point.
///
/// Constraints are `h(x) = 0` and `g(x) ≤ 0`; Jacobians are row-major
/// (`n_eq × dim`, `n_ineq × dim`).
#[derive(Debug, Clone)]
pub struct Eval {
    pub f: f64,
    pub grad: Vec<f64>,
    pub h: Vec<f64>,
    pub jh: Vec<f64>,
    pub g: Vec<f64>,
    pub jg: Vec<f64>,
}

impl Eval {
    pub fn new(dim: usize, n_eq: usize, n_ineq: usize) -> Self {
        Eval {
            f: 0.0,
            grad: vec![0.0; dim],
            h: vec![0.0; n_eq],
            jh: vec![0.0; n_eq * dim],
            g: vec![0.0; n_ineq],
            jg: vec![0.0; n_ineq * dim],
        }
    }

    /// Largest equality or inequality violation.
    pub fn infeasibility(&self) -> f64 {
        let e = self.h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        self.g.iter().fold(e, |m, v| m.max(*v))
    }
}

pub trait Problem {
    fn dim(&self) -> usize;
    fn n_eq(&self) -> usize;
    fn n_ineq(&self) -> usize;
    fn lower(&self) -> &[f64];
    fn upper(&self) -> &[f64];
    /// Fill `out` at `x`. `out` was created by `Eval::new` with this problem's sizes.
    fn eval(&self, x: &[f64], out: &mut Eval);
}

#[derive(Debug, Clone, Copy)]
pub struct AlConfig {
    pub rho0: f64,
    pub growth: f64,
    pub rho_max: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    /// Constraint tolerance.
    pub tol_feas: f64,
    /// Projected-gradient tolerance of the final subproblem.
    pub tol_opt: f64,
}

impl Default for AlConfig {
    fn default() -> Self {
        AlConfig {
            rho0: 1.0,
            growth: 10.0,
            rho_max: 1e10,
            max_outer: 40,
            max_inner: 400,
            tol_feas: 1e-10,
            tol_opt: 1e-9,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LocalResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub infeasibility: f64,
    pub converged: bool,
    pub outer_iters: usize,
}

fn project(x: &mut [f64], lo: &[f64], hi: &[f64]) {
    for ((v, l), u) in x.iter_mut().zip(lo).zip(hi) {
        *v = v.clamp(*l, *u);
    }
}

struct Lagrangian<'a, P: Problem> {
    p: &'a P,
    lam: Vec<f64>,
    mu: Vec<f64>,
    rho: f64,
    ev: Eval,
}

impl<P: Problem> Lagrangian<'_, P> {
    fn value_grad(&mut self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.p.eval(x, &mut self.ev);
        let n = x.len();
        let ev = &self.ev;
        let mut v = ev.f;
        grad.copy_from_slice(&ev.grad);
        for (i, &h) in ev.h.iter().enumerate() {
            v += self.lam[i] * h + 0.5 * self.rho * h * h;
            let w = self.lam[i] + self.rho * h;
            for k in 0..n {
                grad[k] += w * ev.jh[i * n + k];
            }
        }
        for (j, &g) in ev.g.iter().enumerate() {
            let s = (self.mu[j] + self.rho * g).max(0.0);
            v += (s * s - self.mu[j] * self.mu[j]) / (2.0 * self.rho);
            for k in 0..n {
                grad[k] += s * ev.jg[j * n + k];
            }
        }
        v
    }
}

fn proj_grad_norm(x: &[f64], g: &[f64], lo: &[f64], hi: &[f64]) -> f64 {
    let mut m: f64 = 0.0;
    for k in 0..x.len() {
        let mut v = x[k] - g[k];
        v = v.clamp(lo[k], hi[k]);
        m = m.max((v - x[k]).abs());
    }
    m
}

// Projected BFGS on the augmented Lagrangian. Returns the final value.
fn inner_solve<P: Problem>(l: &mut Lagrangian<'_, P>, x: &mut [f64], max_iter: usize, tol: f64) -> f64 {
    let n = x.len();
    let (lo, hi) = (l.p.lower().to_vec(), l.p.upper().to_vec());
    let mut g = vec![0.0; n];
    let mut f = l.value_grad(x, &mut g);
    let mut hinv = identity(n);
    let mut d = vec![0.0; n];
    let mut xn = vec![0.0; n];
    let mut gn = vec![0.0; n];
    for _ in 0..max_iter {
        if proj_grad_norm(x, &g, &lo, &hi) <= tol {
            break;
        }
        // variables held at a bound by the gradient stay fixed this step
        let fixed: Vec<bool> = (0..n)
            .map(|k| (x[k] <= lo[k] && g[k] > 0.0) || (x[k] >= hi[k] && g[k] < 0.0))
            .collect();
        for i in 0..n {
            d[i] = 0.0;
            if fixed[i] {
                continue;
            }
            for j in 0..n {
                if !fixed[j] {
                    d[i] -= hinv[i * n + j] * g[j];
                }
            }
        }
        let mut slope: f64 = d.iter().zip(&g).map(|(a, b)| a * b).sum();
        if slope >= 0.0 {
            hinv = identity(n);
            for i in 0..n {
                d[i] = if fixed[i] { 0.0 } else { -g[i] };
            }
            slope = d.iter().zip(&g).map(|(a, b)| a * b).sum();
            if slope >= 0.0 {
                break;
            }
        }
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..50 {
            for k in 0..n {
                xn[k] = x[k] + t * d[k];
            }
            project(&mut xn, &lo, &hi);
            let fn_ = l.value_grad(&xn, &mut gn);
            let dec: f64 = (0..n).map(|k| g[k] * (xn[k] - x[k])).sum();
            if fn_.is_finite() && fn_ <= f + 1e-4 * dec.min(0.0) {
                accepted = true;
                // BFGS update of the inverse Hessian
                let s: Vec<f64> = (0..n).map(|k| xn[k] - x[k]).collect();
                let y: Vec<f64> = (0..n).map(|k| gn[k] - g[k]).collect();
                let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
                let ss: f64 = s.iter().map(|a| a * a).sum();
                let yy: f64 = y.iter().map(|a| a * a).sum();
                if sy > 1e-12 * sqrt(ss * yy) {
                    bfgs_update(&mut hinv, &s, &y, sy);
                }
                x.copy_from_slice(&xn);
                g.copy_from_slice(&gn);
                f = fn_;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // restart curvature once; give up if steepest descent also stalls
            if hinv == identity(n) {
                break;
            }
            hinv = identity(n);
        }
    }
    f
}

fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let hy: Vec<f64> = (0..n).map(|i| (0..n).map(|j| h[i * n + j] * y[j]).sum()).collect();
    let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
    let r = 1.0 / sy;
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += (1.0 + yhy * r) * r * s[i] * s[j] - r * (hy[i] * s[j] + s[i] * hy[j]);
        }
    }
}

/// Augmented Lagrangian from one start point.
pub fn augmented_lagrangian<P: Problem>(p: &P, x0: &[f64], cfg: &AlConfig) -> LocalResult {
    let n = p.dim();
    let mut x = x0.to_vec();
    project(&mut x, p.lower(), p.upper());
    let mut l = Lagrangian {
        p,
        lam: vec![0.0; p.n_eq()],
        mu: vec![0.0; p.n_ineq()],
        rho: cfg.rho0,
        ev: Eval::new(n, p.n_eq(), p.n_ineq()),
    };
    let mut prev_infeas = f64::INFINITY;
    let mut outer = 0;
    let mut converged = false;
    let mut inner_tol = 1e-3;
    let mut best_infeas = f64::INFINITY;
    let mut stalled = 0;
    while outer < cfg.max_outer {
        outer += 1;
        inner_solve(&mut l, &mut x, cfg.max_inner, inner_tol);
        p.eval(&x, &mut l.ev);
        let infeas = l.ev.infeasibility();
        if infeas <= cfg.tol_feas && inner_tol <= cfg.tol_opt {
            converged = true;
            break;
        }
        for (i, &h) in l.ev.h.iter().enumerate() {
            l.lam[i] += l.rho * h;
        }
        for (j, &g) in l.ev.g.iter().enumerate() {
            l.mu[j] = (l.mu[j] + l.rho * g).max(0.0);
        }
        if infeas > 0.25 * prev_infeas && l.rho < cfg.rho_max {
            l.rho = (l.rho * cfg.growth).min(cfg.rho_max);
        }
        prev_infeas = infeas;
        // degenerate feasible sets can stall far below any useful accuracy
        if infeas < 0.9 * best_infeas {
            best_infeas = infeas;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= 3 && inner_tol <= cfg.tol_opt {
                break;
            }
        }
        inner_tol = (inner_tol * 0.1).max(cfg.tol_opt);
    }
    p.eval(&x, &mut l.ev);
    let infeasibility = l.ev.infeasibility();
    LocalResult {
        f: l.ev.f,
        infeasibility,
        converged: converged || infeasibility <= cfg.tol_feas,
        x,
        outer_iters: outer,
    }
}

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let (mut f, mut r) = (inv, 0.0);
    while i > 0 {
        r += (i % b) as f64 * f;
        i /= b;
        f *= inv;
    }
    r
}

/// Halton points over a box, randomized by a seeded Cranley–Patterson shift.
#[derive(Debug, Clone)]
pub struct HaltonStarts {
    lo: Vec<f64>,
    hi: Vec<f64>,
    shift: Vec<f64>,
    next: u64,
}

impl HaltonStarts {
    pub fn new(lo: &[f64], hi: &[f64], seed: u64) -> Self {
        assert!(lo.len() <= PRIMES.len() && lo.len() == hi.len());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift = (0..lo.len()).map(|_| rng.random::<f64>()).collect();
        HaltonStarts {
            lo: lo.to_vec(),
            hi: hi.to_vec(),
            shift,
            next: 1,
        }
    }
}

impl Iterator for HaltonStarts {
    type Item = Vec<f64>;
    fn next(&mut self) -> Option<Vec<f64>> {
        let i = self.next;
        self.next += 1;
        Some(
            (0..self.lo.len())
                .map(|d| {
                    let u = (radical_inverse(i, PRIMES[d]) + self.shift[d]).fract();
                    self.lo[d] + u * (self.hi[d] - self.lo[d])
                })
                .collect(),
        )
    }
}

#[derive(Debug, Clone)]
pub struct MultistartResult {
    /// Best converged local optimum, or the least infeasible one when none converged.
    pub best: LocalResult,
    pub best_start: usize,
    pub locals: Vec<LocalResult>,
    pub converged: bool,
}

/// Runs the local solver from each start; picks the lowest objective among
/// converged runs, ties to the earliest start.
pub fn multistart<P: Problem, I: IntoIterator<Item = Vec<f64>>>(p: &P, starts: I, cfg: &AlConfig) -> Option<MultistartResult> {
    let locals: Vec<LocalResult> = starts.into_iter().map(|s| augmented_lagrangian(p, &s, cfg)).collect();
    pick_best(locals)
}

pub fn pick_best(locals: Vec<LocalResult>) -> Option<MultistartResult> {
    let mut best: Option<usize> = None;
    for (i, r) in locals.iter().enumerate() {
        best = match best {
            None => Some(i),
            Some(b) => {
                let cur = &locals[b];
                let better = match (r.converged, cur.converged) {
                    (true, false) => true,
                    (false, true) => false,
                    (true, true) => r.f < cur.f,
                    (false, false) => r.infeasibility < cur.infeasibility,
                };
                Some(if better { i } else { b })
            }
        };
    }
    let b = best?;
    Some(MultistartResult {
        best: locals[b].clone(),
        best_start: b,
        converged: locals[b].converged,
        locals,
    })
}
