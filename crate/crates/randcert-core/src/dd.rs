//! Device-dependent randomness: optimization over pure two-qubit states and
//! projective measurements subject to witness constraints.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::behavior::{idx, WitnessKind, WitnessSpec};
use crate::error::{Error, Result};
use crate::math::{log2, PI};
use crate::optim::{augmented_lagrangian, AlConfig, Eval, HaltonStarts, LocalResult, Problem};
use crate::quantum::{amplitude, canonicalize, probs, probs_and_jacobian, Params, PureState, StateSign, N_PARAMS};

/// Constraint residual required of a reported optimum.
pub const FEAS_TOL: f64 = 1e-8;
pub const DEFAULT_STARTS_HARDY: usize = 100;
pub const DEFAULT_STARTS_CL: usize = 200;

const DIM: usize = N_PARAMS + 1;
const PAIRS: [(usize, usize); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];
const SIGNS: [StateSign; 2] = [StateSign::Minus, StateSign::Plus];

/// Lagrangian settings for the quantum problems; [`QuantumProblem::polish`]
/// supplies the last digits of feasibility.
pub fn dd_config() -> AlConfig {
    AlConfig {
        tol_feas: 1e-7,
        tol_opt: 1e-8,
        max_outer: 20,
        ..AlConfig::default()
    }
}

pub fn default_starts(kind: WitnessKind) -> usize {
    match kind {
        WitnessKind::Cl => DEFAULT_STARTS_CL,
        _ => DEFAULT_STARTS_HARDY,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Objective {
    /// Minimize the largest outcome probability at setting pair `(x, y)`.
    Guess(usize, usize),
    /// Maximize the witness.
    Witness,
    /// Least squares distance to a target behavior.
    Fit([f64; 16]),
}

/// Variables: the nine state/angle parameters followed by an epigraph slot
/// (used only by [`Objective::Guess`]).
#[derive(Debug, Clone)]
pub struct QuantumProblem {
    pub sign: StateSign,
    pub kind: WitnessKind,
    /// Imposed witness value, if any.
    pub target: Option<f64>,
    pub objective: Objective,
    lo: [f64; DIM],
    hi: [f64; DIM],
}

impl QuantumProblem {
    pub fn new(sign: StateSign, kind: WitnessKind, target: Option<f64>, objective: Objective) -> Self {
        // angles are left effectively free and canonicalized afterwards
        let mut lo = [-4.0 * PI; DIM];
        let mut hi = [4.0 * PI; DIM];
        lo[8] = 0.0;
        hi[8] = 1.0;
        lo[9] = 0.0;
        hi[9] = if matches!(objective, Objective::Guess(..)) { 1.0 } else { 0.0 };
        QuantumProblem {
            sign,
            kind,
            target,
            objective,
            lo,
            hi,
        }
    }

    /// Pins the state amplitude.
    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.lo[8] = alpha;
        self.hi[8] = alpha;
        self
    }

    /// A starting vector for these parameters, with the epigraph slot set feasibly.
    pub fn start(&self, p: &Params) -> Vec<f64> {
        let mut v = p.to_vec();
        v[8] = v[8].clamp(self.lo[8], self.hi[8]);
        let t = match self.objective {
            Objective::Guess(x, y) => {
                let pr = probs(p, self.sign.value());
                (0..4).map(|k| pr[idx(x, y, 0, 0) + k]).fold(0.0, f64::max)
            }
            _ => 0.0,
        };
        v.push(t);
        v
    }

    /// Witness residual and the probabilities of the zero cells.
    pub fn residuals(&self, p: &Params) -> Vec<f64> {
        let pr = probs(p, self.sign.value());
        let mut r: Vec<f64> = self.kind.zero_cells().iter().map(|&c| pr[c]).collect();
        if let Some(v) = self.target {
            let w: f64 = self.kind.functional().iter().zip(&pr).map(|(f, p)| f * p).sum();
            r.push(w - v);
        }
        r
    }
}

impl QuantumProblem {
    fn objective_value(&self, p: &Params) -> f64 {
        let pr = probs(p, self.sign.value());
        match self.objective {
            Objective::Guess(x, y) => (0..4).map(|k| pr[idx(x, y, 0, 0) + k]).fold(0.0, f64::max),
            Objective::Witness => -self.kind.functional().iter().zip(&pr).map(|(a, b)| a * b).sum::<f64>(),
            Objective::Fit(m) => pr.iter().zip(&m).map(|(a, b)| (a - b) * (a - b)).sum(),
        }
    }

    /// Gauss–Newton minimum-norm steps onto the equality constraints. The
    /// Lagrangian phase leaves degenerate points (e.g. the witness maximum,
    /// where the witness gradient vanishes along the constraint set) only
    /// roughly feasible; this finishes the job.
    pub fn polish(&self, p: &Params) -> Params {
        let free: Vec<usize> = (0..N_PARAMS).filter(|&k| self.lo[k] < self.hi[k]).collect();
        let m = Problem::n_eq(self);
        let mut ev = Eval::new(DIM, m, Problem::n_ineq(self));
        let mut x = p.to_vec();
        x.push(0.0);
        let norm = |ev: &Eval| ev.h.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        self.eval(&x, &mut ev);
        let mut cur = norm(&ev);
        for _ in 0..40 {
            if cur <= 1e-14 {
                break;
            }
            let j = DMatrix::from_fn(m, free.len(), |i, c| ev.jh[i * DIM + free[c]]);
            let h = DVector::from_column_slice(&ev.h);
            let mut jjt = &j * j.transpose();
            let reg = 1e-14 * (1.0 + jjt.trace());
            for i in 0..m {
                jjt[(i, i)] += reg;
            }
            let Some(ch) = jjt.cholesky() else { break };
            let step = j.transpose() * ch.solve(&h);
            let mut trial = x.clone();
            let mut t = 1.0;
            let mut improved = false;
            for _ in 0..20 {
                for (c, &k) in free.iter().enumerate() {
                    trial[k] = (x[k] - t * step[c]).clamp(self.lo[k], self.hi[k]);
                }
                self.eval(&trial, &mut ev);
                let n = norm(&ev);
                if n < cur {
                    cur = n;
                    x.copy_from_slice(&trial);
                    improved = true;
                    break;
                }
                t *= 0.5;
            }
            if !improved {
                break;
            }
        }
        core::array::from_fn(|k| x[k])
    }

    /// Augmented Lagrangian from `p` followed by [`Self::polish`].
    pub fn solve(&self, p: &Params, cfg: &AlConfig) -> LocalResult {
        let mut r = augmented_lagrangian(self, &self.start(p), cfg);
        let raw: Params = core::array::from_fn(|k| r.x[k]);
        let pol = self.polish(&raw);
        let worst = |q: &Params| self.residuals(q).iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if worst(&pol) < worst(&raw) {
            r.x[..N_PARAMS].copy_from_slice(&pol);
        }
        let q: Params = core::array::from_fn(|k| r.x[k]);
        r.f = self.objective_value(&q);
        if let Objective::Guess(..) = self.objective {
            r.x[9] = r.f;
        }
        r.infeasibility = worst(&q);
        r.converged = r.infeasibility <= FEAS_TOL;
        r
    }
}

impl Problem for QuantumProblem {
    fn dim(&self) -> usize {
        DIM
    }
    fn n_eq(&self) -> usize {
        2 * self.kind.zero_cells().len() + self.target.is_some() as usize
    }
    fn n_ineq(&self) -> usize {
        if matches!(self.objective, Objective::Guess(..)) {
            4
        } else {
            0
        }
    }
    fn lower(&self) -> &[f64] {
        &self.lo
    }
    fn upper(&self) -> &[f64] {
        &self.hi
    }

    fn eval(&self, v: &[f64], o: &mut Eval) {
        let p: Params = core::array::from_fn(|k| v[k]);
        let s = self.sign.value();
        let (pr, jac) = probs_and_jacobian(&p, s);
        o.grad.iter_mut().for_each(|g| *g = 0.0);
        let f = self.kind.functional();
        match self.objective {
            Objective::Guess(x, y) => {
                o.f = v[9];
                o.grad[9] = 1.0;
                for k in 0..4 {
                    let c = idx(x, y, 0, 0) + k;
                    o.g[k] = pr[c] - v[9];
                    o.jg[k * DIM..k * DIM + N_PARAMS].copy_from_slice(&jac[c]);
                    o.jg[k * DIM + 9] = -1.0;
                }
            }
            Objective::Witness => {
                o.f = -f.iter().zip(&pr).map(|(a, b)| a * b).sum::<f64>();
                for (c, fc) in f.iter().enumerate() {
                    for k in 0..N_PARAMS {
                        o.grad[k] -= fc * jac[c][k];
                    }
                }
            }
            Objective::Fit(m) => {
                o.f = 0.0;
                for c in 0..16 {
                    let d = pr[c] - m[c];
                    o.f += d * d;
                    for k in 0..N_PARAMS {
                        o.grad[k] += 2.0 * d * jac[c][k];
                    }
                }
            }
        }
        let mut row = 0;
        for &c in self.kind.zero_cells() {
            let (a, g) = amplitude(&p, s, c);
            for part in 0..2 {
                o.h[row] = a[part];
                let r = &mut o.jh[row * DIM..(row + 1) * DIM];
                r[..N_PARAMS].copy_from_slice(&g[part]);
                r[9] = 0.0;
                row += 1;
            }
        }
        if let Some(t) = self.target {
            o.h[row] = f.iter().zip(&pr).map(|(a, b)| a * b).sum::<f64>() - t;
            let r = &mut o.jh[row * DIM..(row + 1) * DIM];
            for k in 0..N_PARAMS {
                r[k] = (0..16).map(|c| f[c] * jac[c][k]).sum();
            }
            r[9] = 0.0;
        }
    }
}

/// Result of a multistart search.
#[derive(Debug, Clone, PartialEq)]
pub struct OptOutcome {
    /// Bits for randomness searches; the witness value for witness maximization.
    pub best_value: f64,
    /// Canonical parameters of the best point.
    pub params: Params,
    pub sign: StateSign,
    /// Setting pair of the best point (randomness searches only).
    pub pair: Option<(usize, usize)>,
    pub constraint_residuals: Vec<f64>,
    pub starts_used: usize,
    pub converged: bool,
    /// Objective value of every converged local run, in run order.
    pub local_optima: Vec<f64>,
}

impl OptOutcome {
    pub fn max_residual(&self) -> f64 {
        self.constraint_residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

/// Low-discrepancy starts over `[0,π]⁴ × [0,2π)⁴ × [0,1]`.
pub fn start_points(n: usize, seed: u64) -> Vec<Params> {
    let mut lo = [0.0; N_PARAMS];
    let mut hi = [PI; N_PARAMS];
    for k in 4..8 {
        hi[k] = 2.0 * PI;
    }
    lo[8] = 0.0;
    hi[8] = 1.0;
    HaltonStarts::new(&lo, &hi, seed)
        .take(n)
        .map(|v| core::array::from_fn(|k| v[k]))
        .collect()
}

#[derive(Debug, Clone)]
struct Run {
    prob: QuantumProblem,
    res: LocalResult,
}

impl Run {
    fn params(&self) -> Params {
        canonicalize(&core::array::from_fn(|k| self.res.x[k]))
    }

    // the AL tolerance is on amplitudes; recheck on the reported probabilities
    fn feasible(&self) -> bool {
        self.prob.residuals(&self.params()).iter().all(|r| r.abs() <= FEAS_TOL)
    }
}

/// Local solve of `prob` from parameter vector `p`.
pub fn local_solve(prob: &QuantumProblem, p: &Params, cfg: &AlConfig) -> (Params, f64, bool) {
    let res = prob.solve(p, cfg);
    let run = Run {
        prob: prob.clone(),
        res,
    };
    let ok = run.feasible();
    (run.params(), run.res.f, ok)
}

fn reduce(runs: Vec<Run>, starts: usize, to_value: impl Fn(&Run) -> f64) -> Result<OptOutcome> {
    let mut best: Option<usize> = None;
    let mut local_optima = Vec::new();
    let feasible: Vec<bool> = runs.iter().map(Run::feasible).collect();
    for (i, r) in runs.iter().enumerate() {
        if !feasible[i] {
            continue;
        }
        local_optima.push(to_value(r));
        if best.is_none_or(|b| r.res.f < runs[b].res.f) {
            best = Some(i);
        }
    }
    let converged = best.is_some();
    let b = match best {
        Some(b) => b,
        None => {
            // report the least infeasible run
            let mut b = 0;
            for (i, r) in runs.iter().enumerate() {
                if r.res.infeasibility < runs[b].res.infeasibility {
                    b = i;
                }
            }
            if runs.is_empty() {
                return Err(Error::Invalid("no starts".into()));
            }
            b
        }
    };
    let r = &runs[b];
    let params = r.params();
    Ok(OptOutcome {
        best_value: to_value(r),
        params,
        sign: r.prob.sign,
        pair: match r.prob.objective {
            Objective::Guess(x, y) => Some((x, y)),
            _ => None,
        },
        constraint_residuals: r.prob.residuals(&params),
        starts_used: starts,
        converged,
        local_optima,
    })
}

/// Every `(sign, pair)` local problem for a randomness search.
pub fn dd_problems(witness: WitnessSpec) -> Vec<QuantumProblem> {
    let mut v = Vec::new();
    for sign in SIGNS {
        for (x, y) in PAIRS {
            v.push(QuantumProblem::new(sign, witness.kind, Some(witness.value), Objective::Guess(x, y)));
        }
    }
    v
}

fn guess_bits(r: &Run) -> f64 {
    let p = r.params();
    let pr = probs(&p, r.prob.sign.value());
    match r.prob.objective {
        Objective::Guess(x, y) => -log2((0..4).map(|k| pr[idx(x, y, 0, 0) + k]).fold(0.0, f64::max)),
        _ => f64::NAN,
    }
}

/// Largest min-entropy (at the best setting pair) over quantum realizations
/// with the given witness value. Each start is run for both state signs and
/// all four setting pairs.
pub fn max_dd_randomness(witness: WitnessSpec, starts: usize, seed: u64) -> Result<OptOutcome> {
    max_dd_randomness_with(witness, starts, seed, &dd_config())
}

pub fn max_dd_randomness_with(witness: WitnessSpec, starts: usize, seed: u64, cfg: &AlConfig) -> Result<OptOutcome> {
    if witness.kind == WitnessKind::Chsh {
        return Err(Error::Invalid("randomness search needs a Hardy or CL witness".into()));
    }
    if starts == 0 {
        return Err(Error::Invalid("starts must be at least 1".into()));
    }
    let probs_ = dd_problems(witness);
    let mut runs = Vec::with_capacity(starts * probs_.len());
    for p in start_points(starts, seed) {
        for prob in &probs_ {
            runs.push(Run {
                prob: prob.clone(),
                res: prob.solve(&p, cfg),
            });
        }
    }
    reduce(runs, starts, guess_bits)
}

/// Runs a batch of independent `(problem, start)` jobs and reduces them the
/// same way [`max_dd_randomness`] does. Lets a caller schedule the local
/// solves itself (e.g. in parallel) and still get the same answer.
pub fn reduce_dd(jobs: &[(QuantumProblem, Params)], results: Vec<LocalResult>, starts: usize) -> Result<OptOutcome> {
    let runs = jobs
        .iter()
        .zip(results)
        .map(|((prob, _), res)| Run { prob: prob.clone(), res })
        .collect();
    reduce(runs, starts, guess_bits)
}

/// The job list of [`max_dd_randomness`], in its run order.
pub fn dd_jobs(witness: WitnessSpec, starts: usize, seed: u64) -> Vec<(QuantumProblem, Params)> {
    let probs_ = dd_problems(witness);
    let mut jobs = Vec::new();
    for p in start_points(starts, seed) {
        for prob in &probs_ {
            jobs.push((prob.clone(), p));
        }
    }
    jobs
}

/// Maximum of a Hardy or CL witness over measurement settings for a fixed state.
pub fn witness_maximum(state: PureState, kind: WitnessKind, starts: usize, seed: u64) -> Result<OptOutcome> {
    if kind == WitnessKind::Chsh {
        return Err(Error::Invalid("witness maximum needs a Hardy or CL witness".into()));
    }
    if starts == 0 {
        return Err(Error::Invalid("starts must be at least 1".into()));
    }
    let prob = QuantumProblem::new(state.sign, kind, None, Objective::Witness).with_alpha(state.alpha);
    let cfg = dd_config();
    let runs = start_points(starts, seed)
        .into_iter()
        .map(|p| Run {
            prob: prob.clone(),
            res: prob.solve(&p, &cfg),
        })
        .collect();
    reduce(runs, starts, |r| -r.res.f)
}

/// Same as [`witness_maximum`] with the state amplitude free.
pub fn global_witness_maximum(kind: WitnessKind, starts: usize, seed: u64) -> Result<OptOutcome> {
    let cfg = dd_config();
    let mut runs = Vec::new();
    for p in start_points(starts, seed) {
        for sign in SIGNS {
            let prob = QuantumProblem::new(sign, kind, None, Objective::Witness);
            runs.push(Run {
                res: prob.solve(&p, &cfg),
                prob,
            });
        }
    }
    reduce(runs, starts, |r| -r.res.f)
}

/// Local problem starting vector length, for callers building their own jobs.
pub const fn problem_dim() -> usize {
    DIM
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::max_hardy;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hardy_maximum_over_states() {
        let r = global_witness_maximum(WitnessKind::Hardy, 10, 3).unwrap();
        assert!(r.converged);
        assert_abs_diff_eq!(r.best_value, max_hardy(), epsilon = 1e-8);
        assert!(r.max_residual() <= FEAS_TOL);
    }

    #[test]
    fn product_state_has_no_hardy() {
        for alpha in [0.0, 1.0] {
            let st = PureState::new(alpha, StateSign::Minus).unwrap();
            let r = witness_maximum(st, WitnessKind::Hardy, 6, 1).unwrap();
            assert!(r.best_value.abs() <= 1e-6, "{}", r.best_value);
        }
    }

    #[test]
    fn residuals_vanish_at_table_point() {
        let prob = QuantumProblem::new(StateSign::Minus, WitnessKind::Hardy, Some(0.064), Objective::Guess(0, 0));
        let p = [0.9432, 1.3482, 2.1984, 1.7934, 4.6405, 1.4989, 4.6405, 1.4989, 0.5380];
        let r = prob.residuals(&p);
        assert_eq!(r.len(), 4);
        assert!(r.iter().all(|v| v.abs() < 1e-3));
    }

    #[test]
    fn dd_search_is_deterministic() {
        let w = WitnessSpec::new(WitnessKind::Hardy, 0.064).unwrap();
        let a = max_dd_randomness(w, 3, 11).unwrap();
        let b = max_dd_randomness(w, 3, 11).unwrap();
        assert_eq!(a, b);
    }
}
