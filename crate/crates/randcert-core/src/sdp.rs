//! Small dense semidefinite programs in LMI form,
//!
//! `max c·y  s.t.  F₀ + Σ yᵢ Fᵢ ⪰ 0,  E y = e`,
//!
//! solved by an infeasible-start primal-dual interior-point method (HKM
//! direction, Mehrotra predictor-corrector) after eliminating the equalities.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::math::sqrt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    MaxIter,
}

#[derive(Debug, Clone, Copy)]
pub struct SdpConfig {
    pub max_iter: usize,
    /// Relative duality gap at termination.
    pub gap_tol: f64,
    /// Relative primal/dual residual at termination.
    pub feas_tol: f64,
    /// A phase-1 margin below `−infeas_tol` declares the problem infeasible.
    pub infeas_tol: f64,
}

impl Default for SdpConfig {
    fn default() -> Self {
        SdpConfig {
            max_iter: 200,
            gap_tol: 1e-8,
            feas_tol: 1e-8,
            infeas_tol: 1e-7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub psd_dim: usize,
    pub f0: DMatrix<f64>,
    pub fi: Vec<DMatrix<f64>>,
    pub objective: Vec<f64>,
    pub equalities: Vec<(Vec<f64>, f64)>,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub value: f64,
    pub variables: Vec<f64>,
    pub duality_gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub status: SdpStatus,
    pub iterations: usize,
}

impl SdpProblem {
    pub fn new(psd_dim: usize, f0: DMatrix<f64>, fi: Vec<DMatrix<f64>>) -> Self {
        let n = fi.len();
        SdpProblem {
            psd_dim,
            f0,
            fi,
            objective: vec![0.0; n],
            equalities: Vec::new(),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.fi.len()
    }

    /// Facial reduction with vectors known to lie in the kernel of every
    /// feasible matrix: adds the equalities `F(y)·v = 0` and restricts the
    /// LMI to the orthogonal complement of the `v`s.
    pub fn restrict_kernel(&mut self, kernel: &[DVector<f64>]) {
        if kernel.is_empty() {
            return;
        }
        let n = self.n_vars();
        for v in kernel {
            let f0v = &self.f0 * v;
            let fv: Vec<DVector<f64>> = self.fi.iter().map(|f| f * v).collect();
            for r in 0..self.psd_dim {
                let row: Vec<f64> = (0..n).map(|k| fv[k][r]).collect();
                if row.iter().any(|c| *c != 0.0) || f0v[r] != 0.0 {
                    self.equalities.push((row, -f0v[r]));
                }
            }
        }
        // orthonormal basis of the complement: eigenvectors of Σ vvᵀ with zero eigenvalue
        let mut k = DMatrix::zeros(self.psd_dim, self.psd_dim);
        for v in kernel {
            k += v * v.transpose();
        }
        let eig = SymmetricEigen::new(k);
        let scale = eig.eigenvalues.max().max(1.0);
        let cols: Vec<DVector<f64>> = (0..self.psd_dim)
            .filter(|&i| eig.eigenvalues[i] <= 1e-12 * scale)
            .map(|i| eig.eigenvectors.column(i).clone_owned())
            .collect();
        let q = DMatrix::from_columns(&cols);
        self.f0 = sym(q.transpose() * &self.f0 * &q);
        for f in &mut self.fi {
            *f = sym(q.transpose() * &*f * &q);
        }
        self.psd_dim = q.ncols();
    }

    /// `F₀ + Σ yᵢ Fᵢ`.
    pub fn matrix(&self, y: &[f64]) -> DMatrix<f64> {
        let mut m = self.f0.clone();
        for (f, v) in self.fi.iter().zip(y) {
            m += f * *v;
        }
        m
    }
}

// Reduced problem in the standard dual form
// max bᵀz s.t. S = C − Σ zⱼ Aⱼ ⪰ 0, paired with min ⟨C,X⟩ s.t. ⟨Aⱼ,X⟩ = bⱼ, X ⪰ 0.
struct Std {
    c: DMatrix<f64>,
    a: Vec<DMatrix<f64>>,
    b: DVector<f64>,
}

struct IpmResult {
    x: DMatrix<f64>,
    z: DVector<f64>,
    pobj: f64,
    dobj: f64,
    rp: f64,
    rd: f64,
    status: SdpStatus,
    iters: usize,
}

fn inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.component_mul(b).sum()
}

fn sym(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

// Largest step in (0, 1] keeping M + αD positive definite, damped by `tau`.
fn max_step(m: &DMatrix<f64>, d: &DMatrix<f64>, tau: f64) -> f64 {
    let Some(ch) = Cholesky::new(m.clone()) else {
        return 0.0;
    };
    let l = ch.l();
    let linv = l.clone().try_inverse().unwrap_or_else(|| DMatrix::identity(m.nrows(), m.ncols()));
    let w = sym(&linv * d * linv.transpose());
    let lmin = SymmetricEigen::new(w).eigenvalues.min();
    if lmin >= 0.0 {
        1.0
    } else {
        (tau * (-1.0 / lmin)).min(1.0)
    }
}

fn ipm(p: &Std, cfg: &SdpConfig) -> IpmResult {
    let n = p.c.nrows();
    let m = p.a.len();
    let nf = n as f64;
    let anorm = p.a.iter().map(|a| a.norm()).fold(0.0, f64::max);
    let bmax = p
        .a
        .iter()
        .zip(p.b.iter())
        .map(|(a, b)| (1.0 + b.abs()) / (1.0 + a.norm()))
        .fold(0.0, f64::max);
    let xi = 10f64.max(sqrt(nf)).max(nf * bmax);
    let eta = 10f64.max(sqrt(nf)).max(anorm.max(p.c.norm()));
    let mut x = DMatrix::<f64>::identity(n, n) * xi;
    let mut s = DMatrix::<f64>::identity(n, n) * eta;
    let mut z = DVector::<f64>::zeros(m);
    let bnorm = 1.0 + p.b.norm();
    let cnorm = 1.0 + p.c.norm();
    // Gram matrix of the constraint matrices, used to put primal steps back
    // on ⟨Aᵢ, X⟩ = bᵢ when the Schur system is too ill-conditioned to do so
    let gram = DMatrix::from_fn(m, m, |i, j| inner(&p.a[i], &p.a[j]));
    let gram = Cholesky::<f64, Dyn>::new(gram);

    let mut out = IpmResult {
        x: x.clone(),
        z: z.clone(),
        pobj: 0.0,
        dobj: 0.0,
        rp: f64::INFINITY,
        rd: f64::INFINITY,
        status: SdpStatus::MaxIter,
        iters: 0,
    };
    for it in 0..cfg.max_iter {
        let mut rd_m = &p.c - &s;
        for (j, a) in p.a.iter().enumerate() {
            rd_m -= a * z[j];
        }
        let rp_v = DVector::from_fn(m, |i, _| p.b[i] - inner(&p.a[i], &x));
        let pobj = inner(&p.c, &x);
        let dobj = p.b.dot(&z);
        let gap = inner(&x, &s);
        let rp = rp_v.norm() / bnorm;
        let rd = rd_m.norm() / cnorm;
        let rel_gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        out = IpmResult {
            x: x.clone(),
            z: z.clone(),
            pobj,
            dobj,
            rp,
            rd,
            status: SdpStatus::MaxIter,
            iters: it,
        };
        if rel_gap <= cfg.gap_tol && gap / nf <= cfg.gap_tol && rp <= cfg.feas_tol && rd <= cfg.feas_tol {
            out.status = SdpStatus::Optimal;
            return out;
        }
        let mu = gap / nf;
        let Some(sinv) = Cholesky::new(s.clone()).map(|c| c.inverse()) else {
            return out;
        };
        // Schur complement M_ij = tr(A_i X A_j S⁻¹)
        let xa: Vec<DMatrix<f64>> = p.a.iter().map(|a| &x * a * &sinv).collect();
        let mut schur = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v = inner(&p.a[i], &xa[j]);
                schur[(i, j)] = v;
                schur[(j, i)] = v;
            }
        }
        let diag = schur.diagonal().max().max(1.0);
        for i in 0..m {
            schur[(i, i)] += 1e-14 * diag;
        }
        let Some(sch) = Cholesky::<f64, Dyn>::new(schur) else {
            return out;
        };
        let xrs = &x * &rd_m * &sinv;

        // direction for a complementarity target `r` (XS → r), as ΔX = (r − XΔS)S⁻¹ − X
        let direction = |r: &DMatrix<f64>| {
            let rs = r * &sinv;
            let h = DVector::from_fn(m, |i, _| rp_v[i] - inner(&p.a[i], &(&rs - &x)) + inner(&p.a[i], &xrs));
            let dz = sch.solve(&h);
            let mut ds = rd_m.clone();
            for (j, a) in p.a.iter().enumerate() {
                ds -= a * dz[j];
            }
            let mut dx = sym(&rs - &x - &x * &ds * &sinv);
            if let Some(g) = &gram {
                let miss = DVector::from_fn(m, |i, _| rp_v[i] - inner(&p.a[i], &dx));
                let lam = g.solve(&miss);
                for (a, l) in p.a.iter().zip(lam.iter()) {
                    dx += a * *l;
                }
            }
            (dx, dz, ds)
        };

        let zero = DMatrix::<f64>::zeros(n, n);
        let (dxa, _, dsa) = direction(&zero);
        let ap = max_step(&x, &dxa, 1.0);
        let ad = max_step(&s, &dsa, 1.0);
        let mu_aff = inner(&(&x + &dxa * ap), &(&s + &dsa * ad)) / nf;
        let sigma = (mu_aff / mu).powi(3).clamp(0.0, 1.0);
        let target = DMatrix::<f64>::identity(n, n) * (sigma * mu) - &dxa * &dsa;
        let (dx, dz, ds) = direction(&target);
        let ap = max_step(&x, &dx, 0.98);
        let ad = max_step(&s, &ds, 0.98);
        x += &dx * ap;
        x = sym(x);
        z += &dz * ad;
        s += &ds * ad;
        s = sym(s);
    }
    out.iters = cfg.max_iter;
    out
}

// Particular solution and null-space basis of E y = e.
fn eliminate(p: &SdpProblem) -> Option<(DVector<f64>, DMatrix<f64>)> {
    let n = p.n_vars();
    let k = p.equalities.len();
    if k == 0 {
        return Some((DVector::zeros(n), DMatrix::identity(n, n)));
    }
    let e = DMatrix::from_fn(k, n, |i, j| p.equalities[i].0[j]);
    let rhs = DVector::from_fn(k, |i, _| p.equalities[i].1);
    // eigen-decomposition of EᵀE gives the row space and the null space
    let eig = SymmetricEigen::new(e.transpose() * &e);
    let scale = eig.eigenvalues.max().max(1.0);
    let mut null_cols = Vec::new();
    let mut y0 = DVector::zeros(n);
    let ety = e.transpose() * &rhs;
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(i);
        if lam <= 1e-10 * scale {
            null_cols.push(v.clone_owned());
        } else {
            y0 += v * (v.dot(&ety) / lam);
        }
    }
    if (&e * &y0 - &rhs).amax() > 1e-7 {
        return None;
    }
    let null = if null_cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&null_cols)
    };
    Some((y0, null))
}

fn infeasible(iters: usize, n: usize) -> SdpSolution {
    SdpSolution {
        value: f64::NEG_INFINITY,
        variables: vec![f64::NAN; n],
        duality_gap: f64::NAN,
        primal_residual: f64::NAN,
        dual_residual: f64::NAN,
        status: SdpStatus::Infeasible,
        iterations: iters,
    }
}

/// `p` with its equalities eliminated: `y = y₀ + N z`.
pub struct Reduced {
    y0: DVector<f64>,
    null: DMatrix<f64>,
    g0: DMatrix<f64>,
    g: Vec<DMatrix<f64>>,
    n: usize,
}

impl Reduced {
    /// `None` when the equalities are inconsistent.
    pub fn new(p: &SdpProblem) -> Option<Self> {
        let n = p.n_vars();
        let (y0, null) = eliminate(p)?;
        let g0 = p.matrix(y0.as_slice());
        let g = (0..null.ncols())
            .map(|j| {
                let mut m = DMatrix::zeros(p.psd_dim, p.psd_dim);
                for i in 0..n {
                    if null[(i, j)] != 0.0 {
                        m += &p.fi[i] * null[(i, j)];
                    }
                }
                m
            })
            .collect();
        Some(Reduced { y0, null, g0, g, n })
    }

    // Least-squares solution of `G(z) V = 0` and the null space of the system.
    fn kernel_system(&self, kernel: &[DVector<f64>]) -> (DVector<f64>, Vec<DVector<f64>>, f64) {
        let dim = self.g0.nrows();
        let k = self.g.len();
        let rows = dim * kernel.len();
        let mut a = DMatrix::zeros(rows, k);
        let mut rhs = DVector::zeros(rows);
        for (vi, v) in kernel.iter().enumerate() {
            let g0v = &self.g0 * v;
            for r in 0..dim {
                rhs[vi * dim + r] = -g0v[r];
            }
            for (j, g) in self.g.iter().enumerate() {
                let gv = g * v;
                for r in 0..dim {
                    a[(vi * dim + r, j)] = gv[r];
                }
            }
        }
        let eig = SymmetricEigen::new(a.transpose() * &a);
        let scale = eig.eigenvalues.max().max(1e-300);
        let atr = a.transpose() * &rhs;
        let mut z0 = DVector::zeros(k);
        let mut free = Vec::new();
        for (i, &lam) in eig.eigenvalues.iter().enumerate() {
            let v = eig.eigenvectors.column(i);
            if lam > 1e-12 * scale {
                z0 += v * (v.dot(&atr) / lam);
            } else {
                free.push(v.clone_owned());
            }
        }
        let resid = (&a * &z0 - &rhs).amax();
        (z0, free, resid)
    }

    // Restricts to `G(z) V = 0` and compresses onto the orthogonal complement
    // of `V`. The kernel comes from an interior-point iterate, so it is
    // sharpened against `G(z₀)` a few times first.
    fn restrict(&self, kernel: &[DVector<f64>]) -> Option<Reduced> {
        let dim = self.g0.nrows();
        let k = self.g.len();
        let mut kernel = kernel.to_vec();
        let (mut z0, mut free, mut resid) = self.kernel_system(&kernel);
        for _ in 0..5 {
            if resid <= 1e-12 {
                break;
            }
            let mut m = self.g0.clone();
            for (j, g) in self.g.iter().enumerate() {
                m += g * z0[j];
            }
            let e = SymmetricEigen::new(m);
            let mut order: Vec<usize> = (0..dim).collect();
            order.sort_by(|&i, &j| e.eigenvalues[i].abs().total_cmp(&e.eigenvalues[j].abs()));
            let sharper: Vec<DVector<f64>> =
                order[..kernel.len()].iter().map(|&i| e.eigenvectors.column(i).clone_owned()).collect();
            let (z1, f1, r1) = self.kernel_system(&sharper);
            if r1 >= resid {
                break;
            }
            (kernel, z0, free, resid) = (sharper, z1, f1, r1);
        }
        if resid > 1e-3 {
            return None;
        }
        let mut kk = DMatrix::zeros(dim, dim);
        for v in &kernel {
            kk += v * v.transpose();
        }
        let e = SymmetricEigen::new(kk);
        let scale = e.eigenvalues.max().max(1.0);
        let cols: Vec<DVector<f64>> = (0..dim)
            .filter(|&i| e.eigenvalues[i] <= 1e-9 * scale)
            .map(|i| e.eigenvectors.column(i).clone_owned())
            .collect();
        let q = DMatrix::from_columns(&cols);
        let mut g0 = self.g0.clone();
        for (j, g) in self.g.iter().enumerate() {
            g0 += g * z0[j];
        }
        let y0 = &self.y0 + &self.null * &z0;
        let zb = if free.is_empty() { DMatrix::zeros(k, 0) } else { DMatrix::from_columns(&free) };
        let null = &self.null * &zb;
        let g = (0..zb.ncols())
            .map(|c| {
                let mut m = DMatrix::zeros(dim, dim);
                for j in 0..k {
                    m += &self.g[j] * zb[(j, c)];
                }
                sym(q.transpose() * m * &q)
            })
            .collect();
        Some(Reduced { y0, null, g0: sym(q.transpose() * g0 * &q), g, n: self.n })
    }

    fn phase1(&self, cfg: &SdpConfig) -> IpmResult {
        let k = self.g.len();
        let dim = self.g0.nrows();
        let mut a: Vec<DMatrix<f64>> = self.g.iter().map(|m| -m).collect();
        a.push(DMatrix::identity(dim, dim));
        let mut b = DVector::zeros(k + 1);
        b[k] = 1.0;
        ipm(&Std { c: self.g0.clone(), a, b }, cfg)
    }

    /// Phase 1: largest `s` with `G(z) − sI ⪰ 0`. Feasible unless a
    /// primal-feasible `X` certifies `s < −infeas_tol`.
    pub fn is_feasible(&self, cfg: &SdpConfig) -> bool {
        if self.g.is_empty() {
            return SymmetricEigen::new(self.g0.clone()).eigenvalues.min() >= -cfg.infeas_tol;
        }
        let r = self.phase1(cfg);
        // a primal-feasible X with ⟨G₀,X⟩ < 0 is a Farkas certificate
        !(r.rp <= 1e-6 && r.pobj < -cfg.infeas_tol)
    }

    /// Maximizes `objective · y` without a feasibility check.
    pub fn solve(&self, objective: &[f64], cfg: &SdpConfig) -> SdpSolution {
        let c = DVector::from_column_slice(objective);
        let cst = c.dot(&self.y0);
        if self.g.is_empty() {
            return SdpSolution {
                value: cst,
                variables: self.y0.iter().copied().collect(),
                duality_gap: 0.0,
                primal_residual: 0.0,
                dual_residual: 0.0,
                status: SdpStatus::Optimal,
                iterations: 0,
            };
        }
        let d = self.null.transpose() * &c;
        let r = ipm(
            &Std {
                c: self.g0.clone(),
                a: self.g.iter().map(|m| -m).collect(),
                b: d,
            },
            cfg,
        );
        let y = &self.y0 + &self.null * &r.z;
        SdpSolution {
            value: r.dobj + cst,
            variables: y.iter().copied().collect(),
            duality_gap: (r.pobj - r.dobj).abs(),
            primal_residual: r.rp,
            dual_residual: r.rd,
            status: r.status,
            iterations: r.iters,
        }
    }
}

/// Eliminates the equalities and runs phase 1. When the feasible set has no
/// interior, the phase-1 dual matrix `X` (with `⟨F(y), X⟩ = 0` on the whole
/// feasible set) spans directions in the kernel of every feasible `F(y)`; the
/// problem is restricted to their complement and phase 1 repeated. `None`
/// means infeasible.
pub fn prepare(p: &SdpProblem, cfg: &SdpConfig) -> Option<Reduced> {
    let mut red = Reduced::new(p)?;
    for _ in 0..p.psd_dim {
        if red.g.is_empty() {
            return red.is_feasible(cfg).then_some(red);
        }
        let r = red.phase1(cfg);
        if r.rp <= 1e-6 && r.pobj < -cfg.infeas_tol {
            return None;
        }
        if r.dobj > cfg.infeas_tol || r.pobj > cfg.infeas_tol {
            return Some(red);
        }
        let eig = SymmetricEigen::new(r.x.clone());
        let top = eig.eigenvalues.max();
        let kernel: Vec<DVector<f64>> = (0..eig.eigenvalues.len())
            .filter(|&i| eig.eigenvalues[i] > 1e-3 * top)
            .map(|i| eig.eigenvectors.column(i).clone_owned())
            .collect();
        if kernel.is_empty() || kernel.len() >= red.g0.nrows() {
            return Some(red);
        }
        red = red.restrict(&kernel)?;
    }
    Some(red)
}

/// Solves `p`, running the phase-1 feasibility problem first.
pub fn solve_sdp(p: &SdpProblem, cfg: &SdpConfig) -> SdpSolution {
    match prepare(p, cfg) {
        Some(red) => red.solve(&p.objective, cfg),
        None => infeasible(0, p.n_vars()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    // [[1, y], [y, 1]] ⪰ 0: max y = 1
    fn two_by_two() -> SdpProblem {
        let f0 = DMatrix::identity(2, 2);
        let f1 = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let mut p = SdpProblem::new(2, f0, vec![f1]);
        p.objective = vec![1.0];
        p
    }

    #[test]
    fn unit_disc() {
        let s = solve_sdp(&two_by_two(), &SdpConfig::default());
        assert_eq!(s.status, SdpStatus::Optimal);
        assert_abs_diff_eq!(s.value, 1.0, epsilon = 1e-6);
        assert!(s.duality_gap <= 1e-7);
    }

    #[test]
    fn equality_pins_value() {
        let mut p = two_by_two();
        p.equalities.push((vec![1.0], 0.3));
        let s = solve_sdp(&p, &SdpConfig::default());
        assert_eq!(s.status, SdpStatus::Optimal);
        assert_abs_diff_eq!(s.value, 0.3, epsilon = 1e-12);
        p.equalities[0].1 = 1.5;
        assert_eq!(solve_sdp(&p, &SdpConfig::default()).status, SdpStatus::Infeasible);
    }

    #[test]
    fn three_by_three_correlations() {
        // unit-diagonal 3×3 Gram matrix, minimize a+b+c of the off-diagonals: −3/2
        let mut fi = Vec::new();
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let mut m = DMatrix::zeros(3, 3);
            m[(i, j)] = 1.0;
            m[(j, i)] = 1.0;
            fi.push(m);
        }
        let mut p = SdpProblem::new(3, DMatrix::identity(3, 3), fi);
        p.objective = vec![-1.0; 3];
        let s = solve_sdp(&p, &SdpConfig::default());
        assert_eq!(s.status, SdpStatus::Optimal);
        assert_abs_diff_eq!(s.value, 1.5, epsilon = 1e-6);
        // infeasible: all three off-diagonals fixed at −0.9
        p.equalities = (0..3)
            .map(|i| {
                let mut e = vec![0.0; 3];
                e[i] = 1.0;
                (e, -0.9)
            })
            .collect();
        assert_eq!(solve_sdp(&p, &SdpConfig::default()).status, SdpStatus::Infeasible);
    }

    #[test]
    fn iteration_cap() {
        let cfg = SdpConfig {
            max_iter: 1,
            ..SdpConfig::default()
        };
        assert_eq!(solve_sdp(&two_by_two(), &cfg).status, SdpStatus::MaxIter);
    }
}
