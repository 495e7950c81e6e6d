//! NPA moment matrices for two parties with two ±1-valued observables each,
//! and the device-independent guessing-probability bounds built on them.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::behavior::{sign, Cell, WitnessKind, WitnessSpec};
use crate::error::{Error, Result};
use crate::lp::ns_lp;
use crate::math::log2;
use crate::sdp::{prepare, Reduced, SdpConfig, SdpProblem, SdpStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    /// The no-signalling polytope (LP over its vertices).
    L0,
    L1,
    L1ab,
}

impl Level {
    pub const fn name(self) -> &'static str {
        match self {
            Level::L0 => "L0",
            Level::L1 => "L1",
            Level::L1ab => "L1ab",
        }
    }
}

// An operator product: Alice's letters then Bob's (the parties commute).
type Word = (Vec<u8>, Vec<u8>);

fn reduce(w: &[u8]) -> Vec<u8> {
    let mut out: Vec<u8> = Vec::with_capacity(w.len());
    for &c in w {
        if out.last() == Some(&c) {
            out.pop();
        } else {
            out.push(c);
        }
    }
    out
}

// Real moments: a word and its adjoint share one variable.
fn canonical(w: Word) -> Word {
    let rev = (w.0.iter().rev().copied().collect(), w.1.iter().rev().copied().collect());
    if rev < w {
        rev
    } else {
        w
    }
}

/// Linear functional `constant + Σ coeffs[i]·yᵢ` over moment variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Functional {
    pub coeffs: Vec<f64>,
    pub constant: f64,
}

impl Functional {
    pub fn eval(&self, y: &[f64]) -> f64 {
        self.constant + self.coeffs.iter().zip(y).map(|(c, v)| c * v).sum::<f64>()
    }

    fn add_scaled(&mut self, other: &Functional, s: f64) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += s * b;
        }
        self.constant += s * other.constant;
    }
}

#[derive(Debug, Clone)]
pub struct MomentMatrix {
    pub level: Level,
    pub monomials: Vec<Word>,
    /// Variable of each cell; `None` is the identity (value 1).
    pub var_map: Vec<Vec<Option<usize>>>,
    pub words: Vec<Word>,
}

impl MomentMatrix {
    /// Monomials `𝟙, A₁, A₂, B₁, B₂` and, at `L1ab`, the four `AₓB_y`.
    pub fn new(level: Level) -> Result<Self> {
        let mut monomials: Vec<Word> = vec![(vec![], vec![]), (vec![0], vec![]), (vec![1], vec![]), (vec![], vec![0]), (vec![], vec![1])];
        match level {
            Level::L0 => return Err(Error::Invalid("level L0 has no moment matrix".into())),
            Level::L1 => {}
            Level::L1ab => {
                for x in 0..2 {
                    for y in 0..2 {
                        monomials.push((vec![x], vec![y]));
                    }
                }
            }
        }
        let n = monomials.len();
        let mut index: BTreeMap<Word, usize> = BTreeMap::new();
        let mut words = Vec::new();
        let mut var_map = vec![vec![None; n]; n];
        for i in 0..n {
            for j in 0..n {
                let (u, v) = (&monomials[i], &monomials[j]);
                let a: Vec<u8> = u.0.iter().rev().chain(v.0.iter()).copied().collect();
                let b: Vec<u8> = u.1.iter().rev().chain(v.1.iter()).copied().collect();
                let w = canonical((reduce(&a), reduce(&b)));
                if w.0.is_empty() && w.1.is_empty() {
                    continue;
                }
                let k = *index.entry(w.clone()).or_insert_with(|| {
                    words.push(w);
                    words.len() - 1
                });
                var_map[i][j] = Some(k);
            }
        }
        Ok(MomentMatrix {
            level,
            monomials,
            var_map,
            words,
        })
    }

    pub fn dim(&self) -> usize {
        self.monomials.len()
    }

    pub fn n_vars(&self) -> usize {
        self.words.len()
    }

    /// Variable index of a reduced word.
    pub fn var(&self, alice: &[u8], bob: &[u8]) -> Option<usize> {
        let w = canonical((reduce(alice), reduce(bob)));
        self.words.iter().position(|v| *v == w)
    }

    /// `Γ` at variable values `y`.
    pub fn gamma(&self, y: &[f64]) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.var_map[i][j].map_or(1.0, |k| y[k]))
    }

    /// Size of the LMI: `Γ`, plus at `L1` one 1×1 block per probability.
    pub fn lmi_dim(&self) -> usize {
        match self.level {
            Level::L1 => self.dim() + 16,
            _ => self.dim(),
        }
    }

    /// `F₀ + Σ yᵢ Fᵢ`: the moment matrix `Γ`, and at `L1` also the 16
    /// probabilities on the diagonal. `Γ ⪰ 0` alone does not make the
    /// probabilities nonnegative at this level; with them the relaxation sits
    /// inside the no-signalling polytope.
    pub fn lmi(&self) -> (DMatrix<f64>, Vec<DMatrix<f64>>) {
        let n = self.dim();
        let m = self.lmi_dim();
        let mut f0 = DMatrix::from_fn(m, m, |i, j| if i < n && j < n && self.var_map[i][j].is_none() { 1.0 } else { 0.0 });
        let mut fi: Vec<DMatrix<f64>> = (0..self.n_vars())
            .map(|k| DMatrix::from_fn(m, m, |i, j| if i < n && j < n && self.var_map[i][j] == Some(k) { 1.0 } else { 0.0 }))
            .collect();
        if m > n {
            for c in 0..16 {
                let k = Cell::from_index(c);
                let f = self.probability_functional(k.x, k.y, k.a, k.b);
                f0[(n + c, n + c)] = f.constant;
                for (v, coef) in f.coeffs.iter().enumerate() {
                    fi[v][(n + c, n + c)] = *coef;
                }
            }
        }
        (f0, fi)
    }

    /// `P(a,b|x,y) = (1 + a⟨Aₓ⟩ + b⟨B_y⟩ + ab⟨AₓB_y⟩)/4` as a functional.
    pub fn probability_functional(&self, x: usize, y: usize, a: usize, b: usize) -> Functional {
        let mut f = Functional {
            coeffs: vec![0.0; self.n_vars()],
            constant: 0.25,
        };
        let (sa, sb) = (sign(a), sign(b));
        let (xa, yb) = (x as u8, y as u8);
        // first-order and AₓB_y moments always appear in Γ
        f.coeffs[self.var(&[xa], &[]).expect("A moment")] += 0.25 * sa;
        f.coeffs[self.var(&[], &[yb]).expect("B moment")] += 0.25 * sb;
        f.coeffs[self.var(&[xa], &[yb]).expect("AB moment")] += 0.25 * sa * sb;
        f
    }

    /// Kernel vectors of the LMI forced by vanishing cells. At `L1ab`,
    /// `P(a,b|x,y) = vᵀΓv/16` with `v = 𝟙 + aAₓ + bB_y + abAₓB_y`; at `L1` the
    /// cell's own 1×1 block.
    pub fn zero_kernel(&self, kind: WitnessKind) -> Vec<DVector<f64>> {
        let n = self.lmi_dim();
        kind.zero_cells()
            .iter()
            .map(|&i| {
                let mut v = DVector::zeros(n);
                if self.level == Level::L1 {
                    v[self.dim() + i] = 1.0;
                    return v;
                }
                let k = Cell::from_index(i);
                let (sa, sb) = (sign(k.a), sign(k.b));
                v[0] = 1.0;
                v[1 + k.x] = sa;
                v[3 + k.y] = sb;
                v[5 + 2 * k.x + k.y] = sa * sb;
                v
            })
            .collect()
    }

    /// `Σ_c w_c P_c` for a functional given over the 16 probabilities.
    pub fn behavior_functional(&self, w: &[f64; 16]) -> Functional {
        let mut f = Functional {
            coeffs: vec![0.0; self.n_vars()],
            constant: 0.0,
        };
        for (i, &c) in w.iter().enumerate() {
            if c != 0.0 {
                let k = Cell::from_index(i);
                f.add_scaled(&self.probability_functional(k.x, k.y, k.a, k.b), c);
            }
        }
        f
    }
}

/// Witness equalities as `(functional over the 16 probabilities, value)`.
pub fn witness_constraints(w: WitnessSpec) -> Vec<([f64; 16], f64)> {
    let mut eqs = vec![(w.kind.functional(), w.value)];
    for &c in w.kind.zero_cells() {
        let mut f = [0.0; 16];
        f[c] = 1.0;
        eqs.push((f, 0.0));
    }
    eqs
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiBound {
    pub bits: f64,
    /// Largest achievable outcome probability.
    pub p_star: f64,
    /// First cell (lexicographic) attaining `p_star`.
    pub cell: Cell,
    pub level: Level,
    /// Largest duality gap over the 16 subproblems (zero for the LP).
    pub max_gap: f64,
    /// `Optimal` unless some subproblem hit the iteration cap.
    pub status: SdpStatus,
}

/// Device-independent guaranteed bits for `witness`: maximizes each of the 16
/// probabilities over the relaxation at `level` with the witness constraints
/// imposed, and returns `−log₂` of the overall maximum.
pub fn di_guaranteed(witness: WitnessSpec, level: Level) -> Result<DiBound> {
    di_guaranteed_with(witness, level, &SdpConfig::default())
}

pub fn di_guaranteed_with(witness: WitnessSpec, level: Level, cfg: &SdpConfig) -> Result<DiBound> {
    let eqs = witness_constraints(witness);
    let mut vals = [0.0; 16];
    let mut max_gap: f64 = 0.0;
    let mut status = SdpStatus::Optimal;
    match level {
        Level::L0 => {
            for (i, v) in vals.iter_mut().enumerate() {
                let mut f = [0.0; 16];
                f[i] = 1.0;
                *v = ns_lp(&f, &eqs)?.0;
            }
        }
        _ => {
            let mm = MomentMatrix::new(level)?;
            let (f0, fi) = mm.lmi();
            let mut p = SdpProblem::new(mm.lmi_dim(), f0, fi);
            p.restrict_kernel(&mm.zero_kernel(witness.kind));
            for (w, v) in &eqs {
                let f = mm.behavior_functional(w);
                p.equalities.push((f.coeffs, v - f.constant));
            }
            let red = prepare(&p, cfg).ok_or(Error::Infeasible)?;
            for (i, v) in vals.iter_mut().enumerate() {
                let k = Cell::from_index(i);
                let f = mm.probability_functional(k.x, k.y, k.a, k.b);
                let s = red.solve(&f.coeffs, cfg);
                *v = s.value + f.constant;
                max_gap = max_gap.max(s.duality_gap);
                if s.status != SdpStatus::Optimal {
                    status = s.status;
                }
            }
        }
    }
    let mut best = 0;
    for i in 1..16 {
        if vals[i] > vals[best] {
            best = i;
        }
    }
    let p_star = vals[best].min(1.0);
    Ok(DiBound {
        bits: -log2(p_star),
        p_star,
        cell: Cell::from_index(best),
        level,
        max_gap,
        status,
    })
}

/// Maximum CHSH value over the relaxation at `level`.
pub fn max_chsh(level: Level) -> Result<f64> {
    max_chsh_with(level, &SdpConfig::default())
}

pub fn max_chsh_with(level: Level, cfg: &SdpConfig) -> Result<f64> {
    let f = WitnessKind::Chsh.functional();
    match level {
        Level::L0 => Ok(ns_lp(&f, &[])?.0),
        _ => {
            let mm = MomentMatrix::new(level)?;
            let (f0, fi) = mm.lmi();
            let p = SdpProblem::new(mm.lmi_dim(), f0, fi);
            let red = Reduced::new(&p).ok_or(Error::Infeasible)?;
            let g = mm.behavior_functional(&f);
            let s = red.solve(&g.coeffs, cfg);
            match s.status {
                SdpStatus::Optimal => Ok(s.value + g.constant),
                SdpStatus::MaxIter => Err(Error::MaxIter),
                SdpStatus::Infeasible => Err(Error::Infeasible),
            }
        }
    }
}
