//! 2-2-2 behaviors, correlators and nonlocality witnesses.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::log2;

/// Entrywise and normalization tolerance.
pub const NORM_TOL: f64 = 1e-12;
/// Marginal consistency tolerance.
pub const NS_TOL: f64 = 1e-9;
/// Hardy/CL zero-constraint residual above which a witness evaluation is flagged.
pub const RESIDUAL_TOL: f64 = 1e-9;

/// Flat index of `P(a,b|x,y)`. Outcome index 0 is +1, index 1 is −1.
#[inline]
pub const fn idx(x: usize, y: usize, a: usize, b: usize) -> usize {
    ((x * 2 + y) * 2 + a) * 2 + b
}

/// ±1 value of an outcome index.
#[inline]
pub const fn sign(o: usize) -> f64 {
    if o == 0 {
        1.0
    } else {
        -1.0
    }
}

/// A cell of the behavior, `(x, y, a, b)` in index form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub x: usize,
    pub y: usize,
    pub a: usize,
    pub b: usize,
}

impl Cell {
    pub const fn from_index(i: usize) -> Self {
        Cell {
            x: i >> 3,
            y: (i >> 2) & 1,
            a: (i >> 1) & 1,
            b: i & 1,
        }
    }
    pub const fn index(&self) -> usize {
        idx(self.x, self.y, self.a, self.b)
    }
}

/// Joint conditional probabilities `P(a,b|x,y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Behavior {
    p: [f64; 16],
}

/// `{⟨A_x⟩, ⟨B_y⟩, ⟨A_x B_y⟩}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlators {
    pub ax: [f64; 2],
    pub by: [f64; 2],
    pub axby: [[f64; 2]; 2],
}

impl Correlators {
    pub fn chsh(&self) -> f64 {
        self.axby[0][0] + self.axby[0][1] + self.axby[1][0] - self.axby[1][1]
    }

    /// Probability of cell `(x,y,a,b)` from the correlator expansion.
    #[inline]
    pub fn prob(&self, x: usize, y: usize, a: usize, b: usize) -> f64 {
        let (sa, sb) = (sign(a), sign(b));
        0.25 * (1.0 + sa * self.ax[x] + sb * self.by[y] + sa * sb * self.axby[x][y])
    }
}

impl Behavior {
    /// Validated constructor.
    pub fn new(p: [f64; 16]) -> Result<Self> {
        let b = Behavior { p };
        b.validate()?;
        Ok(b)
    }

    /// No checks. For internal use where validity holds by construction.
    pub const fn from_array_unchecked(p: [f64; 16]) -> Self {
        Behavior { p }
    }

    pub fn uniform() -> Self {
        Behavior { p: [0.25; 16] }
    }

    #[inline]
    pub fn probs(&self) -> &[f64; 16] {
        &self.p
    }

    #[inline]
    pub fn p(&self, x: usize, y: usize, a: usize, b: usize) -> f64 {
        self.p[idx(x, y, a, b)]
    }

    pub fn validate(&self) -> Result<()> {
        for (i, &v) in self.p.iter().enumerate() {
            if !v.is_finite() || v < -NORM_TOL || v > 1.0 + NORM_TOL {
                return Err(Error::InvalidBehavior(format!("entry {i} = {v} outside [0,1]")));
            }
        }
        for x in 0..2 {
            for y in 0..2 {
                let s: f64 = (0..4).map(|k| self.p[idx(x, y, 0, 0) + k]).sum();
                if (s - 1.0).abs() > NORM_TOL {
                    return Err(Error::InvalidBehavior(format!(
                        "setting pair ({x},{y}) sums to {s}"
                    )));
                }
            }
        }
        let v = self.signalling();
        if v > NS_TOL {
            return Err(Error::InvalidBehavior(format!("signalling violation {v:.3e}")));
        }
        Ok(())
    }

    /// Largest marginal discrepancy across the other party's settings.
    pub fn signalling(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for x in 0..2 {
            for a in 0..2 {
                let m0 = self.p(x, 0, a, 0) + self.p(x, 0, a, 1);
                let m1 = self.p(x, 1, a, 0) + self.p(x, 1, a, 1);
                worst = worst.max((m0 - m1).abs());
            }
        }
        for y in 0..2 {
            for b in 0..2 {
                let m0 = self.p(0, y, 0, b) + self.p(0, y, 1, b);
                let m1 = self.p(1, y, 0, b) + self.p(1, y, 1, b);
                worst = worst.max((m0 - m1).abs());
            }
        }
        worst
    }

    /// Alice's marginal P(a|x), read at y = 0.
    pub fn marginal_a(&self, x: usize, a: usize) -> f64 {
        self.p(x, 0, a, 0) + self.p(x, 0, a, 1)
    }

    /// Bob's marginal P(b|y), read at x = 0.
    pub fn marginal_b(&self, y: usize, b: usize) -> f64 {
        self.p(0, y, 0, b) + self.p(0, y, 1, b)
    }

    pub fn correlators(&self) -> Correlators {
        let mut c = Correlators {
            ax: [0.0; 2],
            by: [0.0; 2],
            axby: [[0.0; 2]; 2],
        };
        for x in 0..2 {
            c.ax[x] = self.marginal_a(x, 0) - self.marginal_a(x, 1);
        }
        for y in 0..2 {
            c.by[y] = self.marginal_b(y, 0) - self.marginal_b(y, 1);
        }
        for x in 0..2 {
            for y in 0..2 {
                c.axby[x][y] =
                    self.p(x, y, 0, 0) + self.p(x, y, 1, 1) - self.p(x, y, 0, 1) - self.p(x, y, 1, 0);
            }
        }
        c
    }

    /// Inverts the correlator expansion. Rejects sets whose reconstruction has
    /// a probability below −1e-12.
    pub fn from_correlators(c: &Correlators) -> Result<Self> {
        let all = c.ax.iter().chain(c.by.iter()).chain(c.axby.iter().flatten());
        for &v in all {
            if !v.is_finite() || v.abs() > 1.0 + NORM_TOL {
                return Err(Error::InvalidBehavior(format!("correlator {v} outside [-1,1]")));
            }
        }
        let mut p = [0.0; 16];
        for (i, slot) in p.iter_mut().enumerate() {
            let k = Cell::from_index(i);
            let v = c.prob(k.x, k.y, k.a, k.b);
            if v < -NORM_TOL {
                return Err(Error::NonPhysical { cell: i, value: v });
            }
            *slot = v;
        }
        Ok(Behavior { p })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WitnessKind {
    Chsh,
    Hardy,
    Cl,
}

impl WitnessKind {
    pub const fn name(self) -> &'static str {
        match self {
            WitnessKind::Chsh => "chsh",
            WitnessKind::Hardy => "hardy",
            WitnessKind::Cl => "cl",
        }
    }

    /// The witness as a linear functional of the 16 probabilities.
    pub fn functional(self) -> [f64; 16] {
        let mut f = [0.0; 16];
        match self {
            WitnessKind::Chsh => {
                for (i, v) in f.iter_mut().enumerate() {
                    let c = Cell::from_index(i);
                    let s = if c.x == 1 && c.y == 1 { -1.0 } else { 1.0 };
                    *v = s * sign(c.a) * sign(c.b);
                }
            }
            WitnessKind::Hardy => f[HARDY_CELLS[0]] = 1.0,
            WitnessKind::Cl => {
                f[HARDY_CELLS[0]] = 1.0;
                f[HARDY_CELLS[3]] = -1.0;
            }
        }
        f
    }

    /// Cells the witness requires to vanish.
    pub fn zero_cells(self) -> &'static [usize] {
        match self {
            WitnessKind::Chsh => &[],
            WitnessKind::Hardy => &HARDY_CELLS[1..],
            WitnessKind::Cl => &HARDY_CELLS[1..3],
        }
    }

    /// Allowed value range of the witness over all no-signalling behaviors.
    pub const fn range(self) -> (f64, f64) {
        match self {
            WitnessKind::Chsh => (-4.0, 4.0),
            WitnessKind::Hardy | WitnessKind::Cl => (0.0, 0.5),
        }
    }
}

/// Witness kind together with its target value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WitnessSpec {
    pub kind: WitnessKind,
    pub value: f64,
}

impl WitnessSpec {
    pub fn new(kind: WitnessKind, value: f64) -> Result<Self> {
        let (lo, hi) = kind.range();
        if !(lo..=hi).contains(&value) {
            return Err(Error::OutOfRange {
                what: kind.name(),
                value,
                lo,
                hi,
            });
        }
        Ok(WitnessSpec { kind, value })
    }
}

/// The four probabilities entering the Hardy and CL relations:
/// `P(+,+|1,1)`, `P(−,+|2,1)`, `P(+,−|1,2)`, `P(+,+|2,2)`.
pub const HARDY_CELLS: [usize; 4] = [idx(0, 0, 0, 0), idx(1, 0, 1, 0), idx(0, 1, 0, 1), idx(1, 1, 0, 0)];

pub fn hardy_probs(b: &Behavior) -> [f64; 4] {
    HARDY_CELLS.map(|i| b.p[i])
}

/// Witness value plus the zero-constraint residuals it relies on.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessEval {
    pub value: f64,
    /// Hardy: (p2, p3, p4). CL: (p2, p3). CHSH: empty.
    pub residuals: Vec<f64>,
    /// Set when any residual exceeds [`RESIDUAL_TOL`].
    pub flagged: bool,
}

pub fn witness_value(b: &Behavior, kind: WitnessKind) -> WitnessEval {
    let [p1, p2, p3, p4] = hardy_probs(b);
    let (value, residuals) = match kind {
        WitnessKind::Chsh => (b.correlators().chsh(), Vec::new()),
        WitnessKind::Hardy => (p1, alloc::vec![p2, p3, p4]),
        WitnessKind::Cl => (p1 - p4, alloc::vec![p2, p3]),
    };
    let flagged = residuals.iter().any(|r| r.abs() > RESIDUAL_TOL);
    WitnessEval {
        value,
        residuals,
        flagged,
    }
}

/// `−log₂ max_{a,b} P(a,b|x,y)`.
pub fn min_entropy(b: &Behavior, x: usize, y: usize) -> f64 {
    let m = (0..4).map(|k| b.p[idx(x, y, 0, 0) + k]).fold(0.0, f64::max);
    -log2(m)
}

/// Best setting pair and its min-entropy.
pub fn max_min_entropy(b: &Behavior) -> ((usize, usize), f64) {
    let mut best = ((0, 0), f64::NEG_INFINITY);
    for x in 0..2 {
        for y in 0..2 {
            let h = min_entropy(b, x, y);
            if h > best.1 {
                best = ((x, y), h);
            }
        }
    }
    best
}

/// Largest entry; ties go to the lexicographically first cell.
pub fn guessing_probability(b: &Behavior) -> (f64, Cell) {
    let mut best = (b.p[0], 0);
    for (i, &v) in b.p.iter().enumerate().skip(1) {
        if v > best.0 {
            best = (v, i);
        }
    }
    (best.0, Cell::from_index(best.1))
}

pub fn mix(behaviors: &[Behavior], weights: &[f64]) -> Result<Behavior> {
    if behaviors.len() != weights.len() {
        return Err(Error::LengthMismatch(behaviors.len(), weights.len()));
    }
    if weights.iter().any(|&w| w < 0.0 || !w.is_finite())
        || (weights.iter().sum::<f64>() - 1.0).abs() > NORM_TOL
    {
        return Err(Error::BadWeights);
    }
    let mut p = [0.0; 16];
    for (b, &w) in behaviors.iter().zip(weights) {
        for (acc, v) in p.iter_mut().zip(b.p.iter()) {
            *acc += w * v;
        }
    }
    Ok(Behavior { p })
}

/// `2 + 4(p₁ − p₂ − p₃ − p₄)`.
pub fn chsh_from_witness_probs(p1: f64, p2: f64, p3: f64, p4: f64) -> f64 {
    2.0 + 4.0 * (p1 - p2 - p3 - p4)
}

/// Every joint probability equals the product of its marginals within `tol`.
pub fn is_factorisable(b: &Behavior, tol: f64) -> bool {
    (0..16).all(|i| {
        let k = Cell::from_index(i);
        let prod = b.marginal_a(k.x, k.a) * b.marginal_b(k.y, k.b);
        (b.p[i] - prod).abs() <= tol
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn case1() -> Correlators {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        Correlators {
            ax: [0.0; 2],
            by: [0.0; 2],
            axby: [[h, h], [h, -h]],
        }
    }

    #[test]
    fn index_layout() {
        assert_eq!(idx(0, 0, 0, 0), 0);
        assert_eq!(idx(1, 1, 1, 1), 15);
        for i in 0..16 {
            assert_eq!(Cell::from_index(i).index(), i);
        }
    }

    #[test]
    fn zero_correlators_give_uniform() {
        let c = Correlators {
            ax: [0.0; 2],
            by: [0.0; 2],
            axby: [[0.0; 2]; 2],
        };
        let b = Behavior::from_correlators(&c).unwrap();
        assert_eq!(b, Behavior::uniform());
        for x in 0..2 {
            for y in 0..2 {
                assert_abs_diff_eq!(min_entropy(&b, x, y), 2.0, epsilon = 1e-15);
            }
        }
        let (g, cell) = guessing_probability(&b);
        assert_eq!(g, 0.25);
        assert_eq!(cell, Cell { x: 0, y: 0, a: 0, b: 0 });
    }

    #[test]
    fn case1_entropy() {
        let b = Behavior::from_correlators(&case1()).unwrap();
        let g = (1.0 + core::f64::consts::FRAC_1_SQRT_2) / 4.0;
        assert_abs_diff_eq!(guessing_probability(&b).0, g, epsilon = 1e-15);
        for x in 0..2 {
            for y in 0..2 {
                assert_abs_diff_eq!(min_entropy(&b, x, y), 1.2284, epsilon = 5e-5);
            }
        }
        assert_abs_diff_eq!(b.correlators().chsh(), 2.0 * core::f64::consts::SQRT_2, epsilon = 1e-14);
    }

    #[test]
    fn rejects_nonphysical() {
        let c = Correlators {
            ax: [1.0, 0.0],
            by: [1.0, 0.0],
            axby: [[-1.0, 0.0], [0.0, 0.0]],
        };
        assert!(matches!(Behavior::from_correlators(&c), Err(Error::NonPhysical { .. })));
    }

    #[test]
    fn validation() {
        let mut p = [0.25; 16];
        p[0] = 0.5;
        assert!(Behavior::new(p).is_err());
        // normalized but signalling
        let mut p = [0.0; 16];
        p[idx(0, 0, 0, 0)] = 1.0;
        p[idx(0, 1, 1, 0)] = 1.0;
        p[idx(1, 0, 0, 0)] = 1.0;
        p[idx(1, 1, 0, 0)] = 1.0;
        assert!(Behavior::new(p).is_err());
    }

    #[test]
    fn product_marginals_factorise() {
        let (pa, pb) = ([0.3, 0.7], [0.6, 0.4]);
        let mut p = [0.0; 16];
        for (i, v) in p.iter_mut().enumerate() {
            let k = Cell::from_index(i);
            *v = pa[k.a] * pb[k.b];
        }
        let b = Behavior::new(p).unwrap();
        assert!(is_factorisable(&b, 1e-12));
    }

    #[test]
    fn mix_checks() {
        let u = Behavior::uniform();
        assert_eq!(mix(&[u], &[1.0]).unwrap(), u);
        assert_eq!(mix(&[u, u], &[1.0]), Err(Error::LengthMismatch(2, 1)));
        assert_eq!(mix(&[u, u], &[1.5, -0.5]), Err(Error::BadWeights));
    }

    #[test]
    fn witness_flags_residuals() {
        let e = witness_value(&Behavior::uniform(), WitnessKind::Hardy);
        assert!(e.flagged);
        assert_eq!(e.residuals.len(), 3);
        let e = witness_value(&Behavior::uniform(), WitnessKind::Cl);
        assert_eq!(e.residuals.len(), 2);
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn functionals_match_witness_value() {
        let c = Correlators {
            ax: [0.1, -0.2],
            by: [0.3, 0.05],
            axby: [[0.4, -0.1], [0.2, 0.3]],
        };
        let b = Behavior::from_correlators(&c).unwrap();
        for k in [WitnessKind::Chsh, WitnessKind::Hardy, WitnessKind::Cl] {
            let v: f64 = k.functional().iter().zip(b.probs()).map(|(f, p)| f * p).sum();
            assert_abs_diff_eq!(v, witness_value(&b, k).value, epsilon = 1e-14);
            assert_eq!(k.zero_cells().len(), witness_value(&b, k).residuals.len());
        }
    }

    #[test]
    fn witness_spec_range() {
        assert!(WitnessSpec::new(WitnessKind::Hardy, 0.6).is_err());
        assert!(WitnessSpec::new(WitnessKind::Chsh, -4.0).is_ok());
        assert!(WitnessSpec::new(WitnessKind::Chsh, 4.1).is_err());
    }

    #[test]
    fn chsh_identity_endpoints() {
        assert_eq!(chsh_from_witness_probs(0.0, 0.0, 0.0, 0.0), 2.0);
        let ph = (5.0 * libm::sqrt(5.0) - 11.0) / 2.0;
        assert_abs_diff_eq!(
            chsh_from_witness_probs(ph, 0.0, 0.0, 0.0),
            10.0 * (libm::sqrt(5.0) - 2.0),
            epsilon = 1e-13
        );
    }
}
