//! Two-qubit pure states `α|01⟩ ± √(1−α²)|10⟩` measured along Bloch directions,
//! plus the named correlator families used as references.
//!
//! Parameter vector layout (length 9): `θx1, θx2, θy1, θy2, φx1, φx2, φy1, φy2, α`.

use crate::behavior::{idx, sign, Behavior, Correlators};
use crate::error::{Error, Result};
use crate::math::{cos, sin, sqrt, PI, SQRT2};

pub const N_PARAMS: usize = 9;
pub type Params = [f64; N_PARAMS];
pub type Jacobian = [[f64; N_PARAMS]; 16];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateSign {
    Plus,
    Minus,
}

impl StateSign {
    pub const fn value(self) -> f64 {
        match self {
            StateSign::Plus => 1.0,
            StateSign::Minus => -1.0,
        }
    }
    pub const fn name(self) -> &'static str {
        match self {
            StateSign::Plus => "plus",
            StateSign::Minus => "minus",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureState {
    pub alpha: f64,
    pub sign: StateSign,
}

impl PureState {
    pub fn new(alpha: f64, sign: StateSign) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Invalid(alloc::format!("alpha = {alpha} outside [0,1]")));
        }
        Ok(PureState { alpha, sign })
    }

    pub fn singlet() -> Self {
        PureState {
            alpha: core::f64::consts::FRAC_1_SQRT_2,
            sign: StateSign::Minus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSettings {
    pub theta: [f64; 4],
    pub phi: [f64; 4],
}

impl MeasurementSettings {
    pub fn new(theta: [f64; 4], phi: [f64; 4]) -> Result<Self> {
        if theta.iter().any(|t| !(0.0..=PI).contains(t)) {
            return Err(Error::Invalid("theta outside [0, pi]".into()));
        }
        if phi.iter().any(|p| !(0.0..=2.0 * PI).contains(p)) {
            return Err(Error::Invalid("phi outside [0, 2pi]".into()));
        }
        Ok(MeasurementSettings { theta, phi })
    }

    pub fn to_params(&self, alpha: f64) -> Params {
        let mut p = [0.0; N_PARAMS];
        p[..4].copy_from_slice(&self.theta);
        p[4..8].copy_from_slice(&self.phi);
        p[8] = alpha;
        p
    }

    pub fn from_params(p: &Params) -> Self {
        MeasurementSettings {
            theta: [p[0], p[1], p[2], p[3]],
            phi: [p[4], p[5], p[6], p[7]],
        }
    }
}

/// Map any parameter vector to the canonical box `θ ∈ [0,π]`, `φ ∈ [0,2π)`
/// without changing the behavior.
pub fn canonicalize(p: &Params) -> Params {
    let mut q = *p;
    for k in 0..4 {
        let mut th = q[k].rem_euclid(2.0 * PI);
        let mut ph = q[4 + k];
        if th > PI {
            // (θ, φ) and (2π−θ, φ+π) name the same direction
            th = 2.0 * PI - th;
            ph += PI;
        }
        q[k] = th;
        q[4 + k] = ph.rem_euclid(2.0 * PI);
    }
    q[8] = q[8].clamp(0.0, 1.0);
    q
}

#[inline]
fn state_coeffs(alpha: f64, s: f64) -> (f64, f64, f64, f64) {
    let beta = sqrt((1.0 - alpha * alpha).max(0.0));
    let m = 2.0 * alpha * alpha - 1.0;
    let c = 2.0 * s * alpha * beta;
    // dc/dα diverges at α = 1; clamp β away from zero there
    let dc = 2.0 * s * (1.0 - 2.0 * alpha * alpha) / beta.max(1e-12);
    (m, 4.0 * alpha, c, dc)
}

/// Correlators of the state with sign `s = ±1` under the given parameters.
pub fn correlators_from_params(p: &Params, s: f64) -> Correlators {
    let (m, _, c, _) = state_coeffs(p[8], s);
    let mut out = Correlators {
        ax: [0.0; 2],
        by: [0.0; 2],
        axby: [[0.0; 2]; 2],
    };
    for x in 0..2 {
        out.ax[x] = m * cos(p[x]);
    }
    for y in 0..2 {
        out.by[y] = -m * cos(p[2 + y]);
    }
    for x in 0..2 {
        for y in 0..2 {
            let (tx, ty) = (p[x], p[2 + y]);
            out.axby[x][y] = c * sin(tx) * sin(ty) * cos(p[4 + x] - p[6 + y]) - cos(tx) * cos(ty);
        }
    }
    out
}

pub fn probs(p: &Params, s: f64) -> [f64; 16] {
    let c = correlators_from_params(p, s);
    core::array::from_fn(|i| {
        let k = crate::behavior::Cell::from_index(i);
        c.prob(k.x, k.y, k.a, k.b)
    })
}

/// Probabilities with their analytic partial derivatives.
pub fn probs_and_jacobian(p: &Params, s: f64) -> ([f64; 16], Jacobian) {
    let (m, dm, c, dc) = state_coeffs(p[8], s);
    let mut pr = [0.0; 16];
    let mut jac = [[0.0; N_PARAMS]; 16];
    let (st, ct): ([f64; 4], [f64; 4]) = (
        core::array::from_fn(|k| sin(p[k])),
        core::array::from_fn(|k| cos(p[k])),
    );
    for x in 0..2 {
        for y in 0..2 {
            let (ix, iy) = (x, 2 + y);
            let d = p[4 + x] - p[6 + y];
            let (sd, cd) = (sin(d), cos(d));
            let ax = m * ct[ix];
            let by = -m * ct[iy];
            let e = c * st[ix] * st[iy] * cd - ct[ix] * ct[iy];
            let mut dax = [0.0; N_PARAMS];
            let mut dby = [0.0; N_PARAMS];
            let mut de = [0.0; N_PARAMS];
            dax[ix] = -m * st[ix];
            dax[8] = dm * ct[ix];
            dby[iy] = m * st[iy];
            dby[8] = -dm * ct[iy];
            de[ix] = c * ct[ix] * st[iy] * cd + st[ix] * ct[iy];
            de[iy] = c * st[ix] * ct[iy] * cd + ct[ix] * st[iy];
            de[4 + x] = -c * st[ix] * st[iy] * sd;
            de[6 + y] = c * st[ix] * st[iy] * sd;
            de[8] = dc * st[ix] * st[iy] * cd;
            for a in 0..2 {
                for b in 0..2 {
                    let (sa, sb) = (sign(a), sign(b));
                    let i = idx(x, y, a, b);
                    pr[i] = 0.25 * (1.0 + sa * ax + sb * by + sa * sb * e);
                    for k in 0..N_PARAMS {
                        jac[i][k] = 0.25 * (sa * dax[k] + sb * dby[k] + sa * sb * de[k]);
                    }
                }
            }
        }
    }
    (pr, jac)
}

pub fn behavior_from_state(state: &PureState, settings: &MeasurementSettings) -> Behavior {
    let p = settings.to_params(state.alpha);
    Behavior::from_array_unchecked(probs(&p, state.sign.value()))
}

/// Real and imaginary parts of the amplitude `⟨u_a ⊗ v_b|ψ⟩` behind cell
/// `(x,y,a,b)`, with their gradients. `P(a,b|x,y)` is its squared modulus, so
/// a zero cell is the pair of equations `Re = Im = 0`, whose gradients do not
/// vanish on the zero set.
pub fn amplitude(p: &Params, s: f64, cell: usize) -> ([f64; 2], [Params; 2]) {
    let k = crate::behavior::Cell::from_index(cell);
    let (ia, ib) = (k.x, 2 + k.y);
    let alpha = p[8];
    let beta = sqrt((1.0 - alpha * alpha).max(0.0));
    let dbeta = -alpha / beta.max(1e-12);
    // conjugated local vectors (p0, p1·e^{−iφ}); d p0/dθ = −p1/2, d p1/dθ = p0/2
    let half = |th: f64, o: usize| {
        let (c, sn) = (cos(th / 2.0), sin(th / 2.0));
        if o == 0 {
            (c, sn)
        } else {
            (sn, -c)
        }
    };
    let (p0, p1) = half(p[ia], k.a);
    let (q0, q1) = half(p[ib], k.b);
    let (pa, pb) = (p[4 + k.x], p[6 + k.y]);
    let (ca, sa, cb, sb) = (cos(pa), sin(pa), cos(pb), sin(pb));
    let u = alpha * p0 * q1;
    let v = s * beta * p1 * q0;
    let re = u * cb + v * ca;
    let im = -(u * sb + v * sa);
    let mut g = [[0.0; N_PARAMS]; 2];
    let du_da = -0.5 * p1 * alpha * q1;
    let dv_da = 0.5 * p0 * s * beta * q0;
    let du_db = 0.5 * q0 * alpha * p0;
    let dv_db = -0.5 * q1 * s * beta * p1;
    g[0][ia] = du_da * cb + dv_da * ca;
    g[1][ia] = -(du_da * sb + dv_da * sa);
    g[0][ib] = du_db * cb + dv_db * ca;
    g[1][ib] = -(du_db * sb + dv_db * sa);
    g[0][4 + k.x] = -v * sa;
    g[1][4 + k.x] = -v * ca;
    g[0][6 + k.y] = -u * sb;
    g[1][6 + k.y] = -u * cb;
    let (du, dv) = (p0 * q1, s * dbeta * p1 * q0);
    g[0][8] = du * cb + dv * ca;
    g[1][8] = -(du * sb + dv * sa);
    ([re, im], g)
}

/// Maximum Hardy probability over quantum behaviors, `(5√5 − 11)/2`.
pub fn max_hardy() -> f64 {
    (5.0 * sqrt(5.0) - 11.0) / 2.0
}

/// Maximum CL parameter over quantum behaviors, obtained numerically at
/// 40-digit precision by eliminating the two zero constraints exactly and
/// solving the stationarity conditions.
pub const MAX_CL: f64 = 0.107_812_717_748_936_39;

/// Printed 4-decimal values of the max-CL point and its guessing probability.
pub const MAX_CL_PRINTED: f64 = 0.1078;
pub const MAX_CL_GUESS_PRINTED: f64 = 0.6410;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Case1,
    /// Tilted family with weight `t ≥ 1`, `θ ∈ [0, π/4]`.
    Case2 { t: f64, theta: f64 },
    /// `θ ∈ [0, π/4]`.
    Case3 { theta: f64 },
    MaxHardy,
    MaxCl,
    /// Max-CL correlators rounded to four decimals.
    MaxClPrinted,
}

pub fn case2_chsh(t: f64, theta: f64) -> f64 {
    let s2 = sin(2.0 * theta) * sin(2.0 * theta);
    2.0 * (t + s2) / sqrt(t * t + s2)
}

pub fn case3_chsh(theta: f64) -> f64 {
    sqrt(6.0 - 2.0 * cos(4.0 * theta))
}

/// `θ ∈ [0, π/4]` of the Case 3 member with CHSH value `b ∈ [2, 2√2]`.
pub fn case3_theta_for_chsh(b: f64) -> f64 {
    // b² = 6 − 2cos4θ
    let c4 = ((6.0 - b * b) / 2.0).clamp(-1.0, 1.0);
    libm::acos(c4) / 4.0
}

/// Weight `t ≥ 1` of the Case 2 member at `θ = π/4` with CHSH value `b ∈ (2, 2√2]`.
pub fn case2_t_for_chsh(b: f64) -> f64 {
    // b = 2(1+t)/√(1+t²)  ⇒  (b²−4)t² − 8t + (b²−4) = 0, larger root
    let k = b * b - 4.0;
    if k <= 0.0 {
        return f64::INFINITY;
    }
    (4.0 + sqrt((16.0 - k * k).max(0.0))) / k
}

pub fn canonical_correlators(f: Family) -> Result<Correlators> {
    let quarter = PI / 4.0;
    let c = match f {
        Family::Case1 => {
            let h = 1.0 / SQRT2;
            Correlators {
                ax: [0.0; 2],
                by: [0.0; 2],
                axby: [[h, h], [h, -h]],
            }
        }
        Family::Case2 { t, theta } => {
            if !(t >= 1.0 && t.is_finite()) || !(0.0..=quarter).contains(&theta) {
                return Err(Error::Invalid(alloc::format!(
                    "Case 2 needs t >= 1 and theta in [0, pi/4], got t={t}, theta={theta}"
                )));
            }
            tilted(t, theta)
        }
        Family::Case3 { theta } => {
            if !(0.0..=quarter).contains(&theta) {
                return Err(Error::Invalid(alloc::format!(
                    "Case 3 needs theta in [0, pi/4], got {theta}"
                )));
            }
            tilted(1.0, theta)
        }
        Family::MaxHardy => {
            let r5 = sqrt(5.0);
            let (a1, a2) = (2.0 * r5 - 5.0, 2.0 - r5);
            let e12 = 3.0 * r5 - 6.0;
            Correlators {
                ax: [a1, a2],
                by: [a1, a2],
                axby: [[6.0 * r5 - 13.0, e12], [e12, 2.0 * r5 - 5.0]],
            }
        }
        Family::MaxCl => {
            let (a1, a2) = (-0.446_093_641_125_531_8, -0.282_069_560_206_851_35);
            let e12 = 0.835_975_919_081_319_6;
            Correlators {
                ax: [a1, a2],
                by: [a1, a2],
                axby: [[0.422_408_930_025_688_4, e12], [e12, -0.336_890_102_807_418_1]],
            }
        }
        Family::MaxClPrinted => Correlators {
            ax: [-0.4460, -0.2820],
            by: [-0.4460, -0.2820],
            axby: [[0.4224, 0.8360], [0.8360, -0.3369]],
        },
    };
    Ok(c)
}

// Shared form of Cases 2 and 3 (Case 3 is t = 1).
fn tilted(t: f64, theta: f64) -> Correlators {
    let s2 = sin(2.0 * theta) * sin(2.0 * theta);
    let c2 = cos(2.0 * theta);
    let r = sqrt(t * t + s2);
    let y = t * c2 / r;
    Correlators {
        ax: [c2, 0.0],
        by: [y, y],
        axby: [[t / r, t / r], [s2 / r, -s2 / r]],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::{guessing_probability, hardy_probs, witness_value, WitnessKind};
    use approx::assert_abs_diff_eq;

    #[test]
    fn singlet_anticorrelates_along_common_axis() {
        let st = PureState::singlet();
        let set = MeasurementSettings::new([0.7, 1.0, 0.7, 2.0], [1.3, 0.0, 1.3, 0.5]).unwrap();
        let c = behavior_from_state(&st, &set).correlators();
        assert_abs_diff_eq!(c.axby[0][0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c.ax[0], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn canonicalize_preserves_behavior() {
        let p = [4.0, -1.0, 7.0, 2.5, -3.0, 9.0, 0.3, 12.0, 0.4];
        let q = canonicalize(&p);
        for k in 0..4 {
            assert!((0.0..=PI).contains(&q[k]));
            assert!((0.0..2.0 * PI).contains(&q[4 + k]));
        }
        let (a, b) = (probs(&p, -1.0), probs(&q, -1.0));
        for i in 0..16 {
            assert_abs_diff_eq!(a[i], b[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn table_rows_reproduce() {
        // state amplitude and angles as printed, minus sign
        let p = [0.9432, 1.3482, 2.1984, 1.7934, 4.6405, 1.4989, 4.6405, 1.4989, 0.5380];
        let b = Behavior::from_array_unchecked(probs(&p, -1.0));
        let w = witness_value(&b, WitnessKind::Hardy);
        assert_abs_diff_eq!(w.value, 0.0640, epsilon = 1e-4);
        assert_abs_diff_eq!(crate::behavior::max_min_entropy(&b).1, 1.6787, epsilon = 5e-3);

        let p = [0.5940, 1.0192, 2.5476, 2.1224, 4.6890, 1.5474, 4.6890, 1.5474, 0.4804];
        let b = Behavior::from_array_unchecked(probs(&p, -1.0));
        assert_abs_diff_eq!(witness_value(&b, WitnessKind::Cl).value, 0.1078, epsilon = 1e-3);
        let c = b.correlators();
        let r = canonical_correlators(Family::MaxClPrinted).unwrap();
        for x in 0..2 {
            assert_abs_diff_eq!(c.ax[x], r.ax[x], epsilon = 1e-3);
            assert_abs_diff_eq!(c.by[x], r.by[x], epsilon = 1e-3);
            for y in 0..2 {
                assert_abs_diff_eq!(c.axby[x][y], r.axby[x][y], epsilon = 1e-3);
            }
        }
    }

    #[test]
    fn case_families_chsh() {
        let c = canonical_correlators(Family::Case2 { t: 1.0, theta: PI / 4.0 }).unwrap();
        assert_abs_diff_eq!(c.chsh(), 2.0 * SQRT2, epsilon = 1e-14);
        for t in [1.0, 1.5, 3.0, 10.0] {
            let c = canonical_correlators(Family::Case2 { t, theta: PI / 4.0 }).unwrap();
            assert_abs_diff_eq!(c.chsh(), 2.0 * (1.0 + t) / sqrt(1.0 + t * t), epsilon = 1e-14);
            // t = 1 is a double root, so the inverse is only sqrt-accurate there
            assert_abs_diff_eq!(case2_t_for_chsh(c.chsh()), t, epsilon = 1e-7 * t * t);
        }
        for th in [0.1, 0.3, 0.5, 0.7] {
            let c = canonical_correlators(Family::Case3 { theta: th }).unwrap();
            assert_abs_diff_eq!(c.chsh(), case3_chsh(th), epsilon = 1e-14);
            assert_abs_diff_eq!(case3_theta_for_chsh(c.chsh()), th, epsilon = 1e-10);
            Behavior::from_correlators(&c).unwrap();
        }
        assert!(canonical_correlators(Family::Case2 { t: 0.5, theta: 0.1 }).is_err());
        assert!(canonical_correlators(Family::Case3 { theta: 1.0 }).is_err());
    }

    #[test]
    fn max_hardy_point() {
        let b = Behavior::from_correlators(&canonical_correlators(Family::MaxHardy).unwrap()).unwrap();
        let [p1, p2, p3, p4] = hardy_probs(&b);
        assert_abs_diff_eq!(p1, max_hardy(), epsilon = 1e-14);
        for r in [p2, p3, p4] {
            assert_abs_diff_eq!(r, 0.0, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(guessing_probability(&b).0, (sqrt(5.0) - 1.0) / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn max_cl_point() {
        let b = Behavior::from_correlators(&canonical_correlators(Family::MaxCl).unwrap()).unwrap();
        let w = witness_value(&b, WitnessKind::Cl);
        assert_abs_diff_eq!(w.value, MAX_CL, epsilon = 1e-15);
        assert!(!w.flagged);
        assert_abs_diff_eq!(guessing_probability(&b).0, MAX_CL_GUESS_PRINTED, epsilon = 1e-4);
    }

    #[test]
    fn amplitude_squares_to_probability() {
        let p = [0.3, 1.2, 2.0, 2.9, 0.4, 5.0, 3.3, 1.1, 0.37];
        for s in [1.0, -1.0] {
            let pr = probs(&p, s);
            for i in 0..16 {
                let ([re, im], g) = amplitude(&p, s, i);
                assert_abs_diff_eq!(re * re + im * im, pr[i], epsilon = 1e-14);
                for k in 0..N_PARAMS {
                    let (mut hi, mut lo) = (p, p);
                    hi[k] += 1e-6;
                    lo[k] -= 1e-6;
                    let (ah, al) = (amplitude(&hi, s, i).0, amplitude(&lo, s, i).0);
                    for c in 0..2 {
                        assert_abs_diff_eq!(g[c][k], (ah[c] - al[c]) / 2e-6, epsilon = 1e-8);
                    }
                }
            }
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let p = [0.3, 1.2, 2.0, 2.9, 0.4, 5.0, 3.3, 1.1, 0.37];
        for s in [1.0, -1.0] {
            let (_, jac) = probs_and_jacobian(&p, s);
            for k in 0..N_PARAMS {
                let (mut hi, mut lo) = (p, p);
                hi[k] += 1e-6;
                lo[k] -= 1e-6;
                let (ph, pl) = (probs(&hi, s), probs(&lo, s));
                for i in 0..16 {
                    let fd = (ph[i] - pl[i]) / 2e-6;
                    assert_abs_diff_eq!(jac[i][k], fd, epsilon = 1e-8);
                }
            }
        }
    }
}
