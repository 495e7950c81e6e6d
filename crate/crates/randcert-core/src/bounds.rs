//! Closed-form guaranteed-randomness bounds.
//!
//! Every "varying preparation" bound has the shape `−log₂(1 − k·(w − w₀))`:
//! the observed behavior is a mixture of one extremal point with guessing
//! probability `G` and local noise, and `k = (1 − G)/(w_ext − w₀)` is minimized
//! over the admissible extremal points.

use crate::behavior::{guessing_probability, Behavior, WitnessKind, WitnessSpec};
use crate::error::{Error, Result};
use crate::math::{log2, sqrt, SQRT2};
use crate::optim::golden_section;
use crate::quantum::{self, canonical_correlators, Family};

pub const TSIRELSON: f64 = 2.0 * SQRT2;
pub const GOLDEN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundModel {
    Ns,
    QCase1Varying,
    QCase2Fixed,
    QCase2Varying,
    QCase3Fixed,
    QCase3Varying,
    HardyConvex,
    ClConvex,
}

/// Source of the numeric constants that the printed formulas give only to
/// four decimals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Coefficients {
    /// Recomputed at full precision.
    #[default]
    Recomputed,
    /// The rounded printed values.
    Printed,
}

impl BoundModel {
    pub const ALL: [BoundModel; 8] = [
        BoundModel::Ns,
        BoundModel::QCase1Varying,
        BoundModel::QCase2Fixed,
        BoundModel::QCase2Varying,
        BoundModel::QCase3Fixed,
        BoundModel::QCase3Varying,
        BoundModel::HardyConvex,
        BoundModel::ClConvex,
    ];

    pub const fn name(self) -> &'static str {
        match self {
            BoundModel::Ns => "ns",
            BoundModel::QCase1Varying => "q-case1-varying",
            BoundModel::QCase2Fixed => "q-case2-fixed",
            BoundModel::QCase2Varying => "q-case2-varying",
            BoundModel::QCase3Fixed => "q-case3-fixed",
            BoundModel::QCase3Varying => "q-case3-varying",
            BoundModel::HardyConvex => "hardy-convex",
            BoundModel::ClConvex => "cl-convex",
        }
    }

    pub fn pairs_with(self, kind: WitnessKind) -> bool {
        match self {
            BoundModel::Ns => true,
            BoundModel::HardyConvex => kind == WitnessKind::Hardy,
            BoundModel::ClConvex => kind == WitnessKind::Cl,
            _ => kind == WitnessKind::Chsh,
        }
    }

    /// Witness domain `(lo, hi]`; the NS domain is closed at `lo`.
    pub fn domain(self, kind: WitnessKind) -> (f64, f64) {
        match (self, kind) {
            (BoundModel::Ns, WitnessKind::Chsh) => (2.0, 4.0),
            (BoundModel::Ns, _) => (0.0, 0.5),
            (BoundModel::HardyConvex, _) => (0.0, quantum::max_hardy()),
            (BoundModel::ClConvex, _) => (0.0, quantum::MAX_CL),
            _ => (2.0, TSIRELSON),
        }
    }
}

/// Guaranteed bits for `witness` under `model`, with recomputed coefficients.
pub fn guaranteed_bound(model: BoundModel, witness: WitnessSpec) -> Result<f64> {
    guaranteed_bound_with(model, witness, Coefficients::Recomputed)
}

pub fn guaranteed_bound_with(model: BoundModel, witness: WitnessSpec, coeffs: Coefficients) -> Result<f64> {
    if !model.pairs_with(witness.kind) {
        return Err(Error::Pairing(model.name()));
    }
    let (lo, hi) = model.domain(witness.kind);
    let w = witness.value;
    let closed_lo = model == BoundModel::Ns;
    let inside = if closed_lo { w >= lo } else { w > lo } && w <= hi + 1e-15;
    if !inside {
        return Err(Error::Domain {
            model: model.name(),
            value: w,
            lo,
            hi,
        });
    }
    let w = w.min(hi);
    let bits = match model {
        BoundModel::Ns => match witness.kind {
            WitnessKind::Chsh => -log2(1.5 - w / 4.0),
            _ => -log2(1.0 - w),
        },
        BoundModel::QCase1Varying => varying(case1_coefficient(), w - 2.0),
        BoundModel::QCase2Fixed => -log2(case2_fixed_guess(w)),
        BoundModel::QCase3Fixed => -log2(case3_fixed_guess(w)),
        BoundModel::QCase2Varying => varying(case2_coefficient(), w - 2.0),
        BoundModel::QCase3Varying => {
            let k = match coeffs {
                Coefficients::Recomputed => case3_coefficient(),
                Coefficients::Printed => 0.4924,
            };
            varying(k, w - 2.0)
        }
        BoundModel::HardyConvex => varying(hardy_coefficient(), w),
        BoundModel::ClConvex => {
            let k = match coeffs {
                Coefficients::Recomputed => cl_coefficient(),
                Coefficients::Printed => 0.3590 / quantum::MAX_CL_PRINTED,
            };
            varying(k, w)
        }
    };
    // −log₂ of 1 can come out as −0.0
    Ok(bits.max(0.0))
}

fn varying(k: f64, excess: f64) -> f64 {
    -log2(1.0 - k * excess)
}

/// `1 − q(1 − g)`: guessing probability of a mixture of an extremal point
/// (weight `q`, guessing probability `g`) with a deterministic strategy.
pub fn guessing_from_mixture(extremal_guess: f64, q: f64) -> Result<f64> {
    if !(0.25..=1.0).contains(&extremal_guess) || !(0.0..=1.0).contains(&q) {
        return Err(Error::Invalid(alloc::format!(
            "need g in [1/4,1] and q in [0,1], got g={extremal_guess}, q={q}"
        )));
    }
    Ok(1.0 - q * (1.0 - extremal_guess))
}

/// Min-entropy of the Case 1 point itself, `−log₂((1 + 1/√2)/4)`.
pub fn case1_fixed() -> f64 {
    -log2((1.0 + 1.0 / SQRT2) / 4.0)
}

/// Guessing probability of the Case 2 extremal point (θ = π/4) with CHSH value `b`.
pub fn case2_fixed_guess(b: f64) -> f64 {
    let inner = 4.0 - b * sqrt((8.0 - b * b).max(0.0));
    if inner <= 0.0 {
        // B → 2⁺ limit of the closed form
        return 0.5;
    }
    (4.0 + SQRT2 * (b * b - 4.0) * sqrt(1.0 / inner)) / 16.0
}

/// Guessing probability of the Case 3 extremal point with CHSH value `b`.
pub fn case3_fixed_guess(b: f64) -> f64 {
    (1.0 / b + 0.5) * (2.0 + sqrt((8.0 - b * b).max(0.0))) / 4.0
}

/// `(1 − G)/(B − 2)` for a family's extremal point at CHSH value `b`.
pub fn family_slope(model: BoundModel, b: f64) -> f64 {
    let g = match model {
        BoundModel::QCase2Varying | BoundModel::QCase2Fixed => case2_fixed_guess(b),
        _ => case3_fixed_guess(b),
    };
    (1.0 - g) / (b - 2.0)
}

/// CHSH value of the family member minimizing the varying-preparation bound.
pub fn case_minimizer(model: BoundModel) -> Result<f64> {
    let fam = match model {
        BoundModel::QCase2Varying => BoundModel::QCase2Varying,
        BoundModel::QCase3Varying => BoundModel::QCase3Varying,
        _ => return Err(Error::Pairing(model.name())),
    };
    Ok(golden_section(|b| family_slope(fam, b), 2.0 + 1e-9, TSIRELSON, GOLDEN_TOL).0)
}

pub fn case1_coefficient() -> f64 {
    (4.0 + 5.0 * SQRT2) / 16.0
}

pub fn case2_coefficient() -> f64 {
    let b = case_minimizer(BoundModel::QCase2Varying).unwrap_or(TSIRELSON);
    family_slope(BoundModel::QCase2Varying, b)
}

pub fn case3_coefficient() -> f64 {
    let b = case_minimizer(BoundModel::QCase3Varying).unwrap_or(TSIRELSON);
    family_slope(BoundModel::QCase3Varying, b)
}

pub fn hardy_coefficient() -> f64 {
    let r5 = sqrt(5.0);
    (3.0 - r5) / (5.0 * r5 - 11.0)
}

/// `(1 − G)/P_CL` at the max-CL point.
pub fn cl_coefficient() -> f64 {
    let c = canonical_correlators(Family::MaxCl).expect("constant family");
    let b: Behavior = Behavior::from_correlators(&c).expect("physical constants");
    (1.0 - guessing_probability(&b).0) / quantum::MAX_CL
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn w(kind: WitnessKind, v: f64) -> WitnessSpec {
        WitnessSpec::new(kind, v).unwrap()
    }

    #[test]
    fn ns_anchor_values() {
        assert_eq!(guaranteed_bound(BoundModel::Ns, w(WitnessKind::Chsh, 4.0)).unwrap(), 1.0);
        assert_eq!(guaranteed_bound(BoundModel::Ns, w(WitnessKind::Hardy, 0.0)).unwrap(), 0.0);
        let v = guaranteed_bound(BoundModel::Ns, w(WitnessKind::Chsh, TSIRELSON)).unwrap();
        assert_abs_diff_eq!(v, -log2(1.5 - SQRT2 / 2.0), epsilon = 1e-15);
        assert_abs_diff_eq!(v, 0.3348, epsilon = 5e-5);
    }

    #[test]
    fn case2_fixed_limits() {
        // t → ∞ pushes B → 2⁺ and the bound to one bit
        let b = quantum::case2_chsh(1e4, core::f64::consts::FRAC_PI_4);
        let v = guaranteed_bound(BoundModel::QCase2Fixed, w(WitnessKind::Chsh, b)).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-3);
        let v = guaranteed_bound(BoundModel::QCase2Fixed, w(WitnessKind::Chsh, TSIRELSON)).unwrap();
        assert_abs_diff_eq!(v, case1_fixed(), epsilon = 1e-12);
    }

    #[test]
    fn hardy_convex_at_max() {
        let v = guaranteed_bound(BoundModel::HardyConvex, w(WitnessKind::Hardy, quantum::max_hardy())).unwrap();
        assert_abs_diff_eq!(v, -log2((sqrt(5.0) - 1.0) / 2.0), epsilon = 1e-13);
        assert_abs_diff_eq!(v, 0.6942, epsilon = 5e-5);
    }

    #[test]
    fn minimizers() {
        let b2 = case_minimizer(BoundModel::QCase2Varying).unwrap();
        assert_abs_diff_eq!(b2, 2.0 * (1.0 + 10.0 * sqrt(3.0)) / 13.0, epsilon = 1e-6);
        assert_abs_diff_eq!(b2, 2.8185, epsilon = 1e-4);
        assert_abs_diff_eq!(case2_coefficient(), (1.0 + sqrt(3.0)) / 4.0, epsilon = 1e-12);
        let b3 = case_minimizer(BoundModel::QCase3Varying).unwrap();
        assert_abs_diff_eq!(b3, 2.2372, epsilon = 1e-4);
        let r17 = sqrt(17.0);
        assert_abs_diff_eq!(b3, (-3.0 + 5.0 * r17 + 2.0 * sqrt(37.0 - r17)) / 13.0, epsilon = 1e-6);
        assert_abs_diff_eq!(case3_coefficient(), 0.4924, epsilon = 5e-4);
        assert!(family_slope(BoundModel::QCase2Varying, b2) <= family_slope(BoundModel::QCase2Varying, TSIRELSON));
        assert!(case_minimizer(BoundModel::Ns).is_err());
    }

    #[test]
    fn closed_form_case2_varying() {
        for i in 1..=20 {
            let b = 2.0 + (TSIRELSON - 2.0) * i as f64 / 20.0;
            let v = guaranteed_bound(BoundModel::QCase2Varying, w(WitnessKind::Chsh, b)).unwrap();
            assert_abs_diff_eq!(v, 2.0 - log2(4.0 - (1.0 + sqrt(3.0)) * (b - 2.0)), epsilon = 1e-12);
        }
    }

    #[test]
    fn cl_coefficient_near_printed() {
        assert_abs_diff_eq!(cl_coefficient(), 0.3590 / 0.1078, epsilon = 1e-3);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(
            guaranteed_bound(BoundModel::QCase1Varying, w(WitnessKind::Chsh, 2.0)),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            guaranteed_bound(BoundModel::HardyConvex, w(WitnessKind::Hardy, 0.1)),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            guaranteed_bound(BoundModel::HardyConvex, w(WitnessKind::Cl, 0.05)),
            Err(Error::Pairing(_))
        ));
    }

    #[test]
    fn mixture_guess() {
        assert_eq!(guessing_from_mixture(0.5, 0.3).unwrap(), 1.0 - 0.3 / 2.0);
        assert_eq!(guessing_from_mixture(0.7, 0.0).unwrap(), 1.0);
        assert_eq!(guessing_from_mixture(0.6410, 1.0).unwrap(), 0.6410);
        assert!(guessing_from_mixture(0.1, 0.5).is_err());
    }
}
