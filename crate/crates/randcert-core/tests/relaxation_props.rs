use randcert_core::behavior::{guessing_probability, witness_value, Behavior};
use randcert_core::bounds::TSIRELSON;
use randcert_core::dd::{max_dd_randomness, witness_maximum};
use randcert_core::npa::{di_guaranteed, Level};
use randcert_core::quantum::{canonical_correlators, probs, max_hardy, Family, PureState, StateSign, MAX_CL};
use randcert_core::sdp::SdpStatus;
use randcert_core::{WitnessKind, WitnessSpec};

const LEVELS: [Level; 3] = [Level::L0, Level::L1, Level::L1ab];

fn p_star(kind: WitnessKind, v: f64, level: Level) -> f64 {
    di_guaranteed(WitnessSpec::new(kind, v).unwrap(), level).unwrap().p_star
}

fn samples(kind: WitnessKind) -> Vec<f64> {
    match kind {
        WitnessKind::Chsh => vec![2.05, 2.3, 2.6, 2.8],
        WitnessKind::Hardy => vec![0.01, 0.03, 0.06, 0.085],
        WitnessKind::Cl => vec![0.01, 0.04, 0.08, 0.105],
    }
}

#[test]
fn tighter_levels_allow_less_guessing() {
    for kind in [WitnessKind::Chsh, WitnessKind::Hardy, WitnessKind::Cl] {
        for v in samples(kind) {
            let p: Vec<f64> = LEVELS.iter().map(|&l| p_star(kind, v, l)).collect();
            assert!(p[0] + 1e-7 >= p[1] && p[1] + 1e-7 >= p[2], "{kind:?} {v}: {p:?}");
        }
    }
}

#[test]
fn relaxation_contains_quantum_points() {
    let fams = [
        Family::Case1,
        Family::Case3 { theta: 0.3 },
        Family::Case2 { t: 1.4, theta: std::f64::consts::FRAC_PI_4 },
        Family::MaxHardy,
        Family::MaxCl,
    ];
    for f in fams {
        let b = Behavior::from_correlators(&canonical_correlators(f).unwrap()).unwrap();
        let g = guessing_probability(&b).0;
        let kinds: &[WitnessKind] = match f {
            Family::MaxHardy => &[WitnessKind::Chsh, WitnessKind::Hardy],
            Family::MaxCl => &[WitnessKind::Chsh, WitnessKind::Cl],
            _ => &[WitnessKind::Chsh],
        };
        for &kind in kinds {
            let v = witness_value(&b, kind).value;
            let p = p_star(kind, v.min(if kind == WitnessKind::Chsh { TSIRELSON } else { 1.0 }), Level::L1ab);
            assert!(p >= g - 1e-6, "{f:?} {kind:?}: p* {p} below the point's guess {g}");
        }
    }
}

#[test]
fn guaranteed_bits_grow_with_the_witness() {
    for kind in [WitnessKind::Chsh, WitnessKind::Hardy, WitnessKind::Cl] {
        let (lo, hi) = match kind {
            WitnessKind::Chsh => (2.0, TSIRELSON),
            WitnessKind::Hardy => (0.0, max_hardy()),
            WitnessKind::Cl => (0.0, MAX_CL),
        };
        for level in LEVELS {
            let mut prev = -1.0;
            for i in 1..=12 {
                let v = lo + (hi - lo) * i as f64 / 12.0;
                let r = di_guaranteed(WitnessSpec::new(kind, v).unwrap(), level).unwrap();
                assert!(r.bits >= prev - 1e-9, "{kind:?} {level:?} at {v}: {} after {prev}", r.bits);
                prev = r.bits;
            }
        }
    }
}

#[test]
fn boundary_points_solve_to_optimality() {
    let cases = [
        (WitnessKind::Chsh, TSIRELSON, 1.228_446_7),
        (WitnessKind::Hardy, max_hardy(), 0.694_241_9),
        (WitnessKind::Cl, MAX_CL, 0.641_52),
    ];
    for (kind, v, bits) in cases {
        let r = di_guaranteed(WitnessSpec::new(kind, v).unwrap(), Level::L1ab).unwrap();
        assert_eq!(r.status, SdpStatus::Optimal, "{kind:?}");
        assert!((r.bits - bits).abs() < 2e-4, "{kind:?}: {}", r.bits);
    }
}

#[test]
fn dd_randomness_respects_the_relaxation() {
    for (kind, v) in [(WitnessKind::Hardy, 0.04), (WitnessKind::Cl, 0.06)] {
        let w = WitnessSpec::new(kind, v).unwrap();
        let dd = max_dd_randomness(w, 6, 11).unwrap();
        assert!(dd.converged);
        assert!(dd.max_residual() <= 1e-8);
        assert!(dd.best_value <= 2.0);
        // the optimizing behavior lies inside the relaxation, so no probability
        // of it can exceed the relaxation's maximum
        let b = Behavior::from_array_unchecked(probs(&dd.params, dd.sign.value()));
        let p_star = di_guaranteed(w, Level::L1ab).unwrap().p_star;
        assert!(guessing_probability(&b).0 <= p_star + 1e-6);
        assert!(2f64.powf(-dd.best_value) <= p_star + 1e-6);
        let again = max_dd_randomness(w, 6, 11).unwrap();
        assert_eq!(dd.best_value.to_bits(), again.best_value.to_bits());
        assert_eq!(dd.params, again.params);
    }
}

#[test]
fn maximally_entangled_state_shows_almost_no_cl() {
    let s = PureState::new(std::f64::consts::FRAC_1_SQRT_2, StateSign::Minus).unwrap();
    let o = witness_maximum(s, WitnessKind::Cl, 20, 5).unwrap();
    assert!(o.best_value < 1e-4, "{}", o.best_value);
}
