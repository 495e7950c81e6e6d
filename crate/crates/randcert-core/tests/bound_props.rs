use randcert_core::bounds::{guaranteed_bound, BoundModel, TSIRELSON};
use randcert_core::lp::ns_lp;
use randcert_core::npa::{di_guaranteed, witness_constraints, Level};
use randcert_core::{WitnessKind, WitnessSpec};

fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    // open at lo, closed at hi
    (1..=n).map(move |i| lo + (hi - lo) * i as f64 / n as f64)
}

fn kinds_for(model: BoundModel) -> Vec<WitnessKind> {
    [WitnessKind::Chsh, WitnessKind::Hardy, WitnessKind::Cl]
        .into_iter()
        .filter(|&k| model.pairs_with(k))
        .collect()
}

fn bound(model: BoundModel, kind: WitnessKind, v: f64) -> f64 {
    guaranteed_bound(model, WitnessSpec::new(kind, v).unwrap()).unwrap()
}

#[test]
fn every_model_increases_with_the_witness() {
    for model in BoundModel::ALL {
        for kind in kinds_for(model) {
            let (lo, hi) = model.domain(kind);
            let vals: Vec<f64> = grid(lo, hi, 100).map(|v| bound(model, kind, v)).collect();
            for w in vals.windows(2) {
                if model == BoundModel::QCase2Fixed {
                    // decreasing from 1 bit at B → 2⁺ (see endpoint test)
                    continue;
                }
                assert!(w[1] > w[0], "{} {:?}: {} then {}", model.name(), kind, w[0], w[1]);
            }
        }
    }
}

#[test]
fn varying_preparation_never_beats_fixed() {
    for (varying, fixed) in [
        (BoundModel::QCase2Varying, BoundModel::QCase2Fixed),
        (BoundModel::QCase3Varying, BoundModel::QCase3Fixed),
    ] {
        for b in grid(2.0, TSIRELSON, 100) {
            let (v, f) = (bound(varying, WitnessKind::Chsh, b), bound(fixed, WitnessKind::Chsh, b));
            assert!(v <= f + 1e-12, "{} at B={b}: {v} > {f}", varying.name());
        }
    }
}

#[test]
fn local_boundary_gives_zero_bits() {
    for model in BoundModel::ALL {
        if model == BoundModel::QCase2Fixed {
            continue;
        }
        for kind in kinds_for(model) {
            let lo = model.domain(kind).0;
            let v = bound(model, kind, lo + 1e-12);
            assert!(v.abs() <= 1e-9, "{} {:?}: {v}", model.name(), kind);
        }
    }
    // the t → ∞ tilted point is deterministic on one pair
    let v = bound(BoundModel::QCase2Fixed, WitnessKind::Chsh, 2.0 + 1e-9);
    assert!((v - 1.0).abs() < 1e-3);
}

#[test]
fn ns_lp_matches_closed_form() {
    for kind in [WitnessKind::Chsh, WitnessKind::Hardy, WitnessKind::Cl] {
        let (lo, hi) = BoundModel::Ns.domain(kind);
        for v in grid(lo, hi, 50) {
            let w = WitnessSpec::new(kind, v).unwrap();
            let eqs = witness_constraints(w);
            let mut best: f64 = 0.0;
            for i in 0..16 {
                let mut f = [0.0; 16];
                f[i] = 1.0;
                best = best.max(ns_lp(&f, &eqs).unwrap().0);
            }
            let closed = guaranteed_bound(BoundModel::Ns, w).unwrap();
            assert!((-best.log2() - closed).abs() <= 1e-10, "{kind:?} {v}: {} vs {closed}", -best.log2());
        }
    }
}

#[test]
fn ns_bound_dominates_quantum() {
    for kind in [WitnessKind::Hardy, WitnessKind::Cl] {
        let hi = BoundModel::ClConvex.domain(kind).1.min(BoundModel::HardyConvex.domain(kind).1);
        for v in grid(0.0, hi * 0.999, 8) {
            let w = WitnessSpec::new(kind, v).unwrap();
            let ns = guaranteed_bound(BoundModel::Ns, w).unwrap();
            let q = di_guaranteed(w, Level::L1ab).unwrap().bits;
            assert!(ns <= q + 1e-6, "{kind:?} {v}: ns {ns} > sdp {q}");
        }
    }
}
