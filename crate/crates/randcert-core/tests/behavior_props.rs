use proptest::prelude::*;
use randcert_core::behavior::{
    chsh_from_witness_probs, hardy_probs, idx, is_factorisable, mix, witness_value, Behavior, WitnessKind,
};
use randcert_core::quantum::{probs, probs_and_jacobian, StateSign, N_PARAMS};
use randcert_core::vertices::VertexCatalog;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

// Random NS behavior: a convex mixture of the 24 vertices.
fn ns_behavior() -> impl Strategy<Value = Behavior> {
    prop::collection::vec(0.0f64..1.0, 24).prop_map(|w| {
        let s: f64 = w.iter().sum::<f64>().max(1e-12);
        let mut w: Vec<f64> = w.iter().map(|v| v / s).collect();
        let err = 1.0 - w.iter().sum::<f64>();
        w[0] += err;
        if w[0] < 0.0 {
            w[0] = 0.0;
        }
        mix(&VertexCatalog::new().all(), &w).unwrap_or_else(|_| VertexCatalog::new().pr[0])
    })
}

// Marginal `P(+)` drawn so that exact 0 and 1 are common.
fn marginal() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), Just(1.0), 0.0f64..=1.0]
}

// Product behavior with the listed cells forced to zero: for each cell one of
// the two marginal factors is set to vanish, the flag choosing which.
fn forced_product(mut pa: [f64; 2], mut pb: [f64; 2], cells: &[usize], alice: &[bool]) -> Behavior {
    for (&c, &on_a) in cells.iter().zip(alice) {
        let (x, y, a, b) = (c >> 3, (c >> 2) & 1, (c >> 1) & 1, c & 1);
        if on_a {
            pa[x] = a as f64;
        } else {
            pb[y] = b as f64;
        }
    }
    product(pa, pb)
}

fn product(pa: [f64; 2], pb: [f64; 2]) -> Behavior {
    let mut p = [0.0; 16];
    for x in 0..2 {
        for y in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    let ma = if a == 0 { pa[x] } else { 1.0 - pa[x] };
                    let mb = if b == 0 { pb[y] } else { 1.0 - pb[y] };
                    p[idx(x, y, a, b)] = ma * mb;
                }
            }
        }
    }
    Behavior::from_array_unchecked(p)
}

// α stays away from 1, where β = √(1−α²) is too curved for a 1e-6 difference step.
fn params() -> impl Strategy<Value = [f64; N_PARAMS]> {
    prop::array::uniform9(0.0f64..6.2).prop_map(|mut p| {
        p[8] = 0.02 + 0.96 * p[8] / 6.2;
        p
    })
}

proptest! {
    #![proptest_config(config(1000))]

    #[test]
    fn chsh_identity_on_ns_behaviors(b in ns_behavior()) {
        let [p1, p2, p3, p4] = hardy_probs(&b);
        let chsh = witness_value(&b, WitnessKind::Chsh).value;
        prop_assert!((chsh - chsh_from_witness_probs(p1, p2, p3, p4)).abs() <= 1e-12);
    }

    #[test]
    fn hardy_zeros_exclude_local_models(
        pa in [marginal(), marginal()],
        pb in [marginal(), marginal()],
        alice in prop::collection::vec(any::<bool>(), 3),
    ) {
        let b = forced_product(pa, pb, &WitnessKind::Hardy.zero_cells(), &alice);
        prop_assert!(is_factorisable(&b, 1e-12));
        let [p1, p2, p3, p4] = hardy_probs(&b);
        prop_assume!(p2.abs() <= 1e-12 && p3.abs() <= 1e-12 && p4.abs() <= 1e-12);
        prop_assert!(p1.abs() <= 1e-9);
    }

    #[test]
    fn cl_zeros_exclude_local_models(
        pa in [marginal(), marginal()],
        pb in [marginal(), marginal()],
        alice in prop::collection::vec(any::<bool>(), 2),
    ) {
        let b = forced_product(pa, pb, &WitnessKind::Cl.zero_cells(), &alice);
        prop_assert!(is_factorisable(&b, 1e-12));
        let [p1, p2, p3, p4] = hardy_probs(&b);
        prop_assume!(p2.abs() <= 1e-12 && p3.abs() <= 1e-12);
        prop_assert!(p1 - p4 <= 1e-9);
    }

    #[test]
    fn witnesses_are_affine_under_mixing(b1 in ns_behavior(), b2 in ns_behavior(), l in 0.0f64..=1.0) {
        let m = mix(&[b1, b2], &[l, 1.0 - l]).unwrap();
        for i in 0..16 {
            let want = l * b1.probs()[i] + (1.0 - l) * b2.probs()[i];
            prop_assert!((m.probs()[i] - want).abs() <= 1e-12);
        }
        for kind in [WitnessKind::Chsh, WitnessKind::Hardy, WitnessKind::Cl] {
            let want = l * witness_value(&b1, kind).value + (1.0 - l) * witness_value(&b2, kind).value;
            prop_assert!((witness_value(&m, kind).value - want).abs() <= 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(config(200))]

    #[test]
    fn quantum_behaviors_are_no_signalling(p in params(), plus in any::<bool>()) {
        let s = if plus { StateSign::Plus } else { StateSign::Minus };
        let b = Behavior::from_array_unchecked(probs(&p, s.value()));
        prop_assert!(b.signalling() <= 1e-12);
        prop_assert!(b.probs().iter().all(|&v| v >= -1e-15));
    }

    #[test]
    fn jacobian_matches_central_differences(p in params(), plus in any::<bool>()) {
        let s = if plus { 1.0 } else { -1.0 };
        let (_, jac) = probs_and_jacobian(&p, s);
        for k in 0..N_PARAMS {
            let (mut hi, mut lo) = (p, p);
            hi[k] += 1e-6;
            lo[k] -= 1e-6;
            let (ph, pl) = (probs(&hi, s), probs(&lo, s));
            for i in 0..16 {
                let fd = (ph[i] - pl[i]) / 2e-6;
                let scale = jac[i][k].abs().max(1e-3);
                prop_assert!((jac[i][k] - fd).abs() <= 1e-6 * scale, "d p{i}/d x{k}: {} vs {fd}", jac[i][k]);
            }
        }
    }
}
