//! Property tests for the structural invariants of lifts and products.

use nclift::axioms::{check_lift_axiom, roots_of_unity_grid, Axiom, LiftPair};
use nclift::free::{BasisWord, FreeSpace, LetterSet};
use nclift::hilbert::{gamma_deform, random_op, rng_from_seed};
use nclift::pathweight::{build_graph, moment_by_paths};
use nclift::products::{canonicalize_spec, mixed_moment, random_word, same_product, FaceSide, MomentWord, ProductSpec};
use nclift::tensor::{flip_operator, lift_left_tensor, lift_right_tensor, tensor_space};
use nclift::{CircleParam, PointedSpace, C64};
use proptest::prelude::*;
use rand::Rng;

fn param() -> impl Strategy<Value = CircleParam> {
    (0..13usize).prop_map(|k| roots_of_unity_grid(12)[k])
}

fn space() -> impl Strategy<Value = PointedSpace> {
    (2..=4usize).prop_map(|d| PointedSpace::new(d).unwrap())
}

fn side() -> impl Strategy<Value = FaceSide> {
    prop_oneof![Just(FaceSide::Left), Just(FaceSide::Right)]
}

/// A free face: `(γ, δ) ∈ T² ∪ {(0, 0)}`.
fn free_face() -> impl Strategy<Value = (FaceSide, CircleParam, CircleParam)> {
    (side(), param(), param(), any::<bool>()).prop_map(|(s, g, d, boolean)| {
        if boolean {
            (s, CircleParam::zero(), CircleParam::zero())
        } else {
            let unit = |p: CircleParam| if p.is_zero() { CircleParam::one() } else { p };
            (s, unit(g), unit(d))
        }
    })
}

/// A tensor face in `J_⊗`.
fn tensor_face() -> impl Strategy<Value = (CircleParam, CircleParam)> {
    (param(), param(), 0..3usize).prop_map(|(g, d, kind)| match kind {
        0 => (g, g),
        1 => (g, CircleParam::zero()),
        _ => (CircleParam::zero(), d),
    })
}

fn spec() -> impl Strategy<Value = ProductSpec> {
    prop_oneof![
        (tensor_face(), tensor_face()).prop_map(|(a, b)| ProductSpec::tensor(&[a, b]).unwrap()),
        (free_face(), free_face()).prop_map(|(a, b)| ProductSpec::free(&[a, b]).unwrap()),
    ]
}

fn rotate(spec: &ProductSpec, alpha: CircleParam, beta: CircleParam) -> ProductSpec {
    let f = spec.faces();
    match spec.monoidal() {
        nclift::products::Monoidal::Tensor => ProductSpec::tensor(&[
            (f[0].gamma.mul(&alpha), f[0].delta.mul(&alpha)),
            (f[1].gamma.mul(&alpha), f[1].delta.mul(&alpha)),
        ])
        .unwrap(),
        _ if f[0].side == f[1].side => ProductSpec::free(&[
            (f[0].side, f[0].gamma.mul(&alpha), f[0].delta.mul(&beta)),
            (f[1].side, f[1].gamma.mul(&alpha), f[1].delta.mul(&beta)),
        ])
        .unwrap(),
        _ => ProductSpec::free(&[
            (f[0].side, f[0].gamma.mul(&alpha), f[0].delta.mul(&beta)),
            (f[1].side, f[1].gamma.mul(&beta), f[1].delta.mul(&alpha)),
        ])
        .unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn deformation_is_a_star_homomorphism(h in space(), g in param(), seed in any::<u64>()) {
        let (x, y) = (random_op(h, seed), random_op(h, seed ^ 0x5555));
        let lhs = gamma_deform(&x.mul(&y).unwrap(), g);
        let rhs = gamma_deform(&x, g).mul(&gamma_deform(&y, g)).unwrap();
        prop_assert!(lhs.distance(&rhs).unwrap() < 1e-12);
        prop_assert!(gamma_deform(&x.adjoint(), g).distance(&gamma_deform(&x, g).adjoint()).unwrap() < 1e-12);
    }

    #[test]
    fn deformation_by_one_is_identity(h in space(), seed in any::<u64>()) {
        let x = random_op(h, seed);
        prop_assert!(gamma_deform(&x, CircleParam::one()).distance(&x).unwrap() == 0.0);
    }

    #[test]
    fn flip_exchanges_left_and_right_tensor_lifts(h in space(), g in space(), p in param(), seed in any::<u64>()) {
        let x = random_op(h, seed);
        let ts = tensor_space(h, g);
        let swapped = tensor_space(g, h);
        let f = flip_operator(&ts);
        let left = lift_left_tensor(&x, p, &ts).unwrap();
        let right = lift_right_tensor(&x, p, &swapped).unwrap();
        let conj = f.matrix().adjoint() * right.matrix() * f.matrix();
        prop_assert!(nclift::hilbert::max_entry(&(conj - left.matrix())) < 1e-12);
    }

    #[test]
    fn tensor_lifts_commute_across_factors(h in space(), g in space(), p in param(), q in param(), seed in any::<u64>()) {
        let ts = tensor_space(h, g);
        let a = lift_left_tensor(&random_op(h, seed), p, &ts).unwrap();
        let b = lift_right_tensor(&random_op(g, seed ^ 1), q, &ts).unwrap();
        // Lifts of different factors commute exactly when both are undeformed.
        if p == CircleParam::one() && q == CircleParam::one() {
            let ab = a.mul(&b).unwrap();
            let ba = b.mul(&a).unwrap();
            prop_assert!(ab.distance(&ba).unwrap() < 1e-12);
        }
    }

    #[test]
    fn spec_json_round_trip(s in spec()) {
        let json = serde_json::to_string(&s).unwrap();
        let back: ProductSpec = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn canonical_form_is_idempotent_and_gauge_invariant(s in spec(), a in param(), b in param()) {
        let unit = |p: CircleParam| if p.is_zero() { CircleParam::one() } else { p };
        let c = canonicalize_spec(&s).unwrap();
        prop_assert_eq!(canonicalize_spec(&c).unwrap(), c.clone());
        let rotated = rotate(&s, unit(a), unit(b));
        prop_assert!(same_product(&s, &rotated).unwrap());
    }

    #[test]
    fn canonical_form_preserves_moments(s in spec(), seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let c = canonicalize_spec(&s).unwrap();
        let (h, g) = (PointedSpace::new(rng.gen_range(2..=3)).unwrap(), PointedSpace::new(rng.gen_range(2..=3)).unwrap());
        let len = rng.gen_range(1..=5);
        let word = random_word(&mut rng, len, &[h, g], 2).unwrap();
        let a = mixed_moment(&s, &word, h, g).unwrap().value;
        let b = mixed_moment(&c, &word, h, g).unwrap().value;
        prop_assert!((a - b).norm() < 1e-10, "{} vs {}", a, b);
    }

    #[test]
    fn path_oracle_matches_operator_model(s in spec(), seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let (h, g) = (PointedSpace::new(rng.gen_range(2..=3)).unwrap(), PointedSpace::new(rng.gen_range(2..=3)).unwrap());
        let len = rng.gen_range(1..=6);
        let word = random_word(&mut rng, len, &[h, g], 2).unwrap();
        let graph = build_graph(&s, 3).unwrap();
        let a = mixed_moment(&s, &word, h, g).unwrap().value;
        let b = moment_by_paths(&graph, &word, h, g).unwrap();
        prop_assert!((a - b).norm() < 1e-10);
    }

    #[test]
    fn moment_of_adjoint_word_is_conjugate(s in spec(), seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let (h, g) = (PointedSpace::new(2).unwrap(), PointedSpace::new(3).unwrap());
        let len = rng.gen_range(1..=5);
        let word: MomentWord = random_word(&mut rng, len, &[h, g], 2).unwrap();
        let a = mixed_moment(&s, &word, h, g).unwrap().value;
        let b = mixed_moment(&s, &word.adjoint(), h, g).unwrap().value;
        prop_assert!((a - b.conj()).norm() < 1e-10);
    }

    #[test]
    fn positivity_of_product_states(s in spec(), seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let (h, g) = (PointedSpace::new(2).unwrap(), PointedSpace::new(2).unwrap());
        let len = rng.gen_range(1..=3);
        let word = random_word(&mut rng, len, &[h, g], 2).unwrap();
        let v = mixed_moment(&s, &word.adjoint().concat(&word), h, g).unwrap().value;
        prop_assert!(v.re > -1e-10 && v.im.abs() < 1e-10, "{}", v);
    }

    #[test]
    fn circle_parameters_are_snapped_or_rejected(theta in 0.0..std::f64::consts::TAU, r in 0.0..2.0f64) {
        let z = C64::from_polar(r, theta);
        match CircleParam::new(z) {
            Ok(p) => prop_assert!(p.is_zero() || (p.value().norm() - 1.0).abs() < 1e-15),
            Err(_) => prop_assert!(r > 1e-9 && (r - 1.0).abs() > 1e-9),
        }
    }

    #[test]
    fn block_reversal_is_an_involution(letters in proptest::collection::vec(1..=3u8, 0..7)) {
        let mut alternating: Vec<u8> = Vec::new();
        for l in letters {
            if alternating.last() != Some(&l) {
                alternating.push(l);
            }
        }
        let indices = vec![1; alternating.len()];
        let w = BasisWord::new(alternating, indices).unwrap();
        let space = FreeSpace::new(vec![PointedSpace::new(2).unwrap(); 3]).unwrap();
        space.check_word(&w).unwrap();
        for group in [LetterSet::of(&[1]), LetterSet::of(&[1, 2]), LetterSet::of(&[2])] {
            prop_assert_eq!(w.reversed_blocks(group).reversed_blocks(group), w.clone());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn lift_reports_pass_iff_within_tolerance(id in 0..6usize, g in param(), d in param(), seed in any::<u64>()) {
        let pair = LiftPair::from_id(nclift::axioms::LIFT_IDS[id], g, d).unwrap();
        let report = check_lift_axiom(&pair, Axiom::MiddleAssociativity, &[2, 2, 2], 2, seed).unwrap();
        prop_assert_eq!(report.passed, report.max_violation <= report.tolerance);
        prop_assert!(report.as_expected(), "{:?}", report);
        let again = check_lift_axiom(&pair, Axiom::MiddleAssociativity, &[2, 2, 2], 2, seed).unwrap();
        prop_assert_eq!(serde_json::to_string(&report).unwrap(), serde_json::to_string(&again).unwrap());
    }
}
