//! Invariants over randomized inputs.

use proptest::prelude::*;
use std::f64::consts::FRAC_PI_2;

use twistorlab_core::families::{self, analyze, BoundaryMode, End, Profile, ProfileSpec, FIT_POINTS};
use twistorlab_core::forms::{alternation_defect, flat, sharp, wedge, TwoFormAsEndo};
use twistorlab_core::metric::FRAME_TOLERANCE;
use twistorlab_core::twistor::random_skew;
use twistorlab_core::{Slot, TaylorScalar, Tensor};

fn unit_box(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, n)
}

fn to_domain(inst: &families::FamilyInstance, u: &[f64]) -> Vec<f64> {
    let d = inst.metric.domain();
    (0..d.dim())
        .map(|a| {
            let (lo, hi) = d.sampling_interval(a);
            lo + u[a] * (hi - lo)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn frames_are_orthonormal(u in unit_box(4), eps in 0.0f64..0.3) {
        let g = Profile::from_spec(&ProfileSpec::PerturbedSin { epsilon: eps }).unwrap();
        let inst = families::riemannian_join(4, &g, FRAC_PI_2, None).unwrap();
        let p = to_domain(&inst, &u);
        let geo = inst.metric.geometry(&p, 1).unwrap();
        prop_assert!(geo.frame().orthonormality_defect() < FRAME_TOLERANCE);
    }

    #[test]
    fn musical_isomorphisms_are_inverse(u in unit_box(4), v in prop::collection::vec(-2.0f64..2.0, 4)) {
        let inst = families::warped_mapping_torus(4, 2.5).unwrap();
        let p = to_domain(&inst, &u);
        let geo = inst.metric.geometry(&p, 2).unwrap();
        let coords = geo.coords();
        let x = Tensor::from_fn(4, vec![Slot::Contra], |i| coords[0].constant_like(v[i[0]]));
        let back = sharp(&geo, &flat(&geo, &x));
        for i in 0..4 {
            prop_assert!((back.get(&[i]).value() - v[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn wedge_of_one_forms_is_alternating(a in prop::collection::vec(-1.0f64..1.0, 5),
                                         b in prop::collection::vec(-1.0f64..1.0, 5),
                                         c in prop::collection::vec(-1.0f64..1.0, 5)) {
        let f = |v: &Vec<f64>| Tensor::from_vec(5, vec![Slot::Co], v.clone());
        let ab = wedge(&f(&a), &f(&b)).unwrap();
        let abc = wedge(&ab, &f(&c)).unwrap();
        prop_assert!(alternation_defect(&ab) < 1e-15);
        prop_assert!(alternation_defect(&abc) < 1e-15);
        let ba = wedge(&f(&b), &f(&a)).unwrap();
        prop_assert!(ab.add(&ba).max_abs() < 1e-15);
    }

    #[test]
    fn two_form_dictionary_round_trips(seed in 0u64..1000) {
        let m = random_skew(5, 1, seed).remove(0);
        let t = TwoFormAsEndo::from_endo(m.clone());
        prop_assert!(t.reconstruction_residual() < 1e-15);
        let back = TwoFormAsEndo::from_frame_form(t.form().clone()).unwrap();
        prop_assert!((back.endo() - &m).norm() < 1e-15);
    }

    #[test]
    fn pythagoras_in_taylor_arithmetic(x in -3.0f64..3.0, y in -3.0f64..3.0) {
        let v = TaylorScalar::variables(&[x, y], 4);
        let s = &v[0] * &v[1];
        let one = s.sin().square() + s.cos().square();
        prop_assert!((one.value() - 1.0).abs() < 1e-14);
        prop_assert!(one.coefficients()[1..].iter().all(|c| c.abs() < 1e-11));
    }

    #[test]
    fn boundary_verdict_is_stable_under_refinement(a2 in -1.0f64..1.0, scale in 0.5f64..2.0) {
        let g = Profile::from_spec(&ProfileSpec::Polynomial { coefficients: vec![0.0, 1.0, a2, -1.0 / 6.0] }).unwrap();
        for end in [End::Origin, End::Far] {
            let c = scale;
            let coarse = analyze(&g, 1.0, c, end, BoundaryMode::Join, FIT_POINTS).unwrap();
            let fine = analyze(&g, 1.0, c, end, BoundaryMode::Join, 2 * FIT_POINTS).unwrap();
            prop_assert_eq!(coarse.passed, fine.passed);
        }
    }
}
