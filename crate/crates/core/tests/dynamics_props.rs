//! Sequences in the symmetric space and their flag dynamics.

use anosov_core::dynamics::{
    classify_sequence, conical_check, detect_contraction, flag_limit, ConicalOptions,
    ContractionOptions, FlagLimitOptions, SequenceThresholds,
};
use anosov_core::flags::{act_on_flag, flag_distance};
use anosov_core::linalg::{self, Mat};
use anosov_core::{CartanVector, Error, FaceType, Flag, GroupElement, Point};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn chamber_vector(gaps: &[f64]) -> CartanVector {
    // coordinates from consecutive gaps, centred
    let mut c = vec![0.0];
    for g in gaps {
        c.push(c.last().unwrap() - g);
    }
    let mean = c.iter().sum::<f64>() / c.len() as f64;
    CartanVector::new(c.into_iter().map(|v| v - mean).collect()).unwrap()
}

#[test]
fn square_root_gap_is_regular_but_not_uniform() {
    let deltas: Vec<CartanVector> = (1..=1000)
        .map(|n| chamber_vector(&[(n as f64).sqrt(), n as f64]))
        .collect();
    let r = classify_sequence(&deltas, &FaceType::full(3), SequenceThresholds::default()).unwrap();
    assert!(
        r.regular && !r.uniform,
        "{} {}",
        r.margin_growth,
        r.uniform_ratio_min
    );
    let r1 = classify_sequence(
        &deltas,
        &FaceType::new(3, [2]).unwrap(),
        SequenceThresholds::default(),
    )
    .unwrap();
    assert!(r1.regular && r1.uniform);
}

#[test]
fn bounded_sequences_are_not_regular() {
    let deltas: Vec<CartanVector> = (1..=50)
        .map(|n| chamber_vector(&[1.0 + (n as f64).sin().abs(), 0.5]))
        .collect();
    let r = classify_sequence(&deltas, &FaceType::full(3), SequenceThresholds::default()).unwrap();
    assert!(!r.regular && !r.uniform);
    assert!(matches!(
        classify_sequence(
            &deltas[..2],
            &FaceType::full(3),
            SequenceThresholds::default()
        ),
        Err(Error::InvalidInput(_))
    ));
}

fn gap_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..2.0, 3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn regularity_passes_to_smaller_faces(gaps in gap_strategy()) {
        let deltas: Vec<CartanVector> =
            (1..=40).map(|n| chamber_vector(&gaps.iter().map(|g| g * n as f64).collect::<Vec<_>>())).collect();
        let th = SequenceThresholds::default();
        for big in FaceType::all(4) {
            if !classify_sequence(&deltas, &big, th).unwrap().regular {
                continue;
            }
            for small in FaceType::all(4).into_iter().filter(|f| f.is_contained_in(&big)) {
                prop_assert!(classify_sequence(&deltas, &small, th).unwrap().regular);
            }
        }
    }

    #[test]
    fn prepending_terms_keeps_the_windowed_verdict(gaps in gap_strategy(), junk in gap_strategy()) {
        let deltas: Vec<CartanVector> =
            (1..=30).map(|n| chamber_vector(&gaps.iter().map(|g| g * n as f64).collect::<Vec<_>>())).collect();
        let mut longer = vec![chamber_vector(&junk); 7];
        longer.extend(deltas.iter().cloned());
        let th = SequenceThresholds { window: 10, ..Default::default() };
        for face in FaceType::all(4) {
            let a = classify_sequence(&deltas, &face, th).unwrap();
            let b = classify_sequence(&longer, &face, th).unwrap();
            prop_assert_eq!(a.regular, b.regular);
            prop_assert_eq!(a.uniform, b.uniform);
            prop_assert_eq!(a.detected_pure_face, b.detected_pure_face);
        }
    }
}

fn diagonalizable(rng: &mut ChaCha8Rng, logs: &[f64]) -> (GroupElement, Mat) {
    let p = linalg::random_sl(rng, logs.len(), 0.5);
    let m = &p * linalg::diag_exp(logs) * p.clone().try_inverse().unwrap();
    (GroupElement::new(m).unwrap(), p)
}

#[test]
fn powers_contract_and_so_do_inverse_powers() {
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    let face = FaceType::new(3, [1]).unwrap();
    let (g, p) = diagonalizable(&mut rng, &[1.0, 0.1, -1.1]);
    let opts = ContractionOptions {
        samples: 30,
        ..Default::default()
    };
    let forward: Vec<GroupElement> = (1..=25).map(|n| g.pow(n)).collect();
    let r = detect_contraction(&forward, &face, opts).unwrap();
    assert!(r.contracting, "{:?}", r.max_distance);
    assert!(flag_distance(&r.plus, &Flag::from_basis(face.clone(), &p).unwrap()).unwrap() < 1e-6);

    let backward: Vec<GroupElement> = forward.iter().map(|h| h.inverse()).collect();
    let s = detect_contraction(&backward, &face.iota(), opts).unwrap();
    assert!(s.contracting);
    let reversed = Mat::from_fn(3, 3, |r, c| p[(r, 2 - c)]);
    assert!(
        flag_distance(&s.plus, &Flag::from_basis(face.iota(), &reversed).unwrap()).unwrap() < 1e-6
    );
}

#[test]
fn rotations_have_no_attracting_flag() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let k = GroupElement::rotation(linalg::random_rotation(&mut rng, 3)).unwrap();
    let gs: Vec<GroupElement> = (1..=10).map(|n| k.pow(n)).collect();
    let r = detect_contraction(&gs, &FaceType::full(3), ContractionOptions::default());
    assert!(matches!(r, Err(Error::VanishingGap { .. })));
}

#[test]
fn limits_of_powers_are_eigenflags() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for face in FaceType::all(3) {
        let (g, p) = diagonalizable(&mut rng, &[0.9, 0.1, -1.0]);
        let gs: Vec<GroupElement> = (1..=40).map(|n| g.pow(n)).collect();
        let (limit, diag) = flag_limit(&gs, &face, FlagLimitOptions::default()).unwrap();
        assert!(diag.converged);
        assert!(
            flag_distance(&limit, &Flag::from_basis(face.clone(), &p).unwrap()).unwrap() < 1e-6
        );
    }
}

#[test]
fn alternating_sequences_are_inconclusive() {
    let g = GroupElement::diag_exp(&[1.0, -1.0]).unwrap();
    let h = g.inverse();
    let gs: Vec<GroupElement> = (1..=20)
        .map(|n| if n % 2 == 0 { g.pow(n) } else { h.pow(n) })
        .collect();
    match flag_limit(&gs, &FaceType::full(2), FlagLimitOptions::default()) {
        Err(Error::Inconclusive { clusters }) => assert_eq!(clusters.len(), 2),
        other => panic!("{other:?}"),
    }
}

#[test]
fn bounded_right_perturbations_keep_the_limit() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let face = FaceType::full(3);
    let (g, p) = diagonalizable(&mut rng, &[1.0, 0.2, -1.2]);
    let gs: Vec<GroupElement> = (1..=40)
        .map(|n| {
            g.pow(n)
                .compose(&GroupElement::new(linalg::random_sl(&mut rng, 3, 0.5)).unwrap())
        })
        .collect();
    let (limit, diag) = flag_limit(&gs, &face, FlagLimitOptions::default()).unwrap();
    assert!(diag.converged, "{:?}", diag.residuals);
    assert!(flag_distance(&limit, &Flag::from_basis(face, &p).unwrap()).unwrap() < 1e-6);
}

#[test]
fn conjugated_diagonal_rays_are_conical() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    let face = FaceType::full(3);
    let h = GroupElement::new(linalg::random_sl(&mut rng, 3, 0.7)).unwrap();
    let d = GroupElement::diag_exp(&[0.4, 0.1, -0.5]).unwrap();
    let g = h.compose(&d).compose(&h.inverse());
    let gs: Vec<GroupElement> = (1..=12).map(|n| g.pow(n)).collect();
    let tau = act_on_flag(&h, &Flag::standard(face));
    let r = conical_check(&gs, &tau, &h.orbit_point(), ConicalOptions::default()).unwrap();
    assert!(r.conical(), "{:?} {:?}", r.distances, r.transversality);
    assert!(r.distances.iter().all(|d| *d < 1e-6));
}

#[test]
fn drifting_rays_are_not_conical() {
    let face = FaceType::full(3);
    let s = Mat::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    let a = Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![0.5, 0.0, -0.5]));
    let gs: Vec<GroupElement> = (1..=20)
        .map(|n| {
            let t = n as f64;
            GroupElement::new(linalg::sym_exp(&(&a * t + &s * (0.8 * t.sqrt())))).unwrap()
        })
        .collect();
    let r = conical_check(
        &gs,
        &Flag::standard(face),
        &Point::origin(3),
        ConicalOptions::default(),
    )
    .unwrap();
    assert!(!r.geometric, "{:?}", r.distances);
}
