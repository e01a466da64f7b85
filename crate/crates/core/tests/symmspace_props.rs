//! Metric geometry of the symmetric space against independent recomputation.

mod common;

use std::f64::consts::SQRT_2;

use anosov_core::flags::{act_on_flag, flag_distance};
use anosov_core::linalg::{self, Mat};
use anosov_core::symmspace::{
    cartan_vector, cone_query, delta_projection, diamond_query, distance, finsler_verify,
    parallel_set_distance, relative_flag, taumod_distance, ConeVerdict, DiamondRef, OutsideReason,
    ParallelSetRef, WeylConeRef,
};
use anosov_core::weyl::{face_boundary_distance, iota, star_violation, theta_membership};
use anosov_core::{CartanVector, FaceType, Flag, GroupElement, Point, ThetaSpec};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_point(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Point {
    GroupElement::new(linalg::random_sl(rng, n, scale))
        .unwrap()
        .orbit_point()
}

fn diag_point(a: &[f64]) -> Point {
    Point::from_log_diagonal(a).unwrap()
}

/// `½ log` of the generalized eigenvalues of `(y, x)`, via the Cholesky
/// factor of `x`, sorted descending.
fn cholesky_cartan(x: &Point, y: &Point) -> Vec<f64> {
    let l = x.spd().clone().cholesky().unwrap().l();
    let li = l.try_inverse().unwrap();
    let m = &li * y.spd() * li.transpose();
    let mut e: Vec<f64> = m
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|v| 0.5 * v.ln())
        .collect();
    e.sort_by(|a, b| b.total_cmp(a));
    e
}

#[test]
fn cartan_examples() {
    let o = Point::origin(3);
    let y = diag_point(&[1.0, 0.0, -1.0]);
    let d = cartan_vector(&o, &y).unwrap();
    assert!((d.coords()[0] - 1.0).abs() < 1e-14 && d.coords()[1].abs() < 1e-14);
    assert!(cartan_vector(&y, &y).unwrap().norm() < 1e-12);
}

#[test]
fn distance_matches_cholesky_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..300 {
        let n = rng.random_range(2..=4);
        let x = random_point(&mut rng, n, 1.5);
        let y = random_point(&mut rng, n, 1.5);
        let oracle = cholesky_cartan(&x, &y);
        let d = cartan_vector(&x, &y).unwrap();
        for (a, b) in d.coords().iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-9);
        }
        let riemannian = oracle.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((distance(&x, &y).unwrap() - riemannian).abs() < 1e-9);
    }
}

#[test]
fn relative_flag_diagonal_example() {
    let face = FaceType::new(3, [1]).unwrap();
    let (f, gaps) =
        relative_flag(&Point::origin(3), &diag_point(&[1.0, 0.0, -1.0]), &face).unwrap();
    assert!((f.line().unwrap()[0].abs() - 1.0).abs() < 1e-14);
    assert!((gaps[0] - 1.0).abs() < 1e-14);
}

#[test]
fn reversed_relative_flag_is_the_repelling_eigenflag() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let face = FaceType::new(3, [1]).unwrap();
    for _ in 0..50 {
        let y = random_point(&mut rng, 3, 1.0);
        let (back, _) = relative_flag(&y, &Point::origin(3), &face.iota()).unwrap();
        assert_eq!(back.face(), &face.iota());
        let (_, vecs) = linalg::sym_eigen_desc(y.spd());
        let reversed = Mat::from_fn(3, 3, |r, c| vecs[(r, 2 - c)]);
        let expected = Flag::from_basis(face.iota(), &reversed).unwrap();
        assert!(flag_distance(&back, &expected).unwrap() < 1e-9);
    }
}

#[test]
fn relative_flags_are_equivariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let face = FaceType::full(3);
    for _ in 0..100 {
        let x = random_point(&mut rng, 3, 1.0);
        let y = random_point(&mut rng, 3, 1.0);
        let q = GroupElement::new(linalg::random_sl(&mut rng, 3, 1.0)).unwrap();
        let (f, _) = relative_flag(&x, &y, &face).unwrap();
        let (g, _) = relative_flag(&q.act(&x), &q.act(&y), &face).unwrap();
        assert!(flag_distance(&act_on_flag(&q, &f), &g).unwrap() < 1e-7);
    }
}

#[test]
fn cone_examples() {
    let face = FaceType::new(3, [1]).unwrap();
    let cone = WeylConeRef {
        tip: Point::origin(3),
        flag: Flag::standard(face.clone()),
    };
    assert_eq!(
        cone_query(&Point::origin(3), &cone, 1e-9).unwrap(),
        ConeVerdict::Boundary
    );
    // orbit point of diag(e⁴, e⁻¹, e⁻³): d_Δ = (4, -1, -3)
    let y = GroupElement::diag_exp(&[4.0, -1.0, -3.0])
        .unwrap()
        .orbit_point();
    match cone_query(&y, &cone, 1e-9).unwrap() {
        ConeVerdict::Interior { margin } => assert!((margin - 5.0 / SQRT_2).abs() < 1e-12),
        v => panic!("{v:?}"),
    }
    let off = GroupElement::diag_exp(&[-3.0, 4.0, -1.0])
        .unwrap()
        .orbit_point();
    assert!(matches!(
        cone_query(&off, &cone, 1e-9).unwrap(),
        ConeVerdict::Outside(OutsideReason::FlagMismatch { .. })
    ));
}

/// Symmetric block-diagonal matrix whose block eigenvalues form a chamber
/// vector with every kept gap at least `min_gap`.
fn block_translation(rng: &mut ChaCha8Rng, face: &FaceType, min_gap: f64) -> Mat {
    let n = face.n();
    let blocks = face.blocks();
    let mut m = Mat::zeros(n, n);
    let mut level = 0.0;
    let mut values = vec![0.0; n];
    for b in blocks.iter().rev() {
        let lo = level;
        for i in b.clone() {
            values[i] = lo + rng.random_range(0.0..1.0);
        }
        level = b
            .clone()
            .map(|i| values[i])
            .fold(f64::NEG_INFINITY, f64::max)
            + min_gap
            + rng.random_range(0.0..1.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    for b in &blocks {
        let k = linalg::random_rotation(rng, b.len());
        let d = Mat::from_diagonal(&nalgebra::DVector::from_iterator(
            b.len(),
            b.clone().map(|i| values[i] - mean),
        ));
        m.view_mut((b.start, b.start), (b.len(), b.len()))
            .copy_from(&(&k * d * k.transpose()));
    }
    m
}

/// `r · exp(B)` with `B` block-diagonal, kept as a matrix so that products
/// stay inside the stabilizer of the standard flags.
fn advance(r: &Mat, b: &Mat) -> Mat {
    r * linalg::sym_exp(&(b * 0.5))
}

fn point_of(h: &Mat, r: &Mat) -> Point {
    let m = h * r;
    Point::normalized(&m * m.transpose()).unwrap()
}

#[test]
fn delta_triangle_containment() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for k in 0..500 {
        let face = [
            FaceType::new(3, [1]).unwrap(),
            FaceType::new(3, [2]).unwrap(),
            FaceType::new(4, [2]).unwrap(),
        ][k % 3]
            .clone();
        let n = face.n();
        let h = linalg::random_sl(&mut rng, n, 1.0);
        let rx = linalg::diag_exp(&linalg::random_trace_zero(&mut rng, n, 0.5));
        let ry = advance(&rx, &block_translation(&mut rng, &face, 0.0));
        let rz = advance(&ry, &block_translation(&mut rng, &face, 0.0));
        let (x, y, z) = (point_of(&h, &rx), point_of(&h, &ry), point_of(&h, &rz));
        let dxy = cartan_vector(&x, &y).unwrap();
        let dxz = cartan_vector(&x, &z).unwrap();
        let diff: Vec<f64> = dxz
            .coords()
            .iter()
            .zip(dxy.coords())
            .map(|(a, b)| a - b)
            .collect();
        assert!(star_violation(&diff, &face) <= 1e-7, "{dxy:?} {dxz:?}");
    }
}

#[test]
fn inner_cone_points_lie_in_the_outer_cone() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let face = FaceType::new(3, [1]).unwrap();
    let h = linalg::random_sl(&mut rng, 3, 0.7);
    let flag = Flag::from_basis(face.clone(), &h).unwrap();
    let rx = Mat::identity(3, 3);
    let ry = advance(&rx, &block_translation(&mut rng, &face, 0.3));
    let outer = WeylConeRef {
        tip: point_of(&h, &rx),
        flag,
    };
    for _ in 0..500 {
        let rz = advance(&ry, &block_translation(&mut rng, &face, 0.0));
        let v = cone_query(&point_of(&h, &rz), &outer, 1e-6).unwrap();
        assert!(v.is_member(), "{v:?}");
    }
}

#[test]
fn nested_diagonal_cones_are_separated_by_the_tip_margin() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for face in [
        FaceType::full(3),
        FaceType::new(3, [1]).unwrap(),
        FaceType::new(3, [2]).unwrap(),
    ] {
        let outer = WeylConeRef {
            tip: Point::origin(3),
            flag: Flag::standard(face.clone()),
        };
        for _ in 0..100 {
            let a = sorted_random(&mut rng, 3);
            let tip_margin = face_boundary_distance(&CartanVector::new(a.clone()).unwrap(), &face);
            let at_tip = cone_query(&diag_point(&a), &outer, 1e-9).unwrap();
            assert!((at_tip.margin() - tip_margin).abs() < 1e-9);
            let c = sorted_random(&mut rng, 3);
            let inner: Vec<f64> = a.iter().zip(&c).map(|(x, y)| x + y).collect();
            let v = cone_query(&diag_point(&inner), &outer, 1e-9).unwrap();
            assert!(v.margin() >= tip_margin - 1e-9);
        }
    }
}

fn sorted_random(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut v = linalg::random_trace_zero(rng, n, 2.0);
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

#[test]
fn diamond_examples_and_nesting() {
    let face = FaceType::full(3);
    let theta = ThetaSpec::new(face.clone(), 0.2).unwrap();
    let y = diag_point(&[1.0, 0.0, -1.0]);
    let d = DiamondRef::spanned(Point::origin(3), y.clone(), &face, Some(theta.clone())).unwrap();
    assert!(
        diamond_query(&diag_point(&[0.5, 0.0, -0.5]), &d, 1e-9)
            .unwrap()
            .member
    );
    assert!(diamond_query(&Point::origin(3), &d, 1e-9).unwrap().member);
    assert!(diamond_query(&y, &d, 1e-9).unwrap().member);

    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let mut checked = 0;
    while checked < 100 {
        let a = sorted_random(&mut rng, 3);
        let full = CartanVector::new(a.clone()).unwrap();
        if !theta_membership(&full, &theta).unwrap().0 {
            continue;
        }
        let outer =
            DiamondRef::spanned(Point::origin(3), diag_point(&a), &face, Some(theta.clone()))
                .unwrap();
        let (s, t) = {
            let (u, v) = (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
            (f64::min(u, v), f64::max(u, v))
        };
        if t - s < 1e-3 {
            continue;
        }
        let xs: Vec<f64> = a.iter().map(|v| v * s).collect();
        let ys: Vec<f64> = a.iter().map(|v| v * t).collect();
        let inner =
            DiamondRef::spanned(diag_point(&xs), diag_point(&ys), &face, Some(theta.clone()))
                .unwrap();
        for _ in 0..20 {
            let p: Vec<f64> = xs
                .iter()
                .zip(&linalg::random_trace_zero(&mut rng, 3, 1.0))
                .map(|(x, e)| x + e)
                .collect();
            let p = diag_point(&p);
            if diamond_query(&p, &inner, 1e-9).unwrap().member {
                assert!(diamond_query(&p, &outer, 1e-9).unwrap().member);
            }
        }
        checked += 1;
    }
}

#[test]
fn parallel_set_distance_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let face = FaceType::new(3, [1]).unwrap();
    let std = ParallelSetRef::standard(face.clone());
    assert!(parallel_set_distance(&Point::origin(3), &std).unwrap().1 < 1e-12);
    for _ in 0..50 {
        let h = linalg::random_sl(&mut rng, 3, 0.8);
        let minus =
            Flag::from_basis(face.iota(), &Mat::from_fn(3, 3, |r, c| h[(r, 2 - c)])).unwrap();
        let plus = Flag::from_basis(face.clone(), &h).unwrap();
        let set = ParallelSetRef::new(minus, plus).unwrap();
        let on = point_of(
            &h,
            &advance(
                &Mat::identity(3, 3),
                &block_translation(&mut rng, &face, 0.0),
            ),
        );
        let (_, refined) = parallel_set_distance(&on, &set).unwrap();
        assert!(refined < 1e-8, "{refined}");
        let push = GroupElement::new(linalg::random_sl(&mut rng, 3, 0.3)).unwrap();
        let off = push.act(&on);
        let (upper, refined) = parallel_set_distance(&off, &set).unwrap();
        let witness = distance(&off, &on).unwrap();
        assert!(refined <= witness + 1e-9 && refined <= upper + 1e-12);
    }
}

fn diagonal_segment(from: &[f64], to: &[f64], steps: usize) -> Vec<Point> {
    (0..=steps)
        .map(|k| {
            let t = k as f64 / steps as f64;
            diag_point(
                &from
                    .iter()
                    .zip(to)
                    .map(|(a, b)| a + t * (b - a))
                    .collect::<Vec<_>>(),
            )
        })
        .collect()
}

#[test]
fn finsler_examples() {
    let face = FaceType::full(3);
    let geodesic = diagonal_segment(&[0.0; 3], &[1.0, 0.0, -1.0], 8);
    assert!(finsler_verify(&geodesic, &face, None, 1e-7)
        .unwrap()
        .passed());

    let mut broken = diagonal_segment(&[0.0; 3], &[1.0, 0.2, -1.2], 4);
    broken.extend(
        diagonal_segment(&[1.0, 0.2, -1.2], &[1.6, 0.3, -1.9], 4)
            .into_iter()
            .skip(1),
    );
    assert!(finsler_verify(&broken, &face, None, 1e-7).unwrap().passed());

    let mut pushed = geodesic.clone();
    let k =
        GroupElement::rotation(linalg::sym_exp(&Mat::zeros(3, 3)) * rotation_about(0.05)).unwrap();
    pushed[4] = k.act(&pushed[4]);
    assert!(!finsler_verify(&pushed, &face, None, 1e-7).unwrap().passed());
}

fn rotation_about(angle: f64) -> Mat {
    let (s, c) = angle.sin_cos();
    Mat::from_row_slice(3, 3, &[c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0])
}

/// Θ-regular broken geodesic in the parallel set of a random pair of
/// opposite flags of type `{1}`: consecutive block translations.
fn finsler_path(rng: &mut ChaCha8Rng, theta: &ThetaSpec, legs: usize) -> Vec<Point> {
    let face = &theta.face;
    let h = linalg::random_sl(rng, 3, 0.8);
    let mut r = Mat::identity(3, 3);
    let mut path = vec![point_of(&h, &r)];
    for _ in 0..legs {
        let b = loop {
            let b = block_translation(rng, face, 0.5);
            let (vals, _) = linalg::sym_eigen_desc(&b);
            if theta_membership(&CartanVector::new(vals).unwrap(), theta)
                .unwrap()
                .0
            {
                break b;
            }
        };
        for _ in 0..3 {
            r = advance(&r, &(&b / 3.0));
            path.push(point_of(&h, &r));
        }
    }
    path
}

#[test]
fn tau_projection_of_finsler_geodesics_is_additive() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let face = FaceType::new(3, [1]).unwrap();
    let theta = ThetaSpec::new(face.clone(), 0.3).unwrap();
    let sine = common::theta_boundary_angle(&theta).sin();
    for _ in 0..30 {
        let path = finsler_path(&mut rng, &theta, 3);
        let report = finsler_verify(&path, &face, None, 1e-6).unwrap();
        assert!(report.passed(), "{report:?}");
        let (deltas, taus) = delta_projection(&path, &face).unwrap();
        for i in 0..path.len() {
            for j in i..path.len() {
                let step = taumod_distance(&path[i], &path[j], &face).unwrap();
                let sum: Vec<f64> = taus[i]
                    .coords()
                    .iter()
                    .zip(step.coords())
                    .map(|(a, b)| a + b)
                    .collect();
                let residual = taus[j]
                    .coords()
                    .iter()
                    .zip(&sum)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                assert!(residual < 1e-7, "{residual}");
                let lhs = deltas[i].distance(&deltas[j]);
                let rhs = distance(&path[i], &path[j]).unwrap();
                assert!(lhs >= sine * rhs - 1e-7, "{lhs} < {sine}·{rhs}");
            }
        }
    }
}

#[test]
fn tau_distance_ratio_is_bounded_by_the_theta_angle() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let face = FaceType::new(3, [1]).unwrap();
    let theta = ThetaSpec::new(face.clone(), 0.2).unwrap();
    let sine = common::theta_boundary_angle(&theta).sin();
    let mut count = 0;
    while count < 500 {
        let x = random_point(&mut rng, 3, 1.5);
        let y = random_point(&mut rng, 3, 1.5);
        let d = cartan_vector(&x, &y).unwrap();
        if !theta_membership(&d, &theta).unwrap().0 {
            continue;
        }
        let ratio = taumod_distance(&x, &y, &face).unwrap().norm() / d.norm();
        assert!(
            ratio >= sine - 1e-9 && ratio <= 1.0 + 1e-12,
            "{ratio} vs {sine}"
        );
        count += 1;
    }
}

fn spd_strategy(n: usize) -> impl Strategy<Value = Point> {
    any::<u64>().prop_map(move |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_point(&mut rng, n, 2.0)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn reversing_a_pair_applies_iota(x in spd_strategy(3), y in spd_strategy(3)) {
        let forward = cartan_vector(&x, &y).unwrap();
        let backward = cartan_vector(&y, &x).unwrap();
        let diff = iota(&forward).coords().iter().zip(backward.coords()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(diff < 1e-9);
    }

    #[test]
    fn distance_is_the_norm_of_the_cartan_vector(x in spd_strategy(4), y in spd_strategy(4)) {
        prop_assert!((distance(&x, &y).unwrap() - cartan_vector(&x, &y).unwrap().norm()).abs() < 1e-12);
    }

    #[test]
    fn cartan_vectors_are_invariant(x in spd_strategy(3), y in spd_strategy(3), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = GroupElement::new(linalg::random_sl(&mut rng, 3, 1.0)).unwrap();
        let a = cartan_vector(&x, &y).unwrap();
        let b = cartan_vector(&q.act(&x), &q.act(&y)).unwrap();
        prop_assert!(a.distance(&b) < 1e-8);
    }

    #[test]
    fn tau_distance_never_exceeds_the_delta_distance(x in spd_strategy(3), y in spd_strategy(3)) {
        for face in FaceType::all(3) {
            let t = taumod_distance(&x, &y, &face).unwrap();
            prop_assert!(t.norm() <= cartan_vector(&x, &y).unwrap().norm() + 1e-12);
        }
    }
}
