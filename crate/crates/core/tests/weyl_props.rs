//! Chamber geometry against brute-force oracles.

use std::f64::consts::SQRT_2;

use anosov_core::weyl::{
    face_boundary_distance, iota, project_to_face_sector, sort_to_chamber, star_violation,
    theta_membership,
};
use anosov_core::{CartanVector, FaceType, ModelVector, ThetaSpec};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cv(c: &[f64]) -> CartanVector {
    CartanVector::new(c.to_vec()).unwrap()
}

fn random_chamber(rng: &mut ChaCha8Rng, n: usize) -> CartanVector {
    let v: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
    let mean = v.iter().sum::<f64>() / n as f64;
    let v: Vec<f64> = v.iter().map(|x| x - mean).collect();
    sort_to_chamber(&ModelVector::new(v).unwrap()).0
}

fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in all_permutations(n - 1) {
        for slot in 0..n {
            let mut q = p.clone();
            q.insert(slot, n - 1);
            out.push(q);
        }
    }
    out
}

/// `ι(δ)` as the unique chamber element of the Weyl orbit of `-δ`, found by
/// trying every permutation.
fn iota_brute_force(delta: &[f64]) -> Vec<f64> {
    let neg: Vec<f64> = delta.iter().map(|x| -x).collect();
    all_permutations(delta.len())
        .into_iter()
        .map(|p| p.iter().map(|&i| neg[i]).collect::<Vec<f64>>())
        .find(|v| v.windows(2).all(|w| w[0] >= w[1]))
        .unwrap()
}

/// Dykstra's alternating projections onto `{a_wall = a_wall+1}` intersected
/// with the chamber `a_1 ≥ … ≥ a_n`.
fn wall_face_projection(delta: &[f64], wall: usize) -> Vec<f64> {
    let n = delta.len();
    let mut x = delta.to_vec();
    let sets = n;
    let mut corrections = vec![vec![0.0; n]; sets];
    for _ in 0..20_000 {
        for s in 0..sets {
            let y: Vec<f64> = x.iter().zip(&corrections[s]).map(|(a, b)| a + b).collect();
            let mut p = y.clone();
            if s == 0 {
                let m = 0.5 * (p[wall - 1] + p[wall]);
                p[wall - 1] = m;
                p[wall] = m;
            } else if p[s - 1] < p[s] {
                let m = 0.5 * (p[s - 1] + p[s]);
                p[s - 1] = m;
                p[s] = m;
            }
            corrections[s] = y.iter().zip(&p).map(|(a, b)| a - b).collect();
            x = p;
        }
    }
    x
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

#[test]
fn sorting_examples() {
    let (c, perm) = sort_to_chamber(&ModelVector::new(vec![0.0, -1.0, 1.0]).unwrap());
    assert_eq!(c.coords(), &[1.0, 0.0, -1.0]);
    assert_eq!(perm, vec![2, 0, 1]);
    let (z, id) = sort_to_chamber(&ModelVector::new(vec![0.0; 3]).unwrap());
    assert_eq!(z.coords(), &[0.0; 3]);
    assert_eq!(id, vec![0, 1, 2]);
}

#[test]
fn iota_examples() {
    assert_eq!(iota(&cv(&[1.0, 0.0, -1.0])).coords(), &[1.0, 0.0, -1.0]);
    assert_eq!(iota(&cv(&[2.0, -1.0, -1.0])).coords(), &[1.0, 1.0, -2.0]);
    assert_eq!(FaceType::new(4, [1]).unwrap().iota().walls(), &[3]);
}

#[test]
fn iota_matches_permutation_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in 2..=5 {
        for _ in 0..200 {
            let d = random_chamber(&mut rng, n);
            let expected = iota_brute_force(d.coords());
            assert!(euclid(iota(&d).coords(), &expected) < 1e-12);
        }
    }
}

#[test]
fn face_boundary_distance_examples() {
    let i1 = FaceType::new(3, [1]).unwrap();
    assert!((face_boundary_distance(&cv(&[2.0, -1.0, -1.0]), &i1) - 3.0 / SQRT_2).abs() < 1e-12);
    assert!(
        (face_boundary_distance(&cv(&[1.0, 0.0, -1.0]), &FaceType::full(3)) - 1.0 / SQRT_2).abs()
            < 1e-12
    );
    assert_eq!(face_boundary_distance(&cv(&[1.0, 1.0, -2.0]), &i1), 0.0);
}

#[test]
fn face_boundary_distance_matches_projection_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for k in 0..1000 {
        let n = 3 + k % 2;
        let d = random_chamber(&mut rng, n);
        let faces = FaceType::all(n);
        let face = &faces[k % faces.len()];
        let oracle = face
            .walls()
            .iter()
            .map(|&w| euclid(d.coords(), &wall_face_projection(d.coords(), w)))
            .fold(f64::INFINITY, f64::min);
        let got = face_boundary_distance(&d, face);
        assert!(
            (got - oracle).abs() < 1e-9,
            "{d:?} {face}: {got} vs {oracle}"
        );
    }
}

#[test]
fn sector_projection_example() {
    let p = project_to_face_sector(&cv(&[1.0, 0.0, -1.0]), &FaceType::new(3, [1]).unwrap());
    assert!(euclid(p.coords(), &[1.0, -0.5, -0.5]) < 1e-15);
    let inside = cv(&[2.0, -1.0, -1.0]);
    let q = project_to_face_sector(&inside, &FaceType::new(3, [1]).unwrap());
    assert!(euclid(q.coords(), inside.coords()) < 1e-15);
}

#[test]
fn theta_examples() {
    let theta = ThetaSpec::new(FaceType::full(3), 0.1).unwrap();
    let (member, margin) = theta_membership(&cv(&[1.0, 0.0, -1.0]), &theta).unwrap();
    assert!(member);
    assert!((margin - (1.0 / SQRT_2 - 0.1)).abs() < 1e-12);
    let (member, _) = theta_membership(&cv(&[1.0, 1.0, -2.0]), &theta).unwrap();
    assert!(!member);
    assert!(theta_membership(&CartanVector::zero(3), &theta).is_err());
}

/// Block-wise permutations of a `Θ`-regular chamber vector.
fn symmetrized_theta_point(rng: &mut ChaCha8Rng, theta: &ThetaSpec) -> Vec<f64> {
    let n = theta.face.n();
    loop {
        let d = random_chamber(rng, n);
        if d.norm() < 1e-6 || !theta_membership(&d, theta).unwrap().0 {
            continue;
        }
        let mut v = d.coords().to_vec();
        for b in theta.face.blocks() {
            let block = &mut v[b];
            for i in (1..block.len()).rev() {
                block.swap(i, rng.random_range(0..=i));
            }
        }
        return v;
    }
}

#[test]
fn theta_cones_are_weyl_convex_on_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (n, walls, frac) in [
        (3, vec![1], 0.3),
        (3, vec![1, 2], 0.5),
        (4, vec![2], 0.4),
        (4, vec![1, 3], 0.3),
    ] {
        let face = FaceType::new(n, walls).unwrap();
        let theta = ThetaSpec::new(face.clone(), frac * ThetaSpec::max_gap(&face)).unwrap();
        for _ in 0..1000 {
            let u = symmetrized_theta_point(&mut rng, &theta);
            let v = symmetrized_theta_point(&mut rng, &theta);
            let mid: Vec<f64> = u.iter().zip(&v).map(|(a, b)| 0.5 * (a + b)).collect();
            assert!(star_violation(&mid, &face) < 1e-12);
            let (sorted, _) = sort_to_chamber(&ModelVector::new(mid).unwrap());
            if sorted.norm() > 1e-9 {
                let (member, margin) = theta_membership(&sorted, &theta).unwrap();
                assert!(member, "margin {margin}");
            }
        }
    }
}

fn chamber_strategy(n: usize) -> impl Strategy<Value = CartanVector> {
    proptest::collection::vec(-5.0f64..5.0, n).prop_map(|v| {
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let v: Vec<f64> = v.iter().map(|x| x - mean).collect();
        sort_to_chamber(&ModelVector::new(v).unwrap()).0
    })
}

fn face_strategy(n: usize) -> impl Strategy<Value = FaceType> {
    let faces = FaceType::all(n);
    (0..faces.len()).prop_map(move |i| faces[i].clone())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn iota_is_an_involution_preserving_the_chamber(d in chamber_strategy(4), face in face_strategy(4)) {
        let i = iota(&d);
        prop_assert!(i.coords().windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(euclid(iota(&i).coords(), d.coords()) < 1e-15);
        prop_assert_eq!(face.iota().iota(), face);
    }

    #[test]
    fn sorting_is_idempotent(v in proptest::collection::vec(-5.0f64..5.0, 4)) {
        let mean = v.iter().sum::<f64>() / 4.0;
        let v: Vec<f64> = v.iter().map(|x| x - mean).collect();
        let (once, _) = sort_to_chamber(&ModelVector::new(v).unwrap());
        let (twice, perm) = sort_to_chamber(&once.as_model());
        prop_assert_eq!(once.coords(), twice.coords());
        prop_assert_eq!(perm, vec![0, 1, 2, 3]);
    }

    #[test]
    fn boundary_distance_vanishes_exactly_on_kept_walls(d in chamber_strategy(4), face in face_strategy(4), wall in 0usize..3) {
        let w = face.walls()[wall % face.walls().len()];
        let mut c = d.coords().to_vec();
        let m = 0.5 * (c[w] + c[w - 1]);
        c[w] = m;
        c[w - 1] = m;
        let mut sorted = c.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let on_wall = CartanVector::new(sorted).unwrap();
        let zero_gap = face.walls().iter().any(|&i| on_wall.gap(i) == 0.0);
        prop_assert_eq!(face_boundary_distance(&on_wall, &face) == 0.0, zero_gap);
        let positive = face.walls().iter().all(|&i| d.gap(i) > 0.0);
        prop_assert_eq!(face_boundary_distance(&d, &face) > 0.0, positive);
    }

    #[test]
    fn sector_projection_is_idempotent_and_lipschitz(a in chamber_strategy(4), b in chamber_strategy(4), face in face_strategy(4)) {
        let pa = project_to_face_sector(&a, &face);
        let pb = project_to_face_sector(&b, &face);
        let paa = project_to_face_sector(&CartanVector::new(pa.coords().to_vec()).unwrap(), &face);
        prop_assert!(euclid(paa.coords(), pa.coords()) < 1e-12);
        prop_assert!(pa.distance(&pb) <= euclid(a.coords(), b.coords()) + 1e-12);
        prop_assert!(pa.norm() <= a.norm() + 1e-12);
    }

    #[test]
    fn theta_verdict_is_scale_invariant(d in chamber_strategy(3), t in 0.01f64..100.0, frac in 0.05f64..0.95) {
        prop_assume!(d.norm() > 1e-3);
        let theta = ThetaSpec::new(FaceType::full(3), frac * ThetaSpec::max_gap(&FaceType::full(3))).unwrap();
        let (m1, g1) = theta_membership(&d, &theta).unwrap();
        let (m2, g2) = theta_membership(&d.scaled(t), &theta).unwrap();
        prop_assert_eq!(m1, m2);
        prop_assert!((g1 - g2).abs() < 1e-12);
    }
}
