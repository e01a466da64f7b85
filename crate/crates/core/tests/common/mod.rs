#![allow(dead_code)]

use anosov_core::linalg::Mat;
use anosov_core::subgroup::FreeGroupPresentation;
use anosov_core::GroupElement;

pub fn element(rows: &[f64]) -> GroupElement {
    let n = (rows.len() as f64).sqrt() as usize;
    GroupElement::new(Mat::from_row_slice(n, n, rows)).unwrap()
}

pub fn rot(theta: f64) -> Mat {
    let (s, c) = theta.sin_cos();
    Mat::from_row_slice(2, 2, &[c, -s, s, c])
}

pub fn schottky_pair() -> (Mat, Mat) {
    let g = Mat::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 0.25]);
    let q = rot(std::f64::consts::FRAC_PI_4);
    let h = &q * &g * q.transpose();
    (g, h)
}

pub fn sl2_schottky() -> FreeGroupPresentation {
    let (g, h) = schottky_pair();
    FreeGroupPresentation::new(vec![
        GroupElement::new(g).unwrap(),
        GroupElement::new(h).unwrap(),
    ])
    .unwrap()
}

/// Symmetric square of a 2x2 matrix, in the orthonormal monomial basis.
pub fn sym2(m: &Mat) -> Mat {
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let r = std::f64::consts::SQRT_2;
    Mat::from_row_slice(
        3,
        3,
        &[
            a * a,
            r * a * b,
            b * b,
            r * a * c,
            a * d + b * c,
            r * b * d,
            c * c,
            r * c * d,
            d * d,
        ],
    )
}

pub fn sym2_schottky() -> FreeGroupPresentation {
    let (g, h) = schottky_pair();
    FreeGroupPresentation::new(vec![
        GroupElement::normalized(sym2(&g)).unwrap(),
        GroupElement::normalized(sym2(&h)).unwrap(),
    ])
    .unwrap()
}

pub fn sanov() -> FreeGroupPresentation {
    FreeGroupPresentation::new(vec![
        element(&[1.0, 2.0, 0.0, 1.0]),
        element(&[1.0, 0.0, 2.0, 1.0]),
    ])
    .unwrap()
}

pub fn shared_fixed_point() -> FreeGroupPresentation {
    FreeGroupPresentation::new(vec![
        element(&[4.0, 0.0, 0.0, 0.25]),
        element(&[4.0, 1.0, 0.0, 0.25]),
    ])
    .unwrap()
}

/// Smallest angle between unit directions of `Θ_ε` and the face boundary
/// `∂_τ σ_mod` in the two-dimensional chamber of `SL(3)`, by dense sampling
/// of the unit circle of the trace-zero plane.
pub fn theta_boundary_angle(theta: &anosov_core::ThetaSpec) -> f64 {
    use anosov_core::weyl::theta_membership;
    use anosov_core::CartanVector;
    assert_eq!(theta.face.n(), 3);
    let ea = [1.0 / 2f64.sqrt(), -1.0 / 2f64.sqrt(), 0.0];
    let eb = [1.0 / 6f64.sqrt(), 1.0 / 6f64.sqrt(), -2.0 / 6f64.sqrt()];
    let steps = 200_000;
    let mut inside = Vec::new();
    let mut boundary = Vec::new();
    for k in 0..steps {
        let t = std::f64::consts::TAU * k as f64 / steps as f64;
        let v: Vec<f64> = (0..3).map(|i| t.cos() * ea[i] + t.sin() * eb[i]).collect();
        if !v.windows(2).all(|w| w[0] >= w[1] - 1e-15) {
            continue;
        }
        let d = CartanVector::new(v.clone()).unwrap();
        if theta.face.walls().iter().any(|&i| d.gap(i).abs() < 1e-4) {
            boundary.push(v.clone());
        }
        if theta_membership(&d, theta).unwrap().0 {
            inside.push(v);
        }
    }
    let mut best = f64::INFINITY;
    for u in &inside {
        for w in &boundary {
            let c: f64 = u.iter().zip(w).map(|(a, b)| a * b).sum();
            best = best.min(c.clamp(-1.0, 1.0).acos());
        }
    }
    best
}
