//! The model flat `R^n_0`, the model chamber `Δ` and face types for the Weyl
//! group `S_n` of type `A_{n-1}`.
//!
//! A face type is encoded by the set `I ⊆ {1, …, n-1}` of walls at which a
//! strict gap `a_i > a_{i+1}` is required. The same set lists the dimensions of
//! the partial flags of that type, and its complementary walls split the
//! coordinates into blocks permuted by the stabilizer `W_τ`.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for comparisons of log-singular values.
pub const CHAMBER_TOL: f64 = 1e-9;

const TRACE_TOL: f64 = 1e-10;

fn check_trace_zero(coords: &[f64]) -> Result<()> {
    let scale = coords.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let sum: f64 = coords.iter().sum();
    if sum.abs() > TRACE_TOL * scale * coords.len() as f64 {
        return Err(Error::InvalidInput(format!(
            "coordinates sum to {sum:.3e}, not 0"
        )));
    }
    Ok(())
}

fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// A point of the model flat: a trace-zero real vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelVector {
    coords: Vec<f64>,
}

impl ModelVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        check_trace_zero(&coords)?;
        Ok(Self { coords })
    }

    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        Self { coords }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn norm(&self) -> f64 {
        euclid(&self.coords)
    }

    pub fn distance(&self, other: &ModelVector) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// A point of the model chamber `Δ`: trace-zero and non-increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartanVector {
    coords: Vec<f64>,
}

impl CartanVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        check_trace_zero(&coords)?;
        if coords.windows(2).any(|w| w[0] + CHAMBER_TOL < w[1]) {
            return Err(Error::InvalidInput(
                "coordinates are not non-increasing".into(),
            ));
        }
        Ok(Self { coords })
    }

    /// Wraps coordinates already known to be sorted and trace-free.
    pub(crate) fn from_sorted(coords: Vec<f64>) -> Self {
        debug_assert!(coords.windows(2).all(|w| w[0] + 1e-6 >= w[1]));
        Self { coords }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            coords: vec![0.0; n],
        }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn norm(&self) -> f64 {
        euclid(&self.coords)
    }

    /// Gap `a_i - a_{i+1}` at wall `i` (1-based).
    pub fn gap(&self, wall: usize) -> f64 {
        self.coords[wall - 1] - self.coords[wall]
    }

    pub fn as_model(&self) -> ModelVector {
        ModelVector::from_raw(self.coords.clone())
    }

    pub fn distance(&self, other: &CartanVector) -> f64 {
        self.as_model().distance(&other.as_model())
    }

    pub fn scaled(&self, t: f64) -> CartanVector {
        assert!(t >= 0.0, "only non-negative multiples stay in the chamber");
        CartanVector {
            coords: self.coords.iter().map(|x| x * t).collect(),
        }
    }
}

/// A face type of the model simplex, given by its set of kept walls.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FaceType {
    n: usize,
    kept: Vec<usize>,
}

impl FaceType {
    /// Builds the face type keeping walls `kept` (1-based, each in `1..n`).
    pub fn new(n: usize, kept: impl IntoIterator<Item = usize>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidFace(format!("dimension {n} has no walls")));
        }
        let mut kept: Vec<usize> = kept.into_iter().collect();
        kept.sort_unstable();
        kept.dedup();
        if kept.is_empty() {
            return Err(Error::InvalidFace("no walls kept".into()));
        }
        if let Some(&bad) = kept.iter().find(|&&i| i == 0 || i >= n) {
            return Err(Error::InvalidFace(format!(
                "wall {bad} outside 1..{}",
                n - 1
            )));
        }
        Ok(Self { n, kept })
    }

    /// The full face type, i.e. the chamber itself (full flags).
    pub fn full(n: usize) -> Self {
        Self {
            n,
            kept: (1..n).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Kept walls, ascending; equally the flag dimensions.
    pub fn walls(&self) -> &[usize] {
        &self.kept
    }

    pub fn dims(&self) -> &[usize] {
        &self.kept
    }

    pub fn keeps(&self, wall: usize) -> bool {
        self.kept.binary_search(&wall).is_ok()
    }

    pub fn is_full(&self) -> bool {
        self.kept.len() == self.n - 1
    }

    pub fn iota(&self) -> FaceType {
        let mut kept: Vec<usize> = self.kept.iter().map(|&i| self.n - i).collect();
        kept.sort_unstable();
        FaceType { n: self.n, kept }
    }

    pub fn is_iota_invariant(&self) -> bool {
        self.iota() == *self
    }

    /// `true` when every wall kept by `self` is also kept by `other`.
    pub fn is_contained_in(&self, other: &FaceType) -> bool {
        self.n == other.n && self.kept.iter().all(|i| other.keeps(*i))
    }

    /// Coordinate blocks separated by the kept walls.
    pub fn blocks(&self) -> Vec<Range<usize>> {
        let mut out = Vec::with_capacity(self.kept.len() + 1);
        let mut start = 0;
        for &d in &self.kept {
            out.push(start..d);
            start = d;
        }
        out.push(start..self.n);
        out
    }

    /// Every face type of dimension `n`, ordered by number of walls and then
    /// lexicographically.
    pub fn all(n: usize) -> Vec<FaceType> {
        let mut out = Vec::new();
        for mask in 1u32..(1 << (n - 1)) {
            let kept = (1..n).filter(|i| mask & (1 << (i - 1)) != 0).collect();
            out.push(FaceType { n, kept });
        }
        out.sort_by(|a, b| a.kept.len().cmp(&b.kept.len()).then(a.kept.cmp(&b.kept)));
        out
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        if n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: n,
            });
        }
        Ok(())
    }
}

impl fmt::Display for FaceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.kept.iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// Gap cone `Θ_ε`: unit chamber vectors whose gaps at the kept walls are all
/// at least `ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaSpec {
    pub face: FaceType,
    pub gap: f64,
}

impl ThetaSpec {
    pub fn new(face: FaceType, gap: f64) -> Result<Self> {
        if !(gap > 0.0) {
            return Err(Error::InvalidInput(format!("gap {gap} must be positive")));
        }
        let max = Self::max_gap(&face);
        if gap > max {
            return Err(Error::InvalidInput(format!(
                "gap {gap} exceeds the largest feasible value {max:.6} for {face}"
            )));
        }
        Ok(Self { face, gap })
    }

    /// Largest `ε` for which `Θ_ε` is non-empty: the reciprocal norm of the
    /// centred staircase with unit steps at the kept walls.
    pub fn max_gap(face: &FaceType) -> f64 {
        let n = face.n();
        let mut h = vec![0.0; n];
        let mut level = 0.0;
        for i in (0..n).rev() {
            h[i] = level;
            if i > 0 && face.keeps(i) {
                level += 1.0;
            }
        }
        let mean = h.iter().sum::<f64>() / n as f64;
        1.0 / euclid(&h.iter().map(|x| x - mean).collect::<Vec<_>>())
    }

    /// Sine of the angle between `Θ_ε` and the boundary `∂_τ σ_mod`; this is
    /// the lower bound `‖d_τ‖ ≥ sin α · d` for `Θ`-regular segments.
    pub fn regularity_sine(&self) -> f64 {
        self.gap / SQRT_2
    }
}

/// Sorts a model vector into the chamber. The permutation lists, for each
/// sorted slot, the original coordinate it came from (stable for ties).
pub fn sort_to_chamber(v: &ModelVector) -> (CartanVector, Vec<usize>) {
    let mut perm: Vec<usize> = (0..v.dim()).collect();
    perm.sort_by(|&a, &b| v.coords[b].total_cmp(&v.coords[a]));
    let coords = perm.iter().map(|&i| v.coords[i]).collect();
    (CartanVector { coords }, perm)
}

/// Opposition involution `ι(a)_i = -a_{n+1-i}`.
pub fn iota(delta: &CartanVector) -> CartanVector {
    CartanVector {
        coords: delta.coords.iter().rev().map(|x| -x).collect(),
    }
}

pub fn iota_face(face: &FaceType) -> FaceType {
    face.iota()
}

/// Distance from `δ` to the face boundary `∂_τ Δ`: the smallest kept gap over
/// `√2`.
pub fn face_boundary_distance(delta: &CartanVector, face: &FaceType) -> f64 {
    face.walls()
        .iter()
        .map(|&i| delta.gap(i) / SQRT_2)
        .fold(f64::INFINITY, f64::min)
        .max(0.0)
}

/// Weighted isotonic regression onto non-increasing sequences (pool adjacent
/// violators). Returns the fitted value for every input position.
pub fn pava_non_increasing(values: &[f64], weights: &[f64]) -> Vec<f64> {
    let mut levels: Vec<(f64, f64, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        levels.push((v, w, 1));
        while levels.len() > 1 {
            let (b_val, b_w, b_len) = levels[levels.len() - 1];
            let (a_val, a_w, a_len) = levels[levels.len() - 2];
            if a_val >= b_val {
                break;
            }
            levels.truncate(levels.len() - 2);
            let w = a_w + b_w;
            levels.push(((a_val * a_w + b_val * b_w) / w, w, a_len + b_len));
        }
    }
    levels
        .into_iter()
        .flat_map(|(v, _, len)| std::iter::repeat_n(v, len))
        .collect()
}

/// Nearest point of the sector `V(0, τ_I)` to an arbitrary model vector:
/// block means followed by weighted isotonic regression across blocks.
pub fn project_onto_sector(v: &[f64], face: &FaceType) -> Vec<f64> {
    let blocks = face.blocks();
    let means: Vec<f64> = blocks
        .iter()
        .map(|b| v[b.clone()].iter().sum::<f64>() / b.len() as f64)
        .collect();
    let weights: Vec<f64> = blocks.iter().map(|b| b.len() as f64).collect();
    let fitted = pava_non_increasing(&means, &weights);
    let mut out = vec![0.0; v.len()];
    for (b, value) in blocks.iter().zip(fitted) {
        out[b.clone()].iter_mut().for_each(|x| *x = value);
    }
    out
}

/// Nearest point projection `π_τ: Δ → V(0, τ_I)`.
pub fn project_to_face_sector(delta: &CartanVector, face: &FaceType) -> ModelVector {
    ModelVector::from_raw(project_onto_sector(&delta.coords, face))
}

/// Euclidean distance from `v` to the star `W_τ Δ` of the face, i.e. the union
/// of chambers obtained by permuting coordinates inside blocks.
pub fn star_violation(v: &[f64], face: &FaceType) -> f64 {
    let mut sorted = v.to_vec();
    for b in face.blocks() {
        sorted[b].sort_by(|a, b| b.total_cmp(a));
    }
    let fitted = pava_non_increasing(&sorted, &vec![1.0; v.len()]);
    sorted
        .iter()
        .zip(&fitted)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Tests membership of the direction of `δ` in `Θ_ε`. The margin is the
/// smallest normalized kept gap minus `ε`; membership iff it is non-negative.
pub fn theta_membership(delta: &CartanVector, theta: &ThetaSpec) -> Result<(bool, f64)> {
    theta.face.check_dim(delta.dim())?;
    let norm = delta.norm();
    if norm <= CHAMBER_TOL {
        return Err(Error::ZeroVector);
    }
    let margin = theta
        .face
        .walls()
        .iter()
        .map(|&i| delta.gap(i) / norm - theta.gap)
        .fold(f64::INFINITY, f64::min);
    Ok((margin >= -CHAMBER_TOL / norm, margin))
}
