//! Finite-data verdicts for sequences in `G` and `X`: regularity, uniform
//! regularity, pureness, contraction, flag convergence and conicality.
//!
//! Every verdict is computed from explicit thresholds which are returned with
//! the report.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flags::{
    act_on_flag, attractive_flag, flag_distance, least_squares, transversality_margin, Flag,
};
use crate::linalg;
use crate::symmspace::centred::{cone_side, project_origin};
use crate::symmspace::{GroupElement, ParallelSetRef, Point};
use crate::weyl::{face_boundary_distance, project_to_face_sector, CartanVector, FaceType};

/// Thresholds for [`classify_sequence`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SequenceThresholds {
    /// Number of trailing terms examined; 0 means the last half.
    pub window: usize,
    /// Minimal increase of the face margin across the window.
    pub growth_min: f64,
    /// Minimal ratio `margin / norm` across the window for uniformity.
    pub ratio_floor: f64,
    /// Maximal spread across the window of the distance to a face sector
    /// that still counts as bounded.
    pub bounded_spread: f64,
}

impl Default for SequenceThresholds {
    fn default() -> Self {
        Self {
            window: 0,
            growth_min: 1.0,
            ratio_floor: 0.05,
            bounded_spread: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SequenceReport {
    pub face: FaceType,
    pub face_margins: Vec<f64>,
    pub norms: Vec<f64>,
    pub regular_margin_slope: f64,
    pub margin_growth: f64,
    pub uniform_ratio_min: f64,
    pub regular: bool,
    pub uniform: bool,
    pub detected_pure_face: Option<FaceType>,
    pub thresholds: SequenceThresholds,
}

fn tail_start(len: usize, window: usize) -> usize {
    let w = if window == 0 {
        len.div_ceil(2)
    } else {
        window.min(len)
    };
    len - w.max(2).min(len)
}

fn growth(values: &[f64]) -> f64 {
    values.last().copied().unwrap_or(0.0) - values.first().copied().unwrap_or(0.0)
}

fn slope(values: &[f64]) -> f64 {
    let x: Vec<f64> = (0..values.len()).map(|i| i as f64).collect();
    least_squares(&x, values).0
}

/// Windowed regularity verdicts for a sequence of vector-valued distances.
pub fn classify_sequence(
    deltas: &[CartanVector],
    face: &FaceType,
    thresholds: SequenceThresholds,
) -> Result<SequenceReport> {
    if deltas.len() < 3 {
        return Err(Error::InvalidInput(
            "at least three terms are needed".into(),
        ));
    }
    if let Some(d) = deltas.iter().find(|d| d.dim() != face.n()) {
        return Err(Error::DimensionMismatch {
            expected: face.n(),
            found: d.dim(),
        });
    }
    let start = tail_start(deltas.len(), thresholds.window);
    let margins: Vec<f64> = deltas
        .iter()
        .map(|d| face_boundary_distance(d, face))
        .collect();
    let norms: Vec<f64> = deltas.iter().map(|d| d.norm()).collect();
    let tail = &margins[start..];
    let margin_growth = growth(tail);
    let regular_margin_slope = slope(tail);
    let regular = margin_growth >= thresholds.growth_min && regular_margin_slope > 0.0;
    let uniform_ratio_min = margins[start..]
        .iter()
        .zip(&norms[start..])
        .map(|(m, n)| if *n > 0.0 { m / n } else { 0.0 })
        .fold(f64::INFINITY, f64::min)
        .min(1.0);
    let uniform = regular && uniform_ratio_min >= thresholds.ratio_floor;
    let detected_pure_face = detect_pure_face(&deltas[start..], thresholds);
    Ok(SequenceReport {
        face: face.clone(),
        face_margins: margins,
        norms,
        regular_margin_slope,
        margin_growth,
        uniform_ratio_min,
        regular,
        uniform,
        detected_pure_face,
        thresholds,
    })
}

/// Smallest face type (by inclusion, then lexicographically) whose sector
/// stays at bounded distance from the tail while its own margins grow.
fn detect_pure_face(tail: &[CartanVector], thresholds: SequenceThresholds) -> Option<FaceType> {
    let n = tail[0].dim();
    FaceType::all(n).into_iter().find(|face| {
        let dist: Vec<f64> = tail
            .iter()
            .map(|d| d.as_model().distance(&project_to_face_sector(d, face)))
            .collect();
        let spread = dist.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - dist.iter().cloned().fold(f64::INFINITY, f64::min);
        let margins: Vec<f64> = tail
            .iter()
            .map(|d| face_boundary_distance(d, face))
            .collect();
        spread <= thresholds.bounded_spread && growth(&margins) >= thresholds.growth_min
    })
}

/// Options for [`detect_contraction`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionOptions {
    pub samples: usize,
    /// Sampled flags keep at least this transversality to `τ_-`.
    pub transversality_floor: f64,
    /// Final worst distance to `τ_+` required for a positive verdict.
    pub threshold: f64,
    pub seed: u64,
}

impl Default for ContractionOptions {
    fn default() -> Self {
        Self {
            samples: 100,
            transversality_floor: 0.05,
            threshold: 1e-2,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ContractionReport {
    pub plus: Flag,
    pub minus: Flag,
    /// Worst `flag_distance(g_n·F_j, τ_+)` over the samples, per term.
    pub max_distance: Vec<f64>,
    pub contracting: bool,
    pub options: ContractionOptions,
}

/// Random flag of the given type with transversality at least `floor` to
/// `opposite`.
pub fn sample_transverse_flag(rng: &mut ChaCha8Rng, opposite: &Flag, floor: f64) -> Result<Flag> {
    let face = opposite.face().iota();
    for _ in 0..10_000 {
        let f = Flag::new(face.clone(), linalg::random_rotation(rng, face.n()))?;
        if transversality_margin(&f, opposite)? >= floor {
            return Ok(f);
        }
    }
    Err(Error::InvalidInput(format!(
        "no flag found with transversality above {floor}"
    )))
}

/// Samples flags transverse to the repelling flag of the last element and
/// follows how close `g_n` moves them to its attracting flag.
pub fn detect_contraction(
    gs: &[GroupElement],
    face: &FaceType,
    opts: ContractionOptions,
) -> Result<ContractionReport> {
    if gs.len() < 2 {
        return Err(Error::InvalidInput(
            "at least two elements are needed".into(),
        ));
    }
    let last = attractive_flag(gs.last().expect("non-empty"), face)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let samples: Vec<Flag> = (0..opts.samples)
        .map(|_| sample_transverse_flag(&mut rng, &last.minus, opts.transversality_floor))
        .collect::<Result<_>>()?;
    let max_distance: Vec<f64> = gs
        .par_iter()
        .map(|g| {
            samples
                .iter()
                .map(|f| flag_distance(&act_on_flag(g, f), &last.plus).unwrap_or(f64::INFINITY))
                .fold(0.0, f64::max)
        })
        .collect();
    let start = tail_start(max_distance.len(), 0);
    let tail = &max_distance[start..];
    let decaying = tail.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-12);
    let contracting = decaying && *tail.last().expect("non-empty") <= opts.threshold;
    Ok(ContractionReport {
        plus: last.plus,
        minus: last.minus,
        max_distance,
        contracting,
        options: opts,
    })
}

/// Cauchy diagnostics of a sequence of attracting flags.
#[derive(Debug, Clone)]
pub struct CauchyDiagnostics {
    /// `flag_distance(τ_n, τ_{n+1})` over the regular terms.
    pub residuals: Vec<f64>,
    pub tail_max: f64,
    pub converged: bool,
    pub tolerance: f64,
}

/// Options for [`flag_limit`].
#[derive(Debug, Clone, Copy)]
pub struct FlagLimitOptions {
    pub tolerance: f64,
    /// Flags closer than this are put in one cluster.
    pub cluster_radius: f64,
}

impl Default for FlagLimitOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            cluster_radius: 0.1,
        }
    }
}

/// Greedy clustering of flags by `flag_distance`.
pub fn cluster_flags(flags: &[Flag], radius: f64) -> Vec<Flag> {
    let mut centres: Vec<Flag> = Vec::new();
    for f in flags {
        let close = centres
            .iter()
            .any(|c| flag_distance(c, f).map(|d| d < radius).unwrap_or(false));
        if !close {
            centres.push(f.clone());
        }
    }
    centres
}

/// Limit of the attracting flags `τ_+(g_n)`.
///
/// Returns the last attracting flag with Cauchy residuals; when the tail of
/// the sequence visits several separated clusters the result is
/// [`Error::Inconclusive`] carrying the cluster representatives.
pub fn flag_limit(
    gs: &[GroupElement],
    face: &FaceType,
    opts: FlagLimitOptions,
) -> Result<(Flag, CauchyDiagnostics)> {
    let Some(last) = gs.last() else {
        return Err(Error::InvalidInput("empty sequence".into()));
    };
    attractive_flag(last, face)?;
    let flags: Vec<Flag> = gs
        .iter()
        .filter_map(|g| attractive_flag(g, face).ok().map(|a| a.plus))
        .collect();
    let residuals: Vec<f64> = flags
        .windows(2)
        .map(|w| flag_distance(&w[0], &w[1]).expect("same type"))
        .collect();
    let start = tail_start(flags.len(), 0);
    let clusters = cluster_flags(&flags[start..], opts.cluster_radius);
    if clusters.len() > 1 {
        return Err(Error::Inconclusive { clusters });
    }
    let tail_max = residuals[start.min(residuals.len())..]
        .iter()
        .cloned()
        .fold(0.0, f64::max);
    let converged = tail_max < opts.tolerance;
    let diag = CauchyDiagnostics {
        residuals,
        tail_max,
        converged,
        tolerance: opts.tolerance,
    };
    Ok((flags.last().expect("non-empty").clone(), diag))
}

/// Options for [`conical_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConicalOptions {
    /// Bound on the distance of the orbit to the cone.
    pub rho: f64,
    /// Floor on the transversality of `g_n⁻¹τ` to the backward limit flag.
    pub transversality_floor: f64,
    pub match_tolerance: f64,
}

impl Default for ConicalOptions {
    fn default() -> Self {
        Self {
            rho: 2.0,
            transversality_floor: 1e-3,
            match_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConicalReport {
    /// Distance surrogate from `g_n·x` to `V(x, st(τ))`, per term.
    pub distances: Vec<f64>,
    /// Transversality of `g_n⁻¹τ` to the backward limit flag, per term.
    pub transversality: Vec<f64>,
    pub geometric: bool,
    pub dynamical: bool,
    pub options: ConicalOptions,
}

impl ConicalReport {
    pub fn conical(&self) -> bool {
        self.geometric && self.dynamical
    }
}

/// Distance surrogate from `g·o` to `V(o, st(τ))`, computed after
/// translating by `g⁻¹`: the cone becomes `V(g⁻¹o, st(g⁻¹τ))` inside the
/// parallel set `P(g⁻¹τ^⊥, g⁻¹τ)` and the test point becomes `o`.
///
/// `pulled` is `g⁻¹τ` and `pulled_opposite` is `g⁻¹τ^⊥`; callers that know
/// `g⁻¹τ` more accurately than by applying `g⁻¹` (which expands errors near
/// `τ`) pass it here.
pub fn cone_distance_centred(
    g: &GroupElement,
    pulled: &Flag,
    pulled_opposite: &Flag,
    match_tol: f64,
) -> Result<f64> {
    let set = ParallelSetRef::new(pulled_opposite.clone(), pulled.clone())?;
    let proj = project_origin(&set)?;
    let side = cone_side(g, pulled, &proj.representative, &set, true, match_tol)?;
    Ok(proj.distance + side.violation)
}

/// Geometric and dynamical tests of conical convergence of `g_n` to `τ`,
/// seen from `x`.
///
/// Geometric: the distance surrogate from `g_n·x` to `V(x, st(τ))` stays
/// below `rho`. Dynamical: `g_n⁻¹τ` stays transverse, with margin above the
/// floor, to the attracting flag of `g_n⁻¹` of the opposite type.
pub fn conical_check(
    gs: &[GroupElement],
    tau: &Flag,
    x: &Point,
    opts: ConicalOptions,
) -> Result<ConicalReport> {
    let h = x.representative()?;
    let hi = h.inverse();
    let tau_local = act_on_flag(&hi, tau);
    let opposite = tau_local.orthogonal_complement();
    let rows: Vec<(f64, f64)> = gs
        .par_iter()
        .map(|g| {
            let g = hi.compose(g).compose(&h);
            let gi = g.inverse();
            let pulled = act_on_flag(&gi, &tau_local);
            let pulled_opposite = act_on_flag(&gi, &opposite);
            let d = cone_distance_centred(&g, &pulled, &pulled_opposite, opts.match_tolerance)?;
            let t = match attractive_flag(&gi, &tau_local.face().iota()) {
                Ok(back) => transversality_margin(&pulled, &back.plus)?,
                Err(Error::VanishingGap { .. }) => 0.0,
                Err(e) => return Err(e),
            };
            Ok((d, t))
        })
        .collect::<Result<_>>()?;
    let (distances, transversality): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
    Ok(conical_verdict(distances, transversality, opts))
}

pub(crate) fn conical_verdict(
    distances: Vec<f64>,
    transversality: Vec<f64>,
    opts: ConicalOptions,
) -> ConicalReport {
    let geometric = distances.iter().all(|d| *d <= opts.rho);
    let start = tail_start(transversality.len(), 0);
    let dynamical = transversality[start..]
        .iter()
        .all(|t| *t >= opts.transversality_floor);
    ConicalReport {
        distances,
        transversality,
        geometric,
        dynamical,
        options: opts,
    }
}
