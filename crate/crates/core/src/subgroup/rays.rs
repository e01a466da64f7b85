//! Boundary rays, limit flags and expansion along rays.
//!
//! The limit flag `β(ζ)` of a ray `ζ = s_1 s_2 …` is approximated by pulling
//! a starting flag back through the letters: `F_M` is the attracting flag of
//! the period for periodic rays (or a random flag otherwise) and
//! `F_k = s_{k+1}·F_{k+1}`. Each step applies one generator, so `F_0 ≈ β(ζ)`
//! and `F_k ≈ w_k⁻¹·β(ζ)` are all accurate even though `w_k⁻¹` expands
//! errors at `β(ζ)` exponentially.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    cluster_flags, cone_distance_centred, conical_verdict, flag_limit, ConicalOptions,
};
use crate::error::{Error, Result};
use crate::flags::{
    act_on_flag, attractive_flag, differential_between, flag_distance, least_squares,
    transversality_margin, Flag,
};
use crate::linalg::{self, Mat};
use crate::report::{PropertyReport, Witness};
use crate::symmspace::GroupElement;
use crate::weyl::FaceType;

use super::words::FreeGroupPresentation;

/// How the letters of a sampled boundary ray are produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RayScheme {
    /// `prefix · period · period · …`
    Periodic { prefix: Vec<i32>, period: Vec<i32> },
    /// `prefix` followed by uniformly random reduced letters.
    Random { prefix: Vec<i32>, seed: u64 },
}

/// A boundary point of the free group, given by a prefix scheme and
/// materialized to a fixed depth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRaySample {
    pub scheme: RayScheme,
    pub letters: Vec<i32>,
}

fn reduced_successor(rng: &mut ChaCha8Rng, rank: usize, previous: Option<i32>) -> i32 {
    loop {
        let k = rng.random_range(1..=rank as i32);
        let l = if rng.random_bool(0.5) { k } else { -k };
        if Some(-l) != previous {
            return l;
        }
    }
}

impl BoundaryRaySample {
    pub fn new(scheme: RayScheme, rank: usize, depth: usize) -> Result<Self> {
        let mut letters: Vec<i32> = Vec::with_capacity(depth);
        match &scheme {
            RayScheme::Periodic { prefix, period } => {
                if period.is_empty() {
                    return Err(Error::InvalidInput("empty period".into()));
                }
                letters.extend(prefix);
                while letters.len() < depth {
                    letters.extend(period);
                }
                let wrap = period[period.len() - 1] == -period[0];
                if wrap && period.len() > 1 {
                    return Err(Error::InvalidInput(format!(
                        "period {period:?} is not cyclically reduced"
                    )));
                }
            }
            RayScheme::Random { prefix, seed } => {
                letters.extend(prefix);
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                while letters.len() < depth {
                    let l = reduced_successor(&mut rng, rank, letters.last().copied());
                    letters.push(l);
                }
            }
        }
        letters.truncate(depth.max(1));
        if letters
            .iter()
            .any(|l| *l == 0 || l.unsigned_abs() as usize > rank)
        {
            return Err(Error::InvalidInput(format!(
                "letters {letters:?} outside rank {rank}"
            )));
        }
        if letters.windows(2).any(|w| w[0] == -w[1]) {
            return Err(Error::InvalidInput(format!(
                "ray {letters:?} is not reduced"
            )));
        }
        Ok(Self { scheme, letters })
    }

    pub fn depth(&self) -> usize {
        self.letters.len()
    }

    /// Index of the first letter where two rays differ, if any within depth.
    pub fn divergence(&self, other: &BoundaryRaySample) -> Option<usize> {
        self.letters
            .iter()
            .zip(&other.letters)
            .position(|(a, b)| a != b)
    }

    /// The period rotated to start at position `k`, for periodic rays with
    /// `k` past the prefix.
    fn period_at(&self, k: usize) -> Option<Vec<i32>> {
        match &self.scheme {
            RayScheme::Periodic { prefix, period } if k >= prefix.len() => {
                let phase = (k - prefix.len()) % period.len();
                Some(
                    period[phase..]
                        .iter()
                        .chain(&period[..phase])
                        .copied()
                        .collect(),
                )
            }
            _ => None,
        }
    }
}

/// Deterministic sample of boundary rays: generator powers first, then
/// period-two words, then random reduced rays.
pub fn sample_rays(
    rank: usize,
    count: usize,
    depth: usize,
    seed: u64,
) -> Result<Vec<BoundaryRaySample>> {
    let letters: Vec<i32> = (1..=rank as i32).flat_map(|k| [k, -k]).collect();
    let mut schemes: Vec<RayScheme> = letters
        .iter()
        .map(|&l| RayScheme::Periodic {
            prefix: vec![],
            period: vec![l],
        })
        .collect();
    for &a in &letters {
        for &b in &letters {
            if a.abs() != b.abs() {
                schemes.push(RayScheme::Periodic {
                    prefix: vec![],
                    period: vec![a, b],
                });
            }
        }
    }
    schemes.truncate(count);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while schemes.len() < count {
        schemes.push(RayScheme::Random {
            prefix: vec![],
            seed: rng.random(),
        });
    }
    schemes
        .into_iter()
        .map(|s| BoundaryRaySample::new(s, rank, depth))
        .collect()
}

/// Attracting flag of a period word, from a high power so that parabolic
/// periods also settle near their fixed flag.
fn period_flag(group: &FreeGroupPresentation, period: &[i32], face: &FaceType) -> Result<Flag> {
    let element = period
        .iter()
        .fold(GroupElement::identity(group.dim()), |acc, &l| {
            acc.compose(group.letter(l))
        });
    Ok(attractive_flag(&element.pow(1 << 20), face)?.plus)
}

/// `F_0, …, F_upto` with `F_k ≈ w_k⁻¹·β(ζ)`, pulled back from the full depth.
pub fn propagate_flags(
    group: &FreeGroupPresentation,
    ray: &BoundaryRaySample,
    face: &FaceType,
    upto: usize,
    seed: u64,
) -> Result<Vec<Flag>> {
    let m = ray.depth();
    if upto > m {
        return Err(Error::InvalidInput(format!(
            "depth {upto} exceeds the ray depth {m}"
        )));
    }
    let mut flag = match ray.period_at(m) {
        Some(period) => period_flag(group, &period, face)?,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Flag::new(face.clone(), linalg::random_rotation(&mut rng, face.n()))?
        }
    };
    let mut out = vec![flag.clone(); upto + 1];
    for k in (0..m).rev() {
        flag = act_on_flag(group.letter(ray.letters[k]), &flag);
        if k <= upto {
            out[k] = flag.clone();
        }
    }
    Ok(out)
}

/// `log ε(w_n⁻¹, β)` for `n = 1..=flags.len()-1`.
///
/// The differential of `w_n⁻¹` at `β` is the product of per-letter
/// differentials between the propagated flags; its smallest singular value is
/// the reciprocal of the norm of the inverse product `K_1 ⋯ K_n`, where `K_k`
/// is the differential of `s_k` from `F_k` to `F_{k-1}`. Norms of products are
/// accumulated with a running log scale.
pub fn log_expansion_along(
    group: &FreeGroupPresentation,
    letters: &[i32],
    flags: &[Flag],
) -> Vec<f64> {
    let mut out = Vec::with_capacity(flags.len().saturating_sub(1));
    let mut product: Option<Mat> = None;
    let mut log_scale = 0.0;
    for k in 1..flags.len() {
        let step = differential_between(group.letter(letters[k - 1]), &flags[k], &flags[k - 1]);
        let next = match product.take() {
            None => step,
            Some(p) => p * step,
        };
        let norm = linalg::op_norm(&next);
        log_scale += norm.ln();
        out.push(-log_scale);
        product = Some(next / norm);
    }
    out
}

fn prefixes(group: &FreeGroupPresentation, letters: &[i32]) -> Vec<GroupElement> {
    let mut acc = GroupElement::identity(group.dim());
    letters
        .iter()
        .map(|&l| {
            acc = acc.compose(group.letter(l));
            acc.clone()
        })
        .collect()
}

/// Options for [`limit_report`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitOptions {
    pub seed: u64,
    /// Letters beyond the examined depth used to settle the pulled-back flags.
    pub extra_depth: usize,
    pub conical: ConicalOptions,
    pub antipodal_floor: f64,
    /// Shared prefix length of continuity probe pairs.
    pub continuity_depth: usize,
    pub continuity_tol: f64,
    pub probes: usize,
}

impl Default for LimitOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            extra_depth: 30,
            conical: ConicalOptions::default(),
            antipodal_floor: 1e-6,
            continuity_depth: 10,
            continuity_tol: 1e-3,
            probes: 5,
        }
    }
}

/// A sampled limit flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSample {
    pub ray: Vec<i32>,
    /// Frame of the flag, row-major.
    pub frame: Vec<f64>,
    /// Cauchy residual of the attracting flags of the prefixes.
    pub prefix_residual: f64,
    pub conical: bool,
}

#[derive(Debug, Clone)]
pub struct LimitReport {
    pub report: PropertyReport,
    pub samples: Vec<LimitSample>,
    pub flags: Vec<Flag>,
}

fn frame_rows(flag: &Flag) -> Vec<f64> {
    let f = flag.frame();
    (0..f.nrows())
        .flat_map(|r| (0..f.ncols()).map(move |c| f[(r, c)]))
        .collect()
}

/// Limit set sampling with antipodality, conicality and continuity probes.
///
/// Antipodality of two rays diverging at letter `k` is tested after
/// translating by their common prefix `w_k⁻¹`, i.e. on the pulled-back flags
/// `F_k`. Transversality is invariant, and the translated pair is well
/// separated, so the margin does not collapse numerically for rays sharing
/// long prefixes.
pub fn limit_report(
    group: &FreeGroupPresentation,
    face: &FaceType,
    max_len: usize,
    ray_count: usize,
    opts: &LimitOptions,
) -> Result<LimitReport> {
    if ray_count < 2 {
        return Err(Error::InvalidInput("at least two rays are needed".into()));
    }
    if face.n() != group.dim() {
        return Err(Error::DimensionMismatch {
            expected: group.dim(),
            found: face.n(),
        });
    }
    let depth = max_len + opts.extra_depth;
    let rays = sample_rays(group.rank(), ray_count, depth, opts.seed)?;
    let opposite = face.iota();
    let mut report = PropertyReport::new("limit_set");
    report.seed = Some(opts.seed);
    report
        .threshold("max_length", max_len as f64)
        .threshold("rho", opts.conical.rho)
        .threshold("transversality_floor", opts.conical.transversality_floor)
        .threshold("antipodal_floor", opts.antipodal_floor)
        .threshold("continuity_depth", opts.continuity_depth as f64)
        .threshold("continuity_tol", opts.continuity_tol);

    let mut betas = Vec::with_capacity(rays.len());
    let mut pulled = Vec::with_capacity(rays.len());
    let mut pulled_opposite = Vec::with_capacity(rays.len());
    let mut samples = Vec::with_capacity(rays.len());
    let mut worst_cone = 0.0f64;
    let mut worst_transversality = f64::INFINITY;
    let mut all_conical = true;
    let mut worst_residual = 0.0f64;
    for (r, ray) in rays.iter().enumerate() {
        let seed = opts.seed.wrapping_add(r as u64);
        let flags = propagate_flags(group, ray, face, depth, seed)?;
        let beta = flags[0].clone();
        let flags_opposite = if opposite == *face {
            flags.clone()
        } else {
            propagate_flags(group, ray, &opposite, depth, seed)?
        };
        let ws = prefixes(group, &ray.letters[..max_len]);
        let residual = match flag_limit(&ws, face, Default::default()) {
            Ok((limit, _)) => flag_distance(&limit, &beta)?,
            Err(Error::VanishingGap { .. } | Error::Inconclusive { .. }) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        worst_residual = worst_residual.max(residual);
        let complement = beta.orthogonal_complement();
        let mut distances = Vec::with_capacity(max_len);
        let mut transversality = Vec::with_capacity(max_len);
        for (n, w) in ws.iter().enumerate() {
            let wi = w.inverse();
            let here = &flags[n + 1];
            let here_opposite = act_on_flag(&wi, &complement);
            let d = match cone_distance_centred(
                w,
                here,
                &here_opposite,
                opts.conical.match_tolerance,
            ) {
                Ok(d) => d,
                Err(Error::IllConditioned(_) | Error::VanishingGap { .. }) => f64::INFINITY,
                Err(e) => return Err(e),
            };
            let t = match attractive_flag(&wi, &opposite) {
                Ok(back) => transversality_margin(here, &back.plus)?,
                Err(Error::VanishingGap { .. }) => 0.0,
                Err(e) => return Err(e),
            };
            distances.push(d);
            transversality.push(t);
        }
        let verdict = conical_verdict(distances, transversality, opts.conical);
        worst_cone = worst_cone.max(verdict.distances.iter().cloned().fold(0.0, f64::max));
        let tail = verdict.transversality.len() / 2;
        worst_transversality = worst_transversality.min(
            verdict.transversality[tail..]
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min),
        );
        if !verdict.conical() {
            all_conical = false;
            if report.witnesses.len() < 5 {
                report.witnesses.push(
                    Witness::new(
                        "non_conical_ray",
                        verdict.distances.iter().cloned().fold(0.0, f64::max),
                    )
                    .with_word(ray.letters[..max_len.min(12)].to_vec()),
                );
            }
        }
        samples.push(LimitSample {
            ray: ray.letters[..max_len.min(12)].to_vec(),
            frame: frame_rows(&beta),
            prefix_residual: residual,
            conical: verdict.conical(),
        });
        betas.push(beta);
        pulled.push(flags);
        pulled_opposite.push(flags_opposite);
    }

    let mut antipodality = f64::INFINITY;
    let mut separation = f64::INFINITY;
    let mut pair_margins = Vec::new();
    for i in 0..rays.len() {
        for j in 0..rays.len() {
            let Some(k) = rays[i].divergence(&rays[j]).filter(|_| i != j) else {
                continue;
            };
            let margin = transversality_margin(&pulled[i][k], &pulled_opposite[j][k])?;
            pair_margins.push(margin);
            antipodality = antipodality.min(margin);
            if rays[i].letters[0] != rays[j].letters[0] {
                separation = separation.min(flag_distance(&betas[i], &betas[j])?);
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5eed);
    let mut continuity = 0.0f64;
    for (r, ray) in rays.iter().take(opts.probes).enumerate() {
        let shared = ray.letters[..opts.continuity_depth.min(depth)].to_vec();
        let partner = BoundaryRaySample::new(
            RayScheme::Random {
                prefix: shared,
                seed: rng.random(),
            },
            group.rank(),
            depth,
        )?;
        let seed = opts.seed.wrapping_add(1000 + r as u64);
        let beta = propagate_flags(group, &partner, face, 0, seed)?.remove(0);
        continuity = continuity.max(flag_distance(&beta, &betas[r])?);
    }

    let distinct = cluster_flags(&betas, 1e-6).len();
    report
        .constant("antipodality_margin", antipodality)
        .constant("worst_cone_distance", worst_cone)
        .constant("worst_tail_transversality", worst_transversality)
        .constant("continuity_distance", continuity)
        .constant("first_letter_separation", separation)
        .constant("limit_points_lower_bound", distinct as f64)
        .constant("worst_prefix_residual", worst_residual);
    report.series.insert("pair_margins".into(), pair_margins);
    report.check("antipodal", antipodality > opts.antipodal_floor);
    report.check("conical", all_conical);
    report.check(
        "continuous",
        continuity < opts.continuity_tol && separation > opts.continuity_tol,
    );
    if distinct < 3 {
        report.note(format!("only {distinct} distinct limit flags were sampled"));
    }
    report.conclude();
    Ok(LimitReport {
        report,
        samples,
        flags: betas,
    })
}

/// Options for [`anosov_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnosovOptions {
    pub seed: u64,
    pub extra_depth: usize,
    /// Largest admissible relative deviation of per-ray slopes from their mean.
    pub slope_tolerance: f64,
    /// `log ε` every ray must reach for the non-uniform verdict.
    pub divergence_threshold: f64,
    /// Required `ε > 1 + floor` at every sampled limit flag.
    pub cea_floor: f64,
}

impl Default for AnosovOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            extra_depth: 30,
            slope_tolerance: 0.2,
            divergence_threshold: 5.0,
            cea_floor: 0.1,
        }
    }
}

/// Largest log singular value spread of a generator accepted by
/// [`anosov_check`].
pub const MAX_LETTER_SPREAD: f64 = 30.0;

/// Exponential expansion at limit flags along boundary rays.
///
/// Per ray, `log ε(w_n⁻¹, β)` is fitted by least squares against `n`. The
/// uniform verdict requires every slope to be positive and within
/// `slope_tolerance` of the mean slope; the non-uniform verdict requires each
/// ray to exceed the divergence threshold; the expansion-at-limit-points
/// verdict requires `ε > 1 + cea_floor` for some prefix of each ray.
///
/// Letters whose log singular values spread by more than
/// [`MAX_LETTER_SPREAD`] are rejected as [`Error::IllConditioned`]: their
/// contracting differentials are below double-precision resolution.
pub fn anosov_check(
    group: &FreeGroupPresentation,
    face: &FaceType,
    ray_count: usize,
    depth: usize,
    opts: &AnosovOptions,
) -> Result<PropertyReport> {
    if depth < 2 {
        return Err(Error::InvalidInput("depth must be at least 2".into()));
    }
    if face.n() != group.dim() {
        return Err(Error::DimensionMismatch {
            expected: group.dim(),
            found: face.n(),
        });
    }
    for (i, g) in group.generators().iter().enumerate() {
        let logs = g.log_singular_values();
        let spread = logs[0] - logs[logs.len() - 1];
        if spread > MAX_LETTER_SPREAD {
            return Err(Error::IllConditioned(format!(
                "generator {} has log singular value spread {spread:.1}",
                i + 1
            )));
        }
    }
    let rays = sample_rays(group.rank(), ray_count, depth + opts.extra_depth, opts.seed)?;
    let mut report = PropertyReport::new("anosov");
    report.seed = Some(opts.seed);
    report
        .threshold("depth", depth as f64)
        .threshold("slope_tolerance", opts.slope_tolerance)
        .threshold("divergence_threshold", opts.divergence_threshold)
        .threshold("cea_floor", opts.cea_floor);
    let xs: Vec<f64> = (1..=depth).map(|n| n as f64).collect();
    let mut slopes = Vec::with_capacity(rays.len());
    let mut intercepts = Vec::with_capacity(rays.len());
    let mut diverging = true;
    let mut expanding = true;
    for (r, ray) in rays.iter().enumerate() {
        let flags = propagate_flags(group, ray, face, depth, opts.seed.wrapping_add(r as u64))?;
        let series = log_expansion_along(group, &ray.letters, &flags);
        let (slope, intercept) = least_squares(&xs, &series);
        let peak = series.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        diverging &= peak >= opts.divergence_threshold;
        expanding &= peak > (1.0 + opts.cea_floor).ln();
        slopes.push(slope);
        intercepts.push(intercept);
        report
            .series
            .insert(format!("log_expansion/{r:03}"), series);
        let path: Vec<f64> = prefixes(group, &ray.letters[..depth])
            .iter()
            .flat_map(|g| g.cartan().coords().to_vec())
            .collect();
        report.series.insert(format!("cartan/{r:03}"), path);
    }
    let mean = slopes.iter().sum::<f64>() / slopes.len() as f64;
    let spread = if mean > 0.0 {
        slopes
            .iter()
            .map(|s| (s - mean).abs() / mean)
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let min_slope = slopes.iter().cloned().fold(f64::INFINITY, f64::min);
    let log_a = intercepts.iter().cloned().fold(f64::INFINITY, f64::min);

    let generator = group.letter(rays[0].letters[0]).pow(1 << 20);
    let lyapunov: Vec<f64> = generator
        .log_singular_values()
        .iter()
        .map(|x| x / f64::from(1u32 << 20))
        .collect();
    let closed_form = face
        .walls()
        .iter()
        .map(|&i| lyapunov[i - 1] - lyapunov[i])
        .fold(f64::INFINITY, f64::min);

    report
        .constant("C", mean)
        .constant("log_A", log_a)
        .constant("min_slope", min_slope)
        .constant("slope_spread", spread)
        .constant("power_ray_slope", slopes[0])
        .constant("power_ray_closed_form", closed_form);
    report.series.insert("slopes".into(), slopes);
    report.series.insert("intercepts".into(), intercepts);
    report.check(
        "uniform_expansion",
        min_slope > 0.0 && spread <= opts.slope_tolerance,
    );
    report.check("non_uniform_expansion", diverging);
    report.check("expanding_at_limit_points", expanding);
    report.verdict = crate::report::Verdict::from_bool(report.check_passed("uniform_expansion"));
    Ok(report)
}
