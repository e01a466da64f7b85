//! Schottky subgroups by ping-pong on the flag manifold.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flags::{attractive_flag, flag_distance, transversality_margin, Flag};
use crate::linalg::{self, Mat};
use crate::report::{PropertyReport, Witness};
use crate::symmspace::{GroupElement, ParallelSetRef};
use crate::weyl::FaceType;

use super::words::FreeGroupPresentation;

/// Generators of a Schottky candidate.
#[derive(Debug, Clone)]
pub enum SchottkyInput {
    /// Elements to be raised to a common power.
    Elements(Vec<GroupElement>),
    /// `(τ_+, τ_-, strength)` triples turned into transvections.
    Axes(Vec<(Flag, Flag, f64)>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchottkyOptions {
    pub max_power: u32,
    /// Floor on the transversality of attracting and repelling flags.
    pub transversality_floor: f64,
    /// Sampled flags per neighbourhood.
    pub samples: usize,
    pub seed: u64,
}

impl Default for SchottkyOptions {
    fn default() -> Self {
        Self {
            max_power: 1024,
            transversality_floor: 1e-3,
            samples: 64,
            seed: 0,
        }
    }
}

/// Diagonalizable element with attracting flag `plus`, repelling flag
/// `minus` and log singular value gap `strength` at every kept wall.
pub fn transvection(plus: &Flag, minus: &Flag, strength: f64) -> Result<GroupElement> {
    if !(strength > 0.0) {
        return Err(Error::InvalidInput(format!(
            "strength {strength} must be positive"
        )));
    }
    let set = ParallelSetRef::new(minus.clone(), plus.clone())?;
    let face = plus.face();
    let n = face.n();
    let mut h = vec![0.0; n];
    let mut level = 0.0;
    for i in (0..n).rev() {
        h[i] = level;
        if i > 0 && face.keeps(i) {
            level += strength;
        }
    }
    let mean = h.iter().sum::<f64>() / n as f64;
    let b = set.unimodular_basis();
    let binv = b
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::IllConditioned("adapted basis".into()))?;
    let d = Mat::from_diagonal(&nalgebra::DVector::from_iterator(
        n,
        h.iter().map(|x| (x - mean).exp()),
    ));
    GroupElement::normalized(&b * d * binv)
}

/// Random flag at `flag_distance` at most `radius` from `centre`, pushed
/// towards the boundary of the ball on alternate draws.
fn sample_in_ball(
    rng: &mut ChaCha8Rng,
    centre: &Flag,
    radius: f64,
    boundary: bool,
) -> Result<Flag> {
    let n = centre.dim();
    let a = Mat::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let skew = (&a - a.transpose()) * 0.5;
    let at = |t: f64| -> Result<Flag> {
        let frame = linalg::orthonormalize(&(centre.frame() * (Mat::identity(n, n) + &skew * t)));
        Flag::from_basis(centre.face().clone(), &frame)
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    while flag_distance(&at(hi)?, centre)? < radius && hi < 1e6 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if flag_distance(&at(mid)?, centre)? < radius {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = if boundary {
        lo
    } else {
        lo * rng.random::<f64>()
    };
    at(t)
}

/// Raises the given generators (or transvections built from axes) to the
/// least power `N = 2^k ≤ max_power` passing a sampled ping-pong test.
///
/// The attracting neighbourhood of a letter `s` is the ball of radius `r`
/// around `τ_+(s)`, with `r` half the least separation of the attracting
/// flags. Ping-pong holds when `s^N` maps every ball `A_t`, `t ≠ s⁻¹`, into
/// `A_s`; this is checked on sampled flags, including points near each
/// sphere.
pub fn schottky_build(
    input: &SchottkyInput,
    face: &FaceType,
    opts: &SchottkyOptions,
) -> Result<(FreeGroupPresentation, PropertyReport)> {
    let base: Vec<GroupElement> = match input {
        SchottkyInput::Elements(gs) => gs.clone(),
        SchottkyInput::Axes(axes) => axes
            .iter()
            .map(|(p, m, s)| transvection(p, m, *s))
            .collect::<Result<_>>()?,
    };
    let group = FreeGroupPresentation::new(base)?;
    if face.n() != group.dim() {
        return Err(Error::DimensionMismatch {
            expected: group.dim(),
            found: face.n(),
        });
    }
    let letters = group.letters();
    let mut plus = Vec::with_capacity(letters.len());
    let mut minus = Vec::with_capacity(letters.len());
    for &l in &letters {
        let high = group.letter(l).pow(1 << 20);
        let flags = match attractive_flag(&high, face) {
            Ok(f) => f,
            Err(Error::VanishingGap { .. }) => return Err(Error::TransversalityTooSmall(0.0)),
            Err(e) => return Err(e),
        };
        plus.push(flags.plus);
        minus.push(flags.minus);
    }

    let mut min_transversality = f64::INFINITY;
    let mut separation = f64::INFINITY;
    for (i, &a) in letters.iter().enumerate() {
        for (j, &b) in letters.iter().enumerate() {
            if a != -b {
                min_transversality =
                    min_transversality.min(transversality_margin(&plus[i], &minus[j])?);
            }
            if i < j {
                separation = separation.min(flag_distance(&plus[i], &plus[j])?);
            }
        }
    }
    if !(min_transversality > opts.transversality_floor) {
        return Err(Error::TransversalityTooSmall(min_transversality));
    }
    let radius = 0.5 * separation;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let balls: Vec<Vec<Flag>> = plus
        .iter()
        .map(|c| {
            let mut pts = vec![c.clone()];
            for k in 0..opts.samples {
                pts.push(sample_in_ball(&mut rng, c, radius, k % 2 == 0)?);
            }
            Ok(pts)
        })
        .collect::<Result<_>>()?;

    let mut eta = f64::INFINITY;
    for (i, &s) in letters.iter().enumerate() {
        for (j, &t) in letters.iter().enumerate() {
            if s != -t {
                for f in &balls[j] {
                    eta = eta.min(transversality_margin(f, &minus[i])?);
                }
            }
        }
    }

    let mut report = PropertyReport::new("schottky");
    report.seed = Some(opts.seed);
    report
        .threshold("max_power", f64::from(opts.max_power))
        .threshold("transversality_floor", opts.transversality_floor)
        .threshold("samples", opts.samples as f64);
    report
        .constant("min_transversality", min_transversality)
        .constant("ball_radius", radius)
        .constant("eta", eta);

    let mut power = 1u32;
    loop {
        let worst = ping_pong_excess(&group, &letters, &plus, &balls, power)?;
        report
            .series
            .entry("excess_by_power".into())
            .or_default()
            .push(worst);
        if worst < radius {
            report
                .constant("power", f64::from(power))
                .constant("worst_image_distance", worst);
            report.check("ping_pong", true);
            report.conclude();
            let generators = group.generators().iter().map(|g| g.pow(power)).collect();
            return Ok((FreeGroupPresentation::new(generators)?, report));
        }
        if power >= opts.max_power {
            report
                .witnesses
                .push(Witness::new("worst_image_distance", worst));
            return Err(Error::PingPongFailed(power));
        }
        power = power.saturating_mul(2).min(opts.max_power);
    }
}

/// Largest distance from `τ_+(s)` of `s^N f` over sampled `f ∈ A_t`,
/// `t ≠ s⁻¹`.
fn ping_pong_excess(
    group: &FreeGroupPresentation,
    letters: &[i32],
    plus: &[Flag],
    balls: &[Vec<Flag>],
    power: u32,
) -> Result<f64> {
    let mut worst = 0.0f64;
    for (i, &s) in letters.iter().enumerate() {
        let g = group.letter(s).pow(power);
        for (j, &t) in letters.iter().enumerate() {
            if s == -t {
                continue;
            }
            for f in &balls[j] {
                worst = worst.max(flag_distance(&crate::flags::act_on_flag(&g, f), &plus[i])?);
            }
        }
    }
    Ok(worst)
}
