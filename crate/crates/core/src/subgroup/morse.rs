use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::{PropertyReport, Witness};
use crate::symmspace::centred::{diamond_defect, SideDefect};
use crate::weyl::{FaceType, ThetaSpec};

use super::words::{evaluated_words, FreeGroupPresentation, DEFAULT_WORD_BUDGET};

/// Search space and thresholds for [`morse_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorseOptions {
    /// Candidate `Θ` gaps as fractions of the largest feasible gap; the
    /// largest passing one is reported.
    pub theta_fractions: Vec<f64>,
    /// Sanity cap on the distance from orbit points to their diamonds.
    pub rho_max: f64,
    /// Largest admissible relative increase of the fitted `ρ` from length
    /// `L-2` to `L`.
    pub growth_tol: f64,
    /// Flag agreement below which a point counts as inside a cone.
    pub match_tol: f64,
    pub budget: u64,
}

impl Default for MorseOptions {
    fn default() -> Self {
        Self {
            theta_fractions: vec![0.75, 0.5, 0.25, 0.1],
            rho_max: 10.0,
            growth_tol: 0.05,
            match_tol: 1e-6,
            budget: DEFAULT_WORD_BUDGET,
        }
    }
}

/// Distance surrogate from `δ`'s direction to the `Θ_ε` cone: the largest
/// shortfall of a kept gap below `ε‖δ‖`, measured along the wall normal.
fn theta_shortfall(side: &SideDefect, face: &FaceType, gap: f64) -> f64 {
    let norm = side.delta.norm();
    face.walls()
        .iter()
        .map(|&i| (gap * norm - side.delta.gap(i)).max(0.0) / SQRT_2)
        .fold(0.0, f64::max)
}

/// Morse property on all geodesic segments of length at most `L`.
///
/// By invariance of the orbit map, a sub-segment of a reduced word is itself
/// a reduced word, so it suffices to test every interior split `w = a·b`:
/// after translating by `a⁻¹` the orbit point becomes `o` and the diamond has
/// tips `a⁻¹·o` and `b·o`. The defect of a split is the distance from `o` to
/// the parallel set of the diamond plus the cone violations at the projected
/// point, plus for each candidate gap the `Θ` shortfall of both tip
/// directions. `ρ(ε)` is the worst defect. The verdict passes for the largest
/// `ε` with `ρ(ε) ≤ rho_max` whose `ρ` grows by at most the relative
/// `growth_tol` from length `L-2` to `L`. Irregular or degenerate segments
/// count as failures.
pub fn morse_check(
    group: &FreeGroupPresentation,
    face: &FaceType,
    max_len: usize,
    opts: &MorseOptions,
) -> Result<PropertyReport> {
    if max_len < 3 {
        return Err(Error::InvalidInput("word length must be at least 3".into()));
    }
    if face.n() != group.dim() {
        return Err(Error::DimensionMismatch {
            expected: group.dim(),
            found: face.n(),
        });
    }
    let max_gap = ThetaSpec::max_gap(face);
    let gaps: Vec<f64> = opts.theta_fractions.iter().map(|f| f * max_gap).collect();
    let words = evaluated_words(group, max_len - 1, opts.budget)?;
    let opposite = face.iota();

    // worst[k][l]: worst defect for gap k among segments of total length l
    let mut worst = vec![vec![0.0f64; max_len + 1]; gaps.len()];
    let mut worst_pair: Vec<Option<(Vec<i32>, usize)>> = vec![None; gaps.len()];
    let mut failures: Vec<Witness> = Vec::new();
    let mut failure_count = 0usize;
    let mut segments = 0usize;

    for (a, ga) in &words {
        let last = *a.letters().last().expect("non-empty");
        for (b, gb) in &words {
            let total = a.len() + b.len();
            if total > max_len || b.letters()[0] == -last {
                continue;
            }
            segments += 1;
            let word: Vec<i32> = a.letters().iter().chain(b.letters()).copied().collect();
            match diamond_defect(ga, gb, face, opts.match_tol) {
                Ok(d) => {
                    let base = d.total();
                    for (k, &gap) in gaps.iter().enumerate() {
                        let value = base
                            + theta_shortfall(&d.back, face, gap)
                            + theta_shortfall(&d.front, &opposite, gap);
                        if value > worst[k][total] {
                            worst[k][total] = value;
                            if value >= worst[k].iter().cloned().fold(0.0, f64::max) {
                                worst_pair[k] = Some((word.clone(), a.len()));
                            }
                        }
                    }
                }
                Err(e @ (Error::VanishingGap { .. } | Error::IllConditioned(_))) => {
                    failure_count += 1;
                    for row in worst.iter_mut() {
                        row[total] = f64::INFINITY;
                    }
                    if failures.len() < 5 {
                        failures.push(
                            Witness::new("degenerate_segment", a.len() as f64)
                                .with_word(word)
                                .with_detail(e.to_string()),
                        );
                    }
                }
                Err(e) => return Err(e),
            }
        }
    }

    let rho_up_to = |k: usize, l: usize| worst[k][..=l].iter().cloned().fold(0.0, f64::max);
    let prev_len = max_len - 2;
    let mut chosen = None;
    for k in 0..gaps.len() {
        let rho = rho_up_to(k, max_len);
        let previous = rho_up_to(k, prev_len);
        let growth = if previous > 0.0 {
            (rho - previous) / previous
        } else {
            0.0
        };
        if rho <= opts.rho_max && growth <= opts.growth_tol {
            let better = chosen.is_none_or(|c: usize| gaps[k] > gaps[c]);
            if better {
                chosen = Some(k);
            }
        }
    }
    let shown = chosen.unwrap_or_else(|| {
        (0..gaps.len())
            .min_by(|&a, &b| rho_up_to(a, max_len).total_cmp(&rho_up_to(b, max_len)))
            .unwrap_or(0)
    });

    let mut report = PropertyReport::new("morse");
    report
        .threshold("rho_max", opts.rho_max)
        .threshold("growth_tol", opts.growth_tol)
        .threshold("match_tol", opts.match_tol)
        .threshold("max_length", max_len as f64)
        .constant("epsilon", gaps.get(shown).copied().unwrap_or(0.0))
        .constant("rho", rho_up_to(shown, max_len))
        .constant("rho_previous", rho_up_to(shown, prev_len))
        .constant("segments", segments as f64)
        .constant("degenerate_segments", failure_count as f64);
    report.check("morse", chosen.is_some() && failure_count == 0);
    report.series.insert("theta_gaps".into(), gaps.clone());
    report.series.insert(
        "rho_by_gap".into(),
        (0..gaps.len()).map(|k| rho_up_to(k, max_len)).collect(),
    );
    report.series.insert(
        "rho_by_length".into(),
        (1..=max_len).map(|l| rho_up_to(shown, l)).collect(),
    );
    if let Some((word, split)) = worst_pair.get(shown).cloned().flatten() {
        report.witnesses.push(
            Witness::new("worst_split", rho_up_to(shown, max_len))
                .with_word(word)
                .with_detail(format!("orbit point after {split} letters")),
        );
    }
    report.witnesses.extend(failures);
    report.conclude();
    Ok(report)
}
