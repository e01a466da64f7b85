use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flags::least_squares;
use crate::report::{PropertyReport, Witness};
use crate::weyl::{face_boundary_distance, FaceType};

use super::words::{evaluated_words, FreeGroupPresentation, DEFAULT_WORD_BUDGET};

/// Thresholds for [`uru_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UruOptions {
    /// Smallest admissible fitted growth rate `c`.
    pub min_rate: f64,
    /// Smallest admissible ratio between the tail slope of the minimal orbit
    /// growth and its average rate `m_L / L`; sublinear growth drives it down.
    pub linearity_floor: f64,
    /// Smallest admissible `face_boundary_distance / norm` on the tail.
    pub ratio_floor: f64,
    pub budget: u64,
}

impl Default for UruOptions {
    fn default() -> Self {
        Self {
            min_rate: 1e-3,
            linearity_floor: 0.75,
            ratio_floor: 0.1,
            budget: DEFAULT_WORD_BUDGET,
        }
    }
}

/// Uniform regularity and undistortion on all reduced words up to length `L`.
///
/// Undistortion fits `d(o, w·o) ≥ c|w| - c'` from the minimal orbit distance
/// `m_ℓ` per word length: `c` is the least-squares slope of `m_ℓ` over the
/// tail `ℓ ≥ ⌈L/2⌉` and `c' = max_ℓ (cℓ - m_ℓ)`. It passes when `c` exceeds
/// `min_rate` and the tail slope is comparable to the average rate. The same
/// slope fitted along powers of the first generator is reported as
/// `power_rate`.
pub fn uru_check(
    group: &FreeGroupPresentation,
    face: &FaceType,
    max_len: usize,
    opts: UruOptions,
) -> Result<PropertyReport> {
    if max_len < 4 {
        return Err(Error::InvalidInput("word length must be at least 4".into()));
    }
    if face.n() != group.dim() {
        return Err(Error::DimensionMismatch {
            expected: group.dim(),
            found: face.n(),
        });
    }
    let words = evaluated_words(group, max_len, opts.budget)?;
    let mut min_norm = vec![f64::INFINITY; max_len + 1];
    let mut min_ratio = vec![f64::INFINITY; max_len + 1];
    let mut norm_witness = vec![Vec::new(); max_len + 1];
    let mut ratio_witness = vec![Vec::new(); max_len + 1];
    let mut power_norms = vec![0.0; max_len + 1];
    for (w, g) in &words {
        let delta = g.cartan();
        let norm = delta.norm();
        let ratio = if norm > 0.0 {
            face_boundary_distance(&delta, face) / norm
        } else {
            0.0
        };
        let l = w.len();
        if norm < min_norm[l] {
            min_norm[l] = norm;
            norm_witness[l] = w.letters().to_vec();
        }
        if ratio < min_ratio[l] {
            min_ratio[l] = ratio;
            ratio_witness[l] = w.letters().to_vec();
        }
        if w.letters().iter().all(|&x| x == 1) {
            power_norms[l] = norm;
        }
    }
    let tail = max_len.div_ceil(2).max(1);
    let lengths: Vec<f64> = (tail..=max_len).map(|l| l as f64).collect();
    let (rate, _) = least_squares(&lengths, &min_norm[tail..=max_len]);
    let (power_rate, _) = least_squares(&lengths, &power_norms[tail..=max_len]);
    let offset = (1..=max_len)
        .map(|l| rate * l as f64 - min_norm[l])
        .fold(0.0, f64::max);
    let average = min_norm[max_len] / max_len as f64;
    let linearity = if average > 0.0 { rate / average } else { 0.0 };
    let uniform_ratio = min_ratio[tail..=max_len]
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);

    let mut report = PropertyReport::new("uru");
    report
        .threshold("min_rate", opts.min_rate)
        .threshold("linearity_floor", opts.linearity_floor)
        .threshold("ratio_floor", opts.ratio_floor)
        .threshold("max_length", max_len as f64)
        .constant("c", rate)
        .constant("c_prime", offset)
        .constant("linearity", linearity)
        .constant("power_rate", power_rate)
        .constant("uniform_ratio_min", uniform_ratio)
        .constant("words", words.len() as f64);
    report.check(
        "undistorted",
        rate > opts.min_rate && linearity >= opts.linearity_floor,
    );
    report.check("uniformly_regular", uniform_ratio >= opts.ratio_floor);
    report
        .series
        .insert("min_norm_by_length".into(), min_norm[1..].to_vec());
    report
        .series
        .insert("min_ratio_by_length".into(), min_ratio[1..].to_vec());
    report.witnesses.push(
        Witness::new("shortest_orbit_displacement", min_norm[max_len])
            .with_word(norm_witness[max_len].clone()),
    );
    let worst_len = (tail..=max_len)
        .min_by(|a, b| min_ratio[*a].total_cmp(&min_ratio[*b]))
        .unwrap_or(max_len);
    report.witnesses.push(
        Witness::new("least_regular_word", min_ratio[worst_len])
            .with_word(ratio_witness[worst_len].clone()),
    );
    report.conclude();
    Ok(report)
}
