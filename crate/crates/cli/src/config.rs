use std::fmt;
use std::path::{Path, PathBuf};

use anosov_core::linalg::Mat;
use anosov_core::subgroup::FreeGroupPresentation;
use anosov_core::{FaceType, GroupElement, ThetaSpec};
use serde::{Deserialize, Serialize};

/// Generators must have determinant 1 within this tolerance.
pub const DET_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Checker {
    Uru,
    Morse,
    Limit,
    Anosov,
}

impl Checker {
    pub fn name(self) -> &'static str {
        match self {
            Checker::Uru => "uru",
            Checker::Morse => "morse",
            Checker::Limit => "limit",
            Checker::Anosov => "anosov",
        }
    }
}

/// One experiment. Depths are word lengths; `morse_depth` and `limit_depth`
/// default to `depth`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub n: usize,
    /// Row-major `n × n` matrices.
    pub generators: Vec<Vec<f64>>,
    /// Kept walls, 1-based.
    pub face: Vec<usize>,
    /// Restricts the Morse search to this single `Θ` gap.
    #[serde(default)]
    pub theta_gap: Option<f64>,
    pub depth: usize,
    #[serde(default)]
    pub morse_depth: Option<usize>,
    #[serde(default)]
    pub limit_depth: Option<usize>,
    pub ray_count: usize,
    /// Prefix length `N` of the expansion fits.
    pub anosov_depth: usize,
    pub seed: u64,
    pub checkers: Vec<Checker>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        let config: Self =
            serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n < 2 {
            return Err(invalid("n must be at least 2"));
        }
        if self.generators.is_empty() {
            return Err(invalid("at least one generator is required"));
        }
        for (i, g) in self.generators.iter().enumerate() {
            if g.len() != self.n * self.n {
                return Err(invalid(format!(
                    "generator {} has {} entries, expected {}",
                    i + 1,
                    g.len(),
                    self.n * self.n
                )));
            }
            if g.iter().any(|x| !x.is_finite()) {
                return Err(invalid(format!(
                    "generator {} has non-finite entries",
                    i + 1
                )));
            }
            let det = Mat::from_row_slice(self.n, self.n, g).determinant();
            if (det - 1.0).abs() > DET_TOLERANCE {
                return Err(invalid(format!(
                    "generator {} has determinant {det}",
                    i + 1
                )));
            }
        }
        self.face_type()?;
        if let Some(gap) = self.theta_gap {
            ThetaSpec::new(self.face_type()?, gap)
                .map_err(|e| invalid(format!("theta_gap: {e}")))?;
        }
        if self.depth < 4 {
            return Err(invalid("depth must be at least 4"));
        }
        if self.morse_depth() < 3 {
            return Err(invalid("morse_depth must be at least 3"));
        }
        if self.limit_depth() < 2 || self.anosov_depth < 2 {
            return Err(invalid("limit_depth and anosov_depth must be at least 2"));
        }
        if self.ray_count < 2 {
            return Err(invalid("ray_count must be at least 2"));
        }
        if self.checkers.is_empty() {
            return Err(invalid("no checkers selected"));
        }
        Ok(())
    }

    pub fn face_type(&self) -> Result<FaceType, ConfigError> {
        FaceType::new(self.n, self.face.iter().copied()).map_err(|e| invalid(format!("face: {e}")))
    }

    pub fn group(&self) -> Result<FreeGroupPresentation, ConfigError> {
        let gens = self
            .generators
            .iter()
            .map(|g| GroupElement::normalized(Mat::from_row_slice(self.n, self.n, g)))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| invalid(format!("generators: {e}")))?;
        FreeGroupPresentation::new(gens).map_err(|e| invalid(format!("generators: {e}")))
    }

    pub fn morse_depth(&self) -> usize {
        self.morse_depth.unwrap_or(self.depth)
    }

    pub fn limit_depth(&self) -> usize {
        self.limit_depth.unwrap_or(self.depth)
    }

    /// Selected checkers in dependency order, without repetitions.
    pub fn ordered_checkers(&self) -> Vec<Checker> {
        let mut c = self.checkers.clone();
        c.sort();
        c.dedup();
        c
    }
}
