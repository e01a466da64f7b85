use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anosov_core::subgroup::{
    anosov_check, limit_report, morse_check, uru_check, AnosovOptions, LimitOptions, LimitSample,
    MorseOptions, UruOptions,
};
use anosov_core::{PropertyReport, ThetaSpec, Verdict};
use serde::{Deserialize, Serialize};

use crate::config::{Checker, ConfigError, ExperimentConfig};

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct RunOverrides {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
}

/// Contents of one per-checker report file. Non-finite numbers are written
/// as `null`.
#[derive(Debug, Clone, Serialize)]
pub struct ReportFile {
    pub experiment: String,
    pub checker: Checker,
    pub report: PropertyReport,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub samples: Vec<LimitSample>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckerSummary {
    pub verdict: Verdict,
    pub checks: BTreeMap<String, Verdict>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Summary {
    pub experiment: String,
    pub seed: u64,
    pub verdict: Verdict,
    pub checkers: BTreeMap<String, CheckerSummary>,
    /// Hard failures, by checker.
    pub errors: BTreeMap<String, String>,
    /// Implications between verdicts that hold for Anosov subgroups; `false`
    /// marks a violated implication. Only evaluated when both sides ran.
    pub implications: BTreeMap<String, bool>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub summary: Option<Summary>,
    pub out_dir: PathBuf,
    pub message: Option<String>,
}

fn config_failure(err: ConfigError, out_dir: PathBuf) -> RunOutcome {
    RunOutcome {
        exit_code: 2,
        summary: None,
        out_dir,
        message: Some(err.to_string()),
    }
}

/// Loads a config, runs its checkers in the order uru, morse, limit, anosov
/// and writes `<checker>.json` plus `summary.json` into the output directory.
///
/// Exit codes: 2 for configuration errors, 1 when a checker fails hard (an
/// error rather than a negative verdict), 0 otherwise.
pub fn run_config(path: &Path, overrides: &RunOverrides) -> RunOutcome {
    let fallback = overrides
        .out_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("."));
    let config = match ExperimentConfig::load(path) {
        Ok(c) => c,
        Err(e) => return config_failure(e, fallback),
    };
    let out_dir = overrides
        .out_dir
        .clone()
        .or_else(|| config.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from(format!("reports/{}", config.name)));
    match execute(&config, overrides.seed.unwrap_or(config.seed), &out_dir) {
        Ok(summary) => {
            let exit_code = if summary.errors.is_empty() { 0 } else { 1 };
            RunOutcome {
                exit_code,
                summary: Some(summary),
                out_dir,
                message: None,
            }
        }
        Err(RunError::Config(e)) => config_failure(e, out_dir),
        Err(RunError::Io(e)) => RunOutcome {
            exit_code: 1,
            summary: None,
            out_dir,
            message: Some(e),
        },
    }
}

enum RunError {
    Config(ConfigError),
    Io(String),
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), RunError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| RunError::Io(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))
}

fn execute(config: &ExperimentConfig, seed: u64, out_dir: &Path) -> Result<Summary, RunError> {
    let group = config.group()?;
    let face = config.face_type()?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| RunError::Io(format!("{}: {e}", out_dir.display())))?;

    let mut checkers = BTreeMap::new();
    let mut errors = BTreeMap::new();
    for checker in config.ordered_checkers() {
        let result = match checker {
            Checker::Uru => uru_check(&group, &face, config.depth, UruOptions::default())
                .map(|r| (r, Vec::new())),
            Checker::Morse => {
                let mut opts = MorseOptions::default();
                if let Some(gap) = config.theta_gap {
                    opts.theta_fractions = vec![gap / ThetaSpec::max_gap(&face)];
                }
                morse_check(&group, &face, config.morse_depth(), &opts).map(|r| (r, Vec::new()))
            }
            Checker::Limit => {
                let opts = LimitOptions {
                    seed,
                    ..Default::default()
                };
                limit_report(&group, &face, config.limit_depth(), config.ray_count, &opts)
                    .map(|l| (l.report, l.samples))
            }
            Checker::Anosov => {
                let opts = AnosovOptions {
                    seed,
                    ..Default::default()
                };
                anosov_check(&group, &face, config.ray_count, config.anosov_depth, &opts)
                    .map(|r| (r, Vec::new()))
            }
        };
        match result {
            Ok((report, samples)) => {
                checkers.insert(
                    checker.name().to_string(),
                    CheckerSummary {
                        verdict: report.verdict,
                        checks: report.checks.clone(),
                    },
                );
                let file = ReportFile {
                    experiment: config.name.clone(),
                    checker,
                    report,
                    samples,
                };
                write_json(&out_dir.join(format!("{}.json", checker.name())), &file)?;
            }
            Err(e) => {
                errors.insert(checker.name().to_string(), e.to_string());
            }
        }
    }

    let verdict = if !errors.is_empty() || checkers.values().any(|c| c.verdict == Verdict::Fail) {
        Verdict::Fail
    } else if checkers.values().all(|c| c.verdict == Verdict::Pass) {
        Verdict::Pass
    } else {
        Verdict::Inconclusive
    };
    let summary = Summary {
        experiment: config.name.clone(),
        seed,
        verdict,
        implications: implications(&checkers),
        checkers,
        errors,
    };
    write_json(&out_dir.join("summary.json"), &summary)?;
    Ok(summary)
}

fn implications(checkers: &BTreeMap<String, CheckerSummary>) -> BTreeMap<String, bool> {
    let passed = |name: &str| checkers.get(name).map(|c| c.verdict == Verdict::Pass);
    let check = |name: &str, check: &str| {
        checkers
            .get(name)
            .map(|c| c.checks.get(check).is_some_and(|v| *v == Verdict::Pass))
    };
    let mut out = BTreeMap::new();
    if let (Some(morse), Some(antipodal), Some(conical)) = (
        passed("morse"),
        check("limit", "antipodal"),
        check("limit", "conical"),
    ) {
        out.insert("morse_implies_rca".into(), !morse || (antipodal && conical));
    }
    if let (Some(morse), Some(anosov)) = (passed("morse"), passed("anosov")) {
        out.insert("morse_implies_anosov".into(), !morse || anosov);
    }
    if let (Some(uru), Some(morse)) = (passed("uru"), passed("morse")) {
        out.insert("uru_failure_implies_morse_failure".into(), uru || !morse);
    }
    out
}
