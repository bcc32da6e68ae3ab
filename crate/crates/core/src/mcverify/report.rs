//! Experiment reports: named estimates whose verdicts are reproducible from
//! the recorded (value, target, band, rule) tuple, per-path summaries, and
//! suite aggregation.

use super::config::ExperimentConfig;
use crate::error::Result;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::time::Duration;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// The inequality a verdict is based on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// `|value - target| <= band`.
    WithinBand,
    /// `value - band > target` (strict).
    ExceedsTarget,
    /// `value <= target`; band is unused and kept 0.
    AtMostTarget,
}

impl Rule {
    pub fn holds(self, value: f64, target: f64, band: f64) -> bool {
        match self {
            Rule::WithinBand => (value - target).abs() <= band,
            Rule::ExceedsTarget => value - band > target,
            Rule::AtMostTarget => value <= target,
        }
    }
}

/// One named statistic with everything needed to re-derive its verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub name: String,
    pub value: f64,
    pub stderr: f64,
    pub target: f64,
    pub band: f64,
    pub rule: Rule,
    pub verdict: Verdict,
}

impl Estimate {
    pub fn new(name: &str, value: f64, stderr: f64, target: f64, band: f64, rule: Rule) -> Self {
        let verdict = if rule.holds(value, target, band) {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Estimate { name: name.to_string(), value, stderr, target, band, rule, verdict }
    }

    pub fn inconclusive(name: &str, target: f64, rule: Rule) -> Self {
        Estimate {
            name: name.to_string(),
            value: 0.0,
            stderr: 0.0,
            target,
            band: 0.0,
            rule,
            verdict: Verdict::Inconclusive,
        }
    }

    /// `name: value (stderr ..) vs target .., band .., rule -> verdict`.
    pub fn describe(&self) -> String {
        format!(
            "{}: value {:.6e} (stderr {:.3e}) vs target {:.6e}, band {:.3e}, {:?} -> {}",
            self.name, self.value, self.stderr, self.target, self.band, self.rule, self.verdict
        )
    }
}

/// Which keyed streams an experiment consumed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngProvenance {
    pub master_seed: u64,
    /// Streams 0..streams were used, one per path or draw.
    pub streams: u64,
}

/// Outcome of one experiment. Runtime is measured but deliberately kept out
/// of the serialized form so reports are byte-reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub config: ExperimentConfig,
    pub estimates: Vec<Estimate>,
    pub clamp_activations: u64,
    pub rng: RngProvenance,
    #[serde(skip)]
    pub runtime: Duration,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.estimates.iter().all(|e| e.verdict == Verdict::Pass)
    }

    pub fn to_json_string(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn write_json(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json_string()?)?;
        Ok(())
    }
}

/// Per-path summary statistics for the CSV side channel.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSummary {
    pub path_index: u64,
    pub min_lambda1: f64,
    pub exited: bool,
    /// exp(-Tr(u X)) where the experiment evaluates it; empty cell otherwise.
    pub laplace_value: Option<f64>,
}

pub fn write_path_csv<W: Write>(w: &mut W, rows: &[PathSummary]) -> Result<()> {
    writeln!(w, "path_index,min_lambda1,exited,laplace_value")?;
    for r in rows {
        write!(w, "{},{},{}", r.path_index, r.min_lambda1, r.exited)?;
        match r.laplace_value {
            Some(v) => writeln!(w, ",{v}")?,
            None => writeln!(w, ",")?,
        }
    }
    Ok(())
}

/// One suite entry: either a finished report or the error that stopped it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub experiment: String,
    pub passed: Option<bool>,
    pub error: Option<String>,
    pub report: Option<ExperimentReport>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub outcomes: Vec<SuiteOutcome>,
}

impl SuiteSummary {
    /// True when every experiment finished and passed; errors and
    /// inconclusive verdicts both count against the suite.
    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed == Some(true))
    }

    pub fn to_json_string(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn write_json(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json_string()?)?;
        Ok(())
    }
}
