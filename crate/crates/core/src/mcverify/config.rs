//! Experiment configuration: defaults, validation, the flat key=value file
//! format, and the x0 specification grammar shared with the CLI.

use crate::error::{Error, Result};
use crate::sde::{self, GridSpec};
use crate::symcore::{self, SymMatrix};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

/// Full parameter set of one Monte Carlo experiment. Tolerance fields are
/// the knobs the verdicts depend on; they are serialized into every report
/// so a verdict can be audited from the report alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub p: usize,
    pub alpha: f64,
    /// Row-major upper triangle of the starting matrix.
    pub x0: Vec<f64>,
    pub t_end: f64,
    pub dt: f64,
    pub n_paths: usize,
    pub master_seed: u64,
    /// Cone-exit slack: a path "exits" when min lambda_1 < -psd_slack.
    pub psd_slack: f64,
    /// Comparison-test slack in units of sqrt(dt).
    pub comparison_slack: f64,
    /// Confidence multiplier k for standard-error bands.
    pub confidence: f64,
    /// Euler bias allowance added to the Laplace agreement band.
    pub bias_allowance: f64,
    /// Particle-drift regularization threshold.
    pub eps_reg: f64,
    /// Relative eigenvalue floor for numeric rank decisions.
    pub rank_epsilon: f64,
    /// Budget for the fraction of paths allowed to exit the cone.
    /// A discretization artifact, not a law property; see verify_psd_retention.
    pub exit_budget: f64,
    /// Diagonal of the Laplace test matrix u.
    pub u_diag: Vec<f64>,
    pub report_json: Option<PathBuf>,
    pub paths_csv: Option<PathBuf>,
}

fn default_u_diag(p: usize) -> Vec<f64> {
    let mut u = vec![0.1; p];
    u[0] = 0.3;
    u
}

impl ExperimentConfig {
    /// Baseline configuration: identity start, unit horizon, dt = 2^-10,
    /// seed 42, spec-default tolerances.
    pub fn new(experiment: &str, p: usize) -> Self {
        assert!(p >= 1, "dimension must be at least 1");
        ExperimentConfig {
            experiment: experiment.to_string(),
            p,
            alpha: p as f64,
            x0: SymMatrix::identity(p).upper_triangle(),
            t_end: 1.0,
            dt: sde::DEFAULT_DT,
            n_paths: 1000,
            master_seed: 42,
            psd_slack: 0.05,
            comparison_slack: 10.0,
            confidence: 3.0,
            bias_allowance: 0.01,
            eps_reg: sde::DEFAULT_EPS_REG,
            rank_epsilon: symcore::DEFAULT_RANK_EPSILON,
            exit_budget: 0.01,
            u_diag: default_u_diag(p),
            report_json: None,
            paths_csv: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.experiment.is_empty() {
            return Err(Error::Config("experiment name is empty".into()));
        }
        if self.p == 0 {
            return Err(Error::Config("dimension must be at least 1".into()));
        }
        if self.n_paths == 0 {
            return Err(Error::Config("n_paths must be at least 1".into()));
        }
        if !self.alpha.is_finite() {
            return Err(Error::Config(format!("alpha must be finite, got {}", self.alpha)));
        }
        let len = self.p * (self.p + 1) / 2;
        if self.x0.len() != len {
            return Err(Error::Config(format!(
                "x0 needs {len} upper-triangle entries for p = {}, got {}",
                self.p,
                self.x0.len()
            )));
        }
        if self.u_diag.len() != self.p {
            return Err(Error::Config(format!(
                "u_diag needs {} entries, got {}",
                self.p,
                self.u_diag.len()
            )));
        }
        for (name, v) in [
            ("psd_slack", self.psd_slack),
            ("comparison_slack", self.comparison_slack),
            ("confidence", self.confidence),
            ("rank_epsilon", self.rank_epsilon),
            ("exit_budget", self.exit_budget),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("bias_allowance", self.bias_allowance), ("eps_reg", self.eps_reg)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("{name} must be nonnegative, got {v}")));
            }
        }
        self.grid()?;
        self.x0_matrix()?;
        Ok(())
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.t_end, self.dt)
    }

    pub fn x0_matrix(&self) -> Result<SymMatrix> {
        SymMatrix::from_upper_triangle(self.p, &self.x0)
    }

    pub fn u_matrix(&self) -> Result<SymMatrix> {
        if self.u_diag.len() != self.p {
            return Err(Error::Config(format!(
                "u_diag needs {} entries, got {}",
                self.p,
                self.u_diag.len()
            )));
        }
        Ok(SymMatrix::from_diagonal(&self.u_diag))
    }

    /// Applies one key=value override. Setting `p` re-defaults x0 and
    /// u_diag when their sizes no longer fit; later keys can then override
    /// them, and validation catches anything left inconsistent.
    pub fn apply_kv(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str, v: &str| {
            Error::Config(format!("invalid {what}: {v:?}"))
        };
        match key {
            "experiment" => self.experiment = value.to_string(),
            "p" => {
                self.p = value.parse().map_err(|_| bad("p", value))?;
                if self.p == 0 {
                    return Err(Error::Config("dimension must be at least 1".into()));
                }
                if self.x0.len() != self.p * (self.p + 1) / 2 {
                    self.x0 = SymMatrix::identity(self.p).upper_triangle();
                }
                if self.u_diag.len() != self.p {
                    self.u_diag = default_u_diag(self.p);
                }
            }
            "alpha" => self.alpha = value.parse().map_err(|_| bad("alpha", value))?,
            "x0" => self.x0 = parse_x0_spec(self.p, value)?,
            "t_end" => self.t_end = value.parse().map_err(|_| bad("t_end", value))?,
            "dt" => self.dt = value.parse().map_err(|_| bad("dt", value))?,
            "n_paths" => self.n_paths = value.parse().map_err(|_| bad("n_paths", value))?,
            "master_seed" => {
                self.master_seed = value.parse().map_err(|_| bad("master_seed", value))?
            }
            "psd_slack" => self.psd_slack = value.parse().map_err(|_| bad("psd_slack", value))?,
            "comparison_slack" => {
                self.comparison_slack =
                    value.parse().map_err(|_| bad("comparison_slack", value))?
            }
            "confidence" => {
                self.confidence = value.parse().map_err(|_| bad("confidence", value))?
            }
            "bias_allowance" => {
                self.bias_allowance = value.parse().map_err(|_| bad("bias_allowance", value))?
            }
            "eps_reg" => self.eps_reg = value.parse().map_err(|_| bad("eps_reg", value))?,
            "rank_epsilon" => {
                self.rank_epsilon = value.parse().map_err(|_| bad("rank_epsilon", value))?
            }
            "exit_budget" => {
                self.exit_budget = value.parse().map_err(|_| bad("exit_budget", value))?
            }
            "u_diag" => {
                self.u_diag = value
                    .split(',')
                    .map(|s| s.trim().parse().map_err(|_| bad("u_diag", value)))
                    .collect::<Result<Vec<f64>>>()?;
            }
            "report_json" => self.report_json = Some(PathBuf::from(value)),
            "paths_csv" => self.paths_csv = Some(PathBuf::from(value)),
            _ => {
                return Err(Error::Config(format!("unknown config key {key:?}")));
            }
        }
        Ok(())
    }

    /// Reads a flat `key = value` file (`#` comments). The dimension key is
    /// applied first so that later x0/u_diag entries parse against it.
    pub fn from_kv_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut pairs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            pairs.push((key.trim().to_string(), value.trim().to_string()));
        }
        let p = match pairs.iter().find(|(k, _)| k == "p") {
            Some((_, v)) => v
                .parse()
                .map_err(|_| Error::Config(format!("invalid p: {v:?}")))?,
            None => 2,
        };
        if p == 0 {
            return Err(Error::Config("dimension must be at least 1".into()));
        }
        let mut cfg = ExperimentConfig::new("", p);
        for (key, value) in &pairs {
            if key != "p" {
                cfg.apply_kv(key, value)?;
            }
        }
        Ok(cfg)
    }
}

/// Starting-matrix grammar: `zero` | `identity` | `diag:a,b,c` | `file:PATH`
/// (file holds the p(p+1)/2 upper-triangle entries, comma or whitespace
/// separated). Returns the row-major upper triangle.
pub fn parse_x0_spec(p: usize, spec: &str) -> Result<Vec<f64>> {
    if p == 0 {
        return Err(Error::Config("dimension must be at least 1".into()));
    }
    let spec = spec.trim();
    if spec == "zero" {
        return Ok(SymMatrix::zeros(p).upper_triangle());
    }
    if spec == "identity" {
        return Ok(SymMatrix::identity(p).upper_triangle());
    }
    if let Some(list) = spec.strip_prefix("diag:") {
        let diag = parse_float_list(list)?;
        if diag.len() != p {
            return Err(Error::Config(format!(
                "diag spec needs {p} values, got {}",
                diag.len()
            )));
        }
        return Ok(SymMatrix::from_diagonal(&diag).upper_triangle());
    }
    if let Some(path) = spec.strip_prefix("file:") {
        let text = std::fs::read_to_string(path.trim())?;
        let upper = parse_float_list(&text)?;
        let len = p * (p + 1) / 2;
        if upper.len() != len {
            return Err(Error::Config(format!(
                "x0 file needs {len} upper-triangle entries for p = {p}, got {}",
                upper.len()
            )));
        }
        // Round-trip through the matrix type to validate finiteness early.
        return Ok(SymMatrix::from_upper_triangle(p, &upper)?.upper_triangle());
    }
    Err(Error::Config(format!(
        "x0 spec {spec:?} is not zero | identity | diag:a,b,... | file:PATH"
    )))
}

fn parse_float_list(text: &str) -> Result<Vec<f64>> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Error::Config(format!("invalid number {s:?}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn defaults_validate() {
        for p in 1..=4 {
            ExperimentConfig::new("laplace", p).validate().unwrap();
        }
    }

    #[test]
    fn validation_catches_size_mismatches() {
        let mut cfg = ExperimentConfig::new("laplace", 2);
        cfg.x0 = vec![1.0];
        assert!(cfg.validate().is_err());

        let mut cfg = ExperimentConfig::new("laplace", 2);
        cfg.u_diag = vec![0.3];
        assert!(cfg.validate().is_err());

        let mut cfg = ExperimentConfig::new("laplace", 2);
        cfg.dt = 0.3;
        assert!(cfg.validate().is_err());

        let mut cfg = ExperimentConfig::new("laplace", 2);
        cfg.n_paths = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn x0_grammar_variants() {
        assert_eq!(parse_x0_spec(2, "zero").unwrap(), vec![0.0, 0.0, 0.0]);
        assert_eq!(parse_x0_spec(2, "identity").unwrap(), vec![1.0, 0.0, 1.0]);
        assert_eq!(parse_x0_spec(2, "diag:1,2").unwrap(), vec![1.0, 0.0, 2.0]);
        assert!(parse_x0_spec(2, "diag:1").is_err());
        assert!(parse_x0_spec(2, "diag:1,oops").is_err());
        assert!(parse_x0_spec(2, "id").is_err());
    }

    #[test]
    fn x0_file_spec_reads_upper_triangle() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x0.csv");
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "1.0, 0.25, 2.0").unwrap();
        drop(f);
        let spec = format!("file:{}", path.display());
        assert_eq!(parse_x0_spec(2, &spec).unwrap(), vec![1.0, 0.25, 2.0]);
        assert!(parse_x0_spec(3, &spec).is_err());
    }

    #[test]
    fn kv_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.conf");
        std::fs::write(
            &path,
            "# comparison run\nexperiment = comparison\np = 3\nalpha = 1.5\n\
             x0 = diag:0,1,2\nn_paths = 10\ndt = 0.25\nmaster_seed = 7\n",
        )
        .unwrap();
        let cfg = ExperimentConfig::from_kv_file(&path).unwrap();
        assert_eq!(cfg.experiment, "comparison");
        assert_eq!(cfg.p, 3);
        assert_eq!(cfg.alpha, 1.5);
        assert_eq!(cfg.x0, vec![0.0, 0.0, 0.0, 1.0, 0.0, 2.0]);
        assert_eq!(cfg.n_paths, 10);
        assert_eq!(cfg.master_seed, 7);
        // p was applied before x0 even though it appears later in the file.
        cfg.validate().unwrap();
    }

    #[test]
    fn kv_file_rejects_unknown_keys_and_bad_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.conf");
        std::fs::write(&path, "velocity = 9\n").unwrap();
        assert!(ExperimentConfig::from_kv_file(&path).is_err());
        std::fs::write(&path, "no equals sign\n").unwrap();
        assert!(ExperimentConfig::from_kv_file(&path).is_err());
    }

    #[test]
    fn setting_p_redefaults_dependent_fields() {
        let mut cfg = ExperimentConfig::new("laplace", 2);
        cfg.apply_kv("p", "3").unwrap();
        assert_eq!(cfg.x0.len(), 6);
        assert_eq!(cfg.u_diag.len(), 3);
        cfg.validate().unwrap();
        assert!(cfg.apply_kv("p", "0").is_err());
    }

    #[test]
    fn config_serializes_through_json() {
        let cfg = ExperimentConfig::new("negativity", 2);
        let json = serde_json::to_string(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(cfg, back);
    }
}
