//! Experiment configuration: defaults, a flat `key = value` file, the
//! `WEYLAB_BUDGET` environment variable, then command-line flags.

use std::path::{Path, PathBuf};

use crate::error::CliError;

pub const BUDGET_ENV: &str = "WEYLAB_BUDGET";

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Enumerated tuples (mean values, h-boxes, scans).
    pub budget: u64,
    /// Points of a minimization box.
    pub box_budget: u64,
    /// The `eps` in `X^{-sigma + eps}`.
    pub epsilon: f64,
    /// Diagnostic floor on `sum_h |sum_n e(h x_n)| / N`.
    pub lemma42_floor: f64,
    /// Allowance added to predicted exponents in slope checks.
    pub slope_slack: f64,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 1,
            budget: 200_000_000,
            box_budget: 200_000_000,
            epsilon: 0.05,
            lemma42_floor: 0.3,
            slope_slack: 1.0,
            out: None,
        }
    }
}

fn bad(key: &str, value: &str) -> CliError {
    CliError::Usage(format!("invalid value {value:?} for config key {key}"))
}

impl ExperimentConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let value = value.trim();
        match key.trim() {
            "seed" => self.seed = value.parse().map_err(|_| bad(key, value))?,
            "budget" => self.budget = parse_count(value).ok_or_else(|| bad(key, value))?,
            "box_budget" => self.box_budget = parse_count(value).ok_or_else(|| bad(key, value))?,
            "epsilon" => self.epsilon = value.parse().map_err(|_| bad(key, value))?,
            "lemma42_floor" => self.lemma42_floor = value.parse().map_err(|_| bad(key, value))?,
            "slope_slack" => self.slope_slack = value.parse().map_err(|_| bad(key, value))?,
            "out" => self.out = Some(PathBuf::from(value)),
            other => return Err(CliError::Usage(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Parses a flat config: one `key = value` per line, `#` starts a comment.
    pub fn parse_text(&mut self, text: &str) -> Result<(), CliError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("config line {}: expected key = value", n + 1))
            })?;
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn load_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.parse_text(&text)
    }

    pub fn apply_env(&mut self) -> Result<(), CliError> {
        if let Ok(v) = std::env::var(BUDGET_ENV) {
            self.budget = parse_count(&v).ok_or_else(|| bad(BUDGET_ENV, &v))?;
            self.box_budget = self.budget;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.budget == 0 || self.box_budget == 0 {
            return Err(CliError::Usage("budgets must be positive".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(CliError::Usage(format!(
                "epsilon = {} must lie in (0, 0.5)",
                self.epsilon
            )));
        }
        if !(self.lemma42_floor >= 0.0 && self.slope_slack >= 0.0) {
            return Err(CliError::Usage(
                "floors and slack must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// Accepts plain integers and `2e8`-style values.
pub fn parse_count(s: &str) -> Option<u64> {
    let s = s.trim().replace('_', "");
    if let Ok(v) = s.parse::<u64>() {
        return Some(v);
    }
    let f: f64 = s.parse().ok()?;
    (f.is_finite() && f >= 0.0 && f.fract() == 0.0 && f < 1.8e19).then_some(f as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_file() {
        let mut c = ExperimentConfig::default();
        c.parse_text(
            "# comment\nseed = 7\nbudget=1e6  # trailing\n\nepsilon = 0.1\nout = runs.jsonl\n",
        )
        .unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.budget, 1_000_000);
        assert_eq!(c.epsilon, 0.1);
        assert_eq!(c.out, Some(PathBuf::from("runs.jsonl")));
        c.validate().unwrap();
    }

    #[test]
    fn rejects_bad_input() {
        let mut c = ExperimentConfig::default();
        assert!(c.parse_text("seed 7").is_err());
        assert!(c.parse_text("colour = red").is_err());
        assert!(c.parse_text("budget = -3").is_err());
        c.epsilon = 0.7;
        assert!(c.validate().is_err());
        c.epsilon = 0.05;
        c.budget = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn counts() {
        assert_eq!(parse_count("2e8"), Some(200_000_000));
        assert_eq!(parse_count("1_000"), Some(1000));
        assert_eq!(parse_count("1.5"), None);
    }
}
