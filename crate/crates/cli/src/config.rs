use crate::error::CliError;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use sunflower::classical::Strategy;
use sunflower::expansion::CheckMode;
use sunflower::graph::Backend;
use sunflower::qsim::Mode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExpansionPart {
    Graph,
    Bipartite,
}

/// Everything a run depends on. Written verbatim into every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    pub d: u64,
    pub m: u64,
    pub n: u64,
    /// `None` means 0 for single-instance commands and N_G² for classical sweeps.
    pub naux: Option<u64>,
    pub seed: u64,
    pub trials: u64,
    pub budget_exponent: f64,
    pub mode: Mode,
    pub backend: Backend,
    pub strategy: Strategy,
    /// n grid for classical and separation sweeps.
    pub ns: Vec<usize>,
    pub beta: f64,
    pub alpha: Option<f64>,
    pub eps: Option<f64>,
    pub eps_prime: Option<f64>,
    pub eps_a: f64,
    pub n_s: Option<usize>,
    pub ell_max: usize,
    pub part: ExpansionPart,
    pub subsets: u64,
    pub sizes: Option<Vec<usize>>,
    pub bipartite_n: Vec<usize>,
    pub bipartite_d: usize,
    pub draws: u64,
    pub check: CheckMode,
    pub graph: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: String::new(),
            d: 3,
            m: 5,
            n: 8,
            naux: None,
            seed: 1,
            trials: 100,
            budget_exponent: 0.125,
            mode: Mode::Ideal,
            backend: Backend::Explicit,
            strategy: Strategy::RandomEmbedding,
            ns: vec![8, 12, 16],
            beta: 1.0 / 3.0,
            alpha: None,
            eps: None,
            eps_prime: None,
            eps_a: 1e-9,
            n_s: None,
            ell_max: 200,
            part: ExpansionPart::Graph,
            subsets: 10_000,
            sizes: None,
            bipartite_n: vec![8, 12, 16],
            bipartite_d: 3,
            draws: 200,
            check: CheckMode::Exhaustive,
            graph: None,
            out: None,
        }
    }
}

const CSV_CONFIG_PREFIX: &str = "# config: ";

/// Reads a TOML or JSON config, or the config embedded in an earlier output.
pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if let Some(line) = text.lines().find(|l| l.starts_with(CSV_CONFIG_PREFIX)) {
        return serde_json::from_str(&line[CSV_CONFIG_PREFIX.len()..]).map_err(|e| CliError::Config(e.to_string()));
    }
    if text.trim_start().starts_with('{') {
        let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
        let inner = v.get("config").cloned().unwrap_or(v);
        return serde_json::from_value(inner).map_err(|e| CliError::Config(e.to_string()));
    }
    toml::from_str(&text).map_err(|e| CliError::Config(e.to_string()))
}

pub fn csv_config_line(cfg: &RunConfig) -> String {
    format!("{CSV_CONFIG_PREFIX}{}", serde_json::to_string(cfg).expect("config serializes"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_fields_fall_back_to_defaults() {
        let c: RunConfig = toml::from_str("d = 5\nns = [8, 12]\n[check]\nmonte-carlo = { samples = 10 }\n").unwrap();
        assert_eq!(c.d, 5);
        assert_eq!(c.m, 5);
        assert_eq!(c.ns, vec![8, 12]);
        assert_eq!(c.check, CheckMode::MonteCarlo { samples: 10 });
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(toml::from_str::<RunConfig>("dd = 5").is_err());
    }

    #[test]
    fn embedded_line_round_trips() {
        let c = RunConfig { command: "spectrum".into(), d: 7, alpha: Some(2.5), ..RunConfig::default() };
        let line = csv_config_line(&c);
        let back: RunConfig = serde_json::from_str(&line[CSV_CONFIG_PREFIX.len()..]).unwrap();
        assert_eq!(back, c);
    }
}
