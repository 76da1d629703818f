use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use mcpfilt_core::experiment::{table_defaults, Algorithm, Scenario, ScenarioConfig, StaticDiagConfig};
use mcpfilt_core::simgen::{JakesConfig, MtsConfig, VolterraConfig};
use mcpfilt_core::TiePolicy;
use serde::{Deserialize, Serialize};

/// Experiment description as read from TOML. Every field is optional; unset
/// fields fall back to the scenario preset.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Option<Scenario>,
    pub algorithms: Option<Vec<Algorithm>>,
    pub snr_db: Option<f64>,
    pub lambda: Option<f64>,
    pub gamma: Option<f64>,
    pub alpha: Option<f64>,
    /// EM iterations per sample.
    #[serde(rename = "K")]
    pub k: Option<usize>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub xi2: Option<f64>,
    pub xi2_safety: Option<f64>,
    pub sigma2: Option<f64>,
    pub rls_delta: Option<f64>,
    pub tie_policy: Option<TiePolicy>,
    pub pred_window_start: Option<usize>,
    pub jakes: Option<JakesConfig>,
    pub volterra: Option<VolterraConfig>,
    pub mts: Option<MtsConfig>,
    pub static_diag: Option<StaticDiagConfig>,
}

/// Command-line overrides; each flag mirrors a top-level config field.
#[derive(Args, Clone, Debug, Default)]
pub struct Overrides {
    /// TOML experiment file; flags given alongside it take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub scenario: Option<Scenario>,
    /// Comma-separated, e.g. `rls,sparls_l1,sparls_mcp`.
    #[arg(long, value_delimiter = ',')]
    pub algorithms: Option<Vec<Algorithm>>,
    #[arg(long)]
    pub snr_db: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long = "k", short = 'K')]
    pub k: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, short = 'o')]
    pub output_dir: Option<PathBuf>,
    #[arg(long)]
    pub xi2: Option<f64>,
    #[arg(long)]
    pub xi2_safety: Option<f64>,
    #[arg(long)]
    pub sigma2: Option<f64>,
    #[arg(long)]
    pub rls_delta: Option<f64>,
    #[arg(long, value_parser = parse_tie)]
    pub tie_policy: Option<TiePolicy>,
    #[arg(long)]
    pub pred_window_start: Option<usize>,
}

fn parse_tie(s: &str) -> Result<TiePolicy, String> {
    match s.to_ascii_lowercase().as_str() {
        "zero" => Ok(TiePolicy::Zero),
        "keep" => Ok(TiePolicy::Keep),
        _ => Err(format!("tie policy must be `zero` or `keep`, got {s:?}")),
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).context("invalid experiment config")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml_str(&text).with_context(|| format!("in {}", path.display()))
    }

    /// Read the config file named in `o` (if any) and apply the flags on top.
    pub fn from_overrides(o: &Overrides) -> Result<Self> {
        let mut cfg = match &o.config {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        macro_rules! take {
            ($($f:ident),*) => {$(
                if o.$f.is_some() {
                    cfg.$f = o.$f.clone();
                }
            )*};
        }
        take!(
            scenario,
            algorithms,
            snr_db,
            lambda,
            gamma,
            alpha,
            k,
            trials,
            seed,
            output_dir,
            xi2,
            xi2_safety,
            sigma2,
            rls_delta,
            tie_policy,
            pred_window_start
        );
        Ok(cfg)
    }

    /// Output directory, defaulting to `runs/<scenario>`.
    pub fn output_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| {
            let scen = self.scenario.unwrap_or(Scenario::Jakes);
            PathBuf::from("runs").join(scen.name().to_ascii_lowercase())
        })
    }

    /// Fully resolved scenario configuration.
    pub fn resolve(&self) -> Result<ScenarioConfig> {
        let scenario = self.scenario.unwrap_or(Scenario::Jakes);
        let snr = self.snr_db.unwrap_or(20.0);
        let mut cfg = ScenarioConfig::preset(scenario, snr);
        if let Some(j) = &self.jakes {
            cfg.jakes = j.clone();
        }
        if let Some(v) = &self.volterra {
            cfg.volterra = v.clone();
        }
        if let Some(m) = &self.mts {
            cfg.mts = m.clone();
        }
        if let Some(s) = &self.static_diag {
            cfg.static_diag = s.clone();
        }
        cfg.jakes.snr_db = snr;
        cfg.volterra.snr_db = snr;

        let tracking = matches!(scenario, Scenario::Jakes | Scenario::Volterra);
        if tracking && table_defaults(scenario, snr).is_none() && self.gamma.is_none() {
            bail!("no tabulated gamma for {scenario} at {snr} dB; set gamma explicitly");
        }
        if let Some(a) = &self.algorithms {
            cfg.algorithms = a.clone();
        }
        let f = &mut cfg.filter;
        if let Some(v) = self.lambda {
            f.lambda = v;
        }
        if let Some(v) = self.gamma {
            f.gamma = v;
        }
        if let Some(v) = self.alpha {
            f.alpha = v;
        }
        if let Some(v) = self.k {
            f.em_iters = v;
        }
        if let Some(v) = self.xi2_safety {
            f.xi2_safety = v;
        }
        if let Some(v) = self.rls_delta {
            f.rls_delta = v;
        }
        if let Some(v) = self.tie_policy {
            f.tie_policy = v;
        }
        f.xi2 = self.xi2.or(f.xi2);
        f.sigma2 = self.sigma2.or(f.sigma2);
        if let Some(v) = self.trials {
            cfg.trials = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.pred_window_start {
            cfg.pred_window_start = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_values_survive_resolution() {
        let cfg = ExperimentConfig::from_toml_str("scenario = \"VOLTERRA\"\nsnr_db = 30\n")
            .unwrap()
            .resolve()
            .unwrap();
        assert_eq!(
            (cfg.filter.gamma, cfg.filter.alpha, cfg.filter.lambda),
            (5.0, 0.5, 0.99)
        );
        assert_eq!(cfg.volterra.snr_db, 30.0);
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.toml");
        fs::write(
            &path,
            "scenario = \"JAKES\"\ntrials = 3\ngamma = 4.0\nK = 2\n\n[jakes]\nm = 40\n",
        )
        .unwrap();
        let o = Overrides {
            config: Some(path),
            gamma: Some(7.0),
            ..Overrides::default()
        };
        let cfg = ExperimentConfig::from_overrides(&o).unwrap().resolve().unwrap();
        assert_eq!(cfg.filter.gamma, 7.0);
        assert_eq!(cfg.filter.em_iters, 2);
        assert_eq!(cfg.trials, 3);
        assert_eq!(cfg.jakes.m, 40);
        assert_eq!(cfg.jakes.snr_db, 20.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ExperimentConfig::from_toml_str("gama = 3").is_err());
        let c = ExperimentConfig::from_toml_str("snr_db = 25").unwrap();
        assert!(c.resolve().is_err());
        let c = ExperimentConfig::from_toml_str("algorithms = [\"GROUP_MCP\"]").unwrap();
        assert!(c.resolve().is_err());
    }
}
