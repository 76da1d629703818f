use std::path::Path;

use mcpfilt_cli::ExperimentConfig;
use mcpfilt_core::experiment::{Scenario, ScenarioConfig};

#[test]
fn shipped_configs_match_presets() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("toml") {
            continue;
        }
        let exp = ExperimentConfig::load(&path).unwrap();
        let cfg = exp
            .resolve()
            .unwrap_or_else(|e| panic!("{}: {e:#}", path.display()));
        let snr = exp.snr_db.unwrap_or(20.0);
        let mut preset = ScenarioConfig::preset(cfg.scenario, snr);
        preset.trials = cfg.trials;
        preset.seed = cfg.seed;
        assert_eq!(cfg, preset, "{}", path.display());
        seen += 1;
    }
    assert_eq!(seen, 6);
}

#[test]
fn section_typos_are_rejected() {
    let exp = ExperimentConfig::from_toml_str("scenario = \"JAKES\"\n[jakes]\nswitch = 400\n");
    assert!(exp.is_err());
    let exp = ExperimentConfig::from_toml_str("scenario = \"MTS\"\n[mts]\nlag = 4\n").unwrap();
    let cfg = exp.resolve().unwrap();
    assert_eq!((cfg.scenario, cfg.mts.lag), (Scenario::Mts, 4));
}
