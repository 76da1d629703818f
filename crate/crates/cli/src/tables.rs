use std::io::Write;

use anyhow::Result;
use mcpfilt_core::experiment::{summarize, Scenario, ScenarioConfig};
use mcpfilt_core::penalty::{prox_scalar, prox_soft, Regime};
use mcpfilt_core::{Complex64, TiePolicy};

use crate::run::{group_mcp_wins, run_trials};

/// Scalar prox values on an even grid of `r` in `[0, r_max]`.
pub fn prox_table<W: Write>(
    out: W,
    beta: f64,
    alpha: f64,
    r_max: f64,
    points: usize,
    tie: TiePolicy,
) -> Result<()> {
    anyhow::ensure!(points >= 2, "need at least two grid points");
    anyhow::ensure!(r_max > 0.0, "r_max must be positive");
    let regime = Regime::of(beta, alpha);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["r", "mcp", "soft", "regime"])?;
    for k in 0..points {
        let r = r_max * k as f64 / (points - 1) as f64;
        let z = Complex64::new(r, 0.0);
        let mcp = prox_scalar(z, beta, alpha, tie)?.re;
        let soft = prox_soft(z, beta)?.re;
        w.write_record([
            r.to_string(),
            mcp.to_string(),
            soft.to_string(),
            format!("{regime:?}").to_lowercase(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Re-run a scenario for each `gamma` and write one row per algorithm and
/// steady-state window (tracking scenarios) or per algorithm (MTS).
pub fn gamma_sweep<W: Write>(out: W, base: &ScenarioConfig, gammas: &[f64]) -> Result<()> {
    anyhow::ensure!(!gammas.is_empty(), "no gamma values given");
    anyhow::ensure!(
        base.scenario != Scenario::StaticDiag,
        "gamma sweep needs a streaming scenario"
    );
    let mut w = csv::Writer::from_writer(out);
    if base.scenario == Scenario::Mts {
        w.write_record(["gamma", "algorithm", "abs_mean", "std", "group_mcp_wins"])?;
    } else {
        w.write_record(["gamma", "algorithm", "window", "nmse_db"])?;
    }
    for &g in gammas {
        let mut cfg = base.clone();
        cfg.filter.gamma = g;
        let results = run_trials(&cfg)?;
        let summaries = summarize(&cfg, &results)?;
        let wins = group_mcp_wins(&summaries)
            .map(|(a, b)| format!("{a}/{b}"))
            .unwrap_or_default();
        for a in &summaries {
            if cfg.scenario == Scenario::Mts {
                w.write_record([
                    g.to_string(),
                    a.algorithm.to_string(),
                    a.pooled_abs_pred_mean.to_string(),
                    a.pooled_pred_std.to_string(),
                    wins.clone(),
                ])?;
            } else {
                for win in &a.steady_state {
                    w.write_record([
                        g.to_string(),
                        a.algorithm.to_string(),
                        win.window.clone(),
                        win.nmse_db.to_string(),
                    ])?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prox_table_shape() {
        let mut buf = Vec::new();
        prox_table(&mut buf, 0.5, 1.0, 2.0, 5, TiePolicy::Zero).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "r,mcp,soft,regime");
        assert_eq!(lines.len(), 6);
        // r = 0.5 sits on the firm threshold, r = 1.5 is past alpha.
        assert_eq!(lines[2], "0.5,0,0,firm");
        assert_eq!(lines[4], "1.5,1.5,1,firm");
    }

    #[test]
    fn small_sweep_runs() {
        let mut cfg = ScenarioConfig::preset(Scenario::Jakes, 20.0);
        cfg.trials = 1;
        cfg.jakes.m = 10;
        cfg.jakes.k_sparse = 2;
        cfg.jakes.n = 60;
        cfg.jakes.switch_time = 31;
        let mut buf = Vec::new();
        gamma_sweep(&mut buf, &cfg, &[1.0, 3.0]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 2 * 3 * 2);
    }
}
