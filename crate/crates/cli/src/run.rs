use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use mcpfilt_core::experiment::{
    run_trial, static_diag, summarize, Algorithm, AlgorithmSummary, Scenario, ScenarioConfig,
    StaticDiagReport, TrialResult,
};
use mcpfilt_core::simgen::derive_seed;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::plot::{Chart, Series};

/// Run every trial of a tracking or MTS scenario. Trials run in parallel and
/// come back in trial order. Trajectories are kept for trial 0 of MTS runs.
pub fn run_trials(cfg: &ScenarioConfig) -> Result<Vec<TrialResult>> {
    cfg.validate()?;
    let keep = cfg.scenario == Scenario::Mts;
    let out: Vec<TrialResult> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, t, keep && t == 0))
        .collect::<mcpfilt_core::Result<_>>()?;
    Ok(out)
}

/// Static diagnostics for `cfg.trials` derived seeds.
pub fn run_static(cfg: &ScenarioConfig) -> Result<Vec<StaticDiagReport>> {
    let out: Vec<StaticDiagReport> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| static_diag(&cfg.static_diag, derive_seed(cfg.seed, t as u64)))
        .collect::<mcpfilt_core::Result<_>>()?;
    Ok(out)
}

pub struct RunOutcome {
    pub summaries: Vec<AlgorithmSummary>,
    pub static_reports: Vec<StaticDiagReport>,
    /// Files written, relative to the output directory.
    pub files: Vec<String>,
}

struct Out<'a> {
    dir: &'a Path,
    files: Vec<String>,
}

impl Out<'_> {
    fn csv(
        &mut self,
        name: &str,
        header: &[&str],
        rows: impl IntoIterator<Item = Vec<String>>,
    ) -> Result<()> {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(&r)?;
        }
        w.flush()?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.text(name, &(serde_json::to_string_pretty(value)? + "\n"))
    }
}

fn s(v: impl ToString) -> String {
    v.to_string()
}

/// Run the configured experiment and write all artifacts into `dir`.
pub fn run_experiment(cfg: &ScenarioConfig, dir: &Path) -> Result<RunOutcome> {
    cfg.validate()?;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut out = Out {
        dir,
        files: Vec::new(),
    };
    let mut trial_info = Vec::new();

    let (summaries, static_reports) = if cfg.scenario == Scenario::StaticDiag {
        let reports = run_static(cfg)?;
        write_static(&mut out, &reports)?;
        (Vec::new(), reports)
    } else {
        let results = run_trials(cfg)?;
        let summaries = summarize(cfg, &results)?;
        for r in &results {
            let xi2: BTreeMap<String, Option<f64>> = r
                .runs
                .iter()
                .map(|a| (a.algorithm.name().to_string(), a.xi2))
                .collect();
            trial_info.push(json!({ "trial": r.trial, "seed": r.seed, "meta": r.meta, "xi2": xi2 }));
        }
        if cfg.scenario == Scenario::Mts {
            write_mts(&mut out, cfg, &results, &summaries)?;
        } else {
            write_tracking(&mut out, &summaries)?;
        }
        (summaries, Vec::new())
    };

    let mut files = out.files.clone();
    files.push("manifest.json".into());
    let manifest = json!({
        "tool": "mcpfilt",
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "trials": trial_info,
        "files": files,
        "created_unix": SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
    });
    out.json("manifest.json", &manifest)?;
    Ok(RunOutcome {
        summaries,
        static_reports,
        files: out.files,
    })
}

fn write_tracking(out: &mut Out, summaries: &[AlgorithmSummary]) -> Result<()> {
    let mut series = Vec::new();
    for a in summaries {
        let Some(nmse) = &a.nmse else { continue };
        let rows = nmse
            .nmse_linear
            .iter()
            .zip(&nmse.nmse_db)
            .enumerate()
            .map(|(t, (l, d))| vec![s(t + 1), s(l), s(d)]);
        out.csv(
            &format!("nmse_{}.csv", a.algorithm.slug()),
            &["t", "nmse_linear", "nmse_db"],
            rows,
        )?;
        series.push(Series {
            label: a.algorithm.name().into(),
            points: nmse
                .nmse_db
                .iter()
                .enumerate()
                .map(|(t, d)| ((t + 1) as f64, *d))
                .collect(),
        });
    }

    let rows = summaries.iter().flat_map(|a| {
        a.steady_state.iter().map(move |w| {
            vec![
                s(a.algorithm),
                w.window.clone(),
                s(w.start),
                s(w.end),
                s(w.nmse_linear),
                s(w.nmse_db),
            ]
        })
    });
    out.csv(
        "summary.csv",
        &["algorithm", "window", "start", "end", "nmse_linear", "nmse_db"],
        rows,
    )?;

    let mut gaps = Vec::new();
    for a in summaries {
        for b in summaries {
            if a.algorithm == b.algorithm {
                continue;
            }
            for w in &a.steady_state {
                if let Some(r) = b.window_db(&w.window) {
                    gaps.push(vec![
                        w.window.clone(),
                        s(a.algorithm),
                        s(b.algorithm),
                        s(r - w.nmse_db),
                    ]);
                }
            }
        }
    }
    out.csv("gaps.csv", &["window", "algorithm", "reference", "gain_db"], gaps)?;

    let json_rows: Vec<_> = summaries
        .iter()
        .map(|a| json!({ "algorithm": a.algorithm, "steady_state": a.steady_state, "trials": a.nmse.as_ref().map(|n| n.trials) }))
        .collect();
    out.json("summary.json", &json_rows)?;

    let chart = Chart {
        title: "Monte Carlo NMSE".into(),
        x_label: "time index".into(),
        y_label: "NMSE (dB)".into(),
        series,
        legend: true,
    };
    out.text("nmse.svg", &chart.render())
}

fn write_mts(
    out: &mut Out,
    cfg: &ScenarioConfig,
    results: &[TrialResult],
    summaries: &[AlgorithmSummary],
) -> Result<()> {
    let mut rows = Vec::new();
    for a in summaries {
        for (r, p) in results.iter().zip(&a.pred_stats) {
            rows.push(vec![
                s(a.algorithm),
                s(r.trial),
                s(r.seed),
                s(p.mean),
                s(p.std),
                s(p.quantile_2_5),
                s(p.quantile_97_5),
                s(p.count),
            ]);
        }
    }
    out.csv(
        "pred_error_stats.csv",
        &[
            "algorithm",
            "trial",
            "seed",
            "mean",
            "std",
            "quantile_2_5",
            "quantile_97_5",
            "count",
        ],
        rows,
    )?;

    let avg = |a: &AlgorithmSummary, f: &dyn Fn(&mcpfilt_core::metrics::PredErrorStats) -> f64| {
        a.pred_stats.iter().map(f).sum::<f64>() / a.pred_stats.len().max(1) as f64
    };
    let rows = summaries.iter().map(|a| {
        vec![
            s(a.algorithm),
            s(a.pred_stats.len()),
            s(a.pooled_pred_mean),
            s(a.pooled_abs_pred_mean),
            s(a.pooled_pred_std),
            s(avg(a, &|p| p.quantile_2_5)),
            s(avg(a, &|p| p.quantile_97_5)),
        ]
    });
    out.csv(
        "summary.csv",
        &[
            "algorithm",
            "trials",
            "mean",
            "abs_mean",
            "std",
            "quantile_2_5",
            "quantile_97_5",
        ],
        rows,
    )?;

    let wins = group_mcp_wins(summaries);
    let json_rows: Vec<_> = summaries
        .iter()
        .map(|a| {
            json!({
                "algorithm": a.algorithm,
                "pooled_mean": a.pooled_pred_mean,
                "pooled_abs_mean": a.pooled_abs_pred_mean,
                "pooled_std": a.pooled_pred_std,
                "per_trial": a.pred_stats,
            })
        })
        .collect();
    out.json(
        "summary.json",
        &json!({ "window_start": cfg.pred_window_start, "algorithms": json_rows, "group_mcp_wins": wins }),
    )?;

    let v = cfg.mts.v;
    for run in &results[0].runs {
        let Some(traj) = &run.trajectory else { continue };
        let dim = traj.first().map_or(0, |w| w.len());
        let mut header = vec!["t".to_string()];
        header.extend((0..dim).map(|j| format!("g{}_c{}", j / v, j % v)));
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows = traj.iter().enumerate().map(|(t, w)| {
            let mut r = vec![s(t + 1)];
            r.extend(w.iter().map(|z| s(z.re)));
            r
        });
        let slug = run.algorithm.slug();
        out.csv(&format!("trajectory_{slug}.csv"), &header, rows)?;
        let series = (0..dim)
            .map(|j| Series {
                label: format!("g{}_c{}", j / v, j % v),
                points: traj
                    .iter()
                    .enumerate()
                    .map(|(t, w)| ((t + 1) as f64, w[j].re))
                    .collect(),
            })
            .collect();
        let chart = Chart {
            title: format!("{} spline coefficients, trial 0", run.algorithm),
            x_label: "time index".into(),
            y_label: "coefficient".into(),
            series,
            legend: false,
        };
        out.text(&format!("trajectory_{slug}.svg"), &chart.render())?;
    }

    let series = summaries
        .iter()
        .map(|a| Series {
            label: a.algorithm.name().into(),
            points: results[0]
                .runs
                .iter()
                .find(|r| r.algorithm == a.algorithm)
                .map(|r| {
                    r.pred_errors
                        .iter()
                        .enumerate()
                        .map(|(t, e)| ((t + 1) as f64, e.re))
                        .collect()
                })
                .unwrap_or_default(),
        })
        .collect();
    let chart = Chart {
        title: "Prediction error, trial 0".into(),
        x_label: "time index".into(),
        y_label: "d - prediction".into(),
        series,
        legend: true,
    };
    out.text("pred_error.svg", &chart.render())
}

/// Trials in which GROUP_MCP has both a smaller absolute mean and a smaller
/// std of the prediction error than GROUP_LASSO, as `(wins, trials)`.
pub fn group_mcp_wins(summaries: &[AlgorithmSummary]) -> Option<(usize, usize)> {
    let find = |alg| summaries.iter().find(|a| a.algorithm == alg);
    let (lasso, mcp) = (find(Algorithm::GroupLasso)?, find(Algorithm::GroupMcp)?);
    let wins = lasso
        .pred_stats
        .iter()
        .zip(&mcp.pred_stats)
        .filter(|(l, m)| m.mean.abs() < l.mean.abs() && m.std < l.std)
        .count();
    Some((wins, lasso.pred_stats.len()))
}

fn write_static(out: &mut Out, reports: &[StaticDiagReport]) -> Result<()> {
    let rows = reports.iter().enumerate().map(|(t, r)| {
        vec![
            s(t),
            s(r.seed),
            s(r.alpha),
            s(r.gamma),
            s(r.xi2),
            s(r.bound.c),
            s(r.bound.gamma_lo),
            s(r.bound.gamma_hi),
            s(r.bound.relax_bound),
            s(r.estimate_error),
            s(r.bound_holds),
            s(r.contraction_audit.as_ref().is_some_and(|a| a.passed)),
            s(r.fixed_point_iters),
        ]
    });
    out.csv(
        "static_diag.csv",
        &[
            "trial",
            "seed",
            "alpha",
            "gamma",
            "xi2",
            "C",
            "gamma_lo",
            "gamma_hi",
            "relax_bound",
            "estimate_error",
            "bound_holds",
            "audit_passed",
            "fixed_point_iters",
        ],
        rows,
    )?;
    out.json("summary.json", &reports)
}
