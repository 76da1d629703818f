//! Scenario configuration, the per-trial runner and Monte Carlo summaries.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    contraction_audit, rsc_alpha1, theorem2_bound, BetaConvention, ContractionAudit, ErrorBoundReport,
};
use crate::error::{domain, Error, Result};
use crate::estimators::{
    run_to_fixed_point, select_xi2, spals, BatchProblem, FilterState, RlsState, Shrinkage,
};
use crate::metrics::{mc_aggregate, pred_error_stats, ErrorTrace, PredErrorStats, TraceSummary};
use crate::penalty::{GroupLayout, PenaltyConfig, TiePolicy};
use crate::simgen::{
    complex_normal, derive_seed, jakes_stream, mts_stream, volterra_stream, JakesConfig, MtsConfig, Stream,
    VolterraConfig,
};
use crate::CVec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Scenario {
    Jakes,
    Volterra,
    Mts,
    StaticDiag,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Algorithm {
    Rls,
    SparlsL1,
    SparlsMcp,
    GroupLasso,
    GroupMcp,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::Jakes,
        Scenario::Volterra,
        Scenario::Mts,
        Scenario::StaticDiag,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Jakes => "JAKES",
            Scenario::Volterra => "VOLTERRA",
            Scenario::Mts => "MTS",
            Scenario::StaticDiag => "STATIC_DIAG",
        }
    }
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Rls,
        Algorithm::SparlsL1,
        Algorithm::SparlsMcp,
        Algorithm::GroupLasso,
        Algorithm::GroupMcp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Rls => "RLS",
            Algorithm::SparlsL1 => "SPARLS_L1",
            Algorithm::SparlsMcp => "SPARLS_MCP",
            Algorithm::GroupLasso => "GROUP_LASSO",
            Algorithm::GroupMcp => "GROUP_MCP",
        }
    }

    /// Lower-case name used in file names.
    pub fn slug(self) -> String {
        self.name().to_ascii_lowercase()
    }

    pub fn is_grouped(self) -> bool {
        matches!(self, Algorithm::GroupLasso | Algorithm::GroupMcp)
    }
}

macro_rules! name_parsing {
    ($ty:ty, $what:literal) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                let norm = s.trim().to_ascii_uppercase().replace('-', "_");
                <$ty>::ALL
                    .into_iter()
                    .find(|v| v.name() == norm)
                    .ok_or_else(|| Error::Domain(format!("unknown {} {s:?}", $what)))
            }
        }
    };
}

name_parsing!(Scenario, "scenario");
name_parsing!(Algorithm, "algorithm");

/// `(gamma, alpha)` defaults for the tracking scenarios.
pub fn table_defaults(scenario: Scenario, snr_db: f64) -> Option<(f64, f64)> {
    match scenario {
        Scenario::Jakes if snr_db == 20.0 => Some((10.0, 0.5)),
        Scenario::Jakes if snr_db == 30.0 => Some((30.0, 0.5)),
        Scenario::Volterra if snr_db == 20.0 => Some((1.0, 0.5)),
        Scenario::Volterra if snr_db == 30.0 => Some((5.0, 0.5)),
        Scenario::Mts => Some((MTS_GAMMA, MTS_ALPHA)),
        _ => None,
    }
}

/// Penalty level for the multivariate time series.
pub const MTS_GAMMA: f64 = 120.0;
pub const MTS_ALPHA: f64 = 0.5;
/// `xi2` safety factor per scenario.
pub fn default_xi2_safety(scenario: Scenario) -> f64 {
    match scenario {
        Scenario::Volterra => VOLTERRA_XI2_SAFETY,
        _ => 0.9,
    }
}

pub const VOLTERRA_XI2_SAFETY: f64 = 0.2;
/// First time index of the prediction-error window.
pub const MTS_WINDOW_START: usize = 400;
/// Length of each steady-state window.
pub const STEADY_STATE_LEN: usize = 100;

/// Estimator settings shared by all algorithms of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterParams {
    pub lambda: f64,
    pub gamma: f64,
    pub alpha: f64,
    /// EM iterations per sample.
    pub em_iters: usize,
    pub rls_delta: f64,
    /// Fixed `xi2`; when absent it is calibrated on the first `2M` samples.
    pub xi2: Option<f64>,
    pub xi2_safety: f64,
    /// Noise variance assumed by the estimators; defaults to the stream's.
    pub sigma2: Option<f64>,
    pub tie_policy: TiePolicy,
}

impl Default for FilterParams {
    fn default() -> Self {
        FilterParams {
            lambda: 0.99,
            gamma: 10.0,
            alpha: 0.5,
            em_iters: 5,
            rls_delta: 1e-2,
            xi2: None,
            xi2_safety: 0.9,
            sigma2: None,
            tie_policy: TiePolicy::Zero,
        }
    }
}

/// Seeded static sparse instance for the diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StaticDiagConfig {
    pub m: usize,
    /// Samples per dimension; `n = n_factor * m`.
    pub n_factor: usize,
    pub s: usize,
    pub noise_std: f64,
    pub lambda: f64,
    /// `alpha = alpha_ratio * alpha1`; the bound needs `alpha_ratio < 4/3`.
    pub alpha_ratio: f64,
    /// Position of `gamma` inside the admissible window, in `[0, 1)`.
    pub gamma_position: f64,
    /// Length of the audited EM trace.
    pub audit_iters: usize,
    pub xi2_safety: f64,
}

impl Default for StaticDiagConfig {
    fn default() -> Self {
        StaticDiagConfig {
            m: 20,
            n_factor: 10,
            s: 3,
            noise_std: 1e-4,
            lambda: 1.0,
            alpha_ratio: 1.0,
            gamma_position: 0.0,
            audit_iters: 20,
            xi2_safety: 0.9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub algorithms: Vec<Algorithm>,
    pub trials: usize,
    pub seed: u64,
    pub filter: FilterParams,
    pub jakes: JakesConfig,
    pub volterra: VolterraConfig,
    pub mts: MtsConfig,
    pub static_diag: StaticDiagConfig,
    /// First time index of the prediction-error window.
    pub pred_window_start: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            scenario: Scenario::Jakes,
            algorithms: vec![Algorithm::Rls, Algorithm::SparlsL1, Algorithm::SparlsMcp],
            trials: 20,
            seed: 1,
            filter: FilterParams::default(),
            jakes: JakesConfig::default(),
            volterra: VolterraConfig::default(),
            mts: MtsConfig::default(),
            static_diag: StaticDiagConfig::default(),
            pred_window_start: MTS_WINDOW_START,
        }
    }
}

impl ScenarioConfig {
    /// Default configuration of a scenario at a given SNR, with the
    /// tabulated `(gamma, alpha)` where available.
    pub fn preset(scenario: Scenario, snr_db: f64) -> Self {
        let mut cfg = ScenarioConfig {
            scenario,
            ..ScenarioConfig::default()
        };
        cfg.algorithms = match scenario {
            Scenario::Mts => vec![Algorithm::GroupLasso, Algorithm::GroupMcp],
            _ => vec![Algorithm::Rls, Algorithm::SparlsL1, Algorithm::SparlsMcp],
        };
        cfg.jakes.snr_db = snr_db;
        cfg.volterra.snr_db = snr_db;
        cfg.filter.xi2_safety = default_xi2_safety(scenario);
        if let Some((gamma, alpha)) = table_defaults(scenario, snr_db) {
            cfg.filter.gamma = gamma;
            cfg.filter.alpha = alpha;
        }
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return domain("at least one trial is required");
        }
        if self.scenario != Scenario::StaticDiag && self.algorithms.is_empty() {
            return domain("no algorithms selected");
        }
        for a in &self.algorithms {
            if a.is_grouped() && self.scenario != Scenario::Mts {
                return domain(format!("{a} is only available for the MTS scenario"));
            }
        }
        let f = &self.filter;
        if !(f.lambda > 0.0 && f.lambda <= 1.0) {
            return domain(format!("lambda must lie in (0, 1], got {}", f.lambda));
        }
        if f.em_iters == 0 {
            return domain("K must be at least 1");
        }
        if !(f.xi2_safety > 0.0 && f.xi2_safety <= 1.0) {
            return domain("xi2 safety factor must lie in (0, 1]");
        }
        match self.scenario {
            Scenario::Jakes => self.jakes.validate(),
            Scenario::Volterra => self.volterra.validate(),
            Scenario::Mts => self.mts.validate(),
            Scenario::StaticDiag => Ok(()),
        }
    }

    /// Stream length and switch time (if any) of the scenario.
    pub fn horizon(&self) -> (usize, Option<usize>) {
        match self.scenario {
            Scenario::Jakes => (self.jakes.n, Some(self.jakes.switch_time)),
            Scenario::Volterra => (self.volterra.n, Some(self.volterra.switch_time)),
            Scenario::Mts => (self.mts.n, None),
            Scenario::StaticDiag => (0, None),
        }
    }

    /// Generate the stream of one trial; returns it with the derived seed.
    pub fn stream(&self, trial: usize) -> Result<(u64, Stream)> {
        let seed = derive_seed(self.seed, trial as u64);
        let stream = match self.scenario {
            Scenario::Jakes => jakes_stream(&JakesConfig {
                seed,
                ..self.jakes.clone()
            })?,
            Scenario::Volterra => volterra_stream(&VolterraConfig {
                seed,
                ..self.volterra.clone()
            })?,
            Scenario::Mts => mts_stream(&MtsConfig {
                seed,
                ..self.mts.clone()
            })?,
            Scenario::StaticDiag => return domain("STATIC_DIAG has no stream; use static_diag"),
        };
        Ok((seed, stream))
    }

    fn layout(&self) -> Result<Option<GroupLayout>> {
        match self.scenario {
            Scenario::Mts => Ok(Some(self.mts.layout()?)),
            _ => Ok(None),
        }
    }
}

/// Steady-state windows: the last samples before the switch and the last
/// samples of the stream (1-based, inclusive).
pub fn steady_state_windows(n: usize, switch_time: Option<usize>) -> Vec<(String, RangeInclusive<usize>)> {
    let mut out = Vec::new();
    if let Some(sw) = switch_time {
        if sw > 1 {
            let end = sw - 1;
            out.push((
                "pre_switch".to_string(),
                end.saturating_sub(STEADY_STATE_LEN - 1).max(1)..=end,
            ));
        }
    }
    if n > 0 {
        out.push((
            "final".to_string(),
            n.saturating_sub(STEADY_STATE_LEN - 1).max(1)..=n,
        ));
    }
    out
}

/// Result of one algorithm on one stream.
#[derive(Clone, Debug)]
pub struct AlgorithmRun {
    pub algorithm: Algorithm,
    /// `xi2` used by the EM-based filters.
    pub xi2: Option<f64>,
    /// Squared tracking errors, when the stream carries true weights.
    pub errors: Option<ErrorTrace>,
    /// A priori errors `d(t) - w_hat(t-1)^H x(t)`, `t = 1..=n`.
    pub pred_errors: Vec<Complex64>,
    /// `w_hat(t)` for every `t`, when requested.
    pub trajectory: Option<Vec<CVec>>,
}

#[derive(Clone, Debug)]
pub struct TrialResult {
    pub trial: usize,
    pub seed: u64,
    pub meta: BTreeMap<String, String>,
    pub runs: Vec<AlgorithmRun>,
}

/// Noise variance assumed by the EM filters.
pub fn estimator_sigma2(stream: &Stream, params: &FilterParams) -> Result<f64> {
    let s2 = params.sigma2.unwrap_or(stream.sigma2);
    if !(s2 > 0.0 && s2.is_finite()) {
        return domain(format!(
            "estimators need a positive noise variance, got {s2}; set sigma2 explicitly"
        ));
    }
    Ok(s2)
}

/// `xi2` from the first `2M` samples of the stream, or the fixed value.
pub fn calibrate_xi2(stream: &Stream, params: &FilterParams) -> Result<f64> {
    if let Some(x) = params.xi2 {
        if !(x > 0.0 && x.is_finite()) {
            return domain(format!("xi2 must be positive, got {x}"));
        }
        return Ok(x);
    }
    let sigma2 = estimator_sigma2(stream, params)?;
    let len = (2 * stream.dim()).min(stream.len());
    let xs: Vec<CVec> = stream.samples[..len].iter().map(|s| s.x.clone()).collect();
    let ds: Vec<Complex64> = stream.samples[..len].iter().map(|s| s.d).collect();
    let prefix = BatchProblem::from_regressors(&xs, &ds, params.lambda, sigma2)?;
    select_xi2(&prefix, params.xi2_safety)
}

enum Filter {
    Rls(RlsState),
    Em(Option<FilterState>, Shrinkage, PenaltyConfig),
}

/// Run one algorithm over a stream.
pub fn run_algorithm(
    stream: &Stream,
    algorithm: Algorithm,
    params: &FilterParams,
    layout: Option<&GroupLayout>,
    record_trajectory: bool,
) -> Result<AlgorithmRun> {
    if stream.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let m = stream.dim();
    let mut xi2 = None;
    let mut filter = match algorithm {
        Algorithm::Rls => Filter::Rls(RlsState::new(m, params.lambda, params.rls_delta)?),
        _ => {
            let shrinkage = match algorithm {
                Algorithm::SparlsL1 => Shrinkage::Soft,
                Algorithm::SparlsMcp => Shrinkage::Mcp,
                Algorithm::GroupLasso | Algorithm::GroupMcp => {
                    let layout = layout
                        .ok_or_else(|| Error::Domain(format!("{algorithm} needs a group layout")))?
                        .clone();
                    if algorithm == Algorithm::GroupMcp {
                        Shrinkage::GroupMcp(layout)
                    } else {
                        Shrinkage::GroupSoft(layout)
                    }
                }
                Algorithm::Rls => unreachable!(),
            };
            let x = calibrate_xi2(stream, params)?;
            xi2 = Some(x);
            let penalty =
                PenaltyConfig::new(params.alpha, params.gamma, x, estimator_sigma2(stream, params)?)?
                    .with_tie_policy(params.tie_policy);
            Filter::Em(None, shrinkage, penalty)
        }
    };

    let truth = stream.has_ground_truth();
    let n = stream.len();
    let mut errors = truth.then(|| ErrorTrace::with_capacity(n));
    let mut trajectory = record_trajectory.then(|| Vec::with_capacity(n));
    let mut pred_errors = Vec::with_capacity(n);
    let zero = CVec::zeros(m);
    for sample in &stream.samples {
        let w_hat = match &mut filter {
            Filter::Rls(state) => {
                pred_errors.push(state.step(&sample.x, sample.d)?);
                state.w_hat()
            }
            Filter::Em(state, shrinkage, penalty) => match state {
                None => {
                    pred_errors.push(sample.d);
                    *state = Some(FilterState::init(
                        &sample.x,
                        sample.d,
                        *penalty,
                        params.lambda,
                        params.em_iters,
                    )?);
                    &zero
                }
                Some(st) => {
                    pred_errors.push(sample.d - st.w_hat().dotc(&sample.x));
                    st.step(&sample.x, sample.d, shrinkage)?;
                    st.w_hat()
                }
            },
        };
        if w_hat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numerical(format!("{algorithm} estimate diverged")));
        }
        if let (Some(errs), Some(w)) = (errors.as_mut(), sample.w_true.as_ref()) {
            errs.push(w_hat, w);
        }
        if let Some(traj) = trajectory.as_mut() {
            traj.push(w_hat.clone());
        }
    }
    Ok(AlgorithmRun {
        algorithm,
        xi2,
        errors,
        pred_errors,
        trajectory,
    })
}

/// Generate the stream of trial `trial` and run every configured algorithm.
pub fn run_trial(cfg: &ScenarioConfig, trial: usize, record_trajectory: bool) -> Result<TrialResult> {
    cfg.validate()?;
    let (seed, stream) = cfg.stream(trial)?;
    let layout = cfg.layout()?;
    let runs = cfg
        .algorithms
        .iter()
        .map(|&a| run_algorithm(&stream, a, &cfg.filter, layout.as_ref(), record_trajectory))
        .collect::<Result<_>>()?;
    Ok(TrialResult {
        trial,
        seed,
        meta: stream.meta,
        runs,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WindowNmse {
    pub window: String,
    pub start: usize,
    pub end: usize,
    pub nmse_linear: f64,
    pub nmse_db: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlgorithmSummary {
    pub algorithm: Algorithm,
    pub nmse: Option<TraceSummary>,
    pub steady_state: Vec<WindowNmse>,
    /// Per-trial prediction-error statistics over the prediction window
    /// (real part of the a priori error).
    pub pred_stats: Vec<PredErrorStats>,
    /// Mean over trials of the per-trial mean prediction error.
    pub pooled_pred_mean: f64,
    /// Mean over trials of the per-trial absolute mean prediction error.
    pub pooled_abs_pred_mean: f64,
    /// Mean over trials of the per-trial prediction-error std.
    pub pooled_pred_std: f64,
}

impl AlgorithmSummary {
    pub fn window_db(&self, name: &str) -> Option<f64> {
        self.steady_state
            .iter()
            .find(|w| w.window == name)
            .map(|w| w.nmse_db)
    }
}

/// Aggregate trial results (ordered by trial index) per algorithm.
pub fn summarize(cfg: &ScenarioConfig, results: &[TrialResult]) -> Result<Vec<AlgorithmSummary>> {
    if results.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let (n, switch) = cfg.horizon();
    let windows = steady_state_windows(n, switch);
    let mut out = Vec::new();
    for (k, &algorithm) in cfg.algorithms.iter().enumerate() {
        let runs: Vec<&AlgorithmRun> = results.iter().map(|r| &r.runs[k]).collect();
        let traces: Option<Vec<ErrorTrace>> = runs.iter().map(|r| r.errors.clone()).collect();
        let nmse = traces.map(|t| mc_aggregate(&t)).transpose()?;
        let mut steady_state = Vec::new();
        if let Some(summary) = &nmse {
            for (name, range) in &windows {
                let lin = summary.window_nmse(range.clone())?;
                steady_state.push(WindowNmse {
                    window: name.clone(),
                    start: *range.start(),
                    end: *range.end(),
                    nmse_linear: lin,
                    nmse_db: crate::metrics::to_db(lin),
                });
            }
        }
        let mut pred_stats = Vec::new();
        if cfg.pred_window_start <= n {
            for r in &runs {
                let re: Vec<f64> = r.pred_errors.iter().map(|e| e.re).collect();
                pred_stats.push(pred_error_stats(&re, cfg.pred_window_start)?);
            }
        }
        let count = pred_stats.len().max(1) as f64;
        out.push(AlgorithmSummary {
            algorithm,
            nmse,
            steady_state,
            pooled_pred_mean: pred_stats.iter().map(|s| s.mean).sum::<f64>() / count,
            pooled_abs_pred_mean: pred_stats.iter().map(|s| s.mean.abs()).sum::<f64>() / count,
            pooled_pred_std: pred_stats.iter().map(|s| s.std).sum::<f64>() / count,
            pred_stats,
        });
    }
    Ok(out)
}

/// Static sparse regression instance with its generating parts.
#[derive(Clone, Debug)]
pub struct StaticInstance {
    pub problem: BatchProblem,
    pub w_true: CVec,
    pub noise: CVec,
}

/// `d(i) = w^H x(i) + e(i)` with CN(0, 1) regressors and an `s`-sparse
/// CN(0, 1) weight vector.
pub fn static_instance(cfg: &StaticDiagConfig, seed: u64) -> Result<StaticInstance> {
    if cfg.m == 0 || cfg.s == 0 || cfg.s > cfg.m || cfg.n_factor == 0 {
        return domain("static instance needs 0 < s <= m and a positive n_factor");
    }
    if !(cfg.noise_std > 0.0) {
        return domain("noise_std must be positive");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = cfg.n_factor * cfg.m;
    let mut w_true = CVec::zeros(cfg.m);
    for j in sample(&mut rng, cfg.m, cfg.s).into_iter() {
        w_true[j] = complex_normal(&mut rng, 1.0);
    }
    let sigma2 = cfg.noise_std * cfg.noise_std;
    let xs: Vec<CVec> = (0..n)
        .map(|_| CVec::from_fn(cfg.m, |_, _| complex_normal(&mut rng, 1.0)))
        .collect();
    let noise = CVec::from_fn(n, |_, _| complex_normal(&mut rng, sigma2));
    let d: Vec<Complex64> = xs
        .iter()
        .zip(noise.iter())
        .map(|(x, e)| w_true.dotc(x) + e)
        .collect();
    Ok(StaticInstance {
        problem: BatchProblem::from_regressors(&xs, &d, cfg.lambda, sigma2)?,
        w_true,
        noise,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StaticDiagReport {
    pub seed: u64,
    pub alpha: f64,
    pub gamma: f64,
    pub xi2: f64,
    pub bound: ErrorBoundReport,
    pub contraction_audit: Option<ContractionAudit>,
    /// `||w_tilde - w_true||` at the converged EM point.
    pub estimate_error: f64,
    pub fixed_point_iters: usize,
    pub bound_holds: bool,
}

const FIXED_POINT_TOL: f64 = 1e-13;
const FIXED_POINT_MAX: usize = 1_000_000;
const BOUND_SLACK: f64 = 1e-6;

/// Build a static instance, place `gamma` in the admissible window, run the
/// batch estimator to its fixed point and evaluate the error bound and the
/// contraction audit.
pub fn static_diag(cfg: &StaticDiagConfig, seed: u64) -> Result<StaticDiagReport> {
    let inst = static_instance(cfg, seed)?;
    let p = &inst.problem;
    let alpha1 = rsc_alpha1(p)?;
    let alpha = cfg.alpha_ratio * alpha1;
    let xi2 = select_xi2(p, cfg.xi2_safety)?;
    let probe = PenaltyConfig::new(alpha, 0.0, xi2, p.sigma2())?;
    let window = theorem2_bound(p, &inst.noise, &inst.w_true, &probe, alpha1, BetaConvention::Xi2)?;
    let gamma = if window.gamma_feasible {
        window.gamma_lo + cfg.gamma_position * (window.gamma_hi - window.gamma_lo)
    } else {
        window.gamma_lo
    };
    let penalty = PenaltyConfig::new(alpha, gamma, xi2, p.sigma2())?;
    let bound = theorem2_bound(
        p,
        &inst.noise,
        &inst.w_true,
        &penalty,
        alpha1,
        BetaConvention::Xi2,
    )?;
    let zero = CVec::zeros(p.dim());
    let (w_tilde, iters) = run_to_fixed_point(
        p,
        &penalty,
        &Shrinkage::Mcp,
        &zero,
        FIXED_POINT_TOL,
        FIXED_POINT_MAX,
    )?;
    let contraction_audit = if bound.c.is_finite() {
        let (_, trace) = spals(p, &penalty, &Shrinkage::Mcp, &zero, cfg.audit_iters)?;
        contraction_audit(&trace, &w_tilde, bound.c).ok()
    } else {
        None
    };
    let estimate_error = (&w_tilde - &inst.w_true).norm();
    Ok(StaticDiagReport {
        seed,
        alpha,
        gamma,
        xi2,
        bound_holds: estimate_error <= bound.relax_bound + BOUND_SLACK,
        bound,
        contraction_audit,
        estimate_error,
        fixed_point_iters: iters,
    })
}
