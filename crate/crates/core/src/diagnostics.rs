//! Checkable consequences of the convergence and error analysis.
//!
//! The EM map `M = T o E` with `E(w) = B w + mu` and `T` the firm
//! thresholding prox is Lipschitz with constant
//! `C = alpha / (alpha - b) * (1 - (xi2/sigma2) rho_min)`, where `b` is the
//! prox scale. Iterates therefore approach any fixed point geometrically
//! when `C < 1`. The distance from a stationary point to the true weights is
//! bounded separately in terms of the restricted strong convexity curvature
//! `alpha1` and the noise correlation `||X^H Lambda^(1/2) e||_inf`.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, domain, Error, Result};
use crate::estimators::{BatchProblem, EmTrace};
use crate::linalg::hermitian_eigenvalues;
use crate::penalty::{PenaltyConfig, Regime};
use crate::CVec;

/// Which product plays the role of the prox scale in `C`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BetaConvention {
    /// `sigma2 * gamma`.
    Sigma2,
    /// `xi2 * gamma`, the scale the estimators actually use.
    Xi2,
}

impl BetaConvention {
    pub fn scale(self, gamma: f64, sigma2: f64, xi2: f64) -> f64 {
        match self {
            BetaConvention::Sigma2 => sigma2 * gamma,
            BetaConvention::Xi2 => xi2 * gamma,
        }
    }
}

/// Lipschitz constant of the EM map under firm thresholding.
pub fn lipschitz_c(
    rho_min: f64,
    alpha: f64,
    gamma: f64,
    sigma2: f64,
    xi2: f64,
    convention: BetaConvention,
) -> Result<f64> {
    if !(rho_min >= 0.0) {
        return domain(format!("rho_min must be nonnegative, got {rho_min}"));
    }
    if !(alpha > 0.0 && sigma2 > 0.0 && xi2 > 0.0 && gamma >= 0.0) {
        return domain("alpha, sigma2, xi2 must be positive and gamma nonnegative");
    }
    let b = convention.scale(gamma, sigma2, xi2);
    if b >= alpha {
        return domain(format!(
            "prox scale {b} is not below alpha = {alpha}; the map is not Lipschitz"
        ));
    }
    let contraction = 1.0 - xi2 / sigma2 * rho_min;
    if contraction < 0.0 {
        return domain(format!(
            "(xi2/sigma2) rho_min = {} exceeds one",
            xi2 / sigma2 * rho_min
        ));
    }
    Ok(alpha / (alpha - b) * contraction)
}

/// Extreme eigenvalues `(rho_min, rho_max)` of `X^H Lambda X`.
pub fn gram_extremes(problem: &BatchProblem) -> Result<(f64, f64)> {
    let eig = hermitian_eigenvalues(&problem.gram())?;
    let lo = eig.first().copied().unwrap_or(0.0).max(0.0);
    let hi = eig.last().copied().unwrap_or(0.0).max(0.0);
    Ok((lo, hi))
}

/// Restricted strong convexity curvature: the smallest eigenvalue of
/// `(1/n) X^H Lambda X`, clamped at zero.
pub fn rsc_alpha1(problem: &BatchProblem) -> Result<f64> {
    let (lo, _) = gram_extremes(problem)?;
    Ok(lo / problem.n() as f64)
}

/// Outcome of [`contraction_audit`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContractionAudit {
    pub passed: bool,
    /// `||w^(k) - w*||` for every iterate.
    pub distances: Vec<f64>,
    /// `||w^(k+1) - w*|| / ||w^(k) - w*||`; zero when the denominator is zero.
    pub ratios: Vec<f64>,
    /// `C^K ||w^(0) - w*||`.
    pub final_bound: f64,
}

const AUDIT_SLACK: f64 = 1e-9;

/// Check `||w^(k+1) - w*|| <= C ||w^(k) - w*|| + 1e-9` along a firm
/// thresholding trace, and the accumulated bound at the last iterate.
pub fn contraction_audit(trace: &EmTrace, w_star: &CVec, c: f64) -> Result<ContractionAudit> {
    if trace.regime != Regime::Firm {
        return Err(Error::NotFirmThresholding);
    }
    if trace.is_empty() {
        return domain("empty trace");
    }
    check_dim(w_star.len(), trace.iterates[0].len())?;
    let distances: Vec<f64> = trace.iterates.iter().map(|w| (w - w_star).norm()).collect();
    let mut passed = true;
    let mut ratios = Vec::with_capacity(distances.len().saturating_sub(1));
    for pair in distances.windows(2) {
        ratios.push(if pair[0] > 0.0 { pair[1] / pair[0] } else { 0.0 });
        if pair[1] > c * pair[0] + AUDIT_SLACK {
            passed = false;
        }
    }
    let k = distances.len() - 1;
    let final_bound = c.powi(k as i32) * distances[0];
    if distances[k] > final_bound + AUDIT_SLACK {
        passed = false;
    }
    Ok(ContractionAudit {
        passed,
        distances,
        ratios,
        final_bound,
    })
}

/// Relaxation-error bound and the parameter window it requires.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ErrorBoundReport {
    /// Lipschitz constant of the EM map (infinite outside the firm regime).
    #[serde(rename = "C")]
    pub c: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub alpha1: f64,
    /// Right-hand side of the relaxation-error bound.
    pub relax_bound: f64,
    /// Lower end of the admissible `gamma` window.
    pub gamma_lo: f64,
    /// Upper end (exclusive) of the admissible `gamma` window.
    pub gamma_hi: f64,
    /// The window is nonempty.
    pub gamma_feasible: bool,
    /// The configured `gamma` lies in the window.
    pub gamma_in_window: bool,
    /// `||X^H Lambda^(1/2) e||_inf`.
    pub noise_correlation: f64,
    /// Support size of the true weights.
    pub s: usize,
}

/// Evaluate the relaxation-error bound on a concrete instance with known
/// noise realization `eps` and true weights.
pub fn theorem2_bound(
    problem: &BatchProblem,
    eps: &CVec,
    w_true: &CVec,
    penalty: &PenaltyConfig,
    alpha1: f64,
    convention: BetaConvention,
) -> Result<ErrorBoundReport> {
    check_dim(problem.n(), eps.len())?;
    check_dim(problem.dim(), w_true.len())?;
    let alpha = penalty.alpha;
    if !(3.0 * alpha < 4.0 * alpha1) {
        return domain(format!(
            "bound requires 3 alpha < 4 alpha1, got alpha = {alpha}, alpha1 = {alpha1}"
        ));
    }
    let (rho_min, rho_max) = gram_extremes(problem)?;
    let weights = problem.weights();
    // X^H Lambda^(1/2) conj(e)
    let scaled = CVec::from_iterator(
        eps.len(),
        eps.iter().zip(&weights).map(|(e, w)| e.conj() * w.sqrt()),
    );
    let corr = problem.design().ad_mul(&scaled);
    let noise_correlation = corr.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let s = w_true.iter().filter(|z| z.norm() != 0.0).count();
    let n = problem.n() as f64;
    let relax_bound = 6.0 * (s as f64).sqrt() / (n * (4.0 * alpha1 - 3.0 * alpha)) * 4.0 * noise_correlation;
    let sigma2 = penalty.sigma2;
    let gamma_lo = 4.0 * noise_correlation / sigma2;
    let gamma_hi = if rho_max > 0.0 {
        alpha * rho_min / (sigma2 * rho_max)
    } else {
        0.0
    };
    let c =
        lipschitz_c(rho_min, alpha, penalty.gamma, sigma2, penalty.xi2, convention).unwrap_or(f64::INFINITY);
    Ok(ErrorBoundReport {
        c,
        rho_min,
        rho_max,
        alpha1,
        relax_bound,
        gamma_lo,
        gamma_hi,
        gamma_feasible: gamma_lo < gamma_hi,
        gamma_in_window: gamma_lo <= penalty.gamma && penalty.gamma < gamma_hi,
        noise_correlation,
        s,
    })
}
