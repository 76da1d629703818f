//! Scaled minimax concave penalty and its proximal operators.
//!
//! The scaled MCP with envelope height `alpha` is `|w|` minus the Moreau
//! envelope of `|.|`:
//!
//! ```text
//! rho_a(w) = |w| - |w|^2 / (2a)   if |w| <= a
//!          = a / 2                otherwise
//! ```
//!
//! Its proximal map `argmin_w (1/2b)|r - w|^2 + rho_a(|w|)` depends on the
//! ratio of the prox scale `b` to `a`: firm thresholding for `b < a`, hard
//! thresholding at `sqrt(a b)` for `b > a`, and a boundary case at `b = a`.
//! Complex arguments are thresholded on their modulus; the phase passes
//! through unchanged.

use std::ops::Range;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::CVec;

/// How the prox resolves measure-zero ties (|r| exactly on a hard threshold).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TiePolicy {
    /// Return zero.
    #[default]
    Zero,
    /// Return the input unchanged.
    Keep,
}

/// Thresholding regime selected by the prox scale relative to `alpha`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `beta < alpha`: continuous three-branch shrinkage.
    Firm,
    /// `beta == alpha`.
    Boundary,
    /// `beta > alpha`: keep-or-kill at `sqrt(alpha * beta)`.
    Hard,
}

impl Regime {
    pub fn of(beta: f64, alpha: f64) -> Self {
        if beta < alpha {
            Regime::Firm
        } else if beta == alpha {
            Regime::Boundary
        } else {
            Regime::Hard
        }
    }
}

/// MCP hyperparameters shared by the estimators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PenaltyConfig {
    /// Moreau envelope height.
    pub alpha: f64,
    /// Penalization level.
    pub gamma: f64,
    /// Latent-noise scale of the EM decomposition. Must not exceed
    /// `sigma2 / lambda_max(X^H Lambda X)`; see [`crate::select_xi2`].
    pub xi2: f64,
    /// Observation-noise variance.
    pub sigma2: f64,
    #[serde(default)]
    pub tie_policy: TiePolicy,
}

impl PenaltyConfig {
    pub fn new(alpha: f64, gamma: f64, xi2: f64, sigma2: f64) -> Result<Self> {
        let cfg = PenaltyConfig {
            alpha,
            gamma,
            xi2,
            sigma2,
            tie_policy: TiePolicy::Zero,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_tie_policy(mut self, tie_policy: TiePolicy) -> Self {
        self.tie_policy = tie_policy;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return domain(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return domain(format!("gamma must be nonnegative, got {}", self.gamma));
        }
        if !(self.xi2 > 0.0 && self.xi2.is_finite()) {
            return domain(format!("xi2 must be positive, got {}", self.xi2));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return domain(format!("sigma2 must be positive, got {}", self.sigma2));
        }
        Ok(())
    }

    /// Prox scale used by the M-step, `xi2 * gamma`.
    pub fn beta(&self) -> f64 {
        self.xi2 * self.gamma
    }

    /// `xi2 / sigma2`, the step size of the E-step.
    pub fn step(&self) -> f64 {
        self.xi2 / self.sigma2
    }

    pub fn regime(&self) -> Regime {
        Regime::of(self.beta(), self.alpha)
    }
}

/// Partition of `0..dim` into consecutive groups.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupLayout {
    sizes: Vec<usize>,
}

impl GroupLayout {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return domain("group layout needs at least one group");
        }
        if sizes.contains(&0) {
            return domain("group sizes must be positive");
        }
        Ok(GroupLayout { sizes })
    }

    /// `groups` groups of `size` coefficients each.
    pub fn uniform(groups: usize, size: usize) -> Result<Self> {
        Self::new(vec![size; groups])
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn num_groups(&self) -> usize {
        self.sizes.len()
    }

    /// Total number of coefficients covered.
    pub fn dim(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn ranges(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        self.sizes.iter().scan(0usize, |start, &p| {
            let r = *start..*start + p;
            *start += p;
            Some(r)
        })
    }

    pub(crate) fn check(&self, len: usize) -> Result<()> {
        let layout = self.dim();
        if layout == len {
            Ok(())
        } else {
            Err(Error::LayoutMismatch { layout, len })
        }
    }
}

fn check_abs_alpha(w_abs: f64, alpha: f64) -> Result<()> {
    if !(w_abs >= 0.0) {
        return domain(format!("magnitude must be nonnegative, got {w_abs}"));
    }
    if !(alpha > 0.0) {
        return domain(format!("alpha must be positive, got {alpha}"));
    }
    Ok(())
}

fn check_scales(beta: f64, alpha: f64) -> Result<()> {
    if !(beta > 0.0) {
        return domain(format!("prox scale must be positive, got {beta}"));
    }
    if !(alpha > 0.0) {
        return domain(format!("alpha must be positive, got {alpha}"));
    }
    Ok(())
}

/// Scaled MCP evaluated at a magnitude.
pub fn mcp_value(w_abs: f64, alpha: f64) -> Result<f64> {
    check_abs_alpha(w_abs, alpha)?;
    Ok(mcp_unchecked(w_abs, alpha))
}

/// Moreau envelope of `|.|` with parameter `alpha`.
pub fn moreau_env(w_abs: f64, alpha: f64) -> Result<f64> {
    check_abs_alpha(w_abs, alpha)?;
    Ok(if w_abs <= alpha {
        w_abs * w_abs / (2.0 * alpha)
    } else {
        w_abs - alpha / 2.0
    })
}

#[inline]
pub(crate) fn mcp_unchecked(w_abs: f64, alpha: f64) -> f64 {
    if w_abs <= alpha {
        w_abs - w_abs * w_abs / (2.0 * alpha)
    } else {
        alpha / 2.0
    }
}

/// Separable MCP `sum_j rho_alpha(|w_j|)`.
pub fn mcp_sum(w: &CVec, alpha: f64) -> f64 {
    w.iter().map(|z| mcp_unchecked(z.norm(), alpha)).sum()
}

/// Group MCP `sum_l rho_alpha(||w_l||_2)`.
pub fn group_mcp_sum(w: &CVec, layout: &GroupLayout, alpha: f64) -> f64 {
    layout
        .ranges()
        .map(|r| mcp_unchecked(w.rows(r.start, r.len()).norm(), alpha))
        .sum()
}

/// Group lasso `sum_l ||w_l||_2`.
pub fn group_l2_sum(w: &CVec, layout: &GroupLayout) -> f64 {
    layout.ranges().map(|r| w.rows(r.start, r.len()).norm()).sum()
}

#[inline]
fn prox_scalar_unchecked(r: Complex64, beta: f64, alpha: f64, tie: TiePolicy) -> Complex64 {
    let m = r.norm();
    let on_tie = |keep: bool| if keep { r } else { Complex64::new(0.0, 0.0) };
    match Regime::of(beta, alpha) {
        Regime::Firm => {
            if m <= beta {
                Complex64::new(0.0, 0.0)
            } else if m <= alpha {
                r * (alpha / (alpha - beta) * (1.0 - beta / m))
            } else {
                r
            }
        }
        Regime::Boundary => {
            if m < alpha {
                Complex64::new(0.0, 0.0)
            } else if m == alpha {
                on_tie(tie == TiePolicy::Keep)
            } else {
                r
            }
        }
        Regime::Hard => {
            let t = (alpha * beta).sqrt();
            if m < t {
                Complex64::new(0.0, 0.0)
            } else if m == t {
                on_tie(tie == TiePolicy::Keep)
            } else {
                r
            }
        }
    }
}

/// Proximal map of the scaled MCP at prox scale `beta`.
pub fn prox_scalar(r: Complex64, beta: f64, alpha: f64, tie: TiePolicy) -> Result<Complex64> {
    check_scales(beta, alpha)?;
    Ok(prox_scalar_unchecked(r, beta, alpha, tie))
}

/// Elementwise [`prox_scalar`].
pub fn prox_vector(r: &CVec, beta: f64, alpha: f64, tie: TiePolicy) -> Result<CVec> {
    check_scales(beta, alpha)?;
    Ok(r.map(|z| prox_scalar_unchecked(z, beta, alpha, tie)))
}

pub(crate) fn prox_vector_in_place(r: &mut CVec, beta: f64, alpha: f64, tie: TiePolicy) {
    r.apply(|z| *z = prox_scalar_unchecked(*z, beta, alpha, tie));
}

/// Proximal map of the group MCP: each group is shrunk on its Euclidean norm.
///
/// Only the firm regime `beta < alpha` is defined.
pub fn prox_group(r: &CVec, layout: &GroupLayout, beta: f64, alpha: f64) -> Result<CVec> {
    check_scales(beta, alpha)?;
    if beta >= alpha {
        return domain(format!(
            "group prox requires beta < alpha, got beta = {beta}, alpha = {alpha}"
        ));
    }
    layout.check(r.len())?;
    let mut out = r.clone();
    prox_group_in_place(&mut out, layout, beta, alpha);
    Ok(out)
}

pub(crate) fn prox_group_in_place(r: &mut CVec, layout: &GroupLayout, beta: f64, alpha: f64) {
    for range in layout.ranges() {
        let mut block = r.rows_mut(range.start, range.len());
        let norm = block.norm();
        if norm <= beta {
            block.fill(Complex64::new(0.0, 0.0));
        } else if norm <= alpha {
            block.scale_mut(alpha / (alpha - beta) * (1.0 - beta / norm));
        }
    }
}

/// Soft thresholding: `max(|r| - threshold, 0) * r / |r|`.
pub fn prox_soft(r: Complex64, threshold: f64) -> Result<Complex64> {
    if !(threshold >= 0.0) {
        return domain(format!("threshold must be nonnegative, got {threshold}"));
    }
    Ok(soft_unchecked(r, threshold))
}

#[inline]
fn soft_unchecked(r: Complex64, threshold: f64) -> Complex64 {
    let m = r.norm();
    if m <= threshold {
        Complex64::new(0.0, 0.0)
    } else {
        r * (1.0 - threshold / m)
    }
}

pub(crate) fn soft_in_place(r: &mut CVec, threshold: f64) {
    r.apply(|z| *z = soft_unchecked(*z, threshold));
}

/// Block soft thresholding (group lasso prox).
pub fn prox_group_soft(r: &CVec, layout: &GroupLayout, threshold: f64) -> Result<CVec> {
    if !(threshold >= 0.0) {
        return domain(format!("threshold must be nonnegative, got {threshold}"));
    }
    layout.check(r.len())?;
    let mut out = r.clone();
    group_soft_in_place(&mut out, layout, threshold);
    Ok(out)
}

pub(crate) fn group_soft_in_place(r: &mut CVec, layout: &GroupLayout, threshold: f64) {
    for range in layout.ranges() {
        let mut block = r.rows_mut(range.start, range.len());
        let norm = block.norm();
        if norm <= threshold {
            block.fill(Complex64::new(0.0, 0.0));
        } else {
            block.scale_mut(1.0 - threshold / norm);
        }
    }
}
