//! Batch and recursive EM estimators.
//!
//! Both solve the penalized weighted least squares problem
//!
//! ```text
//! (1 / 2 sigma2) sum_i lambda^(n-i) |d(i) - w^H x(i)|^2 + gamma * rho(w)
//! ```
//!
//! by alternating an E-step `r = B w + mu`, with
//! `B = I - (xi2/sigma2) sum_i lambda^(n-i) x(i) x(i)^H` and
//! `mu = (xi2/sigma2) sum_i lambda^(n-i) x(i) conj(d(i))`,
//! and an M-step that applies the proximal map of `gamma * rho` at scale
//! `xi2 * gamma`.

mod rls;
mod streaming;

pub use rls::RlsState;
pub use streaming::FilterState;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, domain, Result};
use crate::linalg::{forgetting_weights, power_iteration, weighted_gram};
use crate::penalty::{self, group_l2_sum, group_mcp_sum, mcp_sum, GroupLayout, PenaltyConfig, Regime};
use crate::{CMat, CVec};

const POWER_ITERATION_TOL: f64 = 1e-6;
const POWER_ITERATION_MAX: usize = 10_000;

/// Static weighted least squares problem over `n` samples.
///
/// Row `i` of `design` holds `x(i)^H`, so that `design^H Lambda design` is
/// `sum_i lambda^(n-1-i) x(i) x(i)^H`.
#[derive(Clone, Debug)]
pub struct BatchProblem {
    design: CMat,
    d: CVec,
    lambda: f64,
    sigma2: f64,
}

impl BatchProblem {
    /// Build from regressors `x(i)` and observations `d(i) = w^H x(i) + e(i)`.
    pub fn from_regressors(xs: &[CVec], d: &[Complex64], lambda: f64, sigma2: f64) -> Result<Self> {
        if xs.is_empty() {
            return domain("batch problem needs at least one sample");
        }
        check_dim(xs.len(), d.len())?;
        let m = xs[0].len();
        let mut design = CMat::zeros(xs.len(), m);
        for (i, x) in xs.iter().enumerate() {
            check_dim(m, x.len())?;
            for j in 0..m {
                design[(i, j)] = x[j].conj();
            }
        }
        Self::from_design(design, CVec::from_column_slice(d), lambda, sigma2)
    }

    /// Build from a design matrix whose rows are `x(i)^H`.
    pub fn from_design(design: CMat, d: CVec, lambda: f64, sigma2: f64) -> Result<Self> {
        if design.nrows() == 0 || design.ncols() == 0 {
            return domain("design must be nonempty");
        }
        check_dim(design.nrows(), d.len())?;
        if !(lambda > 0.0 && lambda <= 1.0) {
            return domain(format!("forgetting factor must lie in (0, 1], got {lambda}"));
        }
        if !(sigma2 > 0.0) {
            return domain(format!("sigma2 must be positive, got {sigma2}"));
        }
        Ok(BatchProblem {
            design,
            d,
            lambda,
            sigma2,
        })
    }

    pub fn n(&self) -> usize {
        self.design.nrows()
    }

    pub fn dim(&self) -> usize {
        self.design.ncols()
    }

    pub fn design(&self) -> &CMat {
        &self.design
    }

    pub fn observations(&self) -> &CVec {
        &self.d
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn weights(&self) -> Vec<f64> {
        forgetting_weights(self.n(), self.lambda)
    }

    /// `sum_i lambda^(n-i) x(i) x(i)^H`.
    pub fn gram(&self) -> CMat {
        weighted_gram(&self.design, &self.weights())
    }

    /// `sum_i lambda^(n-i) x(i) conj(d(i))`.
    pub fn cross(&self) -> CVec {
        let w = self.weights();
        let mut rhs = self.d.map(|z| z.conj());
        for (z, &wi) in rhs.iter_mut().zip(&w) {
            *z *= wi;
        }
        self.design.ad_mul(&rhs)
    }

    /// `B = I - (xi2 / sigma2) * gram` and `mu = (xi2 / sigma2) * cross`.
    pub fn em_operators(&self, xi2: f64) -> (CMat, CVec) {
        let c = Complex64::new(xi2 / self.sigma2, 0.0);
        let b = CMat::identity(self.dim(), self.dim()) - self.gram() * c;
        let mu = self.cross() * c;
        (b, mu)
    }

    /// Weighted residual sum `sum_i lambda^(n-i) |d(i) - w^H x(i)|^2`.
    pub fn weighted_rss(&self, w: &CVec) -> f64 {
        let fitted = &self.design * w;
        self.weights()
            .iter()
            .zip(self.d.iter().zip(fitted.iter()))
            .map(|(&wi, (d, f))| wi * (d.conj() - f).norm_sqr())
            .sum()
    }

    /// Penalized objective `(1 / 2 sigma2) * rss + gamma * rho(w)`.
    pub fn objective(&self, w: &CVec, penalty: &PenaltyConfig, shrinkage: &Shrinkage) -> f64 {
        self.weighted_rss(w) / (2.0 * self.sigma2) + shrinkage.penalty_value(w, penalty)
    }
}

/// Largest `xi2` keeping the latent-noise covariance positive semidefinite,
/// scaled by `safety`: `safety * sigma2 / lambda_max(X^H Lambda X)`.
pub fn select_xi2(problem: &BatchProblem, safety: f64) -> Result<f64> {
    if !(safety > 0.0 && safety <= 1.0) {
        return domain(format!("safety factor must lie in (0, 1], got {safety}"));
    }
    let top = power_iteration(&problem.gram(), POWER_ITERATION_TOL, POWER_ITERATION_MAX)?;
    if top <= 0.0 {
        return domain("design has no energy; xi2 is unbounded");
    }
    Ok(safety * problem.sigma2 / top)
}

/// E-step: `r = B w_prev + mu`.
pub fn em_e_step(b: &CMat, mu: &CVec, w_prev: &CVec) -> Result<CVec> {
    check_dim(b.nrows(), b.ncols())?;
    check_dim(b.ncols(), w_prev.len())?;
    check_dim(b.nrows(), mu.len())?;
    Ok(b * w_prev + mu)
}

/// M-step flavour.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Shrinkage {
    /// Elementwise MCP prox (firm, boundary or hard by `beta` vs `alpha`).
    Mcp,
    /// Elementwise soft thresholding (the l1 penalty).
    Soft,
    /// Group MCP prox; firm regime only.
    GroupMcp(GroupLayout),
    /// Block soft thresholding (group lasso).
    GroupSoft(GroupLayout),
}

impl Shrinkage {
    pub fn from_layout(layout: Option<&GroupLayout>) -> Self {
        match layout {
            Some(l) => Shrinkage::GroupMcp(l.clone()),
            None => Shrinkage::Mcp,
        }
    }

    pub(crate) fn validate(&self, penalty: &PenaltyConfig, dim: usize) -> Result<()> {
        penalty.validate()?;
        match self {
            Shrinkage::GroupMcp(layout) => {
                layout.check(dim)?;
                if penalty.gamma > 0.0 && penalty.beta() >= penalty.alpha {
                    return domain(format!(
                        "group MCP requires xi2 * gamma < alpha, got {} >= {}",
                        penalty.beta(),
                        penalty.alpha
                    ));
                }
                Ok(())
            }
            Shrinkage::GroupSoft(layout) => layout.check(dim),
            Shrinkage::Mcp | Shrinkage::Soft => Ok(()),
        }
    }

    /// Apply the M-step to `r` in place. `gamma = 0` is the identity.
    pub(crate) fn apply(&self, r: &mut CVec, penalty: &PenaltyConfig) {
        let beta = penalty.beta();
        if beta == 0.0 {
            return;
        }
        match self {
            Shrinkage::Mcp => penalty::prox_vector_in_place(r, beta, penalty.alpha, penalty.tie_policy),
            Shrinkage::Soft => penalty::soft_in_place(r, beta),
            Shrinkage::GroupMcp(layout) => penalty::prox_group_in_place(r, layout, beta, penalty.alpha),
            Shrinkage::GroupSoft(layout) => penalty::group_soft_in_place(r, layout, beta),
        }
    }

    /// `gamma * rho(w)` for the penalty matching this M-step.
    pub fn penalty_value(&self, w: &CVec, penalty: &PenaltyConfig) -> f64 {
        let g = penalty.gamma;
        match self {
            Shrinkage::Mcp => g * mcp_sum(w, penalty.alpha),
            Shrinkage::Soft => g * w.iter().map(|z| z.norm()).sum::<f64>(),
            Shrinkage::GroupMcp(layout) => g * group_mcp_sum(w, layout, penalty.alpha),
            Shrinkage::GroupSoft(layout) => g * group_l2_sum(w, layout),
        }
    }

    /// Thresholding regime of the M-step. Soft thresholding is continuous and
    /// nonexpansive, so it is reported as firm.
    pub fn regime(&self, penalty: &PenaltyConfig) -> Regime {
        match self {
            Shrinkage::Mcp => {
                if penalty.beta() == 0.0 {
                    Regime::Firm
                } else {
                    penalty.regime()
                }
            }
            _ => Regime::Firm,
        }
    }
}

/// Iterates and objective values of one EM run.
#[derive(Clone, Debug)]
pub struct EmTrace {
    /// `w^(0), ..., w^(K)`.
    pub iterates: Vec<CVec>,
    /// Penalized objective at each iterate.
    pub objective_values: Vec<f64>,
    pub regime: Regime,
}

impl EmTrace {
    pub fn len(&self) -> usize {
        self.iterates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterates.is_empty()
    }
}

/// Run `iters` EM iterations of the batch estimator with the given M-step.
pub fn spals(
    problem: &BatchProblem,
    penalty: &PenaltyConfig,
    shrinkage: &Shrinkage,
    w0: &CVec,
    iters: usize,
) -> Result<(CVec, EmTrace)> {
    check_dim(problem.dim(), w0.len())?;
    shrinkage.validate(penalty, problem.dim())?;
    let (b, mu) = problem.em_operators(penalty.xi2);

    let mut iterates = Vec::with_capacity(iters + 1);
    let mut objective_values = Vec::with_capacity(iters + 1);
    let mut w = w0.clone();
    iterates.push(w.clone());
    objective_values.push(problem.objective(&w, penalty, shrinkage));
    let mut r = CVec::zeros(problem.dim());
    for _ in 0..iters {
        r.copy_from(&mu);
        r.gemv(Complex64::new(1.0, 0.0), &b, &w, Complex64::new(1.0, 0.0));
        shrinkage.apply(&mut r, penalty);
        std::mem::swap(&mut w, &mut r);
        iterates.push(w.clone());
        objective_values.push(problem.objective(&w, penalty, shrinkage));
    }
    let trace = EmTrace {
        iterates,
        objective_values,
        regime: shrinkage.regime(penalty),
    };
    Ok((w, trace))
}

/// Batch MCP-regularized least squares by EM (grouped when `layout` is given).
pub fn spals_mcp(
    problem: &BatchProblem,
    penalty: &PenaltyConfig,
    w0: &CVec,
    iters: usize,
    layout: Option<&GroupLayout>,
) -> Result<(CVec, EmTrace)> {
    spals(problem, penalty, &Shrinkage::from_layout(layout), w0, iters)
}

/// One application of the EM map `w -> prox(B w + mu)`.
pub fn em_map(b: &CMat, mu: &CVec, w: &CVec, penalty: &PenaltyConfig, shrinkage: &Shrinkage) -> Result<CVec> {
    let mut r = em_e_step(b, mu, w)?;
    shrinkage.validate(penalty, r.len())?;
    shrinkage.apply(&mut r, penalty);
    Ok(r)
}

/// Iterate the EM map from `w0` until successive iterates move less than
/// `tol` (Euclidean) or `max_iters` is reached. Returns the last iterate and
/// the number of iterations used.
pub fn run_to_fixed_point(
    problem: &BatchProblem,
    penalty: &PenaltyConfig,
    shrinkage: &Shrinkage,
    w0: &CVec,
    tol: f64,
    max_iters: usize,
) -> Result<(CVec, usize)> {
    check_dim(problem.dim(), w0.len())?;
    shrinkage.validate(penalty, problem.dim())?;
    let (b, mu) = problem.em_operators(penalty.xi2);
    let mut w = w0.clone();
    let mut r = CVec::zeros(problem.dim());
    for k in 1..=max_iters {
        r.copy_from(&mu);
        r.gemv(Complex64::new(1.0, 0.0), &b, &w, Complex64::new(1.0, 0.0));
        shrinkage.apply(&mut r, penalty);
        let moved = (&r - &w).norm();
        std::mem::swap(&mut w, &mut r);
        if moved < tol {
            return Ok((w, k));
        }
    }
    Ok((w, max_iters))
}
