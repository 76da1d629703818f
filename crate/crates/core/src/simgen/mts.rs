use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{QuadSplineBasis, Sample, Stream};
use crate::error::{domain, Result};
use crate::penalty::GroupLayout;
use crate::CVec;

/// Longest lag of `X1` in the generating equation.
const MAX_DRIVER_LAG: usize = 7;

/// `X2_t = 0.4 X1_{t-2}^2 - 0.8 X1_{t-7} + noise_scale * eps2_t`.
pub fn mts_response(x1_lag2: f64, x1_lag7: f64, eps2: f64, noise_scale: f64) -> f64 {
    0.4 * x1_lag2 * x1_lag2 - 0.8 * x1_lag7 + noise_scale * eps2
}

/// `X2` for every time that has a full `X1` history; `x1` leads `eps` by
/// seven samples.
fn response_series(x1: &[f64], eps: &[f64], noise_scale: f64) -> Vec<f64> {
    let off = MAX_DRIVER_LAG;
    (0..eps.len())
        .map(|k| mts_response(x1[k + off - 2], x1[k + off - 7], eps[k], noise_scale))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MtsConfig {
    pub lag: usize,
    pub n: usize,
    pub v: usize,
    pub knot_lo: f64,
    pub knot_hi: f64,
    pub noise_scale: f64,
    pub seed: u64,
}

impl Default for MtsConfig {
    fn default() -> Self {
        MtsConfig {
            lag: 8,
            n: 1000,
            v: 10,
            knot_lo: -3.0,
            knot_hi: 3.0,
            noise_scale: 0.2,
            seed: 0,
        }
    }
}

impl MtsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lag == 0 || self.n == 0 {
            return domain("MTS stream needs positive lag and n");
        }
        QuadSplineBasis::new(self.v, self.knot_lo, self.knot_hi)?;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        2 * self.lag * self.v
    }

    /// One group of `v` spline coefficients per (series, lag) pair.
    pub fn layout(&self) -> Result<GroupLayout> {
        GroupLayout::uniform(2 * self.lag, self.v)
    }
}

/// Bivariate series with `d = X2_t` and a real design row holding, for each
/// lag `1..=lag`, the spline features of `X1_{t-lag}` then `X2_{t-lag}`.
pub fn mts_stream(cfg: &MtsConfig) -> Result<Stream> {
    cfg.validate()?;
    let basis = QuadSplineBasis::new(cfg.v, cfg.knot_lo, cfg.knot_hi)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    // x2[k] is X2 at t = k + 1 - lag; x1 carries MAX_DRIVER_LAG extra history.
    let len2 = cfg.n + cfg.lag;
    let off = MAX_DRIVER_LAG;
    let x1: Vec<f64> = (0..len2 + off).map(|_| rng.sample(StandardNormal)).collect();
    let eps: Vec<f64> = (0..len2).map(|_| rng.sample(StandardNormal)).collect();
    let x2 = response_series(&x1, &eps, cfg.noise_scale);

    let mut samples = Vec::with_capacity(cfg.n);
    let mut buf = vec![0.0; cfg.v];
    for t in 0..cfg.n {
        let k = t + cfg.lag;
        let mut x = CVec::zeros(cfg.dim());
        for l in 1..=cfg.lag {
            let base = 2 * (l - 1) * cfg.v;
            basis.eval_into(x1[k + off - l], &mut buf);
            for (j, b) in buf.iter().enumerate() {
                x[base + j] = Complex64::new(*b, 0.0);
            }
            basis.eval_into(x2[k - l], &mut buf);
            for (j, b) in buf.iter().enumerate() {
                x[base + cfg.v + j] = Complex64::new(*b, 0.0);
            }
        }
        samples.push(Sample {
            x,
            d: Complex64::new(x2[k], 0.0),
            noise: Complex64::new(cfg.noise_scale * eps[k], 0.0),
            w_true: None,
        });
    }
    let mut meta = BTreeMap::new();
    meta.insert("groups".into(), format!("{}x{}", 2 * cfg.lag, cfg.v));
    Ok(Stream {
        samples,
        sigma2: cfg.noise_scale * cfg.noise_scale,
        meta,
    })
}
