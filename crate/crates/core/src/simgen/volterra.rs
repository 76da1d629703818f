use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{complex_normal, sigma2_from_snr, Sample, Stream};
use crate::error::{domain, Error, Result};
use crate::CVec;

/// Delay-line length: `x(i), ..., x(i - 7)`.
pub const VOLTERRA_TAPS: usize = 8;
/// 8 first-order plus 64 third-order terms.
pub const VOLTERRA_FEATURES: usize = VOLTERRA_TAPS + VOLTERRA_TAPS * VOLTERRA_TAPS;

/// Index of the third-order term `x(i-m)^2 conj(x(i-n))`.
pub const fn cubic_index(m: usize, n: usize) -> usize {
    VOLTERRA_TAPS + VOLTERRA_TAPS * m + n
}

const PRE_SWITCH: [usize; 4] = [3, 5, cubic_index(1, 4), cubic_index(5, 1)];
const POST_SWITCH: [usize; 4] = [3, 7, cubic_index(1, 4), cubic_index(6, 1)];

/// Odd-order Volterra features from `history[k] = x(i - k)`, `k = 0..8`.
pub fn volterra_features(history: &[Complex64]) -> Result<CVec> {
    if history.len() != VOLTERRA_TAPS {
        return Err(Error::DimensionMismatch {
            expected: VOLTERRA_TAPS,
            got: history.len(),
        });
    }
    let mut f = CVec::zeros(VOLTERRA_FEATURES);
    for (k, h) in history.iter().enumerate() {
        f[k] = *h;
    }
    for m in 0..VOLTERRA_TAPS {
        let sq = history[m] * history[m];
        for n in 0..VOLTERRA_TAPS {
            f[cubic_index(m, n)] = sq * history[n].conj();
        }
    }
    Ok(f)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VolterraConfig {
    pub memory: usize,
    pub n: usize,
    /// 1-based time index at which the kernel changes.
    pub switch_time: usize,
    pub snr_db: f64,
    pub seed: u64,
    /// Number of leading samples used to normalize feature power.
    pub calibration_len: usize,
}

impl Default for VolterraConfig {
    fn default() -> Self {
        VolterraConfig {
            memory: 7,
            n: 1000,
            switch_time: 501,
            snr_db: 20.0,
            seed: 0,
            calibration_len: 200,
        }
    }
}

impl VolterraConfig {
    pub fn validate(&self) -> Result<()> {
        if self.memory != VOLTERRA_TAPS - 1 {
            return domain(format!("only memory 7 is supported, got {}", self.memory));
        }
        if self.n == 0 {
            return domain("Volterra stream needs positive n");
        }
        if self.switch_time == 0 || self.switch_time > self.n {
            return domain(format!("switch_time must lie in 1..={}", self.n));
        }
        if self.calibration_len == 0 || self.calibration_len > self.n {
            return domain(format!("calibration_len must lie in 1..={}", self.n));
        }
        if self.snr_db.is_nan() {
            return domain("snr_db is NaN");
        }
        Ok(())
    }
}

/// Sparse third-order Volterra channel driven by CN(0, 1) inputs, with the
/// feature vector globally scaled to unit mean power over the calibration
/// prefix. The true weights are expressed on the scaled features, so
/// `d - noise = w^H x` holds exactly.
pub fn volterra_stream(cfg: &VolterraConfig) -> Result<Stream> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pre: Vec<Complex64> = (0..4).map(|_| complex_normal(&mut rng, 1.0)).collect();
    let post: Vec<Complex64> = (0..4).map(|_| complex_normal(&mut rng, 1.0)).collect();
    let warm = VOLTERRA_TAPS - 1;
    let inputs: Vec<Complex64> = (0..cfg.n + warm).map(|_| complex_normal(&mut rng, 1.0)).collect();

    let raw: Vec<CVec> = (0..cfg.n)
        .map(|i| {
            let hist: Vec<Complex64> = (0..VOLTERRA_TAPS).map(|k| inputs[i + warm - k]).collect();
            volterra_features(&hist)
        })
        .collect::<Result<_>>()?;
    let power = raw[..cfg.calibration_len]
        .iter()
        .map(|f| f.norm_squared())
        .sum::<f64>()
        / cfg.calibration_len as f64;
    let gain = power.sqrt();
    let sigma2 = sigma2_from_snr(cfg.snr_db, 4.0 * power);

    let mut samples = Vec::with_capacity(cfg.n);
    for (i, f) in raw.into_iter().enumerate() {
        let (idx, coef) = if i + 1 < cfg.switch_time {
            (&PRE_SWITCH, &pre)
        } else {
            (&POST_SWITCH, &post)
        };
        let clean: Complex64 = idx.iter().zip(coef.iter()).map(|(&j, c)| c * f[j]).sum();
        let mut w = CVec::zeros(VOLTERRA_FEATURES);
        for (&j, c) in idx.iter().zip(coef.iter()) {
            w[j] = c.conj() * gain;
        }
        let noise = if sigma2 > 0.0 {
            complex_normal(&mut rng, sigma2)
        } else {
            Complex64::new(0.0, 0.0)
        };
        samples.push(Sample {
            x: f.unscale(gain),
            d: clean + noise,
            noise,
            w_true: Some(w),
        });
    }
    let mut meta = BTreeMap::new();
    meta.insert("feature_scale".into(), format!("{}", 1.0 / gain));
    meta.insert("calibration_power".into(), format!("{power}"));
    Ok(Stream {
        samples,
        sigma2,
        meta,
    })
}
