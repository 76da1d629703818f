use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{complex_normal, sigma2_from_snr, Sample, Stream};
use crate::error::{domain, Result};
use crate::CVec;

/// Sum-of-sinusoids path draws for one fading tap.
#[derive(Clone, Debug, PartialEq)]
pub struct JakesPaths {
    f_d: f64,
    angles: Vec<f64>,
    phases: Vec<f64>,
}

impl JakesPaths {
    /// Draw arrival angles and phases i.i.d. uniform on (-pi, pi).
    pub fn draw<R: Rng>(f_d: f64, n_paths: usize, rng: &mut R) -> Result<Self> {
        if n_paths == 0 {
            return domain("Jakes model needs at least one path");
        }
        let mut angles = Vec::with_capacity(n_paths);
        let mut phases = Vec::with_capacity(n_paths);
        for _ in 0..n_paths {
            angles.push(rng.random_range(-PI..PI));
            phases.push(rng.random_range(-PI..PI));
        }
        Ok(JakesPaths { f_d, angles, phases })
    }

    pub fn from_parts(f_d: f64, angles: Vec<f64>, phases: Vec<f64>) -> Result<Self> {
        if angles.is_empty() || angles.len() != phases.len() {
            return domain("Jakes paths need matching, non-empty angle and phase lists");
        }
        Ok(JakesPaths { f_d, angles, phases })
    }

    pub fn n_paths(&self) -> usize {
        self.angles.len()
    }

    /// In-phase and quadrature components `(g_c(i), g_s(i))`.
    pub fn quadrature(&self, i: f64) -> (f64, f64) {
        let (mut c, mut s) = (0.0, 0.0);
        for (a, p) in self.angles.iter().zip(&self.phases) {
            let arg = 2.0 * PI * self.f_d * i * a.cos() + p;
            c += arg.cos();
            s += arg.sin();
        }
        let norm = (2.0 / self.n_paths() as f64).sqrt();
        (norm * c, norm * s)
    }

    /// Envelope `sqrt(g_c^2 + g_s^2)` at time `i`.
    pub fn envelope(&self, i: f64) -> f64 {
        let (c, s) = self.quadrature(i);
        c.hypot(s)
    }

    /// Envelope for `i = 1..=n`.
    pub fn series(&self, n: usize) -> Vec<f64> {
        (1..=n).map(|i| self.envelope(i as f64)).collect()
    }
}

/// Envelope series `w_i`, `i = 1..=n`, of a single Jakes fading tap.
pub fn jakes_gain_series(f_d: f64, n: usize, n_paths: usize, seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(JakesPaths::draw(f_d, n_paths, &mut rng)?.series(n))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JakesConfig {
    pub m: usize,
    pub k_sparse: usize,
    pub n: usize,
    pub f_d: f64,
    pub n_paths: usize,
    /// 1-based time index at which the support changes.
    pub switch_time: usize,
    pub snr_db: f64,
    pub seed: u64,
}

impl Default for JakesConfig {
    fn default() -> Self {
        JakesConfig {
            m: 100,
            k_sparse: 5,
            n: 1000,
            f_d: 1e-4,
            n_paths: 64,
            switch_time: 501,
            snr_db: 20.0,
            seed: 0,
        }
    }
}

impl JakesConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return domain("Jakes stream needs positive M and n");
        }
        if self.k_sparse == 0 || self.k_sparse >= self.m {
            return domain(format!(
                "k_sparse must lie in 1..M (M = {}), got {}",
                self.m, self.k_sparse
            ));
        }
        if self.switch_time == 0 || self.switch_time > self.n {
            return domain(format!("switch_time must lie in 1..={}", self.n));
        }
        if self.n_paths == 0 {
            return domain("n_paths must be positive");
        }
        if self.snr_db.is_nan() {
            return domain("snr_db is NaN");
        }
        Ok(())
    }

    /// Each active tap has unit-variance quadratures, so `E||w||^2 = 2k`.
    pub fn expected_w_power(&self) -> f64 {
        2.0 * self.k_sparse as f64
    }
}

/// Sparse time-varying channel with Jakes-faded active taps and one support
/// swap at `switch_time`.
pub fn jakes_stream(cfg: &JakesConfig) -> Result<Stream> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let support: Vec<usize> = sample(&mut rng, cfg.m, cfg.k_sparse).into_vec();
    let inactive: Vec<usize> = (0..cfg.m).filter(|j| !support.contains(j)).collect();
    let muted = support[rng.random_range(0..support.len())];
    let activated = inactive[rng.random_range(0..inactive.len())];

    let mut gains: Vec<(usize, Vec<f64>)> = Vec::with_capacity(cfg.k_sparse + 1);
    for &j in support.iter().chain(std::iter::once(&activated)) {
        gains.push((j, JakesPaths::draw(cfg.f_d, cfg.n_paths, &mut rng)?.series(cfg.n)));
    }

    let sigma2 = sigma2_from_snr(cfg.snr_db, cfg.expected_w_power());
    let input_var = 1.0 / cfg.m as f64;
    let mut samples = Vec::with_capacity(cfg.n);
    for i in 0..cfg.n {
        let after = i + 1 >= cfg.switch_time;
        let mut w = CVec::zeros(cfg.m);
        for (j, g) in &gains {
            let live = if *j == muted {
                !after
            } else if *j == activated {
                after
            } else {
                true
            };
            if live {
                w[*j] = Complex64::new(g[i], 0.0);
            }
        }
        let x = CVec::from_fn(cfg.m, |_, _| complex_normal(&mut rng, input_var));
        let noise = if sigma2 > 0.0 {
            complex_normal(&mut rng, sigma2)
        } else {
            Complex64::new(0.0, 0.0)
        };
        let d = w.dotc(&x) + noise;
        samples.push(Sample {
            x,
            d,
            noise,
            w_true: Some(w),
        });
    }

    let mut sorted = support.clone();
    sorted.sort_unstable();
    let mut meta = BTreeMap::new();
    meta.insert("support".into(), format!("{sorted:?}"));
    meta.insert("muted".into(), muted.to_string());
    meta.insert("activated".into(), activated.to_string());
    Ok(Stream {
        samples,
        sigma2,
        meta,
    })
}
