//! Seeded stream generators for the three tracking scenarios.
//!
//! Every generator is a pure function of its configuration (seed included):
//! identical configurations produce bit-identical streams. Randomness comes
//! from `ChaCha8Rng`, whose output is stable across platforms.

mod jakes;
mod mts;
mod spline;
mod volterra;

use std::collections::BTreeMap;
use std::io::{Read, Write};

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::CVec;

pub use jakes::{jakes_gain_series, jakes_stream, JakesConfig, JakesPaths};
pub use mts::{mts_response, mts_stream, MtsConfig};
pub use spline::QuadSplineBasis;
pub use volterra::{volterra_features, volterra_stream, VolterraConfig, VOLTERRA_FEATURES, VOLTERRA_TAPS};

/// One time step: regressor, observation and (when known) the true weights.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub x: CVec,
    pub d: Complex64,
    /// Additive noise realization included in `d`.
    pub noise: Complex64,
    pub w_true: Option<CVec>,
}

/// A generated data stream.
#[derive(Clone, Debug, PartialEq)]
pub struct Stream {
    pub samples: Vec<Sample>,
    /// Variance of the additive observation noise.
    pub sigma2: f64,
    /// Generator choices worth recording (switch indices, scale factors).
    pub meta: BTreeMap<String, String>,
}

impl Stream {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.samples.first().map_or(0, |s| s.x.len())
    }

    pub fn has_ground_truth(&self) -> bool {
        self.samples.iter().all(|s| s.w_true.is_some())
    }

    /// Write the CSV fixture: `t`, `x{j}_re`, `x{j}_im`, `d_re`, `d_im`, and
    /// `w{j}_re`, `w{j}_im` when the true weights are known. `t` starts at 1.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let m = self.dim();
        let truth = self.has_ground_truth() && !self.is_empty();
        let mut wtr = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        for j in 0..m {
            header.push(format!("x{j}_re"));
            header.push(format!("x{j}_im"));
        }
        header.push("d_re".into());
        header.push("d_im".into());
        if truth {
            for j in 0..m {
                header.push(format!("w{j}_re"));
                header.push(format!("w{j}_im"));
            }
        }
        wtr.write_record(&header)?;
        for (t, s) in self.samples.iter().enumerate() {
            let mut row = vec![(t + 1).to_string()];
            for z in s.x.iter() {
                row.push(z.re.to_string());
                row.push(z.im.to_string());
            }
            row.push(s.d.re.to_string());
            row.push(s.d.im.to_string());
            if let (true, Some(w)) = (truth, &s.w_true) {
                for z in w.iter() {
                    row.push(z.re.to_string());
                    row.push(z.im.to_string());
                }
            }
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Read a fixture written by [`Stream::write_csv`]. Noise realizations
    /// are not part of the fixture and come back as zero.
    pub fn read_csv<R: Read>(input: R) -> Result<Stream> {
        let mut rdr = csv::Reader::from_reader(input);
        let header = rdr.headers()?.clone();
        let m = header
            .iter()
            .filter(|h| h.starts_with('x') && h.ends_with("_re"))
            .count();
        let has_w = header.iter().any(|h| h.starts_with('w'));
        let expected = 1 + 2 * m + 2 + if has_w { 2 * m } else { 0 };
        if header.len() != expected {
            return Err(Error::Fixture(format!(
                "expected {expected} columns for dimension {m}, found {}",
                header.len()
            )));
        }
        let mut samples = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let vals: Vec<f64> = rec
                .iter()
                .skip(1)
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|e| Error::Fixture(format!("{v:?}: {e}")))
                })
                .collect::<Result<_>>()?;
            let cplx = |k: usize| Complex64::new(vals[2 * k], vals[2 * k + 1]);
            let x = CVec::from_fn(m, |j, _| cplx(j));
            let d = cplx(m);
            let w_true = has_w.then(|| CVec::from_fn(m, |j, _| cplx(m + 1 + j)));
            samples.push(Sample {
                x,
                d,
                noise: Complex64::new(0.0, 0.0),
                w_true,
            });
        }
        Ok(Stream {
            samples,
            sigma2: f64::NAN,
            meta: BTreeMap::new(),
        })
    }
}

/// Noise variance for a target SNR, with SNR defined as
/// `E||w||^2 / sigma2`. An infinite SNR gives zero.
pub fn sigma2_from_snr(snr_db: f64, expected_w_power: f64) -> f64 {
    if snr_db == f64::INFINITY {
        0.0
    } else {
        expected_w_power / 10f64.powf(snr_db / 10.0)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-trial seed: `splitmix64(base ^ splitmix64(index))`.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    splitmix64(base ^ splitmix64(index))
}

/// Circularly symmetric complex Gaussian with variance `var`.
pub fn complex_normal(rng: &mut ChaCha8Rng, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}
