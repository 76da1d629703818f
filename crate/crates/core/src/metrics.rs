//! Tracking-error curves, Monte Carlo aggregation and prediction-error
//! summaries.

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::CVec;

/// `||w_hat - w||^2 / ||w||^2`.
pub fn nmse(w_hat: &CVec, w_true: &CVec) -> Result<f64> {
    if w_hat.len() != w_true.len() {
        return Err(Error::LengthMismatch(w_hat.len(), w_true.len()));
    }
    let den = w_true.norm_squared();
    if den == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok((w_hat - w_true).norm_squared() / den)
}

pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Per-time squared errors and squared reference norms of one trial.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorTrace {
    pub err_sq: Vec<f64>,
    pub ref_sq: Vec<f64>,
}

impl ErrorTrace {
    pub fn with_capacity(n: usize) -> Self {
        ErrorTrace {
            err_sq: Vec::with_capacity(n),
            ref_sq: Vec::with_capacity(n),
        }
    }

    pub fn push(&mut self, w_hat: &CVec, w_true: &CVec) {
        self.err_sq.push((w_hat - w_true).norm_squared());
        self.ref_sq.push(w_true.norm_squared());
    }

    pub fn len(&self) -> usize {
        self.err_sq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.err_sq.is_empty()
    }
}

/// Monte Carlo NMSE curve. Each time step is a ratio of means: mean squared
/// error over trials divided by mean squared reference norm over trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub trials: usize,
    pub mean_err_sq: Vec<f64>,
    pub mean_ref_sq: Vec<f64>,
    pub nmse_linear: Vec<f64>,
    pub nmse_db: Vec<f64>,
    /// Population standard deviation across trials of per-trial NMSE (linear).
    pub trial_std: Vec<f64>,
}

impl TraceSummary {
    pub fn len(&self) -> usize {
        self.nmse_linear.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nmse_linear.is_empty()
    }

    /// Ratio-of-means NMSE over the 1-based inclusive time window.
    pub fn window_nmse(&self, window: RangeInclusive<usize>) -> Result<f64> {
        let (lo, hi) = (*window.start(), *window.end());
        if lo == 0 || lo > hi || hi > self.len() {
            return Err(Error::EmptyWindow);
        }
        let num: f64 = self.mean_err_sq[lo - 1..hi].iter().sum();
        let den: f64 = self.mean_ref_sq[lo - 1..hi].iter().sum();
        if den == 0.0 {
            return Err(Error::ZeroReference);
        }
        Ok(num / den)
    }

    pub fn window_nmse_db(&self, window: RangeInclusive<usize>) -> Result<f64> {
        self.window_nmse(window).map(to_db)
    }
}

/// Aggregate per-trial error traces of equal length.
pub fn mc_aggregate(trials: &[ErrorTrace]) -> Result<TraceSummary> {
    let first = trials.first().ok_or(Error::EmptyWindow)?;
    let n = first.len();
    for t in trials {
        if t.len() != n || t.ref_sq.len() != n {
            return Err(Error::LengthMismatch(n, t.len()));
        }
    }
    let k = trials.len() as f64;
    let mut mean_err_sq = vec![0.0; n];
    let mut mean_ref_sq = vec![0.0; n];
    let mut trial_std = vec![0.0; n];
    for i in 0..n {
        mean_err_sq[i] = trials.iter().map(|t| t.err_sq[i]).sum::<f64>() / k;
        mean_ref_sq[i] = trials.iter().map(|t| t.ref_sq[i]).sum::<f64>() / k;
        let ratios: Vec<f64> = trials
            .iter()
            .map(|t| {
                if t.ref_sq[i] > 0.0 {
                    t.err_sq[i] / t.ref_sq[i]
                } else {
                    f64::NAN
                }
            })
            .collect();
        trial_std[i] = population_std(&ratios);
    }
    let nmse_linear: Vec<f64> = mean_err_sq
        .iter()
        .zip(&mean_ref_sq)
        .map(|(e, r)| if *r > 0.0 { e / r } else { f64::NAN })
        .collect();
    let nmse_db = nmse_linear.iter().map(|v| to_db(*v)).collect();
    Ok(TraceSummary {
        trials: trials.len(),
        mean_err_sq,
        mean_ref_sq,
        nmse_linear,
        nmse_db,
        trial_std,
    })
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn population_std(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt()
}

/// Linear-interpolation quantile of sorted data, `h = (n - 1) p`.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredErrorStats {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub quantile_2_5: f64,
    pub quantile_97_5: f64,
    pub count: usize,
}

/// Summary of signed prediction errors from the 1-based time `window_start`
/// to the end (`errors[0]` belongs to time 1).
pub fn pred_error_stats(errors: &[f64], window_start: usize) -> Result<PredErrorStats> {
    if window_start == 0 {
        return domain("window_start is 1-based");
    }
    if window_start > errors.len() {
        return Err(Error::EmptyWindow);
    }
    let w = &errors[window_start - 1..];
    if w.iter().any(|e| !e.is_finite()) {
        return Err(Error::Numerical("non-finite prediction error".into()));
    }
    let mut sorted = w.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(PredErrorStats {
        mean: mean(w),
        std: population_std(w),
        quantile_2_5: quantile_sorted(&sorted, 0.025),
        quantile_97_5: quantile_sorted(&sorted, 0.975),
        count: w.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Complex64;
    use proptest::prelude::*;

    fn cv(v: &[f64]) -> CVec {
        CVec::from_iterator(v.len(), v.iter().map(|&x| Complex64::new(x, 0.0)))
    }

    #[test]
    fn nmse_examples() {
        assert_eq!(nmse(&cv(&[1.0, 0.0]), &cv(&[1.0, 0.0])).unwrap(), 0.0);
        assert_eq!(nmse(&cv(&[0.0, 0.0]), &cv(&[2.0, 0.0])).unwrap(), 1.0);
        assert!((nmse(&cv(&[1.1, 0.0]), &cv(&[1.0, 0.0])).unwrap() - 0.01).abs() < 1e-12);
        assert!(matches!(
            nmse(&cv(&[1.0]), &cv(&[0.0])),
            Err(Error::ZeroReference)
        ));
        assert!(nmse(&cv(&[1.0]), &cv(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn db_examples() {
        assert_eq!(to_db(1.0), 0.0);
        assert!((to_db(0.01) + 20.0).abs() < 1e-12);
        assert!((from_db(-30.0) - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn ratio_of_means() {
        let a = ErrorTrace {
            err_sq: vec![1.0, 0.0],
            ref_sq: vec![1.0, 1.0],
        };
        let b = ErrorTrace {
            err_sq: vec![3.0, 2.0],
            ref_sq: vec![9.0, 1.0],
        };
        let s = mc_aggregate(&[a, b]).unwrap();
        assert!((s.nmse_linear[0] - 0.4).abs() < 1e-15);
        assert!((s.nmse_linear[1] - 1.0).abs() < 1e-15);
        // per-trial ratios 1 and 1/3: their mean (2/3) differs from the ratio of means
        assert!((s.trial_std[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((s.nmse_linear[0] - 2.0 / 3.0).abs() > 0.2);
        assert!((s.window_nmse(1..=2).unwrap() - 6.0 / 12.0).abs() < 1e-15);
        assert!(s.window_nmse(0..=1).is_err());
        assert!(s.window_nmse(2..=3).is_err());
        assert!(mc_aggregate(&[]).is_err());
    }

    #[test]
    fn pred_stats_on_ramp() {
        let e: Vec<f64> = (1..=100).map(f64::from).collect();
        let s = pred_error_stats(&e, 1).unwrap();
        assert_eq!(s.mean, 50.5);
        // h = 99 p: 2.475 and 96.525 on the 0-based order statistics
        assert!((s.quantile_2_5 - 3.475).abs() < 1e-12);
        assert!((s.quantile_97_5 - 97.525).abs() < 1e-12);
        assert!((s.std - (9999.0f64 / 12.0).sqrt()).abs() < 1e-12);
        let tail = pred_error_stats(&e, 91).unwrap();
        assert_eq!(tail.count, 10);
        assert_eq!(tail.mean, 95.5);
        assert!(matches!(pred_error_stats(&e, 101), Err(Error::EmptyWindow)));
        assert!(pred_error_stats(&e, 0).is_err());
    }

    #[test]
    fn pred_stats_constant_and_symmetric() {
        let s = pred_error_stats(&[0.25; 7], 1).unwrap();
        assert_eq!(
            (s.mean, s.std, s.quantile_2_5, s.quantile_97_5),
            (0.25, 0.0, 0.25, 0.25)
        );
        let sym: Vec<f64> = (1..=20)
            .flat_map(|k| [k as f64 * 0.3, -(k as f64) * 0.3])
            .collect();
        let s = pred_error_stats(&sym, 1).unwrap();
        assert!(s.mean.abs() < 1e-15);
        assert!((s.quantile_2_5 + s.quantile_97_5).abs() < 1e-12);
    }

    #[test]
    fn aggregate_examples() {
        let single = ErrorTrace {
            err_sq: vec![0.5, 0.2, 0.1],
            ref_sq: vec![1.0, 2.0, 4.0],
        };
        let one = mc_aggregate(std::slice::from_ref(&single)).unwrap();
        assert_eq!(one.nmse_linear, vec![0.5, 0.1, 0.025]);
        let two = mc_aggregate(&[single.clone(), single]).unwrap();
        assert_eq!(two.nmse_linear, one.nmse_linear);
        let a = ErrorTrace {
            err_sq: vec![1.0],
            ref_sq: vec![1.0],
        };
        let b = ErrorTrace {
            err_sq: vec![3.0],
            ref_sq: vec![1.0],
        };
        assert_eq!(mc_aggregate(&[a, b]).unwrap().nmse_linear, vec![2.0]);
        let short = ErrorTrace {
            err_sq: vec![1.0],
            ref_sq: vec![1.0],
        };
        let long = ErrorTrace {
            err_sq: vec![1.0, 1.0],
            ref_sq: vec![1.0, 1.0],
        };
        assert!(mc_aggregate(&[short, long]).is_err());
    }

    proptest! {
        #[test]
        fn db_round_trip(x in 1e-12f64..1e12) {
            prop_assert!((from_db(to_db(x)) / x - 1.0).abs() < 1e-12);
        }

        #[test]
        fn aggregate_is_permutation_invariant(
            raw in proptest::collection::vec((0f64..5.0, 0.1f64..5.0, 0f64..5.0, 0.1f64..5.0), 2..8),
        ) {
            let trials: Vec<ErrorTrace> = raw
                .iter()
                .map(|&(e0, r0, e1, r1)| ErrorTrace { err_sq: vec![e0, e1], ref_sq: vec![r0, r1] })
                .collect();
            let mut rev = trials.clone();
            rev.reverse();
            let (a, b) = (mc_aggregate(&trials).unwrap(), mc_aggregate(&rev).unwrap());
            for t in 0..2 {
                prop_assert!((a.nmse_linear[t] - b.nmse_linear[t]).abs() <= 1e-12 * a.nmse_linear[t].max(1.0));
            }
        }

        #[test]
        fn quantiles_are_ordered(v in proptest::collection::vec(-1e3f64..1e3, 1..60)) {
            let s = pred_error_stats(&v, 1).unwrap();
            prop_assert!(s.quantile_2_5 <= s.quantile_97_5);
            prop_assert!(s.std >= 0.0);
        }

        #[test]
        fn nmse_is_scale_invariant(
            a in proptest::collection::vec(-5f64..5.0, 4),
            b in proptest::collection::vec(0.5f64..5.0, 4),
            c in 0.1f64..10.0,
        ) {
            let (wa, wb) = (cv(&a), cv(&b));
            let n1 = nmse(&wa, &wb).unwrap();
            let n2 = nmse(&(wa * Complex64::new(c, 0.0)), &(wb * Complex64::new(c, 0.0))).unwrap();
            prop_assert!((n1 - n2).abs() <= 1e-12 * (1.0 + n1));
        }
    }
}
