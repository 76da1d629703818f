use num_complex::Complex64;

use crate::error::{check_dim, domain, Error, Result};
use crate::linalg::hermitize;
use crate::{CMat, CVec};

/// Exponentially weighted RLS with inverse-correlation update, for the
/// model `d(i) = w^H x(i) + e(i)`.
#[derive(Clone, Debug)]
pub struct RlsState {
    p: CMat,
    w_hat: CVec,
    lambda: f64,
    t: usize,
    px: CVec,
}

impl RlsState {
    /// `P(0) = I / delta`, `w(0) = 0`.
    pub fn new(dim: usize, lambda: f64, delta: f64) -> Result<Self> {
        if dim == 0 {
            return domain("RLS needs a positive dimension");
        }
        if !(lambda > 0.0 && lambda <= 1.0) {
            return domain(format!("forgetting factor must lie in (0, 1], got {lambda}"));
        }
        if !(delta > 0.0) {
            return domain(format!("regularizer delta must be positive, got {delta}"));
        }
        Ok(RlsState {
            p: CMat::identity(dim, dim) * Complex64::new(1.0 / delta, 0.0),
            w_hat: CVec::zeros(dim),
            lambda,
            t: 0,
            px: CVec::zeros(dim),
        })
    }

    pub fn w_hat(&self) -> &CVec {
        &self.w_hat
    }

    pub fn inverse_correlation(&self) -> &CMat {
        &self.p
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Absorb one sample; returns the a priori error `d - w^H x`.
    pub fn step(&mut self, x: &CVec, d: Complex64) -> Result<Complex64> {
        check_dim(self.w_hat.len(), x.len())?;
        let one = Complex64::new(1.0, 0.0);
        self.px.gemv(one, &self.p, x, Complex64::new(0.0, 0.0));
        let denom = self.lambda + x.dotc(&self.px).re;
        if !(denom > 0.0 && denom.is_finite()) {
            return Err(Error::Numerical(format!(
                "RLS gain denominator is {denom}; P is no longer positive definite"
            )));
        }
        let err = d - self.w_hat.dotc(x);
        // w += k conj(e), k = P x / denom
        self.w_hat.axpy(err.conj() / denom, &self.px, one);
        // P <- (P - P x x^H P / denom) / lambda
        self.p
            .gerc(Complex64::new(-1.0 / denom, 0.0), &self.px, &self.px, one);
        if self.lambda != 1.0 {
            self.p.unscale_mut(self.lambda);
        }
        hermitize(&mut self.p);
        if (0..self.p.nrows()).any(|i| !(self.p[(i, i)].re > 0.0 && self.p[(i, i)].re.is_finite())) {
            return Err(Error::Numerical(
                "RLS inverse correlation lost positive definiteness".into(),
            ));
        }
        self.t += 1;
        Ok(err)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn cn(rng: &mut ChaCha8Rng) -> Complex64 {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    }

    #[test]
    fn zero_stream_keeps_zero_estimate() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut s = RlsState::new(4, 0.99, 1e-2).unwrap();
        for _ in 0..50 {
            let x = CVec::from_fn(4, |_, _| cn(&mut rng));
            s.step(&x, Complex64::new(0.0, 0.0)).unwrap();
        }
        assert_eq!(s.w_hat(), &CVec::zeros(4));
    }

    #[test]
    fn identifies_static_sparse_channel() {
        let m = 8;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut w = CVec::zeros(m);
        w[3] = Complex64::new(0.7, -1.2);
        let mut s = RlsState::new(m, 1.0, 1e-8).unwrap();
        for _ in 0..5 * m {
            let x = CVec::from_fn(m, |_, _| cn(&mut rng));
            let d = w.dotc(&x);
            s.step(&x, d).unwrap();
        }
        assert!((s.w_hat() - &w).norm() < 1e-6);
    }

    #[test]
    fn matches_regularized_normal_equations() {
        // Exact RLS solution: (sum x x^H + delta I)^-1 sum x conj(d).
        let (n, m, delta) = (50, 5, 1e-2);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let xs: Vec<CVec> = (0..n).map(|_| CVec::from_fn(m, |_, _| cn(&mut rng))).collect();
        let ds: Vec<Complex64> = (0..n).map(|_| cn(&mut rng)).collect();
        let mut s = RlsState::new(m, 1.0, delta).unwrap();
        for (x, d) in xs.iter().zip(&ds) {
            s.step(x, *d).unwrap();
        }
        let mut gram = CMat::identity(m, m) * Complex64::new(delta, 0.0);
        let mut rhs = CVec::zeros(m);
        for (x, d) in xs.iter().zip(&ds) {
            gram += x * x.adjoint();
            rhs += x * d.conj();
        }
        let ls = gram.lu().solve(&rhs).unwrap();
        assert!((s.w_hat() - ls).norm() < 1e-6);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(RlsState::new(0, 0.9, 1.0).is_err());
        assert!(RlsState::new(3, 1.1, 1.0).is_err());
        assert!(RlsState::new(3, 0.9, 0.0).is_err());
        let mut s = RlsState::new(3, 0.9, 1.0).unwrap();
        assert!(s.step(&CVec::zeros(2), Complex64::new(0.0, 0.0)).is_err());
    }
}
