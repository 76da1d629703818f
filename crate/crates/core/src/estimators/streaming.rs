use num_complex::Complex64;

use super::Shrinkage;
use crate::error::{check_dim, domain, Result};
use crate::linalg::hermitian_defect;
use crate::penalty::{GroupLayout, PenaltyConfig};
use crate::{CMat, CVec};

/// State of the recursive estimator: the exponentially weighted EM
/// operators `B(t)`, `mu(t)` and the current weight estimate.
///
/// After `t` samples, `B(t) = I - (xi2/sigma2) sum_i lambda^(t-i) x(i) x(i)^H`
/// and `mu(t) = (xi2/sigma2) sum_i lambda^(t-i) x(i) conj(d(i))`.
#[derive(Clone, Debug)]
pub struct FilterState {
    b: CMat,
    mu: CVec,
    w_hat: CVec,
    t: usize,
    lambda: f64,
    penalty: PenaltyConfig,
    em_iters: usize,
    scratch: CVec,
}

impl FilterState {
    /// Initialise from the first sample. The weight estimate starts at zero.
    pub fn init(
        x1: &CVec,
        d1: Complex64,
        penalty: PenaltyConfig,
        lambda: f64,
        em_iters: usize,
    ) -> Result<Self> {
        penalty.validate()?;
        if !(lambda > 0.0 && lambda <= 1.0) {
            return domain(format!("forgetting factor must lie in (0, 1], got {lambda}"));
        }
        if em_iters == 0 {
            return domain("at least one EM iteration per sample is required");
        }
        if x1.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return domain("first regressor is not finite");
        }
        let m = x1.len();
        let c = penalty.step();
        let mut b = CMat::identity(m, m);
        b.gerc(Complex64::new(-c, 0.0), x1, x1, Complex64::new(1.0, 0.0));
        let mu = x1 * (d1.conj() * c);
        Ok(FilterState {
            b,
            mu,
            w_hat: CVec::zeros(m),
            t: 1,
            lambda,
            penalty,
            em_iters,
            scratch: CVec::zeros(m),
        })
    }

    pub fn b(&self) -> &CMat {
        &self.b
    }

    pub fn mu(&self) -> &CVec {
        &self.mu
    }

    pub fn w_hat(&self) -> &CVec {
        &self.w_hat
    }

    /// Number of samples absorbed so far.
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn penalty(&self) -> &PenaltyConfig {
        &self.penalty
    }

    pub fn em_iters(&self) -> usize {
        self.em_iters
    }

    pub fn dim(&self) -> usize {
        self.w_hat.len()
    }

    /// Deviation of `B` from Hermitian symmetry.
    pub fn hermitian_defect(&self) -> f64 {
        hermitian_defect(&self.b)
    }

    /// Absorb a sample into `B` and `mu` without touching the estimate:
    /// `B <- lambda B - c x x^H + (1 - lambda) I`, `mu <- lambda mu + c x conj(d)`.
    pub fn update_operators(&mut self, x: &CVec, d: Complex64) -> Result<()> {
        check_dim(self.dim(), x.len())?;
        let c = self.penalty.step();
        let lam = self.lambda;
        self.b
            .gerc(Complex64::new(-c, 0.0), x, x, Complex64::new(lam, 0.0));
        if lam != 1.0 {
            for i in 0..self.dim() {
                self.b[(i, i)].re += 1.0 - lam;
            }
        }
        self.mu.scale_mut(lam);
        self.mu.axpy(d.conj() * c, x, Complex64::new(1.0, 0.0));
        self.t += 1;
        Ok(())
    }

    /// Run the configured number of EM iterations from the current estimate.
    pub fn em_iterations(&mut self, shrinkage: &Shrinkage) {
        for _ in 0..self.em_iters {
            self.scratch.copy_from(&self.mu);
            self.scratch.gemv(
                Complex64::new(1.0, 0.0),
                &self.b,
                &self.w_hat,
                Complex64::new(1.0, 0.0),
            );
            shrinkage.apply(&mut self.scratch, &self.penalty);
            std::mem::swap(&mut self.w_hat, &mut self.scratch);
        }
    }

    /// One recursive update with an arbitrary M-step, warm-started at the
    /// previous estimate.
    pub fn step(&mut self, x: &CVec, d: Complex64, shrinkage: &Shrinkage) -> Result<()> {
        shrinkage.validate(&self.penalty, self.dim())?;
        self.update_operators(x, d)?;
        self.em_iterations(shrinkage);
        Ok(())
    }

    /// MCP update; grouped MCP when a layout is given.
    pub fn sparls_mcp_step(&mut self, x: &CVec, d: Complex64, layout: Option<&GroupLayout>) -> Result<()> {
        self.step(x, d, &Shrinkage::from_layout(layout))
    }

    /// The l1 baseline: same recursion, soft thresholding at `xi2 * gamma`.
    pub fn sparls_l1_step(&mut self, x: &CVec, d: Complex64) -> Result<()> {
        self.step(x, d, &Shrinkage::Soft)
    }

    /// Group lasso baseline.
    pub fn group_lasso_step(&mut self, x: &CVec, d: Complex64, layout: &GroupLayout) -> Result<()> {
        self.step(x, d, &Shrinkage::GroupSoft(layout.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::BatchProblem;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn cn(rng: &mut ChaCha8Rng) -> Complex64 {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    }

    fn pen(xi2: f64, gamma: f64) -> PenaltyConfig {
        PenaltyConfig::new(0.5, gamma, xi2, 1.0).unwrap()
    }

    #[test]
    fn init_examples() {
        let e1 = CVec::from_fn(3, |i, _| Complex64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0));
        let s = FilterState::init(&e1, Complex64::new(0.0, 0.0), pen(1.0, 0.0), 0.99, 5).unwrap();
        let mut expect = CMat::identity(3, 3);
        expect[(0, 0)] = Complex64::new(0.0, 0.0);
        assert_eq!(s.b(), &expect);
        assert_eq!(s.mu(), &CVec::zeros(3));
        assert_eq!(s.w_hat(), &CVec::zeros(3));
        assert_eq!(s.t(), 1);

        let s = FilterState::init(&CVec::zeros(3), Complex64::new(2.0, 1.0), pen(1.0, 0.0), 0.9, 1).unwrap();
        assert_eq!(s.b(), &CMat::identity(3, 3));
        assert_eq!(s.mu(), &CVec::zeros(3));
    }

    #[test]
    fn init_matches_single_sample_batch() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = CVec::from_fn(4, |_, _| cn(&mut rng));
        let d = cn(&mut rng);
        let penalty = PenaltyConfig::new(0.5, 1.0, 0.03, 0.7).unwrap();
        let s = FilterState::init(&x, d, penalty, 0.95, 2).unwrap();
        let p = BatchProblem::from_regressors(&[x], &[d], 0.95, 0.7).unwrap();
        let (b, mu) = p.em_operators(0.03);
        assert!((s.b() - b).norm() < 1e-14);
        assert!((s.mu() - mu).norm() < 1e-14);
    }

    #[test]
    fn recursion_matches_batch() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let (m, n) = (6, 120);
        let xs: Vec<CVec> = (0..n).map(|_| CVec::from_fn(m, |_, _| cn(&mut rng))).collect();
        let ds: Vec<Complex64> = (0..n).map(|_| cn(&mut rng)).collect();
        let penalty = PenaltyConfig::new(0.5, 0.2, 0.002, 1.0).unwrap();
        let mut s = FilterState::init(&xs[0], ds[0], penalty, 0.99, 1).unwrap();
        for t in 1..n {
            s.sparls_mcp_step(&xs[t], ds[t], None).unwrap();
            assert!(s.hermitian_defect() < 1e-12);
        }
        let p = BatchProblem::from_regressors(&xs, &ds, 0.99, 1.0).unwrap();
        let (b, mu) = p.em_operators(0.002);
        assert!((s.b() - b).norm() < 1e-10);
        assert!((s.mu() - mu).norm() < 1e-10);
        assert_eq!(s.t(), n);
    }

    #[test]
    fn silent_sample_leaves_operators_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = CVec::from_fn(3, |_, _| cn(&mut rng));
        let mut s = FilterState::init(&x, cn(&mut rng), pen(0.05, 0.5), 1.0, 3).unwrap();
        let (b, mu) = (s.b().clone(), s.mu().clone());
        s.sparls_mcp_step(&CVec::zeros(3), Complex64::new(0.0, 0.0), None)
            .unwrap();
        assert_eq!(s.b(), &b);
        assert_eq!(s.mu(), &mu);
        assert_eq!(s.t(), 2);
    }

    #[test]
    fn l1_and_mcp_agree_without_penalty() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let xs: Vec<CVec> = (0..40).map(|_| CVec::from_fn(5, |_, _| cn(&mut rng))).collect();
        let ds: Vec<Complex64> = (0..40).map(|_| cn(&mut rng)).collect();
        let penalty = pen(0.01, 0.0);
        let mut a = FilterState::init(&xs[0], ds[0], penalty, 0.99, 3).unwrap();
        let mut b = a.clone();
        for t in 1..40 {
            a.sparls_mcp_step(&xs[t], ds[t], None).unwrap();
            b.sparls_l1_step(&xs[t], ds[t]).unwrap();
            assert_eq!(a.w_hat(), b.w_hat());
        }
    }

    #[test]
    fn l1_kills_small_inputs() {
        // With B = 0 the E-step returns mu; everything below the threshold vanishes.
        let x = CVec::from_vec(vec![Complex64::new(0.3, 0.0), Complex64::new(0.0, -0.2)]);
        let penalty = PenaltyConfig::new(1.0, 10.0, 0.1, 1.0).unwrap();
        let mut s = FilterState::init(&x, Complex64::new(1.0, 0.0), penalty, 1.0, 4).unwrap();
        s.sparls_l1_step(&x, Complex64::new(1.0, 0.0)).unwrap();
        assert!(s.mu().iter().all(|z| z.norm() <= penalty.beta()));
        assert_eq!(s.w_hat(), &CVec::zeros(2));
    }

    #[test]
    fn scalar_l1_fixed_point_by_hand() {
        // x = 1, d = 3, lambda = 1, c = xi2/sigma2 = 0.25, beta = 0.25 * 2 = 0.5.
        // After two identical samples: B = 1 - 0.5 = 0.5, mu = 0.25 * 3 * 2 = 1.5.
        // Fixed point of w = soft(0.5 w + 1.5, 0.5): w = 0.5 w + 1.0 -> w = 2.
        let x = CVec::from_vec(vec![Complex64::new(1.0, 0.0)]);
        let d = Complex64::new(3.0, 0.0);
        let penalty = PenaltyConfig::new(1.0, 2.0, 0.25, 1.0).unwrap();
        let mut s = FilterState::init(&x, d, penalty, 1.0, 200).unwrap();
        s.sparls_l1_step(&x, d).unwrap();
        let mut w = 0.0f64;
        for _ in 0..200 {
            let r = 0.5 * w + 1.5;
            w = (r.abs() - 0.5).max(0.0) * r.signum();
        }
        assert!((w - 2.0).abs() < 1e-12);
        assert!((s.w_hat()[0].re - w).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let x = CVec::zeros(3);
        assert!(FilterState::init(&x, Complex64::new(0.0, 0.0), pen(0.1, 1.0), 0.0, 1).is_err());
        assert!(FilterState::init(&x, Complex64::new(0.0, 0.0), pen(0.1, 1.0), 0.9, 0).is_err());
        let mut s = FilterState::init(&x, Complex64::new(0.0, 0.0), pen(0.1, 1.0), 0.9, 1).unwrap();
        assert!(s
            .sparls_mcp_step(&CVec::zeros(2), Complex64::new(0.0, 0.0), None)
            .is_err());
        let layout = GroupLayout::uniform(1, 3).unwrap();
        // beta = 0.1 * 10 = 1 >= alpha = 0.5
        let mut s = FilterState::init(&x, Complex64::new(0.0, 0.0), pen(0.1, 10.0), 0.9, 1).unwrap();
        assert!(s
            .sparls_mcp_step(&x, Complex64::new(0.0, 0.0), Some(&layout))
            .is_err());
    }
}
