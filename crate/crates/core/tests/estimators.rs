use mcpfilt_core::estimators::{run_to_fixed_point, spals, RlsState};
use mcpfilt_core::simgen::complex_normal;
use mcpfilt_core::{BatchProblem, CMat, CVec, Complex64, FilterState, PenaltyConfig, Shrinkage};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_rows(rng: &mut ChaCha8Rng, n: usize, m: usize) -> (Vec<CVec>, Vec<Complex64>) {
    let xs = (0..n)
        .map(|_| CVec::from_fn(m, |_, _| complex_normal(rng, 1.0)))
        .collect();
    let ds = (0..n).map(|_| complex_normal(rng, 1.0)).collect();
    (xs, ds)
}

/// `I - c sum lambda^(t-i) x x^H` and `c sum lambda^(t-i) x conj(d)` summed term by term.
fn batch_operators(xs: &[CVec], ds: &[Complex64], lambda: f64, c: f64) -> (CMat, CVec) {
    let m = xs[0].len();
    let t = xs.len();
    let mut b = CMat::identity(m, m);
    let mut mu = CVec::zeros(m);
    for (i, (x, d)) in xs.iter().zip(ds).enumerate() {
        let w = lambda.powi((t - 1 - i) as i32) * c;
        for r in 0..m {
            for k in 0..m {
                b[(r, k)] -= x[r] * x[k].conj() * w;
            }
            mu[r] += x[r] * d.conj() * w;
        }
    }
    (b, mu)
}

fn rel_err(a: &CMat, b: &CMat) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn recursion_matches_batch(seed in any::<u64>(), n in 1usize..120, m in 1usize..12, li in 0usize..3) {
        let lambda = [0.9, 0.99, 1.0][li];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (xs, ds) = random_rows(&mut rng, n, m);
        let penalty = PenaltyConfig::new(1.0, 0.5, 1e-3, 1.0).unwrap();
        let mut st = FilterState::init(&xs[0], ds[0], penalty, lambda, 1).unwrap();
        for (x, d) in xs.iter().zip(&ds).skip(1) {
            st.update_operators(x, *d).unwrap();
        }
        let (b, mu) = batch_operators(&xs, &ds, lambda, penalty.step());
        prop_assert!(rel_err(st.b(), &b) < 1e-10);
        prop_assert!((st.mu() - &mu).norm() / mu.norm().max(1.0) < 1e-10);

        let problem = BatchProblem::from_regressors(&xs, &ds, lambda, 1.0).unwrap();
        let (pb, pmu) = problem.em_operators(penalty.xi2);
        prop_assert!(rel_err(&pb, &b) < 1e-10);
        prop_assert!((pmu - &mu).norm() / mu.norm().max(1.0) < 1e-10);
    }

    #[test]
    fn em_objective_never_increases(seed in any::<u64>(), gamma in 0.0f64..40.0, alpha in 0.05f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (xs, _) = random_rows(&mut rng, 60, 8);
        let mut w = CVec::zeros(8);
        w[1] = Complex64::new(1.5, -0.5);
        w[6] = Complex64::new(-0.7, 0.2);
        let ds: Vec<Complex64> = xs.iter().map(|x| w.dotc(x) + complex_normal(&mut rng, 0.01)).collect();
        let problem = BatchProblem::from_regressors(&xs, &ds, 0.99, 0.01).unwrap();
        let xi2 = mcpfilt_core::select_xi2(&problem, 0.9).unwrap();
        let penalty = PenaltyConfig::new(alpha, gamma, xi2, 0.01).unwrap();
        for shrink in [Shrinkage::Mcp, Shrinkage::Soft] {
            let (_, trace) = spals(&problem, &penalty, &shrink, &CVec::zeros(8), 60).unwrap();
            for pair in trace.objective_values.windows(2) {
                prop_assert!(pair[1] <= pair[0] + 1e-12 * pair[0].abs().max(1.0));
            }
        }
    }
}

#[test]
fn fixed_point_is_coordinatewise_stationary() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for case in 0..10 {
        let (m, n) = (10, 80);
        let mut w = CVec::zeros(m);
        for j in 0..3 {
            w[(3 * j + case) % m] = complex_normal(&mut rng, 1.0);
        }
        let xs: Vec<CVec> = (0..n)
            .map(|_| CVec::from_fn(m, |_, _| complex_normal(&mut rng, 1.0)))
            .collect();
        let ds: Vec<Complex64> = xs
            .iter()
            .map(|x| w.dotc(x) + complex_normal(&mut rng, 0.01))
            .collect();
        let problem = BatchProblem::from_regressors(&xs, &ds, 1.0, 0.01).unwrap();
        let xi2 = mcpfilt_core::select_xi2(&problem, 0.9).unwrap();
        let gamma = rng.random_range(1.0..20.0);
        let penalty = PenaltyConfig::new(0.5, gamma, xi2, 0.01).unwrap();
        let (w_hat, _) = run_to_fixed_point(
            &problem,
            &penalty,
            &Shrinkage::Mcp,
            &CVec::zeros(m),
            1e-12,
            200_000,
        )
        .unwrap();
        let f0 = problem.objective(&w_hat, &penalty, &Shrinkage::Mcp);
        let eps = 1e-4;
        for j in 0..m {
            for dir in [
                Complex64::new(eps, 0.0),
                Complex64::new(-eps, 0.0),
                Complex64::new(0.0, eps),
                Complex64::new(0.0, -eps),
            ] {
                let mut probe = w_hat.clone();
                probe[j] += dir;
                let f = problem.objective(&probe, &penalty, &Shrinkage::Mcp);
                assert!(f >= f0 - 1e-6, "case {case} coordinate {j}: {f} < {f0}");
            }
        }
    }
}

#[test]
fn unpenalized_estimators_agree_on_noise_free_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (m, n) = (6, 400);
    let w = CVec::from_fn(m, |_, _| complex_normal(&mut rng, 1.0));
    let xs: Vec<CVec> = (0..n)
        .map(|_| CVec::from_fn(m, |_, _| complex_normal(&mut rng, 1.0)))
        .collect();
    let ds: Vec<Complex64> = xs.iter().map(|x| w.dotc(x)).collect();
    let sigma2 = 1.0;

    let problem = BatchProblem::from_regressors(&xs, &ds, 1.0, sigma2).unwrap();
    let xi2 = mcpfilt_core::select_xi2(&problem, 0.9).unwrap();
    let penalty = PenaltyConfig::new(0.5, 0.0, xi2, sigma2).unwrap();
    let zero = CVec::zeros(m);
    let (batch, _) = run_to_fixed_point(&problem, &penalty, &Shrinkage::Mcp, &zero, 1e-12, 100_000).unwrap();

    let mut st = FilterState::init(&xs[0], ds[0], penalty, 1.0, 50).unwrap();
    for (x, d) in xs.iter().zip(&ds).skip(1) {
        st.step(x, *d, &Shrinkage::Soft).unwrap();
    }
    for _ in 0..2000 {
        st.em_iterations(&Shrinkage::Soft);
    }

    let mut rls = RlsState::new(m, 1.0, 1e-2).unwrap();
    for (x, d) in xs.iter().zip(&ds) {
        rls.step(x, *d).unwrap();
    }

    assert!((&batch - &w).norm() < 1e-4, "batch {}", (&batch - &w).norm());
    assert!(
        (st.w_hat() - &w).norm() < 1e-4,
        "streaming {}",
        (st.w_hat() - &w).norm()
    );
    assert!(
        (rls.w_hat() - &w).norm() < 1e-4,
        "rls {}",
        (rls.w_hat() - &w).norm()
    );
}
