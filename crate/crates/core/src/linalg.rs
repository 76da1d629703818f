use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::{CMat, CVec};

/// Exponential weights `lambda^(n-1-i)` for rows `i = 0..n`.
pub(crate) fn forgetting_weights(n: usize, lambda: f64) -> Vec<f64> {
    let mut w = vec![1.0; n];
    for i in (0..n.saturating_sub(1)).rev() {
        w[i] = w[i + 1] * lambda;
    }
    w
}

/// `A^H diag(weights) A` for a design `A` whose rows are `x(i)^H`.
pub(crate) fn weighted_gram(design: &CMat, weights: &[f64]) -> CMat {
    let mut scaled = design.clone();
    for (i, &w) in weights.iter().enumerate() {
        scaled.row_mut(i).scale_mut(w.sqrt());
    }
    let mut g = scaled.ad_mul(&scaled);
    hermitize(&mut g);
    g
}

/// Replace `m` with `(m + m^H) / 2`.
pub(crate) fn hermitize(m: &mut CMat) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)].im = 0.0;
        for j in (i + 1)..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

/// Largest absolute deviation from Hermitian symmetry.
pub(crate) fn hermitian_defect(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Largest eigenvalue of a Hermitian positive semidefinite matrix by power
/// iteration. Stops once the Rayleigh quotient changes by at most
/// `rel_tol` relative between iterations.
pub(crate) fn power_iteration(a: &CMat, rel_tol: f64, max_iter: usize) -> Result<f64> {
    let n = a.nrows();
    // Fixed-seed Gaussian start.
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x005e_ed0f_90e7);
    let mut v = CVec::from_fn(n, |_, _| {
        Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
    });
    v.unscale_mut(v.norm());
    let mut theta = 0.0f64;
    let mut av = CVec::zeros(n);
    for _ in 0..max_iter {
        av.gemv(Complex64::new(1.0, 0.0), a, &v, Complex64::new(0.0, 0.0));
        let next = v.dotc(&av).re;
        let norm = av.norm();
        if norm == 0.0 {
            return Ok(0.0);
        }
        if (next - theta).abs() <= rel_tol * next.abs() {
            return Ok(next);
        }
        theta = next;
        v.copy_from(&av);
        v.unscale_mut(norm);
    }
    Err(Error::NoConvergence(max_iter))
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub(crate) fn hermitian_eigenvalues(a: &CMat) -> Result<Vec<f64>> {
    let eig = SymmetricEigen::try_new(a.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("Hermitian eigensolver did not converge".into()))?;
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.total_cmp(b));
    Ok(vals)
}
