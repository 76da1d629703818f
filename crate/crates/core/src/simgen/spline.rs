use crate::error::{domain, Result};

/// Clamped quadratic B-spline basis with `v` functions on equally spaced
/// breakpoints over `[lo, hi]`. Inputs outside the range are clamped to it.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadSplineBasis {
    lo: f64,
    hi: f64,
    knots: Vec<f64>,
}

const DEGREE: usize = 2;

impl QuadSplineBasis {
    pub fn new(v: usize, lo: f64, hi: f64) -> Result<Self> {
        if v < 3 {
            return domain(format!("quadratic spline basis needs v >= 3, got {v}"));
        }
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return domain(format!("invalid knot range [{lo}, {hi}]"));
        }
        let intervals = v - DEGREE;
        let step = (hi - lo) / intervals as f64;
        let mut knots = vec![lo; DEGREE];
        for k in 0..=intervals {
            knots.push(if k == intervals { hi } else { lo + step * k as f64 });
        }
        knots.extend(std::iter::repeat_n(hi, DEGREE));
        Ok(QuadSplineBasis { lo, hi, knots })
    }

    pub fn len(&self) -> usize {
        self.knots.len() - DEGREE - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn eval(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.eval_into(x, &mut out);
        out
    }

    /// Writes all `v` basis values into `out` (which must have length `v`).
    pub fn eval_into(&self, x: f64, out: &mut [f64]) {
        assert_eq!(out.len(), self.len(), "output slice has wrong length");
        out.iter_mut().for_each(|o| *o = 0.0);
        let x = x.clamp(self.lo, self.hi);
        let span = self.span(x);
        let u = &self.knots;
        let mut n = [1.0, 0.0, 0.0];
        let mut left = [0.0; DEGREE + 1];
        let mut right = [0.0; DEGREE + 1];
        for j in 1..=DEGREE {
            left[j] = x - u[span + 1 - j];
            right[j] = u[span + j] - x;
            let mut saved = 0.0;
            for r in 0..j {
                let tmp = n[r] / (right[r + 1] + left[j - r]);
                n[r] = saved + right[r + 1] * tmp;
                saved = left[j - r] * tmp;
            }
            n[j] = saved;
        }
        for (k, val) in n.iter().enumerate() {
            out[span - DEGREE + k] = *val;
        }
    }

    fn span(&self, x: f64) -> usize {
        let last = self.len() - 1;
        if x >= self.knots[last + 1] {
            return last;
        }
        // knots[span] <= x < knots[span + 1]
        let pos = self.knots.partition_point(|&k| k <= x);
        (pos - 1).clamp(DEGREE, last)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Cox-de Boor recursion with 0/0 = 0; the last basis function is
    /// closed at the right end.
    fn cox_de_boor(knots: &[f64], i: usize, p: usize, x: f64) -> f64 {
        if p == 0 {
            let last_nonempty = (0..knots.len() - 1)
                .rev()
                .find(|&k| knots[k] < knots[k + 1])
                .unwrap();
            return if (knots[i] <= x && x < knots[i + 1]) || (i == last_nonempty && x == knots[i + 1]) {
                1.0
            } else {
                0.0
            };
        }
        let mut v = 0.0;
        let d1 = knots[i + p] - knots[i];
        if d1 > 0.0 {
            v += (x - knots[i]) / d1 * cox_de_boor(knots, i, p - 1, x);
        }
        let d2 = knots[i + p + 1] - knots[i + 1];
        if d2 > 0.0 {
            v += (knots[i + p + 1] - x) / d2 * cox_de_boor(knots, i + 1, p - 1, x);
        }
        v
    }

    #[test]
    fn has_v_functions_and_clamped_knots() {
        let b = QuadSplineBasis::new(10, -3.0, 3.0).unwrap();
        assert_eq!(b.len(), 10);
        let k = b.knots();
        assert_eq!(k.len(), 13);
        assert_eq!(&k[..3], &[-3.0; 3]);
        assert_eq!(&k[10..], &[3.0; 3]);
        assert!(QuadSplineBasis::new(2, -1.0, 1.0).is_err());
        assert!(QuadSplineBasis::new(5, 1.0, 1.0).is_err());
    }

    #[test]
    fn matches_recursion_on_grid() {
        for v in [3, 4, 10, 13] {
            let b = QuadSplineBasis::new(v, -3.0, 3.0).unwrap();
            for g in 0..100 {
                let x = -3.0 + 6.0 * g as f64 / 99.0;
                let fast = b.eval(x);
                for (j, f) in fast.iter().enumerate() {
                    let slow = cox_de_boor(b.knots(), j, 2, x);
                    assert!((f - slow).abs() < 1e-10, "v={v} x={x} j={j}: {f} vs {slow}");
                }
            }
        }
    }

    #[test]
    fn local_support() {
        let b = QuadSplineBasis::new(10, -3.0, 3.0).unwrap();
        let k = b.knots().to_vec();
        for g in 0..500 {
            let x = -3.0 + 6.0 * g as f64 / 499.0;
            for (j, val) in b.eval(x).iter().enumerate() {
                if x < k[j] || x > k[j + 3] {
                    assert_eq!(*val, 0.0);
                }
            }
        }
    }

    #[test]
    fn outside_range_is_clamped() {
        let b = QuadSplineBasis::new(10, -3.0, 3.0).unwrap();
        assert_eq!(b.eval(-7.0), b.eval(-3.0));
        assert_eq!(b.eval(4.5), b.eval(3.0));
        assert_eq!(b.eval(3.0)[9], 1.0);
        assert_eq!(b.eval(-3.0)[0], 1.0);
    }

    #[test]
    fn c1_at_interior_knots() {
        // Second-order one-sided differences are exact on each quadratic piece.
        let b = QuadSplineBasis::new(10, -3.0, 3.0).unwrap();
        let h = 1e-4;
        for &kn in &b.knots()[3..10] {
            let (l2, l1, c) = (b.eval(kn - 2.0 * h), b.eval(kn - h), b.eval(kn));
            let (r1, r2) = (b.eval(kn + h), b.eval(kn + 2.0 * h));
            for j in 0..10 {
                let dl = (3.0 * c[j] - 4.0 * l1[j] + l2[j]) / (2.0 * h);
                let dr = (-3.0 * c[j] + 4.0 * r1[j] - r2[j]) / (2.0 * h);
                assert!((dl - dr).abs() < 1e-6, "knot {kn}, j {j}: {dl} vs {dr}");
            }
        }
    }

    proptest! {
        #[test]
        fn partition_of_unity_and_nonnegative(x in -3.0f64..3.0, v in 3usize..20) {
            let b = QuadSplineBasis::new(v, -3.0, 3.0).unwrap();
            let vals = b.eval(x);
            prop_assert!(vals.iter().all(|&y| y >= 0.0));
            prop_assert!((vals.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
    }
}
