//! Iterated integrals `N_{3,k}(Σ) = ∫_0^Σ N_{3,k-1}`, with `N_{3,0} = N_3`.
//!
//! Repeated integration of a step function with jumps `r_3(n)` at `sqrt(n)`
//! gives `N_{3,k}(Σ) = Σ_{n <= Σ²} r_3(n) (Σ - sqrt(n))^k / k!`, which is what
//! [`IteratedEvaluator::eval_exact`] sums. [`IteratedEvaluator::eval_quadrature`]
//! rebuilds the same numbers by integrating knot to knot and serves as its
//! oracle.

use crate::error::{domain, Error, Result};
use crate::radial_counts::{floor_square, RadialCountTable, SqrtRadius};
use crate::summation::{deterministic_sum, TwoFloat};

pub const MAX_ORDER: u32 = 16;
pub const QUADRATURE_MAX_ORDER: u32 = 4;
pub const MIN_QUADRATURE_TOL: f64 = 1e-12;

/// Below this ratio `Σ - sqrt(n)` is recomputed as `(Σ² - n)/(Σ + sqrt(n))`.
const CANCELLATION_RATIO: f64 = 1e-4;

/// `k!` for `k <= MAX_ORDER`, exact in `f64`.
pub fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// Evaluates `N_{3,k}` against a three-dimensional count table.
#[derive(Debug, Clone)]
pub struct IteratedEvaluator<'a> {
    table: &'a RadialCountTable,
    sqrt_n: Vec<TwoFloat<f64>>,
}

/// A value with the sum of absolute term sizes behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactValue {
    pub value: f64,
    /// Rounding budget for `value`: terms times a few ulps of the absolute sum.
    pub fp_budget: f64,
}

impl<'a> IteratedEvaluator<'a> {
    pub fn new(table: &'a RadialCountTable) -> Result<Self> {
        if table.dim() != 3 {
            return Err(Error::InvalidDimension(table.dim()));
        }
        let sqrt_n = (0..=table.max_n())
            .map(|n| TwoFloat::from_float(n as f64).sqrt())
            .collect();
        Ok(Self { table, sqrt_n })
    }

    pub fn table(&self) -> &RadialCountTable {
        self.table
    }

    /// `sqrt(n)` as a double-word value.
    pub fn sqrt_n(&self, n: u64) -> TwoFloat<f64> {
        self.sqrt_n[n as usize]
    }

    fn check_order(k: u32) -> Result<()> {
        if k > MAX_ORDER {
            Err(domain(format!("order k = {k} exceeds {MAX_ORDER}")))
        } else {
            Ok(())
        }
    }

    /// `N_{3,k}(Σ)` at an exactly represented radius.
    pub fn eval_exact(&self, k: u32, sigma: &SqrtRadius) -> Result<f64> {
        Ok(self.eval_exact_with_budget(k, sigma)?.value)
    }

    pub fn eval_exact_with_budget(&self, k: u32, sigma: &SqrtRadius) -> Result<ExactValue> {
        Self::check_order(k)?;
        let top = sigma.floor_square();
        self.table.check_shell(top)?;
        if k == 0 {
            return Ok(ExactValue {
                value: self.table.cumulative_at(top) as f64,
                fp_budget: 0.0,
            });
        }
        let s2 = TwoFloat::from_float(sigma.numerator() as f64).div_float(sigma.denominator() as f64);
        let s = s2.sqrt();
        let sf = s.to_float();
        let gap = |n: u64| {
            let d = s.sub(self.sqrt_n[n as usize]).to_float();
            if d < CANCELLATION_RATIO * sf {
                sigma.excess_over(n) / (sf + self.sqrt_n[n as usize].to_float())
            } else {
                d
            }
        };
        Ok(self.sum_terms(k, top, gap))
    }

    /// `N_{3,k}(Σ)` at a floating radius (quadrature nodes, plotting grids).
    pub fn eval_at(&self, k: u32, sigma: f64) -> Result<f64> {
        Self::check_order(k)?;
        if !(sigma >= 0.0) {
            return Err(domain(format!("radius must be >= 0, got {sigma}")));
        }
        let top = floor_square(sigma);
        self.table.check_shell(top)?;
        if k == 0 {
            return Ok(self.table.cumulative_at(top) as f64);
        }
        let s = TwoFloat::from_float(sigma);
        Ok(self
            .sum_terms(k, top, |n| s.sub(self.sqrt_n[n as usize]).to_float().max(0.0))
            .value)
    }

    fn sum_terms<G: Fn(u64) -> f64 + Sync>(&self, k: u32, top: u64, gap: G) -> ExactValue {
        let counts = self.table.counts();
        let kf = factorial(k);
        let report = deterministic_sum(0..top as usize + 1, |n| {
            let r = counts[n];
            if r == 0 {
                0.0
            } else {
                r as f64 * gap(n as u64).powi(k as i32)
            }
        });
        let value = report.sums[0] / kf;
        let eps = f64::EPSILON;
        // powi costs at most k roundings, the gap up to 4, the sum 2 per term.
        let fp_budget = (k as f64 + 8.0) * eps * report.abs_sums[0] / kf;
        ExactValue { value, fp_budget }
    }

    /// `N_{3,k}(Σ)` rebuilt by integrating knot to knot.
    ///
    /// Between consecutive radii `N_3` is constant, so every `N_{3,j}` is a
    /// polynomial there and its Taylor expansion at the left knot is exact:
    /// `N_{3,j}(x + t) = Σ_{i<=j} N_{3,j-i}(x) t^i / i!`. Jumps `r_3(m)` are
    /// added to `N_3` at each knot `sqrt(m)`. `tol` bounds the propagated
    /// rounding error relative to `1 + |value|`.
    pub fn eval_quadrature(&self, k: u32, sigma: &SqrtRadius, tol: f64) -> Result<f64> {
        if k == 0 || k > QUADRATURE_MAX_ORDER {
            return Err(domain(format!(
                "quadrature oracle covers 1 <= k <= {QUADRATURE_MAX_ORDER}, got {k}"
            )));
        }
        if !(tol >= MIN_QUADRATURE_TOL) {
            return Err(domain(format!("tolerance {tol:e} below {MIN_QUADRATURE_TOL:e}")));
        }
        let top = sigma.floor_square();
        self.table.check_shell(top)?;
        let k = k as usize;
        let mut v = vec![0.0f64; k + 1];
        let mut b = vec![0.0f64; k + 1];
        let eps = f64::EPSILON;
        // Knot at the origin.
        v[0] = self.table.r(0) as f64;
        let advance = |v: &mut Vec<f64>, b: &mut Vec<f64>, t: f64| {
            let mut tp = vec![1.0; k + 1];
            for i in 1..=k {
                tp[i] = tp[i - 1] * t / i as f64;
            }
            for j in (1..=k).rev() {
                let mut acc = 0.0;
                let mut mag = 0.0;
                let mut err = 0.0;
                for i in 0..=j {
                    let c = v[j - i] * tp[i];
                    acc += c;
                    mag += c.abs();
                    err += b[j - i] * tp[i];
                }
                v[j] = acc;
                b[j] = err + (2.0 * k as f64 + 4.0) * eps * mag;
            }
        };
        for m in 1..=top {
            let t = 1.0 / (self.sqrt_n[m as usize].to_float() + self.sqrt_n[m as usize - 1].to_float());
            advance(&mut v, &mut b, t);
            v[0] += self.table.r(m) as f64;
        }
        let last = self.sqrt_n[top as usize].to_float();
        let excess = sigma.excess_over(top);
        let t = if excess > 0.0 { excess / (sigma.to_f64() + last) } else { 0.0 };
        advance(&mut v, &mut b, t);
        let value = v[k];
        let budget = b[k];
        if budget > tol * (1.0 + value.abs()) {
            return Err(Error::ToleranceNotMet { budget, tol });
        }
        Ok(value)
    }
}

/// `N_{3,k}` along a nondecreasing sequence of radii in `O(k)` per point.
///
/// Keeps the moments `S_j = Σ_{n <= Σ²} r_3(n) n^{j/2}` in double-word
/// arithmetic and expands `(Σ - sqrt(n))^k` binomially. The expansion cancels
/// to about `Σ^k N_3(Σ)` times the double-word unit roundoff, far below the
/// plain summation's rounding.
#[derive(Debug, Clone)]
pub struct IteratedSweep<'a> {
    table: &'a RadialCountTable,
    k: u32,
    next_n: u64,
    last_sigma: f64,
    moments: Vec<TwoFloat<f64>>,
    binomials: Vec<f64>,
}

impl<'a> IteratedSweep<'a> {
    pub fn new(table: &'a RadialCountTable, k: u32) -> Result<Self> {
        if table.dim() != 3 {
            return Err(Error::InvalidDimension(table.dim()));
        }
        if k > MAX_ORDER {
            return Err(domain(format!("order k = {k} exceeds {MAX_ORDER}")));
        }
        let binomials = (0..=k).map(|j| factorial(k) / (factorial(j) * factorial(k - j))).collect();
        Ok(Self {
            table,
            k,
            next_n: 0,
            last_sigma: 0.0,
            moments: vec![TwoFloat::zero(); k as usize + 1],
            binomials,
        })
    }

    /// `N_{3,k}(sigma)`; `sigma` must not decrease between calls.
    pub fn eval(&mut self, sigma: f64) -> Result<f64> {
        if !(sigma >= self.last_sigma) {
            return Err(domain(format!("sweep radii must not decrease: {sigma} after {}", self.last_sigma)));
        }
        let top = floor_square(sigma);
        self.table.check_shell(top)?;
        self.last_sigma = sigma;
        let counts = self.table.counts();
        while self.next_n <= top {
            let n = self.next_n;
            let r = counts[n as usize];
            if r > 0 {
                let root = TwoFloat::from_float(n as f64).sqrt();
                let mut p = TwoFloat::from_float(r as f64);
                for m in self.moments.iter_mut() {
                    *m = m.add(p);
                    p = p.mul(root);
                }
            }
            self.next_n += 1;
        }
        let s = TwoFloat::from_float(sigma);
        let mut acc = TwoFloat::zero();
        let mut power = TwoFloat::from_float(1.0);
        // Σ_j C(k, j) Σ^j (-1)^{k-j} S_{k-j}, built from the highest moment down.
        for j in 0..=self.k as usize {
            let term = self.moments[self.k as usize - j].mul(power).mul_float(self.binomials[j]);
            acc = if (self.k as usize - j) % 2 == 0 { acc.add(term) } else { acc.sub(term) };
            power = power.mul(s);
        }
        Ok(acc.to_float() / factorial(self.k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial_counts::build_table;
    use proptest::prelude::*;

    fn table() -> RadialCountTable {
        build_table(3, 500).unwrap()
    }

    fn sr(p: u64, q: u64) -> SqrtRadius {
        SqrtRadius::new(p, q).unwrap()
    }

    #[test]
    fn small_exact_values() {
        let t = table();
        let e = IteratedEvaluator::new(&t).unwrap();
        assert_eq!(e.eval_exact(0, &sr(2, 1)).unwrap(), 19.0);
        assert_eq!(e.eval_exact(1, &sr(1, 1)).unwrap(), 1.0);
        assert_eq!(e.eval_exact(2, &sr(1, 4)).unwrap(), 0.125);
        assert_eq!(e.eval_exact(4, &sr(1, 1)).unwrap(), 1.0 / 24.0);
        for k in 1..=MAX_ORDER {
            assert_eq!(e.eval_exact(k, &sr(0, 1)).unwrap(), 0.0);
        }
    }

    #[test]
    fn quadrature_examples() {
        let t = table();
        let e = IteratedEvaluator::new(&t).unwrap();
        assert!((e.eval_quadrature(1, &sr(1, 1), 1e-10).unwrap() - 1.0).abs() <= 1e-10);
        assert_eq!(e.eval_quadrature(1, &sr(0, 1), 1e-10).unwrap(), 0.0);
        let q = e.eval_quadrature(3, &sr(2, 1), 1e-10).unwrap();
        let x = e.eval_exact(3, &sr(2, 1)).unwrap();
        assert!((q - x).abs() <= 1e-9);
    }

    #[test]
    fn k_zero_matches_counting() {
        let t = table();
        let e = IteratedEvaluator::new(&t).unwrap();
        for p in 0..200 {
            let s = sr(p, 3);
            assert_eq!(e.eval_exact(0, &s).unwrap(), t.count_n(&s).unwrap() as f64);
        }
    }

    #[test]
    fn contract_violations_are_reported() {
        let t = table();
        let e = IteratedEvaluator::new(&t).unwrap();
        assert!(e.eval_exact(17, &sr(1, 1)).is_err());
        assert!(matches!(e.eval_exact(1, &sr(501, 1)), Err(Error::OutOfTable { .. })));
        assert!(e.eval_quadrature(0, &sr(1, 1), 1e-10).is_err());
        assert!(e.eval_quadrature(5, &sr(1, 1), 1e-10).is_err());
        assert!(e.eval_quadrature(2, &sr(1, 1), 1e-13).is_err());
        let t2 = build_table(2, 10).unwrap();
        assert!(IteratedEvaluator::new(&t2).is_err());
    }

    #[test]
    fn floating_and_exact_radii_agree() {
        let t = table();
        let e = IteratedEvaluator::new(&t).unwrap();
        for p in [5u64, 77, 199, 401] {
            let s = sr(p, 7);
            for k in 1..=5 {
                let a = e.eval_exact(k, &s).unwrap();
                let b = e.eval_at(k, s.to_f64()).unwrap();
                assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "k={k} p={p}");
            }
        }
    }

    #[test]
    fn continuity_at_shells() {
        let t = table();
        let e = IteratedEvaluator::new(&t).unwrap();
        let h = 1e-6;
        for n in [1u64, 2, 9, 50, 300] {
            let at = (n as f64).sqrt();
            let shell = SqrtRadius::from_integer_square(n);
            for k in 1..=4 {
                // The slope on the left of the knot is N_{3,k-1}, which for k = 1 is N_3.
                let slope = e.eval_exact(k - 1, &shell).unwrap();
                let below = e.eval_at(k, at - h).unwrap();
                let on = e.eval_exact(k, &shell).unwrap();
                assert!((on - below).abs() <= slope * h + 1e-9 * (1.0 + on), "n={n} k={k}");
            }
        }
    }

    proptest! {
        #[test]
        fn nondecreasing_in_radius(p in 0u64..3900, dp in 1u64..40, k in 0u32..=6) {
            let t = table();
            let e = IteratedEvaluator::new(&t).unwrap();
            let a = e.eval_exact(k, &sr(p, 8)).unwrap();
            let b = e.eval_exact(k, &sr(p + dp, 8)).unwrap();
            prop_assert!(b >= a);
        }

        #[test]
        fn oracle_agrees(p in 0u64..4000, q in 1u64..11, k in 1u32..=4) {
            let t = table();
            let e = IteratedEvaluator::new(&t).unwrap();
            let s = sr(p, q);
            prop_assume!(s.floor_square() <= 400);
            let x = e.eval_exact(k, &s).unwrap();
            let y = e.eval_quadrature(k, &s, 1e-10).unwrap();
            prop_assert!((x - y).abs() <= 1e-8 * (1.0 + x.abs()));
        }
    }
    #[test]
    fn sweep_matches_direct_sums() {
        let t = table();
        for k in 0..=5u32 {
            let e = IteratedEvaluator::new(&t).unwrap();
            let mut sw = IteratedSweep::new(&t, k).unwrap();
            let mut x = 0.0;
            while x < 22.0 {
                let want = e.eval_at(k, x).unwrap();
                let got = sw.eval(x).unwrap();
                assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "k={k} x={x}: {got} vs {want}");
                x += 0.377;
            }
            assert!(sw.eval(1.0).is_err());
        }
    }

}
