//! The oscillatory remainder `o_k` and the full expansion
//!
//! `N_{3,k}(Σ) = 8π/(3+k)! Σ^{3+k} + Σ_{m<k} C_{k-1-m}/m! Σ^m + o_k(Σ)`,
//!
//! `o_k(Σ) = -(1/π) Σ_n r_3(n)/n (2π sqrt(n))^{-k}
//!           [α Σ cos θ + β Σ sin θ + (γ cos θ + δ sin θ)/(2π sqrt(n))]`,
//!
//! with `θ = 2π sqrt(n) Σ` and `(α, β, γ, δ)` the step-`k` quadruple. The
//! series converges absolutely for `k >= 2`.

use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::lattice_sums::ConstantSet;
use crate::radial_counts::RadialCountTable;
use crate::series::coefficients::CoefficientSource;
use crate::series::tail::power_tail;
use crate::series::BoundedValue;
use crate::step_calculus::factorial;
use crate::summation::deterministic_sum_lanes;

/// `8π / (3+k)!`.
pub fn leading_coefficient(k: u32) -> f64 {
    8.0 * PI / factorial(k + 3)
}

/// Evaluates `o_k` and the full expansion from a three-dimensional table.
#[derive(Debug, Clone, Copy)]
pub struct OscillatorySeries<'a> {
    table: &'a RadialCountTable,
    source: CoefficientSource,
}

impl<'a> OscillatorySeries<'a> {
    pub fn new(table: &'a RadialCountTable) -> Result<Self> {
        Self::with_source(table, CoefficientSource::Recursion)
    }

    pub fn with_source(table: &'a RadialCountTable, source: CoefficientSource) -> Result<Self> {
        if table.dim() != 3 {
            return Err(domain("the oscillatory series needs the three-dimensional table"));
        }
        Ok(Self { table, source })
    }

    pub fn source(&self) -> CoefficientSource {
        self.source
    }

    /// Partial sum of `o_k` over `n <= n_terms` with a rigorous bound on the
    /// rest of the series and on rounding.
    pub fn eval_ok(&self, k: u32, sigma: f64, n_terms: u64) -> Result<BoundedValue<f64>> {
        if k < 2 {
            return Err(domain(format!(
                "o_{k} is not absolutely convergent pointwise; need k >= 2"
            )));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(domain(format!("radius must be finite and >= 0, got {sigma}")));
        }
        if n_terms == 0 {
            return Err(domain("need at least one term"));
        }
        self.table.check_shell(n_terms)?;
        let q = self.source.quadruple(k as u64)?;
        let (a, b, g, d) = (q.alpha as f64, q.beta as f64, q.gamma as f64, q.delta as f64);
        let counts = self.table.counts();
        let two_pi = 2.0 * PI;
        let report = deterministic_sum_lanes(1..n_terms as usize + 1, |n| {
            let r = counts[n];
            if r == 0 {
                return [0.0, 0.0];
            }
            let nf = n as f64;
            let w = two_pi * nf.sqrt();
            let theta = w * sigma;
            let (s, c) = theta.sin_cos();
            let pref = -(r as f64) / (PI * nf) * w.powi(-(k as i32));
            let bracket = a * sigma * c + b * sigma * s + (g * c + d * s) / w;
            let mag = pref.abs() * ((a.abs() + b.abs()) * sigma + (g.abs() + d.abs()) / w);
            // Each term: ~8 roundings, plus cos/sin of an argument known to ~2 ulp of θ.
            [pref * bracket, mag * (8.0 + 4.0 * theta)]
        });
        let tail = power_tail(self.table, n_terms, 1.0 + k as f64 / 2.0)?;
        let envelope = two_pi.powi(-(k as i32)) / PI
            * ((a.abs() + b.abs()) * sigma + (g.abs() + d.abs()) / two_pi);
        let bound = envelope * tail.upper() + f64::EPSILON * report.sums[1];
        Ok(BoundedValue {
            value: report.sums[0],
            bound,
            terms_used: n_terms,
        })
    }

    /// `8π/(3+k)! Σ^{3+k} + Σ_{m<k} C_{k-1-m}/m! Σ^m`; only even `C_j` appear.
    pub fn main_terms(&self, k: u32, sigma: f64, constants: &ConstantSet) -> Result<BoundedValue<f64>> {
        main_terms(k, sigma, constants)
    }

    /// The expansion with `o_k` truncated at `n_terms`.
    pub fn main_formula(
        &self,
        k: u32,
        sigma: f64,
        n_terms: u64,
        constants: &ConstantSet,
    ) -> Result<BoundedValue<f64>> {
        let poly = main_terms(k, sigma, constants)?;
        let ok = self.eval_ok(k, sigma, n_terms)?;
        let value = poly.value + ok.value;
        Ok(BoundedValue {
            value,
            bound: poly.bound + ok.bound + 2.0 * f64::EPSILON * value.abs(),
            terms_used: n_terms,
        })
    }
}

/// Polynomial part of the expansion, with the constants' bounds propagated.
pub fn main_terms(k: u32, sigma: f64, constants: &ConstantSet) -> Result<BoundedValue<f64>> {
    let lead = leading_coefficient(k) * sigma.powi(3 + k as i32);
    let mut value = lead;
    let mut bound = 0.0;
    let mut mag = lead.abs();
    for m in 0..k {
        let j = k - 1 - m;
        if j % 2 == 1 {
            continue;
        }
        let c = constants.get(j)?;
        let w = sigma.powi(m as i32) / factorial(m);
        value += c.value * w;
        mag += (c.value * w).abs();
        bound += c.bound * w;
    }
    Ok(BoundedValue {
        value,
        bound: bound + (k as f64 + 8.0) * f64::EPSILON * mag,
        terms_used: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial_counts::{build_table, SqrtRadius};
    use crate::step_calculus::IteratedEvaluator;

    fn constants() -> ConstantSet {
        ConstantSet::ewald(6, 1e-12).unwrap()
    }

    #[test]
    fn leading_coefficients() {
        assert!((leading_coefficient(4) - PI / 630.0).abs() < 1e-18);
        assert!((leading_coefficient(1) - PI / 3.0).abs() < 1e-16);
        assert!((leading_coefficient(0) - 4.0 * PI / 3.0).abs() < 1e-15);
    }

    #[test]
    fn o4_vanishes_at_origin() {
        let t = build_table(3, 10_000).unwrap();
        let s = OscillatorySeries::new(&t).unwrap();
        let v = s.eval_ok(4, 0.0, 10_000).unwrap();
        assert_eq!(v.value, 0.0);
        assert!(v.bound > 0.0);
    }

    #[test]
    fn expansion_matches_exact_values() {
        let t = build_table(3, 100_000).unwrap();
        let s = OscillatorySeries::new(&t).unwrap();
        let e = IteratedEvaluator::new(&t).unwrap();
        let cs = constants();
        for (k, p, q) in [(2u32, 1u64, 1u64), (2, 9, 4), (3, 37, 8), (4, 1600, 8), (5, 101, 8)] {
            let r = SqrtRadius::new(p, q).unwrap();
            let exact = e.eval_exact_with_budget(k, &r).unwrap();
            let series = s.main_formula(k, r.to_f64(), 100_000, &cs).unwrap();
            let diff = (series.value - exact.value).abs();
            assert!(diff <= series.bound + exact.fp_budget, "k={k} Σ²={r}: {diff:e} > {:e}", series.bound);
        }
    }

    #[test]
    fn printed_coefficients_break_odd_orders() {
        let t = build_table(3, 10_000).unwrap();
        let s = OscillatorySeries::with_source(&t, CoefficientSource::PrintedClosedForm).unwrap();
        let e = IteratedEvaluator::new(&t).unwrap();
        let r = SqrtRadius::new(37, 8).unwrap();
        let exact = e.eval_exact(3, &r).unwrap();
        let series = s.main_formula(3, r.to_f64(), 10_000, &constants()).unwrap();
        assert!((series.value - exact).abs() > 10.0 * series.bound);
    }

    #[test]
    fn bound_never_grows_with_more_terms() {
        let t = build_table(3, 40_000).unwrap();
        let s = OscillatorySeries::new(&t).unwrap();
        for k in 2..=5 {
            let mut prev = f64::INFINITY;
            for n in [2500u64, 5000, 10_000, 20_000, 40_000] {
                let b = s.eval_ok(k, 7.3, n).unwrap().bound;
                assert!(b <= prev, "k={k} n={n}");
                prev = b;
            }
        }
    }

    #[test]
    fn odd_constants_never_enter() {
        let mut cs = ConstantSet::default();
        cs.insert(crate::lattice_sums::c_constant_ewald(0, 1e-12).unwrap());
        cs.insert(crate::lattice_sums::c_constant_ewald(2, 1e-12).unwrap());
        // k = 4 needs C_3, C_2, C_1, C_0; the odd ones are skipped, not looked up.
        assert!(main_terms(4, 2.0, &cs).is_ok());
        assert!(main_terms(5, 2.0, &cs).is_err());
    }

    #[test]
    fn rejects_low_orders() {
        let t = build_table(3, 100).unwrap();
        let s = OscillatorySeries::new(&t).unwrap();
        assert!(s.eval_ok(1, 1.0, 10).is_err());
        assert!(s.eval_ok(2, -1.0, 10).is_err());
        assert!(s.eval_ok(2, 1.0, 0).is_err());
        assert!(s.eval_ok(2, 1.0, 101).is_err());
    }
}
