//! Cross-module properties checked against independent oracles.

use std::sync::OnceLock;

use gauss_sphere::lattice_sums::ConstantSet;
use gauss_sphere::oracles::brute_force_counts;
use gauss_sphere::series::{closed_form_quadruple, quadruple, OscillatorySeries};
use gauss_sphere::smeared::{fourier_check, make_bump};
use gauss_sphere::step_calculus::IteratedEvaluator;
use gauss_sphere::summation::deterministic_sum;
use gauss_sphere::{build_table, RadialCountTable, SqrtRadius};
use proptest::prelude::*;

fn table() -> &'static RadialCountTable {
    static T: OnceLock<RadialCountTable> = OnceLock::new();
    T.get_or_init(|| build_table(3, 10_000).unwrap())
}

fn constants() -> &'static ConstantSet {
    static C: OnceLock<ConstantSet> = OnceLock::new();
    C.get_or_init(|| ConstantSet::ewald(4, 1e-12).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sieve_matches_enumeration(dim in 1u8..=3, max_n in 0u64..600) {
        let t = build_table(dim, max_n).unwrap();
        let brute = brute_force_counts(dim, max_n);
        prop_assert_eq!(t.counts(), brute.as_slice());
    }

    #[test]
    fn closed_form_and_quadrature_agree(p in 0u64..4000, q in 1u64..=10, k in 1u32..=4) {
        let e = IteratedEvaluator::new(table()).unwrap();
        let s = SqrtRadius::new(p, q).unwrap();
        prop_assume!(s.floor_square() <= 400);
        let a = e.eval_exact(k, &s).unwrap();
        let b = e.eval_quadrature(k, &s, 1e-12).unwrap();
        prop_assert!((a - b).abs() <= 1e-8 * (1.0 + a.abs()));
    }

    #[test]
    fn expansion_holds_within_its_bound(m in 16u64..=226, k in 2u32..=5) {
        // Σ = m/16 is exact in binary, so both sides see the same radius.
        let radius = SqrtRadius::new(m * m, 256).unwrap();
        let sigma = m as f64 / 16.0;
        let exact = IteratedEvaluator::new(table()).unwrap().eval_exact_with_budget(k, &radius).unwrap();
        let f = OscillatorySeries::new(table()).unwrap().main_formula(k, sigma, 10_000, constants()).unwrap();
        prop_assert!((f.value - exact.value).abs() <= f.bound + exact.fp_budget);
    }

    #[test]
    fn recursion_matches_closed_form(k in 0u64..1_000_000) {
        prop_assert_eq!(quadruple(k).unwrap(), closed_form_quadruple(k));
    }

    #[test]
    fn moment_killing_holds_anywhere(a in 0.0f64..30.0, w in 0.05f64..2.0) {
        let b = make_bump(a, a + w, &[1, 2, 3, 4]).unwrap();
        prop_assert!((b.integrate(&[], |_| 1.0).value - 1.0).abs() < 1e-12);
        for m in 1..=4 {
            let v = b.integrate(&[], |x| ((x - a) / w).powi(m)).value;
            prop_assert!(v.abs() <= 1e-12, "m={} v={}", m, v);
        }
    }

    #[test]
    fn fourier_sides_are_conjugate_symmetric(tau in 0.2f64..5.5, eps in 0.05f64..1.0) {
        let a = fourier_check(table(), tau, eps, 4000, 20.0).unwrap();
        let b = fourier_check(table(), -tau, eps, 4000, 20.0).unwrap();
        prop_assert!((a.lhs - b.lhs.conj()).norm() <= 1e-12 * a.lhs.norm().max(1.0));
        prop_assert!((a.rhs - b.rhs.conj()).norm() <= 1e-12 * a.rhs.norm().max(1.0));
    }
}

#[test]
fn sums_do_not_depend_on_thread_count() {
    let t = table();
    let f = |n: usize| t.counts()[n] as f64 * ((n as f64).sqrt() * 7.1).sin() / (1.0 + n as f64);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| deterministic_sum(0..10_001, f).sums[0])
    };
    let one = run(1);
    for threads in [2, 3, 8] {
        assert_eq!(one.to_bits(), run(threads).to_bits());
    }
}
