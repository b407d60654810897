//! The full verification run: the ten acceptance checks plus module
//! invariants at a profile-dependent scale.

use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Result;
use crate::lattice_sums::{c_consistency_check, c_constant_direct, c_constant_ewald, c_constant_ewald_with_split, ConstantSet};
use crate::oracles::brute_force_counts;
use crate::radial_counts::{build_table, RadialCountTable};
use crate::report::criteria::{compare_series_with_exact, run_criteria, CriterionOutcome};
use crate::report::figure::{figure_pipeline, write_csv};
use crate::series::coefficients::{closed_form_quadruple, quadruple, CoefficientSource};
use crate::series::tail::gauss_sandwich;
use crate::smeared::bump::make_bump;
use crate::smeared::fourier::fourier_check;
use crate::smeared::pairing::{verify_delta_identity, verify_nd_identity, verify_smeared_expansion};
use crate::step_calculus::{IteratedEvaluator, IteratedSweep};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    #[default]
    Quick,
    Full,
}

impl Profile {
    /// Largest shell in the invariant tables.
    pub fn max_n(self) -> u64 {
        match self {
            Self::Quick => 40_000,
            Self::Full => 1_000_000,
        }
    }

    /// Series terms for the invariant checks.
    pub fn n_terms(self) -> u64 {
        match self {
            Self::Quick => 10_000,
            Self::Full => 100_000,
        }
    }
}

impl std::str::FromStr for Profile {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(Self::Quick),
            "full" => Ok(Self::Full),
            _ => Err(crate::Error::Parse {
                what: "profile",
                input: s.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct SuiteOptions {
    pub profile: Profile,
    /// Coefficient source fed to the series pipeline; the printed closed form
    /// is expected to make the run fail.
    pub source: CoefficientSource,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub elapsed_s: f64,
    pub detail: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteSummary {
    pub options: SuiteOptions,
    pub passed: bool,
    pub criteria: Vec<CriterionOutcome>,
    pub invariants: Vec<InvariantOutcome>,
    pub elapsed_s: f64,
}

fn invariant(name: &'static str, f: impl FnOnce() -> Result<(bool, Value)>) -> InvariantOutcome {
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(x) => x,
        Err(e) => (false, json!({ "error": e.to_string() })),
    };
    InvariantOutcome {
        name,
        passed,
        elapsed_s: start.elapsed().as_secs_f64(),
        detail,
    }
}

fn invariants(opts: SuiteOptions, table: &RadialCountTable) -> Vec<InvariantOutcome> {
    let max_n = opts.profile.max_n();
    let n_terms = opts.profile.n_terms();
    let mut out = Vec::new();

    out.push(invariant("counts in every dimension match enumeration", || {
        let mut bad = Vec::new();
        for d in 1..=3u8 {
            let t = build_table(d, 2000)?;
            if t.counts() != brute_force_counts(d, 2000).as_slice() {
                bad.push(d);
            }
        }
        Ok((bad.is_empty(), json!({ "failing_dimensions": bad })))
    }));
    out.push(invariant("cumulative counts lie in the cube sandwich", || {
        let bad = (1..=max_n)
            .filter(|&n| {
                let (lo, hi) = gauss_sandwich(n as f64);
                let a = table.cumulative_at(n) as f64;
                a < lo || a > hi
            })
            .count();
        Ok((bad == 0, json!({ "max_n": max_n, "violations": bad })))
    }));
    out.push(invariant("iterated sweep agrees with direct sums", || {
        let e = IteratedEvaluator::new(table)?;
        let top = (max_n as f64).sqrt().min(120.0);
        let mut worst: f64 = 0.0;
        for k in 1..=4 {
            let mut sweep = IteratedSweep::new(table, k)?;
            let mut x = 0.5;
            while x < top {
                let a = sweep.eval(x)?;
                let b = e.eval_at(k, x)?;
                worst = worst.max((a - b).abs() / b.abs().max(1.0));
                x += 1.37;
            }
        }
        Ok((worst < 1e-12, json!({ "worst_relative": worst })))
    }));
    out.push(invariant("closed-form quadruples match the recursion", || {
        let mut bad = 0;
        for k in (0..1_000_000u64).step_by(997) {
            if quadruple(k)? != closed_form_quadruple(k) {
                bad += 1;
            }
        }
        Ok((bad == 0, json!({ "mismatches": bad })))
    }));
    out.push(invariant("expansion at k = 2..5 with the profile's term count", || {
        let cs = ConstantSet::ewald(4, 1e-12)?;
        let rows = compare_series_with_exact(table, &cs, opts.source, &[2, 3, 4, 5])?;
        let bad = rows.iter().filter(|r| !r.within).count();
        Ok((bad == 0, json!({ "points": rows.len(), "outside_bound": bad })))
    }));
    out.push(invariant("Ewald values are independent of the split", || {
        let mut worst: f64 = 0.0;
        for j in [0u32, 2, 4] {
            let base = c_constant_ewald(j, 1e-13)?.value;
            for t in [0.5, 2.0] {
                let v = c_constant_ewald_with_split(j, 1e-13, t)?.value;
                worst = worst.max((v - base).abs() / base.abs());
            }
        }
        Ok((worst < 1e-11, json!({ "worst_relative": worst })))
    }));
    out.push(invariant("constants: prefactor consistency and direct containment", || {
        let mut ok = true;
        let mut rows = Vec::new();
        for j in [0u32, 2, 4] {
            ok &= c_consistency_check(j)?;
            let e = c_constant_ewald(j, 1e-12)?;
            let d = c_constant_direct(table, j, max_n)?;
            ok &= d.contains(e.value);
            rows.push(json!({ "j": j, "ewald": e.value, "direct": d.value, "bound": d.bound }));
        }
        Ok((ok, Value::Array(rows)))
    }));
    out.push(invariant("delta identity in dimensions 1, 2, 3", || {
        let mut ok = true;
        let mut rows = Vec::new();
        for (d, a, b) in [(1u8, 0.5, 1.5), (2, 0.5, 1.5), (3, 1.45, 1.7)] {
            let t = build_table(d, n_terms)?;
            let r = verify_delta_identity(&t, &make_bump(a, b, &[])?, n_terms)?;
            ok &= r.passed();
            rows.push(json!({ "d": d, "lhs": r.lhs, "rhs": r.rhs, "margin": r.margin }));
        }
        Ok((ok, Value::Array(rows)))
    }));
    out.push(invariant("N_d identity in dimension 2", || {
        let t = build_table(2, n_terms)?;
        let r = verify_nd_identity(&t, &make_bump(0.5, 1.5, &[])?, n_terms)?;
        Ok((r.passed(), serde_json::to_value(&r)?))
    }));
    out.push(invariant("smeared k = 1 expansion", || {
        let cs = ConstantSet::ewald(0, 1e-12)?;
        let r = verify_smeared_expansion(table, 1, &make_bump(1.45, 1.7, &[])?, n_terms, &cs, opts.source)?;
        Ok((r.passed(), serde_json::to_value(&r)?))
    }));
    out.push(invariant("damped Fourier identity at two dampings", || {
        let mut ok = true;
        let mut rows = Vec::new();
        for eps in [0.25, 0.5] {
            let r = fourier_check(table, 1.0, eps, n_terms, 60.0)?;
            ok &= r.passed();
            rows.push(json!({ "eps": eps, "lhs": r.lhs, "rhs": r.rhs, "relative": r.relative_discrepancy }));
        }
        Ok((ok, Value::Array(rows)))
    }));
    out.push(invariant("figure CSV is byte-stable", || {
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_csv(&figure_pipeline(table, 400, 10_000)?.rows, &mut a)?;
        write_csv(&figure_pipeline(table, 400, 10_000)?.rows, &mut b)?;
        Ok((a == b, json!({ "bytes": a.len() })))
    }));
    out
}

pub fn run_suite(opts: SuiteOptions) -> SuiteSummary {
    let start = Instant::now();
    let criteria = run_criteria(opts.source);
    let invariants = match build_table(3, opts.profile.max_n()) {
        Ok(t) => invariants(opts, &t),
        Err(e) => vec![InvariantOutcome {
            name: "table construction",
            passed: false,
            elapsed_s: 0.0,
            detail: json!({ "error": e.to_string() }),
        }],
    };
    let passed = criteria.iter().all(|c| c.passed) && invariants.iter().all(|i| i.passed);
    SuiteSummary {
        options: opts,
        passed,
        criteria,
        invariants,
        elapsed_s: start.elapsed().as_secs_f64(),
    }
}
