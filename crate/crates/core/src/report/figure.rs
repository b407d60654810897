//! Data behind the plot of `o_4(Σ)` on the grid `Σ = sqrt(λ/8)`, `1 <= λ <= λ_max`.

use std::io::Write;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::lattice_sums::{c_constant_ewald, LatticeSumConstant};
use crate::radial_counts::{RadialCountTable, SqrtRadius};
use crate::series::remainder::{leading_coefficient, OscillatorySeries};
use crate::step_calculus::IteratedEvaluator;

pub const MAX_LAMBDA: u64 = 100_000;
/// Grid denominator: `Σ² = λ / 8`.
pub const GRID_DENOMINATOR: u64 = 8;
/// Ewald precision for `C_0` and `C_2`.
pub const CONSTANT_TARGET: f64 = 1e-9;
/// Every row with `λ` divisible by this is checked against the series.
pub const CROSS_CHECK_STRIDE: u64 = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FigureRow {
    pub lambda: u64,
    /// `λ/8`, exact in binary.
    pub sigma2: f64,
    pub n34: f64,
    /// `N_{3,4} - (π/630) Σ⁷`.
    pub residual1: f64,
    /// `residual1 - (C_0/6) Σ³`.
    pub residual2: f64,
    /// `residual2 - C_2 Σ`, which is `o_4(Σ)`.
    pub residual3: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossCheck {
    pub lambda: u64,
    pub exact: f64,
    pub series: f64,
    /// Series bound plus the rounding and constant errors on the exact side.
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FigureData {
    pub rows: Vec<FigureRow>,
    pub checks: Vec<CrossCheck>,
    pub c0: LatticeSumConstant,
    pub c2: LatticeSumConstant,
    pub n_terms: u64,
}

/// Builds every row and cross-checks `residual3` against the `o_4` series at
/// each [`CROSS_CHECK_STRIDE`]-th `λ` and at `λ_max`; the first row outside
/// the series bound aborts with [`Error::FigureCrossCheck`].
pub fn figure_pipeline(table: &RadialCountTable, lambda_max: u64, n_terms: u64) -> Result<FigureData> {
    if lambda_max == 0 || lambda_max > MAX_LAMBDA {
        return Err(domain(format!("lambda_max must be in 1..={MAX_LAMBDA}, got {lambda_max}")));
    }
    table.check_shell(lambda_max / GRID_DENOMINATOR)?;
    table.check_shell(n_terms)?;
    let exact = IteratedEvaluator::new(table)?;
    let series = OscillatorySeries::new(table)?;
    let c0 = c_constant_ewald(0, CONSTANT_TARGET)?;
    let c2 = c_constant_ewald(2, CONSTANT_TARGET)?;
    let lead = leading_coefficient(4);
    let eps = f64::EPSILON;

    let mut rows = Vec::with_capacity(lambda_max as usize);
    let mut checks = Vec::new();
    for lambda in 1..=lambda_max {
        let radius = SqrtRadius::new(lambda, GRID_DENOMINATOR)?;
        let sigma2 = lambda as f64 / GRID_DENOMINATOR as f64;
        let sigma = sigma2.sqrt();
        let n34 = exact.eval_exact_with_budget(4, &radius)?;
        let t1 = lead * sigma.powi(7);
        let t2 = c0.value / 6.0 * sigma.powi(3);
        let t3 = c2.value * sigma;
        let residual1 = n34.value - t1;
        let residual2 = residual1 - t2;
        let residual3 = residual2 - t3;
        rows.push(FigureRow {
            lambda,
            sigma2,
            n34: n34.value,
            residual1,
            residual2,
            residual3,
        });

        if lambda % CROSS_CHECK_STRIDE == 0 || lambda == lambda_max {
            let ok = series.eval_ok(4, sigma, n_terms)?;
            // `sigma` is within half an ulp of the true radius; N_{3,4} moves by
            // at most N_{3,3}(Σ) times that.
            let slope = exact.eval_exact(3, &radius)?;
            let rounding = n34.fp_budget
                + 8.0 * eps * (n34.value.abs() + t1.abs() + t2.abs() + t3.abs())
                + slope * eps * sigma;
            let constants = c0.bound / 6.0 * sigma.powi(3) + c2.bound * sigma;
            let bound = ok.bound + rounding + constants;
            if (residual3 - ok.value).abs() > bound {
                return Err(Error::FigureCrossCheck {
                    lambda,
                    exact: residual3,
                    series: ok.value,
                    bound,
                });
            }
            checks.push(CrossCheck {
                lambda,
                exact: residual3,
                series: ok.value,
                bound,
            });
        }
    }
    Ok(FigureData {
        rows,
        checks,
        c0,
        c2,
        n_terms,
    })
}

/// `max |residual3|` over rows with `λ` in `[lo, hi]`.
pub fn window_max(rows: &[FigureRow], lo: u64, hi: u64) -> f64 {
    rows.iter()
        .filter(|r| (lo..=hi).contains(&r.lambda))
        .map(|r| r.residual3.abs())
        .fold(0.0, f64::max)
}

/// Amplitude over `λ ∈ [800, 1600]` divided by amplitude over `[200, 400]`.
/// Linear growth in `Σ` makes this about 2.
pub fn amplitude_ratio(rows: &[FigureRow]) -> f64 {
    window_max(rows, 800, 1600) / window_max(rows, 200, 400)
}

pub const CSV_HEADER: [&str; 6] = ["lambda", "sigma2", "N34", "residual1", "residual2", "residual3"];

/// 17 significant digits in scientific notation.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv<W: Write>(rows: &[FigureRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(csv_error)?;
    for r in rows {
        w.write_record([
            r.lambda.to_string(),
            format_real(r.sigma2),
            format_real(r.n34),
            format_real(r.residual1),
            format_real(r.residual2),
            format_real(r.residual3),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}
