//! Pairings of counting data and of their Bessel series with bump functions.
//!
//! The radial identities behind these checks, for `d ∈ {1, 2, 3}` and
//! `ν = d/2 - 1`:
//!
//! * `Δ_d(Σ) = A_d Σ^{d-1} + Σ_n r_d(n) 2π Σ^{d/2} n^{-ν/2} J_ν(2π sqrt(n) Σ)`
//! * `N_d(Σ) = V_d Σ^d + Σ^{d/2} Σ_n r_d(n) n^{-d/4} J_{d/2}(2π sqrt(n) Σ)`
//!
//! with `A_d` the area of the unit sphere and `V_d` the volume of the unit
//! ball. Neither series converges pointwise in the useful range; paired with
//! a bump they converge fast, and the remaining tail is estimated from three
//! partial sums.

use std::f64::consts::PI;


use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::lattice_sums::ConstantSet;
use crate::radial_counts::RadialCountTable;
use crate::series::bessel::bessel_j;
use crate::series::coefficients::CoefficientSource;
use crate::series::remainder::main_terms;
use crate::smeared::bump::{BumpFunction, BumpNorms, Quadrature};
use crate::smeared::report::{PairingReport, TailStatus};
use crate::step_calculus::IteratedEvaluator;
use crate::summation::deterministic_sum_lanes;

/// Relative slack added to every verdict.
pub const SLACK: f64 = 1e-8;

fn sphere_area(d: u8) -> f64 {
    match d {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 4.0 * PI,
    }
}

fn ball_volume(d: u8) -> f64 {
    match d {
        1 => 2.0,
        2 => PI,
        _ => 4.0 * PI / 3.0,
    }
}

/// Lattice radii `sqrt(n)` strictly inside the bump support.
fn radii_inside(bump: &BumpFunction) -> Vec<f64> {
    let (a, b) = bump.support();
    let lo = (a * a).floor() as u64;
    let hi = (b * b).ceil() as u64;
    (lo..=hi)
        .map(|n| (n as f64).sqrt())
        .filter(|&r| r > a && r < b)
        .collect()
}

fn check_support(table: &RadialCountTable, bump: &BumpFunction) -> Result<()> {
    let (_, b) = bump.support();
    table.check_shell((b * b).ceil() as u64)
}

/// `∫χ(Σ) N_{3,k}(Σ) dΣ`, panels split at every lattice radius.
pub fn pair_counting(table: &RadialCountTable, k: u32, bump: &BumpFunction) -> Result<Quadrature> {
    if k > 4 {
        return Err(domain(format!("pairing supports 0 <= k <= 4, got {k}")));
    }
    check_support(table, bump)?;
    let eval = IteratedEvaluator::new(table)?;
    let breaks = radii_inside(bump);
    let mut err = None;
    let q = bump.integrate(&breaks, |x| match eval.eval_at(k, x) {
        Ok(v) => v,
        Err(e) => {
            err.get_or_insert(e);
            f64::NAN
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(q),
    }
}

/// `∫χ N_d` for any dimension, panels split at lattice radii.
fn pair_count_any_dim(table: &RadialCountTable, bump: &BumpFunction) -> Result<Quadrature> {
    check_support(table, bump)?;
    let breaks = radii_inside(bump);
    Ok(bump.integrate(&breaks, |x| table.count_at(x).map(|c| c as f64).unwrap_or(f64::NAN)))
}

/// Partial sums `Σ_{1 <= n <= N_i} ∫χ(Σ) term(n, Σ) dΣ` at each checkpoint,
/// as `(fine, coarse, Σ|terms|)`.
pub fn smeared_partial_sums<F>(bump: &BumpFunction, checkpoints: &[u64], term: F) -> Vec<[f64; 3]>
where
    F: Fn(u64, f64) -> f64 + Sync,
{
    let top = checkpoints.iter().copied().max().unwrap_or(0);
    let omega_max = 2.0 * PI * (top as f64).sqrt() * bump.support().1.max(1.0);
    let [coarse, fine] = bump.weighted_nodes(omega_max);
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut acc = [0.0f64; 3];
    let mut prev = 0u64;
    for &cp in checkpoints {
        let rep = deterministic_sum_lanes(prev as usize + 1..cp as usize + 1, |n| {
            let n = n as u64;
            let f: f64 = fine.iter().map(|&(x, w)| w * term(n, x)).sum();
            let c: f64 = coarse.iter().map(|&(x, w)| w * term(n, x)).sum();
            [f, c]
        });
        acc[0] += rep.sums[0];
        acc[1] += rep.sums[1];
        acc[2] += rep.abs_sums[0];
        out.push(acc);
        prev = cp.max(prev);
    }
    out
}

/// Tail estimate from partial sums at `N/4`, `N/2`, `N`.
fn richardson(s: [f64; 3], floor: f64) -> (f64, TailStatus) {
    let d1 = (s[1] - s[0]).abs();
    let d2 = (s[2] - s[1]).abs();
    if d2 <= floor {
        return (floor, TailStatus::Converged);
    }
    if d1 <= d2 {
        return (f64::INFINITY, TailStatus::NonConvergent);
    }
    // Lattice fluctuations make successive ratios irregular, so the
    // geometric estimate is never allowed below the last difference.
    let rho = d2 / d1;
    (d2 * (rho / (1.0 - rho)).max(1.0) + floor, TailStatus::Geometric { ratio: rho })
}

fn checkpoints(n_terms: u64) -> Result<[u64; 3]> {
    if n_terms < 4 {
        return Err(domain("smeared series need at least 4 terms"));
    }
    Ok([n_terms / 4, n_terms / 2, n_terms])
}

struct SeriesPart {
    rhs: f64,
    bound: f64,
    quad: f64,
    status: TailStatus,
    checkpoints: Vec<(u64, f64)>,
}

fn series_part<F: Fn(u64, f64) -> f64 + Sync>(bump: &BumpFunction, n_terms: u64, term: F) -> Result<SeriesPart> {
    let cps = checkpoints(n_terms)?;
    let sums = smeared_partial_sums(bump, &cps, term);
    let last = sums[2];
    let quad = (last[0] - last[1]).abs();
    let floor = 64.0 * f64::EPSILON * last[2] + quad;
    let (tail, status) = richardson([sums[0][0], sums[1][0], sums[2][0]], floor);
    if status == TailStatus::NonConvergent {
        return Err(Error::NonConvergentTail {
            n_terms,
            partial_sums: [sums[0][0], sums[1][0], sums[2][0]],
        });
    }
    Ok(SeriesPart {
        rhs: last[0],
        bound: tail,
        quad,
        status,
        checkpoints: cps.iter().zip(&sums).map(|(&n, s)| (n, s[0])).collect(),
    })
}

fn finish(lhs: Quadrature, main: Quadrature, series: SeriesPart, n_terms: u64, norms: BumpNorms) -> PairingReport<f64> {
    PairingReport::new(
        lhs.value,
        main.value + series.rhs,
        series.bound,
        0.0,
        lhs.error_estimate + main.error_estimate + series.quad,
        n_terms,
        series.status,
        series.checkpoints.into_iter().map(|(n, s)| (n, main.value + s)).collect(),
        Some(norms),
        lhs.value.abs().max(main.value.abs()),
    )
}

fn check_dim(table: &RadialCountTable) -> Result<u8> {
    match table.dim() {
        d @ 1..=3 => Ok(d),
        d => Err(Error::InvalidDimension(d)),
    }
}

/// `Σ_n r_d(n) χ(sqrt(n))` against `A_d ∫χ r^{d-1} + Σ_{n<=N}` of the
/// smeared Bessel terms.
pub fn verify_delta_identity(table: &RadialCountTable, bump: &BumpFunction, n_terms: u64) -> Result<PairingReport<f64>> {
    let d = check_dim(table)?;
    check_support(table, bump)?;
    table.check_shell(n_terms)?;
    let (a, b) = bump.support();
    let lo = (a * a).floor() as u64;
    let hi = (b * b).ceil() as u64;
    let lhs: f64 = (lo..=hi)
        .map(|n| table.r(n) as f64 * bump.eval((n as f64).sqrt()))
        .sum();
    let main = bump.integrate(&[], |r| sphere_area(d) * r.powi(d as i32 - 1));
    let two_nu = d as i32 - 2;
    let nu = two_nu as f64 / 2.0;
    let counts = table.counts();
    let series = series_part(bump, n_terms, |n, x| {
        let r = counts[n as usize];
        if r == 0 {
            return 0.0;
        }
        let nf = n as f64;
        let z = 2.0 * PI * nf.sqrt() * x;
        let j = bessel_j(two_nu, z).unwrap_or(f64::NAN);
        r as f64 * 2.0 * PI * x.powf(d as f64 / 2.0) * nf.powf(-nu / 2.0) * j
    })?;
    Ok(finish(
        Quadrature {
            value: lhs,
            error_estimate: 0.0,
        },
        main,
        series,
        n_terms,
        bump.norms(),
    ))
}

/// `∫χ N_d` against `V_d ∫χ Σ^d + Σ_{n<=N}` of the smeared Bessel terms.
pub fn verify_nd_identity(table: &RadialCountTable, bump: &BumpFunction, n_terms: u64) -> Result<PairingReport<f64>> {
    let d = check_dim(table)?;
    table.check_shell(n_terms)?;
    let lhs = pair_count_any_dim(table, bump)?;
    let main = bump.integrate(&[], |r| ball_volume(d) * r.powi(d as i32));
    let counts = table.counts();
    let series = series_part(bump, n_terms, |n, x| nd_term(d, counts[n as usize], n, x))?;
    Ok(finish(lhs, main, series, n_terms, bump.norms()))
}

/// `r_d(n) Σ^{d/2} n^{-d/4} J_{d/2}(2π sqrt(n) Σ)`.
pub fn nd_term(d: u8, r: u64, n: u64, x: f64) -> f64 {
    if r == 0 {
        return 0.0;
    }
    let nf = n as f64;
    let z = 2.0 * PI * nf.sqrt() * x;
    let half_d = d as f64 / 2.0;
    r as f64 * x.powf(half_d) * nf.powf(-half_d / 2.0) * bessel_j(d as i32, z).unwrap_or(f64::NAN)
}

/// Residual of the `N_d` identity after `n_terms` series terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NdResidual {
    pub n_terms: u64,
    pub residual: f64,
    /// Rounding plus quadrature level below which the residual carries no
    /// information.
    pub noise_floor: f64,
}

/// `|∫χ N_d - (V_d ∫χ Σ^d + Σ_{n<=N_i} ...)|` at each checkpoint `N_i`.
pub fn nd_residuals(table: &RadialCountTable, bump: &BumpFunction, checkpoints: &[u64]) -> Result<Vec<NdResidual>> {
    let d = check_dim(table)?;
    let top = checkpoints.iter().copied().max().unwrap_or(0);
    table.check_shell(top)?;
    let lhs = pair_count_any_dim(table, bump)?;
    let main = bump.integrate(&[], |r| ball_volume(d) * r.powi(d as i32));
    let counts = table.counts();
    let sums = smeared_partial_sums(bump, checkpoints, |n, x| nd_term(d, counts[n as usize], n, x));
    let base = lhs.error_estimate + main.error_estimate + 64.0 * f64::EPSILON * (lhs.value.abs() + main.value.abs());
    Ok(checkpoints
        .iter()
        .zip(&sums)
        .map(|(&n_terms, s)| NdResidual {
            n_terms,
            residual: (lhs.value - main.value - s[0]).abs(),
            noise_floor: base + (s[0] - s[1]).abs() + 64.0 * f64::EPSILON * s[2],
        })
        .collect())
}

/// `∫χ N_{3,k}` against the smeared expansion `∫χ (main terms + o_k)`.
/// For `k <= 1` the series for `o_k` only converges in this smeared sense.
pub fn verify_smeared_expansion(
    table: &RadialCountTable,
    k: u32,
    bump: &BumpFunction,
    n_terms: u64,
    constants: &ConstantSet,
    source: CoefficientSource,
) -> Result<PairingReport<f64>> {
    if table.dim() != 3 {
        return Err(Error::InvalidDimension(table.dim()));
    }
    table.check_shell(n_terms)?;
    let lhs = pair_counting(table, k, bump)?;
    let mut err = None;
    let main = bump.integrate(&[], |x| match main_terms(k, x, constants) {
        Ok(v) => v.value,
        Err(e) => {
            err.get_or_insert(e);
            f64::NAN
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    let q = source.quadruple(k as u64)?;
    let (al, be, ga, de) = (q.alpha as f64, q.beta as f64, q.gamma as f64, q.delta as f64);
    let counts = table.counts();
    let series = series_part(bump, n_terms, |n, x| {
        let r = counts[n as usize];
        if r == 0 {
            return 0.0;
        }
        let nf = n as f64;
        let w = 2.0 * PI * nf.sqrt();
        let (s, c) = (w * x).sin_cos();
        -(r as f64) / (PI * nf) * w.powi(-(k as i32)) * (al * x * c + be * x * s + (ga * c + de * s) / w)
    })?;
    Ok(finish(lhs, main, series, n_terms, bump.norms()))
}
