//! The damped Fourier transform of the lattice remainder against its
//! closed-geodesic series.
//!
//! With `p = ε + iτ`,
//!
//! `∫_0^∞ (N_3(Σ) - (4π/3)Σ³) e^{-pΣ} dΣ = 8π Σ_{n>=1} r_3(n) / (p² + 4π²n)²`.
//!
//! The left side is truncated at `R` and bounded beyond it by the cube
//! sandwich. The right side is summed to `N`; past `N` the summand is expanded
//! in powers of `p²/(4π²n)` and each power is a certified tail.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::quadrature::GaussLegendre;
use crate::radial_counts::RadialCountTable;
use crate::series::tail::{power_tail, CUBE_HALF_DIAGONAL};
use crate::smeared::report::{PairingReport, TailStatus};
use crate::summation::deterministic_sum_lanes;

/// Smallest admissible damping.
pub const MIN_EPSILON: f64 = 0.05;
/// Exclusion radius around each `2π sqrt(n)`.
pub const SINGULAR_GAP: f64 = 0.1;
const GAP_NODES: usize = 32;
const MAX_EXPANSION: usize = 24;

const BALL: f64 = 4.0 * PI / 3.0;

fn check_inputs(tau: f64, eps: f64, r_max: f64) -> Result<()> {
    if !(MIN_EPSILON..=1.0).contains(&eps) {
        return Err(domain(format!("damping {eps} outside [{MIN_EPSILON}, 1]")));
    }
    if !tau.is_finite() {
        return Err(domain("tau must be finite"));
    }
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(domain(format!("cut R = {r_max} must be positive")));
    }
    let top = (r_max * r_max).floor() as u64;
    // Nearest 2π sqrt(n) to |τ|.
    let m = (tau.abs() / (2.0 * PI)).powi(2);
    for n in [m.floor() as u64, m.ceil() as u64] {
        if n >= 1 && n <= top {
            let distance = (tau.abs() - 2.0 * PI * (n as f64).sqrt()).abs();
            if distance < SINGULAR_GAP {
                return Err(Error::SingularSupport { tau, n, distance });
            }
        }
    }
    Ok(())
}

/// `∫_0^R Σ³ e^{-pΣ} dΣ`.
fn cubic_moment(p: Complex64, r: f64) -> Complex64 {
    let e = (-p * r).exp();
    let (p2, p3) = (p * p, p * p * p);
    let p4 = p2 * p2;
    6.0 / p4 - e * (r.powi(3) / p + 3.0 * r * r / p2 + 6.0 * r / p3 + 6.0 / p4)
}

/// `∫_0^R (N_3 - (4π/3)Σ³) e^{-pΣ}` in closed form, and the same integral by
/// Gauss–Legendre on every gap between lattice radii.
fn truncated_transform(table: &RadialCountTable, p: Complex64, r: f64) -> (Complex64, Complex64) {
    let top = (r * r).floor() as u64;
    let e_r = (-p * r).exp();
    let jumps = deterministic_sum_lanes(0..top as usize + 1, |n| {
        let z = table.r(n as u64) as f64 * ((-p * (n as f64).sqrt()).exp() - e_r) / p;
        [z.re, z.im]
    });
    let closed = Complex64::new(jumps.sums[0], jumps.sums[1]) - BALL * cubic_moment(p, r);

    let rule = GaussLegendre::<f64>::new(GAP_NODES);
    let quad = deterministic_sum_lanes(0..top as usize + 1, |n| {
        let a = (n as f64).sqrt();
        let b = ((n + 1) as f64).sqrt().min(r);
        if b <= a {
            return [0.0, 0.0];
        }
        let count = table.cumulative_at(n as u64) as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, w) in rule.mapped(a, b) {
            acc += w * (count - BALL * x.powi(3)) * (-p * x).exp();
        }
        [acc.re, acc.im]
    });
    (closed, Complex64::new(quad.sums[0], quad.sums[1]))
}

/// `∫_R^∞ Σ^m e^{-εΣ} dΣ`.
fn exp_moment(m: u32, eps: f64, r: f64) -> f64 {
    let mut total = 0.0;
    let mut ratio = 1.0; // m!/i!
    for i in (0..=m).rev() {
        total += ratio * r.powi(i as i32) / eps.powi((m - i + 1) as i32);
        ratio *= i.max(1) as f64;
    }
    (-eps * r).exp() * total
}

/// Bound on `|∫_R^∞ (N_3 - (4π/3)Σ³) e^{-pΣ}|` from
/// `|N_3(Σ) - (4π/3)Σ³| <= (4π/3)(3cΣ² + 3c²Σ + c³)`.
pub fn transform_tail_bound(eps: f64, r: f64) -> f64 {
    let c = CUBE_HALF_DIAGONAL;
    BALL * (3.0 * c * exp_moment(2, eps, r) + 3.0 * c * c * exp_moment(1, eps, r) + c.powi(3) * exp_moment(0, eps, r))
}

struct SeriesSide {
    value: Complex64,
    bound: f64,
    checkpoints: Vec<(u64, Complex64)>,
}

fn geodesic_series(table: &RadialCountTable, p: Complex64, n_terms: u64) -> Result<SeriesSide> {
    let b = 4.0 * PI * PI;
    let p2 = p * p;
    let cps = [n_terms / 4, n_terms / 2, n_terms];
    let mut checkpoints = Vec::with_capacity(3);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut abs = 0.0;
    let mut prev = 0u64;
    for &cp in &cps {
        let rep = deterministic_sum_lanes(prev as usize + 1..cp as usize + 1, |n| {
            let d = p2 + b * n as f64;
            let z = table.r(n as u64) as f64 / (d * d);
            [z.re, z.im]
        });
        acc += Complex64::new(rep.sums[0], rep.sums[1]);
        abs += rep.abs_sums[0] + rep.abs_sums[1];
        checkpoints.push((cp, 8.0 * PI * acc));
        prev = cp;
    }

    // Σ_{n>N} r_3(n)/(bn)² (1 + p²/(bn))^{-2} = b^{-2} Σ_k (k+1)(-p²/b)^k T(N, 2+k).
    let q = p.norm_sqr() / (b * n_terms as f64);
    if q >= 0.5 {
        return Err(domain(format!("N = {n_terms} too small for |p|² = {}", p.norm_sqr())));
    }
    let lead = power_tail(table, n_terms, 2.0)?;
    let mut tail = Complex64::new(0.0, 0.0);
    let mut tail_err = 0.0;
    let mut power = Complex64::new(1.0, 0.0);
    let mut k = 0usize;
    loop {
        let t = power_tail(table, n_terms, 2.0 + k as f64)?;
        let w = (k + 1) as f64;
        tail += w * power * t.estimate;
        tail_err += w * power.norm() * t.error;
        power *= -p2 / b;
        let kk = k as f64;
        let truncation = lead.upper() * (kk + 2.0) * q.powi(k as i32 + 1) / (1.0 - q).powi(2);
        if truncation <= f64::EPSILON * (acc.norm() + lead.upper()) || k + 1 == MAX_EXPANSION {
            tail_err += truncation;
            break;
        }
        k += 1;
    }
    let fp = 64.0 * f64::EPSILON * abs;
    let value = 8.0 * PI * (acc + tail / (b * b));
    Ok(SeriesSide {
        value,
        bound: 8.0 * PI * (tail_err / (b * b) + fp),
        checkpoints,
    })
}

/// `∫_0^∞ (N_3 - (4π/3)Σ³) e^{-(ε+iτ)Σ}` truncated at `R = r_max` against the
/// geodesic series summed to `n_terms`.
pub fn fourier_check(
    table: &RadialCountTable,
    tau: f64,
    eps: f64,
    n_terms: u64,
    r_max: f64,
) -> Result<PairingReport<Complex64>> {
    if table.dim() != 3 {
        return Err(Error::InvalidDimension(table.dim()));
    }
    if n_terms < 4 {
        return Err(domain("the geodesic series needs at least 4 terms"));
    }
    check_inputs(tau, eps, r_max)?;
    table.check_shell((r_max * r_max).ceil() as u64)?;
    table.check_shell(n_terms)?;
    let p = Complex64::new(eps, tau);
    let (lhs, quad) = truncated_transform(table, p, r_max);
    let series = geodesic_series(table, p, n_terms)?;
    let scale = lhs.norm().max(series.value.norm());
    Ok(PairingReport::new(
        lhs,
        series.value,
        series.bound,
        transform_tail_bound(eps, r_max),
        (lhs - quad).norm(),
        n_terms,
        TailStatus::Rigorous,
        series.checkpoints,
        None,
        scale,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial_counts::build_table;

    #[test]
    fn reference_point() {
        let t = build_table(3, 10_000).unwrap();
        let r = fourier_check(&t, 1.0, 0.2, 10_000, 60.0).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.relative_discrepancy <= 1e-3, "{r:?}");
        let want = Complex64::new(0.2733526, -0.0029184);
        assert!((r.rhs - want).norm() < 1e-6, "{:?}", r.rhs);
        assert!(r.quadrature_estimate < 1e-9);
    }

    #[test]
    fn conjugate_symmetry() {
        let t = build_table(3, 4000).unwrap();
        let a = fourier_check(&t, 2.5, 0.3, 4000, 40.0).unwrap();
        let b = fourier_check(&t, -2.5, 0.3, 4000, 40.0).unwrap();
        assert!((a.lhs - b.lhs.conj()).norm() < 1e-12 * a.lhs.norm().max(1.0));
        assert!((a.rhs - b.rhs.conj()).norm() < 1e-12 * a.rhs.norm().max(1.0));
    }

    #[test]
    fn heavier_damping_tightens_the_left_tail() {
        assert!(transform_tail_bound(0.5, 40.0) < transform_tail_bound(0.25, 40.0));
        let t = build_table(3, 4000).unwrap();
        let r = fourier_check(&t, 1.0, 0.5, 4000, 40.0).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.relative_discrepancy < 1e-6, "{r:?}");
    }

    #[test]
    fn exp_moments_match_quadrature() {
        let rule = GaussLegendre::<f64>::new(64);
        for m in 0..=3 {
            let edges: Vec<f64> = (0..=400).map(|i| 10.0 + i as f64 * 0.5).collect();
            let got = rule.integrate_panels(&edges, |x| x.powi(m as i32) * (-0.3 * x).exp());
            let want = exp_moment(m, 0.3, 10.0) - exp_moment(m, 0.3, 210.0);
            assert!((got - want).abs() < 1e-10 * want, "m={m}");
        }
    }

    #[test]
    fn rejects_singular_support_and_weak_damping() {
        let t = build_table(3, 4000).unwrap();
        let tau = 2.0 * PI * 2f64.sqrt() + 0.05;
        assert!(matches!(fourier_check(&t, tau, 0.2, 4000, 30.0), Err(Error::SingularSupport { n: 2, .. })));
        assert!(fourier_check(&t, 1.0, 0.01, 4000, 30.0).is_err());
        assert!(fourier_check(&t, 1.0, 1.5, 4000, 30.0).is_err());
    }
}
