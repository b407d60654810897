//! The constants `C_j = 2(j+2) (2π)^{-j-3} (-1)^{j/2} Z(2 + j/2)` for even
//! `j`, where `Z(s) = Σ_{v ≠ 0} |v|^{-2s} = Σ_{n>=1} r_3(n) n^{-s}` is the
//! Epstein zeta function of the cubic lattice. `C_j = 0` for odd `j`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::radial_counts::{build_table, RadialCountTable};
use crate::series::tail::power_tail;
use crate::summation::{deterministic_sum, NeumaierSum};

/// Smallest Ewald target accepted.
pub const MIN_EWALD_TARGET: f64 = 1e-14;
/// Default Gaussian split for Ewald summation.
pub const DEFAULT_SPLIT: f64 = 1.0;
/// Shells available to the Ewald sums; far more than any target needs.
const EWALD_SHELLS: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SumMethod {
    Direct,
    Ewald,
}

impl fmt::Display for SumMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Direct => "direct",
            Self::Ewald => "ewald",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeSumConstant {
    pub j: u32,
    pub value: f64,
    pub bound: f64,
    pub method: SumMethod,
}

impl LatticeSumConstant {
    pub fn interval(&self) -> (f64, f64) {
        (self.value - self.bound, self.value + self.bound)
    }

    pub fn contains(&self, x: f64) -> bool {
        (x - self.value).abs() <= self.bound
    }
}

fn check_even(j: u32) -> Result<()> {
    if j % 2 == 1 {
        Err(Error::OddIndex(j))
    } else {
        Ok(())
    }
}

/// `2(j+2) (2π)^{-j-3} (-1)^{j/2}`.
pub fn prefactor(j: u32) -> Result<f64> {
    check_even(j)?;
    let sign = if j % 4 == 0 { 1.0 } else { -1.0 };
    Ok(sign * 2.0 * (j as f64 + 2.0) * (2.0 * PI).powi(-(j as i32) - 3))
}

/// Exponent `s = 2 + j/2` of the lattice sum behind `C_j`.
pub fn exponent(j: u32) -> f64 {
    2.0 + j as f64 / 2.0
}

/// `C_j` from the partial sum over `1 <= n <= n_terms`; the bound covers the
/// whole (positive) tail plus rounding.
pub fn c_constant_direct(table: &RadialCountTable, j: u32, n_terms: u64) -> Result<LatticeSumConstant> {
    let pref = prefactor(j)?;
    if n_terms == 0 {
        return Err(domain("direct sum needs at least one term"));
    }
    table.check_shell(n_terms)?;
    let s = exponent(j);
    let counts = table.counts();
    let report = deterministic_sum(1..n_terms as usize + 1, |n| {
        let r = counts[n];
        if r == 0 {
            0.0
        } else {
            r as f64 * (n as f64).powf(-s)
        }
    });
    let tail = power_tail(table, n_terms, s)?;
    let fp = 6.0 * f64::EPSILON * report.abs_sums[0];
    Ok(LatticeSumConstant {
        j,
        value: pref * report.sums[0],
        bound: pref.abs() * (tail.upper() + fp),
        method: SumMethod::Direct,
    })
}

pub fn c_constant_ewald(j: u32, precision_target: f64) -> Result<LatticeSumConstant> {
    c_constant_ewald_with_split(j, precision_target, DEFAULT_SPLIT)
}

/// `C_j` through the Ewald splitting of `Z(s)` at Gaussian parameter `t`:
///
/// `Z(s) Γ(s) / π^s = Σ' (π|v|²)^{-s} Γ(s, π t |v|²)
///                  + Σ' (π|w|²)^{s-3/2} Γ(3/2 - s, π|w|²/t)
///                  + t^{s-3/2}/(s - 3/2) - t^s/s`.
pub fn c_constant_ewald_with_split(j: u32, precision_target: f64, t: f64) -> Result<LatticeSumConstant> {
    let pref = prefactor(j)?;
    if precision_target.is_nan() || precision_target < MIN_EWALD_TARGET {
        return Err(Error::UnreachableTarget(precision_target));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(domain(format!("Ewald split must be positive, got {t}")));
    }
    let z = epstein_zeta_ewald(exponent(j) as u32, t, precision_target)?;
    Ok(LatticeSumConstant {
        j,
        value: pref * z,
        bound: precision_target,
        method: SumMethod::Ewald,
    })
}

fn shell_table() -> &'static RadialCountTable {
    use std::sync::OnceLock;
    static TABLE: OnceLock<RadialCountTable> = OnceLock::new();
    TABLE.get_or_init(|| build_table(3, EWALD_SHELLS).expect("small table"))
}

/// `Z(s) = Σ_{v ≠ 0} |v|^{-2s}` for integer `s >= 2`.
pub fn epstein_zeta_ewald(s: u32, t: f64, target: f64) -> Result<f64> {
    if s < 2 {
        return Err(domain("Ewald sums are implemented for integer s >= 2"));
    }
    let table = shell_table();
    let sf = s as f64;
    let scale = PI.powf(sf) / gamma_integer(s);
    let a = 1.5 - sf;
    let cut = target / 10.0;
    let mut acc = NeumaierSum::new();
    let mut direct_done = false;
    let mut dual_done = false;
    for n in 1..=table.max_n() {
        let nf = n as f64;
        let x = PI * nf;
        // Majorant of the remaining shells: average shell weight 2π sqrt(n), padded.
        let weight = 20.0 * PI * nf.sqrt();
        let f_direct = x.powf(-sf) * upper_gamma_integer(s, t * x);
        let f_dual = x.powf(-a) * upper_gamma_half(a, x / t);
        direct_done |= scale * f_direct * weight < cut;
        dual_done |= scale * f_dual * weight < cut;
        let r = table.r(n) as f64;
        if r > 0.0 {
            if !direct_done {
                acc.add(r * f_direct);
            }
            if !dual_done {
                acc.add(r * f_dual);
            }
        }
        if direct_done && dual_done {
            acc.add(t.powf(sf - 1.5) / (sf - 1.5));
            acc.add(-t.powf(sf) / sf);
            return Ok(scale * acc.value());
        }
    }
    Err(Error::UnreachableTarget(target))
}

/// `Γ(s)` for positive integer `s`.
fn gamma_integer(s: u32) -> f64 {
    (1..s).map(f64::from).product()
}

/// `Γ(s, x) = (s-1)! e^{-x} Σ_{k<s} x^k / k!` for positive integer `s`.
pub fn upper_gamma_integer(s: u32, x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 0..s {
        if k > 0 {
            term *= x / k as f64;
        }
        sum += term;
    }
    gamma_integer(s) * (-x).exp() * sum
}

/// `Γ(a, x)` for half-integer `a <= 1/2`, from `Γ(1/2, x) = sqrt(π) erfc(sqrt(x))`
/// and `Γ(a, x) = (Γ(a+1, x) - x^a e^{-x}) / a`.
pub fn upper_gamma_half(a: f64, x: f64) -> f64 {
    let mut g = PI.sqrt() * libm::erfc(x.sqrt());
    let mut b = 0.5;
    while b > a + 0.25 {
        b -= 1.0;
        g = (g - x.powf(b) * (-x).exp()) / b;
    }
    g
}

/// Both printed forms of the prefactor, `(2j+4)(2π)^{-j-3}` with the sign
/// `+` for `j ≡ 0 (mod 4)` and `-` for `j ≡ 2 (mod 4)`, and
/// `2(j+2)(2π)^{-j-3}(-1)^{j/2}`, agree as integer multiples of the same power
/// of `2π`.
pub fn c_consistency_check(j: u32) -> Result<bool> {
    check_even(j)?;
    let first = (2 * j as i64 + 4) * if j % 4 == 0 { 1 } else { -1 };
    let second = 2 * (j as i64 + 2) * if (j / 2) % 2 == 0 { 1 } else { -1 };
    Ok(first == second)
}

/// Even-index constants keyed by `j`.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ConstantSet {
    entries: BTreeMap<u32, LatticeSumConstant>,
}

impl ConstantSet {
    /// Ewald values for every even `j <= max_j`.
    pub fn ewald(max_j: u32, target: f64) -> Result<Self> {
        let mut set = Self::default();
        for j in (0..=max_j).step_by(2) {
            set.insert(c_constant_ewald(j, target)?);
        }
        Ok(set)
    }

    /// Direct partial sums for every even `j <= max_j`.
    pub fn direct(table: &RadialCountTable, max_j: u32, n_terms: u64) -> Result<Self> {
        let mut set = Self::default();
        for j in (0..=max_j).step_by(2) {
            set.insert(c_constant_direct(table, j, n_terms)?);
        }
        Ok(set)
    }

    pub fn insert(&mut self, c: LatticeSumConstant) {
        self.entries.insert(c.j, c);
    }

    pub fn get(&self, j: u32) -> Result<&LatticeSumConstant> {
        check_even(j)?;
        self.entries
            .get(&j)
            .ok_or_else(|| domain(format!("constant C_{j} was not computed")))
    }

    pub fn iter(&self) -> impl Iterator<Item = &LatticeSumConstant> {
        self.entries.values()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefactor_signs_and_c0_identity() {
        assert!(prefactor(0).unwrap() > 0.0);
        assert!(prefactor(2).unwrap() < 0.0);
        assert!(prefactor(4).unwrap() > 0.0);
        assert!(matches!(prefactor(1), Err(Error::OddIndex(1))));
        // 4 (2π)^{-3} = 1 / (2π³)
        assert!((prefactor(0).unwrap() - 1.0 / (2.0 * PI.powi(3))).abs() < 1e-17);
        for j in [0, 2, 4, 6, 10] {
            assert!(c_consistency_check(j).unwrap());
        }
        assert!(c_consistency_check(3).is_err());
    }

    #[test]
    fn incomplete_gamma_closed_forms() {
        // Γ(2, x) = (1 + x) e^{-x}
        assert!((upper_gamma_integer(2, 1.5) - 2.5 * (-1.5f64).exp()).abs() < 1e-16);
        // Γ(-1/2, x) = 2 (x^{-1/2} e^{-x} - Γ(1/2, x))
        let x = 0.8f64;
        let half = PI.sqrt() * libm::erfc(x.sqrt());
        let want = 2.0 * (x.powf(-0.5) * (-x).exp() - half);
        assert!((upper_gamma_half(-0.5, x) - want).abs() < 1e-15);
        // Γ(a, x) → Γ(a) - ... not needed; check the recurrence against quadrature.
        let rule = crate::quadrature::GaussLegendre::<f64>::new(64);
        for &(a, x) in &[(-1.5, 0.7), (-2.5, 2.0), (0.5, 0.3)] {
            let edges: Vec<f64> = (0..=200).map(|i| x + 60.0 * i as f64 / 200.0).collect();
            let q = rule.integrate_panels(&edges, |u: f64| u.powf(a - 1.0) * (-u).exp());
            assert!((upper_gamma_half(a, x) - q).abs() < 1e-12 * q.abs().max(1.0), "a={a} x={x}");
        }
    }

    #[test]
    fn ewald_values_are_split_independent() {
        for s in [2u32, 3, 4] {
            let base = epstein_zeta_ewald(s, 1.0, 1e-13).unwrap();
            for t in [0.5, 2.0] {
                let other = epstein_zeta_ewald(s, t, 1e-13).unwrap();
                assert!((base - other).abs() < 1e-12, "s={s} t={t}: {base} vs {other}");
            }
        }
        let z2 = epstein_zeta_ewald(2, 1.0, 1e-13).unwrap();
        assert!((z2 - 16.5323).abs() < 1e-4);
        let z3 = epstein_zeta_ewald(3, 1.0, 1e-13).unwrap();
        assert!((z3 - 8.40192).abs() < 1e-5);
        // Three-shell lower bound 6 + 12/4 + 8/9.
        assert!(z2 > 6.0 + 3.0 + 8.0 / 9.0);
    }

    #[test]
    fn direct_interval_contains_ewald() {
        let t = build_table(3, 100_000).unwrap();
        for (j, n) in [(0u32, 100_000u64), (2, 10_000), (4, 10_000)] {
            let d = c_constant_direct(&t, j, n).unwrap();
            let e = c_constant_ewald(j, 1e-12).unwrap();
            assert!(d.contains(e.value), "j={j}: {d:?} vs {e:?}");
        }
        let d2 = c_constant_direct(&t, 2, 10_000).unwrap();
        assert!(d2.bound <= 1e-5 * d2.value.abs());
    }

    #[test]
    fn direct_bound_decays_at_the_tail_rate() {
        let t = build_table(3, 20_000).unwrap();
        let a = c_constant_direct(&t, 2, 10_000).unwrap().bound;
        let b = c_constant_direct(&t, 2, 20_000).unwrap().bound;
        assert!(b / a <= 2f64.powf(-1.5) + 0.05);
    }

    #[test]
    fn rejects_bad_requests() {
        let t = build_table(3, 100).unwrap();
        assert!(matches!(c_constant_direct(&t, 3, 10), Err(Error::OddIndex(3))));
        assert!(c_constant_direct(&t, 2, 101).is_err());
        assert!(matches!(c_constant_ewald(0, 1e-15), Err(Error::UnreachableTarget(_))));
        assert!(c_constant_ewald_with_split(0, 1e-9, 0.0).is_err());
        let set = ConstantSet::ewald(4, 1e-12).unwrap();
        assert!(set.get(2).is_ok());
        assert!(set.get(6).is_err());
        assert!(matches!(set.get(1), Err(Error::OddIndex(1))));
    }
}
