//! Bessel functions of the orders the lattice series need.
//!
//! Half-integer orders are elementary. `J_0` and `J_1` use the ascending
//! series up to [`SERIES_SEAM`] and the Hankel expansion beyond it. Near the
//! seam the series terms reach `1e9` while the sum is `O(0.1)`, so the series
//! is accumulated in double-word arithmetic.

use crate::error::{domain, Result};
use crate::scalar::Scalar;
use crate::summation::TwoFloat;

pub const SERIES_SEAM: f64 = 25.0;
pub const SERIES_TERMS: usize = 60;
pub const HANKEL_TERMS: usize = 8;

/// `J_{two_nu/2}(z)` for `two_nu ∈ {-1, 1, 3, 5}` and `z > 0`.
pub fn bessel_half<T: Scalar>(two_nu: i32, z: T) -> Result<T> {
    if !(z > T::zero()) {
        return Err(domain("half-integer Bessel functions need z > 0"));
    }
    let root = (T::lit(2.0) / (T::PI() * z)).sqrt();
    let (s, c) = z.sin_cos();
    let j_half = root * s;
    let j_three_halves = root * (s / z - c);
    match two_nu {
        -1 => Ok(root * c),
        1 => Ok(j_half),
        3 => Ok(j_three_halves),
        5 => Ok(T::lit(3.0) / z * j_three_halves - j_half),
        _ => Err(domain(format!("order {two_nu}/2 is not one of -1/2, 1/2, 3/2, 5/2"))),
    }
}

/// `J_{two_nu/2}(z)` for every order used by the smeared identities:
/// integer orders 0 and 1, and the half-integer orders above.
pub fn bessel_j<T: Scalar>(two_nu: i32, z: T) -> Result<T> {
    match two_nu {
        0 => Ok(bessel_j0(z)),
        2 => Ok(bessel_j1(z)),
        _ => bessel_half(two_nu, z),
    }
}

pub fn bessel_j0<T: Scalar>(z: T) -> T {
    let z = z.abs();
    if z <= T::lit(SERIES_SEAM) {
        ascending_series(0, z)
    } else {
        hankel(0, z)
    }
}

/// `J_1` is odd; negative arguments are reflected.
pub fn bessel_j1<T: Scalar>(z: T) -> T {
    let a = z.abs();
    let v = if a <= T::lit(SERIES_SEAM) {
        ascending_series(1, a)
    } else {
        hankel(1, a)
    };
    if z < T::zero() {
        -v
    } else {
        v
    }
}

/// `Σ_m (-1)^m (z/2)^{2m+n} / (m! (m+n)!)` over [`SERIES_TERMS`] terms.
pub fn ascending_series<T: Scalar>(n: u32, z: T) -> T {
    let half = TwoFloat::from_float(z).div_float(T::lit(2.0));
    let q = half.mul(half).neg();
    let mut term = TwoFloat::from_float(T::one());
    for i in 1..=n {
        term = term.mul(half).div_float(T::lit(i as f64));
    }
    let mut sum = TwoFloat::zero();
    for m in 0..SERIES_TERMS {
        sum = sum.add(term);
        let mf = m as f64;
        term = term.mul(q).div_float(T::lit((mf + 1.0) * (mf + 1.0 + n as f64)));
    }
    sum.to_float()
}

/// Hankel's expansion `sqrt(2/(πz)) (P cos χ - Q sin χ)` with
/// [`HANKEL_TERMS`] terms in each of `P` and `Q`.
pub fn hankel<T: Scalar>(n: u32, z: T) -> T {
    let mu = T::lit(4.0 * (n * n) as f64);
    let chi = z - (T::lit(n as f64) / T::lit(2.0) + T::lit(0.25)) * T::PI();
    let mut p = T::zero();
    let mut q = T::zero();
    // a_k / z^k with a_k = Π_{j<=k} (mu - (2j-1)^2) / (k! 8^k).
    let mut a = T::one();
    for k in 0..2 * HANKEL_TERMS {
        let sign = if (k / 2) % 2 == 0 { T::one() } else { -T::one() };
        if k % 2 == 0 {
            p = p + sign * a;
        } else {
            q = q + sign * a;
        }
        let odd = T::lit((2 * k + 1) as f64);
        a = a * (mu - odd * odd) / (T::lit(8.0 * (k + 1) as f64) * z);
    }
    let (s, c) = chi.sin_cos();
    (T::lit(2.0) / (T::PI() * z)).sqrt() * (p * c - q * s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::bessel_ascending;
    use crate::quadrature::GaussLegendre;
    use std::f64::consts::PI;

    #[test]
    fn half_integer_examples() {
        assert!(bessel_half::<f64>(1, PI).unwrap().abs() < 1e-14);
        let j32: f64 = bessel_half(3, PI).unwrap();
        assert!((j32 - 2f64.sqrt() / PI).abs() < 1e-14);
        let oracle = bessel_ascending(3, PI, 30);
        assert!((j32 - oracle).abs() < 1e-14);
        let j12: f64 = bessel_half(1, 1.0).unwrap();
        assert!((j12 - 0.6713967071418031).abs() < 1e-15);
        assert!((j12 - bessel_ascending(1, 1.0, 30)).abs() < 1e-15);
    }

    #[test]
    fn half_integer_orders_match_series() {
        for two_nu in [-1, 1, 3, 5] {
            for &z in &[0.1, 0.7, 2.0, 5.5, 9.0] {
                let a: f64 = bessel_half(two_nu, z).unwrap();
                let b = bessel_ascending(two_nu, z, 60);
                assert!((a - b).abs() < 1e-13, "two_nu={two_nu} z={z}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn half_integer_rejects_bad_input() {
        assert!(bessel_half(1, 0.0).is_err());
        assert!(bessel_half(1, -1.0).is_err());
        assert!(bessel_half(7, 1.0).is_err());
    }

    #[test]
    fn integer_orders_match_series_oracle() {
        assert_eq!(bessel_j1(0.0f64), 0.0);
        assert_eq!(bessel_j0(0.0f64), 1.0);
        for &z in &[0.5, 1.0, 3.7, 10.0] {
            assert!((bessel_j0::<f64>(z) - bessel_ascending(0, z, 80)).abs() < 1e-12);
            assert!((bessel_j1::<f64>(z) - bessel_ascending(2, z, 80)).abs() < 1e-12);
        }
        assert!((bessel_j1(1.0f64) - 0.44005058574493355).abs() < 1e-15);
        assert!((bessel_j1(10.0f64) - 0.04347274616886144).abs() < 1e-14);
        assert!((bessel_j0(10.0f64) + 0.2459357644513483).abs() < 1e-14);
    }

    #[test]
    fn series_and_hankel_agree_across_the_seam() {
        let mut z = 22.0;
        while z <= 32.0 {
            for n in [0, 1] {
                let s: f64 = ascending_series(n, z);
                let h: f64 = hankel(n, z);
                let scale = (2.0 / (PI * z)).sqrt();
                assert!((s - h).abs() <= 1e-10 * scale, "n={n} z={z}: {s} vs {h}");
            }
            z += 0.173;
        }
        for z in [SERIES_SEAM - 1e-9, SERIES_SEAM, SERIES_SEAM + 1e-9] {
            let s: f64 = ascending_series(1, z);
            let h: f64 = hankel(1, z);
            assert!((s - h).abs() <= 1e-9 * s.abs());
        }
    }

    #[test]
    fn integral_of_j1_is_one_minus_j0() {
        let rule = GaussLegendre::<f64>::new(32);
        for &x in &[3.0, 20.0, 40.0] {
            let edges: Vec<f64> = (0..=80).map(|i| x * i as f64 / 80.0).collect();
            let got = rule.integrate_panels(&edges, bessel_j1);
            assert!((got - (1.0 - bessel_j0(x))).abs() < 1e-11, "x={x}");
        }
    }

    #[test]
    fn single_precision_kernels() {
        let a: f32 = bessel_j1(3.0f32);
        assert!((a as f64 - bessel_j1(3.0f64)).abs() < 1e-5);
        let b: f32 = bessel_half(3, 2.0f32).unwrap();
        assert!((b as f64 - bessel_half(3, 2.0f64).unwrap()).abs() < 1e-6);
    }
}
