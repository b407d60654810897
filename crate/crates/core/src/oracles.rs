//! Independent reference implementations.
//!
//! Nothing here shares code with the production paths it checks: counts come
//! from direct enumeration, antiderivatives from integration by parts over
//! exact rationals, Bessel values from the ascending series. The suite runner
//! and the test targets both use these.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `r_d(n)` for `n <= max_n` by looping over the cube `|a_i| <= sqrt(max_n)`.
pub fn brute_force_counts(dim: u8, max_n: u64) -> Vec<u64> {
    let m = max_n.isqrt() as i64;
    let mut counts = vec![0u64; max_n as usize + 1];
    let range = || -m..=m;
    match dim {
        1 => {
            for a in range() {
                counts[(a * a) as usize] += 1;
            }
        }
        2 => {
            for a in range() {
                for b in range() {
                    let n = (a * a + b * b) as u64;
                    if n <= max_n {
                        counts[n as usize] += 1;
                    }
                }
            }
        }
        3 => {
            for a in range() {
                for b in range() {
                    let ab = a * a + b * b;
                    if ab as u64 > max_n {
                        continue;
                    }
                    for c in range() {
                        let n = (ab + c * c) as u64;
                        if n <= max_n {
                            counts[n as usize] += 1;
                        }
                    }
                }
            }
        }
        d => panic!("no brute-force oracle for dimension {d}"),
    }
    counts
}

/// `#{v ∈ Z³ : |v|² <= n}` by direct ball enumeration.
pub fn brute_force_ball(n: u64) -> u64 {
    let m = n.isqrt() as i64;
    let mut total = 0u64;
    for a in -m..=m {
        for b in -m..=m {
            for c in -m..=m {
                if ((a * a + b * b + c * c) as u64) <= n {
                    total += 1;
                }
            }
        }
    }
    total
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `Σ_p poly[p] x^p + Σ_p cos[p] x^p cos x + Σ_p sin[p] x^p sin x`
/// with exact rational coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPolynomial {
    pub poly: Vec<BigRational>,
    pub cos: Vec<BigRational>,
    pub sin: Vec<BigRational>,
}

impl TrigPolynomial {
    pub fn zero() -> Self {
        Self {
            poly: Vec::new(),
            cos: Vec::new(),
            sin: Vec::new(),
        }
    }

    /// `x cos x - sin x`, the starting function of the iterated integrals.
    pub fn seed() -> Self {
        let mut t = Self::zero();
        set(&mut t.cos, 1, rat(1));
        set(&mut t.sin, 0, rat(-1));
        t
    }

    pub fn coefficient(v: &[BigRational], p: usize) -> BigRational {
        v.get(p).cloned().unwrap_or_else(BigRational::zero)
    }

    fn add_scaled(&mut self, other: &Self, s: &BigRational) {
        for (p, c) in other.poly.iter().enumerate() {
            let cur = Self::coefficient(&self.poly, p);
            set(&mut self.poly, p, cur + c * s);
        }
        for (p, c) in other.cos.iter().enumerate() {
            let cur = Self::coefficient(&self.cos, p);
            set(&mut self.cos, p, cur + c * s);
        }
        for (p, c) in other.sin.iter().enumerate() {
            let cur = Self::coefficient(&self.sin, p);
            set(&mut self.sin, p, cur + c * s);
        }
    }

    /// `∫_0^x f`, built term by term from integration by parts.
    pub fn integrate_from_zero(&self) -> Self {
        let mut out = Self::zero();
        for (p, c) in self.poly.iter().enumerate() {
            if !c.is_zero() {
                let cur = Self::coefficient(&out.poly, p + 1);
                set(&mut out.poly, p + 1, cur + c / rat(p as i64 + 1));
            }
        }
        for (p, c) in self.cos.iter().enumerate() {
            if !c.is_zero() {
                out.add_scaled(&antiderivative(true, p), c);
            }
        }
        for (p, c) in self.sin.iter().enumerate() {
            if !c.is_zero() {
                out.add_scaled(&antiderivative(false, p), c);
            }
        }
        // Fix the constant so the result vanishes at 0 (cos 0 = 1).
        let at_zero = Self::coefficient(&out.cos, 0) + Self::coefficient(&out.poly, 0);
        let c0 = Self::coefficient(&out.poly, 0) - at_zero;
        set(&mut out.poly, 0, c0);
        out.trim();
        out
    }

    fn trim(&mut self) {
        for v in [&mut self.poly, &mut self.cos, &mut self.sin] {
            while v.last().is_some_and(|c| c.is_zero()) {
                v.pop();
            }
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let horner = |v: &[BigRational]| {
            v.iter()
                .rev()
                .fold(0.0, |acc, c| acc * x + c.to_f64().unwrap_or(f64::NAN))
        };
        horner(&self.poly) + horner(&self.cos) * x.cos() + horner(&self.sin) * x.sin()
    }
}

fn set(v: &mut Vec<BigRational>, p: usize, c: BigRational) {
    if v.len() <= p {
        v.resize(p + 1, BigRational::zero());
    }
    v[p] = c;
}

/// Indefinite antiderivative of `x^p cos x` (`cos_kind`) or `x^p sin x`.
fn antiderivative(cos_kind: bool, p: usize) -> TrigPolynomial {
    let mut out = TrigPolynomial::zero();
    if cos_kind {
        // ∫ x^p cos = x^p sin - p ∫ x^{p-1} sin
        set(&mut out.sin, p, rat(1));
        if p > 0 {
            out.add_scaled(&antiderivative(false, p - 1), &rat(-(p as i64)));
        }
    } else {
        // ∫ x^p sin = -x^p cos + p ∫ x^{p-1} cos
        set(&mut out.cos, p, rat(-1));
        if p > 0 {
            out.add_scaled(&antiderivative(true, p - 1), &rat(p as i64));
        }
    }
    out
}

/// The `k`-fold iterated integral of `x cos x - sin x`.
pub fn iterated_seed_integral(k: usize) -> TrigPolynomial {
    let mut f = TrigPolynomial::seed();
    for _ in 0..k {
        f = f.integrate_from_zero();
    }
    f
}

/// Reads a coefficient as an exact integer, if it is one.
pub fn as_integer(c: &BigRational) -> Option<i64> {
    if c.denom().is_one() {
        c.numer().to_i64()
    } else {
        None
    }
}

/// Ascending series `J_ν(z) = Σ_m (-1)^m (z/2)^{2m+ν} / (m! Γ(m+ν+1))` for
/// `ν = two_nu/2`, `two_nu >= -1`, accumulated in plain `f64`.
pub fn bessel_ascending(two_nu: i32, z: f64, terms: usize) -> f64 {
    assert!(two_nu >= -1, "series oracle only covers two_nu >= -1");
    let nu = two_nu as f64 / 2.0;
    let gamma_nu_plus_1 = gamma_half_integer(two_nu + 2);
    let half = z / 2.0;
    let mut term = half.powf(nu) / gamma_nu_plus_1;
    let mut sum = 0.0;
    let mut comp = 0.0;
    for m in 0..terms {
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        let mf = m as f64;
        term *= -half * half / ((mf + 1.0) * (mf + nu + 1.0));
        if term.abs() < 1e-300 {
            break;
        }
    }
    sum
}

/// `Γ(two_x / 2)` for positive integer `two_x`.
pub fn gamma_half_integer(two_x: i32) -> f64 {
    assert!(two_x >= 1);
    if two_x % 2 == 0 {
        (1..two_x / 2).map(|k| k as f64).product()
    } else {
        let mut g = std::f64::consts::PI.sqrt();
        let mut x = 0.5;
        while (2.0 * x) as i32 != two_x {
            g *= x;
            x += 1.0;
        }
        g
    }
}

/// Exact sign helper for readability in tests.
pub fn sign_of(c: &BigRational) -> i32 {
    if c.is_positive() {
        1
    } else if c.is_negative() {
        -1
    } else {
        0
    }
}
