//! Trigonometric coefficients of the iterated antiderivatives of
//! `Σ cos Σ - sin Σ`, and the polynomials `Q_k` left behind by them.
//!
//! If `f = α Σ cos Σ + β Σ sin Σ + γ cos Σ + δ sin Σ`, then `∫_0^Σ f` has the
//! same shape with `(α, β, γ, δ) ↦ M (α, β, γ, δ)` plus the constant
//! `δ - α`. Everything here is exact integer or rational arithmetic.

use std::fmt::{self, Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{domain, Result};

pub const MAX_QUADRUPLE_ORDER: u64 = 1_000_000;
pub const MAX_Q_ORDER: u32 = 64;

/// Integer types the coefficient matrices can be computed in.
pub trait ExactInt: Clone + Num + Signed + Debug + Display {}
impl<I: Clone + Num + Signed + Debug + Display> ExactInt for I {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mat4<I>(pub [[I; 4]; 4]);

impl<I: ExactInt> Mat4<I> {
    pub fn identity() -> Self {
        Self(std::array::from_fn(|i| {
            std::array::from_fn(|j| if i == j { I::one() } else { I::zero() })
        }))
    }

    fn from_i64(rows: [[i64; 4]; 4]) -> Self {
        Self(rows.map(|r| r.map(int)))
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self(std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                (0..4).fold(I::zero(), |acc, l| acc + self.0[i][l].clone() * o.0[l][j].clone())
            })
        }))
    }

    pub fn apply(&self, v: &[I; 4]) -> [I; 4] {
        std::array::from_fn(|i| (0..4).fold(I::zero(), |acc, l| acc + self.0[i][l].clone() * v[l].clone()))
    }

    /// `self^k` by binary powering.
    pub fn pow(&self, mut k: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::identity();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        acc
    }

    /// `self^k` by `k` successive multiplications.
    pub fn pow_repeated(&self, k: u64) -> Self {
        (0..k).fold(Self::identity(), |acc, _| acc.mul(self))
    }
}

fn int<I: ExactInt>(x: i64) -> I {
    I::from_str_radix(&x.to_string(), 10).unwrap_or_else(|_| unreachable!("every i64 literal parses"))
}

/// The step matrix: nonzero entries `m12 = -1, m21 = 1, m31 = 1, m34 = -1,
/// m42 = 1, m43 = 1`.
pub fn step_matrix<I: ExactInt>() -> Mat4<I> {
    Mat4::from_i64([[0, -1, 0, 0], [1, 0, 0, 0], [1, 0, 0, -1], [0, 1, 1, 0]])
}

/// `(Re i^k, Im i^k)`.
pub fn i_power(k: u64) -> (i64, i64) {
    match k % 4 {
        0 => (1, 0),
        1 => (0, 1),
        2 => (-1, 0),
        _ => (0, -1),
    }
}

/// `M^k` from its block form `[[J^k, 0], [k J^{k-1}, J^k]]`, where `J` is the
/// quarter-turn `[[0, -1], [1, 0]]`.
pub fn block_power<I: ExactInt>(k: u64) -> Mat4<I> {
    let (c, s) = i_power(k);
    let (c1, s1) = if k == 0 { (0, 0) } else { i_power(k - 1) };
    let kk = k as i64;
    Mat4::from_i64([
        [c, -s, 0, 0],
        [s, c, 0, 0],
        [kk * c1, -kk * s1, c, -s],
        [kk * s1, kk * c1, s, c],
    ])
}

/// `(α_k, β_k, γ_k, δ_k)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoefficientQuadruple<I> {
    pub k: u64,
    pub alpha: I,
    pub beta: I,
    pub gamma: I,
    pub delta: I,
}

impl<I: ExactInt> CoefficientQuadruple<I> {
    pub fn from_array(k: u64, v: [I; 4]) -> Self {
        let [alpha, beta, gamma, delta] = v;
        Self {
            k,
            alpha,
            beta,
            gamma,
            delta,
        }
    }

    pub fn to_array(&self) -> [I; 4] {
        [
            self.alpha.clone(),
            self.beta.clone(),
            self.gamma.clone(),
            self.delta.clone(),
        ]
    }
}

impl<I: ExactInt> Display for CoefficientQuadruple<I> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.alpha, self.beta, self.gamma, self.delta)
    }
}

pub fn initial_quadruple<I: ExactInt>() -> [I; 4] {
    [I::one(), I::zero(), I::zero(), -I::one()]
}

/// `M^k (1, 0, 0, -1)` in the integer type `I`.
pub fn quadruple_in<I: ExactInt>(k: u64) -> CoefficientQuadruple<I> {
    let v = step_matrix::<I>().pow(k).apply(&initial_quadruple());
    CoefficientQuadruple::from_array(k, v)
}

/// `M^k (1, 0, 0, -1)` for `k <= MAX_QUADRUPLE_ORDER`.
pub fn quadruple(k: u64) -> Result<CoefficientQuadruple<i64>> {
    if k > MAX_QUADRUPLE_ORDER {
        return Err(domain(format!("k = {k} exceeds {MAX_QUADRUPLE_ORDER}")));
    }
    Ok(quadruple_in(k))
}

/// The quadruple read off the block form of `M^k`.
pub fn quadruple_from_blocks(k: u64) -> CoefficientQuadruple<i64> {
    CoefficientQuadruple::from_array(k, block_power::<i64>(k).apply(&initial_quadruple()))
}

/// `(Re i^k, s·Im i^k, (k+1) Im i^k, -(k+1) Re i^k)`.
fn closed_form(k: u64, beta_sign: i64) -> CoefficientQuadruple<i64> {
    let (re, im) = i_power(k);
    let k1 = k as i64 + 1;
    CoefficientQuadruple::from_array(k, [re, beta_sign * im, k1 * im, -k1 * re])
}

/// Closed form consistent with the recursion (`β_k = Im i^k`).
pub fn closed_form_quadruple(k: u64) -> CoefficientQuadruple<i64> {
    closed_form(k, 1)
}

/// The widely printed closed form with `β_k = -Im i^k`. It disagrees with the
/// recursion at every odd `k` and exists only for regression tests.
pub fn printed_closed_form(k: u64) -> CoefficientQuadruple<i64> {
    closed_form(k, -1)
}

/// Where the series pipeline takes its trigonometric coefficients from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum CoefficientSource {
    #[default]
    Recursion,
    PrintedClosedForm,
}

impl CoefficientSource {
    pub fn quadruple(self, k: u64) -> Result<CoefficientQuadruple<i64>> {
        match self {
            Self::Recursion => quadruple(k),
            Self::PrintedClosedForm => Ok(printed_closed_form(k)),
        }
    }
}

/// `Q_k(Σ) = Σ_j coeffs[j] Σ^j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QPolynomial {
    pub k: u32,
    pub coeffs: Vec<BigRational>,
}

impl QPolynomial {
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c.to_f64().unwrap_or(f64::NAN))
    }

    pub fn coefficient(&self, j: usize) -> BigRational {
        self.coeffs.get(j).cloned().unwrap_or_else(BigRational::zero)
    }

    fn trimmed(mut self) -> Self {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        self
    }
}

impl Display for QPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match j {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})·Σ")?,
                _ => write!(f, "({c})·Σ^{j}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

fn check_q_order(k: u32) -> Result<()> {
    if k > MAX_Q_ORDER {
        Err(domain(format!("k = {k} exceeds {MAX_Q_ORDER}")))
    } else {
        Ok(())
    }
}

fn factorial_big(j: u32) -> BigInt {
    (1..=j).fold(BigInt::from(1), |acc, i| acc * BigInt::from(i))
}

/// `[Q_k]_j = (k - j + 1) Im[i^{k-j+2}] / j!` for `j < k`.
pub fn q_polynomial(k: u32) -> Result<QPolynomial> {
    check_q_order(k)?;
    let coeffs = (0..k)
        .map(|j| {
            let (_, im) = i_power((k - j + 2) as u64);
            let num = BigInt::from((k - j + 1) as i64 * im);
            BigRational::new(num, factorial_big(j))
        })
        .collect();
    Ok(QPolynomial { k, coeffs }.trimmed())
}

/// `Q_k = ∫_0^Σ Q_{k-1} + (δ_{k-1} - α_{k-1})`, starting from `Q_0 = 0`.
pub fn q_polynomial_by_recursion(k: u32) -> Result<QPolynomial> {
    check_q_order(k)?;
    let mut coeffs: Vec<BigRational> = Vec::new();
    let mut quad = quadruple_in::<BigInt>(0);
    for step in 1..=k {
        let mut next = vec![BigRational::from_integer(&quad.delta - &quad.alpha)];
        for (j, c) in coeffs.iter().enumerate() {
            next.push(c / BigInt::from(j as u64 + 1));
        }
        coeffs = next;
        quad = CoefficientQuadruple::from_array(step as u64, step_matrix::<BigInt>().apply(&quad.to_array()));
    }
    Ok(QPolynomial { k, coeffs }.trimmed())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{iterated_seed_integral, TrigPolynomial};
    use num_traits::One;

    fn q(k: u64, v: [i64; 4]) -> CoefficientQuadruple<i64> {
        CoefficientQuadruple::from_array(k, v)
    }

    #[test]
    fn quadruple_examples() {
        assert_eq!(quadruple(0).unwrap(), q(0, [1, 0, 0, -1]));
        assert_eq!(quadruple(1).unwrap(), q(1, [0, 1, 2, 0]));
        assert_eq!(quadruple(2).unwrap(), q(2, [-1, 0, 0, 3]));
        assert_eq!(quadruple(3).unwrap(), q(3, [0, -1, -4, 0]));
        assert_eq!(quadruple(4).unwrap(), q(4, [1, 0, 0, -5]));
        assert!(quadruple(MAX_QUADRUPLE_ORDER + 1).is_err());
        let big = quadruple(MAX_QUADRUPLE_ORDER).unwrap();
        assert_eq!(big, closed_form_quadruple(MAX_QUADRUPLE_ORDER));
    }

    #[test]
    fn printed_beta_disagrees_exactly_at_odd_k() {
        for k in 0..64 {
            let rec = quadruple(k).unwrap();
            let printed = printed_closed_form(k);
            assert_eq!(rec.alpha, printed.alpha);
            assert_eq!(rec.gamma, printed.gamma);
            assert_eq!(rec.delta, printed.delta);
            assert_eq!(rec.beta == printed.beta, k % 2 == 0, "k={k}");
        }
    }

    #[test]
    fn block_form_and_closed_form_match_recursion() {
        let m = step_matrix::<i64>();
        for k in 0..=64 {
            assert_eq!(m.pow(k), block_power(k), "k={k}");
            assert_eq!(m.pow_repeated(k), block_power(k), "k={k}");
            assert_eq!(quadruple(k).unwrap(), closed_form_quadruple(k));
            assert_eq!(quadruple_from_blocks(k), closed_form_quadruple(k));
        }
        let big: Mat4<BigInt> = step_matrix::<BigInt>().pow(40);
        assert_eq!(big, block_power::<BigInt>(40));
    }

    #[test]
    fn quadruples_and_q_match_symbolic_integration() {
        for k in 0..=8u64 {
            let f = iterated_seed_integral(k as usize);
            let c = |v: &[BigRational], p| TrigPolynomial::coefficient(v, p);
            let quad = quadruple(k).unwrap();
            let r = |x: i64| BigRational::from_integer(BigInt::from(x));
            // Trig part only involves powers 0 and 1.
            assert_eq!(c(&f.cos, 1), r(quad.alpha));
            assert_eq!(c(&f.sin, 1), r(quad.beta));
            assert_eq!(c(&f.cos, 0), r(quad.gamma));
            assert_eq!(c(&f.sin, 0), r(quad.delta));
            assert!(f.cos.len() <= 2 && f.sin.len() <= 2);
            let qp = q_polynomial(k as u32).unwrap();
            assert_eq!(f.poly.len(), qp.coeffs.len(), "k={k}");
            for (j, v) in f.poly.iter().enumerate() {
                assert_eq!(v, &qp.coefficient(j), "k={k} j={j}");
            }
        }
    }

    #[test]
    fn q_examples_and_recursion() {
        assert!(q_polynomial(0).unwrap().coeffs.is_empty());
        let q1 = q_polynomial(1).unwrap();
        assert_eq!(q1.coeffs, vec![BigRational::from_integer(BigInt::from(-2))]);
        let q2 = q_polynomial(2).unwrap();
        assert!(q2.coefficient(0).is_zero());
        assert_eq!(q2.coefficient(1), BigRational::from_integer(BigInt::from(-2)));
        for k in 0..=MAX_Q_ORDER {
            assert_eq!(q_polynomial(k).unwrap(), q_polynomial_by_recursion(k).unwrap(), "k={k}");
        }
        assert!(q_polynomial(MAX_Q_ORDER + 1).is_err());
    }

    #[test]
    fn q_constant_term() {
        for k in 1..40u32 {
            let (_, im) = i_power(k as u64);
            let c0 = q_polynomial(k).unwrap().coefficient(0);
            assert_eq!(c0, BigRational::from_integer(BigInt::from(-(k as i64 + 1) * im)));
            assert!(c0.is_zero() || c0.denom().is_one());
        }
    }

    #[test]
    fn display_forms() {
        assert_eq!(quadruple(1).unwrap().to_string(), "(0, 1, 2, 0)");
        assert_eq!(q_polynomial(0).unwrap().to_string(), "0");
        assert_eq!(q_polynomial(2).unwrap().to_string(), "(-2)·Σ");
    }
}
