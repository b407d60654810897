//! Bessel closed forms, the coefficient recursion, certified tails and the
//! oscillatory remainder `o_k`.

pub mod bessel;
pub mod coefficients;
pub mod remainder;
pub mod tail;

use serde::Serialize;

pub use bessel::{bessel_half, bessel_j, bessel_j0, bessel_j1};
pub use coefficients::{
    block_power, closed_form_quadruple, printed_closed_form, q_polynomial, q_polynomial_by_recursion,
    quadruple, CoefficientQuadruple, CoefficientSource, QPolynomial,
};
pub use remainder::{leading_coefficient, main_terms, OscillatorySeries};
pub use tail::{power_tail, TailBound};

/// A value and a rigorous bound on its distance from the quantity it
/// approximates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundedValue<T> {
    pub value: T,
    pub bound: T,
    pub terms_used: u64,
}

impl<T: crate::Scalar> BoundedValue<T> {
    pub fn contains(&self, x: T) -> bool {
        (x - self.value).abs() <= self.bound
    }
}
