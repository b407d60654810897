//! Certified tails `T(N, s) = Σ_{n>N} r_3(n) n^{-s}` for `s > 3/2`.
//!
//! Abel summation against `A(x) = Σ_{n<=x} r_3(n)` gives
//! `T = -A(N) N^{-s} + s ∫_N^∞ A(x) x^{-s-1} dx`. Writing `A = V + E` with
//! `V(x) = (4π/3) x^{3/2}`, the `V` part integrates in closed form and the
//! cube-covering sandwich `|E(x)| <= (4π/3)(3c x + 3c² x^{1/2} + c³)`,
//! `c = sqrt(3)/2`, bounds the rest.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{domain, Result};
use crate::radial_counts::RadialCountTable;

/// Half the diagonal of the unit cube.
pub const CUBE_HALF_DIAGONAL: f64 = 0.866_025_403_784_438_6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailBound {
    pub estimate: f64,
    /// Rigorous bound on `|T - estimate|`.
    pub error: f64,
}

impl TailBound {
    pub fn upper(&self) -> f64 {
        self.estimate + self.error
    }

    pub fn lower(&self) -> f64 {
        (self.estimate - self.error).max(0.0)
    }
}

/// `(4π/3)(sqrt(x) - c)³ <= A(x) <= (4π/3)(sqrt(x) + c)³`, the lower side
/// valid for `sqrt(x) >= c`.
pub fn gauss_sandwich(x: f64) -> (f64, f64) {
    let r = x.sqrt();
    let v = 4.0 * PI / 3.0;
    let lo = if r >= CUBE_HALF_DIAGONAL {
        v * (r - CUBE_HALF_DIAGONAL).powi(3)
    } else {
        0.0
    };
    (lo, v * (r + CUBE_HALF_DIAGONAL).powi(3))
}

/// `T(N, s)` with a rigorous error. Needs `N >= 1`, `N <= table.max_n()`.
pub fn power_tail(table: &RadialCountTable, n: u64, s: f64) -> Result<TailBound> {
    if table.dim() != 3 {
        return Err(domain("tails are defined for the three-dimensional table"));
    }
    if !(s > 1.5) {
        return Err(domain(format!("tail exponent s = {s} must exceed 3/2")));
    }
    if n == 0 {
        return Err(domain("tail cut N must be at least 1"));
    }
    table.check_shell(n)?;
    let nf = n as f64;
    let c = CUBE_HALF_DIAGONAL;
    let volume = 4.0 * PI / 3.0 * nf.powf(1.5);
    let a = table.cumulative_at(n) as f64;
    let estimate = (volume - a) * nf.powf(-s) + 2.0 * PI * nf.powf(1.5 - s) / (s - 1.5);
    let error = 4.0 * PI / 3.0
        * s
        * (3.0 * c * nf.powf(1.0 - s) / (s - 1.0)
            + 3.0 * c * c * nf.powf(0.5 - s) / (s - 0.5)
            + c.powi(3) * nf.powf(-s) / s);
    // A few ulps for the closed forms themselves.
    let fp = 16.0 * f64::EPSILON * (estimate.abs() + error + volume * nf.powf(-s));
    Ok(TailBound {
        estimate,
        error: error + fp,
    })
}
