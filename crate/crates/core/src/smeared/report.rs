//! The verdict record shared by every pairing check.

use num_complex::Complex64;
use serde::Serialize;

/// Values a pairing can produce.
pub trait PairValue: Copy + Serialize + std::fmt::Debug {
    fn distance(self, other: Self) -> f64;
    fn magnitude(self) -> f64;
}

impl PairValue for f64 {
    fn distance(self, other: Self) -> f64 {
        (self - other).abs()
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl PairValue for Complex64 {
    fn distance(self, other: Self) -> f64 {
        (self - other).norm()
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// How the series tail bound was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailStatus {
    /// Last two partial sums agree to rounding.
    Converged,
    /// Successive differences shrink by `ratio` per doubling of `N`.
    Geometric { ratio: f64 },
    NonConvergent,
    /// Certified analytically.
    Rigorous,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairingReport<V> {
    pub lhs: V,
    pub rhs: V,
    /// Bound on the series truncation of `rhs`.
    pub rhs_bound: f64,
    /// Bound on any truncation of `lhs` (zero when `lhs` is exact).
    pub lhs_bound: f64,
    pub quadrature_estimate: f64,
    pub n_terms: u64,
    pub tail: TailStatus,
    pub scale: f64,
    pub slack: f64,
    pub discrepancy: f64,
    /// `discrepancy / scale`.
    pub relative_discrepancy: f64,
    /// Allowed minus observed discrepancy; negative on failure.
    pub margin: f64,
    pub verdict: Verdict,
    /// Partial sums of `rhs` at `N/4`, `N/2`, `N`.
    pub checkpoints: Vec<(u64, V)>,
    pub bump_norms: Option<crate::smeared::bump::BumpNorms>,
}

impl<V: PairValue> PairingReport<V> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        lhs: V,
        rhs: V,
        rhs_bound: f64,
        lhs_bound: f64,
        quadrature_estimate: f64,
        n_terms: u64,
        tail: TailStatus,
        checkpoints: Vec<(u64, V)>,
        bump_norms: Option<crate::smeared::bump::BumpNorms>,
        scale: f64,
    ) -> Self {
        let scale = if scale > 0.0 { scale } else { 1.0 };
        let slack = crate::smeared::pairing::SLACK * scale;
        let discrepancy = lhs.distance(rhs);
        let allowed = rhs_bound + lhs_bound + quadrature_estimate + slack;
        let margin = allowed - discrepancy;
        Self {
            lhs,
            rhs,
            rhs_bound,
            lhs_bound,
            quadrature_estimate,
            n_terms,
            tail,
            scale,
            slack,
            discrepancy,
            relative_discrepancy: discrepancy / scale,
            margin,
            verdict: if margin >= 0.0 { Verdict::Pass } else { Verdict::Fail },
            checkpoints,
            bump_norms,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}
