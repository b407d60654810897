//! Growth of `N_{3,k} - (main terms)` in dyadic windows of `Σ`.
//!
//! For `k = 1` the residual is weighed against `Σ log(2 + Σ)`, for `k >= 2`
//! against `Σ`. The windowed maxima of `|residual| / Σ^{0.9}` are reported
//! as well: if they keep growing, no power saving below the weight is
//! visible. That is evidence, not proof.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::lattice_sums::ConstantSet;
use crate::radial_counts::RadialCountTable;
use crate::series::remainder::main_terms;
use crate::step_calculus::IteratedSweep;

pub const MAX_ASYMPTOTIC_ORDER: u32 = 5;
/// Interior samples per gap between consecutive lattice radii.
pub const GAP_SAMPLES: usize = 4;
pub const SHARPNESS_EXPONENT: f64 = 0.9;
/// Allowed relative change of the weighted maximum between the last two windows.
pub const K1_STABILITY: f64 = 0.5;
pub const HIGHER_K_STABILITY: f64 = 0.25;
/// The last window's sharpness maximum must keep this share of the global one.
pub const RETENTION: f64 = 0.5;
/// Windows start at `Σ >= 1`.
const MIN_WINDOW: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub max_weighted: f64,
    pub argmax: f64,
    pub max_sharpness: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Stable,
    Unstable,
    /// Fewer than two windows.
    Insufficient,
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticsReport {
    pub k: u32,
    pub sigma_max: f64,
    pub grid: String,
    pub points: usize,
    pub weight: &'static str,
    pub max_weighted: f64,
    /// Ascending in `Σ`; each covers `(lo, hi]`.
    pub windows: Vec<Window>,
    /// `last / previous` windowed weighted maximum.
    pub stability_ratio: f64,
    pub stability_tolerance: f64,
    pub verdict: Trend,
    /// `last window / global` maximum of `|residual| / Σ^{0.9}`.
    pub sharpness_retention: f64,
    pub sharpness_nondecreasing: bool,
    pub thresholds: String,
}

impl AsymptoticsReport {
    pub fn stable(&self) -> bool {
        self.verdict == Trend::Stable
    }

    pub fn retains_sharpness(&self) -> bool {
        self.sharpness_retention >= RETENTION
    }
}

fn weight(k: u32, sigma: f64) -> f64 {
    if k == 1 {
        sigma * (2.0 + sigma).ln()
    } else {
        sigma
    }
}

/// Lattice radii, `GAP_SAMPLES` interior points per gap and, for `k = 1`,
/// the points where `N_3 = (4π/3)Σ³` inside a gap. For `k = 1` the residual
/// is extremal only at radii and at those points, so its supremum is exact;
/// the weighted supremum is off by at most the weight's variation over a gap.
fn grid(table: &RadialCountTable, k: u32, sigma_max: f64) -> Vec<f64> {
    let ball = 4.0 * std::f64::consts::PI / 3.0;
    let top = (sigma_max * sigma_max).ceil() as u64;
    let mut pts = Vec::with_capacity(top as usize * (GAP_SAMPLES + 2));
    for n in 0..top {
        let a = (n as f64).sqrt();
        let b = ((n + 1) as f64).sqrt();
        pts.push(a);
        for i in 1..=GAP_SAMPLES {
            pts.push(a + (b - a) * i as f64 / (GAP_SAMPLES + 1) as f64);
        }
        if k == 1 {
            let x = (table.cumulative_at(n) as f64 / ball).cbrt();
            if x > a && x < b {
                pts.push(x);
            }
        }
    }
    pts.extend(dyadic_windows(sigma_max).into_iter().map(|(_, hi)| hi));
    pts.retain(|&x| x <= sigma_max);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

fn dyadic_windows(sigma_max: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut hi = sigma_max;
    while hi / 2.0 >= MIN_WINDOW {
        out.push((hi / 2.0, hi));
        hi /= 2.0;
    }
    out.reverse();
    out
}

pub fn asymptotics_report(
    table: &RadialCountTable,
    k: u32,
    sigma_max: f64,
    constants: &ConstantSet,
) -> Result<AsymptoticsReport> {
    if !(1..=MAX_ASYMPTOTIC_ORDER).contains(&k) {
        return Err(domain(format!("asymptotics reports cover 1 <= k <= {MAX_ASYMPTOTIC_ORDER}, got {k}")));
    }
    if !(sigma_max >= 2.0 * MIN_WINDOW && sigma_max.is_finite()) {
        return Err(domain(format!("sigma_max must be at least 2, got {sigma_max}")));
    }
    table.check_shell((sigma_max * sigma_max).ceil() as u64)?;
    let pts = grid(table, k, sigma_max);
    let mut sweep = IteratedSweep::new(table, k)?;
    let mut windows: Vec<Window> = dyadic_windows(sigma_max)
        .into_iter()
        .map(|(lo, hi)| Window {
            lo,
            hi,
            points: 0,
            max_weighted: 0.0,
            argmax: lo,
            max_sharpness: 0.0,
        })
        .collect();
    let mut max_weighted: f64 = 0.0;
    let mut global_sharpness: f64 = 0.0;
    for &x in &pts {
        let value = sweep.eval(x)?;
        if x < MIN_WINDOW {
            continue;
        }
        let residual = (value - main_terms(k, x, constants)?.value).abs();
        let w = residual / weight(k, x);
        let s = residual / x.powf(SHARPNESS_EXPONENT);
        max_weighted = max_weighted.max(w);
        global_sharpness = global_sharpness.max(s);
        if let Some(win) = windows.iter_mut().find(|win| x > win.lo && x <= win.hi) {
            win.points += 1;
            win.max_sharpness = win.max_sharpness.max(s);
            if w > win.max_weighted {
                win.max_weighted = w;
                win.argmax = x;
            }
        }
    }

    let tolerance = if k == 1 { K1_STABILITY } else { HIGHER_K_STABILITY };
    let n = windows.len();
    let (stability_ratio, verdict) = if n < 2 {
        (f64::NAN, Trend::Insufficient)
    } else {
        let r = windows[n - 1].max_weighted / windows[n - 2].max_weighted;
        let v = if (r - 1.0).abs() <= tolerance { Trend::Stable } else { Trend::Unstable };
        (r, v)
    };
    let tail = &windows[n.saturating_sub(3)..];
    let sharpness_nondecreasing = tail.windows(2).all(|w| w[1].max_sharpness >= w[0].max_sharpness);
    let sharpness_retention = windows.last().map_or(0.0, |w| w.max_sharpness) / global_sharpness;
    Ok(AsymptoticsReport {
        k,
        sigma_max,
        grid: format!(
            "lattice radii up to {sigma_max}, {GAP_SAMPLES} interior points per gap{}",
            if k == 1 { ", zeros of N_3 - (4π/3)Σ³" } else { "" }
        ),
        points: pts.len(),
        weight: if k == 1 { "Σ log(2+Σ)" } else { "Σ" },
        max_weighted,
        windows,
        stability_ratio,
        stability_tolerance: tolerance,
        verdict,
        sharpness_retention,
        sharpness_nondecreasing,
        thresholds: format!(
            "stable iff |last/previous - 1| <= {tolerance}; sharpness retained iff last/global >= {RETENTION}"
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial_counts::build_table;
    use crate::step_calculus::IteratedEvaluator;

    #[test]
    fn windows_are_dyadic_and_cover_the_top() {
        let w = dyadic_windows(100.0);
        assert_eq!(w.last(), Some(&(50.0, 100.0)));
        assert_eq!(w[w.len() - 2], (25.0, 50.0));
        assert!(w[0].0 >= 1.0 && w[0].0 < 2.0);
    }

    #[test]
    fn k1_grid_finds_the_supremum() {
        let t = build_table(3, 2600).unwrap();
        let cs = ConstantSet::ewald(4, 1e-12).unwrap();
        let rep = asymptotics_report(&t, 1, 50.0, &cs).unwrap();
        // A much denser scan must not beat the reported maximum.
        let e = IteratedEvaluator::new(&t).unwrap();
        let mut dense: f64 = 0.0;
        let mut x = 25.0007;
        while x <= 50.0 {
            let r = (e.eval_at(1, x).unwrap() - main_terms(1, x, &cs).unwrap().value).abs();
            dense = dense.max(r / weight(1, x));
            x += 0.0007;
        }
        let last = rep.windows.last().unwrap();
        // The weight changes by ~1e-4 relative across a gap at Σ = 50.
        assert!(dense <= last.max_weighted * (1.0 + 1e-5), "{dense} vs {}", last.max_weighted);
    }

    #[test]
    fn k2_residual_is_bounded_by_sigma() {
        let t = build_table(3, 10_000).unwrap();
        let cs = ConstantSet::ewald(4, 1e-12).unwrap();
        let rep = asymptotics_report(&t, 2, 100.0, &cs).unwrap();
        assert!(rep.max_weighted.is_finite());
        assert!(rep.stable(), "{rep:?}");
    }

    #[test]
    fn rejects_bad_requests() {
        let t = build_table(3, 100).unwrap();
        let cs = ConstantSet::ewald(4, 1e-12).unwrap();
        assert!(asymptotics_report(&t, 0, 5.0, &cs).is_err());
        assert!(asymptotics_report(&t, 6, 5.0, &cs).is_err());
        assert!(asymptotics_report(&t, 1, 20.0, &cs).is_err());
        assert!(asymptotics_report(&t, 1, 1.5, &cs).is_err());
    }
    #[test]
    fn k1_sharpness_probe_does_not_decay() {
        let t = build_table(3, 10_000).unwrap();
        let cs = ConstantSet::ewald(4, 1e-12).unwrap();
        let rep = asymptotics_report(&t, 1, 100.0, &cs).unwrap();
        assert!(rep.max_weighted.is_finite() && rep.max_weighted > 0.0);
        assert!(rep.retains_sharpness(), "{rep:?}");
    }

}
