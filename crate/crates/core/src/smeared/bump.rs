//! Smooth compactly supported test functions.
//!
//! A plain bump is `exp(-1/((u - lo)(hi - u)))` in the local coordinate
//! `u = (σ - a)/(b - a)`. Moment-killing bumps combine up to five such pieces
//! on overlapping sub-supports and solve for weights that make
//! `∫χ = 1` and `∫χ(σ)(σ - a)^m dσ = 0` for each requested `m`.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::quadrature::{panel_edges, GaussLegendre};

pub const COARSE_NODES: usize = 32;
pub const FINE_NODES: usize = 64;
/// Minimum panels per gap between consecutive seams or breakpoints.
pub const PANELS_PER_GAP: usize = 8;
/// Residual moment tolerance after the linear solve.
pub const MOMENT_TOLERANCE: f64 = 1e-12;

const SUB_WIDTH: f64 = 0.6;
const SUB_STARTS: [f64; 5] = [0.0, 0.1, 0.2, 0.3, 0.4];
const MAX_PLACEMENTS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
struct Piece {
    weight: f64,
    lo: f64,
    hi: f64,
}

impl Piece {
    /// `(φ, φ', φ'')` in the local coordinate.
    fn jet(&self, u: f64) -> [f64; 3] {
        if u <= self.lo || u >= self.hi {
            return [0.0; 3];
        }
        let q = (u - self.lo) * (self.hi - u);
        let dq = self.hi + self.lo - 2.0 * u;
        let phi = (-1.0 / q).exp();
        let dg = dq / (q * q);
        let ddg = -2.0 / (q * q) - 2.0 * dq * dq / (q * q * q);
        [phi, phi * dg, phi * (ddg + dg * dg)]
    }
}

/// `χ(σ)` with support `(a, b)`; `∫χ = 1`.
#[derive(Debug, Clone, Serialize)]
pub struct BumpFunction {
    a: f64,
    b: f64,
    pieces: Vec<Piece>,
    moments_killed: Vec<u32>,
    residual_moments: Vec<(u32, f64)>,
    placements_tried: usize,
}

/// Sup norms of `χ`, `χ'`, `χ''`; enough to rebuild integration-by-parts
/// tail bounds by hand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BumpNorms {
    pub sup: f64,
    pub sup_d1: f64,
    pub sup_d2: f64,
}

pub fn make_bump(a: f64, b: f64, moments_to_kill: &[u32]) -> Result<BumpFunction> {
    if !(a >= 0.0 && b > a && b.is_finite()) {
        return Err(domain(format!("bump support needs 0 <= a < b, got ({a}, {b})")));
    }
    let mut kill: Vec<u32> = moments_to_kill.to_vec();
    kill.sort_unstable();
    kill.dedup();
    if kill.iter().any(|&m| !(1..=4).contains(&m)) {
        return Err(domain(format!("moments to kill must lie in 1..=4, got {kill:?}")));
    }
    if kill.is_empty() {
        let mut bump = BumpFunction {
            a,
            b,
            pieces: vec![Piece {
                weight: 1.0,
                lo: 0.0,
                hi: 1.0,
            }],
            moments_killed: kill,
            residual_moments: Vec::new(),
            placements_tried: 1,
        };
        let mass = bump.integrate(&[], |_| 1.0).value;
        bump.pieces[0].weight = 1.0 / mass;
        return Ok(bump);
    }
    for attempt in 0..MAX_PLACEMENTS {
        let pieces = placement(kill.len() + 1, attempt);
        if let Some(weights) = solve_weights(&pieces, &kill) {
            let pieces = pieces
                .iter()
                .zip(weights)
                .map(|(p, w)| Piece { weight: w, ..*p })
                .collect();
            let mut bump = BumpFunction {
                a,
                b,
                pieces,
                moments_killed: kill.clone(),
                residual_moments: Vec::new(),
                placements_tried: attempt + 1,
            };
            bump.residual_moments = kill
                .iter()
                .map(|&m| (m, bump.integrate(&[], |s| ((s - a) / (b - a)).powi(m as i32)).value))
                .collect();
            if bump.residual_moments.iter().all(|(_, r)| r.abs() <= MOMENT_TOLERANCE) {
                return Ok(bump);
            }
            log::debug!("placement {attempt} left moments {:?}", bump.residual_moments);
        }
    }
    Err(Error::SingularMoments {
        attempts: MAX_PLACEMENTS,
    })
}

fn placement(count: usize, attempt: usize) -> Vec<Piece> {
    let jitter = 0.013 * attempt as f64;
    let width = SUB_WIDTH - 0.02 * attempt as f64;
    SUB_STARTS[..count]
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let lo = (s + jitter * (i as f64 - 2.0) / 2.0).max(0.0);
            Piece {
                weight: 0.0,
                lo,
                hi: (lo + width).min(1.0),
            }
        })
        .collect()
}

/// Solves `Σ_i w_i ∫φ_i u^m du = [m = 0]` over `m ∈ {0} ∪ kill`.
fn solve_weights(pieces: &[Piece], kill: &[u32]) -> Option<Vec<f64>> {
    let rule = GaussLegendre::<f64>::new(FINE_NODES);
    let orders: Vec<u32> = std::iter::once(0).chain(kill.iter().copied()).collect();
    let n = pieces.len();
    let mut m = vec![vec![0.0; n + 1]; n];
    for (i, p) in pieces.iter().enumerate() {
        let edges = panel_edges(p.lo, p.hi, &[], 4 * PANELS_PER_GAP);
        for (r, &k) in orders.iter().enumerate() {
            m[r][i] = rule.integrate_panels(&edges, |u| p.jet(u)[0] * u.powi(k as i32));
        }
    }
    m[0][n] = 1.0;
    gaussian_elimination(m)
}

fn gaussian_elimination(mut m: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let n = m.len();
    let scale = m.iter().flat_map(|r| r[..n].iter()).fold(0.0f64, |acc, x| acc.max(x.abs()));
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() <= 1e-13 * scale {
            return None;
        }
        m.swap(col, pivot);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for c in col..=n {
                m[row][c] -= f * m[col][c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|c| m[row][c] * x[c]).sum();
        x[row] = (m[row][n] - s) / m[row][row];
    }
    Some(x)
}

/// Result of pairing a bump with a function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quadrature {
    /// Fine-rule value.
    pub value: f64,
    /// `|fine - coarse|`.
    pub error_estimate: f64,
}

impl BumpFunction {
    pub fn support(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn moments_killed(&self) -> &[u32] {
        &self.moments_killed
    }

    /// `∫χ(σ)((σ - a)/(b - a))^m dσ` for each killed `m`, after the solve.
    pub fn residual_moments(&self) -> &[(u32, f64)] {
        &self.residual_moments
    }

    pub fn placements_tried(&self) -> usize {
        self.placements_tried
    }

    fn local(&self, sigma: f64) -> f64 {
        (sigma - self.a) / (self.b - self.a)
    }

    pub fn eval(&self, sigma: f64) -> f64 {
        self.jet(sigma)[0]
    }

    /// `(χ, χ', χ'')` at `σ`.
    pub fn jet(&self, sigma: f64) -> [f64; 3] {
        let u = self.local(sigma);
        let h = self.b - self.a;
        let mut out = [0.0; 3];
        for p in &self.pieces {
            let j = p.jet(u);
            for d in 0..3 {
                out[d] += p.weight * j[d];
            }
        }
        [out[0] / h, out[1] / (h * h), out[2] / (h * h * h)]
    }

    /// `Σ w_i φ_i(u)`, the density of `χ` against `du`.
    fn local_density(&self, u: f64) -> f64 {
        self.pieces.iter().map(|p| p.weight * p.jet(u)[0]).sum()
    }

    /// Support endpoints and the sub-support seams, in `σ`.
    pub fn seams(&self) -> Vec<f64> {
        let h = self.b - self.a;
        self.local_seams().into_iter().map(|u| self.a + u * h).collect()
    }

    fn local_seams(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.pieces.iter().flat_map(|p| [p.lo, p.hi]).chain([0.0, 1.0]).collect();
        s.sort_by(|x, y| x.total_cmp(y));
        s.dedup();
        s
    }

    /// Panel edges in the local coordinate. Working in `u` keeps the node
    /// placement exact relative to the seams however far the support sits
    /// from the origin.
    fn local_panels(&self, breaks: &[f64], max_panel: f64) -> Vec<f64> {
        let h = self.b - self.a;
        let mut cuts = self.local_seams();
        cuts.extend(
            breaks
                .iter()
                .filter(|&&x| x > self.a && x < self.b)
                .map(|&x| self.local(x)),
        );
        cuts.sort_by(|x, y| x.total_cmp(y));
        cuts.dedup();
        let max_local = max_panel / h;
        let mut edges = vec![0.0];
        for w in cuts.windows(2) {
            let len = w[1] - w[0];
            let pieces = PANELS_PER_GAP.max((len / max_local).ceil() as usize);
            for i in 1..=pieces {
                edges.push(if i == pieces { w[1] } else { w[0] + len * i as f64 / pieces as f64 });
            }
        }
        edges
    }

    /// Panel edges over the support, cut at the seams and at `breaks`, with
    /// each panel no longer than `max_panel`.
    pub fn panels(&self, breaks: &[f64], max_panel: f64) -> Vec<f64> {
        let h = self.b - self.a;
        self.local_panels(breaks, max_panel).into_iter().map(|u| self.a + u * h).collect()
    }

    /// `∫χ f` with panels split at the seams and at `breaks`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, breaks: &[f64], mut f: F) -> Quadrature {
        let edges = self.local_panels(breaks, f64::INFINITY);
        let h = self.b - self.a;
        let coarse = GaussLegendre::<f64>::new(COARSE_NODES);
        let fine = GaussLegendre::<f64>::new(FINE_NODES);
        let c = coarse.integrate_panels(&edges, |u| self.local_density(u) * f(self.a + u * h));
        let v = fine.integrate_panels(&edges, |u| self.local_density(u) * f(self.a + u * h));
        Quadrature {
            value: v,
            error_estimate: (v - c).abs(),
        }
    }

    /// Nodes and `weight · χ(node)` for both rules on panels fine enough for
    /// oscillations up to angular frequency `omega_max`.
    pub fn weighted_nodes(&self, omega_max: f64) -> [Vec<(f64, f64)>; 2] {
        let max_panel = if omega_max > 0.0 { 8.0 / omega_max } else { f64::INFINITY };
        let edges = self.local_panels(&[], max_panel);
        let h = self.b - self.a;
        [COARSE_NODES, FINE_NODES].map(|n| {
            let rule = GaussLegendre::<f64>::new(n);
            edges
                .windows(2)
                .flat_map(|w| {
                    rule.mapped(w[0], w[1])
                        .map(|(u, wt)| (self.a + u * h, wt * self.local_density(u)))
                        .collect::<Vec<_>>()
                })
                .collect()
        })
    }

    pub fn norms(&self) -> BumpNorms {
        let samples = 4000;
        let mut n = BumpNorms {
            sup: 0.0,
            sup_d1: 0.0,
            sup_d2: 0.0,
        };
        for i in 1..samples {
            let x = self.a + (self.b - self.a) * i as f64 / samples as f64;
            let j = self.jet(x);
            n.sup = n.sup.max(j[0].abs());
            n.sup_d1 = n.sup_d1.max(j[1].abs());
            n.sup_d2 = n.sup_d2.max(j[2].abs());
        }
        n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_bump_is_normalized() {
        let b = make_bump(0.0, 1.0, &[]).unwrap();
        assert!((b.integrate(&[], |_| 1.0).value - 1.0).abs() < 1e-12);
        assert_eq!(b.eval(0.0), 0.0);
        assert_eq!(b.eval(1.0), 0.0);
        assert!(b.eval(0.5) > 0.0);
    }

    #[test]
    fn moment_killing_bump() {
        let b = make_bump(0.0, 1.0, &[1, 2, 3, 4]).unwrap();
        assert!((b.integrate(&[], |_| 1.0).value - 1.0).abs() < 1e-12);
        for m in 1..=4 {
            let q = b.integrate(&[], |s| s.powi(m));
            assert!(q.value.abs() <= 1e-12, "m={m}: {:e}", q.value);
            assert!(q.error_estimate <= 1e-12);
        }
    }

    #[test]
    fn moments_are_about_the_left_end() {
        let (a, bb) = (2f64.sqrt(), 3f64.sqrt());
        let b = make_bump(a, bb, &[1, 2]).unwrap();
        assert!(b.integrate(&[], |s| s - a).value.abs() < 1e-13);
        assert!(b.integrate(&[], |s| (s - a).powi(2)).value.abs() < 1e-13);
        assert_eq!(b.eval(a), 0.0);
        assert_eq!(b.eval(bb), 0.0);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let b = make_bump(0.5, 1.5, &[1, 2, 3, 4]).unwrap();
        let h = 1e-5;
        for &x in &[0.7, 0.95, 1.2] {
            let j = b.jet(x);
            let d1 = (b.eval(x + h) - b.eval(x - h)) / (2.0 * h);
            let d2 = (b.eval(x + h) - 2.0 * j[0] + b.eval(x - h)) / (h * h);
            assert!((j[1] - d1).abs() < 1e-5 * (1.0 + d1.abs()));
            assert!((j[2] - d2).abs() < 1e-3 * (1.0 + d2.abs()));
        }
        let n = b.norms();
        assert!(n.sup > 0.0 && n.sup_d1 > n.sup && n.sup_d2 > 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(make_bump(1.0, 1.0, &[]).is_err());
        assert!(make_bump(-0.5, 1.0, &[]).is_err());
        assert!(make_bump(0.0, 1.0, &[5]).is_err());
        assert!(make_bump(0.0, 1.0, &[0]).is_err());
    }

    #[test]
    fn panels_respect_breaks_and_frequency() {
        let b = make_bump(0.5, 1.5, &[]).unwrap();
        let e = b.panels(&[1.0, 2.0], 0.01);
        assert!(e.contains(&1.0));
        assert!(e.windows(2).all(|w| w[1] > w[0] && w[1] - w[0] <= 0.01 + 1e-15));
        assert_eq!(*e.first().unwrap(), 0.5);
        assert_eq!(*e.last().unwrap(), 1.5);
    }
}
