//! Gauss–Legendre rules on explicit panels.

use crate::scalar::Scalar;
use crate::summation::NeumaierSum;

#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> GaussLegendre<T> {
    /// Builds the `n`-point rule on `[-1, 1]` by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let nf = n as f64;
        let half = n.div_ceil(2);
        for i in 0..half {
            // Work in f64 for the iteration, then narrow.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = T::lit(-x);
            nodes[n - 1 - i] = T::lit(x);
            weights[i] = T::lit(w);
            weights[n - 1 - i] = T::lit(w);
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = (b - a) / T::lit(2.0);
        let mid = (a + b) / T::lit(2.0);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        let mut acc = NeumaierSum::new();
        for (x, w) in self.mapped(a, b) {
            acc.add(w * f(x));
        }
        acc.value()
    }

    /// Sums the rule over consecutive panels `[edges[i], edges[i+1]]`.
    pub fn integrate_panels<F: FnMut(T) -> T>(&self, edges: &[T], mut f: F) -> T {
        let mut acc = NeumaierSum::new();
        for w in edges.windows(2) {
            if w[1] > w[0] {
                acc.add(self.integrate(w[0], w[1], &mut f));
            }
        }
        acc.value()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Sorted, deduplicated panel edges covering `[a, b]` that include every
/// breakpoint strictly inside the interval, each resulting gap further cut
/// into `subdivisions` equal pieces.
pub fn panel_edges(a: f64, b: f64, breakpoints: &[f64], subdivisions: usize) -> Vec<f64> {
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&x| x > a && x < b)
        .collect();
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(|x, y| x.total_cmp(y));
    cuts.dedup();
    let m = subdivisions.max(1);
    let mut edges = Vec::with_capacity(cuts.len() * m);
    for w in cuts.windows(2) {
        let h = (w[1] - w[0]) / m as f64;
        for j in 0..m {
            edges.push(w[0] + h * j as f64);
        }
    }
    edges.push(b);
    edges
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weights_sum_to_two_and_nodes_are_symmetric() {
        for n in [1, 2, 5, 32, 64] {
            let rule = GaussLegendre::<f64>::new(n);
            let s: f64 = rule.weights.iter().sum();
            assert_relative_eq!(s, 2.0, epsilon = 1e-14);
            for i in 0..n {
                assert_relative_eq!(rule.nodes[i], -rule.nodes[n - 1 - i], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        let rule = GaussLegendre::<f64>::new(8);
        for deg in 0..16 {
            let got = rule.integrate(0.0, 1.0, |x| x.powi(deg));
            assert_relative_eq!(got, 1.0 / (deg as f64 + 1.0), epsilon = 1e-14);
        }
    }

    #[test]
    fn single_precision_rule() {
        let rule = GaussLegendre::<f32>::new(16);
        let got = rule.integrate(0.0, std::f32::consts::PI, |x| x.sin());
        assert!((got - 2.0).abs() < 1e-5);
    }

    #[test]
    fn panel_edges_include_interior_breaks_only() {
        let e = panel_edges(1.0, 2.0, &[0.5, 1.5, 2.0, 1.5], 2);
        assert_eq!(e, vec![1.0, 1.25, 1.5, 1.75, 2.0]);
    }
}
