//! Representation numbers `r_d(n)` and the exact counting functions `N_d`.
//!
//! `r_d(n)` counts integer vectors of squared length `n` in dimension `d`;
//! these are the jump weights of `N_d(Σ) = #{v : |v| <= Σ}` at `Σ = sqrt(n)`.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `max_n` a table may be built for.
pub const MAX_TABLE_N: u64 = 100_000_000;

/// Output chunk for the parallel sieve; the merge is per-index so any split
/// gives identical integers.
const SIEVE_CHUNK: usize = 1 << 15;

/// Denominator cap used when a floating radius has to be made exact.
pub const FLOAT_RADIUS_DENOMINATOR: u64 = 1_000_000;

/// A radius stored through its exact rational square `Σ² = p/q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SqrtRadius {
    p: u64,
    q: u64,
}

impl SqrtRadius {
    pub fn new(p: u64, q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::Domain("zero denominator in radius".into()));
        }
        let g = p.gcd(&q);
        let g = if g == 0 { 1 } else { g };
        Ok(Self { p: p / g, q: q / g })
    }

    pub fn from_integer_square(n: u64) -> Self {
        Self { p: n, q: 1 }
    }

    /// Rounds `sigma²` to a rational with denominator [`FLOAT_RADIUS_DENOMINATOR`].
    /// The result may land on the other side of a lattice shell than the
    /// floating input did, so a warning is logged whenever this path is used.
    pub fn from_f64(sigma: f64) -> Result<Self> {
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::Domain(format!("radius must be finite and >= 0, got {sigma}")));
        }
        let scaled = (sigma * sigma * FLOAT_RADIUS_DENOMINATOR as f64).round();
        if scaled > u64::MAX as f64 / 2.0 {
            return Err(Error::Domain(format!("radius {sigma} too large")));
        }
        log::warn!(
            "floating radius {sigma} converted to the exact square {}/{}",
            scaled as u64,
            FLOAT_RADIUS_DENOMINATOR
        );
        Self::new(scaled as u64, FLOAT_RADIUS_DENOMINATOR)
    }

    pub fn numerator(&self) -> u64 {
        self.p
    }

    pub fn denominator(&self) -> u64 {
        self.q
    }

    /// `⌊Σ²⌋`, the largest shell inside the closed ball.
    pub fn floor_square(&self) -> u64 {
        self.p / self.q
    }

    /// Exact test `sqrt(n) <= Σ`.
    pub fn contains_shell(&self, n: u64) -> bool {
        (n as u128) * (self.q as u128) <= self.p as u128
    }

    pub fn square_f64(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    pub fn to_f64(&self) -> f64 {
        self.square_f64().sqrt()
    }

    /// `Σ² - n` as a float, with the subtraction done in integers.
    pub fn excess_over(&self, n: u64) -> f64 {
        let num = self.p as i128 - (n as i128) * (self.q as i128);
        num as f64 / self.q as f64
    }
}

impl fmt::Display for SqrtRadius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q == 1 {
            write!(f, "{}", self.p)
        } else {
            write!(f, "{}/{}", self.p, self.q)
        }
    }
}

impl FromStr for SqrtRadius {
    type Err = Error;

    /// Accepts `"p/q"` or `"p"`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse {
            what: "rational radius squared",
            input: s.to_string(),
        };
        let s = s.trim();
        match s.split_once('/') {
            Some((p, q)) => {
                let p = p.trim().parse::<u64>().map_err(|_| bad())?;
                let q = q.trim().parse::<u64>().map_err(|_| bad())?;
                Self::new(p, q).map_err(|_| bad())
            }
            None => Ok(Self::from_integer_square(s.parse::<u64>().map_err(|_| bad())?)),
        }
    }
}

/// `r_d(0..=max_n)` together with running totals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RadialCountTable {
    dim: u8,
    counts: Vec<u64>,
    cumulative: Vec<u64>,
}

/// Builds `r_d(n)` for `0 <= n <= max_n`.
///
/// `d = 1` is written down directly, `d = 2` sieves pairs `(a, b)`, and
/// `d = 3` convolves the one- and two-dimensional tables.
pub fn build_table(dim: u8, max_n: u64) -> Result<RadialCountTable> {
    if max_n > MAX_TABLE_N {
        return Err(Error::Capacity {
            requested: max_n,
            limit: MAX_TABLE_N,
        });
    }
    let counts = match dim {
        1 => one_dim(max_n),
        2 => two_dim(max_n),
        3 => three_dim(max_n),
        d => return Err(Error::InvalidDimension(d)),
    };
    Ok(RadialCountTable::from_counts(dim, counts))
}

#[inline]
fn axis_weight(a: u64) -> u64 {
    if a == 0 {
        1
    } else {
        2
    }
}

fn one_dim(max_n: u64) -> Vec<u64> {
    let mut counts = vec![0u64; max_n as usize + 1];
    let mut a = 0u64;
    while a * a <= max_n {
        counts[(a * a) as usize] = axis_weight(a);
        a += 1;
    }
    counts
}

fn two_dim(max_n: u64) -> Vec<u64> {
    let len = max_n as usize + 1;
    let mut counts = vec![0u64; len];
    counts
        .par_chunks_mut(SIEVE_CHUNK)
        .enumerate()
        .for_each(|(c, out)| {
            let lo = (c * SIEVE_CHUNK) as u64;
            let hi = lo + out.len() as u64;
            let mut a = 0u64;
            while a * a < hi {
                let a2 = a * a;
                let mut b = if lo > a2 { ceil_sqrt(lo - a2) } else { 0 };
                while a2 + b * b < hi {
                    out[(a2 + b * b - lo) as usize] += axis_weight(a) * axis_weight(b);
                    b += 1;
                }
                a += 1;
            }
        });
    counts
}

fn three_dim(max_n: u64) -> Vec<u64> {
    let r2 = two_dim(max_n);
    let len = max_n as usize + 1;
    let mut counts = vec![0u64; len];
    counts
        .par_chunks_mut(SIEVE_CHUNK)
        .enumerate()
        .for_each(|(c, out)| {
            let lo = c * SIEVE_CHUNK;
            for (i, slot) in out.iter_mut().enumerate() {
                let n = lo + i;
                let mut acc = 0u64;
                let mut z = 0usize;
                while z * z <= n {
                    acc += axis_weight(z as u64) * r2[n - z * z];
                    z += 1;
                }
                *slot = acc;
            }
        });
    counts
}

fn ceil_sqrt(x: u64) -> u64 {
    let r = x.isqrt();
    if r * r == x {
        r
    } else {
        r + 1
    }
}

impl RadialCountTable {
    fn from_counts(dim: u8, counts: Vec<u64>) -> Self {
        let cumulative = counts
            .iter()
            .scan(0u64, |acc, &c| {
                *acc += c;
                Some(*acc)
            })
            .collect();
        Self {
            dim,
            counts,
            cumulative,
        }
    }

    pub fn dim(&self) -> u8 {
        self.dim
    }

    pub fn max_n(&self) -> u64 {
        self.counts.len() as u64 - 1
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn cumulative(&self) -> &[u64] {
        &self.cumulative
    }

    #[inline]
    pub fn r(&self, n: u64) -> u64 {
        self.counts[n as usize]
    }

    /// `Σ_{m <= n} r_d(m)`, i.e. `N_d(sqrt(n))`.
    #[inline]
    pub fn cumulative_at(&self, n: u64) -> u64 {
        self.cumulative[n as usize]
    }

    pub fn check_shell(&self, n: u64) -> Result<()> {
        if n > self.max_n() {
            Err(Error::OutOfTable {
                needed: n,
                max_n: self.max_n(),
            })
        } else {
            Ok(())
        }
    }

    /// `N_d(Σ)` for an exactly represented radius; the boundary shell is
    /// included iff `n·q <= p`.
    pub fn count_n(&self, sigma: &SqrtRadius) -> Result<u64> {
        let n = sigma.floor_square();
        self.check_shell(n)?;
        Ok(self.cumulative_at(n))
    }

    /// `N_d(Σ)` at a floating radius. Intended for quadrature nodes, which
    /// are never placed on lattice radii.
    pub fn count_at(&self, sigma: f64) -> Result<u64> {
        if sigma < 0.0 {
            return Ok(0);
        }
        let n = floor_square(sigma);
        self.check_shell(n)?;
        Ok(self.cumulative_at(n))
    }
}

/// `⌊Σ²⌋` for a float `Σ >= 0`, corrected against integer squares so that
/// `n <= Σ²` holds in exact arithmetic on the float value.
pub fn floor_square(sigma: f64) -> u64 {
    let s2 = sigma * sigma;
    let mut n = s2.floor().max(0.0) as u64;
    // The float square may round across an integer; settle with sqrt tests.
    while n > 0 && (n as f64).sqrt() > sigma {
        n -= 1;
    }
    while ((n + 1) as f64).sqrt() <= sigma {
        n += 1;
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::brute_force_counts;
    use proptest::prelude::*;

    #[test]
    fn small_tables_match_enumeration_examples() {
        assert_eq!(build_table(3, 0).unwrap().counts(), &[1]);
        assert_eq!(build_table(3, 2).unwrap().counts(), &[1, 6, 12]);
        let t = build_table(3, 7).unwrap();
        assert_eq!(t.r(7), 0);
        assert_eq!(t.r(3), 8);
    }

    #[test]
    fn counting_examples() {
        let t = build_table(3, 10).unwrap();
        assert_eq!(t.count_n(&"0".parse().unwrap()).unwrap(), 1);
        assert_eq!(t.count_n(&"1".parse().unwrap()).unwrap(), 7);
        assert_eq!(t.count_n(&"2".parse().unwrap()).unwrap(), 19);
        // Σ² = 17/9 < 2 excludes the n = 2 shell.
        assert_eq!(t.count_n(&"17/9".parse().unwrap()).unwrap(), 7);
        assert!(matches!(
            t.count_n(&"11".parse().unwrap()),
            Err(Error::OutOfTable { needed: 11, .. })
        ));
    }

    #[test]
    fn one_dimensional_table_marks_squares() {
        let t = build_table(1, 50).unwrap();
        for n in 0..=50u64 {
            let sq = n.isqrt() * n.isqrt() == n;
            let expect = if n == 0 { 1 } else if sq { 2 } else { 0 };
            assert_eq!(t.r(n), expect, "n = {n}");
        }
    }

    #[test]
    fn all_dimensions_match_brute_force() {
        for d in 1..=3u8 {
            let t = build_table(d, 300).unwrap();
            assert_eq!(t.counts(), brute_force_counts(d, 300).as_slice(), "d = {d}");
        }
    }

    #[test]
    fn convolution_consistency_between_dimensions() {
        let max = 2000u64;
        let t1 = build_table(1, max).unwrap();
        let t2 = build_table(2, max).unwrap();
        let t3 = build_table(3, max).unwrap();
        for n in 0..=max {
            let conv: u64 = (0..=n).map(|m| t1.r(m) * t2.r(n - m)).sum();
            assert_eq!(conv, t3.r(n));
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(build_table(4, 10), Err(Error::InvalidDimension(4))));
        assert!(matches!(
            build_table(3, MAX_TABLE_N + 1),
            Err(Error::Capacity { .. })
        ));
        assert!("3/0".parse::<SqrtRadius>().is_err());
        assert!("x".parse::<SqrtRadius>().is_err());
    }

    #[test]
    fn float_radius_conversion_rounds_the_square() {
        let s = SqrtRadius::from_f64(2f64.sqrt()).unwrap();
        assert_eq!((s.numerator(), s.denominator()), (2, 1));
        assert_eq!(SqrtRadius::new(6, 4).unwrap().to_string(), "3/2");
    }

    #[test]
    fn floor_square_is_exact_near_shells() {
        for n in [1u64, 2, 3, 99, 10_000, 123_456_789] {
            let s = (n as f64).sqrt();
            assert_eq!(floor_square(s), n);
            assert_eq!(floor_square(s * (1.0 - 1e-15)), n - 1);
        }
    }

    #[test]
    fn gauss_sandwich_holds() {
        let t = build_table(3, 20_000).unwrap();
        let c = 3f64.sqrt() / 2.0;
        let vol = 4.0 * std::f64::consts::PI / 3.0;
        for x in (3..=20_000u64).step_by(7) {
            let r = (x as f64).sqrt();
            let n = t.cumulative_at(x) as f64;
            assert!(vol * (r - c).powi(3) <= n && n <= vol * (r + c).powi(3), "x = {x}");
        }
    }

    proptest! {
        #[test]
        fn counts_are_even_past_the_origin(n in 1u64..3000) {
            let t = build_table(3, n).unwrap();
            prop_assert_eq!(t.r(n) % 2, 0);
        }

        #[test]
        fn cumulative_nondecreasing(p in 0u64..5000, q in 1u64..50) {
            let t = build_table(3, 5000).unwrap();
            let a = SqrtRadius::new(p, q).unwrap();
            let b = SqrtRadius::new(p + 1, q).unwrap();
            if b.floor_square() <= 5000 {
                prop_assert!(t.count_n(&a).unwrap() <= t.count_n(&b).unwrap());
            }
        }
    }
}
