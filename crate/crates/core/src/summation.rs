//! Compensated accumulation and a fixed-shape parallel reduction.
//!
//! Every long sum in the crate goes through [`deterministic_sum`]: the index
//! range is cut into chunks of [`REDUCTION_CHUNK`] terms, each chunk is summed
//! left to right with Neumaier compensation, and the chunk partials are then
//! folded left to right. The reduction tree depends only on the range, so the
//! result is bit-identical for any rayon pool size.

use std::ops::Range;

use rayon::prelude::*;

use crate::scalar::Scalar;

pub const REDUCTION_CHUNK: usize = 4096;

/// Kahan–Babuška–Neumaier running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum<T> {
    sum: T,
    comp: T,
}

impl<T: Scalar> NeumaierSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            comp: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp = self.comp + ((self.sum - t) + x);
        } else {
            self.comp = self.comp + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    /// Folds another partial in, keeping its compensation term.
    #[inline]
    pub fn merge(&mut self, other: &Self) {
        self.add(other.sum);
        self.add(other.comp);
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.comp
    }
}

impl<T: Scalar> Extend<T> for NeumaierSum<T> {
    fn extend<I: IntoIterator<Item = T>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

impl<T: Scalar> FromIterator<T> for NeumaierSum<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut s = Self::new();
        s.extend(iter);
        s
    }
}

/// Compensated sum of an iterator, in iteration order.
pub fn compensated_sum<T: Scalar, I: IntoIterator<Item = T>>(iter: I) -> T {
    iter.into_iter().collect::<NeumaierSum<T>>().value()
}

/// Result of a multi-lane deterministic reduction.
#[derive(Debug, Clone, Copy)]
pub struct SumReport<T, const W: usize> {
    pub sums: [T; W],
    /// Sum of absolute values per lane; feeds floating-point error budgets.
    pub abs_sums: [T; W],
    pub terms: usize,
}

/// Sums `W` lanes of `term(i)` over `range` with the fixed chunked tree.
pub fn deterministic_sum_lanes<T, F, const W: usize>(range: Range<usize>, term: F) -> SumReport<T, W>
where
    T: Scalar,
    F: Fn(usize) -> [T; W] + Sync,
{
    let start = range.start;
    let len = range.end.saturating_sub(range.start);
    let n_chunks = len.div_ceil(REDUCTION_CHUNK);
    let partials: Vec<([NeumaierSum<T>; W], [NeumaierSum<T>; W])> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let lo = start + c * REDUCTION_CHUNK;
            let hi = (lo + REDUCTION_CHUNK).min(start + len);
            let mut acc = [NeumaierSum::new(); W];
            let mut abs = [NeumaierSum::new(); W];
            for i in lo..hi {
                let t = term(i);
                for w in 0..W {
                    acc[w].add(t[w]);
                    abs[w].add(t[w].abs());
                }
            }
            (acc, abs)
        })
        .collect();

    let mut acc = [NeumaierSum::new(); W];
    let mut abs = [NeumaierSum::new(); W];
    for (a, b) in &partials {
        for w in 0..W {
            acc[w].merge(&a[w]);
            abs[w].merge(&b[w]);
        }
    }
    SumReport {
        sums: acc.map(|s| s.value()),
        abs_sums: abs.map(|s| s.value()),
        terms: len,
    }
}

/// Single-lane convenience wrapper around [`deterministic_sum_lanes`].
pub fn deterministic_sum<T, F>(range: Range<usize>, term: F) -> SumReport<T, 1>
where
    T: Scalar,
    F: Fn(usize) -> T + Sync,
{
    deterministic_sum_lanes(range, |i| [term(i)])
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2` (double-word arithmetic).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoFloat<T> {
    pub hi: T,
    pub lo: T,
}

#[inline]
fn two_sum<T: Scalar>(a: T, b: T) -> (T, T) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum<T: Scalar>(a: T, b: T) -> (T, T) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod<T: Scalar>(a: T, b: T) -> (T, T) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl<T: Scalar> TwoFloat<T> {
    pub fn from_float(x: T) -> Self {
        Self { hi: x, lo: T::zero() }
    }

    pub fn zero() -> Self {
        Self::from_float(T::zero())
    }

    #[inline]
    pub fn to_float(self) -> T {
        self.hi + self.lo
    }

    #[inline]
    pub fn add(self, o: Self) -> Self {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Self { hi, lo }
    }

    #[inline]
    pub fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    #[inline]
    pub fn sub(self, o: Self) -> Self {
        self.add(o.neg())
    }

    #[inline]
    pub fn mul(self, o: Self) -> Self {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }

    #[inline]
    pub fn mul_float(self, b: T) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p, e + self.lo * b);
        Self { hi, lo }
    }

    #[inline]
    pub fn div_float(self, b: T) -> Self {
        let q = self.hi / b;
        let (p, e) = two_prod(q, b);
        let r = ((self.hi - p) - e + self.lo) / b;
        let (hi, lo) = quick_two_sum(q, r);
        Self { hi, lo }
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= T::zero() {
            return Self::zero();
        }
        let x = self.hi.sqrt();
        let (p, e) = two_prod(x, x);
        let corr = ((self.hi - p) - e + self.lo) / (x + x);
        let (hi, lo) = quick_two_sum(x, corr);
        Self { hi, lo }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn neumaier_recovers_cancelled_terms() {
        let xs = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(xs.iter().copied().sum::<f64>(), 0.0);
        assert_eq!(compensated_sum(xs), 2.0);
    }

    #[test]
    fn f32_lane_matches_f64_reference() {
        let n = 20_000;
        let r32 = deterministic_sum::<f32, _>(0..n, |i| 1.0 / (1.0 + i as f32));
        let r64 = deterministic_sum::<f64, _>(0..n, |i| 1.0 / (1.0 + i as f64));
        assert!((r32.sums[0] as f64 - r64.sums[0]).abs() < 1e-5 * r64.sums[0]);
    }

    #[test]
    fn reduction_is_independent_of_pool_size() {
        let term = |i: usize| ((i as f64) * 0.37).sin() / (1.0 + i as f64);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| deterministic_sum(3..50_003, term).sums[0])
        };
        let one = run(1);
        assert_eq!(one.to_bits(), run(3).to_bits());
        assert_eq!(one.to_bits(), run(8).to_bits());
    }

    #[test]
    fn two_float_keeps_the_low_word() {
        let third = TwoFloat::from_float(1.0f64).div_float(3.0);
        let back = third.mul_float(3.0);
        assert!((back.hi - 1.0).abs() + back.lo.abs() < 1e-31);
        let root2 = TwoFloat::from_float(2.0f64).sqrt();
        let sq = root2.mul(root2).sub(TwoFloat::from_float(2.0));
        assert!(sq.to_float().abs() < 1e-30);
    }

    proptest! {
        #[test]
        fn chunked_sum_close_to_exact_integer_sum(xs in prop::collection::vec(-1_000_000i64..1_000_000, 0..20_000)) {
            let exact: i64 = xs.iter().sum();
            let r = deterministic_sum::<f64, _>(0..xs.len(), |i| xs[i] as f64);
            prop_assert_eq!(r.sums[0], exact as f64);
        }
    }
}
