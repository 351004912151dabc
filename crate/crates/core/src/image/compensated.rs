//! Error-free float transforms and a double-word accumulator.
//!
//! Prefix-sum tables over a million pixels lose ~12 digits when window sums
//! are recovered by corner differences of plain `f64` entries. Carrying the
//! rounding remainder in a second word keeps window sums correctly rounded at
//! any image size, which the filter's exactness guarantees (constant images
//! are fixed points, self-guided filtering with zero regularization is the
//! identity) depend on.

/// Double-word value: `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

/// Exact sum: returns `(fl(a+b), err)` with `a + b = fl(a+b) + err`.
#[inline]
fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    Dd { hi: s, lo: e }
}

/// Exact sum under the precondition `|a| >= |b|` (or either is zero).
#[inline]
fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let e = b - (s - a);
    Dd { hi: s, lo: e }
}

/// Veltkamp split of `a` into high and low 26-bit halves.
#[inline]
fn split(a: f64) -> (f64, f64) {
    const SPLITTER: f64 = 134_217_729.0; // 2^27 + 1
    let c = SPLITTER * a;
    let hi = c - (c - a);
    (hi, a - hi)
}

/// Exact product: returns `(fl(a*b), err)` with `a * b = fl(a*b) + err`.
#[inline]
pub(crate) fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    let (ahi, alo) = split(a);
    let (bhi, blo) = split(b);
    let e = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo;
    Dd { hi: p, lo: e }
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    /// Rounds to the nearest single `f64`.
    #[inline]
    pub fn value(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn add_f64(self, v: f64) -> Dd {
        let s = two_sum(self.hi, v);
        quick_two_sum(s.hi, s.lo + self.lo)
    }

    #[inline]
    pub fn add(self, other: Dd) -> Dd {
        let s = two_sum(self.hi, other.hi);
        quick_two_sum(s.hi, s.lo + self.lo + other.lo)
    }

    #[inline]
    pub fn sub(self, other: Dd) -> Dd {
        self.add(Dd {
            hi: -other.hi,
            lo: -other.lo,
        })
    }

    #[inline]
    pub fn mul_f64(self, v: f64) -> Dd {
        let p = two_prod(self.hi, v);
        quick_two_sum(p.hi, p.lo + self.lo * v)
    }

    /// Quotient `self / d`, correctly rounded to within one ulp.
    #[inline]
    pub fn div_f64(self, d: f64) -> f64 {
        let q1 = self.hi / d;
        let p = two_prod(q1, d);
        let r = (self.hi - p.hi) - p.lo + self.lo;
        q1 + r / d
    }

    /// Quotient `self / other`, correctly rounded to within one ulp.
    #[inline]
    pub fn div(self, other: Dd) -> f64 {
        let q1 = self.hi / other.hi;
        let r = self.sub(other.mul_f64(q1));
        q1 + r.value() / other.hi
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_sum_is_exact() {
        let a = 1.0;
        let b = 1e-17;
        let s = two_sum(a, b);
        assert_eq!(s.hi, 1.0);
        assert_eq!(s.lo, 1e-17);
    }

    #[test]
    fn two_prod_captures_rounding_error() {
        let a = 1.0 + 2f64.powi(-30);
        let b = 1.0 + 2f64.powi(-29);
        let p = two_prod(a, b);
        // Exact product needs 59 mantissa bits; hi+lo must recover it.
        let exact_lo = 2f64.powi(-59);
        assert_eq!(p.lo, exact_lo);
    }

    #[test]
    fn accumulating_constants_divides_back_exactly() {
        // Full-mantissa constant: plain f64 summation drifts, Dd must not.
        let k = 0.12345678901234568;
        for n in [3usize, 7, 81, 961, 4096] {
            let mut acc = Dd::ZERO;
            for _ in 0..n {
                acc = acc.add_f64(k);
            }
            assert_eq!(acc.div_f64(n as f64), k, "n = {n}");
        }
    }

    #[test]
    fn ratio_of_scaled_sums_recovers_scale() {
        // sum(w*k) / sum(w) == k when products are kept exact.
        let k = 0.7305816351297651;
        let mut num = Dd::ZERO;
        let mut den = Dd::ZERO;
        let mut w = 0.001f64;
        for _ in 0..553 {
            w = (w * 1.618033988749895).fract() + 0.001;
            num = num.add(two_prod(w, k));
            den = den.add_f64(w);
        }
        assert_eq!(num.div(den), k);
    }
}
