//! Exact summation of `f64` values.
//!
//! [`ExactSum`] is a fixed-width two's complement fixed-point accumulator
//! (a Kulisch accumulator) wide enough to hold any finite double plus
//! 2^70 worth of headroom. Additions and subtractions are exact, so the
//! result does not depend on the order in which terms are added, and two
//! accumulators can be subtracted from one another. [`ExactSum::value`]
//! rounds the exact total to the nearest double (ties to even).
//!
//! Every cell sum in this crate goes through this type. That is what makes
//! a prefix-sum difference and a direct window sum agree bit for bit, and
//! what makes `I(Ω) = I(D) + I(Ω \ D)` hold exactly in reports.

use std::cmp::Ordering;

/// Number of 64-bit limbs. Bit 0 has weight 2^-1074.
const LIMBS: usize = 35;
/// Bit index of weight 2^0.
const BIAS: i64 = 1074;

#[derive(Clone, PartialEq, Eq)]
pub struct ExactSum {
    limbs: [u64; LIMBS],
}

impl Default for ExactSum {
    fn default() -> Self {
        Self::new()
    }
}

impl std::fmt::Debug for ExactSum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_tuple("ExactSum").field(&self.value()).finish()
    }
}

/// Splits a finite double into (integer mantissa, bit position of its lsb).
fn decompose(x: f64) -> (u64, usize) {
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    if exp == 0 {
        (frac, 0)
    } else {
        (frac | (1u64 << 52), (exp - 1075 + BIAS) as usize)
    }
}

impl ExactSum {
    pub const fn new() -> Self {
        Self { limbs: [0; LIMBS] }
    }

    pub fn from_values<I: IntoIterator<Item = f64>>(values: I) -> Self {
        let mut acc = Self::new();
        for v in values {
            acc.add(v);
        }
        acc
    }

    /// Adds `x` exactly.
    ///
    /// # Panics
    /// Panics if `x` is not finite.
    pub fn add(&mut self, x: f64) {
        assert!(x.is_finite(), "ExactSum::add called with non-finite value {x}");
        if x == 0.0 {
            return;
        }
        let (mant, pos) = decompose(x.abs());
        let wide = (mant as u128) << (pos % 64);
        let limb = pos / 64;
        let lo = wide as u64;
        let hi = (wide >> 64) as u64;
        if x > 0.0 {
            self.add_at(limb, lo, hi);
        } else {
            self.sub_at(limb, lo, hi);
        }
    }

    pub fn sub(&mut self, x: f64) {
        self.add(-x);
    }

    fn add_at(&mut self, limb: usize, lo: u64, hi: u64) {
        let (s, c0) = self.limbs[limb].overflowing_add(lo);
        self.limbs[limb] = s;
        let (s, c1) = self.limbs[limb + 1].overflowing_add(hi);
        let (s, c2) = s.overflowing_add(c0 as u64);
        self.limbs[limb + 1] = s;
        let mut carry = c1 || c2;
        let mut i = limb + 2;
        while carry && i < LIMBS {
            let (s, c) = self.limbs[i].overflowing_add(1);
            self.limbs[i] = s;
            carry = c;
            i += 1;
        }
    }

    fn sub_at(&mut self, limb: usize, lo: u64, hi: u64) {
        let (s, b0) = self.limbs[limb].overflowing_sub(lo);
        self.limbs[limb] = s;
        let (s, b1) = self.limbs[limb + 1].overflowing_sub(hi);
        let (s, b2) = s.overflowing_sub(b0 as u64);
        self.limbs[limb + 1] = s;
        let mut borrow = b1 || b2;
        let mut i = limb + 2;
        while borrow && i < LIMBS {
            let (s, b) = self.limbs[i].overflowing_sub(1);
            self.limbs[i] = s;
            borrow = b;
            i += 1;
        }
    }

    pub fn add_sum(&mut self, other: &ExactSum) {
        let mut carry = false;
        for (a, &b) in self.limbs.iter_mut().zip(other.limbs.iter()) {
            let (s, c1) = a.overflowing_add(b);
            let (s, c2) = s.overflowing_add(carry as u64);
            *a = s;
            carry = c1 || c2;
        }
    }

    pub fn sub_sum(&mut self, other: &ExactSum) {
        let mut borrow = false;
        for (a, &b) in self.limbs.iter_mut().zip(other.limbs.iter()) {
            let (s, b1) = a.overflowing_sub(b);
            let (s, b2) = s.overflowing_sub(borrow as u64);
            *a = s;
            borrow = b1 || b2;
        }
    }

    fn is_negative(&self) -> bool {
        self.limbs[LIMBS - 1] >> 63 == 1
    }

    pub fn is_zero(&self) -> bool {
        self.limbs.iter().all(|&l| l == 0)
    }

    pub fn signum(&self) -> Ordering {
        if self.is_zero() {
            Ordering::Equal
        } else if self.is_negative() {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }

    fn negated(&self) -> Self {
        let mut out = Self::new();
        out.sub_sum(self);
        out
    }

    /// Returns bits `[lo, lo + 64)` as a u64 (bits below 0 read as zero).
    fn window(&self, lo: i64) -> u64 {
        if lo < 0 {
            return self.limbs[0] << (-lo);
        }
        let (li, sh) = ((lo / 64) as usize, (lo % 64) as u32);
        let low = self.limbs[li] >> sh;
        let high = if sh > 0 && li + 1 < LIMBS {
            self.limbs[li + 1] << (64 - sh)
        } else {
            0
        };
        low | high
    }

    fn any_below(&self, end: usize) -> bool {
        let full = end / 64;
        if self.limbs[..full].iter().any(|&l| l != 0) {
            return true;
        }
        let rem = end % 64;
        rem > 0 && (self.limbs[full] & ((1u64 << rem) - 1)) != 0
    }

    /// The exact total rounded to the nearest double, ties to even.
    /// Totals beyond the double range round to ±infinity.
    pub fn value(&self) -> f64 {
        if self.is_negative() {
            return -self.negated().value();
        }
        self.rounded(BIAS, false)
    }

    /// The exact total divided by `d`, rounded once to the nearest double.
    pub fn div_value(&self, d: u64) -> f64 {
        assert!(d > 0, "division by zero");
        if self.is_negative() {
            return -self.negated().div_value(d);
        }
        // Two guard bits below 2^-1074 plus a sticky bit for the remainder
        // decide the rounding of the infinite quotient.
        let d = d as u128;
        let mut q = Self::new();
        let mut rem: u128 = 0;
        for i in (0..LIMBS).rev() {
            let cur = (rem << 64) | self.limbs[i] as u128;
            q.limbs[i] = (cur / d) as u64;
            rem = cur % d;
        }
        let mut carry = 0u64;
        for limb in q.limbs.iter_mut() {
            let next = *limb >> 62;
            *limb = (*limb << 2) | carry;
            carry = next;
        }
        let cur = rem << 2;
        q.limbs[0] |= (cur / d) as u64;
        q.rounded(BIAS + 2, !cur.is_multiple_of(d))
    }

    /// Rounds a non-negative total whose bit 0 has weight 2^-bias; `sticky`
    /// marks a nonzero tail below bit 0.
    fn rounded(&self, bias: i64, sticky: bool) -> f64 {
        let Some(top_limb) = self.limbs.iter().rposition(|&l| l != 0) else {
            return 0.0;
        };
        let top = (top_limb * 64 + 63 - self.limbs[top_limb].leading_zeros() as usize) as i64;
        // Lowest kept bit: 53 significant bits, but never below 2^-1074.
        let lsb = (top - 52).max(bias - BIAS);
        let width = top - lsb + 1;
        let mut mant = if width > 0 {
            self.window(lsb) & (u64::MAX >> (64 - width))
        } else {
            0
        };
        if lsb > 0 {
            let guard = (self.window(lsb - 1) & 1) == 1;
            let rest = sticky || self.any_below((lsb - 1) as usize);
            if guard && (rest || mant & 1 == 1) {
                mant += 1;
            }
        }
        mant as f64 * pow2(lsb - bias)
    }
}

/// 2^e as a double for e in the representable range; saturates outside it.
fn pow2(e: i64) -> f64 {
    if e > 1023 {
        f64::INFINITY
    } else if e >= -1022 {
        f64::from_bits(((e + 1023) as u64) << 52)
    } else if e >= -1074 {
        f64::from_bits(1u64 << (e + 1074))
    } else {
        0.0
    }
}

/// Correctly rounded sum of a slice.
pub fn exact_sum(values: &[f64]) -> f64 {
    ExactSum::from_values(values.iter().copied()).value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn division_rounds_once() {
        let v = 0.6875381999370076;
        for k in 1..200u64 {
            let acc = ExactSum::from_values(std::iter::repeat_n(v, k as usize));
            assert_eq!(acc.div_value(k), v, "k = {k}");
        }
        assert_eq!(ExactSum::from_values([1.0]).div_value(3), 1.0 / 3.0);
        assert_eq!(ExactSum::from_values([-2.0]).div_value(3), -2.0 / 3.0);
        assert_eq!(ExactSum::from_values([f64::from_bits(1)]).div_value(2), 0.0);
        assert_eq!(
            ExactSum::from_values([f64::from_bits(3)]).div_value(2),
            f64::from_bits(2)
        );
        assert_eq!(
            ExactSum::from_values([f64::from_bits(1)]).div_value(1),
            f64::from_bits(1)
        );
        assert_eq!(ExactSum::from_values([f64::MAX, f64::MAX]).div_value(2), f64::MAX);
    }

    #[test]
    fn simple_values() {
        assert_eq!(exact_sum(&[]), 0.0);
        assert_eq!(exact_sum(&[1.0, 2.0, 3.5]), 6.5);
        assert_eq!(exact_sum(&[1e100, 1.0, -1e100]), 1.0);
        assert_eq!(exact_sum(&[0.1; 10]), 1.0);
        assert_eq!(exact_sum(&[-3.0, 1.0]), -2.0);
    }

    #[test]
    fn catastrophic_cancellation_is_exact() {
        let v = [1.0, 1e-30, -1.0];
        assert_eq!(exact_sum(&v), 1e-30);
    }

    #[test]
    fn subnormals_and_extremes() {
        let tiny = f64::from_bits(1);
        assert_eq!(exact_sum(&[tiny, tiny]), f64::from_bits(2));
        assert_eq!(exact_sum(&[f64::MAX, -f64::MAX, 2.0]), 2.0);
        assert_eq!(exact_sum(&[f64::MAX, f64::MAX]), f64::INFINITY);
        assert_eq!(exact_sum(&[-f64::MAX, -f64::MAX]), f64::NEG_INFINITY);
        assert_eq!(exact_sum(&[f64::MIN_POSITIVE, -tiny]), f64::MIN_POSITIVE - tiny);
    }

    #[test]
    fn ties_round_to_even() {
        // 2^53 + 1 is a tie between 2^53 and 2^53 + 2.
        let two53 = 9007199254740992.0;
        assert_eq!(exact_sum(&[two53, 1.0]), two53);
        assert_eq!(exact_sum(&[two53 + 2.0, 1.0]), two53 + 4.0);
        // A sticky bit far below breaks the tie upwards.
        assert_eq!(exact_sum(&[two53, 1.0, 1e-300]), two53 + 2.0);
    }

    #[test]
    fn difference_of_prefixes_matches_direct_sum() {
        let v: Vec<f64> = (0..50).map(|i| ((i * 7919) % 101) as f64 * 0.013 + 1e-9).collect();
        let mut prefixes = vec![ExactSum::new()];
        for &x in &v {
            let mut next = prefixes.last().unwrap().clone();
            next.add(x);
            prefixes.push(next);
        }
        for a in 0..v.len() {
            for b in a..v.len() {
                let mut diff = prefixes[b + 1].clone();
                diff.sub_sum(&prefixes[a]);
                assert_eq!(diff.value().to_bits(), exact_sum(&v[a..=b]).to_bits());
            }
        }
    }
}
