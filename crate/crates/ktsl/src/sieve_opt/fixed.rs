//! Fixed-point big-integer arithmetic for the symmetric-definite
//! eigenvalue reduction.
//!
//! Values are `v / 2^bits` with `v` a `BigInt`. The Gram matrices of
//! high-degree polynomial bases are far too ill-conditioned for f64
//! (pivots underflow), while exact rational elimination blows up in
//! gcd cost; a few hundred fractional bits of fixed-point is exact
//! enough for any conditioning the assembly produces and keeps every
//! operation a plain integer multiply and shift.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{Signed, ToPrimitive, Zero};

/// Precision context: number of fractional bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fixed {
    pub bits: u32,
}

impl Fixed {
    pub fn new(bits: u32) -> Fixed {
        Fixed { bits }
    }

    pub fn zero(&self) -> BigInt {
        BigInt::zero()
    }

    pub fn one(&self) -> BigInt {
        BigInt::from(1) << self.bits
    }

    /// Exact-to-one-ulp conversion; `extra_shift` multiplies by 2^extra.
    pub fn from_rational_shifted(&self, q: &BigRational, extra_shift: i64) -> BigInt {
        let total = self.bits as i64 + extra_shift;
        let num = q.numer();
        if total >= 0 {
            (num << total as u64) / q.denom()
        } else {
            (num >> (-total) as u64) / q.denom()
        }
    }

    pub fn from_f64(&self, x: f64) -> BigInt {
        // f64 is dyadic, so this is exact
        let q = BigRational::from_float(x).expect("finite float");
        self.from_rational_shifted(&q, 0)
    }

    pub fn to_f64(&self, v: &BigInt) -> f64 {
        // split mantissa and exponent to survive magnitudes beyond f64
        let bits = v.bits() as i64;
        if bits <= 900 {
            v.to_f64().unwrap_or(0.0) / 2f64.powi(self.bits as i32)
        } else {
            let shift = bits - 64;
            let top = (v >> shift as u64).to_f64().unwrap_or(0.0);
            top * 2f64.powi((shift - self.bits as i64) as i32)
        }
    }

    pub fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        (a * b) >> self.bits
    }

    pub fn div(&self, a: &BigInt, b: &BigInt) -> BigInt {
        (a << self.bits) / b
    }

    /// Square root of a non-negative fixed-point value.
    pub fn sqrt(&self, a: &BigInt) -> BigInt {
        use num::integer::Roots;
        debug_assert!(!a.is_negative());
        (a << self.bits).sqrt()
    }

    /// Dot product of fixed-point slices.
    pub fn dot(&self, a: &[BigInt], b: &[BigInt]) -> BigInt {
        let mut acc = BigInt::zero();
        for (x, y) in a.iter().zip(b) {
            acc += x * y;
        }
        acc >> self.bits
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::FromPrimitive;

    #[test]
    fn round_trips_and_arithmetic() {
        let fx = Fixed::new(128);
        let a = fx.from_f64(1.5);
        let b = fx.from_f64(-2.25);
        assert_eq!(fx.to_f64(&a), 1.5);
        assert_eq!(fx.to_f64(&fx.mul(&a, &b)), -3.375);
        assert_eq!(fx.to_f64(&fx.div(&b, &a)), -1.5);
        let q = BigRational::from_f64(0.375).unwrap();
        assert_eq!(fx.to_f64(&fx.from_rational_shifted(&q, 0)), 0.375);
        assert_eq!(fx.to_f64(&fx.from_rational_shifted(&q, 3)), 3.0);
        assert_eq!(fx.to_f64(&fx.sqrt(&fx.from_f64(2.25))), 1.5);
    }

    #[test]
    fn huge_magnitudes_survive_to_f64() {
        let fx = Fixed::new(256);
        let big = fx.one() << 1200u32;
        let f = fx.to_f64(&big);
        assert!(f.is_infinite() || f > 1e300);
        let one = fx.one();
        assert_eq!(fx.to_f64(&one), 1.0);
    }
}
