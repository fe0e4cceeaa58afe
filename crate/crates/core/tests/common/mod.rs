#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

/// Decomposes a finite non-negative double into `m * 2^e`.
fn split(x: f64) -> (u64, i32) {
    assert!(x.is_finite() && x >= 0.0);
    if x == 0.0 {
        return (0, 0);
    }
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp - 1075)
    }
}

/// Exact sum of doubles as `value * 2^scale`.
pub struct ExactSum {
    pub value: BigInt,
    pub scale: i32,
}

pub fn exact_sum(xs: &[f64]) -> ExactSum {
    let scale = xs.iter().filter(|&&x| x != 0.0).map(|&x| split(x).1).min().unwrap_or(0);
    let mut value = BigInt::zero();
    for &x in xs {
        let (m, e) = split(x);
        value += BigInt::from(m) << ((e - scale) as usize);
    }
    ExactSum { value, scale }
}

impl ExactSum {
    /// `|y - exact| / exact`, computed from the exact integer difference.
    pub fn relative_error(&self, y: f64) -> f64 {
        let (m, e) = split(y);
        let y_int = if e >= self.scale {
            BigInt::from(m) << ((e - self.scale) as usize)
        } else {
            // y has finer bits than every input; scale both up
            return ExactSum { value: self.value.clone() << ((self.scale - e) as usize), scale: e }.relative_error(y);
        };
        let diff = (y_int - &self.value).magnitude().clone();
        if self.value.is_zero() {
            return if diff.is_zero() { 0.0 } else { f64::INFINITY };
        }
        ratio(&BigInt::from(diff), &self.value)
    }

    pub fn to_f64(&self) -> f64 {
        ratio(&self.value, &BigInt::one()) * 2f64.powi(self.scale)
    }
}

/// `a / b` for big integers, to double precision.
fn ratio(a: &BigInt, b: &BigInt) -> f64 {
    let shift = (b.bits() as i64 - a.bits() as i64 + 80).max(0) as usize;
    let q: BigInt = (a << shift) / b;
    let qb = q.bits() as usize;
    let drop = qb.saturating_sub(64);
    let top = (q >> drop).to_f64().unwrap();
    top * 2f64.powi(drop as i32 - shift as i32)
}

/// `Li2(p/q) = sum_{k>=1} (p/q)^k / k^2` in fixed point with 400 fractional
/// bits.
pub fn dilog(p: u64, q: u64) -> f64 {
    assert!(p < q);
    let bits = 400usize;
    let mut pow = BigInt::one() << bits;
    let mut total = BigInt::zero();
    let mut k: u64 = 1;
    loop {
        pow = pow * p / q;
        if pow.is_zero() {
            break;
        }
        total += &pow / BigInt::from(k * k);
        k += 1;
    }
    let top = (total >> (bits - 120)).to_f64().unwrap();
    top * 2f64.powi(-120)
}
