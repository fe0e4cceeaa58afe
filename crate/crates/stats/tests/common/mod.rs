#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `m * 2^e` for a finite non-negative double.
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
    pub fn relative_error(&self, y: f64) -> f64 {
        let (m, e) = split(y);
        if e < self.scale {
            return ExactSum { value: self.value.clone() << ((self.scale - e) as usize), scale: e }.relative_error(y);
        }
        let y_int = BigInt::from(m) << ((e - self.scale) as usize);
        let diff = (y_int - &self.value).abs();
        if self.value.is_zero() {
            return if diff.is_zero() { 0.0 } else { f64::INFINITY };
        }
        ratio(&diff, &self.value)
    }
}

/// `a / b` to double precision.
fn ratio(a: &BigInt, b: &BigInt) -> f64 {
    if a.is_zero() {
        return 0.0;
    }
    let shift = (b.bits() as i64 - a.bits() as i64 + 80).max(0) as usize;
    let q: BigInt = (a << shift) / b;
    let drop = (q.bits() as usize).saturating_sub(64);
    (q >> drop).to_f64().unwrap() * 2f64.powi(drop as i32 - shift as i32)
}

const BITS: usize = 400;

/// `Li2(p/q)` scaled by `2^400`.
fn dilog_fixed(p: u64, q: u64) -> BigInt {
    assert!(p < q);
    let mut pow = BigInt::one() << BITS;
    let mut total = BigInt::zero();
    let mut k: u64 = 1;
    loop {
        pow = pow * p / q;
        if pow.is_zero() {
            return total;
        }
        total += &pow / BigInt::from(k * k);
        k += 1;
    }
}

pub fn dilog(p: u64, q: u64) -> f64 {
    ratio(&dilog_fixed(p, q), &(BigInt::one() << BITS))
}

/// `|y - Li2(p/q)|` without rounding the reference.
pub fn dilog_error(p: u64, q: u64, y: f64) -> f64 {
    let (m, e) = split(y);
    let y_fixed = BigInt::from(m) << ((BITS as i32 + e) as usize);
    ratio(&(y_fixed - dilog_fixed(p, q)).abs(), &(BigInt::one() << BITS))
}
