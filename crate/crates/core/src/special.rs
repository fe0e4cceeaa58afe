//! Log-gamma helpers.

use std::sync::OnceLock;

/// `ln(n!)` is tabulated below this bound.
const TABLE_LEN: usize = 1 << 17;

fn table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| (0..TABLE_LEN).map(|n| libm::lgamma(n as f64 + 1.0)).collect())
}

#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `ln(n!)`. Values are the same `lgamma` results whether or not they come
/// from the table.
#[inline]
pub fn ln_factorial(n: u64) -> f64 {
    if (n as usize) < TABLE_LEN {
        table()[n as usize]
    } else {
        libm::lgamma(n as f64 + 1.0)
    }
}

/// Stirling remainder `ln G(z) - ((z - 1/2) ln z - z + ln(2 pi)/2)`, `z >= 16`.
fn stirling_remainder(z: f64) -> f64 {
    // B_2k / (2k (2k-1))
    const C: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360360.0,
        1.0 / 156.0,
    ];
    let w = 1.0 / (z * z);
    C.iter().rev().fold(0.0, |acc, &c| acc * w + c) / z
}

const RATIO_SHIFT_AT: f64 = 16.0;

/// `ln G(z + a) - ln G(z)` for `z > 0`, `z + a > 0`, without forming either
/// log-gamma value. Accurate to a few ulps of the result even when the two
/// log-gammas are huge.
pub fn ln_gamma_ratio(z: f64, a: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let lo = z.min(z + a);
    if !(lo > 0.0) {
        return f64::NAN;
    }
    // move both arguments up with G(w) = G(w + n) / (w (w+1) ... (w+n-1))
    let n = if lo < RATIO_SHIFT_AT { (RATIO_SHIFT_AT - lo).ceil() } else { 0.0 };
    let mut prod = 1.0;
    for k in 0..n as u32 {
        let k = k as f64;
        prod *= (z + a + k) / (z + k);
    }
    let z = z + n;
    let big = (z - 0.5) * (a / z).ln_1p() + a * (z + a).ln() - a;
    big + (stirling_remainder(z + a) - stirling_remainder(z)) - prod.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_factorials() {
        let mut f = 1.0f64;
        for n in 0..20u64 {
            if n > 0 {
                f *= n as f64;
            }
            assert!((ln_factorial(n) - f.ln()).abs() < 1e-13 * f.ln().abs().max(1.0), "n={n}");
        }
    }

    #[test]
    fn table_matches_lgamma() {
        for n in [0u64, 1, 170, 1000, TABLE_LEN as u64 - 1, TABLE_LEN as u64, 1 << 20] {
            assert_eq!(ln_factorial(n), libm::lgamma(n as f64 + 1.0));
        }
    }

    #[test]
    fn gamma_ratio_integers() {
        for (z, a) in [(1000u64, 10u64), (1, 5), (20, 3), (3, 40), (100000, 7)] {
            let want: f64 = (0..a).map(|k| ((z + k) as f64).ln()).sum();
            let got = ln_gamma_ratio(z as f64, a as f64);
            assert!((got - want).abs() < 1e-14 * want.abs().max(1.0), "{z} {a}: {got} vs {want}");
            let back = ln_gamma_ratio((z + a) as f64, -(a as f64));
            assert!((back + want).abs() < 1e-14 * want.abs().max(1.0));
        }
    }

    #[test]
    fn gamma_ratio_matches_lgamma_when_small() {
        for (z, a) in [(0.1, 0.9), (0.5, 3.25), (2.0, -1.5), (7.5, 20.0), (30.0, -0.9)] {
            let want = ln_gamma(z + a) - ln_gamma(z);
            assert!((ln_gamma_ratio(z, a) - want).abs() < 1e-13, "{z} {a}");
        }
    }

    proptest::proptest! {
        #[test]
        fn gamma_ratio_chains(z in 0.05f64..5e4, a in 0.0f64..40.0, b in 0.0f64..40.0) {
            let split = ln_gamma_ratio(z, a) + ln_gamma_ratio(z + a, b);
            let whole = ln_gamma_ratio(z, a + b);
            let scale = (a + b) * (z + a + b).ln().abs().max(1.0) + 1.0;
            proptest::prop_assert!((split - whole).abs() <= 64.0 * f64::EPSILON * scale);
        }
    }

    #[test]
    fn half_integer() {
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-15);
    }
}
