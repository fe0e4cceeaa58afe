use crate::error::{Error, Result};
use crate::logspace::{log1mexp, log_add, LogValue};
use crate::series::RatioDirection;

/// Bracket on the full sum from a partial sum `S(n)` and the next two terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingPair {
    pub lower: LogValue,
    pub upper: LogValue,
}

impl BoundingPair {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower.exp() + self.upper.exp())
    }

    pub fn width(&self) -> f64 {
        self.upper.exp() - self.lower.exp()
    }
}

/// Brackets `S` between `S(n) + a(n+1)/(1-L)` and `S(n) + a(n+1)/(1-r)`,
/// `r = a(n+1)/a(n)`. When the ratio decreases to `L` the first is the
/// lower bound; when it increases, the upper.
///
/// Requires `a(n+1) < a(n)` and `0 <= L < 1`.
pub fn bounding_pair(
    s_n: LogValue,
    a_n: LogValue,
    a_next: LogValue,
    l: f64,
    direction: RatioDirection,
) -> Result<BoundingPair> {
    if !(0.0..1.0).contains(&l) {
        return Err(Error::UnsupportedSeries(l));
    }
    if !(a_next.ln() < a_n.ln()) {
        return Err(Error::Precondition(format!(
            "bounding pair needs a decreasing step, got ln a(n)={} ln a(n+1)={}",
            a_n.ln(),
            a_next.ln()
        )));
    }
    let lr = a_next.ln() - a_n.ln();
    let by_limit = log_add(s_n, LogValue::new(a_next.ln() - log1mexp(l.ln())));
    let by_ratio = log_add(s_n, LogValue::new(a_next.ln() - log1mexp(lr)));
    let (lower, upper) = match direction {
        RatioDirection::IncreasesToL => (by_ratio, by_limit),
        _ => (by_limit, by_ratio),
    };
    // a ratio on the wrong side of L just swaps the roles
    if lower.ln() <= upper.ln() {
        Ok(BoundingPair { lower, upper })
    } else {
        Ok(BoundingPair { lower: upper, upper: lower })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brackets_exponential_tail() {
        // sum 1/n!, S(3) = 1 + 1 + 1/2 + 1/6
        let ln_f = |n: u64| -(1..=n).map(|k| (k as f64).ln()).sum::<f64>();
        let s3: f64 = (0..=3).map(|n| ln_f(n).exp()).sum();
        let p = bounding_pair(
            LogValue::new(s3.ln()),
            LogValue::new(ln_f(3)),
            LogValue::new(ln_f(4)),
            0.0,
            RatioDirection::DecreasesToL,
        )
        .unwrap();
        let e = std::f64::consts::E;
        assert!(p.lower.exp() <= e && e <= p.upper.exp());
    }

    #[test]
    fn increasing_ratio_swaps() {
        // a(n) = (1/2)^n / (n + 1): ratio increases to 1/2
        let ln_a = |n: u64| n as f64 * 0.5f64.ln() - (n as f64 + 1.0).ln();
        let s: f64 = (0..=5).map(|n| ln_a(n).exp()).sum();
        let p = bounding_pair(LogValue::new(s.ln()), LogValue::new(ln_a(5)), LogValue::new(ln_a(6)), 0.5, RatioDirection::IncreasesToL).unwrap();
        let total = 2.0 * std::f64::consts::LN_2;
        assert!(p.lower.exp() <= total && total <= p.upper.exp());
    }

    #[test]
    fn rejects_bad_inputs() {
        let z = LogValue::ONE;
        assert!(bounding_pair(z, z, LogValue::new(-1.0), 1.0, RatioDirection::DecreasesToL).is_err());
        assert!(bounding_pair(z, LogValue::new(-1.0), z, 0.2, RatioDirection::DecreasesToL).is_err());
    }
}
