//! Exact integer and rational helpers shared by the counting and series code.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::GraphError;

/// `n!` as an arbitrary-precision integer.
pub fn factorial(n: u32) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, k| acc * k)
}

/// `n choose k`, zero when `k > n`.
pub fn binomial(n: u32, k: u32) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `total! / prod(parts!)`; the caller guarantees the parts sum to `total`.
pub fn multinomial(total: u32, parts: &[u32]) -> BigUint {
    debug_assert_eq!(parts.iter().sum::<u32>(), total);
    let mut acc = BigUint::one();
    let mut remaining = total;
    for &p in parts {
        acc *= binomial(remaining, p);
        remaining -= p;
    }
    acc
}

/// Parses `"p/q"` or `"p"` into a reduced rational.
pub fn parse_rational(text: &str) -> Result<BigRational, GraphError> {
    let bad = || GraphError::MalformedRational(text.to_string());
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(num, den))
}

/// Formats a rational as `"p/q"`, always with an explicit denominator.
pub fn format_rational(value: &BigRational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

/// Nearest `f64`; exact rationals only leave the exact world here.
pub fn to_f64(value: &BigRational) -> f64 {
    value.to_f64().unwrap_or_else(|| {
        // numerator or denominator overflowed f64 on its own
        let n = value.numer().to_f64().unwrap_or(f64::NAN);
        let d = value.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_factorials_and_binomials() {
        assert_eq!(factorial(0), BigUint::from(1u32));
        assert_eq!(factorial(5), BigUint::from(120u32));
        assert_eq!(binomial(5, 2), BigUint::from(10u32));
        assert_eq!(binomial(3, 4), BigUint::zero());
        assert_eq!(multinomial(4, &[1, 1, 2, 0]), BigUint::from(12u32));
    }

    #[test]
    fn binomial_matches_factorial_ratio() {
        for n in 0..25 {
            for k in 0..=n {
                assert_eq!(
                    binomial(n, k) * factorial(k) * factorial(n - k),
                    factorial(n)
                );
            }
        }
    }

    #[test]
    fn rational_text_round_trip() {
        let half = parse_rational(" 2/4 ").unwrap();
        assert_eq!(format_rational(&half), "1/2");
        assert_eq!(format_rational(&parse_rational("3").unwrap()), "3/1");
        assert_eq!(format_rational(&parse_rational("-1/3").unwrap()), "-1/3");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("0.5").is_err());
    }
}
