//! Exact rational helpers: parsing/printing, conversions, and the square-root
//! upper bound used by certified error accounting.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

/// 10^exp as a `BigInt`.
pub fn pow10(exp: u32) -> BigInt {
    BigInt::from(10u32).pow(exp)
}

/// 10^-exp as a rational.
pub fn pow10_inv(exp: u32) -> Rat {
    Rat::new(BigInt::one(), pow10(exp))
}

/// Exact conversion; every finite f64 is a dyadic rational.
pub fn rat_from_f64(x: f64) -> Result<Rat> {
    Rat::from_float(x).ok_or_else(|| Error::Domain(format!("non-finite float {x}")))
}

pub fn rat_to_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"p/q"`, decimal strings like `"-0.125"`, and plain integers.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Domain("empty rational string".into()));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| Error::Domain(format!("bad numerator in {s:?}")))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| Error::Domain(format!("bad denominator in {s:?}")))?;
        if d.is_zero() {
            return Err(Error::Domain(format!("zero denominator in {s:?}")));
        }
        return Ok(Rat::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let digits = frac_part.len() as u32;
        let joined = format!("{int_part}{frac_part}");
        let n: BigInt = joined
            .parse()
            .map_err(|_| Error::Domain(format!("bad decimal {s:?}")))?;
        return Ok(Rat::new(n, pow10(digits)));
    }
    let n: BigInt = s
        .parse()
        .map_err(|_| Error::Domain(format!("bad integer {s:?}")))?;
    Ok(Rat::from_integer(n))
}

/// Canonical string form: integers plain, terminating decimals as decimals,
/// everything else as `p/q`. Lossless and deterministic.
pub fn format_rat(x: &Rat) -> String {
    if x.denom().is_one() {
        return x.numer().to_string();
    }
    // Denominator 2^a * 5^b terminates in base 10.
    let mut den = x.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let mut a = 0u32;
    let mut b = 0u32;
    while (&den % &two).is_zero() {
        den /= &two;
        a += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        b += 1;
    }
    if den.is_one() {
        let digits = a.max(b);
        let scaled = (x.numer() * pow10(digits)) / x.denom();
        let neg = scaled.is_negative();
        let abs = scaled.magnitude().to_string();
        let abs = if abs.len() <= digits as usize {
            format!("{}{}", "0".repeat(digits as usize + 1 - abs.len()), abs)
        } else {
            abs
        };
        let (int_part, frac_part) = abs.split_at(abs.len() - digits as usize);
        format!("{}{}.{}", if neg { "-" } else { "" }, int_part, frac_part)
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Smallest-effort rational upper bound on sqrt(x): exact when x is a perfect
/// square of a rational, otherwise within 1/denominator of the true root.
/// Soundness (result^2 >= x) is what certificates rely on.
pub fn sqrt_upper_bound(x: &Rat) -> Result<Rat> {
    if x.is_negative() {
        return Err(Error::Domain("sqrt of negative rational".into()));
    }
    if x.is_zero() {
        return Ok(Rat::zero());
    }
    // sqrt(n/d) = sqrt(n*d)/d
    let prod = x.numer() * x.denom();
    let root = prod.sqrt();
    let exact = &root * &root == prod;
    let num = if exact { root } else { root + 1 };
    Ok(Rat::new(num, x.denom().clone()))
}

/// Truncation toward zero at `digits` decimal places. Keeps |result| <= |x|.
pub fn truncate_decimal(x: &Rat, digits: u32) -> Rat {
    let scale = pow10(digits);
    let scaled = x.numer() * &scale / x.denom(); // BigInt division truncates toward zero
    Rat::new(scaled, scale)
}
