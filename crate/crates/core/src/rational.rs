//! Exact rational helpers: decimal parsing and fixed-place formatting.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational used for every exact density.
pub type Rational = BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn frac(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses a decimal (`0.25`, `-1`, `3e-2`) or a fraction (`1/3`) exactly.
pub fn parse(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = parse(n)?;
        let d = parse(d)?;
        if d.is_zero() {
            return None;
        }
        return Some(n / d);
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, fracpart) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && fracpart.is_empty() {
        return None;
    }
    if !whole.chars().chain(fracpart.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: String = format!("{whole}{fracpart}");
    let mut num: BigInt = if all.is_empty() { BigInt::zero() } else { all.parse().ok()? };
    if neg {
        num = -num;
    }
    let scale = exp - fracpart.len() as i32;
    let ten = BigInt::from(10);
    Some(if scale >= 0 {
        Rational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(num, num_traits::pow(ten, (-scale) as usize))
    })
}

/// Exact rational with the same shortest decimal representation as `x`.
pub fn from_f64(x: f64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    parse(&format!("{x}"))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Rounds half away from zero to `places` decimals, drops trailing zeros but
/// keeps at least one fractional digit (`2/3 -> 0.666666666667`, `1 -> 1.0`).
pub fn format_places(r: &Rational, places: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10), places);
    let scaled = r.abs() * Rational::from_integer(scale.clone());
    let (q, rem) = scaled.numer().div_rem(scaled.denom());
    let twice = rem * 2;
    let rounded = if &twice >= scaled.denom() { q + 1 } else { q };
    let (ip, fp) = rounded.div_rem(&scale);
    let mut fs = format!("{:0>width$}", fp.to_string(), width = places);
    while fs.len() > 1 && fs.ends_with('0') {
        fs.pop();
    }
    if fs.is_empty() {
        fs.push('0');
    }
    let sign = if r.is_negative() && !(ip.is_zero() && fs == "0") { "-" } else { "" };
    format!("{sign}{ip}.{fs}")
}

/// Exact decimal when the expansion terminates, `p/q` otherwise.
pub fn format_exact(r: &Rational) -> String {
    let mut d = r.denom().clone();
    for p in [2u32, 5] {
        let p = BigInt::from(p);
        while (&d % &p).is_zero() {
            d /= &p;
        }
    }
    if !d.is_one() {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let mut places = 0;
    let mut scaled = r.clone();
    while !scaled.is_integer() {
        scaled *= int(10);
        places += 1;
    }
    if places == 0 {
        return format!("{}", r.numer());
    }
    let s = format_places(r, places);
    s
}
