//! Exact-decimal parsing and display helpers.
//!
//! Graph files and report flags carry costs as decimal strings so the
//! analytics can run in exact rational arithmetic; floats appear only
//! when values are printed.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};

/// Parse `"7.71"`, `"-0.5"`, `"10"`, or `"771/100"` into an exact
/// rational.
pub fn parse_rational(text: &str) -> Result<BigRational, String> {
    let s = text.trim();
    if s.is_empty() {
        return Err("empty number".into());
    }
    if let Some((numer, denom)) = s.split_once('/') {
        let n: BigInt = numer.trim().parse().map_err(|_| format!("bad numerator in {s:?}"))?;
        let d: BigInt = denom.trim().parse().map_err(|_| format!("bad denominator in {s:?}"))?;
        if d == BigInt::from(0) {
            return Err(format!("zero denominator in {s:?}"));
        }
        return Ok(BigRational::new(n, d));
    }
    let (sign, digits) = match s.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, s.strip_prefix('+').unwrap_or(s)),
    };
    let (whole, frac) = match digits.split_once('.') {
        Some((w, f)) => (w, f),
        None => (digits, ""),
    };
    if whole.is_empty() && frac.is_empty() {
        return Err(format!("no digits in {s:?}"));
    }
    if !whole.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(format!("invalid decimal {s:?}"));
    }
    let mut numer: BigInt = if whole.is_empty() { 0.into() } else { whole.parse().unwrap() };
    let denom = BigInt::from(10u32).pow(frac.len() as u32);
    numer = &numer * &denom
        + if frac.is_empty() { BigInt::from(0) } else { frac.parse::<BigInt>().unwrap() };
    Ok(BigRational::new(numer * BigInt::from(sign), denom))
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Round to `sig` significant figures for display.
pub fn format_sig(x: f64, sig: u32) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (sig as i32 - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Exact rational plus a 3-significant-figure rendering.
pub fn display_rational(r: &BigRational) -> String {
    format!("{} ({})", format_sig(rational_to_f64(r), 3), r)
}

pub fn biguint_to_string(n: &BigUint) -> String {
    n.to_string()
}

/// Loss check used when echoing parsed values: true when the rational is
/// negative.
pub fn is_negative(r: &BigRational) -> bool {
    r.is_negative()
}
