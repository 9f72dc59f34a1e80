//! Exact rational helpers shared by the solvers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;

pub fn int(v: i64) -> Rat {
    Rat::from_integer(BigInt::from(v))
}

pub fn frac(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"3"`, `"-2/7"` or a finite decimal such as `"0.25"` exactly.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rat::new(n, d));
    }
    if let Some((whole, dec)) = s.split_once('.') {
        let neg = whole.starts_with('-');
        let whole_abs = whole.trim_start_matches('-');
        let digits = format!("{}{}", if whole_abs.is_empty() { "0" } else { whole_abs }, dec);
        let n: BigInt = digits.parse().map_err(|_| bad())?;
        let d = num_traits::pow(BigInt::from(10), dec.len());
        let r = Rat::new(n, d);
        return Ok(if neg { -r } else { r });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rat::from_integer(n))
}

pub fn to_f64(r: &Rat) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // scale down huge operands before dividing
            let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
            let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
            let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}

/// `base^exp` for any integer exponent.
pub fn powi(base: &Rat, exp: i64) -> Rat {
    let p = num_traits::pow(base.clone(), exp.unsigned_abs() as usize);
    if exp < 0 {
        p.recip()
    } else {
        p
    }
}

/// Largest `k` with `base^k <= x`, together with `base^k`. Requires `base > 1`, `x > 0`.
pub fn floor_log(base: &Rat, x: &Rat) -> (i64, Rat) {
    debug_assert!(base > &Rat::one() && x.is_positive());
    let mut k = 0i64;
    let mut p = Rat::one();
    if x >= &p {
        loop {
            let next = &p * base;
            if &next > x {
                break;
            }
            p = next;
            k += 1;
        }
    } else {
        while &p > x {
            p = &p / base;
            k -= 1;
        }
    }
    (k, p)
}

/// Smallest `k` with `base^k >= x`, together with `base^k`.
pub fn ceil_log(base: &Rat, x: &Rat) -> (i64, Rat) {
    let (k, p) = floor_log(base, x);
    if &p == x {
        (k, p)
    } else {
        (k + 1, p * base)
    }
}

pub fn ceil_rat(x: &Rat) -> BigInt {
    x.ceil().to_integer()
}

pub fn floor_rat(x: &Rat) -> BigInt {
    x.floor().to_integer()
}

pub fn ceil_usize(x: &Rat) -> usize {
    ceil_rat(x).to_usize().unwrap_or(usize::MAX)
}

/// Least common multiple of all denominators.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rat>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// Scales rationals by a common denominator so they fit `i128`; returns the scaled
/// integers and the scale.
pub fn scale_to_i128(values: &[Rat]) -> Result<(Vec<i128>, BigInt)> {
    let den = common_denominator(values.iter());
    let out = values
        .iter()
        .map(|v| {
            let scaled = (v * Rat::from_integer(den.clone())).to_integer();
            scaled
                .to_i128()
                .ok_or_else(|| Error::Numeric(format!("value {v} too large after scaling")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((out, den))
}

pub fn from_scaled(v: i128, scale: &BigInt) -> Rat {
    Rat::new(BigInt::from(v), scale.clone())
}

/// `e` to 15 significant digits, as an exact rational.
pub fn euler_approx() -> Rat {
    Rat::new(
        BigInt::from(2_718_281_828_459_045i64),
        BigInt::from(1_000_000_000_000_000i64),
    )
}

pub fn is_integral(x: &Rat) -> bool {
    x.is_integer()
}

pub fn rat_abs(x: &Rat) -> Rat {
    x.abs()
}

/// JSON form `{"num": .., "den": ..}`; parts that overflow `i64` become strings.
pub fn rat_to_json(r: &Rat) -> serde_json::Value {
    let part = |v: &BigInt| match v.to_i64() {
        Some(x) => serde_json::Value::from(x),
        None => serde_json::Value::from(v.to_string()),
    };
    serde_json::json!({ "num": part(r.numer()), "den": part(r.denom()) })
}

pub fn rat_from_json(v: &serde_json::Value) -> Result<Rat> {
    let part = |x: &serde_json::Value| -> Result<BigInt> {
        match x {
            serde_json::Value::Number(n) => n
                .as_i64()
                .map(BigInt::from)
                .ok_or_else(|| Error::Parse(format!("non-integer rational part {n}"))),
            serde_json::Value::String(s) => s.parse().map_err(|_| Error::Parse(format!("bad integer {s:?}"))),
            other => Err(Error::Parse(format!("bad rational part {other}"))),
        }
    };
    match v {
        serde_json::Value::Object(m) => {
            let num = part(m.get("num").ok_or_else(|| Error::Parse("missing num".into()))?)?;
            let den = part(m.get("den").ok_or_else(|| Error::Parse("missing den".into()))?)?;
            if den.is_zero() {
                return Err(Error::Parse("zero denominator".into()));
            }
            Ok(Rat::new(num, den))
        }
        serde_json::Value::Number(n) if n.is_i64() => Ok(Rat::from_integer(n.as_i64().unwrap_or(0).into())),
        serde_json::Value::String(s) => parse_rat(s),
        other => Err(Error::Parse(format!("bad rational {other}"))),
    }
}

pub fn serialize_rat<S: serde::Serializer>(r: &Rat, s: S) -> std::result::Result<S::Ok, S::Error> {
    serde::Serialize::serialize(&rat_to_json(r), s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_and_fractions() {
        assert_eq!(parse_rat("0.25").unwrap(), frac(1, 4));
        assert_eq!(parse_rat("-1.5").unwrap(), frac(-3, 2));
        assert_eq!(parse_rat("7/21").unwrap(), frac(1, 3));
        assert_eq!(parse_rat("12").unwrap(), int(12));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("abc").is_err());
    }

    #[test]
    fn json_round_trip() {
        let r = frac(-7, 3);
        assert_eq!(rat_to_json(&r), serde_json::json!({"num": -7, "den": 3}));
        assert_eq!(rat_from_json(&rat_to_json(&r)).unwrap(), r);
        let big = powi(&frac(10, 3), 40);
        assert!(rat_to_json(&big)["num"].is_string());
        assert_eq!(rat_from_json(&rat_to_json(&big)).unwrap(), big);
    }

    #[test]
    fn logs_are_exact() {
        let b = frac(3, 2);
        assert_eq!(floor_log(&b, &int(4)), (3, frac(27, 8)));
        assert_eq!(ceil_log(&b, &int(4)), (4, frac(81, 16)));
        assert_eq!(ceil_log(&b, &frac(9, 4)), (2, frac(9, 4)));
        assert_eq!(floor_log(&b, &frac(1, 3)).0, -3);
        assert_eq!(ceil_log(&b, &int(1)).0, 0);
    }
}
