//! Scalar abstraction: exact rationals and `f64` behind one trait.
//!
//! Every geometric type in this crate is generic over [`Coord`]. Rational
//! coordinates compare exactly; `f64` coordinates identify two endpoints
//! when they are closer than [`F64_IDENT_EPS`] (float data is imported, never
//! certified).

use std::cmp::Ordering;
use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::Rat;

/// Two `f64` endpoints are identified iff their distance is below this.
pub const F64_IDENT_EPS: f64 = 1e-12;

/// Coordinate scalar for chords and configurations.
pub trait Coord: Clone + Debug + Display + PartialOrd {
    /// Endpoint identification: exact equality for rationals, distance
    /// below [`F64_IDENT_EPS`] for floats.
    fn same(&self, other: &Self) -> bool;

    /// Total order used for canonical sorting of chords and blocks.
    fn total_cmp(&self, other: &Self) -> Ordering;

    /// JSON form: rationals serialize as `"p/q"` strings, floats as numbers.
    fn to_json(&self) -> serde_json::Value;

    /// Approximate value for rendering and float-mode evaluation.
    fn approx(&self) -> f64;
}

impl Coord for Rat {
    fn same(&self, other: &Self) -> bool {
        self == other
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(format_rat(self))
    }

    fn approx(&self) -> f64 {
        rat_to_f64(self)
    }
}

impl Coord for f64 {
    fn same(&self, other: &Self) -> bool {
        (self - other).abs() < F64_IDENT_EPS
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        f64::total_cmp(self, other)
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::json!(self)
    }

    fn approx(&self) -> f64 {
        *self
    }
}

/// Canonical text form of a rational: `p` when integral, else `p/q`.
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p`, `p/q`, or a decimal literal into an exact rational.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().ok()?;
        let d: BigInt = den.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Rat::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.trim_start().starts_with('-');
        let i: BigInt = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            int.parse().ok()?
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let f: BigInt = frac.parse().ok()?;
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let mag = i.abs() * &scale + f;
        let sign = if neg { -BigInt::one() } else { BigInt::one() };
        return Some(Rat::new(sign * mag, scale));
    }
    let n: BigInt = s.parse().ok()?;
    Some(Rat::from_integer(n))
}

/// Rational from an integer.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Rational `p/q` from integers; panics on `q = 0`.
pub fn ratio(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

/// Lossy conversion to `f64` (via numerator/denominator doubles, with a
/// bit-shift fallback for operands outside the `f64` range).
pub fn rat_to_f64(r: &Rat) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Reduce both operands by a common power of two until they fit.
    let shift = (r.numer().bits().max(r.denom().bits()) as i64 - 1000).max(0) as u64;
    let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

/// Exact nonnegative integer power of a rational.
pub fn rat_pow(base: &Rat, mut exp: u64) -> Rat {
    let mut result = Rat::one();
    let mut acc = base.clone();
    while exp > 0 {
        if exp & 1 == 1 {
            result *= &acc;
        }
        exp >>= 1;
        if exp > 0 {
            acc = &acc * &acc;
        }
    }
    result
}

/// Nearest rational to `x` with denominator at most `max_den`, by walking
/// continued-fraction convergents.
pub fn rationalize(x: f64, max_den: u64) -> Option<Rat> {
    if !x.is_finite() {
        return None;
    }
    let max_den = max_den.max(1);
    // Convergents p/q of the continued fraction of x.
    let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
    let (mut p1, mut q1) = (BigInt::from(x.floor() as i64), BigInt::one());
    let mut frac = x - x.floor();
    let cap = BigInt::from(max_den);
    for _ in 0..64 {
        if frac.abs() < 1e-18 {
            break;
        }
        let inv = 1.0 / frac;
        if !inv.is_finite() || inv.abs() >= 9e15 {
            break;
        }
        let a = BigInt::from(inv.floor() as i64);
        let p2 = &a * &p1 + &p0;
        let q2 = &a * &q1 + &q0;
        if q2 > cap {
            // Best semiconvergent still within the cap.
            let k = (&cap - &q0) / &q1;
            if k > BigInt::zero() {
                let ps = &k * &p1 + &p0;
                let qs = &k * &q1 + &q0;
                let semi = Rat::new(ps, qs);
                let conv = Rat::new(p1.clone(), q1.clone());
                let xs = rat_to_f64(&semi);
                let xc = rat_to_f64(&conv);
                return Some(if (xs - x).abs() < (xc - x).abs() { semi } else { conv });
            }
            break;
        }
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        frac = inv - inv.floor();
    }
    Some(Rat::new(p1, q1))
}
