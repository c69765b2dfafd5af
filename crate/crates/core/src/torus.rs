//! Points of the circle group stored as phases in `[0, 1)`.
//!
//! The point with phase `θ` stands for the unimodular complex number
//! `e^{2πiθ}`; the group law is phase addition modulo one. Two
//! representations coexist: exact rationals (every identity is decidable
//! with `==`) and doubles (for irrational rotation numbers). Float-mode
//! integer scaling is carried out on the exact dyadic value of the double,
//! so `θ·e mod 1` never loses the bits that a naive `θ * e as f64` would.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exact => f.write_str("exact"),
            Mode::Float => f.write_str("float"),
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            other => Err(Error::parse(format!("unknown mode {other:?}"))),
        }
    }
}

/// A unimodular complex number `e^{2πi·phase}` with `0 <= phase < 1`.
#[derive(Clone, Debug, PartialEq)]
pub enum TorusPoint {
    Exact(BigRational),
    Float(f64),
}

/// Reduces a rational into `[0, 1)`.
pub fn frac(r: &BigRational) -> BigRational {
    let floor = r.numer().div_floor(r.denom());
    BigRational::new(r.numer() - floor * r.denom(), r.denom().clone())
}

fn frac_f64(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    // rem_euclid may round tiny negatives up to exactly 1.0
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// `x * 2^e` without intermediate overflow or premature underflow.
fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

/// Splits a finite, non-negative double into `(mantissa, frac_bits)` with
/// `x = mantissa / 2^frac_bits` exactly and `mantissa` odd. Returns `None`
/// when `x` is an integer (its phase is zero).
pub(crate) fn dyadic_parts(x: f64) -> Option<(u64, u32)> {
    debug_assert!(x.is_finite() && x >= 0.0);
    if x == 0.0 {
        return None;
    }
    let bits = x.to_bits();
    let exp_field = ((bits >> 52) & 0x7ff) as i64;
    let frac_field = bits & ((1u64 << 52) - 1);
    let (mut mant, mut exp) = if exp_field == 0 {
        (frac_field, -1074)
    } else {
        (frac_field | (1u64 << 52), exp_field - 1075)
    };
    let tz = mant.trailing_zeros() as i64;
    mant >>= tz;
    exp += tz;
    if exp >= 0 {
        None
    } else {
        Some((mant, (-exp) as u32))
    }
}

/// `r / 2^bits` rounded to the nearest double.
pub(crate) fn biguint_over_pow2(r: &BigUint, bits: u32) -> f64 {
    let width = r.bits();
    if width == 0 {
        return 0.0;
    }
    let drop = width.saturating_sub(64);
    let top = (r >> drop).to_u64().expect("64-bit window");
    ldexp(top as f64, drop as i64 - bits as i64)
}

/// `(theta * e) mod 1` where `theta` is taken as the exact dyadic value of
/// the double.
pub(crate) fn float_scale_mod1(theta: f64, e: &BigInt) -> f64 {
    let Some((mant, bits)) = dyadic_parts(theta) else {
        return 0.0;
    };
    let modulus = BigInt::one() << bits;
    let prod = (e.mod_floor(&modulus) * BigInt::from(mant)).mod_floor(&modulus);
    let (_, mag) = prod.into_parts();
    frac_f64(biguint_over_pow2(&mag, bits))
}

impl TorusPoint {
    pub fn zero(mode: Mode) -> Self {
        match mode {
            Mode::Exact => TorusPoint::Exact(BigRational::zero()),
            Mode::Float => TorusPoint::Float(0.0),
        }
    }

    /// Exact phase `num/den` reduced into `[0, 1)`. Panics if `den == 0`.
    pub fn exact(num: i64, den: i64) -> Self {
        TorusPoint::from_rational(BigRational::new(num.into(), den.into()))
    }

    pub fn from_rational(r: BigRational) -> Self {
        TorusPoint::Exact(frac(&r))
    }

    /// Float phase reduced into `[0, 1)`. Panics on non-finite input.
    pub fn float(x: f64) -> Self {
        assert!(x.is_finite(), "non-finite phase {x}");
        TorusPoint::Float(frac_f64(x))
    }

    pub fn try_float(x: f64) -> Result<Self> {
        if x.is_finite() {
            Ok(TorusPoint::Float(frac_f64(x)))
        } else {
            Err(Error::parse(format!("non-finite phase {x}")))
        }
    }

    /// Phase of a nonzero complex number (float mode).
    pub fn from_complex(z: Complex64) -> Self {
        TorusPoint::float(z.im.atan2(z.re) / std::f64::consts::TAU)
    }

    pub fn mode(&self) -> Mode {
        match self {
            TorusPoint::Exact(_) => Mode::Exact,
            TorusPoint::Float(_) => Mode::Float,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            TorusPoint::Exact(r) => r.is_zero(),
            TorusPoint::Float(x) => *x == 0.0,
        }
    }

    pub fn phase_f64(&self) -> f64 {
        match self {
            TorusPoint::Exact(r) => r.to_f64().unwrap_or(0.0),
            TorusPoint::Float(x) => *x,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            TorusPoint::Exact(r) => Some(r),
            TorusPoint::Float(_) => None,
        }
    }

    /// Converts to the float representation (identity for float points).
    pub fn to_float(&self) -> TorusPoint {
        TorusPoint::Float(frac_f64(self.phase_f64()))
    }

    pub fn to_mode(&self, mode: Mode) -> Result<TorusPoint> {
        match (self, mode) {
            (_, Mode::Float) => Ok(self.to_float()),
            (TorusPoint::Exact(_), Mode::Exact) => Ok(self.clone()),
            (TorusPoint::Float(_), Mode::Exact) => Err(Error::ModeMismatch {
                left: Mode::Float,
                right: Mode::Exact,
            }),
        }
    }

    /// Group law: phases add modulo one.
    pub fn mul(&self, other: &TorusPoint) -> Result<TorusPoint> {
        match (self, other) {
            (TorusPoint::Exact(a), TorusPoint::Exact(b)) => Ok(TorusPoint::Exact(frac(&(a + b)))),
            (TorusPoint::Float(a), TorusPoint::Float(b)) => Ok(TorusPoint::Float(frac_f64(a + b))),
            _ => Err(Error::ModeMismatch {
                left: self.mode(),
                right: other.mode(),
            }),
        }
    }

    /// Inverse, which is also the complex conjugate.
    pub fn inv(&self) -> TorusPoint {
        match self {
            TorusPoint::Exact(a) => TorusPoint::Exact(frac(&-a)),
            TorusPoint::Float(a) => TorusPoint::Float(frac_f64(-a)),
        }
    }

    /// `self / other`. Float phases are subtracted directly so that equal
    /// inputs cancel to exactly zero.
    pub fn div(&self, other: &TorusPoint) -> Result<TorusPoint> {
        match (self, other) {
            (TorusPoint::Float(a), TorusPoint::Float(b)) => Ok(TorusPoint::Float(frac_f64(a - b))),
            _ => self.mul(&other.inv()),
        }
    }

    /// `self^e` for an arbitrary signed exponent.
    pub fn pow(&self, e: &BigInt) -> TorusPoint {
        match self {
            TorusPoint::Exact(a) => {
                let den = a.denom();
                let e_red = e.mod_floor(den);
                let num = (a.numer() * e_red).mod_floor(den);
                TorusPoint::Exact(BigRational::new(num, den.clone()))
            }
            TorusPoint::Float(a) => TorusPoint::Float(float_scale_mod1(*a, e)),
        }
    }

    pub fn pow_i64(&self, e: i64) -> TorusPoint {
        self.pow(&BigInt::from(e))
    }

    pub fn to_complex(&self) -> Complex64 {
        let (s, c) = (std::f64::consts::TAU * self.phase_f64()).sin_cos();
        Complex64::new(c, s)
    }

    /// Signed phase difference `self - other` folded into `[-1/2, 1/2)`,
    /// as a double. Exact points subtract exactly before rounding.
    pub fn phase_gap(&self, other: &TorusPoint) -> f64 {
        let d = match (self, other) {
            (TorusPoint::Exact(a), TorusPoint::Exact(b)) => frac(&(a - b)).to_f64().unwrap_or(0.0),
            _ => frac_f64(self.phase_f64() - other.phase_f64()),
        };
        if d >= 0.5 {
            d - 1.0
        } else {
            d
        }
    }

    /// Euclidean distance `|e(self) - e(other)|` between the complex values.
    pub fn chord_distance(&self, other: &TorusPoint) -> f64 {
        2.0 * (std::f64::consts::PI * self.phase_gap(other)).sin().abs()
    }
}

impl fmt::Display for TorusPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TorusPoint::Exact(r) if r.is_integer() => write!(f, "{}", r.numer()),
            TorusPoint::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            TorusPoint::Float(x) => write!(f, "{x:?}"),
        }
    }
}

/// One phase as written on a command line or in a list: `num/den` is exact,
/// a bare integer adapts to either mode, anything else is a decimal float.
#[derive(Clone, Debug, PartialEq)]
pub enum PhaseLiteral {
    Rational(BigRational),
    Integer(BigInt),
    Decimal(f64),
}

impl FromStr for PhaseLiteral {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::parse("empty phase"));
        }
        if let Some((num, den)) = s.split_once('/') {
            let num: BigInt = num
                .trim()
                .parse()
                .map_err(|_| Error::parse(format!("bad numerator in {s:?}")))?;
            let den: BigInt = den
                .trim()
                .parse()
                .map_err(|_| Error::parse(format!("bad denominator in {s:?}")))?;
            if den.is_zero() {
                return Err(Error::parse(format!("zero denominator in {s:?}")));
            }
            return Ok(PhaseLiteral::Rational(BigRational::new(num, den)));
        }
        if let Ok(i) = s.parse::<BigInt>() {
            return Ok(PhaseLiteral::Integer(i));
        }
        match s.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(PhaseLiteral::Decimal(x)),
            _ => Err(Error::parse(format!("cannot parse phase {s:?}"))),
        }
    }
}

impl PhaseLiteral {
    fn natural_mode(&self) -> Option<Mode> {
        match self {
            PhaseLiteral::Rational(_) => Some(Mode::Exact),
            PhaseLiteral::Integer(_) => None,
            PhaseLiteral::Decimal(_) => Some(Mode::Float),
        }
    }

    fn into_point(self, mode: Mode) -> TorusPoint {
        match (self, mode) {
            (PhaseLiteral::Rational(r), _) => TorusPoint::from_rational(r),
            (PhaseLiteral::Integer(_), Mode::Exact) => TorusPoint::zero(Mode::Exact),
            (PhaseLiteral::Integer(_), Mode::Float) => TorusPoint::zero(Mode::Float),
            (PhaseLiteral::Decimal(x), _) => TorusPoint::float(x),
        }
    }
}

/// Resolves a group of literals to one common mode. Integers follow the
/// others; rationals and decimals together are rejected. All-integer
/// groups default to exact.
pub fn resolve_literals(lits: Vec<PhaseLiteral>) -> Result<Vec<TorusPoint>> {
    let mut mode = None;
    for lit in &lits {
        match (mode, lit.natural_mode()) {
            (_, None) => {}
            (None, Some(m)) => mode = Some(m),
            (Some(a), Some(b)) if a != b => return Err(Error::ModeMismatch { left: a, right: b }),
            _ => {}
        }
    }
    let mode = mode.unwrap_or(Mode::Exact);
    Ok(lits.into_iter().map(|l| l.into_point(mode)).collect())
}

/// Parses a comma-separated phase list such as `"0,1/4"` or `"0,0,0.5"`.
pub fn parse_phase_list(s: &str) -> Result<Vec<TorusPoint>> {
    let lits = s
        .split(',')
        .map(str::parse::<PhaseLiteral>)
        .collect::<Result<Vec<_>>>()?;
    resolve_literals(lits)
}

impl FromStr for TorusPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lit: PhaseLiteral = s.parse()?;
        let mode = lit.natural_mode().unwrap_or(Mode::Exact);
        Ok(lit.into_point(mode))
    }
}

// JSON: exact phases are `["num","den"]` (decimal strings), floats are numbers.

impl Serialize for TorusPoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            TorusPoint::Exact(r) => [r.numer().to_string(), r.denom().to_string()].serialize(serializer),
            TorusPoint::Float(x) => serializer.serialize_f64(*x),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PointRepr {
    Exact([String; 2]),
    Float(f64),
}

pub(crate) fn rational_from_strings(num: &str, den: &str) -> Result<BigRational> {
    let num: BigInt = num.parse().map_err(|_| Error::parse(format!("bad numerator {num:?}")))?;
    let den: BigInt = den.parse().map_err(|_| Error::parse(format!("bad denominator {den:?}")))?;
    if den.is_zero() {
        return Err(Error::parse("zero denominator"));
    }
    Ok(BigRational::new(num, den))
}

impl<'de> Deserialize<'de> for TorusPoint {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        match PointRepr::deserialize(deserializer)? {
            PointRepr::Exact([n, d]) => rational_from_strings(&n, &d)
                .map(TorusPoint::from_rational)
                .map_err(D::Error::custom),
            PointRepr::Float(x) => TorusPoint::try_float(x).map_err(D::Error::custom),
        }
    }
}
