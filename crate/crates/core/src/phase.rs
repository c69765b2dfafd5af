//! Phase polynomials `n ↦ e^{2πi(θ₀ + θ₁n + … + θ_k nᵏ)}` on the integers.
//!
//! A product of functions `n ↦ λᵢ^{nⁱ}` is a single phase polynomial whose
//! coefficients are the phases of the `λᵢ`; the degree-`k` polynomials are
//! the concrete form of `F_k(ℤ, +)`. The translation cocycle of `p` by `s`
//! is the polynomial `p(n+s) − p(n)`, whose top coefficient always cancels.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::torus::{dyadic_parts, frac, parse_phase_list, Mode, TorusPoint};

#[derive(Clone, Debug, PartialEq)]
pub struct PhasePolynomial {
    mode: Mode,
    coeffs: Vec<TorusPoint>,
}

/// `C(n, k)` as a big integer.
pub(crate) fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

impl PhasePolynomial {
    /// Builds a polynomial from `θ₀..θ_k`; all coefficients must share a mode.
    /// Leading zero phases are dropped.
    pub fn new(coeffs: Vec<TorusPoint>) -> Result<Self> {
        let mode = coeffs
            .first()
            .map(TorusPoint::mode)
            .ok_or_else(|| Error::parse("phase polynomial needs at least one coefficient"))?;
        if let Some(bad) = coeffs.iter().find(|c| c.mode() != mode) {
            return Err(Error::ModeMismatch {
                left: mode,
                right: bad.mode(),
            });
        }
        let mut p = PhasePolynomial { mode, coeffs };
        p.canonicalize();
        Ok(p)
    }

    pub fn zero(mode: Mode) -> Self {
        PhasePolynomial {
            mode,
            coeffs: vec![TorusPoint::zero(mode)],
        }
    }

    pub fn constant(c: TorusPoint) -> Self {
        PhasePolynomial {
            mode: c.mode(),
            coeffs: vec![c],
        }
    }

    /// Exact polynomial from `(num, den)` pairs.
    pub fn exact(coeffs: &[(i64, i64)]) -> Self {
        Self::new(coeffs.iter().map(|&(n, d)| TorusPoint::exact(n, d)).collect())
            .expect("non-empty exact coefficients")
    }

    pub fn float(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&x| TorusPoint::float(x)).collect()).expect("non-empty float coefficients")
    }

    /// Parses `"0,1/4"` style coefficient lists.
    pub fn parse(s: &str) -> Result<Self> {
        Self::new(parse_phase_list(s)?)
    }

    fn canonicalize(&mut self) {
        while self.coeffs.len() > 1 && self.coeffs.last().is_some_and(TorusPoint::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[TorusPoint] {
        &self.coeffs
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() == 1
    }

    pub fn to_float(&self) -> PhasePolynomial {
        PhasePolynomial {
            mode: Mode::Float,
            coeffs: self.coeffs.iter().map(TorusPoint::to_float).collect(),
        }
    }

    /// Value at `n` as a torus point.
    pub fn eval(&self, n: &BigInt) -> TorusPoint {
        match self.mode {
            Mode::Exact => self.eval_exact(n),
            Mode::Float => TorusPoint::Float(self.eval_float(n)),
        }
    }

    pub fn eval_i64(&self, n: i64) -> TorusPoint {
        self.eval(&BigInt::from(n))
    }

    // Horner with reduction mod 1 at every step; the multiplier is first
    // reduced modulo the accumulator's denominator.
    fn eval_exact(&self, n: &BigInt) -> TorusPoint {
        let mut iter = self.coeffs.iter().rev().map(|c| c.as_rational().expect("exact coefficient"));
        let mut acc = iter.next().expect("non-empty").clone();
        for theta in iter {
            let den = acc.denom().clone();
            let n_red = n.mod_floor(&den);
            let scaled = BigRational::new(acc.numer() * n_red, den);
            acc = frac(&(scaled + theta));
        }
        TorusPoint::Exact(acc)
    }

    // Each term θᵢnⁱ mod 1 is formed from the exact dyadic value of θᵢ, so the
    // only rounding is the final conversion of each term and their sum.
    fn eval_float(&self, n: &BigInt) -> f64 {
        let n_mod = n.mod_floor(&(BigInt::one() << 128u32));
        let n_u = u128::try_from(n_mod).expect("reduced below 2^128");
        let mut sum = 0.0f64;
        let mut power: u128 = 1;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                power = power.wrapping_mul(n_u);
            }
            let theta = c.phase_f64();
            let Some((mant, bits)) = dyadic_parts(theta) else {
                continue;
            };
            let term = if bits <= 128 {
                let prod = power.wrapping_mul(mant as u128);
                let masked = if bits == 128 { prod } else { prod & ((1u128 << bits) - 1) };
                u128_over_pow2(masked, bits)
            } else {
                crate::torus::float_scale_mod1(theta, &n.pow(i as u32))
            };
            sum += term;
            if sum >= 1.0 {
                sum -= 1.0;
            }
        }
        TorusPoint::float(sum).phase_f64()
    }

    /// `q(n) = p(n + s)` by binomial expansion.
    pub fn shift(&self, s: i64) -> PhasePolynomial {
        self.shift_big(&BigInt::from(s))
    }

    pub fn shift_big(&self, s: &BigInt) -> PhasePolynomial {
        let k = self.degree();
        let mut out = Vec::with_capacity(k + 1);
        for j in 0..=k {
            let mut acc = TorusPoint::zero(self.mode);
            for i in j..=k {
                let e = binomial(i, j) * s.pow((i - j) as u32);
                acc = acc.mul(&self.coeffs[i].pow(&e)).expect("same mode");
            }
            out.push(acc);
        }
        let mut p = PhasePolynomial {
            mode: self.mode,
            coeffs: out,
        };
        p.canonicalize();
        p
    }

    /// The cocycle `f_s` with `f(n+s) = f_s(n)·f(n)`, i.e. `p(n+s) − p(n)`.
    pub fn cocycle_quotient(&self, s: i64) -> PhasePolynomial {
        self.cocycle_quotient_big(&BigInt::from(s))
    }

    pub fn cocycle_quotient_big(&self, s: &BigInt) -> PhasePolynomial {
        if self.is_constant() {
            return PhasePolynomial::zero(self.mode);
        }
        let shifted = self.shift_big(s);
        shifted.divide(self).expect("same mode")
    }

    /// Pointwise product: coefficient-wise phase addition.
    pub fn multiply(&self, other: &PhasePolynomial) -> Result<PhasePolynomial> {
        self.zip_with(other, TorusPoint::mul)
    }

    /// Pointwise quotient `self · conj(other)`.
    pub fn divide(&self, other: &PhasePolynomial) -> Result<PhasePolynomial> {
        self.zip_with(other, TorusPoint::div)
    }

    fn zip_with(
        &self,
        other: &PhasePolynomial,
        op: impl Fn(&TorusPoint, &TorusPoint) -> Result<TorusPoint>,
    ) -> Result<PhasePolynomial> {
        if self.mode != other.mode {
            return Err(Error::ModeMismatch {
                left: self.mode,
                right: other.mode,
            });
        }
        let len = self.coeffs.len().max(other.coeffs.len());
        let zero = TorusPoint::zero(self.mode);
        let coeffs = (0..len)
            .map(|i| {
                let a = self.coeffs.get(i).unwrap_or(&zero);
                let b = other.coeffs.get(i).unwrap_or(&zero);
                op(a, b)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut p = PhasePolynomial { mode: self.mode, coeffs };
        p.canonicalize();
        Ok(p)
    }

    /// Pointwise complex conjugate (all phases negated).
    pub fn conjugate(&self) -> PhasePolynomial {
        PhasePolynomial {
            mode: self.mode,
            coeffs: self.coeffs.iter().map(TorusPoint::inv).collect(),
        }
    }
}

fn u128_over_pow2(x: u128, bits: u32) -> f64 {
    if x == 0 {
        return 0.0;
    }
    let width = 128 - x.leading_zeros();
    let drop = width.saturating_sub(64);
    let top = (x >> drop) as u64;
    top as f64 * 2f64.powi(drop as i32 - bits as i32)
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    mode: Mode,
    coeffs: Vec<TorusPoint>,
}

impl Serialize for PhasePolynomial {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        PolyRepr {
            mode: self.mode,
            coeffs: self.coeffs.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PhasePolynomial {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = PolyRepr::deserialize(deserializer)?;
        if repr.coeffs.is_empty() {
            return Err(D::Error::custom("phase polynomial needs at least one coefficient"));
        }
        // bare JSON integers deserialize as floats; accept 0 in exact mode only
        // when it is written as a pair, so mismatches are reported
        if let Some(bad) = repr.coeffs.iter().find(|c| c.mode() != repr.mode) {
            return Err(D::Error::custom(format!(
                "coefficient {bad} does not match declared mode {}",
                repr.mode
            )));
        }
        PhasePolynomial::new(repr.coeffs).map_err(D::Error::custom)
    }
}
