//! Evaluation of `n ↦ e(p(n))` along consecutive integers by finite
//! differences.
//!
//! For `deg p = k` the differences `Δʲp(n)`, `j = 0..k`, advance by
//! `Δʲp(n+1) = Δʲp(n) + Δʲ⁺¹p(n)` and `Δᵏp` is constant. The float kernel
//! runs this recurrence twice: on complex multipliers (one complex multiply
//! per difference per step) and, as the reference, on exact fixed-point
//! phases in units of `2⁻¹²⁸` with wrapping `u128` arithmetic. The
//! multipliers are re-anchored to the exact phases every block, and blocks
//! never exceed `2¹⁰` steps, so drift cannot compound over long runs.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::phase::{binomial, PhasePolynomial};
use crate::torus::{dyadic_parts, Mode, TorusPoint};

/// Upper bound on steps between re-anchors.
pub const RENORMALIZE_PERIOD: u64 = 1 << 10;

/// Steps between re-anchors for degree `k`: the phase error of `z₀` after
/// `j` steps grows like `jᵏ/k!` roundings.
pub fn anchor_block(k: usize) -> u64 {
    match k {
        0 | 1 => RENORMALIZE_PERIOD,
        2 => 256,
        3 => 128,
        4 => 32,
        _ => 16,
    }
}

/// A phase in `[0, 1)` as an integer multiple of `2⁻¹²⁸`. Doubles are
/// converted exactly unless they carry more than 128 fractional bits, in
/// which case the excess is truncated.
pub fn fixed_from_f64(theta: f64) -> u128 {
    match dyadic_parts(theta) {
        None => 0,
        Some((mant, bits)) if bits <= 128 => (mant as u128) << (128 - bits),
        Some((mant, bits)) if bits < 128 + 64 => (mant as u128) >> (bits - 128),
        Some(_) => 0,
    }
}

/// The top 53 bits of a fixed-point phase, exactly, as a double in `[0, 1)`.
pub fn fixed_to_f64(x: u128) -> f64 {
    (x >> 75) as f64 * (-53f64).exp2()
}

pub fn unit(phase: f64) -> Complex64 {
    let (s, c) = (std::f64::consts::TAU * phase).sin_cos();
    Complex64::new(c, s)
}

fn signed_binomial_row(j: usize) -> Vec<(bool, u128)> {
    (0..=j)
        .map(|i| {
            let c = binomial(j, i).to_u128().expect("small binomial");
            ((j - i) % 2 == 1, c)
        })
        .collect()
}

/// `p(n)` in fixed point for a float polynomial given by fixed coefficients.
fn fixed_eval(coeffs: &[u128], n: u64) -> u128 {
    let n = n as u128;
    coeffs
        .iter()
        .rev()
        .fold(0u128, |acc, &c| acc.wrapping_mul(n).wrapping_add(c))
}

/// `Δʲp(n0)` for `j = 0..=k`, exact mod 1 in fixed point.
fn fixed_differences(coeffs: &[u128], n0: u64) -> Vec<u128> {
    let k = coeffs.len() - 1;
    let values: Vec<u128> = (0..=k as u64).map(|i| fixed_eval(coeffs, n0 + i)).collect();
    (0..=k)
        .map(|j| {
            signed_binomial_row(j)
                .into_iter()
                .enumerate()
                .fold(0u128, |acc, (i, (neg, c))| {
                    let term = c.wrapping_mul(values[i]);
                    if neg {
                        acc.wrapping_sub(term)
                    } else {
                        acc.wrapping_add(term)
                    }
                })
        })
        .collect()
}

/// Fixed-point coefficients of a polynomial (exact phases are rounded down
/// to a multiple of `2⁻¹²⁸`, float phases converted exactly).
pub fn fixed_coefficients(p: &PhasePolynomial) -> Vec<u128> {
    p.coeffs()
        .iter()
        .map(|c| match c {
            TorusPoint::Float(x) => fixed_from_f64(*x),
            TorusPoint::Exact(r) => {
                let scaled: BigInt = (r.numer() << 128u32).div_floor(r.denom());
                scaled.to_u128().unwrap_or(0)
            }
        })
        .collect()
}

/// Exact fixed-point phase stream `p(n) mod 1` for `n = n0, n0+1, …`.
#[derive(Clone, Debug)]
pub struct FixedPhases {
    diffs: Vec<u128>,
}

impl FixedPhases {
    pub fn new(p: &PhasePolynomial, n0: u64) -> Self {
        FixedPhases {
            diffs: fixed_differences(&fixed_coefficients(p), n0),
        }
    }

    fn advance(&mut self) {
        for j in 0..self.diffs.len() - 1 {
            self.diffs[j] = self.diffs[j].wrapping_add(self.diffs[j + 1]);
        }
    }
}

impl Iterator for FixedPhases {
    type Item = u128;

    fn next(&mut self) -> Option<u128> {
        let out = self.diffs[0];
        self.advance();
        Some(out)
    }
}

/// Float kernel: yields `e(p(n))` for `n = n0, n0+1, …`.
#[derive(Clone, Debug)]
pub struct WeylKernel {
    phases: FixedPhases,
    z: Vec<Complex64>,
    block: u64,
    since_anchor: u64,
}

impl WeylKernel {
    pub fn new(p: &PhasePolynomial, n0: u64) -> Self {
        let phases = FixedPhases::new(p, n0);
        let mut kernel = WeylKernel {
            z: vec![Complex64::new(1.0, 0.0); phases.diffs.len()],
            phases,
            block: anchor_block(p.degree()),
            since_anchor: 0,
        };
        kernel.anchor();
        kernel
    }

    fn anchor(&mut self) {
        for (z, &d) in self.z.iter_mut().zip(&self.phases.diffs) {
            *z = unit(fixed_to_f64(d));
        }
        self.since_anchor = 0;
    }

    /// Exact phase of the value the next call to `next` returns.
    pub fn current_phase(&self) -> u128 {
        self.phases.diffs[0]
    }
}

impl Iterator for WeylKernel {
    type Item = Complex64;

    fn next(&mut self) -> Option<Complex64> {
        let out = self.z[0];
        self.phases.advance();
        for j in 0..self.z.len() - 1 {
            let next = self.z[j + 1];
            self.z[j] *= next;
        }
        self.since_anchor += 1;
        if self.since_anchor == self.block {
            self.anchor();
        }
        Some(out)
    }
}

/// Common denominator of an exact polynomial's coefficients.
pub fn common_denominator(p: &PhasePolynomial) -> BigInt {
    p.coeffs()
        .iter()
        .filter_map(TorusPoint::as_rational)
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

/// Exact kernel: residues `D·p(n) mod D` for `n = n0, n0+1, …`, where `D`
/// is the common denominator. Uses `u64` arithmetic when `D < 2⁶³`.
#[derive(Clone, Debug)]
pub enum ExactKernel {
    Small { den: u64, diffs: Vec<u64> },
    Big { den: BigInt, diffs: Vec<BigInt> },
}

impl ExactKernel {
    /// Panics if `p` is not in exact mode.
    pub fn new(p: &PhasePolynomial, n0: u64) -> Self {
        assert_eq!(p.mode(), Mode::Exact, "exact kernel needs exact coefficients");
        let den = common_denominator(p);
        let k = p.degree();
        let values: Vec<BigInt> = (0..=k as u64)
            .map(|i| {
                let v = p.eval(&BigInt::from(n0 + i));
                (v.as_rational().expect("exact") * BigRational::from_integer(den.clone())).to_integer()
            })
            .collect();
        let diffs: Vec<BigInt> = (0..=k)
            .map(|j| {
                let mut acc = BigInt::zero();
                for i in 0..=j {
                    let term = binomial(j, i) * &values[i];
                    if (j - i) % 2 == 1 {
                        acc -= term;
                    } else {
                        acc += term;
                    }
                }
                acc.mod_floor(&den)
            })
            .collect();
        match den.to_u64().filter(|&d| d < 1 << 63) {
            Some(d) => ExactKernel::Small {
                den: d,
                diffs: diffs.iter().map(|x| x.to_u64().expect("reduced")).collect(),
            },
            None => ExactKernel::Big { den, diffs },
        }
    }

    pub fn denominator(&self) -> BigInt {
        match self {
            ExactKernel::Small { den, .. } => BigInt::from(*den),
            ExactKernel::Big { den, .. } => den.clone(),
        }
    }

    /// Next residue, or `None` on the big path (use [`next_big`]).
    ///
    /// [`next_big`]: ExactKernel::next_big
    pub fn next_small(&mut self) -> Option<u64> {
        match self {
            ExactKernel::Small { den, diffs } => {
                let out = diffs[0];
                for j in 0..diffs.len() - 1 {
                    let s = diffs[j] + diffs[j + 1];
                    diffs[j] = if s >= *den { s - *den } else { s };
                }
                Some(out)
            }
            ExactKernel::Big { .. } => None,
        }
    }

    pub fn next_big(&mut self) -> BigInt {
        match self {
            ExactKernel::Small { .. } => BigInt::from(self.next_small().expect("small path")),
            ExactKernel::Big { den, diffs } => {
                let out = diffs[0].clone();
                for j in 0..diffs.len() - 1 {
                    let s = &diffs[j] + &diffs[j + 1];
                    diffs[j] = if &s >= den { s - &*den } else { s };
                }
                out
            }
        }
    }

    /// Next value as an exact torus point.
    pub fn next_point(&mut self) -> TorusPoint {
        let den = self.denominator();
        TorusPoint::from_rational(BigRational::new(self.next_big(), den))
    }
}

/// `e(p(n))` for `n = 0..count`: the float kernel for float polynomials and
/// the exact kernel, converted at the end, for exact ones.
pub fn weyl_kernel(p: &PhasePolynomial, count: usize) -> Vec<Complex64> {
    match p.mode() {
        Mode::Float => WeylKernel::new(p, 0).take(count).collect(),
        Mode::Exact => {
            let mut k = ExactKernel::new(p, 0);
            (0..count).map(|_| k.next_point().to_complex()).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_point_conversions() {
        assert_eq!(fixed_from_f64(0.5), 1u128 << 127);
        assert_eq!(fixed_from_f64(0.0), 0);
        assert_eq!(fixed_to_f64(fixed_from_f64(0.6180339887498949)), 0.6180339887498949);
        assert_eq!(fixed_from_f64(f64::MIN_POSITIVE), 0);
    }

    #[test]
    fn exact_kernel_matches_eval() {
        let p = PhasePolynomial::exact(&[(1, 3), (2, 7), (1, 8), (5, 6)]);
        let mut k = ExactKernel::new(&p, 0);
        for n in 0..500 {
            assert_eq!(k.next_point(), p.eval_i64(n));
        }
        let mut k = ExactKernel::new(&p, 1000);
        assert_eq!(k.next_point(), p.eval_i64(1000));
    }

    #[test]
    fn big_denominator_path() {
        let big = BigRational::new(BigInt::from(1), BigInt::from(u64::MAX) * 3);
        let p = PhasePolynomial::new(vec![TorusPoint::exact(0, 1), TorusPoint::from_rational(big)]).unwrap();
        let mut k = ExactKernel::new(&p, 0);
        assert!(matches!(k, ExactKernel::Big { .. }));
        for n in 0..50 {
            assert_eq!(k.next_point(), p.eval_i64(n));
        }
    }

    #[test]
    fn fixed_phases_match_float_eval() {
        let p = PhasePolynomial::float(&[0.1, std::f64::consts::FRAC_1_SQRT_2, 0.3, 0.123456789]);
        for (n, x) in FixedPhases::new(&p, 0).take(2000).enumerate() {
            let direct = p.eval_i64(n as i64).phase_f64();
            let gap = (fixed_to_f64(x) - direct).abs();
            assert!(gap < 1e-15 || (1.0 - gap) < 1e-15, "n = {n}");
        }
    }

    #[test]
    fn float_kernel_short_run() {
        let p = PhasePolynomial::float(&[0.25, 0.6180339887498949, std::f64::consts::FRAC_1_SQRT_2]);
        for (n, z) in WeylKernel::new(&p, 0).take(5000).enumerate() {
            let d = p.eval_i64(n as i64).to_complex();
            assert!((z - d).norm() < 1e-10, "n = {n}");
        }
    }

    #[test]
    fn constant_kernel() {
        let p = PhasePolynomial::float(&[0.2]);
        let v: Vec<_> = WeylKernel::new(&p, 7).take(3).collect();
        assert!(v.iter().all(|z| *z == v[0]));
    }
}
