//! Membership certificates for `F_k(ℤ, +)` and their numerical checks.
//!
//! Only translations are used as elements of the enveloping operator set.
//! General elements are limits of translations along ultrafilters and have
//! no finite representation; for a phase polynomial the translation
//! cocycle depends on the shift through polynomial coefficient formulas, so
//! a symbolic certificate covers every limit point at once. Reports carry
//! this restriction in their `sigma` field.

use num_bigint::BigInt;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::PhasePolynomial;
use crate::torus::{Mode, TorusPoint};

pub const SIGMA_NOTE: &str = "translations only: R_s f = f_s * f is checked for each listed shift s";

/// Default float-mode tolerance.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Chain `f, f_1, (f_1)_1, …` of shift-1 cocycle quotients ending in a
/// constant. `depth` is the level `k` of the claim `f ∈ F_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistalityCertificate {
    pub depth: usize,
    pub chain: Vec<PhasePolynomial>,
}

pub fn certify(p: &PhasePolynomial) -> DistalityCertificate {
    let mut chain = vec![p.clone()];
    while !chain.last().expect("non-empty").is_constant() {
        let next = chain.last().expect("non-empty").cocycle_quotient(1);
        chain.push(next);
    }
    DistalityCertificate {
        depth: p.degree(),
        chain,
    }
}

impl DistalityCertificate {
    pub fn head(&self) -> &PhasePolynomial {
        &self.chain[0]
    }

    /// The same chain read as the weaker claim `f ∈ F_{depth+1}`.
    pub fn raise_depth(&self) -> DistalityCertificate {
        DistalityCertificate {
            depth: self.depth + 1,
            chain: self.chain.clone(),
        }
    }

    /// Structural check: links are shift-1 cocycle quotients, degrees fall
    /// strictly, the tail is constant and the claimed depth covers the head.
    pub fn validate(&self) -> Result<()> {
        let head = self
            .chain
            .first()
            .ok_or_else(|| Error::InvalidCertificate("empty chain".into()))?;
        if head.degree() > self.depth {
            return Err(Error::InvalidCertificate(format!(
                "head has degree {} above claimed depth {}",
                head.degree(),
                self.depth
            )));
        }
        for (i, pair) in self.chain.windows(2).enumerate() {
            if pair[0].is_constant() {
                return Err(Error::InvalidCertificate(format!("chain continues past constant at link {i}")));
            }
            if pair[1] != pair[0].cocycle_quotient(1) {
                return Err(Error::InvalidCertificate(format!("link {i} is not a shift-1 cocycle quotient")));
            }
            if pair[1].degree() >= pair[0].degree() {
                return Err(Error::InvalidCertificate(format!("degree does not fall at link {i}")));
            }
        }
        if !self.chain.last().expect("non-empty").is_constant() {
            return Err(Error::InvalidCertificate("chain does not end in a constant".into()));
        }
        Ok(())
    }
}

/// Samples of a unimodular function on `[-M, M]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction {
    half_width: i64,
    values: Vec<TorusPoint>,
}

pub const UNIMODULAR_TOLERANCE: f64 = 1e-9;

impl SampledFunction {
    pub fn new(half_width: i64, values: Vec<TorusPoint>) -> Result<Self> {
        if half_width < 0 || values.len() as i64 != 2 * half_width + 1 {
            return Err(Error::parse(format!(
                "expected {} samples for half-width {half_width}, got {}",
                2 * half_width.max(0) + 1,
                values.len()
            )));
        }
        if let Some(first) = values.first() {
            let mode = first.mode();
            if let Some(bad) = values.iter().find(|v| v.mode() != mode) {
                return Err(Error::ModeMismatch {
                    left: mode,
                    right: bad.mode(),
                });
            }
        }
        Ok(SampledFunction { half_width, values })
    }

    /// Black-box complex samples; each must satisfy `||z| − 1| ≤ 1e−9`.
    pub fn from_complex(half_width: i64, values: &[Complex64]) -> Result<Self> {
        let points = values
            .iter()
            .enumerate()
            .map(|(i, z)| {
                let modulus = z.norm();
                if !modulus.is_finite() || (modulus - 1.0).abs() > UNIMODULAR_TOLERANCE {
                    Err(Error::NonUnimodular {
                        n: i as i64 - half_width,
                        modulus,
                    })
                } else {
                    Ok(TorusPoint::from_complex(*z))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(half_width, points)
    }

    pub fn from_polynomial(p: &PhasePolynomial, half_width: i64) -> Self {
        let values = (-half_width..=half_width).map(|n| p.eval_i64(n)).collect();
        SampledFunction { half_width, values }
    }

    pub fn from_fn(half_width: i64, f: impl Fn(i64) -> TorusPoint) -> Result<Self> {
        Self::new(half_width, (-half_width..=half_width).map(f).collect())
    }

    pub fn half_width(&self) -> i64 {
        self.half_width
    }

    pub fn mode(&self) -> Mode {
        self.values.first().map(TorusPoint::mode).unwrap_or(Mode::Exact)
    }

    pub fn values(&self) -> &[TorusPoint] {
        &self.values
    }

    pub fn get(&self, n: i64) -> Option<&TorusPoint> {
        if n.abs() > self.half_width {
            return None;
        }
        self.values.get((n + self.half_width) as usize)
    }

    /// Multiplies the sample at `n` by `e^{2πi·delta}`. The result is in
    /// float mode.
    pub fn perturbed(&self, n: i64, delta: &TorusPoint) -> Result<Self> {
        if n.abs() > self.half_width {
            return Err(Error::parse(format!("index {n} outside window")));
        }
        let mut values: Vec<TorusPoint> = self.values.iter().map(TorusPoint::to_float).collect();
        let idx = (n + self.half_width) as usize;
        values[idx] = values[idx].mul(&delta.to_float())?;
        Ok(SampledFunction {
            half_width: self.half_width,
            values,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct SampledRepr {
    mode: String,
    half_width: i64,
    values: serde_json::Value,
}

impl Serialize for SampledFunction {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SampledRepr {
            mode: self.mode().to_string(),
            half_width: self.half_width,
            values: serde_json::to_value(&self.values).map_err(serde::ser::Error::custom)?,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SampledFunction {
    /// Accepts `"exact"` (phase pairs), `"float"` (phase numbers) and
    /// `"complex"` (`[re, im]` pairs, checked for unimodularity).
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = SampledRepr::deserialize(deserializer)?;
        let result = match repr.mode.as_str() {
            "exact" | "float" => {
                let mode: Mode = repr.mode.parse().map_err(D::Error::custom)?;
                let values: Vec<TorusPoint> = serde_json::from_value(repr.values).map_err(D::Error::custom)?;
                if let Some(bad) = values.iter().find(|v| v.mode() != mode) {
                    return Err(D::Error::custom(format!("value {bad} does not match mode {mode}")));
                }
                SampledFunction::new(repr.half_width, values)
            }
            "complex" => {
                let pairs: Vec<[f64; 2]> = serde_json::from_value(repr.values).map_err(D::Error::custom)?;
                let zs: Vec<Complex64> = pairs.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
                SampledFunction::from_complex(repr.half_width, &zs)
            }
            other => return Err(D::Error::custom(format!("unknown sample mode {other:?}"))),
        };
        result.map_err(D::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftCheck {
    pub shift: i64,
    pub points: usize,
    pub max_error: f64,
    pub exact_match: bool,
    pub first_failure: Option<i64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub sigma: String,
    pub mode: Mode,
    pub tolerance: f64,
    pub depth: usize,
    pub structure_ok: bool,
    pub structure_error: Option<String>,
    pub shifts: Vec<ShiftCheck>,
    pub max_error: f64,
    pub pass: bool,
}

/// Checks `f(n+s) = f_s(n)·f(n)` on the window for every requested `s`,
/// with `f_s` recomputed symbolically from the certificate head.
///
/// When both samples and certificate are exact the comparison is equality;
/// otherwise the chord distance must stay within `tol`.
pub fn verify_certificate(
    f: &SampledFunction,
    cert: &DistalityCertificate,
    shifts: &[i64],
    tol: f64,
) -> Result<VerificationReport> {
    if let Some(&s) = shifts.iter().find(|s| s.abs() > f.half_width()) {
        return Err(Error::WindowTooSmall {
            half_width: f.half_width(),
            shift: s,
        });
    }
    let structure = cert.validate();
    let exact = f.mode() == Mode::Exact && cert.head().mode() == Mode::Exact;
    let m = f.half_width();
    let checks: Vec<ShiftCheck> = shifts
        .par_iter()
        .map(|&s| {
            let cocycle = cert.head().cocycle_quotient(s);
            let lo = (-m).max(-m - s);
            let hi = m.min(m - s);
            let mut max_error = 0.0f64;
            let mut exact_match = true;
            let mut first_failure = None;
            let mut points = 0;
            for n in lo..=hi {
                let lhs = f.get(n + s).expect("in window");
                let fn_ = f.get(n).expect("in window");
                let fs = cocycle.eval_i64(n);
                let (err, equal) = if exact {
                    let rhs = fs.mul(fn_).expect("exact");
                    let equal = &rhs == lhs;
                    (if equal { 0.0 } else { rhs.chord_distance(lhs) }, equal)
                } else {
                    let rhs = fs.to_float().mul(&fn_.to_float()).expect("float");
                    (rhs.chord_distance(&lhs.to_float()), false)
                };
                points += 1;
                let bad = if exact { !equal } else { err.is_nan() || err > tol };
                if bad && first_failure.is_none() {
                    first_failure = Some(n);
                }
                exact_match &= equal;
                max_error = max_error.max(err);
            }
            ShiftCheck {
                shift: s,
                points,
                max_error,
                exact_match: exact && exact_match,
                first_failure,
                pass: first_failure.is_none(),
            }
        })
        .collect();
    let max_error = checks.iter().map(|c| c.max_error).fold(0.0, f64::max);
    let pass = structure.is_ok() && checks.iter().all(|c| c.pass);
    Ok(VerificationReport {
        sigma: SIGMA_NOTE.to_string(),
        mode: if exact { Mode::Exact } else { Mode::Float },
        tolerance: tol,
        depth: cert.depth,
        structure_ok: structure.is_ok(),
        structure_error: structure.err().map(|e| e.to_string()),
        shifts: checks,
        max_error,
        pass,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "lowercase")]
pub enum F1Recovery {
    /// `f(n) = λⁿ·λ₁` on the whole window.
    Accepted { lambda: TorusPoint, lambda1: TorusPoint },
    Rejected { n: i64, error: f64 },
}

/// Recovers `f(n) = λⁿλ₁` from samples, or names the first `n` where the
/// samples leave `F₁`. Forward points `2..=M` are checked first, then
/// `f(−1) = λ⁻¹λ₁`, then `−2..=−M`.
pub fn recover_f1(f: &SampledFunction, tol: f64) -> Result<F1Recovery> {
    if f.half_width() < 2 {
        return Err(Error::WindowTooSmall {
            half_width: f.half_width(),
            shift: 2,
        });
    }
    let at = |n: i64| f.get(n).expect("in window");
    let lambda1 = at(0).clone();
    let lambda = at(1).div(at(0))?;
    let m = f.half_width();
    let order = (2..=m).chain(std::iter::once(-1)).chain((2..=m).map(|n| -n));
    for n in order {
        let predicted = lambda.pow_i64(n).mul(&lambda1)?;
        let actual = at(n);
        let ok = match f.mode() {
            Mode::Exact => &predicted == actual,
            Mode::Float => predicted.chord_distance(actual) <= tol,
        };
        if !ok {
            return Ok(F1Recovery::Rejected {
                n,
                error: predicted.chord_distance(actual),
            });
        }
    }
    Ok(F1Recovery::Accepted { lambda, lambda1 })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairProbe {
    pub a: i64,
    pub b: i64,
    pub delta: f64,
    pub argmin_shift: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub shift_range: i64,
    pub truncation: i64,
    pub pairs: Vec<PairProbe>,
    pub min_delta: f64,
}

pub const MAX_PROBE_SHIFT: i64 = 1 << 16;
pub const MAX_PROBE_TRUNCATION: i64 = 1 << 10;
pub const MAX_PROBE_OFFSET: i64 = 1 << 60;

/// Finite-window separation of translate pairs.
///
/// For `g = R_a f`, `h = R_b f` reports `min_{|s|≤S} d_M(R_s g, R_s h)` with
/// `d_M(u, v) = Σ_{|n|≤M} 2^{−|n|}·|u(n) − v(n)|`. A positive minimum is
/// evidence, not proof, that the pair is not proximal.
pub fn distality_probe(p: &PhasePolynomial, pairs: &[(i64, i64)], shift_range: i64, truncation: i64) -> Result<ProbeReport> {
    if !(0..=MAX_PROBE_SHIFT).contains(&shift_range) || !(0..=MAX_PROBE_TRUNCATION).contains(&truncation) {
        return Err(Error::InvalidInput(format!(
            "shift range must be in 0..={MAX_PROBE_SHIFT} and truncation in 0..={MAX_PROBE_TRUNCATION}"
        )));
    }
    let mut results = Vec::with_capacity(pairs.len());
    for &(a, b) in pairs {
        if a.abs() > MAX_PROBE_OFFSET || b.abs() > MAX_PROBE_OFFSET {
            return Err(Error::InvalidInput(format!("translate offsets must be within ±{MAX_PROBE_OFFSET}")));
        }
        let identical = (-truncation..=truncation).all(|n| p.eval_i64(n + a) == p.eval_i64(n + b));
        if identical {
            return Err(Error::IdenticalTranslates { a, b });
        }
        let reach = shift_range + truncation;
        let around = |c: i64| -> Vec<TorusPoint> { (c - reach..=c + reach).map(|n| p.eval_i64(n)).collect() };
        let (table_a, table_b) = (around(a), around(b));
        // index of n + s + c in the table around c
        let idx = |n: i64, s: i64| (n + s + reach) as usize;
        let at_a = |n: i64, s: i64| &table_a[idx(n, s)];
        let at_b = |n: i64, s: i64| &table_b[idx(n, s)];
        let distances: Vec<f64> = (-shift_range..=shift_range)
            .into_par_iter()
            .map(|s| {
                let mut d = 0.0;
                for n in -truncation..=truncation {
                    let w = 0.5f64.powi(n.unsigned_abs() as i32);
                    d += w * at_a(n, s).chord_distance(at_b(n, s));
                }
                d
            })
            .collect();
        let (idx, delta) = distances
            .iter()
            .enumerate()
            .fold((0usize, f64::INFINITY), |best, (i, &d)| if d < best.1 { (i, d) } else { best });
        results.push(PairProbe {
            a,
            b,
            delta,
            argmin_shift: idx as i64 - shift_range,
        });
    }
    let min_delta = results.iter().map(|r| r.delta).fold(f64::INFINITY, f64::min);
    Ok(ProbeReport {
        shift_range,
        truncation,
        pairs: results,
        min_delta,
    })
}

/// Largest number of shifts accepted from text.
pub const MAX_SHIFTS: usize = 1 << 16;

/// `"-10..10"` (inclusive range) or `"1,2,-3"`.
pub fn parse_shifts(s: &str) -> Result<Vec<i64>> {
    let s = s.trim();
    let int = |t: &str| {
        t.trim()
            .parse::<i64>()
            .map_err(|_| Error::parse(format!("bad shift {:?}", t.trim())))
    };
    // a leading minus is part of the first bound, not a separator
    if let Some(pos) = s.get(1..).and_then(|rest| rest.find("..")).map(|i| i + 1) {
        let (lo, hi) = (int(&s[..pos])?, int(&s[pos + 2..])?);
        if lo > hi {
            return Err(Error::parse(format!("empty shift range {s:?}")));
        }
        if (hi as i128 - lo as i128) >= MAX_SHIFTS as i128 {
            return Err(Error::parse(format!("shift range {s:?} is too long")));
        }
        return Ok((lo..=hi).collect());
    }
    let shifts = s.split(',').map(int).collect::<Result<Vec<_>>>()?;
    if shifts.len() > MAX_SHIFTS {
        return Err(Error::parse("too many shifts"));
    }
    Ok(shifts)
}

/// `"0:1,0:2,3:-4"`: translate pairs `(a, b)`.
pub fn parse_pairs(s: &str) -> Result<Vec<(i64, i64)>> {
    s.split(',')
        .map(|item| {
            let (a, b) = item
                .split_once(':')
                .ok_or_else(|| Error::parse(format!("expected a:b, got {:?}", item.trim())))?;
            let int = |t: &str| {
                t.trim()
                    .parse::<i64>()
                    .map_err(|_| Error::parse(format!("bad integer {:?}", t.trim())))
            };
            Ok((int(a)?, int(b)?))
        })
        .collect()
}

/// Samples `e^{2πi p(n)}` by direct complex exponentiation of the phase.
pub fn sample_complex(p: &PhasePolynomial, half_width: i64) -> Vec<Complex64> {
    (-half_width..=half_width)
        .map(|n| p.eval(&BigInt::from(n)).to_complex())
        .collect()
}
