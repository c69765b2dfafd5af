//! Characters composed with polynomials on finite commutative rings.
//!
//! `R = ℤ/N₁ × … × ℤ/N_d` with componentwise operations. For a character
//! `χ_a(x) = e(Σ aᵢxᵢ/Nᵢ)` of `(R, +)` and a polynomial `q` over `R`, the
//! function `t ↦ χ(q(t))` has translation cocycle `t ↦ χ(q(t+s) − q(t))`,
//! and `q(t+s) − q(t)` has smaller degree, so `χ∘q ∈ F_{deg q}`. Only
//! finite rings are handled: every translation can then be checked.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::torus::TorusPoint;

/// Largest ring order accepted (elements are enumerated).
pub const MAX_RING_ORDER: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingSpec {
    moduli: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RingElement(pub Vec<u64>);

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u64::to_string).collect();
        write!(f, "{}", parts.join(":"))
    }
}

fn mulmod(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 * b as u128) % n as u128) as u64
}

fn addmod(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 + b as u128) % n as u128) as u64
}

fn parse_int(s: &str) -> Result<BigInt> {
    s.trim()
        .parse::<BigInt>()
        .map_err(|_| Error::parse(format!("expected an integer, got {:?}", s.trim())))
}

impl RingSpec {
    pub fn new(moduli: Vec<u64>) -> Result<Self> {
        if moduli.is_empty() {
            return Err(Error::InvalidRing("at least one modulus is required".into()));
        }
        let mut order: u64 = 1;
        for &n in &moduli {
            if n == 0 {
                return Err(Error::InvalidRing("moduli must be positive".into()));
            }
            order = order
                .checked_mul(n)
                .filter(|&o| o <= MAX_RING_ORDER)
                .ok_or_else(|| Error::InvalidRing(format!("ring order exceeds {MAX_RING_ORDER}")))?;
        }
        Ok(RingSpec { moduli })
    }

    /// Comma-separated moduli, e.g. `"12"` or `"4,6"`.
    pub fn parse(s: &str) -> Result<Self> {
        let moduli = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::parse(format!("bad modulus {:?}", p.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        RingSpec::new(moduli)
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub fn order(&self) -> usize {
        self.moduli.iter().product::<u64>() as usize
    }

    pub fn lcm(&self) -> u64 {
        self.moduli.iter().fold(1u64, |acc, &n| acc.lcm(&n))
    }

    pub fn zero(&self) -> RingElement {
        RingElement(vec![0; self.moduli.len()])
    }

    pub fn one(&self) -> RingElement {
        self.from_integer(&BigInt::from(1))
    }

    /// `k·1`.
    pub fn from_integer(&self, k: &BigInt) -> RingElement {
        RingElement(
            self.moduli
                .iter()
                .map(|&n| u64::try_from(k.mod_floor(&BigInt::from(n))).expect("residue fits"))
                .collect(),
        )
    }

    /// `"a"` (meaning `a·1`) or `"a:b:…"` with one residue per component.
    pub fn parse_element(&self, s: &str) -> Result<RingElement> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() == 1 {
            return Ok(self.from_integer(&parse_int(parts[0])?));
        }
        if parts.len() != self.moduli.len() {
            return Err(Error::parse(format!(
                "element {s:?} has {} components, ring has {}",
                parts.len(),
                self.moduli.len()
            )));
        }
        let mut out = Vec::with_capacity(parts.len());
        for (p, &n) in parts.iter().zip(&self.moduli) {
            out.push(u64::try_from(parse_int(p)?.mod_floor(&BigInt::from(n))).expect("residue fits"));
        }
        Ok(RingElement(out))
    }

    pub fn add(&self, a: &RingElement, b: &RingElement) -> RingElement {
        RingElement(
            a.0.iter()
                .zip(&b.0)
                .zip(&self.moduli)
                .map(|((&x, &y), &n)| addmod(x, y, n))
                .collect(),
        )
    }

    pub fn neg(&self, a: &RingElement) -> RingElement {
        RingElement(a.0.iter().zip(&self.moduli).map(|(&x, &n)| (n - x) % n).collect())
    }

    pub fn sub(&self, a: &RingElement, b: &RingElement) -> RingElement {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &RingElement, b: &RingElement) -> RingElement {
        RingElement(
            a.0.iter()
                .zip(&b.0)
                .zip(&self.moduli)
                .map(|((&x, &y), &n)| mulmod(x, y, n))
                .collect(),
        )
    }

    /// `k·a` for a non-negative integer `k`.
    pub fn scale(&self, k: u64, a: &RingElement) -> RingElement {
        RingElement(
            a.0.iter()
                .zip(&self.moduli)
                .map(|(&x, &n)| mulmod(k % n, x, n))
                .collect(),
        )
    }

    pub fn is_zero(&self, a: &RingElement) -> bool {
        a.0.iter().all(|&x| x == 0)
    }

    /// Position in [`RingSpec::elements`] (mixed radix, first component
    /// most significant).
    pub fn index(&self, a: &RingElement) -> usize {
        a.0.iter()
            .zip(&self.moduli)
            .fold(0usize, |acc, (&x, &n)| acc * n as usize + x as usize)
    }

    pub fn elements(&self) -> Vec<RingElement> {
        let mut out = vec![Vec::new()];
        for &n in &self.moduli {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..n).map(move |x| {
                        let mut v = prefix.clone();
                        v.push(x);
                        v
                    })
                })
                .collect();
        }
        out.into_iter().map(RingElement).collect()
    }

    fn check(&self, a: &RingElement) -> Result<()> {
        if a.0.len() != self.moduli.len() || a.0.iter().zip(&self.moduli).any(|(&x, &n)| x >= n) {
            return Err(Error::InvalidRing(format!("{a} is not a reduced element of the ring")));
        }
        Ok(())
    }
}

/// `χ_a(x) = e(Σ aᵢxᵢ/Nᵢ)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Character {
    weights: RingElement,
}

impl Character {
    pub fn new(ring: &RingSpec, weights: RingElement) -> Result<Self> {
        ring.check(&weights)?;
        Ok(Character { weights })
    }

    /// Same syntax as ring elements: `"5"` or `"1:2"`.
    pub fn parse(ring: &RingSpec, s: &str) -> Result<Self> {
        Character::new(ring, ring.parse_element(s)?)
    }

    pub fn weights(&self) -> &RingElement {
        &self.weights
    }

    /// Numerator of `χ(x)` over the denominator `ring.lcm()`.
    pub fn phase_numerator(&self, ring: &RingSpec, x: &RingElement) -> u64 {
        let l = ring.lcm();
        self.weights
            .0
            .iter()
            .zip(&x.0)
            .zip(&ring.moduli)
            .fold(0u64, |acc, ((&a, &xi), &n)| addmod(acc, mulmod(mulmod(a, xi, n), l / n, l), l))
    }

    pub fn eval(&self, ring: &RingSpec, x: &RingElement) -> TorusPoint {
        TorusPoint::from_rational(BigRational::new(
            self.phase_numerator(ring, x).into(),
            ring.lcm().into(),
        ))
    }
}

/// `q(t) = Σ cᵢtⁱ` over `R`; trailing zero coefficients are dropped, the
/// zero polynomial has no coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingPolynomial {
    coeffs: Vec<RingElement>,
}

impl RingPolynomial {
    pub fn new(ring: &RingSpec, coeffs: Vec<RingElement>) -> Result<Self> {
        for c in &coeffs {
            ring.check(c)?;
        }
        Ok(RingPolynomial::canonical(ring, coeffs))
    }

    fn canonical(ring: &RingSpec, mut coeffs: Vec<RingElement>) -> Self {
        while coeffs.last().is_some_and(|c| ring.is_zero(c)) {
            coeffs.pop();
        }
        RingPolynomial { coeffs }
    }

    /// Comma-separated coefficients `c₀,c₁,…`, each in element syntax.
    pub fn parse(ring: &RingSpec, s: &str) -> Result<Self> {
        if s.trim().is_empty() {
            return Err(Error::parse("empty polynomial"));
        }
        let coeffs = s
            .split(',')
            .map(|c| ring.parse_element(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(RingPolynomial::canonical(ring, coeffs))
    }

    pub fn coeffs(&self) -> &[RingElement] {
        &self.coeffs
    }

    /// Index of the highest nonzero coefficient; 0 for constants.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn eval(&self, ring: &RingSpec, t: &RingElement) -> RingElement {
        self.coeffs
            .iter()
            .rev()
            .fold(ring.zero(), |acc, c| ring.add(&ring.mul(&acc, t), c))
    }

    pub fn add(&self, ring: &RingSpec, other: &RingPolynomial) -> RingPolynomial {
        let len = self.coeffs.len().max(other.coeffs.len());
        let z = ring.zero();
        let coeffs = (0..len)
            .map(|i| ring.add(self.coeffs.get(i).unwrap_or(&z), other.coeffs.get(i).unwrap_or(&z)))
            .collect();
        RingPolynomial::canonical(ring, coeffs)
    }

    /// `t ↦ q(t + s)`, expanded binomially in `R`.
    pub fn shift(&self, ring: &RingSpec, s: &RingElement) -> RingPolynomial {
        let k = self.coeffs.len();
        let mut out = vec![ring.zero(); k];
        // row[j] = C(i, j) reduced per component, built by Pascal's rule
        let mut row: Vec<RingElement> = Vec::with_capacity(k);
        for (i, c) in self.coeffs.iter().enumerate() {
            row.push(ring.one());
            for j in (1..i).rev() {
                row[j] = ring.add(&row[j], &row[j - 1]);
            }
            // c·(t + s)^i = Σ_j c·C(i,j)·s^{i−j}·t^j
            let mut s_pow = ring.one();
            for j in (0..=i).rev() {
                let term = ring.mul(&ring.mul(c, &row[j]), &s_pow);
                out[j] = ring.add(&out[j], &term);
                s_pow = ring.mul(&s_pow, s);
            }
        }
        RingPolynomial::canonical(ring, out)
    }
}

/// `Δ_s q(t) = q(t + s) − q(t)`; the degree drops for nonconstant `q`.
pub fn cocycle_reduce(ring: &RingSpec, q: &RingPolynomial, s: &RingElement) -> RingPolynomial {
    let shifted = q.shift(ring, s);
    let z = ring.zero();
    let coeffs = (0..shifted.coeffs.len().max(q.coeffs.len()))
        .map(|i| ring.sub(shifted.coeffs.get(i).unwrap_or(&z), q.coeffs.get(i).unwrap_or(&z)))
        .collect();
    RingPolynomial::canonical(ring, coeffs)
}

/// `χ(q(t))` for every `t`, in [`RingSpec::elements`] order.
pub fn char_poly_fn(ring: &RingSpec, chi: &Character, q: &RingPolynomial) -> Vec<TorusPoint> {
    ring.elements().iter().map(|t| chi.eval(ring, &q.eval(ring, t))).collect()
}

fn phase_table(ring: &RingSpec, elements: &[RingElement], chi: &Character, q: &RingPolynomial) -> Vec<u64> {
    elements
        .iter()
        .map(|t| chi.phase_numerator(ring, &q.eval(ring, t)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplayFailure {
    pub level: usize,
    pub t: RingElement,
    pub s: RingElement,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RingReplay {
    /// `(level, t, s)` triples checked.
    pub checks: usize,
    /// Each chain entry is the reduction of the previous one by its shift.
    pub links: bool,
    /// `χ(g(t+s)) = χ(g(t))·χ(Δ_s g(t))` at every chain level.
    pub cocycle_identity: bool,
    /// `deg Δ_s g < deg g` for every nonconstant level and every `s`.
    pub degree_descent: bool,
    pub first_failure: Option<ReplayFailure>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RingCertificate {
    pub moduli: Vec<u64>,
    pub character: RingElement,
    /// `deg q`: the claim is `χ∘q ∈ F_depth`.
    pub depth: usize,
    /// `q, Δ_{s₁}q, Δ_{s₂}Δ_{s₁}q, …` ending at the first constant.
    pub chain: Vec<RingPolynomial>,
    pub shifts: Vec<RingElement>,
    pub replay: RingReplay,
}

/// Builds the chain with shift `1` at every step and replays every level
/// against every translation of `R`.
pub fn certify_ring(ring: &RingSpec, chi: &Character, q: &RingPolynomial) -> RingCertificate {
    let one = ring.one();
    let mut chain = vec![q.clone()];
    let mut shifts = Vec::new();
    while !chain.last().expect("non-empty").is_constant() {
        let next = cocycle_reduce(ring, chain.last().expect("non-empty"), &one);
        shifts.push(one.clone());
        chain.push(next);
    }
    let replay = replay_chain(ring, chi, &chain, &shifts);
    RingCertificate {
        moduli: ring.moduli.clone(),
        character: chi.weights.clone(),
        depth: q.degree(),
        chain,
        shifts,
        replay,
    }
}

/// Exhaustive check of the chain: at each level `g`, for every `s ∈ R`, the
/// symbolic `Δ_s g` must have smaller degree and reproduce the quotient
/// `χ(g(t+s))/χ(g(t))` at every `t ∈ R`.
pub fn replay_chain(
    ring: &RingSpec,
    chi: &Character,
    chain: &[RingPolynomial],
    shifts: &[RingElement],
) -> RingReplay {
    let elements = ring.elements();
    let l = ring.lcm();
    let size = elements.len();
    let mut first_failure = None;
    let mut cocycle_identity = true;
    let mut degree_descent = true;
    let mut links = shifts.len() + 1 == chain.len() && chain.last().is_some_and(RingPolynomial::is_constant);
    for (level, g) in chain.iter().enumerate() {
        if let (Some(s), Some(next)) = (shifts.get(level), chain.get(level + 1)) {
            if cocycle_reduce(ring, g, s) != *next {
                links = false;
                first_failure.get_or_insert_with(|| ReplayFailure {
                    level,
                    t: ring.zero(),
                    s: s.clone(),
                    reason: "chain link is not the reduction by its shift".into(),
                });
            }
        }
        let table = phase_table(ring, &elements, chi, g);
        // per shift: (descent ok, first t where the identity fails)
        let results: Vec<(bool, Option<usize>)> = elements
            .par_iter()
            .map(|s| {
                let d = cocycle_reduce(ring, g, s);
                let descent = g.is_constant() || d.degree() < g.degree();
                let bad = elements.iter().enumerate().find_map(|(ti, t)| {
                    let shifted = ring.index(&ring.add(t, s));
                    let rhs = addmod(table[ti], chi.phase_numerator(ring, &d.eval(ring, t)), l);
                    (table[shifted] != rhs).then_some(ti)
                });
                (descent, bad)
            })
            .collect();
        for (si, (descent, bad)) in results.into_iter().enumerate() {
            if !descent {
                degree_descent = false;
                first_failure.get_or_insert_with(|| ReplayFailure {
                    level,
                    t: ring.zero(),
                    s: elements[si].clone(),
                    reason: "degree did not drop".into(),
                });
            }
            if let Some(ti) = bad {
                cocycle_identity = false;
                first_failure.get_or_insert_with(|| ReplayFailure {
                    level,
                    t: elements[ti].clone(),
                    s: elements[si].clone(),
                    reason: "cocycle identity fails".into(),
                });
            }
        }
    }
    RingReplay {
        checks: chain.len() * size * size,
        links,
        cocycle_identity,
        degree_descent,
        pass: links && cocycle_identity && degree_descent,
        first_failure,
    }
}

impl FromStr for RingSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RingSpec::parse(s)
    }
}
