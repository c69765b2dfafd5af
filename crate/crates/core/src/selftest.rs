//! Bundled invariant suite.
//!
//! Every check draws its cases from a ChaCha generator with a fixed seed
//! and reports counts and counterexamples only, so two runs with the same
//! configuration produce identical reports. Checks that exercise an
//! operation take it through [`Ops`], which lets tests confirm that a
//! broken implementation is caught.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bicyclic::{
    self, embedding_check, f1_eval, f2_cocycle_partners, f2_eval, idempotent_collapse, lemma5_check, rewrite_word,
    BicyclicElement, BicyclicF1, BicyclicF2, CollapseRelation,
};
use crate::certify::{certify, verify_certificate, SampledFunction, DEFAULT_TOLERANCE};
use crate::ergodic::{birkhoff_average, exact_phase_counts, weyl_kernel, ExactKernel};
use crate::phase::PhasePolynomial;
use crate::ring::{certify_ring, Character, RingPolynomial, RingSpec};
use crate::semigroup::{
    character_span_dimension, f1_replay, idempotent_fixed_check, solve_f1, solve_fk, FiniteSemigroup,
};
use crate::torus::{frac, Mode, TorusPoint};

pub const DEFAULT_SEED: u64 = 0x5eed_0ff1_e1d5;

/// Operations under test.
#[derive(Clone, Copy)]
pub struct Ops {
    pub bc_mul: fn(BicyclicElement, BicyclicElement) -> BicyclicElement,
}

impl Default for Ops {
    fn default() -> Self {
        Ops {
            bc_mul: bicyclic::bc_mul,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelftestConfig {
    pub mode: Mode,
    pub seed: u64,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        SelftestConfig {
            mode: Mode::Exact,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub module: String,
    pub name: String,
    pub cases: usize,
    pub pass: bool,
    pub counterexample: Option<Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub mode: Mode,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    pub pass: bool,
}

impl SelftestReport {
    pub fn first_failure(&self) -> Option<&CheckResult> {
        self.checks.iter().find(|c| !c.pass)
    }

    /// One line per check: module, name, case count, verdict.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "selftest mode={} seed={:#x}", self.mode, self.seed);
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{:<16} {:<36} {:>7}  {}",
                c.module,
                c.name,
                c.cases,
                if c.pass { "PASS" } else { "FAIL" }
            );
        }
        let _ = writeln!(out, "overall: {}", if self.pass { "PASS" } else { "FAIL" });
        out
    }
}

struct Check {
    module: &'static str,
    name: &'static str,
    cases: usize,
    counterexample: Option<Value>,
}

impl Check {
    fn new(module: &'static str, name: &'static str) -> Self {
        Check {
            module,
            name,
            cases: 0,
            counterexample: None,
        }
    }

    /// Counts a case; records the first failing one.
    fn case(&mut self, ok: bool, witness: impl FnOnce() -> Value) {
        self.cases += 1;
        if !ok && self.counterexample.is_none() {
            self.counterexample = Some(witness());
        }
    }

    fn finish(self) -> CheckResult {
        CheckResult {
            module: self.module.into(),
            name: self.name.into(),
            cases: self.cases,
            pass: self.counterexample.is_none(),
            counterexample: self.counterexample,
        }
    }
}

pub fn random_exact_poly(rng: &mut impl Rng, max_degree: usize, max_den: i64) -> PhasePolynomial {
    let degree = rng.random_range(0..=max_degree);
    let coeffs: Vec<(i64, i64)> = (0..=degree)
        .map(|_| {
            let den = rng.random_range(1..=max_den);
            (rng.random_range(0..den), den)
        })
        .collect();
    PhasePolynomial::exact(&coeffs)
}

pub fn random_float_poly(rng: &mut impl Rng, max_degree: usize) -> PhasePolynomial {
    let degree = rng.random_range(1..=max_degree);
    let coeffs: Vec<f64> = (0..=degree).map(|_| rng.random::<f64>()).collect();
    PhasePolynomial::float(&coeffs)
}

fn random_point(rng: &mut impl Rng, mode: Mode) -> TorusPoint {
    match mode {
        Mode::Exact => {
            let den = rng.random_range(1..=12);
            TorusPoint::exact(rng.random_range(0..den), den)
        }
        Mode::Float => TorusPoint::float(rng.random::<f64>()),
    }
}

fn random_poly(rng: &mut impl Rng, mode: Mode, max_degree: usize) -> PhasePolynomial {
    match mode {
        Mode::Exact => random_exact_poly(rng, max_degree, 16),
        Mode::Float => random_float_poly(rng, max_degree),
    }
}

fn agree(a: &TorusPoint, b: &TorusPoint) -> bool {
    agree_within(a, b, 1e-12)
}

fn agree_within(a: &TorusPoint, b: &TorusPoint, tol: f64) -> bool {
    match (a, b) {
        (TorusPoint::Exact(_), TorusPoint::Exact(_)) => a == b,
        _ => a.phase_gap(b).abs() <= tol,
    }
}

/// Evaluation range for identities between float polynomials whose
/// coefficients were computed (and rounded) separately: a coefficient
/// error of one ulp grows like `|n|ᵏ`.
fn eval_range(mode: Mode) -> i64 {
    match mode {
        Mode::Exact => 1000,
        Mode::Float => 16,
    }
}

fn poly_json(p: &PhasePolynomial) -> Value {
    serde_json::to_value(p).unwrap_or(Value::Null)
}

pub fn selftest(config: &SelftestConfig) -> SelftestReport {
    selftest_with(config, &Ops::default())
}

pub fn selftest_with(config: &SelftestConfig, ops: &Ops) -> SelftestReport {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mode = config.mode;
    let checks = vec![
        torus_group_laws(&mut rng, mode),
        shift_consistency(&mut rng, mode),
        product_rule(&mut rng, mode),
        certify_roundtrip(&mut rng, mode),
        descent_to_constant(&mut rng, mode),
        bicyclic_associativity(&mut rng, ops),
        bicyclic_partners(&mut rng, mode),
        bicyclic_lemma5_embedding(&mut rng, mode),
        bicyclic_collapse(),
        finite_examples(),
        abelian_duals(),
        random_semigroups(&mut rng),
        ring_replay(&mut rng),
        kernel_agreement(&mut rng, mode),
        exact_period_sums(&mut rng),
    ];
    let pass = checks.iter().all(|c| c.pass);
    SelftestReport {
        mode,
        seed: config.seed,
        checks,
        pass,
    }
}

fn torus_group_laws(rng: &mut impl Rng, mode: Mode) -> CheckResult {
    let mut c = Check::new("phase-core", "torus group laws");
    for _ in 0..200 {
        let (a, b, d) = (random_point(rng, mode), random_point(rng, mode), random_point(rng, mode));
        let assoc = agree(
            &a.mul(&b).unwrap().mul(&d).unwrap(),
            &a.mul(&b.mul(&d).unwrap()).unwrap(),
        );
        let comm = agree(&a.mul(&b).unwrap(), &b.mul(&a).unwrap());
        let inv = agree(&a.mul(&a.inv()).unwrap(), &TorusPoint::zero(mode));
        c.case(assoc && comm && inv, || json!({"a": a, "b": b, "c": d}));
    }
    c.finish()
}

fn shift_consistency(rng: &mut impl Rng, mode: Mode) -> CheckResult {
    let mut c = Check::new("phase-core", "shift matches evaluation");
    for _ in 0..100 {
        let p = random_poly(rng, mode, 5);
        let s = rng.random_range(-50..=50i64);
        let range = eval_range(mode);
        let n = rng.random_range(-range..=range);
        let ok = agree_within(&p.shift(s).eval_i64(n), &p.eval_i64(n + s), DEFAULT_TOLERANCE);
        c.case(ok, || json!({"p": poly_json(&p), "s": s, "n": n}));
    }
    c.finish()
}

fn product_rule(rng: &mut impl Rng, mode: Mode) -> CheckResult {
    let mut c = Check::new("phase-core", "product rule for cocycles");
    for _ in 0..100 {
        let (p, q) = (random_poly(rng, mode, 4), random_poly(rng, mode, 4));
        let s = rng.random_range(-20..=20i64);
        let lhs = p.multiply(&q).unwrap().cocycle_quotient(s);
        let rhs = p.cocycle_quotient(s).multiply(&q.cocycle_quotient(s)).unwrap();
        let ok = match mode {
            Mode::Exact => lhs == rhs,
            Mode::Float => (-10..=10).all(|n| agree_within(&lhs.eval_i64(n), &rhs.eval_i64(n), DEFAULT_TOLERANCE)),
        };
        c.case(ok, || json!({"p": poly_json(&p), "q": poly_json(&q), "s": s}));
    }
    c.finish()
}

fn certify_roundtrip(rng: &mut impl Rng, mode: Mode) -> CheckResult {
    let mut c = Check::new("weyl-certify", "certify then verify");
    let shifts: Vec<i64> = (-10..=10).collect();
    for _ in 0..60 {
        let p = random_poly(rng, mode, 5);
        let cert = certify(&p);
        let f = SampledFunction::from_polynomial(&p, 24);
        let report = verify_certificate(&f, &cert, &shifts, DEFAULT_TOLERANCE);
        let json_ok = serde_json::to_string(&cert)
            .ok()
            .and_then(|s| serde_json::from_str::<crate::certify::DistalityCertificate>(&s).ok())
            .is_some_and(|back| back == cert);
        let ok = report.as_ref().is_ok_and(|r| r.pass) && cert.depth == p.degree() && json_ok;
        c.case(ok, || json!({"p": poly_json(&p)}));
    }
    c.finish()
}

fn descent_to_constant(rng: &mut impl Rng, mode: Mode) -> CheckResult {
    let mut c = Check::new("weyl-certify", "k cocycle quotients reach a constant");
    for _ in 0..100 {
        let p = random_poly(rng, mode, 5);
        let mut q = p.clone();
        for _ in 0..p.degree() {
            q = q.cocycle_quotient(rng.random_range(1..=7));
        }
        c.case(q.is_constant(), || json!({"p": poly_json(&p)}));
    }
    c.finish()
}

fn bicyclic_associativity(rng: &mut impl Rng, ops: &Ops) -> CheckResult {
    let mut c = Check::new("bicyclic", "associativity and identity");
    let mul = ops.bc_mul;
    let word = |x: BicyclicElement| format!("{}{}", "q".repeat(x.m as usize), "p".repeat(x.n as usize));
    for _ in 0..300 {
        let mut el = || BicyclicElement::new(rng.random_range(0..=1000), rng.random_range(0..=1000));
        let (a, b, d) = (el(), el(), el());
        let assoc = mul(mul(a, b), d) == mul(a, mul(b, d));
        let ident = mul(a, BicyclicElement::ONE) == a && mul(BicyclicElement::ONE, a) == a;
        let rewrite = mul(a, b) == rewrite_word(&(word(a) + &word(b)));
        c.case(assoc && ident && rewrite, || {
            json!({"a": [a.m, a.n], "b": [b.m, b.n], "c": [d.m, d.n]})
        });
    }
    let pq = mul(BicyclicElement::P, BicyclicElement::Q) == BicyclicElement::ONE;
    let qp = mul(BicyclicElement::Q, BicyclicElement::P) != BicyclicElement::ONE;
    c.case(pq && qp, || json!({"relation": "pq = 1 != qp"}));
    c.finish()
}

fn bicyclic_partners(rng: &mut impl Rng, mode: Mode) -> CheckResult {
    let mut c = Check::new("bicyclic", "F2 cocycle partners on window 8");
    for _ in 0..20 {
        let f = BicyclicF2::new(random_point(rng, mode), random_point(rng, mode), random_point(rng, mode))
            .expect("same mode");
        let (fp, fq) = f2_cocycle_partners(&f);
        let ok = bicyclic::window_elements(8).into_iter().all(|x| {
            let fx = f2_eval(&f, x);
            agree(
                &f2_eval(&f, bicyclic::bc_mul(x, BicyclicElement::P)),
                &f1_eval(&fp, x).mul(&fx).unwrap(),
            ) && agree(
                &f2_eval(&f, bicyclic::bc_mul(x, BicyclicElement::Q)),
                &f1_eval(&fq, x).mul(&fx).unwrap(),
            )
        });
        c.case(ok, || json!({"f": f}));
    }
    c.finish()
}

fn bicyclic_lemma5_embedding(rng: &mut impl Rng, mode: Mode) -> CheckResult {
    let mut c = Check::new("bicyclic", "f(p)f(q) = f(1)^2 and F1 in F2");
    for _ in 0..50 {
        let f = BicyclicF1::new(random_point(rng, mode), random_point(rng, mode)).expect("same mode");
        c.case(lemma5_check(&f) && embedding_check(&f, 6), || json!({"f": f}));
    }
    c.finish()
}

fn bicyclic_collapse() -> CheckResult {
    let mut c = Check::new("bicyclic", "idempotent quotient collapse");
    for rel in [CollapseRelation::P, CollapseRelation::Q] {
        let ok = idempotent_collapse(rel, 4).is_ok_and(|r| r.constants_only);
        c.case(ok, || json!({"relation": rel}));
    }
    let free = idempotent_collapse(CollapseRelation::None, 4)
        .is_ok_and(|r| r.solution.dimension() == 2 && r.matches_f1_family);
    c.case(free, || json!({"relation": "none"}));
    c.finish()
}

fn finite_examples() -> CheckResult {
    let mut c = Check::new("finite-semigroup", "right/left zero tables");
    for n in 2..=5 {
        let rz = FiniteSemigroup::right_zero(n);
        let sol = solve_f1(&rz);
        c.case(sol.is_constants_only() && idempotent_fixed_check(&rz, &sol).pass, || {
            json!({"table": "right-zero", "n": n})
        });
        let lz = FiniteSemigroup::left_zero(n);
        let sol = solve_f1(&lz);
        let all = sol.dimension() == n && sol.torsion.is_empty();
        c.case(all && idempotent_fixed_check(&lz, &sol).pass, || {
            json!({"table": "left-zero", "n": n})
        });
    }
    c.finish()
}

fn abelian_duals() -> CheckResult {
    let mut c = Check::new("finite-semigroup", "abelian group duals");
    for n in 1..=8 {
        let g = FiniteSemigroup::cyclic_group(n);
        c.case(character_span_dimension(&g).ok() == Some(n), || json!({"group": format!("Z/{n}")}));
    }
    let z2 = FiniteSemigroup::cyclic_group(2);
    let v4 = FiniteSemigroup::direct_product(&z2, &z2);
    c.case(character_span_dimension(&v4).ok() == Some(4), || json!({"group": "Z/2 x Z/2"}));
    c.finish()
}

fn random_semigroups(rng: &mut impl Rng) -> CheckResult {
    let mut c = Check::new("finite-semigroup", "random transformation semigroups");
    let mut built = 0;
    while built < 12 {
        let degree = rng.random_range(2..=4usize);
        let gens: Vec<Vec<usize>> = (0..rng.random_range(1..=2))
            .map(|_| (0..degree).map(|_| rng.random_range(0..degree)).collect())
            .collect();
        let Some(s) = FiniteSemigroup::from_transformations(&gens, degree, 40) else {
            continue;
        };
        built += 1;
        let sol = solve_f1(&s);
        let replay_free = sol.free.iter().all(|g| {
            let f: Vec<BigRational> = g.f.iter().map(|x| BigRational::from_integer(x.clone())).collect();
            f1_replay(&s, &f).is_ok_and(|c| c.iter().zip(&g.c).all(|(a, b)| *a == frac(&BigRational::from_integer(b.clone()))))
        });
        let replay_torsion = sol.torsion.iter().all(|g| f1_replay(&s, &g.f).as_ref() == Ok(&g.c));
        let idem = idempotent_fixed_check(&s, &sol).pass;
        let agree_k1 = solve_fk(&s, 1).is_ok_and(|fam| {
            fam.family.dimension() == sol.dimension() && fam.family.torsion_orders() == sol.torsion_orders()
        });
        c.case(replay_free && replay_torsion && idem && agree_k1, || {
            json!({"generators": gens, "table": s.to_text()})
        });
    }
    c.finish()
}

fn ring_replay(rng: &mut impl Rng) -> CheckResult {
    let mut c = Check::new("ring-characters", "certificate replay");
    for _ in 0..15 {
        let moduli: Vec<u64> = if rng.random_bool(0.3) {
            vec![rng.random_range(2..=8), rng.random_range(2..=8)]
        } else {
            vec![rng.random_range(2..=64)]
        };
        let ring = RingSpec::new(moduli.clone()).expect("small ring");
        let rand_el = |rng: &mut dyn rand::RngCore| {
            crate::ring::RingElement(moduli.iter().map(|&n| rng.random_range(0..n)).collect())
        };
        let chi = Character::new(&ring, rand_el(rng)).expect("reduced");
        let degree = rng.random_range(0..=3);
        let coeffs = (0..=degree).map(|_| rand_el(rng)).collect();
        let q = RingPolynomial::new(&ring, coeffs).expect("reduced");
        let cert = certify_ring(&ring, &chi, &q);
        c.case(cert.replay.pass && cert.depth == q.degree(), || {
            json!({"moduli": moduli, "character": chi.weights(), "poly": q})
        });
    }
    c.finish()
}

fn kernel_agreement(rng: &mut impl Rng, mode: Mode) -> CheckResult {
    let mut c = Check::new("ergodic", "kernel matches direct evaluation");
    for _ in 0..6 {
        let p = random_poly(rng, mode, 4);
        let ok = match mode {
            Mode::Exact => {
                let mut k = ExactKernel::new(&p, 0);
                (0..2000).all(|n| k.next_point() == p.eval_i64(n))
            }
            Mode::Float => weyl_kernel(&p, 1 << 14)
                .iter()
                .enumerate()
                .all(|(n, z)| (z - p.eval_i64(n as i64).to_complex()).norm() < 1e-9),
        };
        c.case(ok, || json!({"p": poly_json(&p)}));
    }
    if mode == Mode::Float {
        let p = PhasePolynomial::float(&[0.0, 0.0, std::f64::consts::FRAC_1_SQRT_2]);
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .ok()
                .and_then(|pool| pool.install(|| birkhoff_average(&p, 200_000, &[1000, 100_000]).ok()))
        };
        let (one, many) = (run(1), run(3));
        let ok = one.is_some()
            && one.as_ref().map(|s| s.checkpoints.iter().map(|c| (c.re.to_bits(), c.im.to_bits())).collect::<Vec<_>>())
                == many.as_ref().map(|s| s.checkpoints.iter().map(|c| (c.re.to_bits(), c.im.to_bits())).collect());
        c.case(ok, || json!({"p": poly_json(&p), "threads": [1, 3]}));
    }
    c.finish()
}

fn exact_period_sums(rng: &mut impl Rng) -> CheckResult {
    let mut c = Check::new("ergodic", "rational averages equal period sums");
    for _ in 0..10 {
        let p = random_exact_poly(rng, 3, 12);
        let n = rng.random_range(1..=5000u64);
        let direct = exact_phase_counts(&p, n);
        let den = crate::ergodic::common_denominator(&p);
        let period: u64 = den.clone().try_into().unwrap_or(u64::MAX);
        let full = exact_phase_counts(&p, period.min(n).max(1));
        let mut predicted = std::collections::BTreeMap::<BigInt, u64>::new();
        if period <= n {
            for (r, k) in &full.counts {
                *predicted.entry(r.clone()).or_default() += k * (n / period);
            }
            for (r, k) in exact_phase_counts(&p, n % period).counts {
                *predicted.entry(r).or_default() += k;
            }
        } else {
            predicted = direct.counts.clone();
        }
        predicted.retain(|_, v| !v.is_zero());
        c.case(predicted == direct.counts, || json!({"p": poly_json(&p), "n": n}));
    }
    c.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_passes() {
        let report = selftest(&SelftestConfig::default());
        assert!(report.pass, "{}", report.to_text());
    }

    #[test]
    fn float_suite_passes() {
        let report = selftest(&SelftestConfig {
            mode: Mode::Float,
            seed: DEFAULT_SEED,
        });
        assert!(report.pass, "{}\n{:?}", report.to_text(), report.first_failure());
    }

    #[test]
    fn deterministic_text() {
        let a = selftest(&SelftestConfig::default());
        let b = selftest(&SelftestConfig::default());
        assert_eq!(a.to_text(), b.to_text());
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    fn broken_mul(a: BicyclicElement, b: BicyclicElement) -> BicyclicElement {
        // cancels max(b, c) instead of min(b, c) in pᵇqᶜ
        let t = a.n.max(b.m);
        BicyclicElement::new(a.m + b.m.saturating_sub(t), a.n.saturating_sub(t) + b.n)
    }

    #[test]
    fn broken_multiplication_is_reported() {
        let report = selftest_with(&SelftestConfig::default(), &Ops { bc_mul: broken_mul });
        assert!(!report.pass);
        let failure = report.first_failure().unwrap();
        assert_eq!(failure.name, "associativity and identity");
        let witness = failure.counterexample.as_ref().unwrap();
        assert!(witness.get("a").is_some() && witness.get("b").is_some() && witness.get("c").is_some());
    }
}
