//! The bicyclic monoid `⟨p, q | pq = 1⟩`.
//!
//! Every element has the unique normal form `qᵐpⁿ`, stored as `(m, n)`.
//! With `r = m − n`, `F₁` is the two-parameter family `μʳν^{1−r}` and `F₂`
//! the three-parameter family `λ^{(r²−r)/2} μ^{(r²+r)/2} ν^{1−r²}`, where
//! `λ = f(p)`, `μ = f(q)`, `ν = f(1)`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::semigroup::{solve_f1_partial, F1Solution, PartialTable};
use crate::torus::{Mode, TorusPoint};

/// Tolerance used by float-mode comparisons in this module.
pub const FLOAT_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BicyclicElement {
    /// Power of `q`.
    pub m: u64,
    /// Power of `p`.
    pub n: u64,
}

impl BicyclicElement {
    pub const ONE: BicyclicElement = BicyclicElement { m: 0, n: 0 };
    pub const P: BicyclicElement = BicyclicElement { m: 0, n: 1 };
    pub const Q: BicyclicElement = BicyclicElement { m: 1, n: 0 };

    pub fn new(m: u64, n: u64) -> Self {
        BicyclicElement { m, n }
    }

    /// `r = m − n`.
    pub fn r(&self) -> BigInt {
        BigInt::from(self.m) - BigInt::from(self.n)
    }

    pub fn is_idempotent(&self) -> bool {
        self.m == self.n
    }
}

impl fmt::Display for BicyclicElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.m, self.n) {
            (0, 0) => write!(f, "1"),
            (m, n) => {
                let mut parts = Vec::new();
                if m > 0 {
                    parts.push(if m == 1 { "q".to_string() } else { format!("q^{m}") });
                }
                if n > 0 {
                    parts.push(if n == 1 { "p".to_string() } else { format!("p^{n}") });
                }
                write!(f, "{}", parts.join(""))
            }
        }
    }
}

/// Parses a word over `{p, q, 1}` with optional exponents (e.g. `"qqpq"`,
/// `"q^2p^3"`, `"1"`) and reduces it. The [`Display`](fmt::Display) form
/// parses back to the same element.
impl FromStr for BicyclicElement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut acc = BicyclicElement::ONE;
        let mut chars = s.trim().chars().peekable();
        while let Some(ch) = chars.next() {
            let g = match ch {
                'p' => BicyclicElement::P,
                'q' => BicyclicElement::Q,
                '1' => BicyclicElement::ONE,
                c if c.is_whitespace() => continue,
                c => return Err(Error::parse(format!("unexpected {c:?} in bicyclic word"))),
            };
            let mut k = 1u64;
            if chars.peek() == Some(&'^') {
                chars.next();
                let mut digits = String::new();
                while let Some(d) = chars.next_if(char::is_ascii_digit) {
                    digits.push(d);
                }
                k = digits
                    .parse()
                    .map_err(|_| Error::parse(format!("bad exponent after {ch:?}")))?;
            }
            let power = BicyclicElement::new(g.m * k, g.n * k);
            acc = checked_mul(acc, power).ok_or_else(|| Error::parse("exponent overflow in bicyclic word"))?;
        }
        Ok(acc)
    }
}

/// [`bc_mul`] returning `None` instead of overflowing.
pub fn checked_mul(a: BicyclicElement, b: BicyclicElement) -> Option<BicyclicElement> {
    let t = a.n.min(b.m);
    Some(BicyclicElement {
        m: a.m.checked_add(b.m - t)?,
        n: (a.n - t).checked_add(b.n)?,
    })
}

/// `qᵃpᵇ · qᶜpᵈ`: the middle `pᵇqᶜ` cancels `min(b, c)` times.
///
/// Panics if an exponent overflows `u64`.
pub fn bc_mul(a: BicyclicElement, b: BicyclicElement) -> BicyclicElement {
    checked_mul(a, b).expect("bicyclic exponent overflow")
}

/// `R_t x = x·t`.
pub fn right_translate(x: BicyclicElement, t: BicyclicElement) -> BicyclicElement {
    bc_mul(x, t)
}

/// `L_s x = s·x`.
pub fn left_translate(s: BicyclicElement, x: BicyclicElement) -> BicyclicElement {
    bc_mul(s, x)
}

/// Reduction of a word in `p` and `q` by repeatedly deleting `pq`, used as
/// an independent check on [`bc_mul`].
pub fn rewrite_word(word: &str) -> BicyclicElement {
    let mut stack: Vec<char> = Vec::new();
    for ch in word.chars().filter(|c| *c == 'p' || *c == 'q') {
        if ch == 'q' && stack.last() == Some(&'p') {
            stack.pop();
        } else {
            stack.push(ch);
        }
    }
    let m = stack.iter().take_while(|c| **c == 'q').count() as u64;
    BicyclicElement::new(m, stack.len() as u64 - m)
}

fn same_mode(points: &[&TorusPoint]) -> Result<Mode> {
    let mode = points[0].mode();
    for p in &points[1..] {
        if p.mode() != mode {
            return Err(Error::ModeMismatch { left: mode, right: p.mode() });
        }
    }
    Ok(mode)
}

fn mul_all(factors: &[TorusPoint]) -> TorusPoint {
    let mut acc = factors[0].clone();
    for f in &factors[1..] {
        acc = acc.mul(f).expect("modes checked at construction");
    }
    acc
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BicyclicF1 {
    mu: TorusPoint,
    nu: TorusPoint,
}

impl BicyclicF1 {
    pub fn new(mu: TorusPoint, nu: TorusPoint) -> Result<Self> {
        same_mode(&[&mu, &nu])?;
        Ok(BicyclicF1 { mu, nu })
    }

    pub fn mu(&self) -> &TorusPoint {
        &self.mu
    }

    pub fn nu(&self) -> &TorusPoint {
        &self.nu
    }

    pub fn mode(&self) -> Mode {
        self.mu.mode()
    }

    /// The same function as a member of the `F₂` family: `λ = ν²μ⁻¹`.
    pub fn to_f2(&self) -> BicyclicF2 {
        let lambda = self.nu.pow_i64(2).div(&self.mu).expect("same mode");
        BicyclicF2 {
            lambda,
            mu: self.mu.clone(),
            nu: self.nu.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BicyclicF2 {
    lambda: TorusPoint,
    mu: TorusPoint,
    nu: TorusPoint,
}

impl BicyclicF2 {
    pub fn new(lambda: TorusPoint, mu: TorusPoint, nu: TorusPoint) -> Result<Self> {
        same_mode(&[&lambda, &mu, &nu])?;
        Ok(BicyclicF2 { lambda, mu, nu })
    }

    pub fn lambda(&self) -> &TorusPoint {
        &self.lambda
    }

    pub fn mu(&self) -> &TorusPoint {
        &self.mu
    }

    pub fn nu(&self) -> &TorusPoint {
        &self.nu
    }

    pub fn mode(&self) -> Mode {
        self.mu.mode()
    }
}

/// `μʳν^{1−r}`.
pub fn f1_eval(f: &BicyclicF1, x: BicyclicElement) -> TorusPoint {
    let r = x.r();
    let one_minus_r = BigInt::from(1) - &r;
    mul_all(&[f.mu.pow(&r), f.nu.pow(&one_minus_r)])
}

/// `λ^{(r²−r)/2} μ^{(r²+r)/2} ν^{1−r²}`.
pub fn f2_eval(f: &BicyclicF2, x: BicyclicElement) -> TorusPoint {
    let r = x.r();
    let r2 = &r * &r;
    let a: BigInt = (&r2 - &r) / 2;
    let b: BigInt = (&r2 + &r) / 2;
    let c: BigInt = BigInt::from(1) - &r2;
    mul_all(&[f.lambda.pow(&a), f.mu.pow(&b), f.nu.pow(&c)])
}

/// `(f_p, f_q)` with `R_p f = f_p·f` and `R_q f = f_q·f`:
/// `f_p = F₁(f(q)⁻¹f(1), f(p)f(1)⁻¹)`, `f_q = F₁(f(p)f(q)²f(1)⁻³, f(q)f(1)⁻¹)`.
pub fn f2_cocycle_partners(f: &BicyclicF2) -> (BicyclicF1, BicyclicF1) {
    let (l, m, n) = (&f.lambda, &f.mu, &f.nu);
    let fp = BicyclicF1 {
        mu: n.div(m).expect("same mode"),
        nu: l.div(n).expect("same mode"),
    };
    let fq = BicyclicF1 {
        mu: mul_all(&[l.clone(), m.pow_i64(2), n.pow_i64(-3)]),
        nu: m.div(n).expect("same mode"),
    };
    (fp, fq)
}

fn points_agree(a: &TorusPoint, b: &TorusPoint, tol: f64) -> bool {
    match (a, b) {
        (TorusPoint::Exact(_), TorusPoint::Exact(_)) => a == b,
        _ => a.phase_gap(b).abs() <= tol,
    }
}

/// `f(p)·f(q) = f(1)²`, exactly in exact mode and to [`FLOAT_TOLERANCE`]
/// otherwise.
pub fn lemma5_check(f: &BicyclicF1) -> bool {
    let lhs = f1_eval(f, BicyclicElement::P)
        .mul(&f1_eval(f, BicyclicElement::Q))
        .expect("same mode");
    let rhs = f1_eval(f, BicyclicElement::ONE).pow_i64(2);
    points_agree(&lhs, &rhs, FLOAT_TOLERANCE)
}

/// All `(m, n)` with `m, n ≤ window`, in lexicographic order.
pub fn window_elements(window: u64) -> Vec<BicyclicElement> {
    (0..=window)
        .flat_map(|m| (0..=window).map(move |n| BicyclicElement::new(m, n)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowFailure {
    pub element: BicyclicElement,
    pub check: String,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct F2WindowReport {
    pub window: u64,
    pub mode: Mode,
    pub points: usize,
    pub right_p: bool,
    pub right_q: bool,
    pub max_error: f64,
    pub first_failure: Option<WindowFailure>,
    pub pass: bool,
}

/// Checks `f(x·p) = f_p(x)·f(x)` and `f(x·q) = f_q(x)·f(x)` at every `x`
/// with `m, n ≤ window`.
pub fn verify_f2_window(f: &BicyclicF2, window: u64) -> F2WindowReport {
    let (fp, fq) = f2_cocycle_partners(f);
    let elements = window_elements(window);
    let results: Vec<(f64, f64)> = elements
        .par_iter()
        .map(|&x| {
            let fx = f2_eval(f, x);
            let ep = f2_eval(f, bc_mul(x, BicyclicElement::P))
                .phase_gap(&f1_eval(&fp, x).mul(&fx).expect("same mode"));
            let eq = f2_eval(f, bc_mul(x, BicyclicElement::Q))
                .phase_gap(&f1_eval(&fq, x).mul(&fx).expect("same mode"));
            (ep.abs(), eq.abs())
        })
        .collect();
    let tol = match f.mode() {
        Mode::Exact => 0.0,
        Mode::Float => FLOAT_TOLERANCE,
    };
    let mut first_failure = None;
    let mut max_error = 0.0f64;
    let (mut right_p, mut right_q) = (true, true);
    for (&x, &(ep, eq)) in elements.iter().zip(&results) {
        max_error = max_error.max(ep).max(eq);
        for (err, name, flag) in [(ep, "R_p", &mut right_p), (eq, "R_q", &mut right_q)] {
            if err > tol {
                *flag = false;
                first_failure.get_or_insert(WindowFailure {
                    element: x,
                    check: name.to_string(),
                    error: err,
                });
            }
        }
    }
    F2WindowReport {
        window,
        mode: f.mode(),
        points: elements.len(),
        right_p,
        right_q,
        max_error,
        pass: right_p && right_q,
        first_failure,
    }
}

/// `F1(μ, ν)` and `F2(ν²μ⁻¹, μ, ν)` agree on the window.
pub fn embedding_check(f: &BicyclicF1, window: u64) -> bool {
    let g = f.to_f2();
    window_elements(window)
        .par_iter()
        .all(|&x| points_agree(&f1_eval(f, x), &f2_eval(&g, x), FLOAT_TOLERANCE))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CollapseRelation {
    /// `p² = p`.
    P,
    /// `q² = q`.
    Q,
    /// No extra relation: the bicyclic monoid itself.
    None,
}

impl FromStr for CollapseRelation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "p" => Ok(CollapseRelation::P),
            "q" => Ok(CollapseRelation::Q),
            "none" => Ok(CollapseRelation::None),
            other => Err(Error::parse(format!("expected p, q or none, got {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseReport {
    pub relation: CollapseRelation,
    pub window: u64,
    pub window_elements: usize,
    /// Congruence classes of window elements after closure.
    pub classes: usize,
    /// Class products that were computable inside the window.
    pub defined_products: usize,
    pub solution: F1Solution,
    pub constants_only: bool,
    /// Every free generator is `r ↦ a·r + b·(1 − r)` in phase terms, i.e. of
    /// the `μʳν^{1−r}` shape, and there is no finite-order part.
    pub matches_f1_family: bool,
    pub note: String,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }
}

/// Solves `F₁` on a window `m, n ≤ window` of the bicyclic monoid, after
/// imposing `p² = p` or `q² = q` and closing the relation under left and
/// right multiplication (as far as products stay in the window).
///
/// This is evidence on a finite window, not a proof about the infinite
/// quotient.
pub fn idempotent_collapse(relation: CollapseRelation, window: u64) -> Result<CollapseReport> {
    if window < 2 {
        return Err(Error::InvalidTable("collapse window must be at least 2".into()));
    }
    let elements = window_elements(window);
    let w = window as usize + 1;
    let index = |x: BicyclicElement| -> Option<usize> {
        (x.m <= window && x.n <= window).then(|| x.m as usize * w + x.n as usize)
    };
    let n = elements.len();
    let products: Vec<Vec<Option<usize>>> = elements
        .iter()
        .map(|&a| elements.iter().map(|&b| index(bc_mul(a, b))).collect())
        .collect();

    let mut uf = UnionFind::new(n);
    match relation {
        CollapseRelation::P => {
            uf.union(index(BicyclicElement::new(0, 2)).unwrap(), index(BicyclicElement::P).unwrap());
        }
        CollapseRelation::Q => {
            uf.union(index(BicyclicElement::new(2, 0)).unwrap(), index(BicyclicElement::Q).unwrap());
        }
        CollapseRelation::None => {}
    }
    // closure: a ~ b implies ac ~ bc and ca ~ cb
    loop {
        let mut changed = false;
        for a in 0..n {
            let ra = uf.find(a);
            if ra == a {
                continue;
            }
            for c in 0..n {
                if let (Some(x), Some(y)) = (products[a][c], products[ra][c]) {
                    changed |= uf.union(x, y);
                }
                if let (Some(x), Some(y)) = (products[c][a], products[c][ra]) {
                    changed |= uf.union(x, y);
                }
            }
        }
        if !changed {
            break;
        }
    }

    let mut class_of = HashMap::new();
    let mut reps = Vec::new();
    let mut cls = Vec::with_capacity(n);
    for x in 0..n {
        let r = uf.find(x);
        let next = reps.len();
        let c = *class_of.entry(r).or_insert(next);
        if c == next {
            reps.push(x);
        }
        cls.push(c);
    }
    let k = reps.len();
    let mut table = vec![None; k * k];
    for a in 0..n {
        for b in 0..n {
            if let Some(ab) = products[a][b] {
                table[cls[a] * k + cls[b]] = Some(cls[ab]);
            }
        }
    }
    let labels = reps.iter().map(|&x| elements[x].to_string()).collect();
    let partial = PartialTable::new(k, table, labels)?;
    let defined_products = partial.defined_products();
    let solution = solve_f1_partial(&partial);
    let constants_only = solution.is_constants_only();

    let matches_f1_family = solution.torsion.is_empty()
        && solution.free.iter().all(|g| {
            // f(x) − f(1) must equal r·(f(q) − f(1)) for each class representative
            let at = |e: BicyclicElement| g.f[cls[index(e).unwrap()]].clone();
            let base = at(BicyclicElement::ONE);
            let step = at(BicyclicElement::Q) - &base;
            reps.iter()
                .all(|&x| g.f[cls[x]].clone() - &base == &step * elements[x].r())
        });

    let note = match relation {
        CollapseRelation::None => format!(
            "window m,n <= {window}: F1 recovered with {} free torus parameter(s)",
            solution.dimension()
        ),
        _ => format!(
            "window m,n <= {window}: the relation merges the window into {k} class(es); \
             F1 on the windowed quotient is {}",
            if constants_only { "constants only" } else { "larger than the constants" }
        ),
    };
    Ok(CollapseReport {
        relation,
        window,
        window_elements: n,
        classes: k,
        defined_products,
        solution,
        constants_only,
        matches_f1_family,
        note,
    })
}
