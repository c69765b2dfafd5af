use std::collections::VecDeque;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_with::{serde_as, DisplayFromStr};

use super::{FiniteSemigroup, PartialTable};
use crate::error::{Error, Result};
use crate::lattice::{hermite_rows, satisfies, solve_torus_system, Matrix, TorusSubgroup};
use crate::torus::frac;

pub const DEFAULT_DEPTH_LIMIT: usize = 3;

/// A continuous direction: `α·f` with eigenvalues `α·c`, for any `α ∈ 𝕋`.
#[serde_as]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreeGenerator {
    #[serde_as(as = "Vec<DisplayFromStr>")]
    pub f: Vec<BigInt>,
    #[serde_as(as = "Vec<DisplayFromStr>")]
    pub c: Vec<BigInt>,
}

/// A finite-order solution: phases `f` with `R_t f = e(c_t)·f`.
#[serde_as]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorsionSolution {
    #[serde_as(as = "DisplayFromStr")]
    pub order: BigInt,
    #[serde_as(as = "Vec<DisplayFromStr>")]
    pub f: Vec<BigRational>,
    #[serde_as(as = "Vec<DisplayFromStr>")]
    pub c: Vec<BigRational>,
}

/// All of `F₁`: every solution is `Σ αⱼ·freeⱼ + Σ kᵢ·torsionᵢ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct F1Solution {
    pub size: usize,
    pub components: usize,
    pub free: Vec<FreeGenerator>,
    pub torsion: Vec<TorsionSolution>,
}

impl F1Solution {
    pub fn dimension(&self) -> usize {
        self.free.len()
    }

    pub fn torsion_orders(&self) -> Vec<BigInt> {
        self.torsion.iter().map(|t| t.order.clone()).collect()
    }

    /// The function part as a subgroup of `𝕋^S`.
    pub fn family(&self) -> TorusSubgroup {
        TorusSubgroup {
            ambient: self.size,
            free: self.free.iter().map(|g| g.f.clone()).collect(),
            torsion: self
                .torsion
                .iter()
                .map(|t| crate::lattice::TorsionGenerator {
                    numerators: t.f.iter().map(|x| (x * BigRational::from_integer(t.order.clone())).to_integer()).collect(),
                    order: t.order.clone(),
                })
                .collect(),
        }
    }

    /// Only constant functions (`F₁ = 𝕋`).
    pub fn is_constants_only(&self) -> bool {
        self.torsion.is_empty()
            && self.free.len() == 1
            && self.free[0].f.iter().all(|x| *x == self.free[0].f[0])
            && self.free[0].c.iter().all(Zero::is_zero)
    }
}

fn rat(x: &BigInt) -> BigRational {
    BigRational::from_integer(x.clone())
}

/// Solves `f(s·t) = c_t + f(s)` over the right Cayley graph of `S`.
pub fn solve_f1(s: &FiniteSemigroup) -> F1Solution {
    solve_f1_partial(&s.to_partial())
}

/// Same as [`solve_f1`] with only the defined products as constraints.
///
/// A spanning forest of the undirected right Cayley graph expresses every
/// `f(x)` as its component's base value plus an integer combination of the
/// eigenvalues `c_t`; each non-tree edge then closes a cycle and yields an
/// integer relation on `c`, and the relation system is solved exactly over
/// the torus. Labels `t` with no defined product carry no information and
/// get `c_t = 0`.
pub fn solve_f1_partial(table: &PartialTable) -> F1Solution {
    let n = table.size();
    let mut forward: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut backward: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut edges = Vec::new();
    let mut active = vec![false; n];
    for s in 0..n {
        for t in 0..n {
            if let Some(st) = table.mul(s, t) {
                forward[s].push((t, st));
                backward[st].push((t, s));
                edges.push((s, t, st));
                active[t] = true;
            }
        }
    }
    let active_labels: Vec<usize> = (0..n).filter(|&t| active[t]).collect();
    let col_of: Vec<Option<usize>> = {
        let mut v = vec![None; n];
        for (i, &t) in active_labels.iter().enumerate() {
            v[t] = Some(i);
        }
        v
    };
    let m = active_labels.len();

    // expr[x]: coefficients of c (over active labels) in f(x) − f(root)
    let mut expr: Vec<Option<Vec<i64>>> = vec![None; n];
    let mut component = vec![usize::MAX; n];
    let mut roots = Vec::new();
    for root in 0..n {
        if expr[root].is_some() {
            continue;
        }
        let comp = roots.len();
        roots.push(root);
        expr[root] = Some(vec![0; m]);
        component[root] = comp;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            let eu = expr[u].clone().expect("visited");
            for &(t, x) in &forward[u] {
                if expr[x].is_none() {
                    let mut e = eu.clone();
                    e[col_of[t].expect("active")] += 1;
                    expr[x] = Some(e);
                    component[x] = comp;
                    queue.push_back(x);
                }
            }
            for &(t, x) in &backward[u] {
                if expr[x].is_none() {
                    let mut e = eu.clone();
                    e[col_of[t].expect("active")] -= 1;
                    expr[x] = Some(e);
                    component[x] = comp;
                    queue.push_back(x);
                }
            }
        }
    }
    let expr: Vec<Vec<i64>> = expr.into_iter().map(|e| e.expect("all visited")).collect();

    let mut relations: Matrix = Vec::new();
    for &(s, t, st) in &edges {
        let mut row: Vec<i64> = expr[st].iter().zip(&expr[s]).map(|(a, b)| a - b).collect();
        row[col_of[t].expect("active")] -= 1;
        if row.iter().any(|&x| x != 0) {
            relations.push(row.into_iter().map(BigInt::from).collect());
        }
    }
    let c_family = solve_torus_system(&relations, m);

    let spread = |cv: &[BigInt]| -> Vec<BigInt> {
        let mut full = vec![BigInt::zero(); n];
        for (i, &t) in active_labels.iter().enumerate() {
            full[t] = cv[i].clone();
        }
        full
    };
    let apply = |cv: &[BigInt]| -> Vec<BigInt> {
        expr.iter()
            .map(|e| e.iter().zip(cv).map(|(&a, b)| BigInt::from(a) * b).sum())
            .collect()
    };

    let mut free_rows: Matrix = Vec::new();
    for comp in 0..roots.len() {
        let mut row: Vec<BigInt> = (0..n)
            .map(|x| if component[x] == comp { BigInt::one() } else { BigInt::zero() })
            .collect();
        row.extend(std::iter::repeat_n(BigInt::zero(), n));
        free_rows.push(row);
    }
    for v in &c_family.free {
        let mut row = apply(v);
        row.extend(spread(v));
        free_rows.push(row);
    }
    let free = hermite_rows(free_rows, 2 * n)
        .into_iter()
        .map(|mut row| {
            let c = row.split_off(n);
            FreeGenerator { f: row, c }
        })
        .collect();

    let torsion = c_family
        .torsion
        .iter()
        .map(|g| {
            let d = rat(&g.order);
            let f = apply(&g.numerators).iter().map(|x| frac(&(rat(x) / &d))).collect();
            let c = spread(&g.numerators).iter().map(|x| frac(&(rat(x) / &d))).collect();
            TorsionSolution {
                order: g.order.clone(),
                f,
                c,
            }
        })
        .collect();

    F1Solution {
        size: n,
        components: roots.len(),
        free,
        torsion,
    }
}

/// Definitional check of `f ∈ F₁`: for every `t`, `f(s·t) − f(s)` must not
/// depend on `s`. Returns the eigenvalue map or the first offending `(s, t)`.
pub fn f1_replay(s: &FiniteSemigroup, f: &[BigRational]) -> std::result::Result<Vec<BigRational>, (usize, usize)> {
    let n = s.size();
    let mut c = Vec::with_capacity(n);
    for t in 0..n {
        let ct = frac(&(&f[s.mul(0, t)] - &f[0]));
        for x in 1..n {
            if frac(&(&f[s.mul(x, t)] - &f[x])) != ct {
                return Err((x, t));
            }
        }
        c.push(ct);
    }
    Ok(c)
}

/// Definitional recursion for `f ∈ F_k`: `F₀` is the constants, and
/// `f ∈ F_k` iff every `R_t f − f` lies in `F_{k−1}`. Cost is `O(|S|^{k+1})`.
pub fn fk_member(s: &FiniteSemigroup, f: &[BigRational], k: usize) -> bool {
    if k == 0 {
        return f.iter().all(|x| frac(x) == frac(&f[0]));
    }
    let n = s.size();
    (0..n).all(|t| {
        let g: Vec<BigRational> = (0..n).map(|x| frac(&(&f[s.mul(x, t)] - &f[x]))).collect();
        fk_member(s, &g, k - 1)
    })
}

/// `F_k` together with the integer relations cutting it out of `𝕋^S`.
#[serde_as]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FkFamily {
    pub k: usize,
    pub family: TorusSubgroup,
    /// Hermite basis `B_k` with `F_k = {f : B_k·f ≡ 0}`.
    #[serde_as(as = "Vec<Vec<DisplayFromStr>>")]
    pub relations: Matrix,
    /// `nesting[j]`: generators of `F_j` satisfy the relations of `F_{j+1}`.
    pub nesting: Vec<bool>,
}

pub fn solve_fk(s: &FiniteSemigroup, k: usize) -> Result<FkFamily> {
    solve_fk_with_limit(s, k, DEFAULT_DEPTH_LIMIT)
}

/// `F_k` through its annihilator: `B₀` states that `f` is constant and
/// `B_k = {b·(P_t − I) : b ∈ B_{k−1}, t ∈ S}` where `(P_t f)(s) = f(s·t)`.
pub fn solve_fk_with_limit(s: &FiniteSemigroup, k: usize, limit: usize) -> Result<FkFamily> {
    if k == 0 || k > limit {
        return Err(Error::DepthLimit { k, limit });
    }
    let n = s.size();
    let unit = |i: usize| -> Vec<BigInt> { (0..n).map(|j| BigInt::from((i == j) as i64)).collect() };
    let mut relations: Matrix = (1..n)
        .map(|i| {
            let mut r = unit(i);
            r[0] -= 1;
            r
        })
        .collect();
    relations = hermite_rows(relations, n);
    let mut levels = vec![relations.clone()];
    for _ in 0..k {
        let mut next: Matrix = Vec::with_capacity(n * relations.len());
        for t in 0..n {
            for b in &relations {
                let mut u = vec![BigInt::zero(); n];
                for x in 0..n {
                    if b[x].is_zero() {
                        continue;
                    }
                    u[s.mul(x, t)] += &b[x];
                    u[x] -= &b[x];
                }
                if u.iter().any(|v| !v.is_zero()) {
                    next.push(u);
                }
            }
        }
        relations = hermite_rows(next, n);
        levels.push(relations.clone());
    }
    let families: Vec<TorusSubgroup> = levels.iter().map(|b| solve_torus_system(b, n)).collect();
    let nesting = (0..k)
        .map(|j| {
            let next = &levels[j + 1];
            let free_ok = families[j].free.iter().all(|v| {
                next.iter()
                    .all(|row| row.iter().zip(v).map(|(a, b)| a * b).sum::<BigInt>().is_zero())
            });
            let torsion_ok = families[j].torsion.iter().all(|g| satisfies(next, &g.phases()));
            free_ok && torsion_ok
        })
        .collect();
    Ok(FkFamily {
        k,
        family: families[k].clone(),
        relations,
        nesting,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdempotentCheck {
    pub element: usize,
    pub label: String,
    pub pass: bool,
    /// Index of a generator with `c_e ≠ 0` (free generators first).
    pub witness: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdempotentReport {
    pub checks: Vec<IdempotentCheck>,
    pub pass: bool,
}

/// `R_e f = f` for every idempotent `e` and every solution, checked on
/// generators (`c` is additive over the family).
pub fn idempotent_fixed_check(s: &FiniteSemigroup, sol: &F1Solution) -> IdempotentReport {
    let checks: Vec<IdempotentCheck> = s
        .idempotents()
        .into_iter()
        .map(|e| {
            let free_bad = sol.free.iter().position(|g| !g.c[e].is_zero());
            let torsion_bad = sol
                .torsion
                .iter()
                .position(|g| !g.c[e].is_zero())
                .map(|i| i + sol.free.len());
            let witness = free_bad.or(torsion_bad);
            IdempotentCheck {
                element: e,
                label: s.labels()[e].clone(),
                pass: witness.is_none(),
                witness,
            }
        })
        .collect();
    let pass = checks.iter().all(|c| c.pass);
    IdempotentReport { checks, pass }
}

impl TorsionSolution {
    /// `k`-th multiple, reduced.
    pub fn multiple(&self, k: &BigInt) -> Vec<BigRational> {
        let kk = rat(&k.mod_floor(&self.order));
        self.f.iter().map(|x| frac(&(x * &kk))).collect()
    }
}
