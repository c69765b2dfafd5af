//! Integer row reduction and the closed subgroups of a torus they cut out.
//!
//! A system `B·x ≡ 0 (mod 1)` with integer `B` and unknown phases
//! `x ∈ 𝕋ⁿ` has as solution set a closed subgroup isomorphic to
//! `𝕋^a × ℤ/d₁ × … × ℤ/d_r`. The Smith form `P·B·Q = diag(d)` exposes it:
//! with `x = Q·y` the system decouples into `dᵢ·yᵢ ≡ 0`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_with::{serde_as, DisplayFromStr};

pub type Matrix = Vec<Vec<BigInt>>;

fn row_sub_multiple(target: &mut [BigInt], source: &[BigInt], q: &BigInt) {
    if q.is_zero() {
        return;
    }
    for (t, s) in target.iter_mut().zip(source) {
        if !s.is_zero() {
            *t -= q * s;
        }
    }
}

/// Hermite basis of the row lattice spanned by `rows`: echelon form, positive
/// pivots, entries above each pivot reduced into `[0, pivot)`. Zero rows are
/// dropped, so at most `ncols` rows remain.
pub fn hermite_rows(mut rows: Matrix, ncols: usize) -> Matrix {
    rows.retain(|r| r.iter().any(|x| !x.is_zero()));
    let mut out_row = 0;
    for col in 0..ncols {
        loop {
            // smallest non-zero magnitude in this column at or below out_row
            let pick = (out_row..rows.len())
                .filter(|&r| !rows[r][col].is_zero())
                .min_by(|&a, &b| rows[a][col].abs().cmp(&rows[b][col].abs()).then(a.cmp(&b)));
            let Some(p) = pick else { break };
            rows.swap(out_row, p);
            let mut clean = true;
            for r in out_row + 1..rows.len() {
                if rows[r][col].is_zero() {
                    continue;
                }
                let q = rows[r][col].div_floor(&rows[out_row][col]);
                let (head, tail) = rows.split_at_mut(r);
                row_sub_multiple(&mut tail[0], &head[out_row], &q);
                if !rows[r][col].is_zero() {
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
        if out_row < rows.len() && !rows[out_row][col].is_zero() {
            if rows[out_row][col].is_negative() {
                for x in rows[out_row].iter_mut() {
                    *x = -x.clone();
                }
            }
            let pivot = rows[out_row][col].clone();
            for r in 0..out_row {
                let q = rows[r][col].div_floor(&pivot);
                let (head, tail) = rows.split_at_mut(out_row);
                row_sub_multiple(&mut head[r], &tail[0], &q);
            }
            out_row += 1;
        }
    }
    rows.truncate(out_row);
    rows.retain(|r| r.iter().any(|x| !x.is_zero()));
    rows
}

/// Smith diagonal `d₁ | d₂ | …` (all positive) and unimodular column
/// transform `Q` with `P·B·Q = diag(d)` for some unimodular `P`.
#[derive(Clone, Debug)]
pub struct Smith {
    pub diag: Vec<BigInt>,
    pub q: Matrix,
}

pub fn smith(rows: &Matrix, ncols: usize) -> Smith {
    let mut a: Matrix = rows.clone();
    let m = a.len();
    let mut q: Matrix = (0..ncols)
        .map(|i| (0..ncols).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    let mut diag = Vec::new();

    let swap_cols = |a: &mut Matrix, q: &mut Matrix, i: usize, j: usize| {
        if i != j {
            for row in a.iter_mut() {
                row.swap(i, j);
            }
            for row in q.iter_mut() {
                row.swap(i, j);
            }
        }
    };
    // col_j -= k * col_t, applied to both A and Q
    let col_sub = |a: &mut Matrix, q: &mut Matrix, j: usize, t: usize, k: &BigInt| {
        if k.is_zero() {
            return;
        }
        for row in a.iter_mut() {
            let v = &row[t] * k;
            row[j] -= v;
        }
        for row in q.iter_mut() {
            let v = &row[t] * k;
            row[j] -= v;
        }
    };

    let mut t = 0;
    while t < m.min(ncols) {
        let mut best: Option<(usize, usize)> = None;
        for i in t..m {
            for j in t..ncols {
                if a[i][j].is_zero() {
                    continue;
                }
                if best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(t, pi);
        swap_cols(&mut a, &mut q, t, pj);

        loop {
            let mut done = true;
            for i in t + 1..m {
                if a[i][t].is_zero() {
                    continue;
                }
                let k = a[i][t].div_floor(&a[t][t]);
                let (head, tail) = a.split_at_mut(i);
                row_sub_multiple(&mut tail[0], &head[t], &k);
                if !a[i][t].is_zero() {
                    done = false;
                }
            }
            for j in t + 1..ncols {
                if a[t][j].is_zero() {
                    continue;
                }
                let k = a[t][j].div_floor(&a[t][t]);
                col_sub(&mut a, &mut q, j, t, &k);
                if !a[t][j].is_zero() {
                    done = false;
                }
            }
            if !done {
                // move the smallest remainder in row t / column t to the pivot
                let mut best = (t, t);
                for i in t + 1..m {
                    if !a[i][t].is_zero() && a[i][t].abs() < a[best.0][best.1].abs() {
                        best = (i, t);
                    }
                }
                for j in t + 1..ncols {
                    if !a[t][j].is_zero() && a[t][j].abs() < a[best.0][best.1].abs() {
                        best = (t, j);
                    }
                }
                a.swap(t, best.0);
                swap_cols(&mut a, &mut q, t, best.1);
                continue;
            }
            // divisibility of the remaining block by the pivot
            let pivot = a[t][t].clone();
            let offender = (t + 1..m).find(|&i| (t + 1..ncols).any(|j| !a[i][j].is_multiple_of(&pivot)));
            match offender {
                Some(i) => {
                    let (head, tail) = a.split_at_mut(i);
                    let minus_one = -BigInt::one();
                    row_sub_multiple(&mut head[t], &tail[0], &minus_one);
                }
                None => break,
            }
        }
        diag.push(a[t][t].abs());
        t += 1;
    }
    Smith { diag, q }
}

#[serde_as]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorsionGenerator {
    /// Phase vector is `numerators / order`, numerators reduced mod `order`.
    #[serde_as(as = "Vec<DisplayFromStr>")]
    pub numerators: Vec<BigInt>,
    #[serde_as(as = "DisplayFromStr")]
    pub order: BigInt,
}

impl TorsionGenerator {
    pub fn phases(&self) -> Vec<BigRational> {
        self.numerators
            .iter()
            .map(|n| BigRational::new(n.clone(), self.order.clone()))
            .collect()
    }
}

/// Closed subgroup `{Σ αⱼ·freeⱼ + Σ kᵢ·torsionᵢ}` of `𝕋ⁿ` with `αⱼ ∈ 𝕋` and
/// `0 ≤ kᵢ < orderᵢ`.
#[serde_as]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusSubgroup {
    pub ambient: usize,
    #[serde_as(as = "Vec<Vec<DisplayFromStr>>")]
    pub free: Vec<Vec<BigInt>>,
    pub torsion: Vec<TorsionGenerator>,
}

impl TorusSubgroup {
    pub fn dimension(&self) -> usize {
        self.free.len()
    }

    /// Orders of the cyclic factors of the component group, `d₁ | d₂ | …`.
    pub fn torsion_orders(&self) -> Vec<BigInt> {
        self.torsion.iter().map(|g| g.order.clone()).collect()
    }

    pub fn component_count(&self) -> BigInt {
        self.torsion.iter().map(|g| g.order.clone()).product()
    }

    /// Every element with all free parameters at zero, in lexicographic
    /// order of the torsion multipliers. `None` if there are more than
    /// `limit`.
    pub fn torsion_elements(&self, limit: usize) -> Option<Vec<Vec<BigRational>>> {
        let count = self.component_count();
        if count > BigInt::from(limit) {
            return None;
        }
        let mut out = vec![vec![BigRational::zero(); self.ambient]];
        for g in &self.torsion {
            let phases = g.phases();
            let order: usize = g.order.clone().try_into().expect("bounded by limit");
            let mut next = Vec::with_capacity(out.len() * order);
            for base in &out {
                for k in 0..order {
                    let kk = BigRational::from_integer(BigInt::from(k));
                    next.push(
                        base.iter()
                            .zip(&phases)
                            .map(|(b, p)| crate::torus::frac(&(b + &kk * p)))
                            .collect(),
                    );
                }
            }
            out = next;
        }
        Some(out)
    }
}

/// All `x ∈ 𝕋^ncols` with `B·x ≡ 0 (mod 1)`.
pub fn solve_torus_system(relations: &Matrix, ncols: usize) -> TorusSubgroup {
    let reduced = hermite_rows(relations.clone(), ncols);
    let Smith { diag, q } = smith(&reduced, ncols);
    let column = |j: usize| -> Vec<BigInt> { q.iter().map(|row| row[j].clone()).collect() };
    let mut torsion = Vec::new();
    for (i, d) in diag.iter().enumerate() {
        if d > &BigInt::one() {
            torsion.push(TorsionGenerator {
                numerators: column(i).iter().map(|x| x.mod_floor(d)).collect(),
                order: d.clone(),
            });
        }
    }
    let free = (diag.len()..ncols).map(column).collect::<Vec<_>>();
    TorusSubgroup {
        ambient: ncols,
        free: hermite_rows(free, ncols),
        torsion,
    }
}

/// `Σ bⱼ·xⱼ ≡ 0 (mod 1)` for every row.
pub fn satisfies(relations: &Matrix, x: &[BigRational]) -> bool {
    relations.iter().all(|row| {
        let s: BigRational = row
            .iter()
            .zip(x)
            .map(|(b, xi)| BigRational::from_integer(b.clone()) * xi)
            .sum();
        s.is_integer()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[i64]]) -> Matrix {
        rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn hermite_basic() {
        let h = hermite_rows(mat(&[&[2, 4], &[3, 6], &[0, 0]]), 2);
        assert_eq!(h, mat(&[&[1, 2]]));
        let h = hermite_rows(mat(&[&[4, 1], &[2, 3]]), 2);
        // lattice of index |det| = 10
        assert_eq!(h.len(), 2);
        assert_eq!(&h[0][0] * &h[1][1], BigInt::from(10));
    }

    #[test]
    fn smith_invariants() {
        // diag(2, 6) disguised
        let b = mat(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]]);
        let s = smith(&b, 3);
        assert_eq!(s.diag, ints(&[2, 6, 12]));
        let b = mat(&[&[2, 0], &[0, 3]]);
        assert_eq!(smith(&b, 2).diag, ints(&[1, 6]));
    }

    #[test]
    fn torus_system_cyclic() {
        // 5x ≡ 0 mod 1
        let g = solve_torus_system(&mat(&[&[5]]), 1);
        assert_eq!(g.dimension(), 0);
        assert_eq!(g.torsion_orders(), ints(&[5]));
        assert_eq!(g.torsion_elements(10).unwrap().len(), 5);
        // x − y ≡ 0 in 𝕋²: the diagonal circle
        let g = solve_torus_system(&mat(&[&[1, -1]]), 2);
        assert_eq!(g.dimension(), 1);
        assert!(g.torsion.is_empty());
        assert_eq!(g.free, vec![ints(&[1, 1])]);
    }

    #[test]
    fn generators_satisfy_relations() {
        let b = mat(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16], &[1, 1, 1]]);
        let g = solve_torus_system(&b, 3);
        for t in &g.torsion {
            assert!(satisfies(&b, &t.phases()));
        }
        for f in &g.free {
            let zero_rows: Vec<BigInt> = b.iter().map(|r| r.iter().zip(f).map(|(x, y)| x * y).sum()).collect();
            assert!(zero_rows.iter().all(Zero::is_zero));
        }
    }
}
