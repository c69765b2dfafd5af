use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::One;

use super::{solve_f1, FiniteSemigroup};
use crate::error::{Error, Result};
use crate::torus::frac;

/// Bound on `|G|` for enumerating the dual group.
const MAX_DUAL: usize = 1 << 16;

fn require_abelian_group(g: &FiniteSemigroup) -> Result<usize> {
    let e = g
        .identity()
        .ok_or_else(|| Error::NotAbelianGroup("no identity element".into()))?;
    if !g.is_group() {
        return Err(Error::NotAbelianGroup("some element has no inverse".into()));
    }
    if !g.is_commutative() {
        return Err(Error::NotAbelianGroup("multiplication is not commutative".into()));
    }
    Ok(e)
}

/// The dual group, read off from `F₁`: for a group every solution is a
/// character times a constant, so normalizing at the identity and dropping
/// duplicates leaves exactly the characters, as phase vectors `χ(g) ∈ ℚ/ℤ`.
pub fn characters(g: &FiniteSemigroup) -> Result<Vec<Vec<BigRational>>> {
    let e = require_abelian_group(g)?;
    let sol = solve_f1(g);
    let elements = sol
        .family()
        .torsion_elements(MAX_DUAL)
        .ok_or_else(|| Error::InvalidTable("group too large to enumerate its dual".into()))?;
    let mut seen = BTreeMap::new();
    for f in elements {
        let chi: Vec<BigRational> = f.iter().map(|x| frac(&(x - &f[e]))).collect();
        let key: Vec<(BigInt, BigInt)> = chi.iter().map(|x| (x.numer().clone(), x.denom().clone())).collect();
        seen.entry(key).or_insert(chi);
    }
    Ok(seen.into_values().collect())
}

/// Exact test of `Σ_g e(χ(g) − ψ(g)) = 0`: the difference is a homomorphism
/// onto `(1/d)ℤ/ℤ`, so the sum vanishes precisely when `d > 1` and every
/// value of that subgroup is taken equally often. Both are checked
/// directly on the value multiset.
pub fn orthogonal(chi: &[BigRational], psi: &[BigRational]) -> bool {
    let diffs: Vec<BigRational> = chi.iter().zip(psi).map(|(a, b)| frac(&(a - b))).collect();
    let d = diffs.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    if d.is_one() {
        return false;
    }
    let mut counts: BTreeMap<BigInt, usize> = BTreeMap::new();
    for x in &diffs {
        *counts.entry((x * BigRational::from_integer(d.clone())).to_integer()).or_default() += 1;
    }
    let Ok(d_usize) = usize::try_from(&d) else {
        return false;
    };
    counts.len() == d_usize && diffs.len().is_multiple_of(d_usize) && counts.values().all(|&c| c == diffs.len() / d_usize)
}

/// Dimension of the complex span of the characters: the number of
/// characters, certified by pairwise exact orthogonality (orthogonal
/// nonzero vectors are independent).
pub fn character_span_dimension(g: &FiniteSemigroup) -> Result<usize> {
    let chars = characters(g)?;
    for i in 0..chars.len() {
        for j in 0..i {
            if !orthogonal(&chars[i], &chars[j]) {
                return Err(Error::InvalidTable(format!(
                    "characters {j} and {i} are not orthogonal"
                )));
            }
        }
    }
    Ok(chars.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_sizes() {
        for n in 1..=6 {
            assert_eq!(character_span_dimension(&FiniteSemigroup::cyclic_group(n)).unwrap(), n);
        }
        let v4 = FiniteSemigroup::direct_product(&FiniteSemigroup::cyclic_group(2), &FiniteSemigroup::cyclic_group(2));
        assert_eq!(characters(&v4).unwrap().len(), 4);
        let z2z3 = FiniteSemigroup::direct_product(&FiniteSemigroup::cyclic_group(2), &FiniteSemigroup::cyclic_group(3));
        assert_eq!(character_span_dimension(&z2z3).unwrap(), 6);
    }

    #[test]
    fn non_groups_rejected() {
        assert!(matches!(
            character_span_dimension(&FiniteSemigroup::right_zero(2)),
            Err(Error::NotAbelianGroup(_))
        ));
        let s3 = FiniteSemigroup::from_transformations(&[vec![1, 0, 2], vec![1, 2, 0]], 3, 16).unwrap();
        assert_eq!(s3.size(), 6);
        assert!(matches!(characters(&s3), Err(Error::NotAbelianGroup(_))));
    }

    #[test]
    fn orthogonality_is_exact() {
        let chars = characters(&FiniteSemigroup::cyclic_group(4)).unwrap();
        assert!(!orthogonal(&chars[1], &chars[1]));
        assert!(orthogonal(&chars[0], &chars[2]));
    }
}
