//! Semigroups given by explicit multiplication tables.
//!
//! For a finite discrete semigroup every bounded function is continuous and
//! the enveloping operator set reduces to the right translations
//! `R_t f(s) = f(s·t)`, so `F_k(S)` is computable exactly: it is a closed
//! subgroup of the torus `𝕋^S`, described by free torus parameters plus
//! finite-order generators.

mod characters;
mod solve;

use std::fmt::Write as _;

pub use characters::{character_span_dimension, characters, orthogonal};
pub use solve::{
    f1_replay, fk_member, idempotent_fixed_check, solve_f1, solve_f1_partial, solve_fk, solve_fk_with_limit,
    F1Solution, FkFamily, FreeGenerator, IdempotentCheck, IdempotentReport, TorsionSolution, DEFAULT_DEPTH_LIMIT,
};

use crate::error::{Error, Result};

/// Largest table accepted from text input.
pub const MAX_TABLE_SIZE: usize = 1024;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteSemigroup {
    size: usize,
    table: Vec<usize>,
    labels: Vec<String>,
}

/// A multiplication table in which some products are unknown, e.g. a finite
/// window of an infinite monoid. Only defined products constrain solutions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialTable {
    size: usize,
    table: Vec<Option<usize>>,
    labels: Vec<String>,
}

impl PartialTable {
    pub fn new(size: usize, table: Vec<Option<usize>>, labels: Vec<String>) -> Result<Self> {
        if table.len() != size * size || labels.len() != size {
            return Err(Error::InvalidTable("partial table has wrong shape".into()));
        }
        if let Some(bad) = table.iter().flatten().find(|&&v| v >= size) {
            return Err(Error::InvalidTable(format!("entry {bad} out of range")));
        }
        Ok(PartialTable { size, table, labels })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn mul(&self, s: usize, t: usize) -> Option<usize> {
        self.table[s * self.size + t]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn defined_products(&self) -> usize {
        self.table.iter().flatten().count()
    }
}

impl FiniteSemigroup {
    /// Validates shape, index range and associativity.
    pub fn new(size: usize, table: Vec<usize>) -> Result<Self> {
        let labels = (0..size).map(|i| i.to_string()).collect();
        Self::with_labels(size, table, labels)
    }

    pub fn with_labels(size: usize, table: Vec<usize>, labels: Vec<String>) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidTable("empty semigroup".into()));
        }
        if table.len() != size * size {
            return Err(Error::InvalidTable(format!(
                "expected {} entries, found {}",
                size * size,
                table.len()
            )));
        }
        if labels.len() != size {
            return Err(Error::InvalidTable(format!("expected {size} labels, found {}", labels.len())));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = labels.iter().find(|l| !seen.insert(l.as_str())) {
            return Err(Error::InvalidTable(format!("duplicate label {dup:?}")));
        }
        if let Some(bad) = table.iter().find(|&&v| v >= size) {
            return Err(Error::InvalidTable(format!("entry {bad} out of range 0..{size}")));
        }
        let s = FiniteSemigroup { size, table, labels };
        s.check_associative()?;
        Ok(s)
    }

    fn check_associative(&self) -> Result<()> {
        for a in 0..self.size {
            for b in 0..self.size {
                let ab = self.mul(a, b);
                for c in 0..self.size {
                    if self.mul(ab, c) != self.mul(a, self.mul(b, c)) {
                        return Err(Error::NonAssociative { s: a, t: b, u: c });
                    }
                }
            }
        }
        Ok(())
    }

    /// Text format: blank lines and `#` comments are ignored; an optional
    /// `labels: a b c` line; then the size `N`; then `N` rows of `N`
    /// zero-based indices with `row s, column t` holding `s·t`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut labels: Option<Vec<String>> = None;
        let mut size: Option<usize> = None;
        let mut entries: Vec<usize> = Vec::new();
        let mut rows = 0usize;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("labels:") {
                if labels.is_some() || size.is_some() {
                    return Err(Error::InvalidTable(format!(
                        "line {}: labels must come once, before the size",
                        lineno + 1
                    )));
                }
                labels = Some(rest.split_whitespace().map(str::to_owned).collect());
                continue;
            }
            match size {
                None => {
                    let n: usize = line
                        .parse()
                        .map_err(|_| Error::InvalidTable(format!("line {}: bad size {line:?}", lineno + 1)))?;
                    if n == 0 || n > MAX_TABLE_SIZE {
                        return Err(Error::InvalidTable(format!("size {n} outside 1..={MAX_TABLE_SIZE}")));
                    }
                    size = Some(n);
                }
                Some(n) => {
                    if rows == n {
                        return Err(Error::InvalidTable(format!("line {}: extra row", lineno + 1)));
                    }
                    let row = line
                        .split_whitespace()
                        .map(|tok| {
                            tok.parse::<usize>()
                                .map_err(|_| Error::InvalidTable(format!("line {}: bad entry {tok:?}", lineno + 1)))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    if row.len() != n {
                        return Err(Error::InvalidTable(format!(
                            "line {}: expected {n} entries, found {}",
                            lineno + 1,
                            row.len()
                        )));
                    }
                    entries.extend(row);
                    rows += 1;
                }
            }
        }
        let n = size.ok_or_else(|| Error::InvalidTable("missing size line".into()))?;
        if rows != n {
            return Err(Error::InvalidTable(format!("expected {n} rows, found {rows}")));
        }
        match labels {
            Some(l) => Self::with_labels(n, entries, l),
            None => Self::new(n, entries),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let default_labels = self.labels.iter().enumerate().all(|(i, l)| *l == i.to_string());
        if !default_labels {
            let _ = writeln!(out, "labels: {}", self.labels.join(" "));
        }
        let _ = writeln!(out, "{}", self.size);
        for s in 0..self.size {
            let row: Vec<String> = (0..self.size).map(|t| self.mul(s, t).to_string()).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    #[inline]
    pub fn mul(&self, s: usize, t: usize) -> usize {
        self.table[s * self.size + t]
    }

    pub fn to_partial(&self) -> PartialTable {
        PartialTable {
            size: self.size,
            table: self.table.iter().map(|&v| Some(v)).collect(),
            labels: self.labels.clone(),
        }
    }

    pub fn idempotents(&self) -> Vec<usize> {
        (0..self.size).filter(|&e| self.mul(e, e) == e).collect()
    }

    pub fn identity(&self) -> Option<usize> {
        (0..self.size).find(|&e| (0..self.size).all(|s| self.mul(e, s) == s && self.mul(s, e) == s))
    }

    pub fn is_commutative(&self) -> bool {
        (0..self.size).all(|a| (a + 1..self.size).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn is_group(&self) -> bool {
        match self.identity() {
            Some(e) => (0..self.size).all(|a| (0..self.size).any(|b| self.mul(a, b) == e && self.mul(b, a) == e)),
            None => false,
        }
    }

    /// `s·t = t`.
    pub fn right_zero(n: usize) -> Self {
        let table = (0..n).flat_map(|_| 0..n).collect();
        Self::new(n, table).expect("right-zero table")
    }

    /// `s·t = s`.
    pub fn left_zero(n: usize) -> Self {
        let table = (0..n).flat_map(|s| std::iter::repeat_n(s, n)).collect();
        Self::new(n, table).expect("left-zero table")
    }

    /// `ℤ/n` under addition.
    pub fn cyclic_group(n: usize) -> Self {
        let table = (0..n).flat_map(|s| (0..n).map(move |t| (s + t) % n)).collect();
        Self::new(n, table).expect("cyclic table")
    }

    pub fn trivial() -> Self {
        Self::new(1, vec![0]).expect("trivial table")
    }

    /// Componentwise product; element `(a, b)` has index `a·|B| + b`.
    pub fn direct_product(a: &FiniteSemigroup, b: &FiniteSemigroup) -> Self {
        let n = a.size * b.size;
        let mut table = Vec::with_capacity(n * n);
        for x in 0..n {
            for y in 0..n {
                let (xa, xb) = (x / b.size, x % b.size);
                let (ya, yb) = (y / b.size, y % b.size);
                table.push(a.mul(xa, ya) * b.size + b.mul(xb, yb));
            }
        }
        let labels = (0..n)
            .map(|x| format!("({},{})", a.labels[x / b.size], b.labels[x % b.size]))
            .collect();
        Self::with_labels(n, table, labels).expect("product of semigroups")
    }

    /// Semigroup of maps on `{0..degree}` generated by `gens` under
    /// composition `(f·g)(x) = g(f(x))`. Returns `None` past `max_size`.
    pub fn from_transformations(gens: &[Vec<usize>], degree: usize, max_size: usize) -> Option<Self> {
        let mut elems: Vec<Vec<usize>> = Vec::new();
        let mut index = std::collections::HashMap::new();
        for g in gens {
            if g.len() != degree || g.iter().any(|&x| x >= degree) {
                return None;
            }
            if !index.contains_key(g) {
                index.insert(g.clone(), elems.len());
                elems.push(g.clone());
            }
        }
        let mut i = 0;
        while i < elems.len() {
            for g in gens {
                let comp: Vec<usize> = elems[i].iter().map(|&x| g[x]).collect();
                if !index.contains_key(&comp) {
                    if elems.len() >= max_size {
                        return None;
                    }
                    index.insert(comp.clone(), elems.len());
                    elems.push(comp);
                }
            }
            i += 1;
        }
        let n = elems.len();
        let mut table = Vec::with_capacity(n * n);
        for f in &elems {
            for g in &elems {
                let comp: Vec<usize> = f.iter().map(|&x| g[x]).collect();
                table.push(index[&comp]);
            }
        }
        Self::new(n, table).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_roundtrip_with_labels() {
        let text = "# cyclic of order 3\nlabels: e a b\n3\n0 1 2\n1 2 0\n2 0 1\n";
        let s = FiniteSemigroup::parse(text).unwrap();
        assert_eq!(s.labels(), ["e", "a", "b"]);
        assert_eq!(s.mul(1, 2), 0);
        assert_eq!(FiniteSemigroup::parse(&s.to_text()).unwrap(), s);
    }

    #[test]
    fn parse_errors() {
        assert!(FiniteSemigroup::parse("").is_err());
        assert!(FiniteSemigroup::parse("2\n0 1\n").is_err());
        assert!(FiniteSemigroup::parse("2\n0 1\n1 2\n").is_err());
        assert!(FiniteSemigroup::parse("2\n0 1\n1 0\n1 0\n").is_err());
        assert!(FiniteSemigroup::parse("2\nlabels: a b\n0 1\n1 0\n").is_err());
        assert!(FiniteSemigroup::parse("labels: a a\n2\n0 1\n1 0\n").is_err());
    }

    #[test]
    fn rejects_non_associative() {
        // 0·1 = 1, 1·0 = 1, 1·1 = 0, 0·0 = 1 is not associative
        let err = FiniteSemigroup::new(2, vec![1, 1, 1, 0]).unwrap_err();
        assert!(matches!(err, Error::NonAssociative { .. }));
    }

    #[test]
    fn standard_tables() {
        assert!(FiniteSemigroup::cyclic_group(6).is_group());
        assert!(!FiniteSemigroup::right_zero(3).is_group());
        assert_eq!(FiniteSemigroup::left_zero(4).idempotents().len(), 4);
        let v4 = FiniteSemigroup::direct_product(&FiniteSemigroup::cyclic_group(2), &FiniteSemigroup::cyclic_group(2));
        assert!(v4.is_group() && v4.is_commutative());
        // full transformation monoid on 2 points has 4 elements
        let t2 = FiniteSemigroup::from_transformations(&[vec![1, 0], vec![0, 0]], 2, 100).unwrap();
        assert_eq!(t2.size(), 4);
    }
}
