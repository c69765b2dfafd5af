//! Birkhoff averages and equidistribution of `n ↦ e(p(n))`.
//!
//! Unique ergodicity of Weyl-algebra elements on `ℤ` cannot be checked by
//! computation; what can be checked is that the averages
//! `(1/N)Σ_{n<N} e(p(n))` behave as predicted: exact period sums for
//! rational phases, decay for an irrational leading coefficient.
//!
//! Float sums follow a fixed contract so results do not depend on the
//! thread count: `[0, N)` is cut at every multiple of `2¹⁶` and at every
//! checkpoint, each segment is summed on its own with compensated
//! summation, and segment totals are folded left to right.

mod equidist;
mod kernel;

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_with::{serde_as, DisplayFromStr};

pub use equidist::{equidistribution_report, DiscrepancyPoint, EquidistReport};
pub use kernel::{
    anchor_block, common_denominator, fixed_coefficients, fixed_from_f64, fixed_to_f64, unit, weyl_kernel,
    ExactKernel, FixedPhases, WeylKernel, RENORMALIZE_PERIOD,
};

use crate::error::{Error, Result};
use crate::phase::PhasePolynomial;
use crate::torus::Mode;

/// Segment length of the summation contract.
pub const CHUNK: u64 = 1 << 16;

/// Largest `N` accepted by the harness.
pub const MAX_STEPS: u64 = 1 << 34;

/// Neumaier summation on both components.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CompensatedSum {
    sum: Complex64,
    comp: Complex64,
}

fn neumaier(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

impl CompensatedSum {
    pub fn add(&mut self, z: Complex64) {
        neumaier(&mut self.sum.re, &mut self.comp.re, z.re);
        neumaier(&mut self.sum.im, &mut self.comp.im, z.im);
    }

    pub fn total(&self) -> Complex64 {
        self.sum + self.comp
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AveragePoint {
    pub n: u64,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
}

impl AveragePoint {
    fn new(n: u64, total: Complex64) -> Self {
        let avg = total / n as f64;
        AveragePoint {
            n,
            re: avg.re,
            im: avg.im,
            abs: avg.norm(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AverageSeries {
    pub mode: Mode,
    pub degree: usize,
    pub checkpoints: Vec<AveragePoint>,
    /// Largest `||e(p(n))| − 1|` produced by the kernel (zero in exact
    /// mode, where values are computed from exact residues).
    pub max_modulus_deviation: f64,
}

impl AverageSeries {
    pub fn last(&self) -> &AveragePoint {
        self.checkpoints.last().expect("at least one checkpoint")
    }

    pub fn at(&self, n: u64) -> Option<&AveragePoint> {
        self.checkpoints.iter().find(|c| c.n == n)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,re,im,abs\n");
        for c in &self.checkpoints {
            out.push_str(&format!("{},{:?},{:?},{:?}\n", c.n, c.re, c.im, c.abs));
        }
        out
    }
}

/// Parses `"1e3,1e4,1000000"`: each entry must denote a positive integer.
pub fn parse_checkpoints(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let p = p.trim();
            if let Ok(n) = p.parse::<u64>() {
                return Ok(n);
            }
            let x: f64 = p
                .parse()
                .map_err(|_| Error::parse(format!("bad checkpoint {p:?}")))?;
            if x.is_finite() && x >= 1.0 && x.fract() == 0.0 && x <= MAX_STEPS as f64 {
                Ok(x as u64)
            } else {
                Err(Error::parse(format!("checkpoint {p:?} is not a positive integer")))
            }
        })
        .collect()
}

/// Sorted, deduplicated checkpoints with `n` appended.
fn checkpoint_set(n: u64, checkpoints: &[u64]) -> Result<Vec<u64>> {
    if n == 0 || n > MAX_STEPS {
        return Err(Error::InvalidInput(format!("N must be in 1..={MAX_STEPS}")));
    }
    let mut cps: Vec<u64> = checkpoints.to_vec();
    if let Some(&bad) = cps.iter().find(|&&c| c == 0 || c > n) {
        return Err(Error::InvalidInput(format!("checkpoint {bad} outside 1..={n}")));
    }
    cps.push(n);
    cps.sort_unstable();
    cps.dedup();
    Ok(cps)
}

/// Segment boundaries: multiples of [`CHUNK`] and the checkpoints.
fn segments(cps: &[u64]) -> Vec<(u64, u64)> {
    let n = *cps.last().expect("non-empty");
    let mut cuts: Vec<u64> = (1..=(n - 1) / CHUNK).map(|i| i * CHUNK).collect();
    cuts.extend_from_slice(cps);
    cuts.sort_unstable();
    cuts.dedup();
    let mut start = 0;
    cuts.into_iter()
        .map(|end| {
            let seg = (start, end);
            start = end;
            seg
        })
        .collect()
}

/// `(1/N)Σ_{n<N} e(p(n))` at each checkpoint and at `N`.
pub fn birkhoff_average(p: &PhasePolynomial, n: u64, checkpoints: &[u64]) -> Result<AverageSeries> {
    let cps = checkpoint_set(n, checkpoints)?;
    let (points, dev) = match p.mode() {
        Mode::Float => float_average(p, &cps),
        Mode::Exact => {
            let counts = exact_phase_counts_at(p, &cps);
            let points = cps
                .iter()
                .zip(&counts)
                .map(|(&c, pc)| AveragePoint::new(c, pc.sum()))
                .collect();
            (points, 0.0)
        }
    };
    Ok(AverageSeries {
        mode: p.mode(),
        degree: p.degree(),
        checkpoints: points,
        max_modulus_deviation: dev,
    })
}

fn float_average(p: &PhasePolynomial, cps: &[u64]) -> (Vec<AveragePoint>, f64) {
    let segs = segments(cps);
    let partial: Vec<(Complex64, f64)> = segs
        .par_iter()
        .map(|&(a, b)| {
            let mut acc = CompensatedSum::default();
            let mut dev = 0.0f64;
            for z in WeylKernel::new(p, a).take((b - a) as usize) {
                dev = dev.max((z.norm() - 1.0).abs());
                acc.add(z);
            }
            (acc.total(), dev)
        })
        .collect();
    let mut acc = CompensatedSum::default();
    let mut dev = 0.0f64;
    let mut out = Vec::with_capacity(cps.len());
    let mut next_cp = cps.iter().peekable();
    for (&(_, end), &(s, d)) in segs.iter().zip(&partial) {
        acc.add(s);
        dev = dev.max(d);
        if next_cp.peek() == Some(&&end) {
            out.push(AveragePoint::new(end, acc.total()));
            next_cp.next();
        }
    }
    (out, dev)
}

/// How often each phase `r/D` occurs among `p(0), …, p(N−1)`.
#[serde_as]
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseCounts {
    #[serde_as(as = "DisplayFromStr")]
    pub denominator: BigInt,
    pub n: u64,
    #[serde_as(as = "BTreeMap<DisplayFromStr, _>")]
    pub counts: BTreeMap<BigInt, u64>,
}

impl PhaseCounts {
    /// `Σ_r count_r·e(r/D)` summed in increasing `r`.
    pub fn sum(&self) -> Complex64 {
        let den = BigRational::from_integer(self.denominator.clone());
        let mut acc = CompensatedSum::default();
        for (r, &c) in &self.counts {
            let phase = (BigRational::from_integer(r.clone()) / &den).to_f64().unwrap_or(0.0);
            acc.add(unit(phase) * c as f64);
        }
        acc.total()
    }

    pub fn average(&self) -> Complex64 {
        self.sum() / self.n as f64
    }

    /// Number of distinct phases.
    pub fn support(&self) -> usize {
        self.counts.len()
    }
}

/// Exact phase multiset of `p(0..n)` for an exact polynomial.
pub fn exact_phase_counts(p: &PhasePolynomial, n: u64) -> PhaseCounts {
    if n == 0 {
        return PhaseCounts {
            denominator: common_denominator(p),
            n,
            counts: BTreeMap::new(),
        };
    }
    exact_phase_counts_at(p, &[n]).pop().expect("one checkpoint")
}

fn exact_phase_counts_at(p: &PhasePolynomial, cps: &[u64]) -> Vec<PhaseCounts> {
    let den = common_denominator(p);
    let segs = segments(cps);
    let partial: Vec<HashMap<BigInt, u64>> = segs
        .par_iter()
        .map(|&(a, b)| {
            let mut k = ExactKernel::new(p, a);
            let len = b - a;
            let mut out: HashMap<BigInt, u64> = HashMap::new();
            if let ExactKernel::Small { .. } = k {
                let mut small: HashMap<u64, u64> = HashMap::new();
                for _ in 0..len {
                    *small.entry(k.next_small().expect("small path")).or_default() += 1;
                }
                out.extend(small.into_iter().map(|(r, c)| (BigInt::from(r), c)));
            } else {
                for _ in 0..len {
                    *out.entry(k.next_big()).or_default() += 1;
                }
            }
            out
        })
        .collect();
    let mut running: BTreeMap<BigInt, u64> = BTreeMap::new();
    let mut out = Vec::with_capacity(cps.len());
    let mut next_cp = cps.iter().peekable();
    for (&(_, end), part) in segs.iter().zip(partial) {
        for (r, c) in part {
            *running.entry(r).or_default() += c;
        }
        if next_cp.peek() == Some(&&end) {
            out.push(PhaseCounts {
                denominator: den.clone(),
                n: end,
                counts: running.clone(),
            });
            next_cp.next();
        }
    }
    out
}
