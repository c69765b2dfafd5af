use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::kernel::{fixed_to_f64, ExactKernel, FixedPhases};
use crate::error::{Error, Result};
use crate::phase::PhasePolynomial;
use crate::torus::Mode;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyPoint {
    pub n: u64,
    pub discrepancy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquidistReport {
    pub mode: Mode,
    pub n: u64,
    pub bins: usize,
    pub counts: Vec<u64>,
    pub expected: f64,
    /// `max |count − N/bins|`.
    pub max_bin_deviation: f64,
    /// `max_bin_deviation / (N/bins)`.
    pub max_relative_deviation: f64,
    pub chi_square: f64,
    /// Star discrepancy `D*_N` of the first `N` fractional parts.
    pub discrepancy: f64,
    pub distinct_values: usize,
    /// Fewer distinct values than bins: the sequence takes finitely many
    /// values and cannot be equidistributed.
    pub degenerate: bool,
    pub checkpoints: Vec<DiscrepancyPoint>,
}

/// `D*_N = 1/(2N) + max_i |x_(i) − (2i−1)/(2N)|` over sorted values.
fn star_discrepancy(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    let worst = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| (x - (2.0 * i as f64 + 1.0) / (2.0 * n)).abs())
        .fold(0.0f64, f64::max);
    1.0 / (2.0 * n) + worst
}

/// Fractional parts of `p(0..n)` as doubles, plus a key per value that is
/// equal exactly when the phases are equal.
fn phase_samples(p: &PhasePolynomial, n: u64) -> (Vec<f64>, Vec<u128>) {
    match p.mode() {
        Mode::Float => {
            let raw: Vec<u128> = FixedPhases::new(p, 0).take(n as usize).collect();
            (raw.iter().map(|&x| fixed_to_f64(x)).collect(), raw)
        }
        Mode::Exact => {
            let mut k = ExactKernel::new(p, 0);
            let den = BigRational::from_integer(k.denominator());
            let mut values = Vec::with_capacity(n as usize);
            let mut keys = Vec::with_capacity(n as usize);
            for _ in 0..n {
                let r: BigInt = k.next_big();
                // distinct residues below 2^128 stay distinct; larger
                // denominators are keyed by their rounded value
                let v = (BigRational::from_integer(r.clone()) / &den).to_f64().unwrap_or(0.0);
                keys.push(r.to_u128().unwrap_or_else(|| v.to_bits() as u128));
                values.push(v);
            }
            (values, keys)
        }
    }
}

/// Histogram, chi-square and star discrepancy of `frac(p(n))`, `n < N`,
/// with the discrepancy also reported at each checkpoint.
pub fn equidistribution_report(
    p: &PhasePolynomial,
    n: u64,
    bins: usize,
    checkpoints: &[u64],
) -> Result<EquidistReport> {
    if bins < 2 {
        return Err(Error::InvalidInput("at least 2 bins are required".into()));
    }
    if n == 0 || n > 1 << 28 {
        return Err(Error::InvalidInput("N must be in 1..=2^28".into()));
    }
    let mut cps: Vec<u64> = checkpoints.to_vec();
    if let Some(&bad) = cps.iter().find(|&&c| c == 0 || c > n) {
        return Err(Error::InvalidInput(format!("checkpoint {bad} outside 1..={n}")));
    }
    cps.push(n);
    cps.sort_unstable();
    cps.dedup();

    let (values, mut keys) = phase_samples(p, n);
    let mut counts = vec![0u64; bins];
    for &x in &values {
        counts[((x * bins as f64) as usize).min(bins - 1)] += 1;
    }
    let expected = n as f64 / bins as f64;
    let max_bin_deviation = counts
        .iter()
        .map(|&c| (c as f64 - expected).abs())
        .fold(0.0f64, f64::max);
    let chi_square = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();

    let checkpoints: Vec<DiscrepancyPoint> = cps
        .iter()
        .map(|&c| {
            let mut prefix = values[..c as usize].to_vec();
            prefix.sort_by(f64::total_cmp);
            DiscrepancyPoint {
                n: c,
                discrepancy: star_discrepancy(&prefix),
            }
        })
        .collect();

    keys.sort_unstable();
    keys.dedup();
    let distinct_values = keys.len();
    Ok(EquidistReport {
        mode: p.mode(),
        n,
        bins,
        counts,
        expected,
        max_bin_deviation,
        max_relative_deviation: max_bin_deviation / expected,
        chi_square,
        discrepancy: checkpoints.last().expect("N is a checkpoint").discrepancy,
        distinct_values,
        degenerate: distinct_values < bins,
        checkpoints,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_rotation_is_degenerate() {
        let r = equidistribution_report(&PhasePolynomial::exact(&[(0, 1), (1, 2)]), 1000, 10, &[]).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.distinct_values, 2);
        assert_eq!(r.counts[0], 500);
        assert_eq!(r.counts[5], 500);
    }

    #[test]
    fn golden_rotation_is_even() {
        let p = PhasePolynomial::float(&[0.0, 0.6180339887498949]);
        let r = equidistribution_report(&p, 100_000, 100, &[]).unwrap();
        assert!(!r.degenerate);
        assert!(r.max_relative_deviation < 0.05, "{}", r.max_relative_deviation);
    }

    #[test]
    fn discrepancy_of_grid() {
        let sorted: Vec<f64> = (0..10).map(|i| (2 * i + 1) as f64 / 20.0).collect();
        assert!((star_discrepancy(&sorted) - 0.05).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_arguments() {
        let p = PhasePolynomial::float(&[0.0, 0.3]);
        assert!(equidistribution_report(&p, 100, 1, &[]).is_err());
        assert!(equidistribution_report(&p, 100, 10, &[101]).is_err());
    }
}
