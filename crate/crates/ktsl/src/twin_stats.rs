//! Twin-prime counts against the Hardy-Littlewood prediction.
//!
//! `pi2(x)` counts primes `p <= x` with `p + 2` prime. The prediction is
//! `S * Li2(x)` where `S = 2 prod_{p>=3} (1 - 1/(p-1)^2)` is the twin
//! prime constant and `Li2(x) = int_2^x dt/log^2 t`.

use crate::error::{Error, Result};
use crate::numeric::{adaptive_simpson, Kahan};
use crate::primes::{PrimeTable, SieveConfig};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// One row of the comparison table.
#[derive(Debug, Clone, Serialize)]
pub struct TwinTableRow {
    pub x: u64,
    pub pi2: u64,
    pub prediction: f64,
    pub difference: f64,
}

/// Truncated Euler product for the twin prime constant, with a certified
/// bound on the truncation error.
#[derive(Debug, Clone, Serialize)]
pub struct SingularSeriesValue {
    pub value: f64,
    pub truncation_prime: u64,
    pub tail_bound: f64,
}

/// Outputs of the Cramer-model comparison.
#[derive(Debug, Clone, Serialize)]
pub struct CramerEstimates {
    pub naive: f64,
    pub corrected: f64,
    pub monte_carlo_mean: f64,
    pub monte_carlo_std: f64,
}

fn check_twin_range(table: &PrimeTable, x: u64) -> Result<()> {
    if x.saturating_add(2) >= table.limit() {
        return Err(Error::Range(format!(
            "need primality of {} but table stops below {}",
            x + 2,
            table.limit()
        )));
    }
    Ok(())
}

/// pi2(x): primes `p <= x` such that `p + 2` is also prime.
pub fn count_twins(table: &PrimeTable, x: u64) -> Result<u64> {
    check_twin_range(table, x)?;
    let mut count = 0;
    for p in table.primes_in(0, x + 1) {
        if table.is_prime(p + 2) {
            count += 1;
        }
    }
    Ok(count)
}

/// Same count through the autocorrelation of the prime indicator: the
/// number of prime pairs `(p, q)` with `p, q <= x + 2` and `q - p = 2`,
/// which is what the circle-method integral computes exactly.
pub fn circle_check(table: &PrimeTable, x: u64) -> Result<u64> {
    check_twin_range(table, x)?;
    let words = table.words();
    // pairs are indexed by the smaller element p <= x
    let last = x; // highest allowed p
    let full = (last / 64) as usize;
    let mut total: u64 = 0;
    for i in 0..=full {
        let w = words[i];
        let hi = words.get(i + 1).copied().unwrap_or(0);
        let mut pairs = w & ((w >> 2) | (hi << 62));
        if i == full {
            let rem = last % 64 + 1;
            if rem < 64 {
                pairs &= (1u64 << rem) - 1;
            }
        }
        total += pairs.count_ones() as u64;
    }
    Ok(total)
}

/// Sum of `1/p + 1/(p+2)` over twin pairs with `p <= x`.
///
/// Overlapping pairs both count: 5 contributes through (3,5) and (5,7),
/// following the usual display of the series for Brun's constant. Some
/// references instead sum each twin prime once; this one does not.
pub fn brun_partial(table: &PrimeTable, x: u64) -> Result<f64> {
    check_twin_range(table, x)?;
    // fixed blocking so the accumulation order never depends on threads
    let block = 1u64 << 22;
    let mut acc = Kahan::default();
    let mut lo = 0;
    while lo <= x {
        let hi = (lo + block).min(x + 1);
        let mut part = Kahan::default();
        for p in table.primes_in(lo, hi) {
            if table.is_prime(p + 2) {
                part.add(1.0 / p as f64);
                part.add(1.0 / (p + 2) as f64);
            }
        }
        acc.merge(part);
        lo = hi;
    }
    Ok(acc.value())
}

/// Smallest truncation point whose certified tail bound is below `target`.
fn truncation_for(target: f64) -> Result<u64> {
    // |S - S_P| <= S_P * sum_{p > P} |log(1 - 1/(p-1)^2)| and the sum is
    // below sum_{n > P} 1/(n-1)^2 <= 1/(P-1); S_P <= 3/2 once p = 3 is in.
    let p = (1.5 / target).ceil() as u64 + 1;
    let cap = 1u64 << 34;
    if !(target > 0.0) {
        return Err(Error::Validation("target_abs_err must be positive".into()));
    }
    if p > cap {
        return Err(Error::Resource(format!(
            "tolerance {target:e} needs an Euler product past 2^34; \
             smallest achievable bound is {:e}",
            tail_bound_at(cap)
        )));
    }
    Ok(p.max(3))
}

fn tail_bound_at(p: u64) -> f64 {
    1.5 / (p - 1) as f64
}

/// Twin prime constant by Euler product over `p <= P`, `P` chosen from
/// the requested absolute error.
pub fn singular_series(target_abs_err: f64) -> Result<SingularSeriesValue> {
    singular_series_with(target_abs_err, &SieveConfig::default())
}

pub fn singular_series_with(
    target_abs_err: f64,
    config: &SieveConfig,
) -> Result<SingularSeriesValue> {
    let p_bound = truncation_for(target_abs_err)?;
    // log-space accumulation: per-factor rounding stays at the ulp level
    // instead of compounding across ~10^8 multiplications
    let mut log_sum = Kahan::default();
    let table = PrimeTable::build_with(p_bound + 1, config, None)?;
    for p in table.primes_in(3, p_bound + 1) {
        let q = (p - 1) as f64;
        log_sum.add((-1.0 / (q * q)).ln_1p());
    }
    Ok(SingularSeriesValue {
        value: 2.0 * log_sum.value().exp(),
        truncation_prime: p_bound,
        tail_bound: tail_bound_at(p_bound),
    })
}

/// `Li2(x) = int_2^x dt / log^2 t` by adaptive Simpson quadrature.
pub fn li2(x: f64, rel_err: f64) -> Result<f64> {
    if !(x >= 2.0) {
        return Err(Error::Validation(format!("li2 needs x >= 2, got {x}")));
    }
    adaptive_simpson(|t| 1.0 / t.ln().powi(2), 2.0, x, rel_err)
}

/// Default quadrature tolerance for table predictions.
pub const LI2_REL_ERR: f64 = 1e-9;

/// Build comparison rows for the requested values of `x`.
pub fn twin_table(
    table: &PrimeTable,
    xs: &[u64],
    sigma: &SingularSeriesValue,
) -> Result<Vec<TwinTableRow>> {
    let mut rows = Vec::with_capacity(xs.len());
    for &x in xs {
        let pi2 = count_twins(table, x)?;
        let prediction = sigma.value * li2(x as f64, LI2_REL_ERR)?;
        rows.push(TwinTableRow {
            x,
            pi2,
            prediction,
            difference: pi2 as f64 - prediction,
        });
    }
    Ok(rows)
}

/// Cramer-model twin count: the integral heuristic, its corrected form,
/// and a seeded simulation where each `n in [3, x]` joins independently
/// with probability `1/log n`.
pub fn cramer_estimates(
    x: f64,
    trials: u64,
    seed: u64,
    sigma: &SingularSeriesValue,
) -> Result<CramerEstimates> {
    if !(x >= 10.0) {
        return Err(Error::Validation(format!("cramer needs x >= 10, got {x}")));
    }
    if trials < 1 {
        return Err(Error::Validation("cramer needs at least one trial".into()));
    }
    let naive = li2(x, LI2_REL_ERR)?;
    let corrected = sigma.value * naive;

    let n_max = x.floor() as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = Vec::with_capacity(trials as usize);
    let mut included = vec![false; (n_max + 1) as usize];
    for _ in 0..trials {
        for n in 3..=n_max {
            included[n as usize] = rng.gen::<f64>() < 1.0 / (n as f64).ln();
        }
        let mut c = 0u64;
        for n in 3..=n_max.saturating_sub(2) {
            if included[n as usize] && included[(n + 2) as usize] {
                c += 1;
            }
        }
        counts.push(c as f64);
    }
    let mean = counts.iter().sum::<f64>() / trials as f64;
    let std = if trials > 1 {
        (counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (trials - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(CramerEstimates {
        naive,
        corrected,
        monte_carlo_mean: mean,
        monte_carlo_std: std,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(limit: u64) -> PrimeTable {
        PrimeTable::build(limit).unwrap()
    }

    #[test]
    fn twin_counts_small() {
        let t = table(2000);
        assert_eq!(count_twins(&t, 10).unwrap(), 2); // (3,5), (5,7)
        assert_eq!(count_twins(&t, 100).unwrap(), 8);
        assert_eq!(count_twins(&t, 1000).unwrap(), 35);
    }

    #[test]
    fn twin_count_range_error() {
        let t = table(100);
        assert!(count_twins(&t, 98).is_err());
        assert!(count_twins(&t, 97).is_ok());
    }

    #[test]
    fn circle_check_equals_count_twins() {
        let t = table(100_000 + 64);
        for x in [10, 100, 1000, 10_000, 100_000 - 3] {
            assert_eq!(
                circle_check(&t, x).unwrap(),
                count_twins(&t, x).unwrap(),
                "x = {x}"
            );
        }
    }

    #[test]
    fn brun_first_brackets() {
        let t = table(100);
        let b3 = brun_partial(&t, 3).unwrap();
        assert!((b3 - (1.0 / 3.0 + 1.0 / 5.0)).abs() < 1e-15);
        let b5 = brun_partial(&t, 5).unwrap();
        assert!((b5 - (1.0 / 3.0 + 2.0 / 5.0 + 1.0 / 7.0)).abs() < 1e-15);
    }

    #[test]
    fn brun_monotone() {
        let t = table(10_000);
        let mut prev = 0.0;
        for x in [3, 10, 100, 1000, 9000] {
            let b = brun_partial(&t, x).unwrap();
            assert!(b >= prev);
            prev = b;
        }
    }

    #[test]
    fn singular_series_single_factor() {
        // coarse tolerance keeps only the p = 3 factor: 2 * (1 - 1/4)
        let s = singular_series(0.8).unwrap();
        assert_eq!(s.truncation_prime, 3);
        assert!((s.value - 1.5).abs() < 1e-15);
    }

    #[test]
    fn singular_series_decreases_with_truncation() {
        let coarse = singular_series(0.1).unwrap();
        let mid = singular_series(1e-3).unwrap();
        let fine = singular_series(1e-6).unwrap();
        assert!(coarse.value > mid.value);
        assert!(mid.value > fine.value);
    }

    #[test]
    fn singular_series_brackets_reference_constant() {
        // 2*C2 (twin prime constant, OEIS A005597 doubled)
        let reference = 1.3203236316937391;
        for target in [1e-2, 1e-4, 1e-6] {
            let s = singular_series(target).unwrap();
            assert!(s.tail_bound <= target);
            assert!(
                (s.value - reference).abs() <= s.tail_bound,
                "target {target}: {} vs {reference} (bound {})",
                s.value,
                s.tail_bound
            );
        }
    }

    #[test]
    fn li2_domain_and_empty() {
        assert!(li2(1.9, 1e-9).is_err());
        assert_eq!(li2(2.0, 1e-9).unwrap(), 0.0);
    }

    #[test]
    fn li2_matches_fixed_step_simpson_oracle() {
        // brute-force oracle: composite Simpson with 10^6 fixed panels
        let oracle = {
            let (a, b) = (2.0f64, 1000.0f64);
            let n = 1_000_000;
            let h = (b - a) / n as f64;
            let f = |t: f64| 1.0 / t.ln().powi(2);
            let mut s = f(a) + f(b);
            for i in 1..n {
                let t = a + i as f64 * h;
                s += f(t) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            s * h / 3.0
        };
        let v = li2(1000.0, 1e-10).unwrap();
        assert!(
            (v - oracle).abs() / oracle <= 1e-8,
            "adaptive {v} vs oracle {oracle}"
        );
    }

    #[test]
    fn prediction_matches_paper_row_1e4() {
        let sigma = singular_series(1e-8).unwrap();
        let pred = sigma.value * li2(1e4, 1e-9).unwrap();
        assert!((pred - 214.2).abs() < 0.05, "prediction {pred}");
    }

    #[test]
    fn twin_table_small_rows() {
        let t = table(1 << 20);
        let sigma = singular_series(1e-8).unwrap();
        let rows = twin_table(&t, &[10, 10_000], &sigma).unwrap();
        assert_eq!(rows[0].pi2, 2);
        assert!((rows[0].prediction - 4.8).abs() < 0.1);
        assert!((rows[0].difference - (2.0 - rows[0].prediction)).abs() < 1e-12);
        assert_eq!(rows[1].pi2, 205);
        assert!((rows[1].prediction - 214.2).abs() < 0.1);
        let empty = twin_table(&t, &[], &sigma).unwrap();
        assert!(empty.is_empty());
    }

    #[test]
    fn cramer_simulation_tracks_naive() {
        let sigma = singular_series(1e-6).unwrap();
        let est = cramer_estimates(1e4, 200, 0, &sigma).unwrap();
        assert!((est.corrected - 214.2).abs() < 0.05);
        assert!((est.naive - est.corrected / sigma.value).abs() < 1e-9);
        assert!(est.monte_carlo_std > 0.0);
        assert!(
            (est.monte_carlo_mean - est.naive).abs() <= 4.0 * est.monte_carlo_std,
            "mean {} naive {} std {}",
            est.monte_carlo_mean,
            est.naive,
            est.monte_carlo_std
        );
    }

    #[test]
    fn cramer_is_reproducible() {
        let sigma = singular_series(1e-4).unwrap();
        let a = cramer_estimates(1000.0, 20, 42, &sigma).unwrap();
        let b = cramer_estimates(1000.0, 20, 42, &sigma).unwrap();
        assert_eq!(a.monte_carlo_mean, b.monte_carlo_mean);
        assert_eq!(a.monte_carlo_std, b.monte_carlo_std);
    }
}
