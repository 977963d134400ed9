//! Desk-scale statistics for the Liouville function: short-interval
//! averages, twisted exponential sums, logarithmic Chowla correlations,
//! small-prime-factor density, and an empirical Dirichlet-polynomial
//! mean value.

use crate::error::{Error, Result};
use crate::numeric::Kahan;
use crate::primes::{LiouvilleTable, PrimeTable};
use serde::Serialize;

/// Exceedance statistics over a family of sliding windows.
#[derive(Debug, Clone, Serialize)]
pub struct IntervalStats {
    pub x: u64,
    pub h: u64,
    pub threshold_const: f64,
    /// Fraction of windows with |sum| above c * h / (log h)^{1/10}.
    pub exceed_fraction: f64,
    /// Mean of |sum| / h over all windows.
    pub mean_abs_normalized: f64,
}

/// Correlation sums at one checkpoint x.
#[derive(Debug, Clone, Serialize)]
pub struct ChowlaPoint {
    pub x: u64,
    pub shift: u64,
    /// sum_{n < x} lambda(n) lambda(n+shift) / n, divided by log x.
    pub log_avg: f64,
    /// sum_{n <= x} lambda(n) lambda(n+shift), divided by x.
    pub plain_avg: f64,
}

/// Windows are the h-term ranges `[y, y+h)` for every integer start
/// `y` in `[X, 2X-h]`, so every window sits inside `[X, 2X)`.
fn check_window_args(lt: &LiouvilleTable, x: u64, h: u64) -> Result<()> {
    if h < 3 || h > x {
        return Err(Error::Validation(format!(
            "window length h={h} must satisfy 3 <= h <= X={x}"
        )));
    }
    if 2 * x > lt.limit() + 1 {
        return Err(Error::Range(format!(
            "windows reach {} but the table stops at {}",
            2 * x - 1,
            lt.limit()
        )));
    }
    Ok(())
}

fn window_threshold(c: f64, h: u64) -> f64 {
    c * h as f64 / (h as f64).ln().powf(0.1)
}

/// Recompute exponential windows from scratch this often to cap the
/// drift of the incremental complex updates.
const RESYNC_INTERVAL: u64 = 1 << 16;

/// Sliding-window Liouville sums with threshold exceedance counts.
pub fn interval_stats(lt: &LiouvilleTable, x: u64, h: u64, c: f64) -> Result<IntervalStats> {
    check_window_args(lt, x, h)?;
    let threshold = window_threshold(c, h);
    let n_windows = x - h + 1;
    let mut exceed = 0u64;
    let mut abs_sum = Kahan::default();
    // integer sliding sum: exact, so chunked parallel execution could
    // never change a single bit; the plain loop is already fast enough
    let mut s: i64 = (x..x + h).map(|n| lt.lambda(n)).sum();
    for w in 0..n_windows {
        if (s.abs() as f64) > threshold {
            exceed += 1;
        }
        abs_sum.add(s.abs() as f64);
        let y = x + w;
        if w + 1 < n_windows {
            s += lt.lambda(y + h) - lt.lambda(y);
        }
    }
    Ok(IntervalStats {
        x,
        h,
        threshold_const: c,
        exceed_fraction: exceed as f64 / n_windows as f64,
        mean_abs_normalized: abs_sum.value() / h as f64 / n_windows as f64,
    })
}

/// Same windows, but each term is twisted by the phase e(j*theta) for
/// offset j within the window. theta = 0 takes the integer path and is
/// bitwise identical to `interval_stats`.
pub fn exp_sum_stats(lt: &LiouvilleTable, x: u64, h: u64, theta: f64, c: f64) -> Result<IntervalStats> {
    if !(0.0..1.0).contains(&theta) {
        return Err(Error::Validation(format!(
            "theta must lie in [0, 1), got {theta}"
        )));
    }
    if theta == 0.0 {
        return interval_stats(lt, x, h, c);
    }
    check_window_args(lt, x, h)?;
    let threshold = window_threshold(c, h);
    let n_windows = x - h + 1;
    let two_pi = std::f64::consts::TAU;
    let rot_back = ((-two_pi * theta).cos(), (-two_pi * theta).sin());
    let rot_h = ((two_pi * theta * h as f64).cos(), (two_pi * theta * h as f64).sin());

    let from_scratch = |y: u64| -> (f64, f64) {
        let mut re = 0.0;
        let mut im = 0.0;
        for j in 0..h {
            let lam = lt.lambda(y + j) as f64;
            let (s, cth) = (two_pi * theta * j as f64).sin_cos();
            re += lam * cth;
            im += lam * s;
        }
        (re, im)
    };

    let mut exceed = 0u64;
    let mut abs_sum = Kahan::default();
    let (mut re, mut im) = (0.0, 0.0);
    for w in 0..n_windows {
        let y = x + w;
        if w % RESYNC_INTERVAL == 0 {
            (re, im) = from_scratch(y);
        }
        let norm = (re * re + im * im).sqrt();
        if norm > threshold {
            exceed += 1;
        }
        abs_sum.add(norm);
        if w + 1 < n_windows {
            // S(y+1) = (S(y) - lambda(y) + lambda(y+h) e(h theta)) e(-theta)
            let lam_out = lt.lambda(y) as f64;
            let lam_in = lt.lambda(y + h) as f64;
            let tre = re - lam_out + lam_in * rot_h.0;
            let tim = im + lam_in * rot_h.1;
            re = tre * rot_back.0 - tim * rot_back.1;
            im = tre * rot_back.1 + tim * rot_back.0;
        }
    }
    Ok(IntervalStats {
        x,
        h,
        threshold_const: c,
        exceed_fraction: exceed as f64 / n_windows as f64,
        mean_abs_normalized: abs_sum.value() / h as f64 / n_windows as f64,
    })
}

/// Two-point correlation sums at each requested checkpoint.
pub fn chowla_scan(lt: &LiouvilleTable, xs: &[u64], shift: u64) -> Result<Vec<ChowlaPoint>> {
    if shift < 1 {
        return Err(Error::Validation("shift must be >= 1".into()));
    }
    let mut xs_sorted: Vec<u64> = xs.to_vec();
    xs_sorted.sort_unstable();
    if let Some(&min) = xs_sorted.first() {
        if min < 2 {
            return Err(Error::Validation("checkpoints must be >= 2".into()));
        }
    }
    if let Some(&max) = xs_sorted.last() {
        if max + shift > lt.limit() {
            return Err(Error::Range(format!(
                "chowla needs lambda up to {} but the table stops at {}",
                max + shift,
                lt.limit()
            )));
        }
    }
    let mut points: Vec<ChowlaPoint> = Vec::with_capacity(xs.len());
    let mut log_sum = Kahan::default();
    let mut plain_sum: i64 = 0;
    let mut log_at_x = 0.0;
    let mut iter = xs_sorted.iter().peekable();
    let max = xs_sorted.last().copied().unwrap_or(0);
    for n in 1..=max {
        // the log sum is over n < x: snapshot before adding term n = x
        if iter.peek() == Some(&&n) {
            log_at_x = log_sum.value();
        }
        let prod = lt.lambda(n) * lt.lambda(n + shift);
        log_sum.add(prod as f64 / n as f64);
        plain_sum += prod;
        while iter.peek() == Some(&&n) {
            iter.next();
            points.push(ChowlaPoint {
                x: n,
                shift,
                log_avg: log_at_x / (n as f64).ln(),
                plain_avg: plain_sum as f64 / n as f64,
            });
        }
    }
    // restore the caller's order
    let by_x = points;
    let mut out = Vec::with_capacity(xs.len());
    for &x in xs {
        let p = by_x.iter().find(|p| p.x == x).unwrap();
        out.push(p.clone());
    }
    Ok(out)
}

/// Density of integers in `[X, 2X)` with a prime factor in
/// `I_h = [exp((log h)^{9/10}), h]`, plus the mean number of distinct
/// such factors.
pub fn small_factor_density(
    pt: &PrimeTable,
    x: u64,
    h: u64,
) -> Result<(f64, f64)> {
    if h < 16 {
        return Err(Error::Validation(format!(
            "h = {h} is too small for a nonempty factor window (need h >= 16)"
        )));
    }
    if h > x {
        return Err(Error::Validation(format!("need h <= X, got h={h}, X={x}")));
    }
    if h >= pt.limit() {
        return Err(Error::Range(format!(
            "factor window reaches {h} but prime table stops at {}",
            pt.limit()
        )));
    }
    let lo = ((h as f64).ln().powf(0.9)).exp().ceil() as u64;
    let n = x as usize;
    let mut counts = vec![0u16; n];
    for p in pt.primes_in(lo, h + 1) {
        let mut m = x.div_ceil(p) * p;
        while m < 2 * x {
            counts[(m - x) as usize] += 1;
            m += p;
        }
    }
    let with_factor = counts.iter().filter(|&&c| c > 0).count();
    let total: u64 = counts.iter().map(|&c| c as u64).sum();
    Ok((with_factor as f64 / n as f64, total as f64 / n as f64))
}

/// Riemann-sum approximation of the second moment of a Dirichlet
/// polynomial over `[T, 2T]`. Exploratory: the quadrature error is not
/// certified.
pub fn dirichlet_mean_value(coeffs: &[f64], t_lo: f64, grid_step: f64) -> Result<f64> {
    let n = coeffs.len();
    if n == 0 {
        return Err(Error::Validation("need at least one coefficient".into()));
    }
    if coeffs.iter().any(|a| !(-1.0..=1.0).contains(a)) {
        return Err(Error::Validation("coefficients must lie in [-1, 1]".into()));
    }
    if !(t_lo > 0.0) || !(grid_step > 0.0) {
        return Err(Error::Validation("T and grid_step must be positive".into()));
    }
    let resolution = if n > 1 {
        1.0 / (4.0 * (n as f64).ln())
    } else {
        f64::INFINITY
    };
    if grid_step > resolution {
        return Err(Error::Validation(format!(
            "grid_step {grid_step} too coarse; need <= {resolution} for N = {n}"
        )));
    }
    let steps = (t_lo / grid_step).ceil() as usize;
    let dt = t_lo / steps as f64;
    let ln_n: Vec<f64> = (1..=n).map(|m| (m as f64).ln()).collect();
    let mut acc = Kahan::default();
    for i in 0..steps {
        let t = t_lo + (i as f64 + 0.5) * dt;
        let mut re = 0.0;
        let mut im = 0.0;
        for (a, l) in coeffs.iter().zip(&ln_n) {
            // n^{-it} = e^{-i t log n}
            let (s, c) = (-t * l).sin_cos();
            re += a * c;
            im += a * s;
        }
        acc.add(re * re + im * im);
    }
    Ok(acc.value() * dt)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lt(limit: u64) -> LiouvilleTable {
        LiouvilleTable::build(limit).unwrap()
    }

    #[test]
    fn single_window_with_infinite_threshold() {
        let t = lt(4000);
        let s = interval_stats(&t, 1000, 1000, 1e18).unwrap();
        assert_eq!(s.exceed_fraction, 0.0);
        assert!(s.mean_abs_normalized <= 1.0);
    }

    #[test]
    fn sliding_sums_match_direct_resummation() {
        use rand::{Rng, SeedableRng};
        let t = lt(40_000);
        let (x, h) = (10_000u64, 50u64);
        // reference: direct window sums
        let direct = |y: u64| -> i64 { (y..y + h).map(|n| t.lambda(n)).sum() };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        // spot-check the incremental path through the public statistic:
        // a threshold just below |S(y*)| must count y* as exceeding
        for _ in 0..200 {
            let y = rng.gen_range(x..=2 * x - h);
            let s = direct(y).abs();
            // all windows: max |S| over the family
            let _ = s;
        }
        // exceed_fraction at threshold u equals the direct count
        let u = 8.0f64;
        let c = u / window_threshold(1.0, h);
        let stats = interval_stats(&t, x, h, c).unwrap();
        let expected = (x..=2 * x - h)
            .filter(|&y| (direct(y).abs() as f64) > u)
            .count() as f64
            / (x - h + 1) as f64;
        assert!((stats.exceed_fraction - expected).abs() < 1e-15);
    }

    #[test]
    fn exp_sum_at_zero_theta_is_bitwise_interval_stats() {
        let t = lt(8000);
        let a = interval_stats(&t, 2000, 100, 0.7).unwrap();
        let b = exp_sum_stats(&t, 2000, 100, 0.0, 0.7).unwrap();
        assert_eq!(a.exceed_fraction.to_bits(), b.exceed_fraction.to_bits());
        assert_eq!(
            a.mean_abs_normalized.to_bits(),
            b.mean_abs_normalized.to_bits()
        );
    }

    #[test]
    fn exp_sum_incremental_matches_direct() {
        let t = lt(9000);
        let (x, h, theta) = (2000u64, 64u64, 0.37);
        // direct |S(y)| for every window via a tiny reimplementation
        let two_pi = std::f64::consts::TAU;
        let direct = |y: u64| -> f64 {
            let (mut re, mut im) = (0.0, 0.0);
            for j in 0..h {
                let lam = t.lambda(y + j) as f64;
                let (s, c) = (two_pi * theta * j as f64).sin_cos();
                re += lam * c;
                im += lam * s;
            }
            (re * re + im * im).sqrt()
        };
        let mut mean = Kahan::default();
        for y in x..=2 * x - h {
            mean.add(direct(y));
        }
        let expected = mean.value() / h as f64 / (x - h + 1) as f64;
        let stats = exp_sum_stats(&t, x, h, theta, 1.0).unwrap();
        assert!(
            (stats.mean_abs_normalized - expected).abs() < 1e-9,
            "{} vs {expected}",
            stats.mean_abs_normalized
        );
        // triangle inequality: |S| <= h always
        assert!(stats.mean_abs_normalized <= 1.0);
    }

    #[test]
    fn exceedance_monotone_in_c() {
        let t = lt(40_000);
        let mut prev = f64::INFINITY;
        for c in [0.05, 0.1, 0.2, 0.4, 0.8] {
            let s = interval_stats(&t, 10_000, 30, c).unwrap();
            assert!(s.exceed_fraction <= prev);
            prev = s.exceed_fraction;
        }
    }

    #[test]
    fn chowla_hand_values() {
        let t = lt(64);
        // lambda on 1..=11: + - - + - + - - + + -
        let pts = chowla_scan(&t, &[3], 1).unwrap();
        assert_eq!(pts[0].plain_avg, -1.0 / 3.0);

        let pts = chowla_scan(&t, &[10], 1).unwrap();
        // sum_{n<10} lambda(n)lambda(n+1)/n, signs: -,+,-,-,-,-,+,-,+
        let expected: f64 = -1.0 + 0.5 - 1.0 / 3.0 - 0.25 - 0.2 - 1.0 / 6.0 + 1.0 / 7.0
            - 0.125
            + 1.0 / 9.0;
        assert!((pts[0].log_avg - expected / 10f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn chowla_bounds_and_order() {
        let t = lt(20_000);
        let pts = chowla_scan(&t, &[10_000, 100], 2).unwrap();
        // caller order preserved
        assert_eq!(pts[0].x, 10_000);
        assert_eq!(pts[1].x, 100);
        for p in &pts {
            assert!(p.plain_avg.abs() <= 1.0);
            assert!(p.log_avg.abs() <= 1.0 + 2.0 / (p.x as f64).ln());
        }
    }

    #[test]
    fn chowla_range_error() {
        let t = lt(100);
        assert!(chowla_scan(&t, &[100], 1).is_err());
        assert!(chowla_scan(&t, &[99], 1).is_ok());
    }

    #[test]
    fn small_factor_density_against_mertens() {
        let pt = PrimeTable::build(20_000).unwrap();
        let (frac, mean) = small_factor_density(&pt, 10_000, 300).unwrap();
        assert!(frac > 0.0 && frac < 1.0);
        // Mertens oracle: sum of 1/p over the window
        let lo = ((300f64).ln().powf(0.9)).exp().ceil() as u64;
        let mertens: f64 = pt.primes_in(lo, 301).map(|p| 1.0 / p as f64).sum();
        assert!(
            (mean - mertens).abs() / mertens < 0.25,
            "mean {mean} vs mertens {mertens}"
        );
    }

    #[test]
    fn small_factor_window_grows_with_h() {
        let pt = PrimeTable::build(20_000).unwrap();
        let (f1, _) = small_factor_density(&pt, 10_000, 100).unwrap();
        let (f2, _) = small_factor_density(&pt, 10_000, 1000).unwrap();
        assert!(f2 > f1);
    }

    #[test]
    fn small_factor_rejects_tiny_h() {
        let pt = PrimeTable::build(1000).unwrap();
        assert!(small_factor_density(&pt, 500, 8).is_err());
    }

    #[test]
    fn dirichlet_single_coefficient_is_exact() {
        let v = dirichlet_mean_value(&[1.0], 250.0, 0.01).unwrap();
        assert!((v - 250.0).abs() < 1e-9);
    }

    #[test]
    fn dirichlet_grid_validation() {
        assert!(dirichlet_mean_value(&[1.0, 1.0], 10.0, 10.0).is_err());
        assert!(dirichlet_mean_value(&[2.0], 10.0, 0.01).is_err());
    }

    #[test]
    fn dirichlet_random_coefficients_obey_mean_value_bound() {
        let t = lt(200);
        let coeffs: Vec<f64> = (1..=100u64).map(|n| t.lambda(n) as f64).collect();
        let n = coeffs.len() as f64;
        let t_lo = 100.0;
        let v = dirichlet_mean_value(&coeffs, t_lo, 1.0 / (4.0 * n.ln())).unwrap();
        assert!(v <= 10.0 * (t_lo * n + n * n), "v = {v}");
    }
}
