//! Small numeric helpers shared across modules: compensated summation
//! and adaptive Simpson quadrature.

use crate::error::{Error, Result};

/// Kahan-Babuska compensated accumulator.
///
/// Summation order still matters for bit-reproducibility, so callers sum
/// in a fixed order (segment index, window index, ...) regardless of how
/// the work was scheduled.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    pub fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    /// Fold another compensated sum into this one (fixed order!).
    pub fn merge(&mut self, other: Kahan) {
        self.add(other.sum);
        self.add(-other.c);
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Adaptive Simpson quadrature with interval bisection.
///
/// `rel_err` is the target relative error for the whole integral;
/// per-interval budgets shrink with the usual factor-15 Richardson
/// estimate. Depth is capped to keep degenerate integrands from
/// recursing forever; hitting the cap is a numeric error.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, rel_err: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(a <= b) {
        return Err(Error::Validation(format!("bad interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    let scale = whole.abs().max(1e-300);
    let mut out = 0.0;
    simpson_rec(
        &f,
        a,
        b,
        fa,
        fm,
        fb,
        whole,
        rel_err * scale,
        60,
        &mut out,
    )?;
    Ok(out)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
    out: &mut f64,
) -> Result<()>
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * eps || (b - a) < 1e-14 * (a.abs() + b.abs()) {
        *out += left + right + delta / 15.0;
        return Ok(());
    }
    if depth == 0 {
        return Err(Error::Numeric(format!(
            "quadrature failed to converge on [{a}, {b}]"
        )));
    }
    simpson_rec(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1, out)?;
    simpson_rec(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_beats_naive_on_small_terms() {
        let mut k = Kahan::default();
        k.add(1.0);
        for _ in 0..1_000_000 {
            k.add(1e-16);
        }
        assert!((k.value() - (1.0 + 1e-10)).abs() < 1e-13);
    }

    #[test]
    fn simpson_on_polynomial_is_exact() {
        // integrand cubic: Simpson integrates degree <= 3 exactly
        let v = adaptive_simpson(|x| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - (4.0 - 4.0 + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn simpson_matches_exp() {
        let v = adaptive_simpson(|x| x.exp(), 0.0, 1.0, 1e-12).unwrap();
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-11);
    }
}
