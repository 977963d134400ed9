//! Exact simplex integrals of symmetric polynomials.
//!
//! Everything reduces to the Dirichlet formula
//!
//! ```text
//! int_{t >= 0, sum t <= 1} prod t_i^{a_i} (1 - sum t)^b dt
//!     = b! prod a_i! / (k + b + sum a_i)!
//! ```
//!
//! Power-sum products have two exact evaluation routes:
//!
//! 1. expansion into monomial symmetric sums (partition combinatorics),
//!    which is what `simplex_monomial_integral` composes; cost grows
//!    with the partition count of the weight, so this route is for low
//!    degree and for cross-checking;
//! 2. a generating-function identity: with
//!    `Phi(u, v) = sum_{b,c} (2b+3c)!/(b! c!) u^b v^c`,
//!
//!    ```text
//!    int_{Delta_k} P2^B P3^C = B! C! [u^B v^C] Phi^k / (k + 2B + 3C)!
//!    ```
//!
//!    so one truncated series power yields every integral the quadratic
//!    forms need. Both routes agree coefficient for coefficient; tests
//!    pin that.

use crate::error::{Error, Result};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Zero};
use std::collections::HashMap;

/// Factorials as `BigInt`, grown on demand.
#[derive(Debug, Default)]
pub struct Factorials {
    table: Vec<BigInt>,
}

impl Factorials {
    pub fn new() -> Factorials {
        Factorials {
            table: vec![BigInt::one()],
        }
    }

    pub fn get(&mut self, n: usize) -> BigInt {
        while self.table.len() <= n {
            let next = self.table.last().unwrap() * BigInt::from(self.table.len());
            self.table.push(next);
        }
        self.table[n].clone()
    }
}

/// `int_Delta prod t_i^{a_i} (1 - sum t)^b` over the k-simplex.
pub fn simplex_monomial_integral(k: usize, exponents: &[u64], b: u64) -> Result<BigRational> {
    if exponents.len() > k {
        return Err(Error::Validation(format!(
            "{} exponents for a {k}-dimensional simplex",
            exponents.len()
        )));
    }
    let total: u64 = exponents.iter().sum::<u64>() + b + k as u64;
    if total > 1_000_000 {
        return Err(Error::Resource(format!(
            "factorial argument {total} beyond the big-integer budget"
        )));
    }
    let mut f = Factorials::new();
    let mut num = f.get(b as usize);
    for &a in exponents {
        num *= f.get(a as usize);
    }
    Ok(BigRational::new(num, f.get(total as usize)))
}

/// A partition as its parts, sorted descending.
pub type Partition = Vec<u32>;

fn multiplicity(parts: &[u32], p: u32) -> u64 {
    parts.iter().filter(|&&x| x == p).count() as u64
}

/// `m_lambda * P_r` in the monomial-symmetric basis: bump one part by r
/// or append r, with multiplicity bookkeeping.
fn mul_by_power_sum(expn: &HashMap<Partition, BigInt>, r: u32) -> HashMap<Partition, BigInt> {
    let mut out: HashMap<Partition, BigInt> = HashMap::new();
    for (lam, c) in expn {
        let mut appended = lam.clone();
        appended.push(r);
        appended.sort_unstable_by(|a, b| b.cmp(a));
        let mult = BigInt::from(multiplicity(&appended, r));
        *out.entry(appended).or_insert_with(BigInt::zero) += c * mult;
        let mut seen = Vec::new();
        for (idx, &p) in lam.iter().enumerate() {
            if seen.contains(&p) {
                continue;
            }
            seen.push(p);
            let mut bumped = lam.clone();
            bumped[idx] = p + r;
            bumped.sort_unstable_by(|a, b| b.cmp(a));
            let mult = BigInt::from(multiplicity(&bumped, p + r));
            *out.entry(bumped).or_insert_with(BigInt::zero) += c * mult;
        }
    }
    out
}

/// Monomial-symmetric expansion of `prod_j P_{parts_j}` (k-independent).
pub fn power_product_expansion(parts: &[u32]) -> HashMap<Partition, BigInt> {
    let mut expn: HashMap<Partition, BigInt> = HashMap::new();
    expn.insert(Vec::new(), BigInt::one());
    for &r in parts {
        expn = mul_by_power_sum(&expn, r);
    }
    expn
}

/// Number of distinct monomials of shape `lambda` in k variables:
/// falling factorial over the multiplicity factorials.
fn monomial_count(lam: &[u32], k: usize, f: &mut Factorials) -> BigInt {
    if lam.len() > k {
        return BigInt::zero();
    }
    let mut num = BigInt::one();
    for i in 0..lam.len() {
        num *= BigInt::from((k - i) as u64);
    }
    let mut seen = Vec::new();
    for &p in lam {
        if !seen.contains(&p) {
            seen.push(p);
            num /= f.get(multiplicity(lam, p) as usize);
        }
    }
    num
}

/// `int_{Delta_k} (1-P1)^a prod_j P_{parts_j}` by monomial expansion.
/// Exact but exponential in the weight; the series route below is the
/// production path.
pub fn integral_by_expansion(k: usize, a: u64, parts: &[u32]) -> BigRational {
    let mut f = Factorials::new();
    let mut total = BigRational::zero();
    for (lam, c) in power_product_expansion(parts) {
        let nk = monomial_count(&lam, k, &mut f);
        if nk.is_zero() {
            continue;
        }
        let mut num = f.get(a as usize);
        for &p in &lam {
            num *= f.get(p as usize);
        }
        let weight: u32 = lam.iter().sum();
        let den = f.get(k + a as usize + weight as usize);
        total += BigRational::new(num * nk * c, den);
    }
    total
}

/// Truncated bivariate series with integer coefficients, indexed as
/// `coeffs[b][c]`.
#[derive(Debug, Clone)]
struct Series {
    bmax: usize,
    cmax: usize,
    coeffs: Vec<BigInt>,
}

impl Series {
    fn zero(bmax: usize, cmax: usize) -> Series {
        Series {
            bmax,
            cmax,
            coeffs: vec![BigInt::zero(); (bmax + 1) * (cmax + 1)],
        }
    }

    fn get(&self, b: usize, c: usize) -> &BigInt {
        &self.coeffs[b * (self.cmax + 1) + c]
    }

    fn get_mut(&mut self, b: usize, c: usize) -> &mut BigInt {
        &mut self.coeffs[b * (self.cmax + 1) + c]
    }

    fn mul(&self, other: &Series) -> Series {
        let mut out = Series::zero(self.bmax, self.cmax);
        for b1 in 0..=self.bmax {
            for c1 in 0..=self.cmax {
                let x = self.get(b1, c1);
                if x.is_zero() {
                    continue;
                }
                for b2 in 0..=(self.bmax - b1) {
                    for c2 in 0..=(self.cmax - c1) {
                        let y = other.get(b2, c2);
                        if y.is_zero() {
                            continue;
                        }
                        *out.get_mut(b1 + b2, c1 + c2) += x * y;
                    }
                }
            }
        }
        out
    }

    fn pow(&self, mut e: usize) -> Series {
        let mut result = Series::zero(self.bmax, self.cmax);
        *result.get_mut(0, 0) = BigInt::one();
        let mut sq = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&sq);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul(&sq);
            }
        }
        result
    }
}

/// `Phi(u, v) = sum (2b+3c)!/(b! c!) u^b v^c`, truncated. The ratio is
/// an integer: multinomial(2b+3c; b, c, b+2c) times (b+2c)!.
fn phi_series(bmax: usize, cmax: usize, f: &mut Factorials) -> Series {
    let mut s = Series::zero(bmax, cmax);
    for b in 0..=bmax {
        for c in 0..=cmax {
            let num = f.get(2 * b + 3 * c);
            let den = f.get(b) * f.get(c);
            *s.get_mut(b, c) = num / den;
        }
    }
    s
}

/// Exact integrals `J(a, B, C) = int_{Delta_k} (1-P1)^a P2^B P3^C dt`
/// for one fixed dimension k, backed by the generating-function table.
pub struct SimplexIntegrator {
    pub k: usize,
    phi_k: Series,
    factorials: Factorials,
}

impl SimplexIntegrator {
    /// Table supporting exponents `B <= bmax`, `C <= cmax`.
    pub fn new(k: usize, bmax: usize, cmax: usize) -> SimplexIntegrator {
        let mut factorials = Factorials::new();
        let phi = phi_series(bmax, cmax, &mut factorials);
        SimplexIntegrator {
            k,
            phi_k: phi.pow(k),
            factorials,
        }
    }

    pub fn supports(&self, b: usize, c: usize) -> bool {
        b <= self.phi_k.bmax && c <= self.phi_k.cmax
    }

    /// Numerator of J(a, B, C) over the denominator `(a + k + W)!` with
    /// `W = 2B + 3C`: callers sharing a denominator scale this up.
    pub fn j_numerator(&mut self, a: usize, b: usize, c: usize) -> BigInt {
        assert!(self.supports(b, c), "integrator table too small");
        let phi = self.phi_k.get(b, c).clone();
        self.factorials.get(a) * self.factorials.get(b) * self.factorials.get(c) * phi
    }

    /// `J(a, B, C)` as an exact rational.
    pub fn j(&mut self, a: usize, b: usize, c: usize) -> BigRational {
        let w = 2 * b + 3 * c;
        let num = self.j_numerator(a, b, c);
        let den = self.factorials.get(a + self.k + w);
        BigRational::new(num, den)
    }

    pub fn factorial(&mut self, n: usize) -> BigInt {
        self.factorials.get(n)
    }
}
