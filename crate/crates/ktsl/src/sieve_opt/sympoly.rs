//! Symmetric polynomials on the simplex, written in the
//! `(1-P1)^a P2^b P3^c` monomial family (P_m = sum_i t_i^m).
//!
//! The quadratic-form assembly needs three things from this type:
//! exact products, exact simplex integrals, and the exact integral over
//! the last coordinate (which lands in the same family one dimension
//! down). All coefficients are big rationals.

use super::integrals::{Factorials, SimplexIntegrator};
use crate::error::{Error, Result};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use std::collections::BTreeMap;

/// Exponents of one term: `(1-P1)^a P2^b P3^c`.
pub type Expo = (u32, u32, u32);

/// Sparse symmetric polynomial bound to a dimension k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymPoly {
    pub k: usize,
    terms: BTreeMap<Expo, BigRational>,
}

impl SymPoly {
    pub fn zero(k: usize) -> SymPoly {
        SymPoly {
            k,
            terms: BTreeMap::new(),
        }
    }

    /// The single basis monomial `(1-P1)^a P2^b P3^c`.
    pub fn monomial(k: usize, expo: Expo) -> SymPoly {
        let mut terms = BTreeMap::new();
        terms.insert(expo, BigRational::one());
        SymPoly { k, terms }
    }

    pub fn constant(k: usize, value: BigRational) -> SymPoly {
        let mut p = SymPoly::zero(k);
        if !value.is_zero() {
            p.terms.insert((0, 0, 0), value);
        }
        p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Expo, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn add_term(&mut self, expo: Expo, coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(expo).or_insert_with(BigRational::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&expo);
        }
    }

    pub fn scale(&self, factor: &BigRational) -> SymPoly {
        let mut out = SymPoly::zero(self.k);
        if factor.is_zero() {
            return out;
        }
        for (e, c) in &self.terms {
            out.terms.insert(*e, c * factor);
        }
        out
    }

    pub fn mul(&self, other: &SymPoly) -> SymPoly {
        assert_eq!(self.k, other.k, "dimension mismatch");
        let mut out = SymPoly::zero(self.k);
        for (&(a1, b1, c1), x) in &self.terms {
            for (&(a2, b2, c2), y) in &other.terms {
                out.add_term((a1 + a2, b1 + b2, c1 + c2), x * y);
            }
        }
        out
    }

    /// Exact integral over the k-simplex.
    pub fn integrate(&self, ctx: &mut SimplexIntegrator) -> BigRational {
        assert_eq!(self.k, ctx.k, "integrator dimension mismatch");
        let mut total = BigRational::zero();
        for (&(a, b, c), coeff) in &self.terms {
            total += coeff * ctx.j(a as usize, b as usize, c as usize);
        }
        total
    }

    /// `int_0^{1 - s} self dt_k` as a polynomial in the remaining k-1
    /// variables (s is their sum). Uses
    /// `int_0^h (h-t)^a t^m dt = a! m! / (a+m+1)! h^{a+m+1}`.
    pub fn integrate_last_var(&self, f: &mut Factorials) -> SymPoly {
        assert!(self.k >= 1);
        let mut out = SymPoly::zero(self.k - 1);
        for (&(a, b, c), coeff) in &self.terms {
            for beta in 0..=b {
                for gamma in 0..=c {
                    let m = 2 * beta + 3 * gamma;
                    let binom = binomial(b, beta, f) * binomial(c, gamma, f);
                    let num = f.get(a as usize) * f.get(m as usize) * binom;
                    let den = f.get((a + m + 1) as usize);
                    out.add_term(
                        (a + m + 1, b - beta, c - gamma),
                        coeff * BigRational::new(num, den),
                    );
                }
            }
        }
        out
    }

    /// Largest exponent reach of the terms, used to size integrator
    /// tables: (max a, max b, max c).
    pub fn max_exponents(&self) -> (u32, u32, u32) {
        let mut m = (0, 0, 0);
        for &(a, b, c) in self.terms.keys() {
            m.0 = m.0.max(a);
            m.1 = m.1.max(b);
            m.2 = m.2.max(c);
        }
        m
    }

    /// Expand into plain monomials `prod t_i^{e_i}` (dense over the
    /// exponent grid). Exponential in k; only sensible for small k.
    pub fn to_monomials(&self) -> Result<MonomialPoly> {
        if self.k > 6 {
            return Err(Error::Resource(format!(
                "dense monomial expansion in {} variables is too large",
                self.k
            )));
        }
        let mut out: BTreeMap<Vec<u32>, BigRational> = BTreeMap::new();
        let mut f = Factorials::new();
        for (&(a, b, c), coeff) in &self.terms {
            // (1-P1)^a = sum over multi-indices of (-1)^|m| a!/(m0! prod m_i!)
            let base = expand_term(self.k, a, b, c, &mut f);
            for (expos, cf) in base {
                let entry = out.entry(expos).or_insert_with(BigRational::zero);
                *entry += coeff * cf;
            }
        }
        out.retain(|_, v| !v.is_zero());
        Ok(MonomialPoly { k: self.k, terms: out })
    }
}

fn binomial(n: u32, k: u32, f: &mut Factorials) -> BigInt {
    f.get(n as usize) / (f.get(k as usize) * f.get((n - k) as usize))
}

/// Expand one `(1-P1)^a P2^b P3^c` into plain monomials.
fn expand_term(
    k: usize,
    a: u32,
    b: u32,
    c: u32,
    f: &mut Factorials,
) -> BTreeMap<Vec<u32>, BigRational> {
    // start with (1-P1)^a via multinomial expansion
    let mut cur: BTreeMap<Vec<u32>, BigRational> = BTreeMap::new();
    distribute_multinomial(k, a, f, &mut cur);
    // multiply by P2 b times and P3 c times
    for power in std::iter::repeat(2u32)
        .take(b as usize)
        .chain(std::iter::repeat(3u32).take(c as usize))
    {
        let mut next: BTreeMap<Vec<u32>, BigRational> = BTreeMap::new();
        for (expos, cf) in &cur {
            for i in 0..k {
                let mut e = expos.clone();
                e[i] += power;
                let entry = next.entry(e).or_insert_with(BigRational::zero);
                *entry += cf;
            }
        }
        cur = next;
    }
    cur
}

/// `(1 - t_1 - ... - t_k)^a` expanded into monomials.
fn distribute_multinomial(
    k: usize,
    a: u32,
    f: &mut Factorials,
    out: &mut BTreeMap<Vec<u32>, BigRational>,
) {
    fn rec(
        k: usize,
        remaining: u32,
        idx: usize,
        expos: &mut Vec<u32>,
        coeff_den: BigInt,
        f: &mut Factorials,
        a: u32,
        out: &mut BTreeMap<Vec<u32>, BigRational>,
    ) {
        if idx == k {
            // the rest goes to the constant 1 with multiplicity `remaining`
            let sign = if (a - remaining) % 2 == 1 { -1 } else { 1 };
            let num = f.get(a as usize) * BigInt::from(sign);
            let den = coeff_den * f.get(remaining as usize);
            let entry = out
                .entry(expos.clone())
                .or_insert_with(BigRational::zero);
            *entry += BigRational::new(num, den);
            return;
        }
        for take in 0..=remaining {
            expos[idx] = take;
            rec(
                k,
                remaining - take,
                idx + 1,
                expos,
                coeff_den.clone() * f.get(take as usize),
                f,
                a,
                out,
            );
        }
        expos[idx] = 0;
    }
    let mut expos = vec![0u32; k];
    rec(k, a, 0, &mut expos, BigInt::one(), f, a, out);
}

/// Dense multivariate polynomial in plain monomials.
#[derive(Debug, Clone)]
pub struct MonomialPoly {
    pub k: usize,
    terms: BTreeMap<Vec<u32>, BigRational>,
}

impl MonomialPoly {
    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Value at a point (f64 arithmetic).
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (expos, c) in &self.terms {
            let mut term = rational_to_f64(c);
            for (e, xi) in expos.iter().zip(x) {
                term *= xi.powi(*e as i32);
            }
            acc += term;
        }
        acc
    }

    /// `int over {t : t >= x, sum t <= 1} of self`, the antiderivative
    /// that recovers the sieve weight function F from F-tilde (up to the
    /// sign (-1)^k, which squares away in the weights).
    ///
    /// Substituting t = x + s turns the region into a scaled simplex of
    /// size h = 1 - sum x, and each monomial integrates in closed form.
    pub fn upper_integral(&self, x: &[f64]) -> f64 {
        let h = 1.0 - x.iter().sum::<f64>();
        if h <= 0.0 {
            return 0.0;
        }
        let mut f = Factorials::new();
        let mut acc = 0.0;
        for (expos, c) in &self.terms {
            acc += rational_to_f64(c) * box_simplex_monomial(expos, x, h, self.k, &mut f);
        }
        acc
    }
}

/// `int_{s in h*Delta_k} prod (x_i + s_i)^{e_i} ds` by binomial
/// expansion and the scaled Dirichlet formula.
fn box_simplex_monomial(expos: &[u32], x: &[f64], h: f64, k: usize, f: &mut Factorials) -> f64 {
    fn rec(
        expos: &[u32],
        x: &[f64],
        idx: usize,
        m_sum: u32,
        coeff: f64,
        h: f64,
        k: usize,
        f: &mut Factorials,
        acc: &mut f64,
    ) {
        if idx == expos.len() {
            // int_{h Delta} prod s^{m_i} = h^{k + sum m} prod m_i! / (k + sum m)!
            // the prod m_i! got folded into coeff via the binomials
            let denom_f = f.get(k + m_sum as usize);
            let denom = big_to_f64(&denom_f);
            *acc += coeff * h.powi((k as u32 + m_sum) as i32) / denom;
            return;
        }
        let e = expos[idx];
        for m in 0..=e {
            // C(e, m) x^{e-m} * m!  (the m! belongs to the Dirichlet formula)
            let c = big_to_f64(&(binomial(e, m, f) * f.get(m as usize)));
            rec(
                expos,
                x,
                idx + 1,
                m_sum + m,
                coeff * c * x[idx].powi((e - m) as i32),
                h,
                k,
                f,
                acc,
            );
        }
    }
    let mut acc = 0.0;
    rec(expos, x, 0, 0, 1.0, h, k, f, &mut acc);
    acc
}

/// Ratio to f64 via separate mantissa/exponent splits, so components
/// far outside f64 range still convert when the ratio itself is tame.
pub fn rational_to_f64(q: &BigRational) -> f64 {
    use num::traits::ToPrimitive;
    if q.numer().is_zero() {
        return 0.0;
    }
    let neg = q.numer().is_negative();
    let n = q.numer().abs();
    let d = q.denom().clone();
    let sn = (n.bits() as i64 - 53).max(0) as u64;
    let sd = (d.bits() as i64 - 53).max(0) as u64;
    let mn = (&n >> sn).to_f64().unwrap_or(0.0);
    let md = (&d >> sd).to_f64().unwrap_or(1.0);
    let expo = (sn as i64 - sd as i64).clamp(-2000, 2000) as i32;
    let v = mn / md * 2f64.powi(expo);
    if neg {
        -v
    } else {
        v
    }
}

fn big_to_f64(v: &BigInt) -> f64 {
    use num::traits::ToPrimitive;
    let bits = v.bits() as i64;
    if bits <= 1000 {
        v.to_f64().unwrap_or(0.0)
    } else {
        let shift = (bits - 64) as u64;
        (v >> shift).to_f64().unwrap_or(0.0) * 2f64.powi(shift.min(2000) as i32)
    }
}

impl Serialize for SymPoly {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Term {
            a: u32,
            b: u32,
            c: u32,
            coeff: String,
        }
        let terms: Vec<Term> = self
            .terms
            .iter()
            .map(|(&(a, b, c), q)| Term {
                a,
                b,
                c,
                coeff: format!("{}/{}", q.numer(), q.denom()),
            })
            .collect();
        let mut st = serializer.serialize_struct("SymPoly", 2)?;
        st.serialize_field("k", &self.k)?;
        st.serialize_field("terms", &terms)?;
        st.end()
    }
}
