//! Assembly of the two quadratic forms of the variational sieve
//! problem: for basis functions g_i on the simplex,
//!
//! ```text
//! m2[i][j] = int_{Delta_k} g_i g_j
//! m1[i][j] = k * int_{Delta_{k-1}} (int_0^{1-s} g_i dt_k)(int_0^{1-s} g_j dt_k)
//! ```
//!
//! (symmetry makes all k one-variable integrals equal, hence the factor
//! k). Entries are exact rationals held over one shared denominator per
//! matrix so that assembly is pure big-integer accumulation.

use super::integrals::{Factorials, SimplexIntegrator};
use super::sympoly::{rational_to_f64, SymPoly};
use crate::error::{Error, Result};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::Zero;
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

/// Which span of symmetric polynomials the basis enumerates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BasisFamily {
    /// `(1-P1)^a P2^b` with `a + 2b <= degree`.
    Quadratic,
    /// `(1-P1)^a P2^b P3^c` with `a + b + c <= degree`. The count caps
    /// the number of factors rather than the polynomial weight: high
    /// powers of P2 and P3 carry most of the improvement at large k,
    /// and this filtration reaches them at feasible basis sizes.
    Cubic,
}

impl BasisFamily {
    pub fn name(self) -> &'static str {
        match self {
            BasisFamily::Quadratic => "quadratic",
            BasisFamily::Cubic => "cubic",
        }
    }

    /// Exponent triples (a, b, c) of the family at the given degree.
    pub fn exponents(self, degree: u32) -> Vec<(u32, u32, u32)> {
        let mut out = Vec::new();
        match self {
            BasisFamily::Quadratic => {
                for a in 0..=degree {
                    for b in 0..=((degree - a) / 2) {
                        out.push((a, b, 0));
                    }
                }
            }
            BasisFamily::Cubic => {
                for a in 0..=degree {
                    for b in 0..=(degree - a) {
                        for c in 0..=(degree - a - b) {
                            out.push((a, b, c));
                        }
                    }
                }
            }
        }
        // low total weight first: leading principal blocks are the
        // better-conditioned low-degree subspaces
        out.sort_by_key(|&(a, b, c)| (a + 2 * b + 3 * c, a, b, c));
        out
    }
}

/// Symmetric matrix of exact rationals: `num[i][j] / den`.
#[derive(Debug, Clone)]
pub struct RationalMatrix {
    pub dim: usize,
    num: Vec<BigInt>,
    den: BigInt,
}

impl RationalMatrix {
    fn from_rows(rows: Vec<Vec<BigInt>>, den: BigInt) -> RationalMatrix {
        let dim = rows.len();
        let mut num = Vec::with_capacity(dim * dim);
        for row in rows {
            num.extend(row);
        }
        RationalMatrix { dim, num, den }
    }

    pub fn numerator(&self, i: usize, j: usize) -> &BigInt {
        &self.num[i * self.dim + j]
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    pub fn entry(&self, i: usize, j: usize) -> BigRational {
        BigRational::new(self.numerator(i, j).clone(), self.den.clone())
    }

    pub fn entry_f64(&self, i: usize, j: usize) -> f64 {
        rational_to_f64(&self.entry(i, j))
    }

    /// `v^T M v` for a dyadic vector given as integers over 2^shift.
    pub fn quadratic_form_scaled(&self, v: &[BigInt]) -> (BigInt, &BigInt) {
        let r = self.dim;
        let mut total = BigInt::zero();
        for i in 0..r {
            if v[i].is_zero() {
                continue;
            }
            let mut row = BigInt::zero();
            for j in 0..r {
                if v[j].is_zero() {
                    continue;
                }
                row += self.numerator(i, j) * &v[j];
            }
            total += row * &v[i];
        }
        (total, &self.den)
    }
}

/// The assembled problem: basis functions plus both matrices.
#[derive(Debug, Clone)]
pub struct QuadraticForms {
    pub k: usize,
    pub degree: u32,
    pub family: BasisFamily,
    pub basis: Vec<SymPoly>,
    pub m1: RationalMatrix,
    pub m2: RationalMatrix,
}

/// Cofactor table: `tails[e] = (base + max)! / (base + e)!`.
fn falling_tails(base: usize, max: usize) -> Vec<BigInt> {
    let mut tails = vec![BigInt::from(1); max + 1];
    for e in (0..max).rev() {
        tails[e] = &tails[e + 1] * BigInt::from((base + e + 1) as u64);
    }
    tails
}

/// Build both quadratic forms for the family at the given degree.
pub fn assemble_forms(k: usize, degree: u32, family: BasisFamily) -> Result<QuadraticForms> {
    if k < 2 {
        return Err(Error::Validation(format!("need k >= 2, got {k}")));
    }
    if family == BasisFamily::Cubic && k < 3 {
        return Err(Error::Validation(
            "the cubic family needs k >= 3 (P3 is dependent below that)".into(),
        ));
    }
    let expos = family.exponents(degree);
    let r = expos.len();
    let max_b = expos.iter().map(|e| e.1).max().unwrap() as usize;
    let max_c = expos.iter().map(|e| e.2).max().unwrap() as usize;
    // weight of one element and the largest pairwise sums
    let weight = |e: &(u32, u32, u32)| (e.0 + 2 * e.1 + 3 * e.2) as usize;
    let max_w = expos.iter().map(weight).max().unwrap();

    let mut f = Factorials::new();

    // ---- M2: entries are single J-values over (k + a + W)! ----
    let mut ctx_k = SimplexIntegrator::new(k, 2 * max_b, 2 * max_c);
    let max_e2 = 2 * max_w;
    let tails2 = falling_tails(k, max_e2);
    let den2 = ctx_k.factorial(k + max_e2);
    let m2_rows: Vec<Vec<BigInt>> = (0..r)
        .map(|i| {
            // j_numerator needs &mut; give each row its own view by
            // recomputing factorials locally (cheap, cached per call)
            let mut row = Vec::with_capacity(r);
            let (ai, bi, ci) = expos[i];
            for j in 0..r {
                let (aj, bj, cj) = expos[j];
                let (a, b, c) = ((ai + aj) as usize, (bi + bj) as usize, (ci + cj) as usize);
                let e = a + 2 * b + 3 * c;
                let num = ctx_k.j_numerator(a, b, c) * &tails2[e];
                row.push(num);
            }
            row
        })
        .collect();
    let m2 = RationalMatrix::from_rows(m2_rows, den2);

    // ---- M1: inner integrals over t_k, then pairwise products ----
    // inner term t of element i: coefficient a_i! m! binom / (a_i+m+1)!
    // times (1-Q1)^{a_i+m+1} Q2^{b-beta} Q3^{c-gamma}; rescaled by
    // (t_top)!/(a_i+m+1)! to share one denominator (t_top)!.
    let t_top = max_w + 1;
    let top_fact = f.get(t_top);
    #[derive(Clone)]
    struct InnerTerm {
        e: u32,
        b: u32,
        c: u32,
        scaled_num: BigInt,
    }
    let inners: Vec<Vec<InnerTerm>> = expos
        .iter()
        .map(|&(a, b, c)| {
            let mut terms = Vec::new();
            let mono = SymPoly::monomial(k, (a, b, c));
            let inner = mono.integrate_last_var(&mut f);
            for (&(e, bb, cc), coeff) in inner.terms() {
                // coeff = integer / (e)!-structured; rescale to /t_top!
                let scaled = coeff * BigRational::new(top_fact.clone(), BigInt::from(1));
                assert!(
                    scaled.is_integer(),
                    "inner coefficient did not clear the shared denominator"
                );
                terms.push(InnerTerm {
                    e,
                    b: bb,
                    c: cc,
                    scaled_num: scaled.to_integer(),
                });
            }
            terms
        })
        .collect();

    // every term of entry (i, j) shares the J-denominator
    // (k - 1 + F_ij)! with F_ij = w_i + w_j + 2
    let max_f = 2 * (max_w + 1);
    let tails1 = falling_tails(k - 1, max_f);
    let den1 = f.get(k - 1 + max_f) * &top_fact * &top_fact;
    let kk = BigInt::from(k as u64);

    // inner integrals over t_k can raise the P2/P3 exponent sums past
    // 2*max_b only through leftovers, which stay within the same caps
    let ctx_base = SimplexIntegrator::new(k - 1, 2 * max_b, 2 * max_c);
    let m1_rows: Vec<Vec<BigInt>> = (0..r)
        .into_par_iter()
        .map(|i| {
            let mut ctx = LocalCtx::new(&ctx_base);
            let mut row = vec![BigInt::zero(); r];
            let wi = weight(&expos[i]);
            for (j, row_j) in row.iter_mut().enumerate().skip(i) {
                // every term of this entry carries the same denominator
                // exponent: e_t + e_t' + 2B + 3C collapses to w_i + w_j + 2
                let f_ij = wi + weight(&expos[j]) + 2;
                let mut acc = BigInt::zero();
                for ti in &inners[i] {
                    for tj in &inners[j] {
                        let e = (ti.e + tj.e) as usize;
                        let b = (ti.b + tj.b) as usize;
                        let c = (ti.c + tj.c) as usize;
                        let jn = ctx.j_numerator(e, b, c);
                        acc += &ti.scaled_num * &tj.scaled_num * jn;
                    }
                }
                *row_j = acc * &kk * &tails1[f_ij];
            }
            row
        })
        .collect();
    // mirror the upper triangle
    let mut m1_full: Vec<Vec<BigInt>> = m1_rows;
    for i in 0..r {
        for j in 0..i {
            m1_full[i][j] = m1_full[j][i].clone();
        }
    }
    let m1 = RationalMatrix::from_rows(m1_full, den1);

    let basis = expos
        .iter()
        .map(|&e| SymPoly::monomial(k, e))
        .collect();
    Ok(QuadraticForms {
        k,
        degree,
        family,
        basis,
        m1,
        m2,
    })
}

/// Cheap per-thread wrapper around a shared integrator table: the
/// series is immutable, only the factorial cache is thread-local.
struct LocalCtx<'a> {
    base: &'a SimplexIntegrator,
    factorials: Factorials,
}

impl<'a> LocalCtx<'a> {
    fn new(base: &'a SimplexIntegrator) -> LocalCtx<'a> {
        LocalCtx {
            base,
            factorials: Factorials::new(),
        }
    }

    fn j_numerator(&mut self, a: usize, b: usize, c: usize) -> BigInt {
        let phi = self.base.phi_coefficient(b, c);
        self.factorials.get(a) * self.factorials.get(b) * self.factorials.get(c) * phi
    }
}

impl Serialize for QuadraticForms {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let ser_matrix = |m: &RationalMatrix| -> Vec<Vec<String>> {
            (0..m.dim)
                .map(|i| {
                    (0..m.dim)
                        .map(|j| {
                            let q = m.entry(i, j);
                            format!("{}/{}", q.numer(), q.denom())
                        })
                        .collect()
                })
                .collect()
        };
        let mut st = serializer.serialize_struct("QuadraticForms", 6)?;
        st.serialize_field("k", &self.k)?;
        st.serialize_field("degree", &self.degree)?;
        st.serialize_field("family", self.family.name())?;
        st.serialize_field("basis", &self.basis)?;
        st.serialize_field("m1", &ser_matrix(&self.m1))?;
        st.serialize_field("m2", &ser_matrix(&self.m2))?;
        st.end()
    }
}
