//! Admissible k-tuple machinery: admissibility certificates, exhaustive
//! narrowest-tuple search for small k, and the primes-after-k construction.
//!
//! A tuple {h_1 < ... < h_k} is admissible when for every prime p some
//! residue class mod p avoids all -h_i. Only primes p <= k need checking:
//! for p > k, k offsets cannot cover all p residue classes.

use crate::error::{Error, Result};
use crate::primes::{small_primes, PrimeTable};
use serde::Serialize;
use std::collections::BTreeMap;

/// Strictly increasing integer offsets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Tuple {
    offsets: Vec<i64>,
}

impl Tuple {
    pub fn new(offsets: Vec<i64>) -> Result<Tuple> {
        if offsets.is_empty() {
            return Err(Error::Validation("tuple must be non-empty".into()));
        }
        if !offsets.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Validation(
                "tuple offsets must be strictly increasing".into(),
            ));
        }
        Ok(Tuple { offsets })
    }

    pub fn offsets(&self) -> &[i64] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn diameter(&self) -> i64 {
        self.offsets[self.offsets.len() - 1] - self.offsets[0]
    }
}

/// Outcome of an admissibility check, with enough data to re-verify it
/// by direct modular arithmetic.
#[derive(Debug, Clone, Serialize)]
pub struct AdmissibilityCertificate {
    pub admissible: bool,
    /// Prime whose residue classes are fully covered, when inadmissible.
    pub blocking_prime: Option<u64>,
    /// For each checked prime p, a residue r with r + h_i != 0 (mod p)
    /// for every offset; present only when admissible.
    pub witness: BTreeMap<u64, u64>,
    /// Why primes above this bound need no check.
    pub checked_up_to: u64,
    pub rationale: &'static str,
}

const PIGEONHOLE: &str =
    "primes p > k are never fixed divisors: k offsets occupy at most k < p residue classes";

/// Check admissibility by covering residues for every prime `p <= k`.
pub fn check_admissible(tuple: &Tuple) -> AdmissibilityCertificate {
    let k = tuple.len() as u64;
    let mut witness = BTreeMap::new();
    for p in small_primes(k) {
        let mut hit = vec![false; p as usize];
        for &h in tuple.offsets() {
            hit[h.rem_euclid(p as i64) as usize] = true;
        }
        // residue r is free iff no offset h has h = r (mod p); then
        // n = -r makes every n + h_i nonzero mod p
        match hit.iter().position(|&b| !b) {
            Some(r) => {
                witness.insert(p, r as u64);
            }
            None => {
                return AdmissibilityCertificate {
                    admissible: false,
                    blocking_prime: Some(p),
                    witness: BTreeMap::new(),
                    checked_up_to: k,
                    rationale: PIGEONHOLE,
                };
            }
        }
    }
    AdmissibilityCertificate {
        admissible: true,
        blocking_prime: None,
        witness,
        checked_up_to: k,
        rationale: PIGEONHOLE,
    }
}

/// Exhaustive minimal-diameter search, exact for `2 <= k <= 12`.
///
/// Iterative deepening on the diameter; within a diameter the search
/// walks offsets in increasing order, so the first hit is the
/// lexicographically least minimizer. Prunes a branch as soon as some
/// prime `p <= k` has all residues covered by the chosen prefix.
pub fn narrowest_tuple(k: usize, search_bound: i64) -> Result<Tuple> {
    if !(2..=12).contains(&k) {
        return Err(Error::Validation(format!(
            "narrowest_tuple is exhaustive only for 2 <= k <= 12, got {k}"
        )));
    }
    if search_bound < k as i64 {
        return Err(Error::Validation(format!(
            "search bound {search_bound} cannot hold {k} offsets"
        )));
    }
    let primes = small_primes(k as u64);
    for diameter in (k as i64 - 1)..=search_bound {
        let mut chosen = vec![0i64];
        let mut coverage: Vec<Vec<u32>> = primes
            .iter()
            .map(|&p| {
                let mut c = vec![0u32; p as usize];
                c[0] = 1; // offset 0
                c
            })
            .collect();
        if let Some(t) = extend(&primes, &mut chosen, &mut coverage, k, diameter) {
            return Ok(Tuple { offsets: t });
        }
    }
    Err(Error::Validation(format!(
        "no admissible {k}-tuple with diameter <= {search_bound}"
    )))
}

fn extend(
    primes: &[u64],
    chosen: &mut Vec<i64>,
    coverage: &mut [Vec<u32>],
    k: usize,
    diameter: i64,
) -> Option<Vec<i64>> {
    if chosen.len() == k {
        // fixed last offset = diameter makes minimality exact per level
        return Some(chosen.clone());
    }
    let slots_left = k - chosen.len();
    let last = *chosen.last().unwrap();
    // the final offset must land exactly on `diameter`
    let max_start = diameter - slots_left as i64 + 1;
    for h in (last + 1)..=max_start {
        let h = if slots_left == 1 { diameter } else { h };
        let mut blocked = false;
        for (pi, &p) in primes.iter().enumerate() {
            let r = h.rem_euclid(p as i64) as usize;
            coverage[pi][r] += 1;
            if coverage[pi].iter().all(|&c| c > 0) {
                blocked = true;
            }
        }
        if !blocked {
            chosen.push(h);
            if let Some(t) = extend(primes, chosen, coverage, k, diameter) {
                return Some(t);
            }
            chosen.pop();
        }
        for (pi, &p) in primes.iter().enumerate() {
            let r = h.rem_euclid(p as i64) as usize;
            coverage[pi][r] -= 1;
        }
        if slots_left == 1 {
            break; // only one candidate at the last level
        }
    }
    None
}

/// The `i`-th-prime-after-k construction: offsets are the first `k`
/// primes exceeding `k`. Admissibility is verified, not assumed.
pub fn primes_after_k(table: &PrimeTable, k: usize) -> Result<Tuple> {
    if k == 0 {
        return Err(Error::Validation("k must be positive".into()));
    }
    let mut offsets = Vec::with_capacity(k);
    for p in table.primes_in(k as u64 + 1, table.limit()) {
        offsets.push(p as i64);
        if offsets.len() == k {
            break;
        }
    }
    if offsets.len() < k {
        return Err(Error::Range(format!(
            "table limit {} holds only {} primes above {k}, need {k}",
            table.limit(),
            offsets.len()
        )));
    }
    let tuple = Tuple { offsets };
    let cert = check_admissible(&tuple);
    if !cert.admissible {
        return Err(Error::Validation(format!(
            "primes-after-k tuple unexpectedly blocked mod {}",
            cert.blocking_prime.unwrap()
        )));
    }
    Ok(tuple)
}

/// The 54-tuple of diameter 270 used for the bounded-gap conclusion.
pub const TUPLE_54: [i64; 54] = [
    0, 2, 6, 12, 20, 26, 30, 32, 42, 56, 60, 62, 72, 74, 84, 86, 90, 96, 104, 110, 114, 116, 120,
    126, 132, 134, 140, 144, 152, 156, 162, 170, 174, 176, 182, 186, 194, 200, 204, 210, 216, 222,
    224, 230, 236, 240, 242, 246, 252, 254, 260, 264, 266, 270,
];

/// Re-check the embedded 54-tuple: k = 54, diameter 270, admissible.
pub fn verify_paper_tuple() -> (Tuple, AdmissibilityCertificate) {
    let tuple = Tuple::new(TUPLE_54.to_vec()).expect("embedded tuple is sorted");
    let cert = check_admissible(&tuple);
    (tuple, cert)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_admissibility() {
        let t = Tuple::new(vec![0, 2]).unwrap();
        let cert = check_admissible(&t);
        assert!(cert.admissible);
        assert_eq!(cert.witness.get(&2), Some(&1));

        let t = Tuple::new(vec![0, 2, 4]).unwrap();
        let cert = check_admissible(&t);
        assert!(!cert.admissible);
        assert_eq!(cert.blocking_prime, Some(3));
    }

    #[test]
    fn witnesses_verify_by_modular_arithmetic() {
        let t = Tuple::new(vec![0, 4, 6, 10, 12, 16]).unwrap();
        let cert = check_admissible(&t);
        assert!(cert.admissible);
        for (&p, &r) in &cert.witness {
            for &h in t.offsets() {
                assert_ne!((r as i64 + h).rem_euclid(p as i64), 0, "p={p}, r={r}, h={h}");
            }
        }
    }

    #[test]
    fn rejects_malformed_tuples() {
        assert!(Tuple::new(vec![]).is_err());
        assert!(Tuple::new(vec![0, 2, 2]).is_err());
        assert!(Tuple::new(vec![2, 0]).is_err());
    }

    #[test]
    fn narrowest_small_k() {
        let t = narrowest_tuple(2, 10).unwrap();
        assert_eq!(t.offsets(), &[0, 2]);
        let t = narrowest_tuple(3, 10).unwrap();
        assert_eq!(t.diameter(), 6);
        assert_eq!(t.offsets(), &[0, 2, 6]);
        let t = narrowest_tuple(5, 20).unwrap();
        assert_eq!(t.diameter(), 12);
    }

    #[test]
    fn narrowest_not_found_within_bound() {
        let err = narrowest_tuple(5, 8).unwrap_err();
        match err {
            Error::Validation(msg) => assert!(msg.contains("8")),
            other => panic!("unexpected {other:?}"),
        }
    }

    /// Independent brute-force enumerator over all k-subsets of [0, d]
    /// containing both endpoints.
    fn brute_force_narrowest(k: usize, bound: i64) -> Option<Vec<i64>> {
        fn subsets(
            k: usize,
            d: i64,
            next: i64,
            acc: &mut Vec<i64>,
            best: &mut Option<Vec<i64>>,
        ) {
            if best.is_some() {
                return;
            }
            if acc.len() == k {
                let t = Tuple::new(acc.clone()).unwrap();
                if check_admissible(&t).admissible {
                    *best = Some(acc.clone());
                }
                return;
            }
            let remaining = k - acc.len();
            for h in next..=(d - remaining as i64 + 1) {
                let h = if remaining == 1 { d } else { h };
                acc.push(h);
                subsets(k, d, h + 1, acc, best);
                acc.pop();
                if remaining == 1 {
                    break;
                }
            }
        }
        for d in (k as i64 - 1)..=bound {
            let mut best = None;
            subsets(k, d, 1, &mut vec![0], &mut best);
            if best.is_some() {
                return best;
            }
        }
        None
    }

    #[test]
    fn narrowest_matches_brute_force_to_k8() {
        // frozen diameters from the enumerator: 2, 6, 8, 12, 16, 20, 26
        let expected = [(2, 2), (3, 6), (4, 8), (5, 12), (6, 16), (7, 20), (8, 26)];
        for (k, d) in expected {
            let fast = narrowest_tuple(k, 40).unwrap();
            let brute = brute_force_narrowest(k, 40).unwrap();
            assert_eq!(fast.offsets(), &brute[..], "k = {k}");
            assert_eq!(fast.diameter(), d, "k = {k}");
        }
    }

    #[test]
    fn primes_after_k_examples() {
        let table = PrimeTable::build(10_000).unwrap();
        let t = primes_after_k(&table, 2).unwrap();
        assert_eq!(t.offsets(), &[3, 5]);
        let t = primes_after_k(&table, 5).unwrap();
        assert_eq!(t.offsets(), &[7, 11, 13, 17, 19]);
        assert!(check_admissible(&t).admissible);
    }

    #[test]
    fn primes_after_k_diameter_band() {
        let table = PrimeTable::build(10_000).unwrap();
        let t = primes_after_k(&table, 100).unwrap();
        let d = t.diameter() as f64;
        let kl = 100.0 * (100.0f64).ln();
        assert!(d > kl / 3.0 && d < 3.0 * kl, "diameter {d} vs k log k {kl}");
    }

    #[test]
    fn primes_after_k_insufficient_table() {
        let table = PrimeTable::build(20).unwrap();
        assert!(primes_after_k(&table, 10).is_err());
    }

    #[test]
    fn paper_tuple_verifies() {
        let (tuple, cert) = verify_paper_tuple();
        assert_eq!(tuple.len(), 54);
        assert_eq!(tuple.diameter(), 270);
        assert!(cert.admissible);
    }

    #[test]
    fn shift_reflection_subtuple_invariances() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let base = Tuple::new(vec![0, 4, 6, 10, 16]).unwrap();
        let adm = check_admissible(&base).admissible;
        for _ in 0..20 {
            let c = rng.gen_range(-50..50i64);
            let shifted = Tuple::new(base.offsets().iter().map(|h| h + c).collect()).unwrap();
            assert_eq!(check_admissible(&shifted).admissible, adm);
        }
        let hk = base.offsets()[base.len() - 1];
        let mut reflected: Vec<i64> = base.offsets().iter().map(|h| hk - h).collect();
        reflected.reverse();
        let reflected = Tuple::new(reflected).unwrap();
        assert_eq!(check_admissible(&reflected).admissible, adm);
        // sub-tuples of admissible tuples stay admissible
        let (t54, _) = verify_paper_tuple();
        let sub = Tuple::new(t54.offsets().iter().step_by(3).copied().collect()).unwrap();
        assert!(check_admissible(&sub).admissible);
    }
}
