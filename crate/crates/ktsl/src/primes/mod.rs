//! Segmented generation of prime and Liouville tables.
//!
//! Both tables are flat bitsets over `[0, limit)` (padded to a word
//! boundary), built segment by segment so that construction parallelizes
//! and segments can be cached on disk. The bit content is a pure function
//! of `limit`: segment length and thread count never change a single bit.
//!
//! Prime tables mark primes directly (`bit n == 1` iff `n` is prime).
//! Liouville tables mark sign (`bit n == 1` iff `lambda(n) == -1`,
//! i.e. `n` has an odd number of prime factors with multiplicity).

pub mod cache;

use crate::error::{Error, Result};
use rayon::prelude::*;

/// Default segment size in bits (2^20, sized for L2 cache residency).
pub const DEFAULT_SEGMENT_BITS: u64 = 1 << 20;

/// Hard cap on table limits; anything above is rejected up front.
pub const MAX_LIMIT: u64 = 1 << 63;

/// Tuning knobs for table construction.
#[derive(Debug, Clone)]
pub struct SieveConfig {
    /// Segment length in bits; must be a positive multiple of 64.
    pub segment_bits: u64,
    /// Memory budget in bytes for the retained table.
    pub memory_budget: u64,
}

impl Default for SieveConfig {
    fn default() -> Self {
        SieveConfig {
            segment_bits: DEFAULT_SEGMENT_BITS,
            memory_budget: 4 << 30,
        }
    }
}

impl SieveConfig {
    fn validate(&self) -> Result<()> {
        if self.segment_bits == 0 || self.segment_bits % 64 != 0 {
            return Err(Error::Validation(format!(
                "segment length must be a positive multiple of 64 bits, got {}",
                self.segment_bits
            )));
        }
        Ok(())
    }

    fn check_budget(&self, limit: u64, kind: SegmentKind) -> Result<()> {
        if limit > MAX_LIMIT {
            return Err(Error::Validation(format!(
                "limit {limit} exceeds the 2^63 cap"
            )));
        }
        // Retained bits plus per-thread scratch for the Liouville sieve
        // (residual value + one byte of parity state per integer).
        let table_bytes = limit / 8 + 16;
        let scratch = match kind {
            SegmentKind::Prime => self.segment_bits / 8,
            SegmentKind::Liouville => self.segment_bits * 9,
        };
        let need = table_bytes + scratch * rayon::current_num_threads() as u64;
        if need > self.memory_budget {
            return Err(Error::Resource(format!(
                "building a {} table to limit {limit} needs ~{need} bytes, \
                 over the configured budget of {} bytes",
                kind.name(),
                self.memory_budget
            )));
        }
        Ok(())
    }
}

/// Discriminates the two on-disk segment payloads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentKind {
    Prime,
    Liouville,
}

impl SegmentKind {
    pub fn code(self) -> u8 {
        match self {
            SegmentKind::Prime => 0,
            SegmentKind::Liouville => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SegmentKind::Prime => "prime",
            SegmentKind::Liouville => "liouville",
        }
    }
}

/// Borrowed view of one segment of a table: `length` bits starting at
/// integer `base`, with bit `i` describing `base + i`.
#[derive(Debug, Clone, Copy)]
pub struct Segment<'a> {
    pub base: u64,
    pub length: u64,
    pub words: &'a [u64],
}

fn padded_bits(limit: u64) -> u64 {
    limit.div_ceil(64) * 64
}

/// Shared bitset backing for both table kinds.
#[derive(Debug, Clone, PartialEq, Eq)]
struct BitTable {
    limit: u64,
    segment_bits: u64,
    words: Vec<u64>,
}

impl BitTable {
    fn bit(&self, n: u64) -> bool {
        (self.words[(n / 64) as usize] >> (n % 64)) & 1 == 1
    }

    fn segments(&self) -> impl Iterator<Item = Segment<'_>> {
        let seg_bits = self.segment_bits;
        let total_bits = self.words.len() as u64 * 64;
        let n_segs = total_bits.div_ceil(seg_bits.max(1));
        (0..n_segs).map(move |s| {
            let base = s * seg_bits;
            let length = seg_bits.min(total_bits - base);
            let w0 = (base / 64) as usize;
            let w1 = ((base + length) / 64) as usize;
            Segment {
                base,
                length,
                words: &self.words[w0..w1],
            }
        })
    }

    /// Count set bits over `[0, n]`.
    fn count_through(&self, n: u64) -> u64 {
        let full_words = ((n + 1) / 64) as usize;
        let mut count: u64 = self.words[..full_words]
            .iter()
            .map(|w| w.count_ones() as u64)
            .sum();
        let rem = (n + 1) % 64;
        if rem != 0 {
            let mask = (1u64 << rem) - 1;
            count += (self.words[full_words] & mask).count_ones() as u64;
        }
        count
    }
}

/// Bit-array prime indicator over `[0, limit)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeTable {
    table: BitTable,
}

impl PrimeTable {
    /// Sieve all primes below `limit` with default configuration.
    pub fn build(limit: u64) -> Result<PrimeTable> {
        Self::build_with(limit, &SieveConfig::default(), None)
    }

    /// Sieve with explicit configuration and optional segment cache.
    pub fn build_with(
        limit: u64,
        config: &SieveConfig,
        cache_dir: Option<&std::path::Path>,
    ) -> Result<PrimeTable> {
        config.validate()?;
        config.check_budget(limit, SegmentKind::Prime)?;
        let base_primes = small_primes(isqrt(limit.saturating_sub(1)));
        let words = build_segments(limit, config, SegmentKind::Prime, cache_dir, |base, len, out| {
            sieve_prime_segment(base, len, limit, &base_primes, out);
        })?;
        Ok(PrimeTable {
            table: BitTable {
                limit,
                segment_bits: config.segment_bits,
                words,
            },
        })
    }

    pub fn limit(&self) -> u64 {
        self.table.limit
    }

    pub fn segments(&self) -> impl Iterator<Item = Segment<'_>> {
        self.table.segments()
    }

    /// Unchecked primality query; `n` must be below `limit`.
    pub fn is_prime(&self, n: u64) -> bool {
        debug_assert!(n < self.table.limit);
        self.table.bit(n)
    }

    /// Number of primes `p <= x`.
    pub fn prime_count(&self, x: u64) -> Result<u64> {
        if x >= self.table.limit {
            return Err(Error::Range(format!(
                "prime_count({x}) needs a table limit above {x}, have {}",
                self.table.limit
            )));
        }
        Ok(self.table.count_through(x))
    }

    /// Iterate over all primes below the limit.
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        SetBits::new(&self.table.words, self.table.limit)
    }

    /// Iterate over primes in `[lo, hi)`; `hi` is clamped to the limit.
    pub fn primes_in(&self, lo: u64, hi: u64) -> impl Iterator<Item = u64> + '_ {
        let hi = hi.min(self.table.limit);
        SetBits::range(&self.table.words, lo.min(hi), hi)
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.table.words
    }
}

/// Liouville sign table for `n` in `[1, limit]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiouvilleTable {
    table: BitTable,
}

impl LiouvilleTable {
    /// Compute `lambda(n)` for all `1 <= n <= limit`.
    pub fn build(limit: u64) -> Result<LiouvilleTable> {
        Self::build_with(limit, &SieveConfig::default(), None)
    }

    pub fn build_with(
        limit: u64,
        config: &SieveConfig,
        cache_dir: Option<&std::path::Path>,
    ) -> Result<LiouvilleTable> {
        if limit < 1 {
            return Err(Error::Validation("liouville limit must be >= 1".into()));
        }
        config.validate()?;
        config.check_budget(limit, SegmentKind::Liouville)?;
        // bits cover [0, limit]; bit 0 is padding and stays clear
        let span = limit + 1;
        let base_primes = small_primes(isqrt(limit));
        let words = build_segments(span, config, SegmentKind::Liouville, cache_dir, |base, len, out| {
            sieve_liouville_segment(base, len, limit, &base_primes, out);
        })?;
        Ok(LiouvilleTable {
            table: BitTable {
                limit,
                segment_bits: config.segment_bits,
                words,
            },
        })
    }

    pub fn limit(&self) -> u64 {
        self.table.limit
    }

    pub fn segments(&self) -> impl Iterator<Item = Segment<'_>> {
        self.table.segments()
    }

    /// `lambda(n)` as `+1` or `-1`; `n` must lie in `[1, limit]`.
    pub fn lambda(&self, n: u64) -> i64 {
        debug_assert!(n >= 1 && n <= self.table.limit);
        if self.table.bit(n) {
            -1
        } else {
            1
        }
    }

    pub fn lambda_checked(&self, n: u64) -> Result<i64> {
        if n < 1 || n > self.table.limit {
            return Err(Error::Range(format!(
                "lambda({n}) outside table range [1, {}]",
                self.table.limit
            )));
        }
        Ok(self.lambda(n))
    }
}

/// Build the padded bitset for `[0, span)` segment by segment in parallel.
///
/// Segments are independent; results land in disjoint word ranges of one
/// flat vector, so the output does not depend on scheduling order.
fn build_segments<F>(
    span: u64,
    config: &SieveConfig,
    kind: SegmentKind,
    cache_dir: Option<&std::path::Path>,
    sieve_one: F,
) -> Result<Vec<u64>>
where
    F: Fn(u64, u64, &mut [u64]) + Sync,
{
    let total_bits = padded_bits(span);
    let seg_bits = config.segment_bits;
    let mut words = vec![0u64; (total_bits / 64) as usize];
    let words_per_seg = (seg_bits / 64) as usize;

    let results: Vec<Result<()>> = words
        .par_chunks_mut(words_per_seg)
        .enumerate()
        .map(|(s, chunk)| {
            let base = s as u64 * seg_bits;
            let length = chunk.len() as u64 * 64;
            if let Some(dir) = cache_dir {
                if cache::load_segment(dir, kind, span, base, length, chunk).is_ok() {
                    return Ok(());
                }
            }
            sieve_one(base, length, chunk);
            if let Some(dir) = cache_dir {
                cache::store_segment(dir, kind, span, base, length, chunk)?;
            }
            Ok(())
        })
        .collect();
    for r in results {
        r?;
    }
    Ok(words)
}

/// Odd-only sieve of Eratosthenes for the base primes (`p <= bound`).
pub fn small_primes(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = vec![2];
    let mut p = 3usize;
    while p * p <= n {
        if !composite[p] {
            let mut m = p * p;
            while m <= n {
                composite[m] = true;
                m += 2 * p;
            }
        }
        p += 2;
    }
    let mut q = 3usize;
    while q <= n {
        if !composite[q] {
            primes.push(q as u64);
        }
        q += 2;
    }
    primes
}

/// Integer square root (floor).
pub fn isqrt(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut x = (n as f64).sqrt() as u64;
    while x.saturating_mul(x) > n {
        x -= 1;
    }
    while (x + 1).saturating_mul(x + 1) <= n {
        x += 1;
    }
    x
}

/// Mark primes within `[base, base + len)`, leaving bits at or above
/// `limit` clear.
fn sieve_prime_segment(base: u64, len: u64, limit: u64, base_primes: &[u64], out: &mut [u64]) {
    let hi = (base + len).min(limit);
    if base >= hi {
        return;
    }
    let clear = |out: &mut [u64], n: u64| {
        out[((n - base) / 64) as usize] &= !(1 << ((n - base) % 64));
    };
    // everything starts prime; composites get cleared
    for w in out.iter_mut() {
        *w = !0;
    }
    if base == 0 {
        clear(out, 0);
        if limit > 1 {
            clear(out, 1);
        }
    }
    for n in hi..base + len {
        clear(out, n);
    }
    for &p in base_primes {
        let pp = p.saturating_mul(p);
        if pp >= hi {
            // a composite below hi has a prime factor whose square is below hi
            break;
        }
        // start at p^2: smaller multiples are handled by smaller primes,
        // and p itself is never touched
        let mut m = pp.max(base.div_ceil(p) * p);
        while m < hi {
            clear(out, m);
            m += p;
        }
    }
}

/// Liouville sieve over `[base, base + len)`: smallest-prime-factor
/// divisions against the base primes, then one parity flip for the
/// residual prime factor above sqrt(limit).
fn sieve_liouville_segment(base: u64, len: u64, limit: u64, base_primes: &[u64], out: &mut [u64]) {
    let hi = (base + len).min(limit + 1);
    if base >= hi {
        return;
    }
    let count = (hi - base) as usize;
    let mut residual: Vec<u64> = (base..hi).collect();
    let mut parity = vec![0u8; count];
    for &p in base_primes {
        if p > limit {
            break;
        }
        let start = base.div_ceil(p) * p;
        let mut m = start.max(p);
        while m < hi {
            let idx = (m - base) as usize;
            while residual[idx] % p == 0 {
                residual[idx] /= p;
                parity[idx] ^= 1;
            }
            m += p;
        }
    }
    for (idx, &r) in residual.iter().enumerate() {
        let n = base + idx as u64;
        if n < 1 {
            continue;
        }
        let odd = parity[idx] ^ u8::from(r > 1);
        if odd == 1 {
            out[idx / 64] |= 1 << (idx % 64);
        }
    }
}

/// Iterator over set bit positions of a word slice.
struct SetBits<'a> {
    words: &'a [u64],
    word_idx: usize,
    current: u64,
    end: u64,
}

impl<'a> SetBits<'a> {
    fn new(words: &'a [u64], end: u64) -> Self {
        Self::range(words, 0, end)
    }

    fn range(words: &'a [u64], start: u64, end: u64) -> Self {
        let word_idx = (start / 64) as usize;
        let mut current = words.get(word_idx).copied().unwrap_or(0);
        if start % 64 != 0 {
            current &= !0u64 << (start % 64);
        }
        SetBits {
            words,
            word_idx,
            current,
            end,
        }
    }
}

impl Iterator for SetBits<'_> {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        loop {
            if self.current != 0 {
                let tz = self.current.trailing_zeros() as u64;
                let n = self.word_idx as u64 * 64 + tz;
                self.current &= self.current - 1;
                if n >= self.end {
                    return None;
                }
                return Some(n);
            }
            self.word_idx += 1;
            if self.word_idx >= self.words.len() || (self.word_idx as u64 * 64) >= self.end {
                return None;
            }
            self.current = self.words[self.word_idx];
        }
    }
}
