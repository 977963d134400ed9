//! On-disk segment cache.
//!
//! One file per segment, all integers little-endian:
//!
//! ```text
//! offset  size  field
//! 0       4     magic "KTSL"
//! 4       2     format version (currently 1)
//! 6       1     kind (0 = prime, 1 = liouville)
//! 7       8     base
//! 15      8     length in bits
//! 23      len/8 payload, bit i of byte b = integer base + 8b + i
//! ```
//!
//! Files live under `<dir>/<kind>-<span>/seg-<base>.ktsl`, keyed by the
//! table span so partially-sieved trailing segments of different builds
//! never collide. A version mismatch makes the loader reject the file
//! (the caller then recomputes and overwrites); stale versions are never
//! migrated.

use super::SegmentKind;
use crate::error::{Error, Result};
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

pub const MAGIC: &[u8; 4] = b"KTSL";
pub const FORMAT_VERSION: u16 = 1;

fn segment_path(dir: &Path, kind: SegmentKind, span: u64, base: u64) -> PathBuf {
    dir.join(format!("{}-{span}", kind.name()))
        .join(format!("seg-{base:016x}.ktsl"))
}

/// Serialize one segment into the cache directory.
pub fn store_segment(
    dir: &Path,
    kind: SegmentKind,
    span: u64,
    base: u64,
    length: u64,
    words: &[u64],
) -> Result<()> {
    let path = segment_path(dir, kind, span, base);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut buf = Vec::with_capacity(23 + words.len() * 8);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.push(kind.code());
    buf.extend_from_slice(&base.to_le_bytes());
    buf.extend_from_slice(&length.to_le_bytes());
    for w in words {
        buf.extend_from_slice(&w.to_le_bytes());
    }
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&buf)?;
    }
    fs::rename(&tmp, &path)?;
    Ok(())
}

/// Load one segment; any mismatch (magic, version, kind, geometry) is an
/// error so the caller falls back to sieving.
pub fn load_segment(
    dir: &Path,
    kind: SegmentKind,
    span: u64,
    base: u64,
    length: u64,
    words: &mut [u64],
) -> Result<()> {
    let path = segment_path(dir, kind, span, base);
    let mut f = fs::File::open(&path)?;
    let mut header = [0u8; 23];
    f.read_exact(&mut header)?;
    if &header[0..4] != MAGIC {
        return Err(Error::CacheFormat(format!("{}: bad magic", path.display())));
    }
    let version = u16::from_le_bytes([header[4], header[5]]);
    if version != FORMAT_VERSION {
        return Err(Error::CacheFormat(format!(
            "{}: version {version}, want {FORMAT_VERSION}",
            path.display()
        )));
    }
    if header[6] != kind.code() {
        return Err(Error::CacheFormat(format!(
            "{}: kind {}, want {}",
            path.display(),
            header[6],
            kind.code()
        )));
    }
    let file_base = u64::from_le_bytes(header[7..15].try_into().unwrap());
    let file_len = u64::from_le_bytes(header[15..23].try_into().unwrap());
    if file_base != base || file_len != length {
        return Err(Error::CacheFormat(format!(
            "{}: segment geometry ({file_base}, {file_len}) does not match ({base}, {length})",
            path.display()
        )));
    }
    let mut payload = vec![0u8; (length / 8) as usize];
    f.read_exact(&mut payload)?;
    for (i, chunk) in payload.chunks_exact(8).enumerate() {
        words[i] = u64::from_le_bytes(chunk.try_into().unwrap());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primes::{LiouvilleTable, PrimeTable, SieveConfig};

    #[test]
    fn round_trip_through_cache() {
        let dir = std::env::temp_dir().join(format!("ktsl-cache-test-{}", std::process::id()));
        let cfg = SieveConfig {
            segment_bits: 512,
            ..SieveConfig::default()
        };
        let a = PrimeTable::build_with(10_000, &cfg, Some(&dir)).unwrap();
        // second build must load every segment from disk and agree bit for bit
        let b = PrimeTable::build_with(10_000, &cfg, Some(&dir)).unwrap();
        assert_eq!(a, b);
        let la = LiouvilleTable::build_with(10_000, &cfg, Some(&dir)).unwrap();
        let lb = LiouvilleTable::build_with(10_000, &cfg, Some(&dir)).unwrap();
        assert_eq!(la, lb);
        let fresh = PrimeTable::build_with(10_000, &cfg, None).unwrap();
        assert_eq!(a, fresh);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let dir = std::env::temp_dir().join(format!("ktsl-cache-ver-{}", std::process::id()));
        let words = vec![0xdeadbeefu64; 8];
        store_segment(&dir, SegmentKind::Prime, 512, 0, 512, &words).unwrap();
        let path = segment_path(&dir, SegmentKind::Prime, 512, 0);
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[4] = 0xfe; // corrupt the version
        std::fs::write(&path, &bytes).unwrap();
        let mut out = vec![0u64; 8];
        let err = load_segment(&dir, SegmentKind::Prime, 512, 0, 512, &mut out).unwrap_err();
        assert!(matches!(err, Error::CacheFormat(_)));
        std::fs::remove_dir_all(&dir).ok();
    }
}
