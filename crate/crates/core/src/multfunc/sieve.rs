use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// File magic for a bit-packed Liouville table.
pub const CACHE_MAGIC: &[u8; 8] = b"LIOUVBIT";
/// Environment variable holding the default memory budget in bytes.
pub const MEMORY_BUDGET_ENV: &str = "BOHR_MEMORY_BUDGET";
pub const DEFAULT_MEMORY_BUDGET: u64 = 2 << 30;
pub const DEFAULT_SEGMENT: usize = 1 << 18;

/// Memory budget from the environment, falling back to 2 GiB.
pub fn memory_budget() -> u64 {
    std::env::var(MEMORY_BUDGET_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MEMORY_BUDGET)
}

/// λ(n) for `1 <= n <= limit`, one bit per entry: bit `n - 1` is set when λ(n) = +1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SieveTable {
    limit: u64,
    words: Vec<u64>,
    segment_size: usize,
}

/// Primes up to `n` by a plain Eratosthenes sieve.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Segmented sieve for Ω-parity. Memory is `limit/8` bytes for the result plus
/// `O(segment_size)` per worker.
pub fn liouville_sieve(limit: u64, segment_size: usize) -> Result<SieveTable> {
    liouville_sieve_with_budget(limit, segment_size, memory_budget())
}

pub fn liouville_sieve_with_budget(limit: u64, segment_size: usize, budget: u64) -> Result<SieveTable> {
    if limit < 1 {
        return Err(Error::InvalidArgument("sieve limit must be at least 1".into()));
    }
    if segment_size < 2 {
        return Err(Error::InvalidArgument("segment size must be at least 2".into()));
    }
    let bytes = limit.div_ceil(8);
    if bytes > budget {
        return Err(Error::ResourceLimit(format!(
            "a sieve to {} needs {} bytes, budget is {}",
            limit, bytes, budget
        )));
    }
    let seg = segment_size.next_multiple_of(64);
    let primes = primes_up_to(isqrt(limit));
    let nwords = limit.div_ceil(64) as usize;
    let mut words = vec![0u64; nwords];
    let words_per_seg = seg / 64;
    words.par_chunks_mut(words_per_seg).enumerate().for_each(|(k, chunk)| {
        let start = (k * seg) as u64 + 1;
        let end = (start + (chunk.len() * 64) as u64 - 1).min(limit);
        sieve_segment(start, end, &primes, chunk);
    });
    Ok(SieveTable { limit, words, segment_size: seg })
}

/// Fills `out` for `n` in `[start, end]`, `start ≡ 1 (mod 64)`.
fn sieve_segment(start: u64, end: u64, primes: &[u64], out: &mut [u64]) {
    let len = (end - start + 1) as usize;
    let mut prod = vec![1u64; len];
    let mut parity = vec![0u8; len];
    for &p in primes {
        if p * p > end {
            break;
        }
        let mut pk = p;
        loop {
            let first = start.div_ceil(pk) * pk;
            let mut m = first;
            while m <= end {
                let i = (m - start) as usize;
                parity[i] ^= 1;
                prod[i] *= p;
                m += pk;
            }
            match pk.checked_mul(p) {
                Some(next) if next <= end => pk = next,
                _ => break,
            }
        }
    }
    for i in 0..len {
        // at most one prime factor above sqrt(end) is left over
        let odd = parity[i] ^ (prod[i] < start + i as u64) as u8;
        if odd == 0 {
            out[i / 64] |= 1 << (i % 64);
        }
    }
}

impl SieveTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn segment_size(&self) -> usize {
        self.segment_size
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// λ(n) ∈ {−1, +1}; panics outside `1..=limit`.
    #[inline]
    pub fn lambda(&self, n: u64) -> i8 {
        assert!(n >= 1 && n <= self.limit, "n = {} outside sieve range 1..={}", n, self.limit);
        let i = n - 1;
        if self.words[(i / 64) as usize] >> (i % 64) & 1 == 1 {
            1
        } else {
            -1
        }
    }

    /// Σ_{n ≤ x} λ(n).
    pub fn summatory(&self, x: u64) -> i64 {
        let x = x.min(self.limit);
        let full = (x / 64) as usize;
        let mut plus: u64 = self.words[..full].iter().map(|w| w.count_ones() as u64).sum();
        let tail = x % 64;
        if tail > 0 {
            plus += (self.words[full] & ((1u64 << tail) - 1)).count_ones() as u64;
        }
        2 * plus as i64 - x as i64
    }

    /// Writes the table: magic, little-endian limit, then bits LSB-first.
    pub fn write_cache(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(CACHE_MAGIC)?;
        w.write_all(&self.limit.to_le_bytes())?;
        let nbytes = self.limit.div_ceil(8) as usize;
        let mut bytes = Vec::with_capacity(nbytes + 8);
        for word in &self.words {
            bytes.extend_from_slice(&word.to_le_bytes());
        }
        bytes.truncate(nbytes);
        w.write_all(&bytes)?;
        w.flush()?;
        Ok(())
    }

    pub fn read_cache(path: &Path) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let mut head = [0u8; 16];
        r.read_exact(&mut head)?;
        if &head[..8] != CACHE_MAGIC {
            return Err(Error::Parse(format!("{} is not a Liouville cache", path.display())));
        }
        let limit = u64::from_le_bytes(head[8..].try_into().unwrap());
        let nbytes = limit.div_ceil(8) as usize;
        let mut bytes = Vec::with_capacity(nbytes);
        r.read_to_end(&mut bytes)?;
        if bytes.len() != nbytes {
            return Err(Error::Parse(format!(
                "cache {} holds {} data bytes, expected {}",
                path.display(),
                bytes.len(),
                nbytes
            )));
        }
        bytes.resize(nbytes.next_multiple_of(8), 0);
        let words = bytes.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().unwrap())).collect();
        Ok(SieveTable { limit, words, segment_size: DEFAULT_SEGMENT })
    }
}
