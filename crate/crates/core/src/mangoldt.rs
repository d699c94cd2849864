//! Sieved von Mangoldt tables.
//!
//! A linear sieve fills the smallest-prime-factor array, from which
//! `Λ(n) = log p` is read off whenever `n` is a power of `p`. Memory cost is
//! 20 bytes per entry (4 for the spf, 8 for `Λ`, 8 for the `ψ` prefix).
//!
//! Cache layout (little endian): `"PRLB"`, `u8` version, `u64` limit, then
//! `limit + 1` spf entries as `u32`, then the FNV-1a 64 checksum of the
//! payload bytes as `u64`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{CacheError, Error, Result};

pub const CACHE_MAGIC: [u8; 4] = *b"PRLB";
pub const CACHE_VERSION: u8 = 1;
pub const BYTES_PER_ENTRY: u64 = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct MangoldtTable {
    limit: u64,
    spf: Vec<u32>,
    lambda: Vec<f64>,
    psi: Vec<f64>,
}

fn try_vec<T: Clone>(len: usize, fill: T, limit: u64) -> Result<Vec<T>> {
    let mut v = Vec::new();
    v.try_reserve_exact(len).map_err(|_| Error::Alloc {
        bytes: (limit + 1) * BYTES_PER_ENTRY,
        entries: limit + 1,
    })?;
    v.resize(len, fill);
    Ok(v)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

impl MangoldtTable {
    pub fn build(limit: u64) -> Result<Self> {
        if limit == 0 {
            return Err(Error::Precondition("sieve limit must be >= 1".into()));
        }
        if limit > u32::MAX as u64 {
            return Err(Error::Precondition(format!(
                "sieve limit {limit} exceeds the u32 spf encoding"
            )));
        }
        let len = limit as usize + 1;
        let mut spf = try_vec(len, 0u32, limit)?;
        let mut primes: Vec<u32> = Vec::new();
        for n in 2..len {
            if spf[n] == 0 {
                spf[n] = n as u32;
                primes.push(n as u32);
            }
            let p_n = spf[n];
            for &p in &primes {
                let m = n * p as usize;
                if p > p_n || m >= len {
                    break;
                }
                spf[m] = p;
            }
        }
        Self::from_spf(limit, spf)
    }

    fn from_spf(limit: u64, spf: Vec<u32>) -> Result<Self> {
        let len = limit as usize + 1;
        let mut lambda = try_vec(len, 0.0f64, limit)?;
        for n in 2..len {
            let p = spf[n] as usize;
            let mut m = n;
            while m.is_multiple_of(p) {
                m /= p;
            }
            if m == 1 {
                lambda[n] = (p as f64).ln();
            }
        }
        let mut psi = try_vec(len, 0.0f64, limit)?;
        let mut acc = 0.0;
        for (s, &l) in psi.iter_mut().zip(&lambda) {
            acc += l;
            *s = acc;
        }
        Ok(Self {
            limit,
            spf,
            lambda,
            psi,
        })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// `Λ(n)`; index 0 holds 0.
    pub fn lambda(&self, n: u64) -> f64 {
        self.lambda[n as usize]
    }

    pub fn lambda_slice(&self) -> &[f64] {
        &self.lambda
    }

    pub fn smallest_prime_factor(&self, n: u64) -> u32 {
        self.spf[n as usize]
    }

    pub fn is_prime_power(&self, n: u64) -> bool {
        self.lambda[n as usize] > 0.0
    }

    pub fn chebyshev_psi(&self, x: u64) -> Result<f64> {
        if x > self.limit {
            return Err(Error::TableTooSmall {
                have: self.limit,
                need: x,
            });
        }
        Ok(self.psi[x as usize])
    }

    /// `(n, Λ(n))` for prime powers `n ≤ upto`.
    pub fn prime_powers(&self, upto: u64) -> impl Iterator<Item = (u64, f64)> + '_ {
        let end = upto.min(self.limit) as usize;
        self.lambda[..=end]
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > 0.0)
            .map(|(n, &l)| (n as u64, l))
    }

    pub fn require(&self, need: u64) -> Result<()> {
        if need > self.limit {
            Err(Error::TableTooSmall {
                have: self.limit,
                need,
            })
        } else {
            Ok(())
        }
    }

    pub fn save_cache(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(&CACHE_MAGIC)?;
        w.write_all(&[CACHE_VERSION])?;
        w.write_all(&self.limit.to_le_bytes())?;
        let payload: Vec<u8> = self.spf.iter().flat_map(|s| s.to_le_bytes()).collect();
        w.write_all(&payload)?;
        w.write_all(&fnv1a(&payload).to_le_bytes())?;
        w.flush()?;
        Ok(())
    }

    pub fn load_cache(path: impl AsRef<Path>) -> Result<Self> {
        let mut bytes = Vec::new();
        BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
        if bytes.len() < 13 {
            return Err(CacheError::Checksum(format!("file truncated to {} bytes", bytes.len())).into());
        }
        let magic: [u8; 4] = bytes[..4].try_into().unwrap();
        if magic != CACHE_MAGIC {
            return Err(CacheError::Magic(magic).into());
        }
        if bytes[4] != CACHE_VERSION {
            return Err(CacheError::Version {
                found: bytes[4],
                expected: CACHE_VERSION,
            }
            .into());
        }
        let limit = u64::from_le_bytes(bytes[5..13].try_into().unwrap());
        let payload_len = (limit as usize + 1) * 4;
        let body = &bytes[13..];
        if body.len() != payload_len + 8 {
            return Err(CacheError::Checksum(format!(
                "expected {} payload+checksum bytes for limit {limit}, found {}",
                payload_len + 8,
                body.len()
            ))
            .into());
        }
        let (payload, tail) = body.split_at(payload_len);
        let stored = u64::from_le_bytes(tail.try_into().unwrap());
        let computed = fnv1a(payload);
        if stored != computed {
            return Err(CacheError::Checksum(format!(
                "stored {stored:#018x}, computed {computed:#018x}"
            ))
            .into());
        }
        let spf: Vec<u32> = payload
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        for (n, &p) in spf.iter().enumerate().skip(2) {
            if p < 2 || n % p as usize != 0 {
                return Err(CacheError::Corrupt(format!("spf[{n}] = {p}")).into());
            }
        }
        Self::from_spf(limit, spf)
    }

    /// Loads `path` when it holds a table covering `limit`, otherwise sieves
    /// and rewrites the cache.
    pub fn load_or_build(path: Option<&Path>, limit: u64) -> Result<Self> {
        if let Some(p) = path {
            if p.exists() {
                let t = Self::load_cache(p)?;
                if t.limit >= limit {
                    return Ok(t);
                }
            }
            let t = Self::build(limit)?;
            t.save_cache(p)?;
            return Ok(t);
        }
        Self::build(limit)
    }
}
