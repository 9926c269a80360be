use crate::error::{Error, Result};

/// Largest table the sieves will build.
pub const MAX_SIEVE_LIMIT: u64 = 200_000_000;

/// Linear sieve holding the smallest prime factor of every `n <= limit`.
#[derive(Debug, Clone)]
pub struct LinearSieve {
    spf: Vec<u32>,
    primes: Vec<u32>,
}

impl LinearSieve {
    pub fn new(limit: u64) -> Result<Self> {
        check_limit(limit)?;
        let n = limit as usize;
        let mut spf = vec![0u32; n + 1];
        let mut primes = Vec::new();
        for i in 2..=n {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
            }
            let si = spf[i];
            for &p in &primes {
                let ip = i * p as usize;
                if p > si || ip > n {
                    break;
                }
                spf[ip] = p;
            }
        }
        Ok(Self { spf, primes })
    }

    pub fn limit(&self) -> u64 {
        (self.spf.len() - 1) as u64
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    pub fn smallest_prime_factor(&self, n: u64) -> u32 {
        self.spf[n as usize]
    }

    /// Distinct prime factors of `1 <= n <= limit`, ascending.
    pub fn distinct_primes(&self, mut n: u64) -> Vec<u64> {
        let mut out = Vec::new();
        while n > 1 {
            let p = self.spf[n as usize] as u64;
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        out
    }
}

fn check_limit(limit: u64) -> Result<()> {
    if limit == 0 {
        return Err(Error::Size("sieve limit must be at least 1".into()));
    }
    if limit > MAX_SIEVE_LIMIT {
        return Err(Error::Size(format!(
            "sieve limit {limit} exceeds the memory budget of {MAX_SIEVE_LIMIT}"
        )));
    }
    Ok(())
}

/// Möbius values `mu(1..=limit)`.
#[derive(Debug, Clone)]
pub struct MobiusTable {
    values: Vec<i8>,
}

impl MobiusTable {
    pub fn limit(&self) -> u64 {
        (self.values.len() - 1) as u64
    }

    /// `mu(n)` for `1 <= n <= limit`.
    pub fn get(&self, n: u64) -> i8 {
        assert!(n >= 1 && n <= self.limit(), "mu({n}) outside table");
        self.values[n as usize]
    }

    /// Values indexed `1..=limit`.
    pub fn values(&self) -> &[i8] {
        &self.values[1..]
    }
}

pub fn mobius_sieve(limit: u64) -> Result<MobiusTable> {
    let sieve = LinearSieve::new(limit)?;
    let n = limit as usize;
    let mut values = vec![0i8; n + 1];
    values[1] = 1;
    for i in 2..=n {
        let p = sieve.spf[i] as usize;
        let rest = i / p;
        values[i] = if rest.is_multiple_of(p) {
            0
        } else {
            -values[rest]
        };
    }
    Ok(MobiusTable { values })
}

/// Primes `<= limit` by a plain sieve of Eratosthenes (no size budget
/// beyond [`MAX_SIEVE_LIMIT`]).
pub fn primes_up_to(limit: u64) -> Result<Vec<u64>> {
    if limit < 2 {
        return Ok(Vec::new());
    }
    check_limit(limit)?;
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i.saturating_mul(i);
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    Ok(out)
}

/// Distinct prime factors by trial division.
pub fn distinct_prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// All squarefree divisors built from `primes`, paired with `mu(d)`.
pub fn squarefree_divisors(primes: &[u64]) -> Vec<(u64, i8)> {
    let mut out = vec![(1u64, 1i8)];
    for &p in primes {
        let len = out.len();
        for idx in 0..len {
            let (d, mu) = out[idx];
            out.push((d * p, -mu));
        }
    }
    out
}

/// Number of positive divisors of `n`.
pub fn tau(n: u64) -> Result<u64> {
    if n == 0 {
        return crate::error::domain("tau(0) is undefined");
    }
    let mut n = n;
    let mut count = 1u64;
    let mut p = 2u64;
    while p * p <= n {
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        count *= e + 1;
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        count *= 2;
    }
    Ok(count)
}
