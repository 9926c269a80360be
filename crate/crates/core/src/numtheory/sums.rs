//! Finite arithmetic sums behind the expected visible proportions.

use super::sieve::{
    distinct_prime_factors, mobius_sieve, squarefree_divisors, LinearSieve, MobiusTable,
};
use super::KahanSum;
use crate::error::{domain, Result};

fn check(n: u64, what: &str, k: u32) -> Result<()> {
    if n == 0 {
        return domain(format!("{what} must be at least 1"));
    }
    if k < 2 {
        return domain(format!("exponent must be at least 2, got {k}"));
    }
    Ok(())
}

fn ex_term(primes: &[u64], k: u32) -> f64 {
    let exp = -(k as i32 - 1);
    squarefree_divisors(primes)
        .into_iter()
        .map(|(d, mu)| f64::from(mu) * (d as f64).powi(exp))
        .collect::<KahanSum>()
        .value()
}

fn pair_term(i: u64, primes_i: &[u64], primes_next: &[u64], k: u32) -> f64 {
    let exp = -(k as i32 - 1);
    let next = squarefree_divisors(primes_next);
    let mut acc = KahanSum::new();
    for (d1, mu1) in squarefree_divisors(primes_i) {
        for &(d2, mu2) in &next {
            // d1 | i and d2 | i+1 are always coprime
            match d1.checked_mul(d2) {
                Some(h) if h <= i => acc.add(f64::from(mu1 * mu2) * (h as f64).powi(exp)),
                _ => {}
            }
        }
    }
    acc.value()
}

/// `sum_{d | i} mu(d) / d^{k-1}`.
pub fn ex_main_term(i: u64, k: u32) -> Result<f64> {
    check(i, "i", k)?;
    Ok(ex_term(&distinct_prime_factors(i), k))
}

/// `sum mu(d1) mu(d2) / (d1 d2)^{k-1}` over `d1 | i`, `d2 | i+1`,
/// `gcd(d1, d2) = 1`, `d1 d2 <= i`.
pub fn pair_main_term(i: u64, k: u32) -> Result<f64> {
    check(i, "i", k)?;
    Ok(pair_term(
        i,
        &distinct_prime_factors(i),
        &distinct_prime_factors(i + 1),
        k,
    ))
}

/// `sum_{d <= n} mu(d) / d^{l-1} * floor(n/d)`, roughly `n / zeta(l)`.
pub fn lemma28_sum(n: u64, l: u32) -> Result<f64> {
    check(n, "n", l)?;
    lemma28_sum_with(&mobius_sieve(n)?, n, l)
}

/// [`lemma28_sum`] against a prebuilt Möbius table covering `1..=n`.
pub fn lemma28_sum_with(table: &MobiusTable, n: u64, l: u32) -> Result<f64> {
    check(n, "n", l)?;
    if table.limit() < n {
        return domain(format!("Möbius table covers {} < {n}", table.limit()));
    }
    let exp = -(l as i32 - 1);
    let mut acc = KahanSum::new();
    for (idx, &mu) in table.values()[..n as usize].iter().enumerate() {
        if mu != 0 {
            let d = idx as u64 + 1;
            acc.add(f64::from(mu) * (d as f64).powi(exp) * (n / d) as f64);
        }
    }
    Ok(acc.value())
}

/// `V_{n,l} = sum_{i <= n} pair_main_term(i, l)`, roughly `n * prod_p (1 - 2/p^l)`.
pub fn lemma29_sum(n: u64, l: u32) -> Result<f64> {
    check(n, "n", l)?;
    let sieve = LinearSieve::new(n + 1)?;
    let mut acc = KahanSum::new();
    let mut primes_i = sieve.distinct_primes(1);
    for i in 1..=n {
        let primes_next = sieve.distinct_primes(i + 1);
        acc.add(pair_term(i, &primes_i, &primes_next, l));
        primes_i = primes_next;
    }
    Ok(acc.value())
}

fn partial<F>(n: u64, k: u32, a: u64, m: u64, term: F) -> Result<f64>
where
    F: Fn(&LinearSieve, u64) -> f64,
{
    check(n, "n", k)?;
    if m == 0 || a >= m {
        return domain(format!("need 0 <= a < m, got a={a}, m={m}"));
    }
    let sieve = LinearSieve::new(n + 1)?;
    let start = if a == 0 { m } else { a };
    let mut acc = KahanSum::new();
    let mut i = start;
    while i <= n {
        acc.add(term(&sieve, i));
        i += m;
    }
    Ok(acc.value() / n as f64)
}

/// `(1/n) sum_{i <= n, i ≡ a (mod m)} ex_main_term(i, k)`.
pub fn t_partial(n: u64, k: u32, a: u64, m: u64) -> Result<f64> {
    partial(n, k, a, m, |s, i| ex_term(&s.distinct_primes(i), k))
}

/// `(1/n) sum_{i <= n, i ≡ a (mod m)} pair_main_term(i, k)`.
pub fn g_partial(n: u64, k: u32, a: u64, m: u64) -> Result<f64> {
    partial(n, k, a, m, |s, i| {
        pair_term(i, &s.distinct_primes(i), &s.distinct_primes(i + 1), k)
    })
}
