//! Arithmetic functions, zeta and Euler-product evaluation with error
//! bounds, and the closed-form visibility densities.

mod closed_form;
mod sieve;
mod sums;
mod zeta;

pub use closed_form::{delta_theory, gamma_theory, ModulusShape};
pub use sieve::{
    distinct_prime_factors, mobius_sieve, primes_up_to, squarefree_divisors, tau, LinearSieve,
    MobiusTable, MAX_SIEVE_LIMIT,
};
pub use sums::{
    ex_main_term, g_partial, lemma28_sum, lemma28_sum_with, lemma29_sum, pair_main_term, t_partial,
};
pub use zeta::{
    euler_product_two, euler_product_two_direct, zeta, Estimate, TheoryConstants, DEFAULT_TOL,
};

/// Neumaier-compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_small_terms() {
        let mut acc = KahanSum::new();
        acc.add(1.0);
        for _ in 0..10_000 {
            acc.add(1e-16);
        }
        assert!((acc.value() - (1.0 + 1e-12)).abs() < 1e-20);
    }
}
