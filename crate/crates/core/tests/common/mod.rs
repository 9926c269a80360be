//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use lattice_vis::oracle::RationalAlpha;
use num_bigint::BigInt;
use num_rational::BigRational;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// One congruence-mass instance: step counts per law, the laws as integer
/// numerators over a shared denominator, a modulus and a residue vector.
#[derive(Debug, Clone)]
pub struct LInstance {
    pub counts: Vec<u64>,
    pub numerators: Vec<Vec<u64>>,
    pub denominator: u64,
    pub d: u64,
    pub g: Vec<u64>,
}

impl LInstance {
    pub fn k(&self) -> usize {
        self.numerators[0].len()
    }

    pub fn n(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn alphas(&self) -> Vec<RationalAlpha> {
        self.numerators
            .iter()
            .map(|num| {
                let num: Vec<i64> = num.iter().map(|&x| x as i64).collect();
                RationalAlpha::from_ratios(&num, self.denominator as i64).unwrap()
            })
            .collect()
    }
}

/// Random positive composition of `den` into `k` parts.
fn composition(rng: &mut ChaCha8Rng, den: u64, k: usize) -> Vec<u64> {
    loop {
        let mut cuts: Vec<u64> = (0..k - 1).map(|_| 1 + rng.next_u64() % (den - 1)).collect();
        cuts.sort_unstable();
        cuts.dedup();
        if cuts.len() != k - 1 {
            continue;
        }
        let mut parts = Vec::with_capacity(k);
        let mut prev = 0;
        for c in cuts.into_iter().chain(std::iter::once(den)) {
            parts.push(c - prev);
            prev = c;
        }
        return parts;
    }
}

/// Deterministic random instance with `n <= max_n`, `k in {2,3}`, `q <= 3`, `d <= 6`.
pub fn random_instance(rng: &mut ChaCha8Rng, max_n: u64) -> LInstance {
    let k = 2 + (rng.next_u64() % 2) as usize;
    let q = 1 + (rng.next_u64() % 3) as usize;
    let d = 1 + rng.next_u64() % 6;
    let denominator = 4 + rng.next_u64() % 9;
    let numerators = (0..q).map(|_| composition(rng, denominator, k)).collect();
    let n = 1 + rng.next_u64() % max_n;
    let mut counts = vec![0u64; q];
    for _ in 0..n {
        counts[(rng.next_u64() % q as u64) as usize] += 1;
    }
    let g = (0..k - 1).map(|_| rng.next_u64() % d).collect();
    LInstance {
        counts,
        numerators,
        denominator,
        d,
        g,
    }
}

pub fn instance_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Congruence mass by walking every direction sequence: the sum over all
/// `k^n` paths whose first `k-1` direction counts match `g` mod `d` of the
/// integer weight product, over `denominator^n`.
pub fn brute_force_l(inst: &LInstance) -> BigRational {
    let k = inst.k();
    let laws: Vec<&[u64]> = inst
        .counts
        .iter()
        .zip(&inst.numerators)
        .flat_map(|(&c, num)| std::iter::repeat_n(num.as_slice(), c as usize))
        .collect();
    let mut counts = vec![0u64; k];
    let mut total = 0u128;
    walk_paths(&laws, 0, 1, &mut counts, inst, &mut total);
    let den = BigInt::from(inst.denominator).pow(laws.len() as u32);
    BigRational::new(BigInt::from(total), den)
}

fn walk_paths(
    laws: &[&[u64]],
    step: usize,
    weight: u128,
    counts: &mut [u64],
    inst: &LInstance,
    total: &mut u128,
) {
    if step == laws.len() {
        let hit = counts[..counts.len() - 1]
            .iter()
            .zip(&inst.g)
            .all(|(c, g)| c % inst.d == *g);
        if hit {
            *total += weight;
        }
        return;
    }
    for (axis, &p) in laws[step].iter().enumerate() {
        counts[axis] += 1;
        walk_paths(laws, step + 1, weight * p as u128, counts, inst, total);
        counts[axis] -= 1;
    }
}
