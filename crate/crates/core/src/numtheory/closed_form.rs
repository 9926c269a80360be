use super::zeta::{TheoryConstants, DEFAULT_TOL};
use crate::error::{domain, Error, Result};

/// Moduli for which the residue-class limits are known in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModulusShape {
    /// `m = 2^r`, `r >= 1`.
    PowerOfTwo { r: u32 },
    /// `m = p`, an odd prime.
    OddPrime { p: u64 },
}

impl ModulusShape {
    pub fn classify(m: u64) -> Result<Self> {
        if m >= 2 && m.is_power_of_two() {
            Ok(Self::PowerOfTwo {
                r: m.trailing_zeros(),
            })
        } else if m >= 3 && is_prime(m) {
            Ok(Self::OddPrime { p: m })
        } else {
            Err(Error::UnsupportedModulus(m))
        }
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub(crate) fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &WITNESSES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn check_residue(a: u64, m: u64) -> Result<()> {
    if a >= m {
        return domain(format!("residue {a} must be below the modulus {m}"));
    }
    Ok(())
}

// The ratios below are rewritten in negative powers so they stay finite for large k.

/// `delta_k(a; m) * zeta(k)`.
pub(crate) fn delta_factor(k: u32, a: u64, m: u64) -> Result<f64> {
    if k < 2 {
        return domain(format!("k must be at least 2, got {k}"));
    }
    let shape = ModulusShape::classify(m)?;
    check_residue(a, m)?;
    let kk = k as i32;
    Ok(match shape {
        ModulusShape::PowerOfTwo { r } => {
            let two_k = 2f64.powi(-kk);
            let two_r = 2f64.powi(-(r as i32));
            if a % 2 == 1 {
                two_r / (1.0 - two_k)
            } else {
                (0.5 - two_k) * 2.0 * two_r / (1.0 - two_k)
            }
        }
        ModulusShape::OddPrime { p } => {
            let pf = p as f64;
            let p_k = pf.powi(-kk);
            if a == 0 {
                (1.0 / pf - p_k) / (1.0 - p_k)
            } else {
                (1.0 / pf) / (1.0 - p_k)
            }
        }
    })
}

/// `gamma_k(a; m) / prod_p (1 - 2/p^k)`.
pub(crate) fn gamma_factor(k: u32, a: u64, m: u64) -> Result<f64> {
    if k < 2 {
        return domain(format!("k must be at least 2, got {k}"));
    }
    let shape = ModulusShape::classify(m)?;
    check_residue(a, m)?;
    let kk = k as i32;
    Ok(match shape {
        ModulusShape::PowerOfTwo { r } => 2f64.powi(-(r as i32)),
        ModulusShape::OddPrime { p } => {
            let pf = p as f64;
            let p_k = pf.powi(-kk);
            if a == 0 || a == p - 1 {
                (1.0 / pf - p_k) / (1.0 - 2.0 * p_k)
            } else {
                (1.0 / pf) / (1.0 - 2.0 * p_k)
            }
        }
    })
}

/// Almost-sure limit of the proportion of visible steps `i ≡ a (mod m)`,
/// for `m = 2^r` or an odd prime.
pub fn delta_theory(k: u32, a: u64, m: u64) -> Result<f64> {
    let factor = delta_factor(k, a, m)?;
    Ok(factor * TheoryConstants::new(k, DEFAULT_TOL)?.inv_zeta_k)
}

/// Almost-sure limit of the proportion of consecutive visible pairs
/// `(i, i+1)` with `i ≡ a (mod m)`, for `m = 2^r` or an odd prime.
pub fn gamma_theory(k: u32, a: u64, m: u64) -> Result<f64> {
    let factor = gamma_factor(k, a, m)?;
    Ok(factor * TheoryConstants::new(k, DEFAULT_TOL)?.euler2_k)
}
