use super::closed_form::{delta_factor, gamma_factor};
use super::sieve::primes_up_to;
use super::KahanSum;
use crate::error::{domain, Error, Result};

/// Default absolute tolerance for theory constants.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Longest direct series the zeta evaluator will sum.
const MAX_ZETA_TERMS: f64 = 1e8;

/// A value together with a guaranteed bound on its absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error_bound: f64,
}

impl Estimate {
    pub fn contains(&self, x: f64) -> bool {
        (self.value - x).abs() <= self.error_bound
    }
}

fn check_args(k: u32, tol: f64) -> Result<()> {
    if k < 2 {
        return domain(format!("k must be at least 2, got {k}"));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return domain(format!("tolerance must lie in (0, 1), got {tol}"));
    }
    Ok(())
}

/// Relative rounding slack for a sum of positive terms each computed by
/// `powi` (binary exponentiation, about `log2 k` roundings per term).
fn powi_slack(k: u32) -> f64 {
    4.0 * (f64::from(k).log2() + 4.0) * f64::EPSILON
}

/// Relative error of `exp(sum of ln_1p terms)`: every term carries a few
/// relative roundings, the compensated sum adds O(eps), and `exp` one more.
fn log_rounding(k: u32, log_sum: f64) -> f64 {
    powi_slack(k) * log_sum.abs() + 4.0 * f64::EPSILON
}

/// `zeta(k)` by the direct series `sum_{d <= D} d^-k`, closed with the
/// midpoint of the integral enclosure
/// `(D+1)^{1-k}/(k-1) <= sum_{d > D} d^-k <= D^{1-k}/(k-1)`.
pub fn zeta(k: u32, tol: f64) -> Result<Estimate> {
    check_args(k, tol)?;
    let kf = f64::from(k);
    // Half the enclosure width is below D^-k / 2.
    let terms = tol.powf(-1.0 / kf).ceil().max(1.0);
    if terms > MAX_ZETA_TERMS {
        return Err(Error::Budget(format!(
            "zeta({k}) to within {tol:e} needs {terms:e} terms"
        )));
    }
    let terms = terms as u64;
    let mut acc = KahanSum::new();
    let exp = -(k as i32);
    for d in (1..=terms).rev() {
        acc.add((d as f64).powi(exp));
    }
    let dd = terms as f64;
    let tail_hi = dd.powf(1.0 - kf) / (kf - 1.0);
    let tail_lo = (dd + 1.0).powf(1.0 - kf) / (kf - 1.0);
    acc.add(0.5 * (tail_hi + tail_lo));
    let value = acc.value();
    let error_bound = 0.5 * (tail_hi - tail_lo) + powi_slack(k) * value;
    if error_bound > tol {
        return Err(Error::Budget(format!(
            "tolerance {tol:e} is below the rounding floor {error_bound:e}"
        )));
    }
    Ok(Estimate { value, error_bound })
}

/// `prod_p (1 - 2/p^k)` to within `tol`.
///
/// Evaluated as `zeta(k)^-2 * prod_p (1 - 1/(p^k - 1)^2)`: each factor of
/// the original product equals `(1 - p^-k)^2 (1 - 1/(p^k - 1)^2)`, and the
/// second product has a tail below `4 P^{1-2k} / (2k - 1)`, so a few
/// thousand primes suffice. [`euler_product_two_direct`] is the plain
/// truncated product and serves as an independent check.
pub fn euler_product_two(k: u32, tol: f64) -> Result<Estimate> {
    check_args(k, tol)?;
    let z = zeta(k, tol / 8.0)?;

    let kf = f64::from(k);
    let want_tail = tol / 2.0;
    let limit = ((4.0 / ((2.0 * kf - 1.0) * want_tail)).powf(1.0 / (2.0 * kf - 1.0)))
        .ceil()
        .max(2.0) as u64;
    let primes = primes_up_to(limit)?;
    let exp = k as i32;
    let logs: KahanSum = primes
        .iter()
        .map(|&p| {
            let inv = 1.0 / ((p as f64).powi(exp) - 1.0);
            (-(inv * inv)).ln_1p()
        })
        .collect();
    let log_sum = logs.value();
    let truncated = log_sum.exp();
    let tail = (4.0 * (limit as f64).powf(1.0 - 2.0 * kf) / (2.0 * kf - 1.0)).min(1.0);
    let corr = truncated * (1.0 - 0.5 * tail);
    let corr_err = truncated * 0.5 * tail + log_rounding(k, log_sum) * truncated;

    let zmin = (z.value - z.error_bound).max(1.0);
    let zmax = z.value + z.error_bound;
    let value = corr / (z.value * z.value);
    let error_bound = corr_err / (zmin * zmin)
        + (corr + corr_err) * z.error_bound * 2.0 * zmax / zmin.powi(4)
        + 4.0 * f64::EPSILON * value;
    if error_bound > tol {
        return Err(Error::Budget(format!(
            "Euler product to within {tol:e} not attained (bound {error_bound:e})"
        )));
    }
    Ok(Estimate { value, error_bound })
}

/// Plain truncated product `prod_{p <= prime_limit} (1 - 2/p^k)` with the
/// tail enclosure `1 - 2 P^{1-k}/(k-1) <= prod_{p > P} (1 - 2/p^k) <= 1`.
pub fn euler_product_two_direct(k: u32, prime_limit: u64) -> Result<Estimate> {
    if k < 2 {
        return domain(format!("k must be at least 2, got {k}"));
    }
    if prime_limit < 2 {
        return domain("prime limit must be at least 2");
    }
    let kf = f64::from(k);
    let exp = k as i32;
    let primes = primes_up_to(prime_limit)?;
    let logs: KahanSum = primes
        .iter()
        .map(|&p| (-2.0 * (p as f64).powi(-exp)).ln_1p())
        .collect();
    let log_sum = logs.value();
    let truncated = log_sum.exp();
    let tail = (2.0 * (prime_limit as f64).powf(1.0 - kf) / (kf - 1.0)).min(1.0);
    let value = truncated * (1.0 - 0.5 * tail);
    let error_bound = truncated * 0.5 * tail + log_rounding(k, log_sum) * truncated;
    Ok(Estimate { value, error_bound })
}

/// The two limiting constants for dimension `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryConstants {
    pub k: u32,
    /// `1/zeta(k)`: limit of the proportion of visible steps.
    pub inv_zeta_k: f64,
    /// `prod_p (1 - 2/p^k)`: limit of the proportion of consecutive visible pairs.
    pub euler2_k: f64,
    /// Guaranteed absolute error bound of both values.
    pub tolerance: f64,
}

impl TheoryConstants {
    pub fn new(k: u32, tol: f64) -> Result<Self> {
        let z = zeta(k, tol / 2.0)?;
        let zmin = (z.value - z.error_bound).max(1.0);
        let inv_zeta_k = 1.0 / z.value;
        let inv_err = z.error_bound / (zmin * zmin) + 2.0 * f64::EPSILON * inv_zeta_k;
        let e2 = euler_product_two(k, tol)?;
        Ok(Self {
            k,
            inv_zeta_k,
            euler2_k: e2.value,
            tolerance: inv_err.max(e2.error_bound),
        })
    }

    pub fn with_default_tol(k: u32) -> Result<Self> {
        Self::new(k, DEFAULT_TOL)
    }

    /// Limit of the proportion of visible steps `i ≡ a (mod m)`.
    pub fn delta(&self, a: u64, m: u64) -> Result<f64> {
        Ok(delta_factor(self.k, a, m)? * self.inv_zeta_k)
    }

    /// Limit of the proportion of consecutive visible pairs `(i, i+1)` with `i ≡ a (mod m)`.
    pub fn gamma(&self, a: u64, m: u64) -> Result<f64> {
        Ok(gamma_factor(self.k, a, m)? * self.euler2_k)
    }
}
