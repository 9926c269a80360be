//! Exact small-scale laws of a walk, in rational arithmetic.
//!
//! The congruence mass `L` (probability that the direction counts of the
//! first `k-1` axes hit a residue vector `g` modulo `d`) is available two
//! ways: [`l_dp`], an exact dynamic program over residue states, and
//! [`l_charsum`], the additive-character expansion evaluated in complex
//! floating point. They share no code beyond input validation.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::mc::loglog_slope;
use crate::walk::{gcd_vec, SelectionPolicy, WalkConfig};

/// Largest state count the residue dynamic program may allocate.
pub const MAX_RESIDUE_STATES: u64 = 100_000;

/// Longest schedule accepted by [`l_dp`] and [`l_charsum`].
pub const MAX_L_STEPS: u64 = 400;

/// Default length cap for exact distributions in dimension `k`; keeps the
/// support (`C(n+k-1, k-1)` points) and the denominators small.
pub fn default_step_cap(k: usize) -> u64 {
    match k {
        2 => 40,
        3 => 25,
        4 => 16,
        _ => 10,
    }
}

/// Best rational approximation of `x` by continued fractions, stopping at
/// relative error `1e-12` or a denominator above `10^12`.
pub fn rational_from_f64(x: f64) -> Result<BigRational> {
    if !x.is_finite() {
        return domain(format!("{x} is not a finite number"));
    }
    let sign = if x < 0.0 { -1i128 } else { 1 };
    let target = x.abs();
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut rest = target;
    loop {
        let a = rest.floor();
        if a > 1e15 {
            break;
        }
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > 1_000_000_000_000 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let approx = h1 as f64 / k1 as f64;
        let frac = rest - a;
        if (approx - target).abs() <= 1e-12 * target.max(1e-300) || frac == 0.0 {
            break;
        }
        rest = 1.0 / frac;
    }
    if k1 == 0 {
        return domain(format!("cannot represent {x} as a rational"));
    }
    Ok(BigRational::new(BigInt::from(sign * h1), BigInt::from(k1)))
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `"num/den"`, or just `"num"` for integers.
pub fn rational_to_string(r: &BigRational) -> String {
    r.to_string()
}

/// A step law with exact rational entries in `(0, 1)` summing to exactly 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalAlpha(Vec<BigRational>);

impl RationalAlpha {
    pub fn new(probs: Vec<BigRational>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::Config("a step law needs k >= 2 entries".into()));
        }
        let zero = BigRational::zero();
        let one = BigRational::one();
        if probs.iter().any(|p| *p <= zero || *p >= one) {
            return Err(Error::Config(
                "probabilities must be strictly interior to (0, 1)".into(),
            ));
        }
        let sum: BigRational = probs.iter().cloned().sum();
        if sum != one {
            return Err(Error::Config(format!("probabilities sum to {sum}, not 1")));
        }
        Ok(Self(probs))
    }

    /// From small integer ratios, e.g. `[1, 2]` for `(1/3, 2/3)`.
    pub fn from_ratios(num: &[i64], den: i64) -> Result<Self> {
        Self::new(
            num.iter()
                .map(|&n| BigRational::new(n.into(), den.into()))
                .collect(),
        )
    }

    /// Rationalize floating probabilities. The last entry is set to one
    /// minus the others so the sum is exact.
    pub fn from_f64s(probs: &[f64]) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::Config("a step law needs k >= 2 entries".into()));
        }
        let mut out = probs[..probs.len() - 1]
            .iter()
            .map(|&p| rational_from_f64(p))
            .collect::<Result<Vec<_>>>()?;
        let head: BigRational = out.iter().cloned().sum();
        out.push(BigRational::one() - head);
        Self::new(out)
    }

    pub fn uniform(k: usize) -> Result<Self> {
        Self::new(vec![BigRational::new(1.into(), (k as i64).into()); k])
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn probs(&self) -> &[BigRational] {
        &self.0
    }

    pub fn to_f64s(&self) -> Vec<f64> {
        self.0.iter().map(rational_to_f64).collect()
    }
}

/// Per-step laws `beta^(1), ..., beta^(n)`, stored as indices into a law table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepSchedule {
    laws: Vec<RationalAlpha>,
    sequence: Vec<usize>,
}

impl StepSchedule {
    pub fn new(laws: Vec<RationalAlpha>, sequence: Vec<usize>) -> Result<Self> {
        let k = laws
            .first()
            .map(RationalAlpha::k)
            .ok_or_else(|| Error::Config("no step laws".into()))?;
        if laws.iter().any(|l| l.k() != k) {
            return Err(Error::Config("step laws disagree on k".into()));
        }
        if let Some(bad) = sequence.iter().find(|&&t| t >= laws.len()) {
            return Err(Error::Config(format!("law index {bad} out of range")));
        }
        Ok(Self { laws, sequence })
    }

    /// The same law at every one of `n` steps.
    pub fn repeated(law: RationalAlpha, n: usize) -> Self {
        Self {
            laws: vec![law],
            sequence: vec![0; n],
        }
    }

    /// Law of the first `n` steps of a walk: the mixture repeated for an iid
    /// policy, the literal per-step law otherwise.
    pub fn from_config(cfg: &WalkConfig, n: usize) -> Result<Self> {
        let laws = cfg
            .alphas()
            .iter()
            .map(|a| RationalAlpha::from_f64s(a.probs()))
            .collect::<Result<Vec<_>>>()?;
        match cfg.policy() {
            SelectionPolicy::IidWeighted { weights } => {
                let ws = if weights.len() == 1 {
                    vec![BigRational::one()]
                } else {
                    RationalAlpha::from_f64s(weights)?.0
                };
                let mut mix = vec![BigRational::zero(); cfg.k()];
                for (w, law) in ws.iter().zip(&laws) {
                    for (m, p) in mix.iter_mut().zip(law.probs()) {
                        *m += w * p;
                    }
                }
                Ok(Self::repeated(RationalAlpha::new(mix)?, n))
            }
            SelectionPolicy::Cyclic => {
                let q = laws.len();
                Self::new(laws, (0..n).map(|i| i % q).collect())
            }
            SelectionPolicy::Scripted { script } => {
                let seq = (0..n).map(|i| script[i % script.len()]).collect();
                Self::new(laws, seq)
            }
        }
    }

    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }

    pub fn k(&self) -> usize {
        self.laws[0].k()
    }

    pub fn laws(&self) -> &[RationalAlpha] {
        &self.laws
    }

    pub fn sequence(&self) -> &[usize] {
        &self.sequence
    }

    /// Law of step `i` (0-based).
    pub fn step(&self, i: usize) -> &RationalAlpha {
        &self.laws[self.sequence[i]]
    }

    pub fn prefix(&self, n: usize) -> Self {
        Self {
            laws: self.laws.clone(),
            sequence: self.sequence[..n.min(self.len())].to_vec(),
        }
    }

    /// How many steps use each law.
    pub fn type_counts(&self) -> Vec<u64> {
        let mut out = vec![0u64; self.laws.len()];
        for &t in &self.sequence {
            out[t] += 1;
        }
        out
    }
}

/// Exact law of the position after `n` steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactDist {
    pub n: usize,
    pub k: usize,
    pub entries: BTreeMap<Vec<u64>, BigRational>,
}

impl ExactDist {
    pub fn total(&self) -> BigRational {
        self.entries.values().cloned().sum()
    }

    pub fn get(&self, coords: &[u64]) -> BigRational {
        self.entries
            .get(coords)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }
}

pub fn exact_distribution(sched: &StepSchedule) -> Result<ExactDist> {
    exact_distribution_capped(sched, default_step_cap(sched.k()))
}

/// Law of `p_n` by stepwise convolution, refusing schedules longer than `cap`.
pub fn exact_distribution_capped(sched: &StepSchedule, cap: u64) -> Result<ExactDist> {
    let n = sched.len();
    if n as u64 > cap {
        return Err(Error::Budget(format!(
            "exact law of {n} steps exceeds the cap of {cap} for k = {}",
            sched.k()
        )));
    }
    let k = sched.k();
    let mut cur: BTreeMap<Vec<u64>, BigRational> = BTreeMap::new();
    cur.insert(vec![0; k], BigRational::one());
    for i in 0..n {
        let law = sched.step(i);
        let mut next: BTreeMap<Vec<u64>, BigRational> = BTreeMap::new();
        for (pos, mass) in &cur {
            for (j, p) in law.probs().iter().enumerate() {
                let mut to = pos.clone();
                to[j] += 1;
                *next.entry(to).or_insert_with(BigRational::zero) += mass * p;
            }
        }
        cur = next;
    }
    Ok(ExactDist { n, k, entries: cur })
}

fn coprime(coords: &[u64]) -> bool {
    gcd_vec(coords).map(|g| g == 1).unwrap_or(false)
}

/// `P(p_n visible)` for the `n = sched.len() >= 1` steps of the schedule.
pub fn exact_visible_prob(sched: &StepSchedule) -> Result<BigRational> {
    if sched.is_empty() {
        return domain("visibility needs at least one step");
    }
    let dist = exact_distribution(sched)?;
    Ok(dist
        .entries
        .iter()
        .filter(|(pos, _)| coprime(pos))
        .map(|(_, m)| m.clone())
        .sum())
}

/// `P(p_n and p_{n+1} visible)` for a schedule of `n + 1 >= 2` steps.
pub fn exact_pair_prob(sched: &StepSchedule) -> Result<BigRational> {
    if sched.len() < 2 {
        return domain("a pair needs a schedule of at least two steps");
    }
    let n = sched.len() - 1;
    let dist = exact_distribution(&sched.prefix(n))?;
    let last = sched.step(n);
    let mut total = BigRational::zero();
    for (pos, mass) in dist.entries.iter().filter(|(pos, _)| coprime(pos)) {
        let mut to = pos.clone();
        for (j, p) in last.probs().iter().enumerate() {
            to[j] += 1;
            if coprime(&to) {
                total += mass * p;
            }
            to[j] -= 1;
        }
    }
    Ok(total)
}

fn check_l_inputs(i_counts: &[u64], k: usize, q: usize, d: u64, g: Option<&[u64]>) -> Result<u64> {
    if q == 0 || i_counts.len() != q {
        return Err(Error::Config(format!(
            "{} step counts for {q} laws",
            i_counts.len()
        )));
    }
    if d == 0 {
        return domain("modulus d must be at least 1");
    }
    let n: u64 = i_counts.iter().sum();
    if n > MAX_L_STEPS {
        return Err(Error::Budget(format!(
            "{n} steps exceed the cap {MAX_L_STEPS}"
        )));
    }
    let states = (d as u128).pow(k as u32 - 1);
    if states > MAX_RESIDUE_STATES as u128 {
        return Err(Error::Budget(format!("{states} residue states")));
    }
    if let Some(g) = g {
        if g.len() != k - 1 {
            return domain(format!(
                "residue vector needs {} entries, got {}",
                k - 1,
                g.len()
            ));
        }
        if let Some(bad) = g.iter().find(|&&x| x >= d) {
            return domain(format!("residue {bad} out of range for d = {d}"));
        }
    }
    Ok(states as u64)
}

fn law_dims(alphas: &[RationalAlpha]) -> Result<usize> {
    let k = alphas
        .first()
        .map(RationalAlpha::k)
        .ok_or_else(|| Error::Config("no step laws".into()))?;
    if alphas.iter().any(|a| a.k() != k) {
        return Err(Error::Config("step laws disagree on k".into()));
    }
    Ok(k)
}

/// Index of residue vector `g` (axis 1 least significant).
fn state_index(g: &[u64], d: u64) -> usize {
    g.iter().rev().fold(0u64, |acc, &x| acc * d + x) as usize
}

/// Law of the residues `(s^(1), ..., s^(k-1)) mod d` after `i_counts[t]`
/// steps of each law `t`, indexed as by [`state_index`].
pub fn residue_distribution(
    i_counts: &[u64],
    alphas: &[RationalAlpha],
    d: u64,
) -> Result<Vec<BigRational>> {
    let k = law_dims(alphas)?;
    let states = check_l_inputs(i_counts, k, alphas.len(), d, None)? as usize;
    // Moving along axis a < k-1 adds d^a to the index, wrapping that digit.
    let strides: Vec<usize> = (0..k - 1).map(|a| (d as usize).pow(a as u32)).collect();
    let mut cur = vec![BigRational::zero(); states];
    cur[0] = BigRational::one();
    for (law, &steps) in alphas.iter().zip(i_counts) {
        for _ in 0..steps {
            let mut next = vec![BigRational::zero(); states];
            for (s, mass) in cur.iter().enumerate() {
                if mass.is_zero() {
                    continue;
                }
                for (a, &stride) in strides.iter().enumerate() {
                    let digit = (s / stride) % d as usize;
                    let to = if digit + 1 == d as usize {
                        s - digit * stride
                    } else {
                        s + stride
                    };
                    next[to] += mass * &law.probs()[a];
                }
                next[s] += mass * &law.probs()[k - 1];
            }
            cur = next;
        }
    }
    Ok(cur)
}

/// Exact probability that the first `k-1` direction counts are congruent to
/// `g` modulo `d`, by dynamic programming over residue states.
pub fn l_dp(i_counts: &[u64], alphas: &[RationalAlpha], d: u64, g: &[u64]) -> Result<BigRational> {
    let k = law_dims(alphas)?;
    check_l_inputs(i_counts, k, alphas.len(), d, Some(g))?;
    let dist = residue_distribution(i_counts, alphas, d)?;
    Ok(dist[state_index(g, d)].clone())
}

/// Character-sum evaluation of the congruence mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharSum {
    pub value: f64,
    /// Imaginary residue; zero up to rounding.
    pub imag: f64,
}

/// `d^{-(k-1)} sum_h prod_a e(-h_a g_a / d) prod_t (sum_{a<k} alpha_{t,a} e(h_a/d) + alpha_{t,k})^{i_t}`
/// over all `h in [0, d)^{k-1}`, with `e(x) = exp(2 pi i x)`.
pub fn l_charsum(i_counts: &[u64], alphas: &[RationalAlpha], d: u64, g: &[u64]) -> Result<CharSum> {
    let k = law_dims(alphas)?;
    let states = check_l_inputs(i_counts, k, alphas.len(), d, Some(g))?;
    let probs: Vec<Vec<f64>> = alphas.iter().map(RationalAlpha::to_f64s).collect();
    let e =
        |num: u64| Complex64::from_polar(1.0, std::f64::consts::TAU * (num % d) as f64 / d as f64);
    let mut h = vec![0u64; k - 1];
    let mut sum = Complex64::new(0.0, 0.0);
    for _ in 0..states {
        let mut term = Complex64::new(1.0, 0.0);
        for (ha, ga) in h.iter().zip(g) {
            // e(-h g / d) = e((d - h g mod d) / d)
            term *= e(d - (ha * ga) % d);
        }
        for (p, &steps) in probs.iter().zip(i_counts) {
            let mut base = Complex64::new(p[k - 1], 0.0);
            for (a, &ha) in h.iter().enumerate() {
                base += p[a] * e(ha);
            }
            term *= base.powu(steps as u32);
        }
        sum += term;
        // next h, axis 1 fastest
        for digit in h.iter_mut() {
            *digit += 1;
            if *digit < d {
                break;
            }
            *digit = 0;
        }
    }
    let scale = 1.0 / states as f64;
    Ok(CharSum {
        value: sum.re * scale,
        imag: sum.im * scale,
    })
}

/// Split `n` steps as evenly as possible over `q` laws, extra steps first.
pub fn even_split(n: u64, q: usize) -> Vec<u64> {
    let q64 = q as u64;
    (0..q64).map(|t| n / q64 + u64::from(t < n % q64)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct L24Row {
    pub n: u64,
    /// `max_g |L - d^{-(k-1)}|`.
    pub max_deviation: f64,
    /// Whether the masses over all residue vectors sum to exactly 1.
    pub total_is_one: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct L24Table {
    pub d: u64,
    pub k: usize,
    pub rows: Vec<L24Row>,
    /// Log-log slope of the deviation against `n` (three or more positive points).
    pub decay_slope: Option<f64>,
}

/// Deviation of the congruence mass from `d^{-(k-1)}` along `n_grid`, with
/// the `n` steps split evenly across the laws.
pub fn lemma24_convergence(d: u64, alphas: &[RationalAlpha], n_grid: &[u64]) -> Result<L24Table> {
    let k = law_dims(alphas)?;
    if n_grid.is_empty() {
        return domain("empty n grid");
    }
    if n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return domain("n grid must be strictly ascending");
    }
    let main = BigRational::new(BigInt::one(), BigInt::from(d).pow(k as u32 - 1));
    let rows = n_grid
        .iter()
        .map(|&n| {
            let dist = residue_distribution(&even_split(n, alphas.len()), alphas, d)?;
            let total: BigRational = dist.iter().cloned().sum();
            let max_dev = dist
                .iter()
                .map(|m| (m - &main).abs())
                .max()
                .expect("at least one residue state");
            Ok(L24Row {
                n,
                max_deviation: rational_to_f64(&max_dev),
                total_is_one: total.is_one(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.max_deviation)).collect();
    Ok(L24Table {
        d,
        k,
        decay_slope: loglog_slope(&pts),
        rows,
    })
}
