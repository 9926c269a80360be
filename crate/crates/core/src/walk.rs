//! Type-A walk configurations, the step generator and the visibility test.

use num_integer::Integer;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Tolerance on `sum(probs) == 1`.
pub const PROB_SUM_TOL: f64 = 1e-12;

/// Walks longer than this are refused so coordinates and counters never overflow.
pub const MAX_STEPS: u64 = 1 << 62;

/// Random generator used for walks. ChaCha8 from `rand_chacha` 0.3.1 (pinned
/// exactly in the manifest) so the output is bit-identical across platforms.
pub type StepRng = ChaCha8Rng;

/// Generator for stream `stream` of master seed `seed`.
///
/// The key is derived from `seed` via `SeedableRng::seed_from_u64`; the
/// stream id selects one of the 2^64 disjoint ChaCha streams under that key,
/// so distinct `(seed, stream)` pairs never share a keystream.
pub fn stream_rng(seed: u64, stream: u64) -> StepRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One step law over the `k` axis directions.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaVector {
    probs: Vec<f64>,
}

impl AlphaVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::Config(format!(
                "a step law needs k >= 2 entries, got {}",
                probs.len()
            )));
        }
        if probs.iter().any(|&p| !(p > 0.0 && p < 1.0)) {
            return Err(Error::Config(format!(
                "probabilities must be strictly interior to (0, 1): {probs:?}"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::Config(format!(
                "probabilities must sum to 1, got {sum}"
            )));
        }
        Ok(Self { probs })
    }

    pub fn k(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

/// How the step law is chosen at each step.
#[derive(Debug, Clone, PartialEq)]
pub enum SelectionPolicy {
    /// Independent draw with the given (normalized) weights.
    IidWeighted { weights: Vec<f64> },
    /// Step `i` uses law `(i - 1) mod q`.
    Cyclic,
    /// Step `i` uses law `script[(i - 1) mod script.len()]` (0-based here).
    Scripted { script: Vec<usize> },
}

/// `policy` object of the JSON configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum RawPolicy {
    Iid {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
    Cyclic,
    /// 1-based law indices.
    Scripted {
        script: Vec<usize>,
    },
}

impl Default for RawPolicy {
    fn default() -> Self {
        RawPolicy::Iid { weights: None }
    }
}

/// Walk configuration as read from JSON, before validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawWalkConfig {
    pub k: usize,
    pub alphas: Vec<Vec<f64>>,
    #[serde(default)]
    pub policy: RawPolicy,
    #[serde(default)]
    pub seed: u64,
}

impl RawWalkConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Single-law walk in dimension `k` with uniform directions.
    pub fn uniform(k: usize, seed: u64) -> Self {
        Self {
            k,
            alphas: vec![vec![1.0 / k as f64; k]],
            policy: RawPolicy::default(),
            seed,
        }
    }
}

/// Cumulative thresholds on a raw `u64` draw: outcome `j` is the first with
/// `u < thresholds[j]`, or the last outcome when none matches.
#[derive(Debug, Clone, PartialEq)]
struct Thresholds(Vec<u64>);

impl Thresholds {
    fn new(probs: &[f64]) -> Self {
        let scale = 2f64.powi(64);
        let mut cum = 0.0;
        let cuts = probs[..probs.len() - 1]
            .iter()
            .map(|p| {
                cum += p;
                // f64 -> u64 casts saturate
                (cum * scale) as u64
            })
            .collect();
        Self(cuts)
    }

    #[inline]
    fn pick(&self, u: u64) -> usize {
        self.0.iter().position(|&t| u < t).unwrap_or(self.0.len())
    }
}

/// A validated walk configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkConfig {
    k: usize,
    alphas: Vec<AlphaVector>,
    policy: SelectionPolicy,
    seed: u64,
    directions: Vec<Thresholds>,
    types: Option<Thresholds>,
}

impl WalkConfig {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alphas(&self) -> &[AlphaVector] {
        &self.alphas
    }

    /// Number of step laws `q`.
    pub fn q(&self) -> usize {
        self.alphas.len()
    }

    pub fn policy(&self) -> &SelectionPolicy {
        &self.policy
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// The per-step direction law under an iid policy, `sum_t w_t alpha_t`.
    pub fn mixture(&self) -> Option<Vec<f64>> {
        match &self.policy {
            SelectionPolicy::IidWeighted { weights } => {
                let mut out = vec![0.0; self.k];
                for (w, a) in weights.iter().zip(&self.alphas) {
                    for (o, p) in out.iter_mut().zip(a.probs()) {
                        *o += w * p;
                    }
                }
                Some(out)
            }
            _ => None,
        }
    }

    /// Law index used at step `step` (1-based). Draws from `rng` only for
    /// an iid policy with more than one law.
    #[inline]
    pub fn select_type(&self, step: u64, rng: &mut StepRng) -> usize {
        match &self.policy {
            SelectionPolicy::IidWeighted { .. } => match &self.types {
                Some(t) => t.pick(rng.next_u64()),
                None => 0,
            },
            SelectionPolicy::Cyclic => ((step - 1) % self.alphas.len() as u64) as usize,
            SelectionPolicy::Scripted { script } => {
                script[((step - 1) % script.len() as u64) as usize]
            }
        }
    }

    /// Direction (0-based axis) drawn from law `t`.
    #[inline]
    pub fn sample_direction(&self, t: usize, rng: &mut StepRng) -> usize {
        self.directions[t].pick(rng.next_u64())
    }

    pub fn to_raw(&self) -> RawWalkConfig {
        let policy = match &self.policy {
            SelectionPolicy::IidWeighted { weights } => RawPolicy::Iid {
                weights: Some(weights.clone()),
            },
            SelectionPolicy::Cyclic => RawPolicy::Cyclic,
            SelectionPolicy::Scripted { script } => RawPolicy::Scripted {
                script: script.iter().map(|t| t + 1).collect(),
            },
        };
        RawWalkConfig {
            k: self.k,
            alphas: self.alphas.iter().map(|a| a.probs.clone()).collect(),
            policy,
            seed: self.seed,
        }
    }
}

/// Check every configuration invariant and normalize the policy weights.
pub fn validate_config(raw: RawWalkConfig) -> Result<WalkConfig> {
    let RawWalkConfig {
        k,
        alphas,
        policy,
        seed,
    } = raw;
    if k < 2 {
        return Err(Error::Config(format!(
            "dimension k must be at least 2, got {k}"
        )));
    }
    if alphas.is_empty() {
        return Err(Error::Config("the set of step laws is empty".into()));
    }
    let alphas = alphas
        .into_iter()
        .enumerate()
        .map(|(t, probs)| {
            if probs.len() != k {
                return Err(Error::Config(format!(
                    "dimension mismatch: law {} has {} entries, k = {k}",
                    t + 1,
                    probs.len()
                )));
            }
            AlphaVector::new(probs)
        })
        .collect::<Result<Vec<_>>>()?;
    let q = alphas.len();
    let policy = match policy {
        RawPolicy::Iid { weights } => {
            let weights = weights.unwrap_or_else(|| vec![1.0; q]);
            if weights.len() != q {
                return Err(Error::Config(format!(
                    "{} weights given for {q} step laws",
                    weights.len()
                )));
            }
            if weights.iter().any(|&w| !(w.is_finite() && w > 0.0)) {
                return Err(Error::Config("policy weights must be positive".into()));
            }
            let total: f64 = weights.iter().sum();
            SelectionPolicy::IidWeighted {
                weights: weights.iter().map(|w| w / total).collect(),
            }
        }
        RawPolicy::Cyclic => SelectionPolicy::Cyclic,
        RawPolicy::Scripted { script } => {
            if script.is_empty() {
                return Err(Error::Config(
                    "scripted policy needs a non-empty script".into(),
                ));
            }
            if let Some(bad) = script.iter().find(|&&t| t == 0 || t > q) {
                return Err(Error::Config(format!("script index {bad} outside 1..={q}")));
            }
            SelectionPolicy::Scripted {
                script: script.into_iter().map(|t| t - 1).collect(),
            }
        }
    };
    let directions = alphas.iter().map(|a| Thresholds::new(a.probs())).collect();
    let types = match &policy {
        SelectionPolicy::IidWeighted { weights } if q > 1 => Some(Thresholds::new(weights)),
        _ => None,
    };
    Ok(WalkConfig {
        k,
        alphas,
        policy,
        seed,
        directions,
        types,
    })
}

/// A lattice point reached after `step_index` steps.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position {
    pub coords: Vec<u64>,
    pub step_index: u64,
}

impl Position {
    pub fn origin(k: usize) -> Self {
        Self {
            coords: vec![0; k],
            step_index: 0,
        }
    }
}

/// One step from `pos`: the law is chosen by the policy for step
/// `pos.step_index + 1`, then one coordinate is incremented.
pub fn next_step(pos: &Position, cfg: &WalkConfig, rng: &mut StepRng) -> Result<Position> {
    if pos.coords.len() != cfg.k {
        return Err(Error::Config(format!(
            "position has {} coordinates, k = {}",
            pos.coords.len(),
            cfg.k
        )));
    }
    if pos.step_index >= MAX_STEPS {
        return Err(Error::Range(format!("walk longer than {MAX_STEPS} steps")));
    }
    let step = pos.step_index + 1;
    let t = cfg.select_type(step, rng);
    let j = cfg.sample_direction(t, rng);
    let mut next = pos.clone();
    next.coords[j] += 1;
    next.step_index = step;
    Ok(next)
}

/// gcd of all coordinates, with `gcd(0, n) = n`. The origin is rejected.
pub fn gcd_vec(coords: &[u64]) -> Result<u64> {
    if coords.iter().all(|&c| c == 0) {
        return domain("gcd of the origin is undefined");
    }
    Ok(gcd_fold(coords))
}

#[inline]
fn gcd_fold(coords: &[u64]) -> u64 {
    let mut g = 0u64;
    for &c in coords {
        g = g.gcd(&c);
        if g == 1 {
            break;
        }
    }
    g
}

/// Whether `pos` is visible from the origin, i.e. its coordinates are coprime.
pub fn is_visible(pos: &Position) -> Result<bool> {
    if pos.step_index == 0 {
        return domain("visibility of the origin is undefined");
    }
    Ok(gcd_vec(&pos.coords)? == 1)
}

/// In-place walk generator over one random stream.
#[derive(Debug, Clone)]
pub struct Walker<'a> {
    cfg: &'a WalkConfig,
    rng: StepRng,
    coords: Vec<u64>,
    step: u64,
}

impl<'a> Walker<'a> {
    /// Walker on stream `stream` of the configuration's seed.
    pub fn new(cfg: &'a WalkConfig, stream: u64) -> Self {
        Self {
            cfg,
            rng: stream_rng(cfg.seed, stream),
            coords: vec![0; cfg.k],
            step: 0,
        }
    }

    /// Advance one step and return the axis that moved.
    #[inline]
    pub fn advance(&mut self) -> usize {
        assert!(self.step < MAX_STEPS, "walk longer than {MAX_STEPS} steps");
        self.step += 1;
        let t = self.cfg.select_type(self.step, &mut self.rng);
        let j = self.cfg.sample_direction(t, &mut self.rng);
        self.coords[j] += 1;
        j
    }

    /// Advance one step and report whether the new point is visible.
    #[inline]
    pub fn advance_visible(&mut self) -> bool {
        self.advance();
        gcd_fold(&self.coords) == 1
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn step_index(&self) -> u64 {
        self.step
    }

    pub fn position(&self) -> Position {
        Position {
            coords: self.coords.clone(),
            step_index: self.step,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{any, prop, prop_assert, prop_assert_eq, proptest, Strategy};

    fn cfg(alphas: Vec<Vec<f64>>, policy: RawPolicy) -> Result<WalkConfig> {
        validate_config(RawWalkConfig {
            k: alphas[0].len(),
            alphas,
            policy,
            seed: 7,
        })
    }

    #[test]
    fn validate_examples() {
        assert!(validate_config(RawWalkConfig::uniform(2, 0)).is_ok());
        let err = cfg(vec![vec![1.0, 0.0]], RawPolicy::default()).unwrap_err();
        assert!(err.to_string().contains("strictly interior"), "{err}");
        let empty = RawWalkConfig {
            k: 2,
            alphas: vec![],
            policy: RawPolicy::default(),
            seed: 0,
        };
        assert!(matches!(validate_config(empty), Err(Error::Config(_))));
    }

    #[test]
    fn validate_rejects_bad_inputs() {
        let mismatch = RawWalkConfig {
            k: 3,
            alphas: vec![vec![0.5, 0.5]],
            policy: RawPolicy::default(),
            seed: 0,
        };
        assert!(validate_config(mismatch)
            .unwrap_err()
            .to_string()
            .contains("mismatch"));
        assert!(cfg(vec![vec![0.5, 0.6]], RawPolicy::default()).is_err());
        let two = vec![vec![0.2, 0.8], vec![0.7, 0.3]];
        assert!(cfg(
            two.clone(),
            RawPolicy::Iid {
                weights: Some(vec![1.0])
            }
        )
        .is_err());
        assert!(cfg(
            two.clone(),
            RawPolicy::Iid {
                weights: Some(vec![1.0, 0.0])
            }
        )
        .is_err());
        assert!(cfg(two.clone(), RawPolicy::Scripted { script: vec![1, 3] }).is_err());
        assert!(cfg(two.clone(), RawPolicy::Scripted { script: vec![0] }).is_err());
        assert!(cfg(two.clone(), RawPolicy::Scripted { script: vec![] }).is_err());
        let mut one_d = RawWalkConfig::uniform(2, 0);
        one_d.k = 1;
        assert!(validate_config(one_d).is_err());
    }

    #[test]
    fn weights_are_normalized() {
        let c = cfg(
            vec![vec![0.2, 0.8], vec![0.7, 0.3]],
            RawPolicy::Iid {
                weights: Some(vec![1.0, 3.0]),
            },
        )
        .unwrap();
        assert_eq!(
            c.policy(),
            &SelectionPolicy::IidWeighted {
                weights: vec![0.25, 0.75]
            }
        );
        let mix = c.mixture().unwrap();
        assert!((mix[0] - (0.25 * 0.2 + 0.75 * 0.7)).abs() < 1e-15);
    }

    #[test]
    fn json_schema_round_trip() {
        let text = r#"{"k": 2, "alphas": [[0.2, 0.8], [0.7, 0.3]],
                       "policy": {"type": "scripted", "script": [1, 2, 2]}, "seed": 42}"#;
        let raw = RawWalkConfig::from_json(text).unwrap();
        let c = validate_config(raw.clone()).unwrap();
        assert_eq!(
            c.policy(),
            &SelectionPolicy::Scripted {
                script: vec![0, 1, 1]
            }
        );
        assert_eq!(c.to_raw(), raw);
        let iid = RawWalkConfig::from_json(
            r#"{"k":3,"alphas":[[0.2,0.3,0.5]],"policy":{"type":"iid"},"seed":1}"#,
        )
        .unwrap();
        assert_eq!(iid.policy, RawPolicy::Iid { weights: None });
        assert!(RawWalkConfig::from_json(r#"{"k":2,"alphas":[[0.5,0.5]],"sed":1}"#).is_err());
    }

    #[test]
    fn first_step_is_a_unit_vector() {
        let c = validate_config(RawWalkConfig::uniform(4, 3)).unwrap();
        let mut rng = stream_rng(3, 0);
        let p = next_step(&Position::origin(4), &c, &mut rng).unwrap();
        assert_eq!(p.step_index, 1);
        assert_eq!(p.coords.iter().sum::<u64>(), 1);
        assert_eq!(p.coords.iter().filter(|&&c| c == 1).count(), 1);
        assert!(is_visible(&p).unwrap());
    }

    #[test]
    fn direction_frequency_is_fair() {
        let c = validate_config(RawWalkConfig::uniform(2, 11)).unwrap();
        let mut w = Walker::new(&c, 0);
        let n = 1_000_000;
        let ones = (0..n).filter(|_| w.advance() == 0).count();
        // stderr = 0.0005; the band is four of those
        assert!((ones as f64 / n as f64 - 0.5).abs() < 0.002);
    }

    #[test]
    fn scripted_policy_follows_script() {
        let c = cfg(
            vec![vec![0.2, 0.8], vec![0.7, 0.3]],
            RawPolicy::Scripted {
                script: vec![1, 2, 1],
            },
        )
        .unwrap();
        let mut rng = stream_rng(0, 0);
        let picks: Vec<usize> = (1..=7).map(|i| c.select_type(i, &mut rng)).collect();
        assert_eq!(picks, vec![0, 1, 0, 0, 1, 0, 0]);
        // Step 2 samples from law 2 exactly: same draw, same direction.
        let mut a = stream_rng(5, 9);
        let mut b = stream_rng(5, 9);
        let p1 = next_step(&Position::origin(2), &c, &mut a).unwrap();
        let _ = b.next_u64();
        let p2 = next_step(&p1, &c, &mut a).unwrap();
        let want = c.sample_direction(1, &mut b);
        assert_eq!(p2.coords[want], p1.coords[want] + 1);
    }

    #[test]
    fn cyclic_policy_rotates() {
        let c = cfg(
            vec![vec![0.2, 0.8], vec![0.7, 0.3], vec![0.5, 0.5]],
            RawPolicy::Cyclic,
        )
        .unwrap();
        let mut rng = stream_rng(0, 0);
        let picks: Vec<usize> = (1..=6).map(|i| c.select_type(i, &mut rng)).collect();
        assert_eq!(picks, vec![0, 1, 2, 0, 1, 2]);
    }

    #[test]
    fn thresholds_partition_draws() {
        let t = Thresholds::new(&[0.25, 0.25, 0.5]);
        assert_eq!(t.pick(0), 0);
        assert_eq!(t.pick(1 << 62), 1);
        assert_eq!(t.pick((1 << 63) - 1), 1);
        assert_eq!(t.pick(1 << 63), 2);
        assert_eq!(t.pick(u64::MAX), 2);
    }

    #[test]
    fn gcd_and_visibility() {
        assert_eq!(gcd_vec(&[3, 4]).unwrap(), 1);
        assert_eq!(gcd_vec(&[2, 4]).unwrap(), 2);
        assert_eq!(gcd_vec(&[0, 7, 0]).unwrap(), 7);
        assert_eq!(gcd_vec(&[0, 1, 0]).unwrap(), 1);
        assert!(gcd_vec(&[0, 0]).is_err());
        let pos = |coords: Vec<u64>| Position {
            step_index: coords.iter().sum(),
            coords,
        };
        assert!(is_visible(&pos(vec![3, 4])).unwrap());
        assert!(!is_visible(&pos(vec![2, 4])).unwrap());
        assert!(!is_visible(&pos(vec![0, 7, 0])).unwrap());
        assert!(is_visible(&pos(vec![0, 1, 0])).unwrap());
        assert!(is_visible(&Position::origin(2)).is_err());
    }

    #[test]
    fn streams_differ_and_repeat() {
        let mut a = stream_rng(1, 0);
        let mut b = stream_rng(1, 1);
        let mut c = stream_rng(1, 0);
        let xa: Vec<u64> = (0..8).map(|_| a.next_u64()).collect();
        let xb: Vec<u64> = (0..8).map(|_| b.next_u64()).collect();
        let xc: Vec<u64> = (0..8).map(|_| c.next_u64()).collect();
        assert_ne!(xa, xb);
        assert_eq!(xa, xc);
    }

    #[test]
    fn walker_matches_next_step() {
        let c = cfg(
            vec![vec![0.2, 0.3, 0.5], vec![0.6, 0.2, 0.2]],
            RawPolicy::Iid {
                weights: Some(vec![2.0, 1.0]),
            },
        )
        .unwrap();
        let mut w = Walker::new(&c, 4);
        let mut rng = stream_rng(c.seed(), 4);
        let mut p = Position::origin(3);
        for _ in 0..500 {
            w.advance();
            p = next_step(&p, &c, &mut rng).unwrap();
            assert_eq!(w.position(), p);
        }
    }

    fn arb_config() -> impl Strategy<Value = WalkConfig> {
        (2usize..=4, 1usize..=3, 0u8..3, any::<u64>()).prop_flat_map(|(k, q, pol, seed)| {
            prop::collection::vec(prop::collection::vec(1u32..20, k), q).prop_map(move |ws| {
                let alphas = ws
                    .iter()
                    .map(|w| {
                        let s: u32 = w.iter().sum();
                        w.iter().map(|&x| f64::from(x) / f64::from(s)).collect()
                    })
                    .collect();
                let policy = match pol {
                    0 => RawPolicy::Iid { weights: None },
                    1 => RawPolicy::Cyclic,
                    _ => RawPolicy::Scripted {
                        script: (0..5).map(|i| i % q + 1).collect(),
                    },
                };
                validate_config(RawWalkConfig {
                    k,
                    alphas,
                    policy,
                    seed,
                })
                .unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn walk_invariants(c in arb_config(), stream in 0u64..100) {
            let mut w = Walker::new(&c, stream);
            let mut prev = w.coords().to_vec();
            prop_assert!(w.advance_visible(), "X_1 must be 1");
            for i in 1..=300u64 {
                if i > 1 {
                    w.advance();
                }
                prop_assert_eq!(w.coords().iter().sum::<u64>(), i);
                prop_assert!(w.coords().iter().zip(&prev).all(|(a, b)| a >= b));
                prev = w.coords().to_vec();
            }
        }

        #[test]
        fn walks_are_deterministic(c in arb_config(), stream in 0u64..100) {
            let mut a = Walker::new(&c, stream);
            let mut b = Walker::new(&c, stream);
            for _ in 0..200 {
                prop_assert_eq!(a.advance(), b.advance());
            }
        }
    }
}
