//! Exact visibility counters and the reports built from them.
//!
//! `X_i = 1` when the `i`-th point of the walk is visible. The counters
//! hold `sum X_i` and `sum X_i X_{i+1}`, in total and split by the residue
//! of `i` modulo `m`; a consecutive pair is bucketed by its first index.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numtheory::TheoryConstants;

/// Plain counter set. Adding two of them pools independent walks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub m: u64,
    pub steps_total: u64,
    pub visible_total: u64,
    pub visible_by_residue: Vec<u64>,
    pub pair_total: u64,
    pub pair_by_residue: Vec<u64>,
}

fn add_to(slot: &mut u64, by: u64, what: &'static str) -> Result<()> {
    *slot = slot.checked_add(by).ok_or(Error::Overflow(what))?;
    Ok(())
}

impl Counts {
    pub fn new(m: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::Domain("modulus must be at least 1".into()));
        }
        Ok(Self {
            m,
            steps_total: 0,
            visible_total: 0,
            visible_by_residue: vec![0; m as usize],
            pair_total: 0,
            pair_by_residue: vec![0; m as usize],
        })
    }

    /// Componentwise sum.
    pub fn add(&mut self, other: &Counts) -> Result<()> {
        if self.m != other.m {
            return Err(Error::ModulusMismatch(self.m, other.m));
        }
        add_to(&mut self.steps_total, other.steps_total, "steps_total")?;
        add_to(
            &mut self.visible_total,
            other.visible_total,
            "visible_total",
        )?;
        add_to(&mut self.pair_total, other.pair_total, "pair_total")?;
        for (a, b) in self
            .visible_by_residue
            .iter_mut()
            .zip(&other.visible_by_residue)
        {
            add_to(a, *b, "visible_by_residue")?;
        }
        for (a, b) in self.pair_by_residue.iter_mut().zip(&other.pair_by_residue) {
            add_to(a, *b, "pair_by_residue")?;
        }
        Ok(())
    }

    /// The same counts bucketed modulo a divisor of `m`.
    pub fn fold_modulus(&self, divisor: u64) -> Result<Counts> {
        if divisor == 0 || !self.m.is_multiple_of(divisor) {
            return Err(Error::Domain(format!(
                "{divisor} does not divide the modulus {}",
                self.m
            )));
        }
        let mut out = Counts::new(divisor)?;
        out.steps_total = self.steps_total;
        out.visible_total = self.visible_total;
        out.pair_total = self.pair_total;
        for a in 0..self.m as usize {
            let b = a % divisor as usize;
            out.visible_by_residue[b] += self.visible_by_residue[a];
            out.pair_by_residue[b] += self.pair_by_residue[a];
        }
        Ok(out)
    }

    /// `visible_total = sum of residues`, `pair_total = sum of residues`,
    /// and `pair_total <= visible_total <= steps_total`.
    pub fn is_consistent(&self) -> bool {
        self.visible_by_residue.iter().sum::<u64>() == self.visible_total
            && self.pair_by_residue.iter().sum::<u64>() == self.pair_total
            && self.pair_total <= self.visible_total
            && self.visible_total <= self.steps_total
    }
}

/// Counters over a contiguous range of steps of one walk.
///
/// A pair `X_{i-1} X_i` is added when step `i` is recorded, so the first
/// record of a chunk that does not start at step 1 must carry the
/// visibility of the step before it. [`VisAccumulator::close`] adds the
/// last pair `X_hi X_{hi+1}` from a look-ahead step without counting that
/// step, so a closed accumulator over `1..=n` holds exactly the numerators
/// of the proportions over the first `n` steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VisAccumulator {
    counts: Counts,
    range: Option<(u64, u64)>,
    first_prev: Option<bool>,
    last: bool,
    closed: bool,
}

impl VisAccumulator {
    pub fn new(m: u64) -> Result<Self> {
        Ok(Self {
            counts: Counts::new(m)?,
            range: None,
            first_prev: None,
            last: false,
            closed: false,
        })
    }

    pub fn counts(&self) -> &Counts {
        &self.counts
    }

    pub fn into_counts(self) -> Counts {
        self.counts
    }

    pub fn modulus(&self) -> u64 {
        self.counts.m
    }

    /// Covered steps `[lo, hi]`, `None` while empty.
    pub fn range(&self) -> Option<(u64, u64)> {
        self.range
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn is_empty(&self) -> bool {
        self.range.is_none()
    }

    /// Record `X_i = visible`. `visible_prev` is `X_{i-1}`; it may be omitted
    /// after the first record (the stored value is used) and must be omitted
    /// for `i = 1`.
    pub fn record(&mut self, i: u64, visible: bool, visible_prev: Option<bool>) -> Result<()> {
        if self.closed {
            return Err(Error::Range("accumulator already closed".into()));
        }
        if i == 0 {
            return Err(Error::Range("steps are numbered from 1".into()));
        }
        let prev = match self.range {
            Some((_, hi)) => {
                if i != hi + 1 {
                    return Err(Error::Range(format!(
                        "step {i} does not follow the last recorded step {hi}"
                    )));
                }
                if visible_prev.is_some_and(|p| p != self.last) {
                    return Err(Error::Range(format!(
                        "boundary flag for step {} contradicts the recorded value",
                        i - 1
                    )));
                }
                Some(self.last)
            }
            None => {
                if i == 1 && visible_prev.is_some() {
                    return Err(Error::Range("step 0 has no visibility".into()));
                }
                if i > 1 && visible_prev.is_none() {
                    return Err(Error::Range(format!(
                        "first record at step {i} needs the visibility of step {}",
                        i - 1
                    )));
                }
                self.first_prev = visible_prev;
                visible_prev
            }
        };

        let m = self.counts.m;
        let c = &mut self.counts;
        add_to(&mut c.steps_total, 1, "steps_total")?;
        if visible {
            add_to(&mut c.visible_total, 1, "visible_total")?;
            add_to(
                &mut c.visible_by_residue[(i % m) as usize],
                1,
                "visible_by_residue",
            )?;
            if prev == Some(true) {
                add_to(&mut c.pair_total, 1, "pair_total")?;
                add_to(
                    &mut c.pair_by_residue[((i - 1) % m) as usize],
                    1,
                    "pair_by_residue",
                )?;
            }
        }
        self.range = Some(match self.range {
            Some((lo, _)) => (lo, i),
            None => (i, i),
        });
        self.last = visible;
        Ok(())
    }

    /// Add the pair `X_hi X_{hi+1}` from the look-ahead step `hi + 1` and
    /// freeze the accumulator.
    pub fn close(&mut self, visible_next: bool) -> Result<()> {
        let (_, hi) = self.range.ok_or(Error::Empty)?;
        if self.closed {
            return Err(Error::Range("accumulator already closed".into()));
        }
        if self.last && visible_next {
            let m = self.counts.m;
            add_to(&mut self.counts.pair_total, 1, "pair_total")?;
            add_to(
                &mut self.counts.pair_by_residue[(hi % m) as usize],
                1,
                "pair_by_residue",
            )?;
        }
        self.closed = true;
        Ok(())
    }

    /// Join two accumulators over adjacent ranges of the same walk, in
    /// either argument order. The empty accumulator is the identity.
    pub fn merge(self, other: VisAccumulator) -> Result<VisAccumulator> {
        if self.counts.m != other.counts.m {
            return Err(Error::ModulusMismatch(self.counts.m, other.counts.m));
        }
        let (first, second) = match (self.range, other.range) {
            (None, _) => return Ok(other),
            (_, None) => return Ok(self),
            (Some((_, a_hi)), Some((b_lo, _))) if a_hi + 1 == b_lo => (self, other),
            (Some((a_lo, _)), Some((_, b_hi))) if b_hi + 1 == a_lo => (other, self),
            (Some(a), Some(b)) => {
                return Err(Error::Range(format!(
                    "ranges {a:?} and {b:?} are not adjacent"
                )))
            }
        };
        if first.closed {
            return Err(Error::Range(
                "a closed accumulator cannot be followed by another chunk".into(),
            ));
        }
        if second.first_prev != Some(first.last) {
            return Err(Error::Range(
                "boundary flag of the later chunk does not match the earlier chunk".into(),
            ));
        }
        let mut counts = first.counts;
        counts.add(&second.counts)?;
        Ok(VisAccumulator {
            counts,
            range: Some((first.range.unwrap().0, second.range.unwrap().1)),
            first_prev: first.first_prev,
            last: second.last,
            closed: second.closed,
        })
    }
}

/// Which proportion a report row carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stat {
    /// Visible steps.
    #[serde(rename = "S")]
    Visible,
    /// Visible steps `i ≡ a (mod m)`.
    #[serde(rename = "S_res")]
    VisibleResidue,
    /// Consecutive visible pairs.
    #[serde(rename = "R")]
    Pair,
    /// Consecutive visible pairs with first index `i ≡ a (mod m)`.
    #[serde(rename = "R_res")]
    PairResidue,
}

impl Stat {
    /// Column label, as serialized.
    pub fn as_str(self) -> &'static str {
        match self {
            Stat::Visible => "S",
            Stat::VisibleResidue => "S_res",
            Stat::Pair => "R",
            Stat::PairResidue => "R_res",
        }
    }
}

/// One CSV/JSON row. Column order is the schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub stat: Stat,
    pub k: u32,
    pub m: u64,
    pub a: Option<u64>,
    pub n: u64,
    pub count: u64,
    pub proportion: f64,
    pub theory: Option<f64>,
    pub abs_error: Option<f64>,
    pub stderr: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn row(&self, stat: Stat, a: Option<u64>) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.stat == stat && r.a == a)
    }

    pub fn proportion(&self, stat: Stat, a: Option<u64>) -> Option<f64> {
        self.row(stat, a).map(|r| r.proportion)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row)
                .map_err(|e| Error::Domain(format!("csv: {e}")))?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Domain(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let rows = r
            .deserialize()
            .collect::<std::result::Result<Vec<ReportRow>, _>>()
            .map_err(|e| Error::Domain(format!("csv: {e}")))?;
        Ok(Self { rows })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Rows with a theory value whose absolute error exceeds `tol`.
    pub fn failures(&self, tol: f64) -> Vec<&ReportRow> {
        self.rows
            .iter()
            .filter(|r| r.abs_error.is_some_and(|e| e.is_nan() || e >= tol))
            .collect()
    }
}

fn binomial_stderr(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Proportions, theory targets and heuristic standard errors for `counts`.
///
/// Residue rows are emitted for `m >= 2`; their theory column is empty
/// when `m` is neither a power of two nor an odd prime.
pub fn report_from_counts(counts: &Counts, theory: &TheoryConstants, seed: u64) -> Result<Report> {
    if counts.steps_total == 0 {
        return Err(Error::Empty);
    }
    let n = counts.steps_total;
    let k = theory.k;
    let m = counts.m;
    let row = |stat, a, count: u64, target: Option<f64>| {
        let proportion = count as f64 / n as f64;
        ReportRow {
            stat,
            k,
            m,
            a,
            n,
            count,
            proportion,
            theory: target,
            abs_error: target.map(|t| (proportion - t).abs()),
            stderr: binomial_stderr(proportion, n),
            seed,
        }
    };
    let mut rows = vec![row(
        Stat::Visible,
        None,
        counts.visible_total,
        Some(theory.inv_zeta_k),
    )];
    if m >= 2 {
        for a in 0..m {
            let c = counts.visible_by_residue[a as usize];
            rows.push(row(
                Stat::VisibleResidue,
                Some(a),
                c,
                theory.delta(a, m).ok(),
            ));
        }
    }
    rows.push(row(
        Stat::Pair,
        None,
        counts.pair_total,
        Some(theory.euler2_k),
    ));
    if m >= 2 {
        for a in 0..m {
            let c = counts.pair_by_residue[a as usize];
            rows.push(row(Stat::PairResidue, Some(a), c, theory.gamma(a, m).ok()));
        }
    }
    Ok(Report { rows })
}

/// Report for a single accumulator.
pub fn finalize(acc: &VisAccumulator, theory: &TheoryConstants, seed: u64) -> Result<Report> {
    report_from_counts(acc.counts(), theory, seed)
}
