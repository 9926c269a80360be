//! Parallel Monte Carlo over independent walk paths.
//!
//! Path `p` is one walk of `n + 1` steps on random stream `p` of the
//! configuration's seed. Paths are distributed over a rayon pool and
//! collected in path order, so every reported number depends only on
//! `(cfg, n, paths, m)` and never on the worker count.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::numtheory::TheoryConstants;
use crate::stats::{report_from_counts, Counts, Report, Stat, VisAccumulator};
use crate::walk::{WalkConfig, Walker, MAX_STEPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McOptions {
    /// Steps per path over which proportions are taken.
    pub n: u64,
    pub paths: u64,
    /// Residue modulus; 1 disables residue rows.
    pub m: u64,
    /// Worker threads.
    pub parallelism: usize,
}

/// Cross-path mean and sample standard deviation of one report row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowSpread {
    pub stat: Stat,
    pub a: Option<u64>,
    pub mean: f64,
    pub stddev: f64,
}

#[derive(Debug, Clone)]
pub struct McOutcome {
    pub n: u64,
    pub seed: u64,
    pub theory: TheoryConstants,
    pub per_path: Vec<Counts>,
    pub pooled_counts: Counts,
    /// Report over the pooled counters (`n` column = steps x paths). With
    /// two or more paths, `stderr` is the cross-path standard error of the mean.
    pub pooled: Report,
    pub spread: Vec<RowSpread>,
}

impl McOutcome {
    fn assemble(n: u64, seed: u64, theory: TheoryConstants, per_path: Vec<Counts>) -> Result<Self> {
        let m = per_path.first().map(|c| c.m).ok_or(Error::Empty)?;
        let mut pooled_counts = Counts::new(m)?;
        for c in &per_path {
            pooled_counts.add(c)?;
        }
        let reports = per_path
            .iter()
            .map(|c| report_from_counts(c, &theory, seed))
            .collect::<Result<Vec<_>>>()?;
        let mut pooled = report_from_counts(&pooled_counts, &theory, seed)?;
        let paths = per_path.len();
        let spread: Vec<RowSpread> = pooled
            .rows
            .iter()
            .enumerate()
            .map(|(idx, row)| {
                let xs: Vec<f64> = reports.iter().map(|r| r.rows[idx].proportion).collect();
                let mean = xs.iter().sum::<f64>() / paths as f64;
                let stddev = if paths > 1 {
                    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
                    (ss / (paths - 1) as f64).sqrt()
                } else {
                    0.0
                };
                RowSpread {
                    stat: row.stat,
                    a: row.a,
                    mean,
                    stddev,
                }
            })
            .collect();
        if paths > 1 {
            for (row, s) in pooled.rows.iter_mut().zip(&spread) {
                row.stderr = s.stddev / (paths as f64).sqrt();
            }
        }
        Ok(Self {
            n,
            seed,
            theory,
            per_path,
            pooled_counts,
            pooled,
            spread,
        })
    }

    pub fn paths(&self) -> usize {
        self.per_path.len()
    }

    pub fn spread(&self, stat: Stat, a: Option<u64>) -> Option<&RowSpread> {
        self.spread.iter().find(|s| s.stat == stat && s.a == a)
    }

    pub fn path_report(&self, path: usize) -> Result<Report> {
        let c = self
            .per_path
            .get(path)
            .ok_or_else(|| Error::Range(format!("no path {path}")))?;
        report_from_counts(c, &self.theory, self.seed)
    }

    /// The same run viewed modulo a divisor of its modulus.
    pub fn fold_modulus(&self, divisor: u64) -> Result<McOutcome> {
        let per_path = self
            .per_path
            .iter()
            .map(|c| c.fold_modulus(divisor))
            .collect::<Result<Vec<_>>>()?;
        Self::assemble(self.n, self.seed, self.theory, per_path)
    }
}

/// Counters of one path: steps `1..=n` recorded, step `n + 1` as look-ahead.
pub fn run_path(cfg: &WalkConfig, n: u64, m: u64, stream: u64) -> Result<VisAccumulator> {
    if n == 0 {
        return domain("a path needs at least one step");
    }
    if n >= MAX_STEPS {
        return Err(Error::Range(format!(
            "{n} steps exceed the limit {MAX_STEPS}"
        )));
    }
    let mut acc = VisAccumulator::new(m)?;
    let mut walker = Walker::new(cfg, stream);
    for i in 1..=n {
        let v = walker.advance_visible();
        acc.record(i, v, None)?;
    }
    acc.close(walker.advance_visible())?;
    Ok(acc)
}

fn build_pool(parallelism: usize) -> Result<rayon::ThreadPool> {
    if parallelism == 0 {
        return domain("parallelism must be at least 1");
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| Error::Budget(format!("thread pool: {e}")))
}

/// Run `opts.paths` independent walks and reduce their counters.
pub fn mc_run(cfg: &WalkConfig, opts: McOptions) -> Result<McOutcome> {
    let theory = TheoryConstants::with_default_tol(cfg.k() as u32)?;
    mc_run_with_theory(cfg, opts, theory)
}

pub fn mc_run_with_theory(
    cfg: &WalkConfig,
    opts: McOptions,
    theory: TheoryConstants,
) -> Result<McOutcome> {
    if opts.paths == 0 {
        return domain("need at least one path");
    }
    if theory.k as usize != cfg.k() {
        return domain(format!(
            "theory constants for k = {} used with a k = {} walk",
            theory.k,
            cfg.k()
        ));
    }
    let pool = build_pool(opts.parallelism)?;
    let per_path = pool.install(|| {
        (0..opts.paths)
            .into_par_iter()
            .map(|p| run_path(cfg, opts.n, opts.m, p).map(VisAccumulator::into_counts))
            .collect::<Result<Vec<_>>>()
    })?;
    McOutcome::assemble(opts.n, cfg.seed(), theory, per_path)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: u64,
    pub mean: f64,
    pub abs_error: f64,
    pub stddev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub k: u32,
    pub paths: u64,
    pub target: f64,
    pub rows: Vec<SweepRow>,
    /// Least-squares slope of `ln stddev` against `ln n`; needs three
    /// points with positive spread.
    pub stddev_slope: Option<f64>,
}

/// Least-squares slope of `ys` against `xs`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let len = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / len;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / len;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Error and cross-path spread of the visible proportion for each `n` in `n_grid`.
pub fn convergence_sweep(
    cfg: &WalkConfig,
    n_grid: &[u64],
    paths: u64,
    parallelism: usize,
) -> Result<SweepTable> {
    if n_grid.is_empty() {
        return domain("empty n grid");
    }
    if n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return domain("n grid must be strictly ascending");
    }
    let theory = TheoryConstants::with_default_tol(cfg.k() as u32)?;
    let target = theory.inv_zeta_k;
    let rows = n_grid
        .iter()
        .map(|&n| {
            let out = mc_run_with_theory(
                cfg,
                McOptions {
                    n,
                    paths,
                    m: 1,
                    parallelism,
                },
                theory,
            )?;
            let s = out.spread(Stat::Visible, None).expect("total row");
            Ok(SweepRow {
                n,
                mean: s.mean,
                abs_error: (s.mean - target).abs(),
                stddev: s.stddev,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.stddev)).collect();
    Ok(SweepTable {
        k: theory.k,
        paths,
        target,
        stddev_slope: loglog_slope(&pts),
        rows,
    })
}
