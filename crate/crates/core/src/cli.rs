//! Command-line front end.
//!
//! Exit codes: `0` success, `1` an `--assert` check failed, `2` usage,
//! configuration or I/O error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::mc::{convergence_sweep, mc_run_with_theory, McOptions};
use crate::numtheory::{lemma28_sum, lemma29_sum, TheoryConstants, DEFAULT_TOL};
use crate::oracle::{
    exact_distribution, exact_pair_prob, exact_visible_prob, l_charsum, l_dp, lemma24_convergence,
    rational_to_f64, rational_to_string, RationalAlpha, StepSchedule,
};
use crate::walk::{validate_config, RawWalkConfig, WalkConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSERT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Default absolute tolerance for `simulate --assert`.
pub const DEFAULT_ASSERT_TOL: f64 = 0.005;

#[derive(Debug, Parser)]
#[command(
    name = "lattice-vis",
    version,
    about = "Visible lattice points along random walks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Monte Carlo estimate of visible proportions against their limits.
    Simulate(SimulateArgs),
    /// Limit constants and residue tables.
    Theory(TheoryArgs),
    /// Exact rational laws for short walks.
    Oracle(OracleArgs),
    /// Arithmetic sums and the congruence-mass decay table.
    Lemma(LemmaArgs),
    /// Error and spread of the mean visible proportion over a grid of walk lengths.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct WalkSource {
    /// Walk configuration JSON; a uniform single-law walk is used when absent.
    config: Option<PathBuf>,
    /// Dimension of the uniform walk used without a configuration.
    #[arg(long, default_value_t = 2)]
    k: usize,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    walk: WalkSource,
    #[arg(long, default_value_t = 1_000_000)]
    steps: u64,
    #[arg(long, default_value_t = 16)]
    paths: u64,
    /// Residue modulus; 1 disables residue rows.
    #[arg(long = "mod", default_value_t = 1)]
    modulus: u64,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (defaults to the available cores).
    #[arg(long)]
    parallelism: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Fail with exit code 1 if any row with a limit misses it by `--tol` or more.
    #[arg(long)]
    assert: bool,
    #[arg(long, default_value_t = DEFAULT_ASSERT_TOL)]
    tol: f64,
}

#[derive(Debug, Args)]
struct TheoryArgs {
    #[arg(long, default_value_t = 2)]
    k: u32,
    #[arg(long = "mod")]
    modulus: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OracleMode {
    Dist,
    Visible,
    Pair,
    #[value(name = "L", alias = "l")]
    L,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long)]
    steps: usize,
    /// Modulus for the congruence mass.
    #[arg(long, default_value_t = 2)]
    d: u64,
    /// Residue vector for the first k-1 axes, comma separated (zeros by default).
    #[arg(long, value_delimiter = ',')]
    g: Option<Vec<u64>>,
    #[arg(long, value_enum, default_value_t = OracleMode::Visible)]
    mode: OracleMode,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LemmaId {
    #[value(name = "2.4")]
    CongruenceMass,
    #[value(name = "2.8")]
    MobiusFloor,
    #[value(name = "2.9")]
    CoprimePairs,
}

#[derive(Debug, Args)]
struct LemmaArgs {
    #[arg(long, value_enum)]
    id: LemmaId,
    #[arg(long, default_value_t = 10_000)]
    n: u64,
    #[arg(long, default_value_t = 2)]
    l: u32,
    /// Walk lengths for the congruence-mass table, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [8u64, 16, 32])]
    grid: Vec<u64>,
    #[arg(long, default_value_t = 3)]
    d: u64,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    k: usize,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    walk: WalkSource,
    #[arg(long, value_delimiter = ',', default_values_t = [10_000u64, 100_000, 1_000_000])]
    grid: Vec<u64>,
    #[arg(long, default_value_t = 16)]
    paths: u64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    parallelism: Option<usize>,
}

enum Outcome {
    Pass,
    AssertFailed,
}

/// Parse `args` (program name first), run the subcommand and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(Outcome::Pass) => EXIT_OK,
        Ok(Outcome::AssertFailed) => EXIT_ASSERT,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Theory(a) => theory(a),
        Command::Oracle(a) => oracle(a),
        Command::Lemma(a) => lemma(a),
        Command::Sweep(a) => sweep(a),
    }
}

fn load_config(path: Option<&Path>, k: usize, seed: Option<u64>) -> Result<WalkConfig> {
    let raw = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
            RawWalkConfig::from_json(&text)?
        }
        None => RawWalkConfig::uniform(k, 0),
    };
    let cfg = validate_config(raw)?;
    Ok(match seed {
        Some(s) => cfg.with_seed(s),
        None => cfg,
    })
}

fn default_parallelism(requested: Option<usize>) -> usize {
    requested.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|e| Error::Config(format!("cannot write output: {e}")))
        }
    }
}

fn simulate(a: SimulateArgs) -> Result<Outcome> {
    let cfg = load_config(a.walk.config.as_deref(), a.walk.k, a.seed)?;
    if a.tol.is_nan() || a.tol <= 0.0 {
        return Err(Error::Config(format!(
            "tolerance must be positive, got {}",
            a.tol
        )));
    }
    let theory = TheoryConstants::with_default_tol(cfg.k() as u32)?;
    let opts = McOptions {
        n: a.steps,
        paths: a.paths,
        m: a.modulus,
        parallelism: default_parallelism(a.parallelism),
    };
    let outcome = mc_run_with_theory(&cfg, opts, theory)?;
    let text = match a.format {
        Format::Csv => outcome.pooled.to_csv()?,
        Format::Json => outcome.pooled.to_json() + "\n",
    };
    emit(a.out.as_deref(), &text)?;
    if a.assert {
        let failures = outcome.pooled.failures(a.tol);
        for row in &failures {
            eprintln!(
                "assert failed: {} a={} proportion {:.7} theory {:.7} abs_error {:.7} >= {}",
                row.stat.as_str(),
                row.a.map_or_else(|| "-".to_string(), |x| x.to_string()),
                row.proportion,
                row.theory.unwrap_or(f64::NAN),
                row.abs_error.unwrap_or(f64::NAN),
                a.tol
            );
        }
        if !failures.is_empty() {
            return Ok(Outcome::AssertFailed);
        }
    }
    Ok(Outcome::Pass)
}

fn theory(a: TheoryArgs) -> Result<Outcome> {
    let c = TheoryConstants::new(a.k, a.tol)?;
    let mut rows: Vec<(&str, Option<u64>, Option<u64>, f64)> = vec![
        ("inv_zeta", None, None, c.inv_zeta_k),
        ("euler2", None, None, c.euler2_k),
    ];
    if let Some(m) = a.modulus {
        let deltas = (0..m).map(|r| c.delta(r, m)).collect::<Result<Vec<_>>>()?;
        let gammas = (0..m).map(|r| c.gamma(r, m)).collect::<Result<Vec<_>>>()?;
        rows.extend(
            deltas
                .into_iter()
                .enumerate()
                .map(|(r, v)| ("delta", Some(r as u64), Some(m), v)),
        );
        rows.extend(
            gammas
                .into_iter()
                .enumerate()
                .map(|(r, v)| ("gamma", Some(r as u64), Some(m), v)),
        );
    }
    let text = match a.format {
        Format::Csv => {
            let mut s = String::from("quantity,k,a,m,value\n");
            for (name, r, m, v) in &rows {
                let opt = |x: &Option<u64>| x.map_or_else(String::new, |x| x.to_string());
                s.push_str(&format!("{name},{},{},{},{v}\n", a.k, opt(r), opt(m)));
            }
            s
        }
        Format::Json => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|(name, r, m, v)| json!({"quantity": name, "k": a.k, "a": r, "m": m, "value": v}))
                .collect();
            serde_json::to_string_pretty(&json!({"k": a.k, "tolerance": c.tolerance, "rows": rows}))
                .expect("json value serializes")
                + "\n"
        }
    };
    emit(None, &text)?;
    Ok(Outcome::Pass)
}

fn exact_json(r: &BigRational) -> Value {
    json!({"value": rational_to_string(r), "decimal": rational_to_f64(r)})
}

fn print_json(v: &Value) -> Result<()> {
    emit(
        None,
        &(serde_json::to_string_pretty(v).expect("json value serializes") + "\n"),
    )
}

fn oracle(a: OracleArgs) -> Result<Outcome> {
    let cfg = load_config(a.config.as_deref(), a.k, None)?;
    let n = a.steps;
    let out = match a.mode {
        OracleMode::Dist => {
            let dist = exact_distribution(&StepSchedule::from_config(&cfg, n)?)?;
            let entries: Vec<Value> = dist
                .entries
                .iter()
                .map(|(pos, p)| {
                    json!({"coords": pos, "value": rational_to_string(p), "decimal": rational_to_f64(p)})
                })
                .collect();
            json!({"mode": "dist", "steps": n, "k": dist.k, "entries": entries})
        }
        OracleMode::Visible => {
            let p = exact_visible_prob(&StepSchedule::from_config(&cfg, n)?)?;
            json!({"mode": "visible", "steps": n, "probability": exact_json(&p)})
        }
        OracleMode::Pair => {
            let p = exact_pair_prob(&StepSchedule::from_config(&cfg, n + 1)?)?;
            json!({"mode": "pair", "steps": n, "probability": exact_json(&p)})
        }
        OracleMode::L => {
            let sched = StepSchedule::from_config(&cfg, n)?;
            let g = a.g.unwrap_or_else(|| vec![0; cfg.k() - 1]);
            let counts = sched.type_counts();
            let exact = l_dp(&counts, sched.laws(), a.d, &g)?;
            let cs = l_charsum(&counts, sched.laws(), a.d, &g)?;
            json!({
                "mode": "L",
                "steps": n,
                "d": a.d,
                "g": g,
                "step_counts": counts,
                "dp": exact_json(&exact),
                "charsum": cs.value,
                "charsum_imag": cs.imag,
            })
        }
    };
    print_json(&out)?;
    Ok(Outcome::Pass)
}

fn lemma(a: LemmaArgs) -> Result<Outcome> {
    let out = match a.id {
        LemmaId::MobiusFloor => {
            let v = lemma28_sum(a.n, a.l)?;
            let limit = TheoryConstants::with_default_tol(a.l)?.inv_zeta_k;
            json!({
                "id": "2.8", "n": a.n, "l": a.l, "value": v,
                "normalized": v / a.n as f64, "limit": limit,
                "abs_error": (v / a.n as f64 - limit).abs(),
            })
        }
        LemmaId::CoprimePairs => {
            let v = lemma29_sum(a.n, a.l)?;
            let limit = TheoryConstants::with_default_tol(a.l)?.euler2_k;
            json!({
                "id": "2.9", "n": a.n, "l": a.l, "value": v,
                "normalized": v / a.n as f64, "limit": limit,
                "abs_error": (v / a.n as f64 - limit).abs(),
            })
        }
        LemmaId::CongruenceMass => {
            let cfg = load_config(a.config.as_deref(), a.k, None)?;
            let laws = cfg
                .alphas()
                .iter()
                .map(|x| RationalAlpha::from_f64s(x.probs()))
                .collect::<Result<Vec<_>>>()?;
            let table = lemma24_convergence(a.d, &laws, &a.grid)?;
            let mut v = serde_json::to_value(&table).expect("table serializes");
            v["id"] = json!("2.4");
            v
        }
    };
    print_json(&out)?;
    Ok(Outcome::Pass)
}

fn sweep(a: SweepArgs) -> Result<Outcome> {
    let cfg = load_config(a.walk.config.as_deref(), a.walk.k, a.seed)?;
    let table = convergence_sweep(&cfg, &a.grid, a.paths, default_parallelism(a.parallelism))?;
    print_json(&serde_json::to_value(&table).expect("table serializes"))?;
    Ok(Outcome::Pass)
}
