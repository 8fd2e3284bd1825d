//! Command-line front end: argument handling, query execution and result
//! rendering.

mod bench;
mod document;

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;
use topaz_core::model::{is_lu, merge_finals, valuate_partial, LocId, LuResult, ModelError, ParamValuation, Pta};
use topaz_core::opacity::{
    is_fully_opaque, lu_opacity_emptiness, opaque_times, synth_op, Emptiness, OpacityError, OpacitySpec, Polarity,
    VerdictKind,
};
use topaz_core::oracle::{sample_durations, OracleError};
use topaz_core::poly::DurationSet;
use topaz_core::symsem::{efsynth, ExplorationOptions, SymError};
use topaz_core::syntax::{load_model, ParseError};
use topaz_core::Rational;

pub use bench::run_bench;
pub use document::{BenchRow, ConstraintAtom, Disjunct, ResultDocument};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;

pub const INCONCLUSIVE: &str = "Inconclusive";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read `{path}`: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error("malformed parameter valuation `{0}`: expected name=value pairs separated by commas")]
    BadValuation(String),
    #[error("not an L/U automaton: parameter `{0}` is used both as a lower and as an upper bound")]
    NotLu(String),
    #[error("bench command `{0}` is not supported")]
    UnknownBenchCommand(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Opacity(#[from] OpacityError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Exploration(#[from] SymError),
}

#[derive(Debug, Parser)]
#[command(name = "topaz", version, about = "Execution-time opacity checking for parametric timed automata")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Private, public and opaque execution times at a fixed valuation.
    Durations(QueryArgs),
    /// Whether the private and public execution times coincide.
    FullOpacity(QueryArgs),
    /// Parameter valuations and execution times admitting both a private and a public run.
    Synth(QueryArgs),
    /// Whether an L/U automaton has an opaque execution time for some valuation.
    LuEmpty(QueryArgs),
    /// Parameter valuations reaching the final location.
    Efsynth(QueryArgs),
    /// Reachability at every half time unit up to the horizon, without symbolic durations.
    OracleSample(SampleArgs),
    /// Runs the queries declared by every model of a directory.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args)]
struct QueryArgs {
    #[arg(long, value_name = "PATH")]
    model: PathBuf,
    /// Private locations, defaulting to those declared in the model.
    #[arg(long, value_name = "LOC[,LOC...]", value_delimiter = ',')]
    private: Option<Vec<String>>,
    /// Final location, defaulting to the one declared in the model.
    #[arg(long = "final", value_name = "LOC")]
    final_loc: Option<String>,
    /// Parameter values, e.g. "p1=1,p2=2".
    #[arg(long, value_name = "VALUATION")]
    pval: Option<String>,
    /// Maximal number of symbolic states per exploration.
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    budget: u64,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PolarityArg {
    Priv,
    Pub,
    Any,
}

impl From<PolarityArg> for Polarity {
    fn from(p: PolarityArg) -> Polarity {
        match p {
            PolarityArg::Priv => Polarity::Priv,
            PolarityArg::Pub => Polarity::Pub,
            PolarityArg::Any => Polarity::Any,
        }
    }
}

#[derive(Debug, Clone, Args)]
struct SampleArgs {
    #[command(flatten)]
    query: QueryArgs,
    #[arg(long, value_name = "Q")]
    horizon: Rational,
    #[arg(long, value_enum, default_value = "priv")]
    polarity: PolarityArg,
}

#[derive(Debug, Clone, Args)]
struct BenchArgs {
    /// Directory of `.pta` models.
    #[arg(default_value = "corpus")]
    corpus: PathBuf,
    /// Budget for directives that do not set one.
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    budget: u64,
    #[arg(long)]
    json: bool,
}

/// What a command printed and how it exits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs one command line, `argv[0]` being the program name.
pub fn run_command<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code: EXIT_ERROR, stdout: String::new(), stderr: text }
            } else {
                Outcome { code: EXIT_OK, stdout: text, stderr: String::new() }
            };
        }
    };
    let (json, result) = match cli.command {
        Command::Bench(b) => (b.json, run_bench(&b.corpus, b.budget as usize)),
        Command::OracleSample(s) => (s.query.json, timed(|| sample(&s))),
        Command::Durations(q) => (q.json, timed(|| query(QueryKind::Durations, &q))),
        Command::FullOpacity(q) => (q.json, timed(|| query(QueryKind::FullOpacity, &q))),
        Command::Synth(q) => (q.json, timed(|| query(QueryKind::Synth, &q))),
        Command::LuEmpty(q) => (q.json, timed(|| query(QueryKind::LuEmpty, &q))),
        Command::Efsynth(q) => (q.json, timed(|| query(QueryKind::Efsynth, &q))),
    };
    match result {
        Ok(doc) => {
            let stdout = if json {
                serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
            } else {
                doc.to_string()
            };
            Outcome { code: exit_code(&doc), stdout, stderr: String::new() }
        }
        Err(e) => Outcome { code: EXIT_ERROR, stdout: String::new(), stderr: format!("error: {e}\n") },
    }
}

fn exit_code(doc: &ResultDocument) -> i32 {
    if let Some(rows) = &doc.rows {
        return if rows.iter().any(|r| r.verdict.starts_with("error")) { EXIT_ERROR } else { EXIT_OK };
    }
    if doc.verdict == INCONCLUSIVE {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    }
}

fn timed(f: impl FnOnce() -> Result<ResultDocument, CliError>) -> Result<ResultDocument, CliError> {
    let start = Instant::now();
    let mut doc = f()?;
    doc.wall_time = start.elapsed().as_secs_f64();
    Ok(doc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryKind {
    Durations,
    FullOpacity,
    Synth,
    LuEmpty,
    Efsynth,
}

impl QueryKind {
    pub fn name(self) -> &'static str {
        match self {
            QueryKind::Durations => "durations",
            QueryKind::FullOpacity => "full-opacity",
            QueryKind::Synth => "synth",
            QueryKind::LuEmpty => "lu-empty",
            QueryKind::Efsynth => "efsynth",
        }
    }

    pub fn from_name(s: &str) -> Option<QueryKind> {
        [QueryKind::Durations, QueryKind::FullOpacity, QueryKind::Synth, QueryKind::LuEmpty, QueryKind::Efsynth]
            .into_iter()
            .find(|k| k.name() == s)
    }
}

/// A query on a loaded automaton.
#[derive(Debug, Clone)]
pub struct Query {
    pub kind: QueryKind,
    pub private: Option<Vec<String>>,
    pub final_loc: Option<String>,
    pub valuation: ParamValuation,
    pub budget: usize,
}

pub fn load(path: &Path) -> Result<Pta, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    load_model(&text).map(|(_, p)| p).map_err(|source| CliError::Parse { path: path.to_path_buf(), source })
}

/// Parses `"p1=1,p2=2"`.
pub fn parse_valuation(text: &str) -> Result<ParamValuation, CliError> {
    let bad = || CliError::BadValuation(text.to_string());
    let mut out = ParamValuation::new();
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, value) = part.split_once('=').ok_or_else(bad)?;
        let value: Rational = value.trim().parse().map_err(|_| bad())?;
        if out.insert(name.trim().to_string(), value).is_some() {
            return Err(bad());
        }
    }
    Ok(out)
}

fn query(kind: QueryKind, q: &QueryArgs) -> Result<ResultDocument, CliError> {
    let pta = load(&q.model)?;
    let valuation = q.pval.as_deref().map(parse_valuation).transpose()?.unwrap_or_default();
    execute(
        &pta,
        &Query {
            kind,
            private: q.private.clone(),
            final_loc: q.final_loc.clone(),
            valuation,
            budget: q.budget as usize,
        },
    )
}

/// Applies the location overrides of a query.
fn build_spec(pta: &Pta, private: Option<&[String]>, final_loc: Option<&str>) -> Result<OpacitySpec, CliError> {
    let (model, final_loc) = match final_loc {
        None => (pta.clone(), pta.final_id()?),
        Some(name) => match pta.resolve_locations(name)?.as_slice() {
            [id] => (pta.clone(), *id),
            ids => {
                let merged = merge_finals(pta, ids)?;
                let id = merged.final_id()?;
                (merged, id)
            }
        },
    };
    let private: BTreeSet<LocId> = match private {
        None => model.private.clone(),
        Some(names) => {
            let mut set = BTreeSet::new();
            for n in names {
                set.extend(model.resolve_locations(n)?);
            }
            set
        }
    };
    Ok(OpacitySpec { model, private, final_loc, fixed_valuation: None })
}

fn kind_name(k: VerdictKind) -> &'static str {
    match k {
        VerdictKind::Opaque => "Opaque",
        VerdictKind::NotOpaqueFixable => "NotOpaqueFixable",
        VerdictKind::NotOpaqueVulnerable => "NotOpaqueVulnerable",
        VerdictKind::Inconclusive => INCONCLUSIVE,
    }
}

/// A duration inside a nonempty set.
fn member(s: &DurationSet) -> Option<Rational> {
    let i = s.intervals().first()?;
    Some(if i.lo_closed {
        i.lo.clone()
    } else {
        match &i.hi {
            Some(h) => &(&i.lo + h) / &Rational::from_integer(2),
            None => &i.lo + &Rational::one(),
        }
    })
}

pub fn execute(pta: &Pta, q: &Query) -> Result<ResultDocument, CliError> {
    let mut spec = build_spec(pta, q.private.as_deref(), q.final_loc.as_deref())?;
    if !q.valuation.is_empty() {
        spec.fixed_valuation = Some(q.valuation.clone());
    }
    let opts = ExplorationOptions::with_budget(q.budget);
    let name = q.kind.name();
    match q.kind {
        QueryKind::Durations | QueryKind::FullOpacity => {
            let v = if q.kind == QueryKind::Durations { opaque_times(&spec, &opts)? } else { is_fully_opaque(&spec, &opts)? };
            let mut doc = ResultDocument::new(name, kind_name(v.kind));
            doc.complete = v.complete();
            doc.frontier_truncated =
                v.priv_result.exploration.frontier_truncated || v.pub_result.exploration.frontier_truncated;
            doc.states_explored = v.states_explored();
            doc.priv_times = Some(v.priv_times);
            doc.pub_times = Some(v.pub_times);
            doc.duration_set = Some(v.opaque_times);
            doc.warnings = v.warnings;
            Ok(doc)
        }
        QueryKind::Synth => {
            let r = synth_op(&spec, &opts)?;
            let verdict = if r.exploration.complete { "Synthesized" } else { INCONCLUSIVE };
            let mut doc = ResultDocument::new(name, verdict).with_constraint(r.constraint());
            doc.duration_set = r.durations().ok();
            doc.complete = r.exploration.complete;
            doc.frontier_truncated = r.exploration.frontier_truncated;
            doc.states_explored = r.exploration.states_explored;
            doc.warnings = r.warnings;
            if !doc.complete {
                doc.warnings.push("exploration budget exhausted: the constraint is an under-approximation".into());
            }
            Ok(doc)
        }
        QueryKind::LuEmpty => {
            let model = match &spec.fixed_valuation {
                Some(v) => valuate_partial(&spec.model, v)?,
                None => spec.model.clone(),
            };
            let (lower, upper) = match is_lu(&model) {
                LuResult::Lu { lower, upper } => (lower, upper),
                LuResult::NotLu { witness } => return Err(CliError::NotLu(witness)),
            };
            let spec = OpacitySpec { model, fixed_valuation: None, ..spec };
            let r = lu_opacity_emptiness(&spec, &lower, &upper, &opts)?;
            let verdict = match r.verdict {
                Emptiness::Empty => "Empty",
                Emptiness::NonEmpty => "NonEmpty",
                Emptiness::Inconclusive => INCONCLUSIVE,
            };
            let v = r.verdict_detail;
            let mut doc = ResultDocument::new(name, verdict);
            doc.complete = v.complete();
            doc.frontier_truncated =
                v.priv_result.exploration.frontier_truncated || v.pub_result.exploration.frontier_truncated;
            doc.states_explored = v.states_explored();
            doc.warnings = v.warnings;
            if let Some(d) = member(&v.opaque_times) {
                let big = &d + &Rational::one();
                let w = lower.iter().map(|p| (p.clone(), Rational::zero())).chain(upper.iter().map(|p| (p.clone(), big.clone())));
                doc.witness = Some(w.collect());
            }
            doc.priv_times = Some(v.priv_times);
            doc.pub_times = Some(v.pub_times);
            doc.duration_set = Some(v.opaque_times);
            Ok(doc)
        }
        QueryKind::Efsynth => {
            let model = match &spec.fixed_valuation {
                Some(v) => valuate_partial(&spec.model, v)?,
                None => spec.model.clone(),
            };
            let target = spec.final_loc;
            let r = efsynth(&model, |l, _| l == target, &opts)?;
            let verdict = if r.complete { "Synthesized" } else { INCONCLUSIVE };
            let mut doc = ResultDocument::new(name, verdict).with_constraint(&r.constraint.simplify());
            doc.complete = r.complete;
            doc.frontier_truncated = r.frontier_truncated;
            doc.states_explored = r.states_explored;
            Ok(doc)
        }
    }
}

fn sample(s: &SampleArgs) -> Result<ResultDocument, CliError> {
    let pta = load(&s.query.model)?;
    let spec = build_spec(&pta, s.query.private.as_deref(), s.query.final_loc.as_deref())?;
    let valuation = s.query.pval.as_deref().map(parse_valuation).transpose()?.unwrap_or_default();
    let ta = valuate_partial(&spec.model, &valuation)?;
    let report =
        sample_durations(&ta, &spec.private, spec.final_loc, s.polarity.into(), &s.horizon, s.query.budget as usize)?;
    let complete = report.is_complete();
    let mut doc = ResultDocument::new("oracle-sample", if complete { "Sampled" } else { INCONCLUSIVE });
    doc.complete = complete;
    doc.samples = Some(report);
    Ok(doc)
}
