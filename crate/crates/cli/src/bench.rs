use std::path::Path;
use std::time::Instant;

use topaz_core::syntax::{load_model, BenchDirective};

use crate::{execute, BenchRow, CliError, Query, QueryKind, ResultDocument};

fn label(b: &BenchDirective) -> String {
    let mut s = b.command.clone();
    if !b.valuation.is_empty() {
        let vals: Vec<String> = b.valuation.iter().map(|(n, v)| format!("{n}={v}")).collect();
        s = format!("{s} [{}]", vals.join(","));
    }
    if let Some(n) = b.budget {
        s = format!("{s} budget {n}");
    }
    s
}

/// Runs every `bench` directive of every `.pta` file in `dir`, in file
/// name order.
pub fn run_bench(dir: &Path, default_budget: usize) -> Result<ResultDocument, CliError> {
    let start = Instant::now();
    let entries = std::fs::read_dir(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    let mut files: Vec<_> = entries
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "pta"))
        .collect();
    files.sort();

    let mut rows = Vec::new();
    let mut states = 0;
    let mut complete = true;
    for path in files {
        let model = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let text = std::fs::read_to_string(&path).map_err(|source| CliError::Io { path: path.clone(), source })?;
        let (file, pta) = match load_model(&text) {
            Ok(x) => x,
            Err(e) => {
                rows.push(BenchRow { model, query: "-".into(), verdict: format!("error: {e}"), states: 0, time: 0.0 });
                continue;
            }
        };
        for b in &file.benches {
            let t = Instant::now();
            let result = match QueryKind::from_name(&b.command) {
                Some(kind) => execute(
                    &pta,
                    &Query {
                        kind,
                        private: None,
                        final_loc: None,
                        valuation: b.valuation.iter().cloned().collect(),
                        budget: b.budget.unwrap_or(default_budget),
                    },
                ),
                None => Err(CliError::UnknownBenchCommand(b.command.clone())),
            };
            let time = t.elapsed().as_secs_f64();
            let row = match result {
                Ok(doc) => {
                    states += doc.states_explored;
                    complete &= doc.complete;
                    let verdict = if doc.frontier_truncated { format!("{} (truncated)", doc.verdict) } else { doc.verdict };
                    BenchRow { model: model.clone(), query: label(b), verdict, states: doc.states_explored, time }
                }
                Err(e) => BenchRow { model: model.clone(), query: label(b), verdict: format!("error: {e}"), states: 0, time },
            };
            rows.push(row);
        }
    }
    let mut doc = ResultDocument::new("bench", format!("{} queries", rows.len()));
    doc.complete = complete;
    doc.states_explored = states;
    doc.rows = Some(rows);
    doc.wall_time = start.elapsed().as_secs_f64();
    Ok(doc)
}
