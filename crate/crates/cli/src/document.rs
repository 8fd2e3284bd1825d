use std::collections::BTreeMap;
use std::fmt::{self, Write};

use serde::{Deserialize, Serialize};
use topaz_core::oracle::SampleReport;
use topaz_core::poly::{ConstraintUnion, DurationSet, Relation};
use topaz_core::Rational;

/// `Σ coefficient·name + constant ⋈ 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintAtom {
    pub coefficients: BTreeMap<String, Rational>,
    pub constant: Rational,
    pub relation: Relation,
}

pub type Disjunct = Vec<ConstraintAtom>;

pub fn constraint_atoms(c: &ConstraintUnion) -> Vec<Disjunct> {
    let space = c.space();
    c.disjuncts()
        .iter()
        .map(|p| {
            p.inequalities()
                .into_iter()
                .map(|ineq| ConstraintAtom {
                    coefficients: ineq
                        .term
                        .coeffs()
                        .iter()
                        .map(|(&d, k)| (space.name(d).to_string(), k.clone()))
                        .collect(),
                    constant: ineq.term.constant_part().clone(),
                    relation: ineq.relation,
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub model: String,
    pub query: String,
    pub verdict: String,
    pub states: usize,
    pub time: f64,
}

/// Everything a command reports. Optional fields are omitted when the
/// command does not produce them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub query: String,
    pub verdict: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraint: Option<Vec<Disjunct>>,
    /// Rendered form of `constraint`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraint_text: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_set: Option<DurationSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub priv_times: Option<DurationSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pub_times: Option<DurationSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<BTreeMap<String, Rational>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<SampleReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<Vec<BenchRow>>,
    pub complete: bool,
    pub frontier_truncated: bool,
    pub states_explored: usize,
    #[serde(default)]
    pub warnings: Vec<String>,
    pub wall_time: f64,
}

impl ResultDocument {
    pub fn new(query: &str, verdict: impl Into<String>) -> Self {
        ResultDocument {
            query: query.to_string(),
            verdict: verdict.into(),
            constraint: None,
            constraint_text: None,
            duration_set: None,
            priv_times: None,
            pub_times: None,
            witness: None,
            samples: None,
            rows: None,
            complete: true,
            frontier_truncated: false,
            states_explored: 0,
            warnings: Vec::new(),
            wall_time: 0.0,
        }
    }

    pub fn with_constraint(mut self, c: &ConstraintUnion) -> Self {
        self.constraint = Some(constraint_atoms(c));
        self.constraint_text = Some(c.disjuncts().iter().map(ToString::to_string).collect());
        self
    }
}

impl fmt::Display for ResultDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "query: {}", self.query)?;
        writeln!(f, "verdict: {}", self.verdict)?;
        if let Some(ds) = &self.constraint_text {
            if ds.is_empty() {
                writeln!(f, "constraint: false")?;
            } else {
                writeln!(f, "constraint:")?;
                for d in ds {
                    writeln!(f, "  {d}")?;
                }
            }
        }
        let label = if self.priv_times.is_some() { "opaque" } else { "durations" };
        for (label, set) in [("priv", &self.priv_times), ("pub", &self.pub_times), (label, &self.duration_set)] {
            if let Some(s) = set {
                writeln!(f, "{label}: {s}")?;
            }
        }
        if let Some(w) = &self.witness {
            let parts: Vec<String> = w.iter().map(|(n, v)| format!("{n}={v}")).collect();
            writeln!(f, "witness: {}", parts.join(", "))?;
        }
        if let Some(s) = &self.samples {
            write!(f, "{s}")?;
        }
        if let Some(rows) = &self.rows {
            f.write_str(&table(rows))?;
        }
        writeln!(f, "complete: {}", self.complete)?;
        if self.frontier_truncated {
            writeln!(f, "frontier truncated: true")?;
        }
        writeln!(f, "states explored: {}", self.states_explored)?;
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        writeln!(f, "wall time: {:.3}s", self.wall_time)
    }
}

fn table(rows: &[BenchRow]) -> String {
    let header = ["model", "query", "verdict", "states", "time"];
    let cells: Vec<[String; 5]> = rows
        .iter()
        .map(|r| [r.model.clone(), r.query.clone(), r.verdict.clone(), r.states.to_string(), format!("{:.3}s", r.time)])
        .collect();
    let mut width = header.map(str::len);
    for row in &cells {
        for (w, c) in width.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let mut line = |cols: [&str; 5]| {
        let padded: Vec<String> = cols.iter().zip(width).map(|(c, w)| format!("{c:<w$}")).collect();
        let _ = writeln!(out, "{}", padded.join("  ").trim_end());
    };
    line(header);
    for row in &cells {
        line([&row[0], &row[1], &row[2], &row[3], &row[4]]);
    }
    out
}
