//! Concrete model-file syntax: parsing, printing and lowering to [`Pta`].
//!
//! ```text
//! clocks x;
//! parameters p1, p2;
//! automaton fig1 {
//!   init location l0 invariant x <= 3 {
//!     when x >= p1 goto l2;
//!     when x >= p2 goto l1;
//!   }
//!   final location l1;
//!   private location l2 invariant x <= 3 { goto l1; }
//! }
//! ```

mod lexer;
mod lower;
mod parser;
mod printer;

use std::fmt;

use thiserror::Error;

use crate::model::{DiscreteVar, Pta};
use crate::poly::Cmp;
use crate::rational::Rational;

pub use printer::print_model;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        ParseError { line, col, message: message.into() }
    }

    fn at(pos: Pos, message: impl Into<String>) -> Self {
        Self::new(pos.line, pos.col, message)
    }
}

/// Source position, ignored by equality.
#[derive(Debug, Clone, Copy, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl PartialEq for Pos {
    fn eq(&self, _: &Pos) -> bool {
        true
    }
}

impl Eq for Pos {}

/// `Σ coeff·name + constant`, in source order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Expr {
    pub terms: Vec<(String, Rational)>,
    pub constant: Rational,
}

impl Expr {
    fn add_term(&mut self, name: &str, c: Rational) {
        match self.terms.iter_mut().find(|(n, _)| n == name) {
            Some((_, k)) => *k = &*k + &c,
            None => self.terms.push((name.to_string(), c)),
        }
        self.terms.retain(|(_, k)| !k.is_zero());
    }

    fn add(&mut self, other: &Expr, sign: &Rational) {
        for (n, c) in &other.terms {
            self.add_term(n, c * sign);
        }
        self.constant = &self.constant + &(&other.constant * sign);
    }

    fn scale(&self, k: &Rational) -> Expr {
        let mut out = Expr { terms: Vec::new(), constant: &self.constant * k };
        for (n, c) in &self.terms {
            out.add_term(n, c * k);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub lhs: Expr,
    pub cmp: Cmp,
    pub rhs: Expr,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub target: String,
    pub value: i64,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeDecl {
    pub guard: Vec<Atom>,
    pub sync: Option<(String, Pos)>,
    pub assignments: Vec<Assignment>,
    pub target: String,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LocationDecl {
    pub name: String,
    pub init: bool,
    pub is_final: bool,
    pub private: bool,
    pub urgent: bool,
    pub invariant: Vec<Atom>,
    pub edges: Vec<EdgeDecl>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutomatonDecl {
    pub name: String,
    pub locations: Vec<LocationDecl>,
    pub pos: Pos,
}

/// A query the `bench` command runs on this model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchDirective {
    pub command: String,
    pub valuation: Vec<(String, Rational)>,
    pub budget: Option<usize>,
    pub pos: Pos,
}

pub const BENCH_COMMANDS: [&str; 5] = ["durations", "full-opacity", "synth", "lu-empty", "efsynth"];

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ModelFile {
    pub clocks: Vec<String>,
    pub parameters: Vec<String>,
    pub data_parameters: Vec<String>,
    pub discretes: Vec<DiscreteVar>,
    pub actions: Vec<String>,
    pub synchronize: Vec<String>,
    pub automata: Vec<AutomatonDecl>,
    pub benches: Vec<BenchDirective>,
}

impl ModelFile {
    /// Builds the automaton, composing several automata on the
    /// synchronized actions.
    pub fn to_pta(&self) -> Result<Pta, ParseError> {
        lower::lower(self)
    }
}

/// Parses and checks every reference of a model file.
pub fn parse_model(text: &str) -> Result<ModelFile, ParseError> {
    let m = parser::parse(text)?;
    m.to_pta()?;
    Ok(m)
}

/// Parses a model file and builds its automaton.
pub fn load_model(text: &str) -> Result<(ModelFile, Pta), ParseError> {
    let m = parser::parse(text)?;
    let pta = m.to_pta()?;
    Ok((m, pta))
}

impl fmt::Display for ModelFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_model(self))
    }
}
