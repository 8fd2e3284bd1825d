//! Exact geometry kernel: not-necessarily-closed convex polyhedra over clock
//! and parameter dimensions, finite unions of them, and canonical unions of
//! intervals for duration sets.

mod duration;
mod polyhedron;
mod row;
mod union;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rational;

pub use duration::{DurationSet, Interval};
pub use polyhedron::{ApproxRows, Bound, Bounds, Polyhedron};
pub use union::ConstraintUnion;

/// Index of a dimension inside a [`DimSpace`].
pub type Dim = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("polyhedra live in different dimension universes")]
    DimensionMismatch,
    #[error("dimension {0} is not declared in the universe")]
    UnknownDimension(Dim),
    #[error("dimension `{0}` has no counterpart in the target universe")]
    Unmapped(String),
    #[error("duplicate dimension `{0}`")]
    DuplicateDimension(String),
    #[error("constraint still mentions dimensions other than `{target}`: {residual:?}")]
    ResidualDimensions { target: String, residual: Vec<String> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DimKind {
    Clock,
    /// Internal timing parameter; valuations range over nonnegative rationals.
    TimingParameter,
    /// Non-timing parameter standing for program inputs or secrets.
    DataParameter,
}

impl DimKind {
    pub fn is_parameter(self) -> bool {
        !matches!(self, DimKind::Clock)
    }
}

/// The ordered set of named dimensions a family of polyhedra ranges over.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DimSpace {
    names: Vec<String>,
    kinds: Vec<DimKind>,
}

pub type Space = Arc<DimSpace>;

impl DimSpace {
    pub fn new<S: Into<String>>(
        dims: impl IntoIterator<Item = (S, DimKind)>,
    ) -> Result<Space, PolyError> {
        let mut names = Vec::new();
        let mut kinds = Vec::new();
        for (name, kind) in dims {
            let name = name.into();
            if names.contains(&name) {
                return Err(PolyError::DuplicateDimension(name));
            }
            names.push(name);
            kinds.push(kind);
        }
        Ok(Arc::new(DimSpace { names, kinds }))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, d: Dim) -> &str {
        &self.names[d]
    }

    pub fn kind(&self, d: Dim) -> DimKind {
        self.kinds[d]
    }

    pub fn index_of(&self, name: &str) -> Option<Dim> {
        self.names.iter().position(|n| n == name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Dim, &str, DimKind)> + '_ {
        self.names
            .iter()
            .zip(&self.kinds)
            .enumerate()
            .map(|(i, (n, k))| (i, n.as_str(), *k))
    }

    pub fn dims_of(&self, kind: DimKind) -> Vec<Dim> {
        (0..self.len()).filter(|&d| self.kinds[d] == kind).collect()
    }

    pub fn clocks(&self) -> Vec<Dim> {
        self.dims_of(DimKind::Clock)
    }

    pub fn parameters(&self) -> Vec<Dim> {
        (0..self.len()).filter(|&d| self.kinds[d].is_parameter()).collect()
    }
}

pub(crate) fn same_space(a: &Space, b: &Space) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// `Σ coeffs[d]·d + constant`. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LinearTerm {
    coeffs: BTreeMap<Dim, Rational>,
    constant: Rational,
}

impl LinearTerm {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: impl Into<Rational>) -> Self {
        LinearTerm { coeffs: BTreeMap::new(), constant: c.into() }
    }

    pub fn var(d: Dim) -> Self {
        Self::zero().plus(d, Rational::one())
    }

    /// Adds `coeff·d` to the term.
    pub fn plus(mut self, d: Dim, coeff: impl Into<Rational>) -> Self {
        let coeff = coeff.into();
        let entry = self.coeffs.entry(d).or_insert_with(Rational::zero);
        *entry = &*entry + &coeff;
        if entry.is_zero() {
            self.coeffs.remove(&d);
        }
        self
    }

    pub fn plus_constant(mut self, c: impl Into<Rational>) -> Self {
        self.constant = self.constant + c.into();
        self
    }

    pub fn coeff(&self, d: Dim) -> Rational {
        self.coeffs.get(&d).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn coeffs(&self) -> &BTreeMap<Dim, Rational> {
        &self.coeffs
    }

    pub fn constant_part(&self) -> &Rational {
        &self.constant
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &LinearTerm) -> LinearTerm {
        let mut out = self.clone();
        for (d, c) in &other.coeffs {
            out = out.plus(*d, c.clone());
        }
        out.constant = &out.constant + &other.constant;
        out
    }

    pub fn scale(&self, k: &Rational) -> LinearTerm {
        if k.is_zero() {
            return LinearTerm::zero();
        }
        LinearTerm {
            coeffs: self.coeffs.iter().map(|(d, c)| (*d, c * k)).collect(),
            constant: &self.constant * k,
        }
    }

    pub fn sub(&self, other: &LinearTerm) -> LinearTerm {
        self.add(&other.scale(&Rational::from(-1)))
    }

    pub fn evaluate(&self, point: &[Rational]) -> Rational {
        self.coeffs
            .iter()
            .fold(self.constant.clone(), |acc, (d, c)| acc + c * &point[*d])
    }
}

/// Stored relation of `term ⋈ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
}

impl Relation {
    pub fn holds(self, lhs: &Rational) -> bool {
        match self {
            Relation::Lt => lhs.is_negative(),
            Relation::Le => !lhs.is_positive(),
            Relation::Eq => lhs.is_zero(),
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Eq => "=",
        }
    }
}

/// Surface comparison operators, including the two that get normalized away.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cmp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Cmp {
    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Eq => "=",
            Cmp::Ge => ">=",
            Cmp::Gt => ">",
        }
    }

    pub fn flip(self) -> Cmp {
        match self {
            Cmp::Lt => Cmp::Gt,
            Cmp::Le => Cmp::Ge,
            Cmp::Eq => Cmp::Eq,
            Cmp::Ge => Cmp::Le,
            Cmp::Gt => Cmp::Lt,
        }
    }

    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Cmp::Lt => lhs < rhs,
            Cmp::Le => lhs <= rhs,
            Cmp::Eq => lhs == rhs,
            Cmp::Ge => lhs >= rhs,
            Cmp::Gt => lhs > rhs,
        }
    }
}

/// `term relation 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inequality {
    pub term: LinearTerm,
    pub relation: Relation,
}

impl Inequality {
    pub fn new(term: LinearTerm, relation: Relation) -> Self {
        Inequality { term, relation }
    }

    /// `lhs cmp rhs`, normalized so that only `<`, `<=`, `=` remain.
    pub fn compare(lhs: LinearTerm, cmp: Cmp, rhs: LinearTerm) -> Self {
        match cmp {
            Cmp::Lt => Inequality::new(lhs.sub(&rhs), Relation::Lt),
            Cmp::Le => Inequality::new(lhs.sub(&rhs), Relation::Le),
            Cmp::Eq => Inequality::new(lhs.sub(&rhs), Relation::Eq),
            Cmp::Ge => Inequality::new(rhs.sub(&lhs), Relation::Le),
            Cmp::Gt => Inequality::new(rhs.sub(&lhs), Relation::Lt),
        }
    }

    pub fn holds_at(&self, point: &[Rational]) -> bool {
        self.relation.holds(&self.term.evaluate(point))
    }

    /// Renders with dimension names, e.g. `x - p1 >= 0` becomes `x >= p1`.
    pub fn display<'a>(&'a self, space: &'a DimSpace) -> impl fmt::Display + 'a {
        InequalityDisplay { ineq: self, space }
    }
}

struct InequalityDisplay<'a> {
    ineq: &'a Inequality,
    space: &'a DimSpace,
}

impl fmt::Display for InequalityDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let term = &self.ineq.term;
        // Put the first variable on the left with a positive sign.
        let flip = term.coeffs.values().next().is_some_and(|c| c.is_negative());
        let (term, cmp) = if flip {
            let t = term.scale(&Rational::from(-1));
            let cmp = match self.ineq.relation {
                Relation::Lt => Cmp::Gt,
                Relation::Le => Cmp::Ge,
                Relation::Eq => Cmp::Eq,
            };
            (t, cmp)
        } else {
            let cmp = match self.ineq.relation {
                Relation::Lt => Cmp::Lt,
                Relation::Le => Cmp::Le,
                Relation::Eq => Cmp::Eq,
            };
            (term.clone(), cmp)
        };
        write_linear(f, term.coeffs.iter().map(|(d, c)| (self.space.name(*d), c)))?;
        if term.coeffs.is_empty() {
            write!(f, "0")?;
        }
        write!(f, " {} {}", cmp.symbol(), -term.constant_part())
    }
}

pub(crate) fn write_linear<'a>(
    f: &mut fmt::Formatter<'_>,
    terms: impl Iterator<Item = (&'a str, &'a Rational)>,
) -> fmt::Result {
    for (i, (name, c)) in terms.enumerate() {
        let mag = c.abs();
        let sign = if c.is_negative() { "-" } else { "+" };
        if i == 0 {
            if c.is_negative() {
                write!(f, "-")?;
            }
        } else {
            write!(f, " {sign} ")?;
        }
        if mag == Rational::one() {
            write!(f, "{name}")?;
        } else {
            write!(f, "{mag}*{name}")?;
        }
    }
    Ok(())
}
