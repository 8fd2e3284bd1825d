use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;

use super::row::{self, Insert, Row};
use super::{same_space, Dim, DimKind, Inequality, PolyError, Relation, Space};
use crate::rational::Rational;

/// A convex polyhedron given as a conjunction of (possibly strict) linear
/// constraints over the dimensions of a [`Space`](super::Space).
#[derive(Clone)]
pub struct Polyhedron {
    space: Space,
    rows: Vec<Row>,
}

/// One side of a one-dimensional bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bound {
    pub value: Rational,
    pub strict: bool,
}

/// Projection of a polyhedron onto a single dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bounds {
    pub empty: bool,
    pub lower: Option<Bound>,
    pub upper: Option<Bound>,
}

impl Bounds {
    /// Interval inclusion `other ⊆ self` on this dimension.
    pub fn contains(&self, other: &Bounds) -> bool {
        if other.empty {
            return true;
        }
        if self.empty {
            return false;
        }
        let lower_ok = match (&self.lower, &other.lower) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(a), Some(b)) => a.value < b.value || (a.value == b.value && (!a.strict || b.strict)),
        };
        let upper_ok = match (&self.upper, &other.upper) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(a), Some(b)) => a.value > b.value || (a.value == b.value && (!a.strict || b.strict)),
        };
        lower_ok && upper_ok
    }
}

/// Nonzero coefficients, constant, relation.
type ApproxRow = (Vec<(Dim, f64)>, f64, Relation);

/// Floating-point copy of the constraints of a polyhedron, used to reject
/// points cheaply before an exact test.
#[derive(Debug, Clone)]
pub struct ApproxRows {
    rows: Vec<ApproxRow>,
}

impl ApproxRows {
    /// `false` only when the point violates a constraint by more than the
    /// rounding error of the evaluation.
    pub fn may_contain(&self, point: &[f64]) -> bool {
        self.rows.iter().all(|(coeffs, k, rel)| {
            let mut acc = *k;
            let mut mag = k.abs();
            for &(d, c) in coeffs {
                let t = c * point[d];
                acc += t;
                mag += t.abs();
            }
            let tol = mag * 1e-9 + 1e-12;
            match rel {
                Relation::Eq => acc.abs() <= tol,
                _ => acc <= tol,
            }
        })
    }
}

impl Polyhedron {
    /// All points with nonnegative timing parameters.
    pub fn universe(space: &Space) -> Self {
        let mut p = Self::top(space);
        for d in space.dims_of(DimKind::TimingParameter) {
            let mut coeffs = vec![BigInt::zero(); space.len()];
            coeffs[d] = BigInt::from(-1);
            p.push_row(Row::new(coeffs, BigInt::zero(), Relation::Le));
        }
        p
    }

    /// The unconstrained polyhedron (no implicit nonnegativity).
    pub fn top(space: &Space) -> Self {
        Polyhedron { space: space.clone(), rows: Vec::new() }
    }

    pub fn empty(space: &Space) -> Self {
        Polyhedron { space: space.clone(), rows: vec![Row::falsum(space.len())] }
    }

    pub fn from_inequalities(
        space: &Space,
        ineqs: impl IntoIterator<Item = Inequality>,
    ) -> Result<Self, PolyError> {
        let mut p = Self::top(space);
        for ineq in ineqs {
            p = p.with(&ineq)?;
        }
        Ok(p)
    }

    pub(crate) fn from_rows(space: &Space, rows: Option<Vec<Row>>) -> Self {
        match rows {
            Some(rows) => Polyhedron { space: space.clone(), rows },
            None => Self::empty(space),
        }
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    /// Conjoins a single constraint.
    pub fn with(mut self, ineq: &Inequality) -> Result<Self, PolyError> {
        if let Some(&d) = ineq.term.coeffs().keys().find(|&&d| d >= self.space.len()) {
            return Err(PolyError::UnknownDimension(d));
        }
        self.push_row(Row::from_inequality(ineq, self.space.len()));
        Ok(self)
    }

    fn push_row(&mut self, r: Row) {
        if self.is_trivially_empty() {
            return;
        }
        if row::insert(&mut self.rows, r) == Insert::Contradiction {
            self.rows = vec![Row::falsum(self.space.len())];
        }
    }

    fn is_trivially_empty(&self) -> bool {
        self.rows.len() == 1 && self.rows[0].is_ground()
    }

    pub fn inequalities(&self) -> Vec<Inequality> {
        self.rows.iter().map(Row::to_inequality).collect()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// True when some real point satisfies every constraint.
    pub fn is_satisfiable(&self) -> bool {
        !self.is_trivially_empty() && row::satisfiable(&self.rows)
    }

    pub fn constrained_dims(&self) -> BTreeSet<Dim> {
        (0..self.space.len())
            .filter(|&d| self.rows.iter().any(|r| !r.coeffs[d].is_zero()))
            .collect()
    }

    pub fn intersect(&self, other: &Polyhedron) -> Result<Polyhedron, PolyError> {
        if !same_space(&self.space, &other.space) {
            return Err(PolyError::DimensionMismatch);
        }
        let mut out = self.clone();
        for r in &other.rows {
            out.push_row(r.clone());
        }
        Ok(out)
    }

    /// Existential projection: the dropped dimensions become unconstrained.
    pub fn eliminate(&self, dims: &[Dim]) -> Polyhedron {
        if self.is_trivially_empty() {
            return self.clone();
        }
        let rows = row::eliminate_columns(self.rows.clone(), dims);
        Self::from_rows(&self.space, rows)
    }

    /// Lets an arbitrary nonnegative delay elapse on `clocks`.
    pub fn time_elapse(&self, clocks: &[Dim]) -> Polyhedron {
        if self.is_trivially_empty() {
            return self.clone();
        }
        let width = self.space.len();
        // Substitute x := x - d on every clock, then drop d (column `width`).
        let mut rows: Vec<Row> = self
            .rows
            .iter()
            .map(|r| {
                let mut coeffs = r.coeffs.clone();
                let delay: BigInt = clocks.iter().map(|&c| &r.coeffs[c]).sum();
                coeffs.push(-delay);
                Row::new(coeffs, r.constant.clone(), r.rel)
            })
            .collect();
        let mut nonneg = vec![BigInt::zero(); width + 1];
        nonneg[width] = BigInt::from(-1);
        rows.push(Row::new(nonneg, BigInt::zero(), Relation::Le));
        let rows = row::conjoin(rows).and_then(|rows| row::eliminate_column(rows, width));
        let rows = rows.map(|rows| {
            rows.into_iter()
                .map(|mut r| {
                    r.coeffs.truncate(width);
                    r
                })
                .collect()
        });
        Self::from_rows(&self.space, rows)
    }

    /// Resets every clock of `clocks` to zero.
    pub fn reset(&self, clocks: &[Dim]) -> Polyhedron {
        if clocks.is_empty() {
            return self.clone();
        }
        let mut out = self.eliminate(clocks);
        for &c in clocks {
            let mut coeffs = vec![BigInt::zero(); self.space.len()];
            coeffs[c] = BigInt::from(1);
            out.push_row(Row::new(coeffs, BigInt::zero(), Relation::Eq));
        }
        out
    }

    /// `other ⊆ self`.
    pub fn includes(&self, other: &Polyhedron) -> bool {
        if !other.is_satisfiable() {
            return true;
        }
        for r in &self.rows {
            if other.rows.iter().any(|o| o.implies(r)) {
                continue;
            }
            for n in r.negations() {
                let mut probe = other.rows.clone();
                if row::insert(&mut probe, n) == Insert::Contradiction {
                    continue;
                }
                if row::satisfiable(&probe) {
                    return false;
                }
            }
        }
        true
    }

    pub fn approx(&self) -> ApproxRows {
        let to_f64 = |c: &BigInt| Rational::from_integer(c.clone()).to_f64();
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let coeffs = r.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(d, c)| (d, to_f64(c))).collect();
                (coeffs, to_f64(&r.constant), r.rel)
            })
            .collect();
        ApproxRows { rows }
    }

    /// Some point of the polyhedron, `None` when it is empty.
    pub fn sample_point(&self) -> Option<Vec<Rational>> {
        if self.is_trivially_empty() {
            return None;
        }
        row::sample_point(&self.rows, self.space.len())
    }

    /// The same point set without redundant constraints.
    pub fn minimize(&self) -> Polyhedron {
        if !self.is_satisfiable() {
            return Self::empty(&self.space);
        }
        Polyhedron { space: self.space.clone(), rows: row::remove_redundant(self.rows.clone()) }
    }

    /// Pairwise disjoint polyhedra whose union is `self \ other`.
    pub fn subtract(&self, other: &Polyhedron) -> Vec<Polyhedron> {
        let mut out = Vec::new();
        let mut rest = self.clone();
        if !rest.is_satisfiable() {
            return out;
        }
        for r in &other.rows {
            for n in r.negations() {
                let mut piece = rest.clone();
                piece.push_row(n);
                if piece.is_satisfiable() {
                    out.push(piece);
                }
            }
            rest.push_row(r.clone());
            if !rest.is_satisfiable() {
                break;
            }
        }
        out
    }

    /// Point-set equality.
    pub fn equivalent(&self, other: &Polyhedron) -> bool {
        self.includes(other) && other.includes(self)
    }

    pub fn contains_point(&self, point: &[Rational]) -> bool {
        self.rows.iter().all(|r| r.holds_at(point))
    }

    /// Substitutes fixed values; the assigned dimensions become unconstrained.
    pub fn assign(&self, values: &[(Dim, Rational)]) -> Polyhedron {
        if values.is_empty() || self.is_trivially_empty() {
            return self.clone();
        }
        let mut out = Self::top(&self.space);
        for ineq in self.inequalities() {
            let mut term = super::LinearTerm::constant(ineq.term.constant_part().clone());
            for (d, c) in ineq.term.coeffs() {
                match values.iter().find(|(vd, _)| vd == d) {
                    Some((_, v)) => term = term.plus_constant(c * v),
                    None => term = term.plus(*d, c.clone()),
                }
            }
            out.push_row(Row::from_inequality(&Inequality::new(term, ineq.relation), self.space.len()));
        }
        out
    }

    /// Tightest bounds on `dim` over the whole polyhedron.
    pub fn bounds(&self, dim: Dim) -> Bounds {
        let others: Vec<Dim> = self.constrained_dims().into_iter().filter(|&d| d != dim).collect();
        let projected = self.eliminate(&others);
        if !projected.is_satisfiable() {
            return Bounds { empty: true, lower: None, upper: None };
        }
        let mut lower: Option<Bound> = None;
        let mut upper: Option<Bound> = None;
        for r in &projected.rows {
            let a = Rational::from_integer(r.coeffs[dim].clone());
            if a.is_zero() {
                continue;
            }
            // a·x + c ⋈ 0  ⇒  x ⋈ -c/a (flipped when a < 0)
            let value = -Rational::from_integer(r.constant.clone()) / a.clone();
            let strict = r.rel == Relation::Lt;
            let is_upper = a.is_positive() || r.rel == Relation::Eq;
            let is_lower = a.is_negative() || r.rel == Relation::Eq;
            if is_upper {
                upper = Some(tighter_upper(upper, Bound { value: value.clone(), strict }));
            }
            if is_lower {
                lower = Some(tighter_lower(lower, Bound { value, strict }));
            }
        }
        Bounds { empty: false, lower, upper }
    }

    /// Re-expresses the polyhedron over `target`, mapping each constrained
    /// dimension through `map`.
    pub fn embed(&self, target: &Space, map: impl Fn(Dim) -> Option<Dim>) -> Result<Polyhedron, PolyError> {
        if self.is_trivially_empty() {
            return Ok(Self::empty(target));
        }
        let mut out = Self::top(target);
        for r in &self.rows {
            let mut coeffs = vec![BigInt::zero(); target.len()];
            for (d, c) in r.coeffs.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let t = map(d).ok_or_else(|| PolyError::Unmapped(self.space.name(d).to_string()))?;
                coeffs[t] += c;
            }
            out.push_row(Row::new(coeffs, r.constant.clone(), r.rel));
        }
        Ok(out)
    }

    /// Embeds by dimension name, after renaming each source name.
    pub fn embed_by_name(&self, target: &Space, rename: impl Fn(&str) -> String) -> Result<Polyhedron, PolyError> {
        let space = self.space.clone();
        self.embed(target, |d| target.index_of(&rename(space.name(d))))
    }

    pub(crate) fn rows(&self) -> &[Row] {
        &self.rows
    }
}

fn tighter_upper(cur: Option<Bound>, new: Bound) -> Bound {
    match cur {
        None => new,
        Some(c) => {
            if new.value < c.value || (new.value == c.value && new.strict) {
                new
            } else {
                c
            }
        }
    }
}

fn tighter_lower(cur: Option<Bound>, new: Bound) -> Bound {
    match cur {
        None => new,
        Some(c) => {
            if new.value > c.value || (new.value == c.value && new.strict) {
                new
            } else {
                c
            }
        }
    }
}

impl fmt::Display for Polyhedron {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivially_empty() {
            return write!(f, "false");
        }
        if self.rows.is_empty() {
            return write!(f, "true");
        }
        for (i, ineq) in self.inequalities().iter().enumerate() {
            if i > 0 {
                write!(f, " && ")?;
            }
            write!(f, "{}", ineq.display(&self.space))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Polyhedron {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}
