use std::collections::HashSet;
use std::fmt;

use super::row::Row;
use super::{same_space, Dim, DurationSet, Interval, PolyError, Polyhedron, Space};
use crate::rational::Rational;

/// A finite disjunction of polyhedra over one universe. The empty disjunction
/// is `false`.
#[derive(Clone)]
pub struct ConstraintUnion {
    space: Space,
    disjuncts: Vec<Polyhedron>,
    seen: HashSet<Vec<Row>>,
}

impl ConstraintUnion {
    pub fn falsum(space: &Space) -> Self {
        ConstraintUnion { space: space.clone(), disjuncts: Vec::new(), seen: HashSet::new() }
    }

    pub fn from_disjuncts(space: &Space, ps: impl IntoIterator<Item = Polyhedron>) -> Result<Self, PolyError> {
        let mut u = Self::falsum(space);
        for p in ps {
            u.push(p)?;
        }
        Ok(u)
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    /// Adds a disjunct without its redundant constraints; unsatisfiable and
    /// syntactically repeated ones are dropped.
    pub fn push(&mut self, p: Polyhedron) -> Result<(), PolyError> {
        if !same_space(&self.space, p.space()) {
            return Err(PolyError::DimensionMismatch);
        }
        if !p.is_satisfiable() {
            return Ok(());
        }
        let p = p.minimize();
        let mut key = p.rows().to_vec();
        key.sort_by(|a, b| format!("{a:?}").cmp(&format!("{b:?}")));
        if self.seen.insert(key) {
            self.disjuncts.push(p);
        }
        Ok(())
    }

    pub fn disjuncts(&self) -> &[Polyhedron] {
        &self.disjuncts
    }

    pub fn is_false(&self) -> bool {
        self.disjuncts.is_empty()
    }

    pub fn contains_point(&self, point: &[Rational]) -> bool {
        self.disjuncts.iter().any(|d| d.contains_point(point))
    }

    /// Drops every disjunct included in another one.
    pub fn simplify(&self) -> ConstraintUnion {
        let mut kept: Vec<Polyhedron> = Vec::new();
        for p in &self.disjuncts {
            if kept.iter().any(|k| k.includes(p)) {
                continue;
            }
            kept.retain(|k| !p.includes(k));
            kept.push(p.clone());
        }
        Self::from_disjuncts(&self.space, kept).expect("same space")
    }

    pub fn eliminate(&self, dims: &[Dim]) -> ConstraintUnion {
        let ps = self.disjuncts.iter().map(|d| d.eliminate(dims));
        Self::from_disjuncts(&self.space, ps).expect("same space")
    }

    pub fn assign(&self, values: &[(Dim, Rational)]) -> ConstraintUnion {
        let ps = self.disjuncts.iter().map(|d| d.assign(values));
        Self::from_disjuncts(&self.space, ps).expect("same space")
    }

    /// Every disjunct of `other` is included in some disjunct of `self`
    /// (sufficient, not necessary, for `other ⊆ self`).
    pub fn covers_pairwise(&self, other: &ConstraintUnion) -> bool {
        other.disjuncts.iter().all(|o| self.disjuncts.iter().any(|d| d.includes(o)))
    }

    /// `p ⊆ self`, decided exactly by subtracting every disjunct.
    pub fn includes_polyhedron(&self, p: &Polyhedron) -> bool {
        let mut pieces = vec![p.clone()];
        for d in &self.disjuncts {
            pieces = pieces.iter().flat_map(|x| x.subtract(d)).collect();
            if pieces.is_empty() {
                return true;
            }
        }
        pieces.iter().all(|x| !x.is_satisfiable())
    }

    /// `other ⊆ self` as point sets.
    pub fn includes(&self, other: &ConstraintUnion) -> bool {
        other.disjuncts.iter().all(|o| self.includes_polyhedron(o))
    }

    /// Point-set equality.
    pub fn equivalent(&self, other: &ConstraintUnion) -> bool {
        self.includes(other) && other.includes(self)
    }

    /// Canonical one-dimensional form. Fails when a disjunct still
    /// constrains a dimension other than `dim`.
    pub fn to_duration_set(&self, dim: Dim) -> Result<DurationSet, PolyError> {
        let mut intervals = Vec::new();
        for d in &self.disjuncts {
            let residual: Vec<String> = d
                .constrained_dims()
                .into_iter()
                .filter(|&x| x != dim)
                .map(|x| self.space.name(x).to_string())
                .collect();
            if !residual.is_empty() {
                return Err(PolyError::ResidualDimensions { target: self.space.name(dim).to_string(), residual });
            }
            if let Some(i) = one_dim_interval(d, dim) {
                intervals.push(i);
            }
        }
        Ok(DurationSet::from_intervals(intervals))
    }

    /// Exact point-set equality of two unions constraining only `dim`.
    pub fn union_equal_1d(a: &ConstraintUnion, b: &ConstraintUnion, dim: Dim) -> Result<bool, PolyError> {
        Ok(a.to_duration_set(dim)? == b.to_duration_set(dim)?)
    }
}

fn one_dim_interval(p: &Polyhedron, dim: Dim) -> Option<Interval> {
    let b = p.bounds(dim);
    if b.empty {
        return None;
    }
    // Durations start at zero when no lower bound is present.
    let (lo, lo_closed) = match b.lower {
        Some(l) => (l.value, !l.strict),
        None => (Rational::zero(), true),
    };
    let (hi, hi_closed) = match b.upper {
        Some(u) => (Some(u.value), !u.strict),
        None => (None, false),
    };
    if lo.is_negative() {
        return Interval::new(Rational::zero(), true, hi, hi_closed);
    }
    Interval::new(lo, lo_closed, hi, hi_closed)
}

impl fmt::Display for ConstraintUnion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.disjuncts.is_empty() {
            return write!(f, "false");
        }
        for (i, d) in self.disjuncts.iter().enumerate() {
            if i > 0 {
                write!(f, " || ")?;
            }
            write!(f, "({d})")?;
        }
        Ok(())
    }
}

impl fmt::Debug for ConstraintUnion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::super::{Cmp, DimKind, DimSpace, Inequality, LinearTerm};
    use super::*;

    fn d_space() -> Space {
        DimSpace::new([("d", DimKind::TimingParameter), ("q", DimKind::TimingParameter)]).unwrap()
    }

    fn between(s: &Space, lo: &str, lo_cmp: Cmp, hi: Option<(&str, Cmp)>) -> Polyhedron {
        let mut ineqs = vec![Inequality::compare(
            LinearTerm::var(0),
            lo_cmp,
            LinearTerm::constant(lo.parse::<Rational>().unwrap()),
        )];
        if let Some((h, c)) = hi {
            ineqs.push(Inequality::compare(LinearTerm::var(0), c, LinearTerm::constant(h.parse::<Rational>().unwrap())));
        }
        Polyhedron::from_inequalities(s, ineqs).unwrap()
    }

    #[test]
    fn union_inclusion_beyond_pairwise() {
        // [0, 2] ⊆ [0, 1] ∪ [1, 2] though neither disjunct contains it
        let sp = d_space();
        let seg = |a: &str, b: &str| between(&sp, a, Cmp::Ge, Some((b, Cmp::Le)));
        let halves = ConstraintUnion::from_disjuncts(&sp, [seg("0", "1"), seg("1", "2")]).unwrap();
        let whole = ConstraintUnion::from_disjuncts(&sp, [seg("0", "2")]).unwrap();
        assert!(!halves.covers_pairwise(&whole));
        assert!(halves.equivalent(&whole));
        let gap = ConstraintUnion::from_disjuncts(&sp, [seg("0", "1"), seg("2", "3")]).unwrap();
        assert!(!gap.includes(&whole));
    }

    #[test]
    fn open_unbounded_duration() {
        let s = d_space();
        let u = ConstraintUnion::from_disjuncts(&s, [between(&s, "30", Cmp::Gt, None)]).unwrap();
        let ds = u.to_duration_set(0).unwrap();
        assert_eq!(ds, DurationSet::from_intervals([Interval::new(Rational::from(30), false, None, false).unwrap()]));
    }

    #[test]
    fn falsum_is_empty_set() {
        let s = d_space();
        assert!(ConstraintUnion::falsum(&s).to_duration_set(0).unwrap().is_empty());
    }

    #[test]
    fn overlapping_disjuncts_merge() {
        let s = d_space();
        let u = ConstraintUnion::from_disjuncts(
            &s,
            [
                between(&s, "1024", Cmp::Ge, Some(("1029", Cmp::Le))),
                between(&s, "1026.048", Cmp::Ge, Some(("1034", Cmp::Le))),
            ],
        )
        .unwrap();
        assert_eq!(u.to_duration_set(0).unwrap(), DurationSet::from_intervals([Interval::closed(1024, 1034)]));
    }

    #[test]
    fn union_equality_in_one_dimension() {
        let s = d_space();
        let a = ConstraintUnion::from_disjuncts(&s, [between(&s, "1", Cmp::Ge, Some(("3", Cmp::Le)))]).unwrap();
        let b = ConstraintUnion::from_disjuncts(&s, [between(&s, "2", Cmp::Ge, Some(("3", Cmp::Le)))]).unwrap();
        assert!(!ConstraintUnion::union_equal_1d(&a, &b, 0).unwrap());
        let c = ConstraintUnion::from_disjuncts(&s, [between(&s, "1.5", Cmp::Ge, Some(("3", Cmp::Le)))]).unwrap();
        assert!(ConstraintUnion::union_equal_1d(&c, &c.clone(), 0).unwrap());
    }

    #[test]
    fn residual_dimensions_are_rejected() {
        let s = d_space();
        let p = Polyhedron::from_inequalities(
            &s,
            [Inequality::compare(LinearTerm::var(0), Cmp::Le, LinearTerm::var(1))],
        )
        .unwrap();
        let u = ConstraintUnion::from_disjuncts(&s, [p]).unwrap();
        assert!(matches!(u.to_duration_set(0), Err(PolyError::ResidualDimensions { .. })));
    }
}
