//! Canonical finite unions of disjoint rational intervals over `[0, ∞)`.

use std::cmp::Ordering;
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::rational::Rational;

/// A nonempty interval with a finite lower end and a possibly infinite upper
/// end (`hi == None`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: Rational,
    pub lo_closed: bool,
    pub hi: Option<Rational>,
    pub hi_closed: bool,
}

impl Interval {
    /// Returns `None` for an empty interval.
    pub fn new(lo: Rational, lo_closed: bool, hi: Option<Rational>, hi_closed: bool) -> Option<Interval> {
        let hi_closed = hi_closed && hi.is_some();
        let nonempty = match &hi {
            None => true,
            Some(h) => lo < *h || (lo == *h && lo_closed && hi_closed),
        };
        nonempty.then_some(Interval { lo, lo_closed, hi, hi_closed })
    }

    pub fn closed(lo: impl Into<Rational>, hi: impl Into<Rational>) -> Interval {
        Interval::new(lo.into(), true, Some(hi.into()), true).expect("lo <= hi")
    }

    pub fn point(v: impl Into<Rational>) -> Interval {
        let v = v.into();
        Interval::new(v.clone(), true, Some(v), true).expect("point")
    }

    pub fn contains(&self, v: &Rational) -> bool {
        let above = *v > self.lo || (*v == self.lo && self.lo_closed);
        let below = match &self.hi {
            None => true,
            Some(h) => v < h || (v == h && self.hi_closed),
        };
        above && below
    }

    pub fn is_point(&self) -> bool {
        self.hi.as_ref() == Some(&self.lo)
    }

    fn intersect(&self, other: &Interval) -> Option<Interval> {
        let (lo, lo_closed) = match self.lo.cmp(&other.lo) {
            Ordering::Greater => (self.lo.clone(), self.lo_closed),
            Ordering::Less => (other.lo.clone(), other.lo_closed),
            Ordering::Equal => (self.lo.clone(), self.lo_closed && other.lo_closed),
        };
        let (hi, hi_closed) = match (&self.hi, &other.hi) {
            (None, None) => (None, false),
            (Some(h), None) => (Some(h.clone()), self.hi_closed),
            (None, Some(h)) => (Some(h.clone()), other.hi_closed),
            (Some(a), Some(b)) => match a.cmp(b) {
                Ordering::Less => (Some(a.clone()), self.hi_closed),
                Ordering::Greater => (Some(b.clone()), other.hi_closed),
                Ordering::Equal => (Some(a.clone()), self.hi_closed && other.hi_closed),
            },
        };
        Interval::new(lo, lo_closed, hi, hi_closed)
    }

    /// Whether `next` (starting no earlier) touches or overlaps `self` so that
    /// their union is an interval.
    fn joins(&self, next: &Interval) -> bool {
        match &self.hi {
            None => true,
            Some(h) => next.lo < *h || (next.lo == *h && (self.hi_closed || next.lo_closed)),
        }
    }

    fn start_key(&self) -> (Rational, bool) {
        (self.lo.clone(), !self.lo_closed)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_point() {
            return write!(f, "{{{}}}", self.lo);
        }
        let open = if self.lo_closed { '[' } else { '(' };
        match &self.hi {
            None => write!(f, "{open}{}, inf)", self.lo),
            Some(h) => {
                let close = if self.hi_closed { ']' } else { ')' };
                write!(f, "{open}{}, {h}{close}", self.lo)
            }
        }
    }
}

/// A set of durations: sorted, pairwise disjoint, maximally merged intervals
/// within `[0, ∞)`. Two sets are equal as point sets iff they are equal
/// structurally.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct DurationSet {
    intervals: Vec<Interval>,
}

impl DurationSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// `[0, ∞)`.
    pub fn all() -> Self {
        Self::from_intervals([Interval::new(Rational::zero(), true, None, false).unwrap()])
    }

    pub fn from_intervals(intervals: impl IntoIterator<Item = Interval>) -> Self {
        let nonneg = Interval::new(Rational::zero(), true, None, false).unwrap();
        let mut items: Vec<Interval> = intervals.into_iter().filter_map(|i| i.intersect(&nonneg)).collect();
        items.sort_by_key(Interval::start_key);
        let mut merged: Vec<Interval> = Vec::with_capacity(items.len());
        for next in items {
            match merged.last_mut() {
                Some(cur) if cur.joins(&next) => {
                    let extend = match (&cur.hi, &next.hi) {
                        (None, _) => None,
                        (_, None) => Some((None, false)),
                        (Some(a), Some(b)) => match a.cmp(b) {
                            Ordering::Less => Some((Some(b.clone()), next.hi_closed)),
                            Ordering::Equal => Some((Some(a.clone()), cur.hi_closed || next.hi_closed)),
                            Ordering::Greater => None,
                        },
                    };
                    if let Some((hi, hi_closed)) = extend {
                        cur.hi = hi;
                        cur.hi_closed = hi_closed;
                    }
                }
                _ => merged.push(next),
            }
        }
        DurationSet { intervals: merged }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, v: &Rational) -> bool {
        self.intervals.iter().any(|i| i.contains(v))
    }

    pub fn union(&self, other: &DurationSet) -> DurationSet {
        Self::from_intervals(self.intervals.iter().chain(&other.intervals).cloned())
    }

    pub fn intersection(&self, other: &DurationSet) -> DurationSet {
        let mut out = Vec::new();
        for a in &self.intervals {
            for b in &other.intervals {
                if let Some(i) = a.intersect(b) {
                    out.push(i);
                }
            }
        }
        Self::from_intervals(out)
    }

    pub fn is_subset(&self, other: &DurationSet) -> bool {
        self.intersection(other) == *self
    }
}

impl fmt::Display for DurationSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return write!(f, "{{}}");
        }
        for (i, iv) in self.intervals.iter().enumerate() {
            if i > 0 {
                write!(f, " U ")?;
            }
            write!(f, "{iv}")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct IntervalRepr {
    lo: Rational,
    lo_closed: bool,
    hi: String,
    hi_closed: bool,
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        IntervalRepr {
            lo: self.lo.clone(),
            lo_closed: self.lo_closed,
            hi: self.hi.as_ref().map_or_else(|| "inf".to_string(), ToString::to_string),
            hi_closed: self.hi_closed,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = IntervalRepr::deserialize(d)?;
        let hi = if r.hi == "inf" { None } else { Some(r.hi.parse().map_err(D::Error::custom)?) };
        Interval::new(r.lo, r.lo_closed, hi, r.hi_closed).ok_or_else(|| D::Error::custom("empty interval"))
    }
}

impl Serialize for DurationSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.intervals.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DurationSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<Interval>::deserialize(d)?;
        Ok(DurationSet::from_intervals(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn overlapping_intervals_merge() {
        let a = DurationSet::from_intervals([
            Interval::closed(1024, 1029),
            Interval::closed(q("1026.048"), 1034),
        ]);
        assert_eq!(a, DurationSet::from_intervals([Interval::closed(1024, 1034)]));
    }

    #[test]
    fn touching_open_endpoints_do_not_merge() {
        let left = Interval::new(q("0"), true, Some(q("1")), false).unwrap();
        let right = Interval::new(q("1"), false, Some(q("2")), true).unwrap();
        let s = DurationSet::from_intervals([left.clone(), right.clone()]);
        assert_eq!(s.intervals().len(), 2);
        assert!(!s.contains(&q("1")));
        let closed_right = Interval::new(q("1"), true, Some(q("2")), true).unwrap();
        assert_eq!(DurationSet::from_intervals([left, closed_right]).intervals().len(), 1);
    }

    #[test]
    fn intersection_of_running_example_sets() {
        let privs = DurationSet::from_intervals([Interval::closed(1, 3)]);
        let pubs = DurationSet::from_intervals([Interval::closed(2, 3)]);
        assert_eq!(privs.intersection(&pubs), pubs);
        assert_ne!(privs, pubs);
        let v1 = DurationSet::from_intervals([Interval::closed(1024, 1029)]);
        let v2 = DurationSet::from_intervals([Interval::closed(2048, 2053)]);
        assert!(v1.intersection(&v2).is_empty());
    }

    #[test]
    fn unbounded_open_interval_displays_and_serializes() {
        let s = DurationSet::from_intervals([Interval::new(q("30"), false, None, false).unwrap()]);
        assert_eq!(s.to_string(), "(30, inf)");
    }

    #[test]
    fn negative_parts_are_clipped() {
        let s = DurationSet::from_intervals([Interval::closed(-2, 1)]);
        assert_eq!(s, DurationSet::from_intervals([Interval::closed(0, 1)]));
    }

    #[test]
    fn subset_and_points() {
        let big = DurationSet::from_intervals([Interval::closed(q("1026.048"), 1034)]);
        assert!(DurationSet::from_intervals([Interval::closed(1027, 1030)]).is_subset(&big));
        assert!(DurationSet::empty().is_subset(&big));
        assert!(!DurationSet::from_intervals([Interval::point(1024)]).is_subset(&big));
    }
}
