//! Integer-normalized constraint rows and Fourier–Motzkin elimination.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{Inequality, LinearTerm, Relation};
use crate::rational::{lcm_of_denominators, Rational};

/// `coeffs · v + constant ⋈ 0` with integer entries of gcd 1. Equalities are
/// further normalized so the first nonzero coefficient is positive.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct Row {
    pub coeffs: Vec<BigInt>,
    pub constant: BigInt,
    pub rel: Relation,
}

/// Outcome of adding a row to a conjunction.
#[derive(Debug, PartialEq, Eq)]
pub(crate) enum Insert {
    Kept,
    Contradiction,
}

impl Row {
    pub fn new(coeffs: Vec<BigInt>, constant: BigInt, rel: Relation) -> Row {
        let mut row = Row { coeffs, constant, rel };
        row.normalize();
        row
    }

    pub fn from_inequality(ineq: &Inequality, width: usize) -> Row {
        let term = &ineq.term;
        let lcm = lcm_of_denominators(term.coeffs().values().chain([term.constant_part()]));
        let scale = Rational::from_integer(lcm);
        let mut coeffs = vec![BigInt::zero(); width];
        for (d, c) in term.coeffs() {
            coeffs[*d] = (c * &scale).numer().clone();
        }
        let constant = (term.constant_part() * &scale).numer().clone();
        Row::new(coeffs, constant, ineq.relation)
    }

    pub fn to_inequality(&self) -> Inequality {
        let mut term = LinearTerm::constant(Rational::from_integer(self.constant.clone()));
        for (d, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                term = term.plus(d, Rational::from_integer(c.clone()));
            }
        }
        Inequality::new(term, self.rel)
    }

    fn normalize(&mut self) {
        let g = self
            .coeffs
            .iter()
            .chain([&self.constant])
            .fold(BigInt::zero(), |g, c| g.gcd(c));
        if !g.is_zero() && !g.is_one() {
            for c in &mut self.coeffs {
                *c /= &g;
            }
            self.constant /= &g;
        }
        if self.rel == Relation::Eq {
            let lead = self
                .coeffs
                .iter()
                .find(|c| !c.is_zero())
                .unwrap_or(&self.constant);
            if lead.is_negative() {
                self.negate_in_place();
            }
        }
    }

    fn negate_in_place(&mut self) {
        for c in &mut self.coeffs {
            *c = -&*c;
        }
        self.constant = -&self.constant;
    }

    pub fn is_ground(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Truth value of a ground row.
    pub fn ground_holds(&self) -> bool {
        self.rel.holds(&Rational::from_integer(self.constant.clone()))
    }

    pub fn falsum(width: usize) -> Row {
        Row { coeffs: vec![BigInt::zero(); width], constant: BigInt::one(), rel: Relation::Le }
    }

    pub fn holds_at(&self, point: &[Rational]) -> bool {
        let mut acc = Rational::from_integer(self.constant.clone());
        for (c, v) in self.coeffs.iter().zip(point) {
            if !c.is_zero() {
                acc = acc + &(Rational::from_integer(c.clone()) * v);
            }
        }
        self.rel.holds(&acc)
    }

    /// The rows whose disjunction is the complement of this row.
    pub fn negations(&self) -> Vec<Row> {
        let neg = |rel| {
            let mut r = self.clone();
            r.negate_in_place();
            r.rel = rel;
            r.normalize();
            r
        };
        match self.rel {
            Relation::Lt => vec![neg(Relation::Le)],
            Relation::Le => vec![neg(Relation::Lt)],
            Relation::Eq => {
                let mut lt = self.clone();
                lt.rel = Relation::Lt;
                vec![lt, neg(Relation::Lt)]
            }
        }
    }

    /// `self` alone implies `other`.
    pub fn implies(&self, other: &Row) -> bool {
        if self.coeffs == other.coeffs {
            return match (self.rel, other.rel) {
                (Relation::Eq, Relation::Eq) => self.constant == other.constant,
                (Relation::Eq, r) => r.holds(&Rational::from_integer(&other.constant - &self.constant)),
                (_, Relation::Eq) => false,
                (a, b) => tighter_or_equal(&self.constant, a, &other.constant, b),
            };
        }
        if self.rel == Relation::Eq && other.rel != Relation::Eq && is_negation(&self.coeffs, &other.coeffs) {
            // other: -a·v + c2 ⋈ 0 with a·v = -c1
            return other.rel.holds(&Rational::from_integer(&other.constant + &self.constant));
        }
        false
    }

    fn width(&self) -> usize {
        self.coeffs.len()
    }

    pub fn support_size(&self) -> usize {
        self.coeffs.iter().filter(|c| !c.is_zero()).count()
    }
}

/// For `a·v + c1 ⋈1 0` vs `a·v + c2 ⋈2 0`: does the first imply the second?
fn tighter_or_equal(c1: &BigInt, r1: Relation, c2: &BigInt, r2: Relation) -> bool {
    match c1.cmp(c2) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => r1 == Relation::Lt || r2 == Relation::Le,
    }
}

fn is_negation(a: &[BigInt], b: &[BigInt]) -> bool {
    a.iter().zip(b).all(|(x, y)| *x == -y) && a.iter().any(|x| !x.is_zero())
}

/// Conjoins `row` into `rows`, dropping it or an existing row when one implies
/// the other, and merging opposite non-strict bounds into an equality.
#[allow(clippy::needless_range_loop)]
pub(crate) fn insert(rows: &mut Vec<Row>, row: Row) -> Insert {
    if row.is_ground() {
        return if row.ground_holds() { Insert::Kept } else { Insert::Contradiction };
    }
    for i in 0..rows.len() {
        let r = &rows[i];
        if r.coeffs == row.coeffs {
            match (r.rel, row.rel) {
                (Relation::Eq, Relation::Eq) => {
                    return if r.constant == row.constant { Insert::Kept } else { Insert::Contradiction };
                }
                (Relation::Eq, rel) => {
                    let v = Rational::from_integer(&row.constant - &r.constant);
                    return if rel.holds(&v) { Insert::Kept } else { Insert::Contradiction };
                }
                (rel, Relation::Eq) => {
                    let v = Rational::from_integer(&r.constant - &row.constant);
                    if !rel.holds(&v) {
                        return Insert::Contradiction;
                    }
                    rows[i] = row;
                    return Insert::Kept;
                }
                (a, b) => {
                    if !tighter_or_equal(&r.constant, a, &row.constant, b) {
                        rows[i] = row;
                    }
                    return Insert::Kept;
                }
            }
        }
        if is_negation(&r.coeffs, &row.coeffs) {
            // a·v + c1 ⋈ 0 and -a·v + c2 ⋈ 0 require c1 + c2 ⋈ 0.
            let sum = &r.constant + &row.constant;
            let strict = r.rel == Relation::Lt || row.rel == Relation::Lt;
            match (r.rel, row.rel) {
                (Relation::Eq, rel) | (rel, Relation::Eq) => {
                    let _ = rel;
                    let combined = if strict { Relation::Lt } else { Relation::Le };
                    if !combined.holds(&Rational::from_integer(sum)) {
                        return Insert::Contradiction;
                    }
                    if r.rel == Relation::Eq {
                        return Insert::Kept;
                    }
                    let mut eq = row;
                    eq.normalize();
                    rows[i] = eq;
                    return Insert::Kept;
                }
                _ => {
                    let combined = if strict { Relation::Lt } else { Relation::Le };
                    if !combined.holds(&Rational::from_integer(sum.clone())) {
                        return Insert::Contradiction;
                    }
                    if sum.is_zero() {
                        // both non-strict: the pair pins an equality
                        let mut eq = rows[i].clone();
                        eq.rel = Relation::Eq;
                        eq.normalize();
                        rows[i] = eq;
                        return Insert::Kept;
                    }
                }
            }
        }
    }
    rows.push(row);
    Insert::Kept
}

/// Builds a pruned conjunction, or `None` when contradictory.
pub(crate) fn conjoin(rows: impl IntoIterator<Item = Row>) -> Option<Vec<Row>> {
    let mut out = Vec::new();
    for r in rows {
        if insert(&mut out, r) == Insert::Contradiction {
            return None;
        }
    }
    Some(out)
}

fn combine(p: &Row, kp: &BigInt, q: &Row, kq: &BigInt, rel: Relation) -> Row {
    let coeffs = p
        .coeffs
        .iter()
        .zip(&q.coeffs)
        .map(|(a, b)| a * kp + b * kq)
        .collect();
    Row::new(coeffs, &p.constant * kp + &q.constant * kq, rel)
}

/// Existentially eliminates column `col`.
pub(crate) fn eliminate_column(rows: Vec<Row>, col: usize) -> Option<Vec<Row>> {
    if rows.iter().all(|r| r.coeffs[col].is_zero()) {
        return Some(rows);
    }
    // Prefer substitution through an equality.
    let eq_idx = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| r.rel == Relation::Eq && !r.coeffs[col].is_zero())
        .min_by_key(|(_, r)| r.support_size())
        .map(|(i, _)| i);
    if let Some(ei) = eq_idx {
        let eq = rows[ei].clone();
        let a = eq.coeffs[col].clone();
        let a_abs = a.abs();
        let mut out = Vec::with_capacity(rows.len());
        for (i, r) in rows.into_iter().enumerate() {
            if i == ei {
                continue;
            }
            let b = r.coeffs[col].clone();
            let new = if b.is_zero() {
                r
            } else {
                // |a|·r − sign(a)·b·eq cancels the column
                let k = if a.is_negative() { b } else { -b };
                combine(&r, &a_abs, &eq, &k, r.rel)
            };
            if insert(&mut out, new) == Insert::Contradiction {
                return None;
            }
        }
        return Some(out);
    }
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut out = Vec::new();
    for r in rows {
        match r.coeffs[col].sign() {
            num_bigint::Sign::Plus => pos.push(r),
            num_bigint::Sign::Minus => neg.push(r),
            num_bigint::Sign::NoSign => {
                if insert(&mut out, r) == Insert::Contradiction {
                    return None;
                }
            }
        }
    }
    for p in &pos {
        let a = &p.coeffs[col];
        for q in &neg {
            let b = -&q.coeffs[col];
            let rel = if p.rel == Relation::Lt || q.rel == Relation::Lt {
                Relation::Lt
            } else {
                Relation::Le
            };
            if insert(&mut out, combine(p, &b, q, a, rel)) == Insert::Contradiction {
                return None;
            }
        }
    }
    Some(out)
}

/// Eliminates every column in `cols`, choosing at each step the column whose
/// elimination creates the fewest new rows.
pub(crate) fn eliminate_columns(mut rows: Vec<Row>, cols: &[usize]) -> Option<Vec<Row>> {
    let mut todo: Vec<usize> = cols.to_vec();
    while !todo.is_empty() {
        let (pick, _) = todo
            .iter()
            .enumerate()
            .map(|(i, &c)| (i, elimination_cost(&rows, c)))
            .min_by_key(|&(_, cost)| cost)
            .expect("nonempty");
        let col = todo.swap_remove(pick);
        rows = eliminate_column(rows, col)?;
    }
    Some(rows)
}

fn elimination_cost(rows: &[Row], col: usize) -> usize {
    let mut pos = 0usize;
    let mut neg = 0usize;
    for r in rows {
        if r.coeffs[col].is_zero() {
            continue;
        }
        if r.rel == Relation::Eq {
            return 0;
        }
        if r.coeffs[col].is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
    }
    // net change in row count
    (pos * neg + rows.len()).saturating_sub(pos + neg)
}

/// Satisfiability of a conjunction over the reals, strictness respected.
pub(crate) fn satisfiable(rows: &[Row]) -> bool {
    let Some(first) = rows.first() else { return true };
    let width = first.width();
    let cols: Vec<usize> = (0..width)
        .filter(|&c| rows.iter().any(|r| !r.coeffs[c].is_zero()))
        .collect();
    let Some(start) = conjoin(rows.iter().cloned()) else { return false };
    eliminate_columns(start, &cols).is_some()
}

/// A point of the conjunction, found by eliminating every column and
/// choosing values back in reverse order. `None` when unsatisfiable.
pub(crate) fn sample_point(rows: &[Row], width: usize) -> Option<Vec<Rational>> {
    let mut cur = conjoin(rows.iter().cloned())?;
    let mut todo: Vec<usize> = (0..width).filter(|&c| cur.iter().any(|r| !r.coeffs[c].is_zero())).collect();
    let mut stages = Vec::with_capacity(todo.len());
    while !todo.is_empty() {
        let (pick, _) = todo
            .iter()
            .enumerate()
            .map(|(i, &c)| (i, elimination_cost(&cur, c)))
            .min_by_key(|&(_, cost)| cost)
            .expect("nonempty");
        let col = todo.swap_remove(pick);
        let next = eliminate_column(cur.clone(), col)?;
        stages.push((col, cur));
        cur = next;
    }
    let mut point = vec![Rational::zero(); width];
    for (col, rows) in stages.iter().rev() {
        let mut lo: Option<Rational> = None;
        let mut hi: Option<Rational> = None;
        let mut fixed = None;
        for r in rows {
            let a = &r.coeffs[*col];
            if a.is_zero() {
                continue;
            }
            point[*col] = Rational::zero();
            let rest = r
                .coeffs
                .iter()
                .zip(&point)
                .filter(|(c, _)| !c.is_zero())
                .fold(Rational::from_integer(r.constant.clone()), |acc, (c, v)| acc + &(Rational::from_integer(c.clone()) * v));
            // a·x + rest ⋈ 0
            let bound = -rest / Rational::from_integer(a.clone());
            match (r.rel, a.is_positive()) {
                (Relation::Eq, _) => fixed = Some(bound),
                (_, true) => hi = Some(hi.map_or(bound.clone(), |h| if bound < h { bound.clone() } else { h })),
                (_, false) => lo = Some(lo.map_or(bound.clone(), |l| if bound > l { bound.clone() } else { l })),
            }
        }
        point[*col] = match (fixed, lo, hi) {
            (Some(v), _, _) => v,
            (None, Some(l), Some(h)) => (l + &h) / Rational::from_integer(2),
            (None, Some(l), None) => l + &Rational::one(),
            (None, None, Some(h)) => h - &Rational::one(),
            (None, None, None) => Rational::zero(),
        };
    }
    Some(point)
}

/// Drops every row implied by the remaining ones.
pub(crate) fn remove_redundant(mut rows: Vec<Row>) -> Vec<Row> {
    let mut i = 0;
    while i < rows.len() {
        let candidate = rows.remove(i);
        let implied = candidate.negations().into_iter().all(|n| {
            let mut probe = rows.clone();
            insert(&mut probe, n) == Insert::Contradiction || !satisfiable(&probe)
        });
        if !implied {
            rows.insert(i, candidate);
            i += 1;
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(c: &[i64], k: i64, rel: Relation) -> Row {
        Row::new(c.iter().map(|&x| BigInt::from(x)).collect(), BigInt::from(k), rel)
    }

    #[test]
    fn normalization_divides_gcd_and_orients_equalities() {
        let r = row(&[2, -4], 6, Relation::Le);
        assert_eq!(r, row(&[1, -2], 3, Relation::Le));
        let e = row(&[-2, 4], 6, Relation::Eq);
        assert_eq!(e.coeffs, vec![BigInt::from(1), BigInt::from(-2)]);
        assert_eq!(e.constant, BigInt::from(-3));
    }

    #[test]
    fn opposite_bounds_merge_to_equality() {
        // x - 1 <= 0 and -x + 1 <= 0
        let rows = conjoin([row(&[1], -1, Relation::Le), row(&[-1], 1, Relation::Le)]).unwrap();
        assert_eq!(rows, vec![row(&[1], -1, Relation::Eq)]);
    }

    #[test]
    fn strict_opposite_bounds_contradict() {
        assert!(conjoin([row(&[1], -1, Relation::Lt), row(&[-1], 1, Relation::Le)]).is_none());
    }

    #[test]
    fn strictness_survives_combination() {
        // 0 < x, x <= y  |- eliminate x |- 0 < y
        let rows = vec![row(&[-1, 0], 0, Relation::Lt), row(&[1, -1], 0, Relation::Le)];
        let out = eliminate_column(rows, 0).unwrap();
        assert_eq!(out, vec![row(&[0, -1], 0, Relation::Lt)]);
    }

    #[test]
    fn sample_point_respects_strict_bounds() {
        // 0 < x < y <= 1
        let rows = vec![row(&[-1, 0], 0, Relation::Lt), row(&[1, -1], 0, Relation::Lt), row(&[0, 1], -1, Relation::Le)];
        let p = sample_point(&rows, 2).unwrap();
        assert!(rows.iter().all(|r| r.holds_at(&p)), "{p:?}");
        assert!(sample_point(&[row(&[1], 0, Relation::Lt), row(&[-1], 0, Relation::Le)], 1).is_none());
    }

    #[test]
    fn redundant_rows_removed() {
        // x <= 1, x <= 2, x + y <= 3, y <= 1
        let rows = vec![
            row(&[1, 0], -1, Relation::Le),
            row(&[1, 0], -2, Relation::Lt),
            row(&[1, 1], -3, Relation::Le),
            row(&[0, 1], -1, Relation::Le),
        ];
        let out = remove_redundant(rows);
        assert_eq!(out, vec![row(&[1, 0], -1, Relation::Le), row(&[0, 1], -1, Relation::Le)]);
    }
}
