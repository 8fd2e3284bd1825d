//! Random polyhedra and the polyhedral properties checked on them.

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use topaz_core::poly::{Cmp, Dim, DimKind, DimSpace, Inequality, LinearTerm, Polyhedron, Space};
use topaz_core::Rational;

use super::fm;

pub const CLOCKS: [Dim; 2] = [0, 1];

pub fn space() -> Space {
    DimSpace::new([
        ("x", DimKind::Clock),
        ("y", DimKind::Clock),
        ("p", DimKind::TimingParameter),
        ("h", DimKind::DataParameter),
    ])
    .unwrap()
}

fn arb_cmp() -> impl Strategy<Value = Cmp> {
    prop_oneof![Just(Cmp::Lt), Just(Cmp::Le), Just(Cmp::Eq), Just(Cmp::Ge), Just(Cmp::Gt)]
}

fn arb_inequality() -> impl Strategy<Value = Inequality> {
    (proptest::collection::vec(-2i64..=2, 4), -4i64..=4, arb_cmp()).prop_map(|(cs, k, cmp)| {
        let mut term = LinearTerm::zero();
        for (d, c) in cs.into_iter().enumerate() {
            if c != 0 {
                term = term.plus(d, Rational::from(c));
            }
        }
        Inequality::compare(term, cmp, LinearTerm::constant(Rational::from(k)))
    })
}

/// Conjunctions of one to five small integer constraints.
pub fn arb_polyhedron() -> impl Strategy<Value = Polyhedron> {
    proptest::collection::vec(arb_inequality(), 1..=5)
        .prop_map(|ineqs| Polyhedron::from_inequalities(&space(), ineqs).unwrap())
}

/// Points on the half-integer grid, so that integer endpoints are hit.
pub fn arb_point() -> impl Strategy<Value = Vec<Rational>> {
    proptest::collection::vec((-8i64..=8).prop_map(|k| Rational::new(k, 2)), 4)
}

pub fn arb_dims() -> impl Strategy<Value = Vec<Dim>> {
    proptest::sample::subsequence(vec![0, 1, 2, 3], 1..=3)
}

pub fn arb_clocks() -> impl Strategy<Value = Vec<Dim>> {
    proptest::sample::subsequence(CLOCKS.to_vec(), 1..=2)
}

pub fn elapse_idempotent(p: &Polyhedron) -> Result<(), TestCaseError> {
    let once = p.time_elapse(&CLOCKS);
    let twice = once.time_elapse(&CLOCKS);
    prop_assert!(once.includes(p), "P not inside elapse(P): {p}");
    prop_assert!(once.equivalent(&twice), "elapse not idempotent on {p}: {once} vs {twice}");
    Ok(())
}

pub fn reset_idempotent(p: &Polyhedron, clocks: &[Dim]) -> Result<(), TestCaseError> {
    let once = p.reset(clocks);
    let twice = once.reset(clocks);
    prop_assert!(once.equivalent(&twice), "reset not idempotent on {p}: {once} vs {twice}");
    Ok(())
}

pub fn elimination_sound(p: &Polyhedron, dims: &[Dim], points: &[Vec<Rational>]) -> Result<(), TestCaseError> {
    let q = p.eliminate(dims);
    for v in points {
        prop_assert_eq!(q.contains_point(v), fm::in_projection(p, dims, v), "eliminate {:?} of {} at {:?}: {}", dims, p, v, q);
    }
    Ok(())
}

/// Membership of grid points agrees with the defining semantics of each
/// operation, which catches any strict bound turned non-strict.
pub fn strictness_preserved(p: &Polyhedron, clocks: &[Dim], points: &[Vec<Rational>]) -> Result<(), TestCaseError> {
    let elapsed = p.time_elapse(&CLOCKS);
    let reset = p.reset(clocks);
    for v in points {
        prop_assert_eq!(elapsed.contains_point(v), fm::in_elapse(p, &CLOCKS, v), "elapse of {} at {:?}: {}", p, v, elapsed);
        let mut r = v.clone();
        for &c in clocks {
            r[c] = Rational::zero();
        }
        prop_assert_eq!(reset.contains_point(&r), fm::in_reset(p, clocks, &r), "reset {:?} of {} at {:?}: {}", clocks, p, r, reset);
    }
    Ok(())
}
