#![allow(dead_code)]

pub mod fm;
pub mod gen;

use std::collections::BTreeMap;
use std::path::PathBuf;

use topaz_core::model::{ParamValuation, Pta};
use topaz_core::opacity::OpacitySpec;
use topaz_core::poly::{DurationSet, Interval};
use topaz_core::syntax::{load_model, ModelFile};
use topaz_core::Rational;

pub const MODELS: [&str; 8] = ["fig1", "fig2", "fig4", "fig7", "fig8", "fig9", "fig11", "lu_privdead"];

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn source(name: &str) -> String {
    std::fs::read_to_string(corpus_dir().join(format!("{name}.pta"))).expect("corpus model")
}

pub fn load(name: &str) -> (ModelFile, Pta) {
    load_model(&source(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn q(s: &str) -> Rational {
    s.parse().unwrap()
}

pub fn valuation(pairs: &[(&str, &str)]) -> ParamValuation {
    pairs.iter().map(|(n, v)| (n.to_string(), q(v))).collect::<BTreeMap<_, _>>()
}

pub fn spec(name: &str, pairs: &[(&str, &str)]) -> OpacitySpec {
    let s = OpacitySpec::from_model(load(name).1).unwrap();
    if pairs.is_empty() {
        s
    } else {
        s.with_valuation(valuation(pairs))
    }
}

pub fn closed(a: &str, b: &str) -> DurationSet {
    DurationSet::from_intervals([Interval::closed(q(a), q(b))])
}

pub fn from(lo: &str, lo_closed: bool) -> DurationSet {
    DurationSet::from_intervals([Interval::new(q(lo), lo_closed, None, false).unwrap()])
}

/// Bundled models at the valuations used throughout the suites.
pub const FIXED: &[(&str, &[(&str, &str)])] = &[
    ("fig1", &[("p1", "1"), ("p2", "2")]),
    ("fig1", &[("p1", "1.5"), ("p2", "1.5")]),
    ("fig2", &[]),
    ("fig7", &[("epsilon", "1"), ("p", "2")]),
    ("fig7", &[("epsilon", "2"), ("p", "1.002")]),
    ("fig8", &[("p", "0.5")]),
    ("fig8", &[("p", "1")]),
    ("fig8", &[("p", "2")]),
    ("fig9", &[("p", "2")]),
    ("fig11", &[]),
    ("lu_privdead", &[("p", "1"), ("q", "5")]),
];

/// The automaton of `name` with the given parameter values substituted.
pub fn valuated(name: &str, pairs: &[(&str, &str)]) -> Pta {
    topaz_core::model::valuate_partial(&load(name).1, &valuation(pairs)).unwrap()
}

/// `5ε+1024 ≥ p_abs ≥ 1024 ∧ 1024p+5ε ≥ p_abs ≥ 1024p ≥ 0`, in `space`.
pub fn fig7_expected(space: &topaz_core::poly::Space, p_abs: topaz_core::poly::Dim) -> topaz_core::poly::ConstraintUnion {
    use topaz_core::poly::{Cmp, ConstraintUnion, Inequality, LinearTerm as T, Polyhedron};
    let eps = space.index_of("epsilon").unwrap();
    let p = space.index_of("p").unwrap();
    let d = T::var(p_abs);
    let rows = [
        Inequality::compare(T::constant(1024).plus(eps, 5), Cmp::Ge, d.clone()),
        Inequality::compare(d.clone(), Cmp::Ge, T::constant(1024)),
        Inequality::compare(T::zero().plus(p, 1024).plus(eps, 5), Cmp::Ge, d.clone()),
        Inequality::compare(d, Cmp::Ge, T::zero().plus(p, 1024)),
        Inequality::compare(T::var(p), Cmp::Ge, T::zero()),
    ];
    ConstraintUnion::from_disjuncts(space, [Polyhedron::from_inequalities(space, rows).unwrap()]).unwrap()
}
