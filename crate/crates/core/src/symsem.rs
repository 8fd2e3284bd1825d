//! Parametric zone graph and reachability synthesis.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::model::{Edge, LocId, Pta};
use crate::rational::Rational;
use crate::poly::{ApproxRows, Bounds, ConstraintUnion, Dim, Inequality, LinearTerm, Polyhedron, Relation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymError {
    #[error("exploration budget must be at least 1")]
    ZeroBudget,
    #[error("the initial invariant excludes the origin")]
    EmptyInitialZone,
}

#[derive(Debug, Clone)]
pub struct SymbolicState {
    pub location: LocId,
    pub discretes: Vec<i64>,
    pub zone: Polyhedron,
}

/// Clocks at zero, elapsed unless the initial location is urgent, within the
/// initial invariant.
pub fn initial_state(a: &Pta) -> Result<SymbolicState, SymError> {
    let clocks = a.clocks();
    let mut zone = Polyhedron::universe(&a.space);
    for &c in &clocks {
        zone = zone
            .with(&Inequality::new(LinearTerm::var(c), Relation::Eq))
            .expect("clock of the model space");
    }
    let inv = &a.locations[a.initial].invariant;
    zone = zone.intersect(inv).expect("same space");
    if !a.locations[a.initial].urgent {
        zone = zone.time_elapse(&clocks).intersect(inv).expect("same space");
    }
    if !zone.is_satisfiable() {
        return Err(SymError::EmptyInitialZone);
    }
    Ok(SymbolicState { location: a.initial, discretes: a.initial_discretes(), zone })
}

/// Successor of `s` through `e`, or `None` when the edge cannot fire.
pub fn succ(a: &Pta, s: &SymbolicState, e: &Edge) -> Option<SymbolicState> {
    if e.source != s.location || !e.discrete_guard.iter().all(|g| g.holds(&s.discretes)) {
        return None;
    }
    let guarded = s.zone.intersect(&e.guard).expect("same space");
    if !guarded.is_satisfiable() {
        return None;
    }
    let resets: Vec<Dim> = e.resets.iter().copied().collect();
    let target = &a.locations[e.target];
    let mut zone = guarded.reset(&resets).intersect(&target.invariant).expect("same space");
    if !target.urgent {
        zone = zone.time_elapse(&a.clocks()).intersect(&target.invariant).expect("same space");
    }
    if !zone.is_satisfiable() {
        return None;
    }
    let mut discretes = s.discretes.clone();
    for (&v, &x) in &e.updates {
        discretes[v] = x;
    }
    Some(SymbolicState { location: e.target, discretes, zone })
}

#[derive(Debug, Clone)]
pub struct ExplorationOptions {
    /// Maximal number of symbolic states kept.
    pub budget: usize,
    pub subsumption: bool,
    /// Stop as soon as one goal state is found.
    pub first_goal_only: bool,
}

impl Default for ExplorationOptions {
    fn default() -> Self {
        ExplorationOptions { budget: 100_000, subsumption: true, first_goal_only: false }
    }
}

impl ExplorationOptions {
    pub fn with_budget(budget: usize) -> Self {
        ExplorationOptions { budget, ..Self::default() }
    }
}

#[derive(Debug, Clone)]
pub struct ExplorationResult {
    /// Union of the goal zones with every clock eliminated.
    pub constraint: ConstraintUnion,
    pub complete: bool,
    pub states_explored: usize,
    pub frontier_truncated: bool,
}

/// Breadth-first reachability synthesis of the valuations reaching a goal.
/// Goal states are not expanded.
pub fn efsynth(
    a: &Pta,
    goal: impl Fn(LocId, &[i64]) -> bool,
    opts: &ExplorationOptions,
) -> Result<ExplorationResult, SymError> {
    efsynth_pruned(a, goal, |_, _| false, opts)
}

/// As [`efsynth`], additionally never expanding states matching `prune`.
pub fn efsynth_pruned(
    a: &Pta,
    goal: impl Fn(LocId, &[i64]) -> bool,
    prune: impl Fn(LocId, &[i64]) -> bool,
    opts: &ExplorationOptions,
) -> Result<ExplorationResult, SymError> {
    if opts.budget == 0 {
        return Err(SymError::ZeroBudget);
    }
    let clocks = a.clocks();
    let mut out_edges: Vec<Vec<&Edge>> = vec![Vec::new(); a.locations.len()];
    for e in &a.edges {
        out_edges[e.source].push(e);
    }
    let mut store = Store::new(a.space.len(), opts.subsumption);
    let mut constraint = ConstraintUnion::falsum(&a.space);
    let mut queue = VecDeque::new();

    let init = initial_state(a)?;
    store.insert(&init);
    queue.push_back(init);
    let mut truncated = false;

    'search: while let Some(s) = queue.pop_front() {
        if goal(s.location, &s.discretes) {
            constraint.push(s.zone.eliminate(&clocks)).expect("same space");
            if opts.first_goal_only {
                break;
            }
            continue;
        }
        if prune(s.location, &s.discretes) {
            continue;
        }
        for e in &out_edges[s.location] {
            let Some(next) = succ(a, &s, e) else { continue };
            if store.subsumed(&next) {
                continue;
            }
            if store.len() >= opts.budget {
                truncated = true;
                break 'search;
            }
            store.insert(&next);
            queue.push_back(next);
        }
    }
    Ok(ExplorationResult {
        constraint,
        complete: !truncated,
        states_explored: store.len(),
        frontier_truncated: truncated,
    })
}

/// Kept states grouped by location and discrete valuation. Inclusion is
/// tested exactly only after two cheap filters: a point of the new zone
/// must lie in the kept zone, and per-dimension bounds must nest.
struct Store {
    dims: usize,
    subsumption: bool,
    count: usize,
    kept: HashMap<(LocId, Vec<i64>), Vec<Kept>>,
}

struct Kept {
    zone: Polyhedron,
    approx: ApproxRows,
    boxes: Vec<Bounds>,
}

impl Store {
    fn new(dims: usize, subsumption: bool) -> Self {
        Store { dims, subsumption, count: 0, kept: HashMap::new() }
    }

    fn len(&self) -> usize {
        self.count
    }

    fn boxes(&self, zone: &Polyhedron) -> Vec<Bounds> {
        (0..self.dims).map(|d| zone.bounds(d)).collect()
    }

    fn subsumed(&self, s: &SymbolicState) -> bool {
        if !self.subsumption {
            return false;
        }
        let Some(bucket) = self.kept.get(&(s.location, s.discretes.clone())) else { return false };
        let Some(point) = s.zone.sample_point() else { return true };
        let approx: Vec<f64> = point.iter().map(Rational::to_f64).collect();
        let mut candidates = bucket
            .iter()
            .filter(|k| k.approx.may_contain(&approx) && k.zone.contains_point(&point))
            .peekable();
        if candidates.peek().is_none() {
            return false;
        }
        let boxes = self.boxes(&s.zone);
        candidates.any(|k| k.boxes.iter().zip(&boxes).all(|(outer, inner)| outer.contains(inner)) && k.zone.includes(&s.zone))
    }

    fn insert(&mut self, s: &SymbolicState) {
        self.count += 1;
        if !self.subsumption {
            return;
        }
        let kept = Kept { zone: s.zone.clone(), approx: s.zone.approx(), boxes: self.boxes(&s.zone) };
        self.kept.entry((s.location, s.discretes.clone())).or_default().push(kept);
    }
}
