use std::collections::{BTreeMap, BTreeSet};

use super::{Atom, AutomatonDecl, Expr, ModelFile, ParseError, Pos};
use crate::model::{merge_finals, synchronized_product, DiscreteAtom, Edge, Location, Pta};
use crate::poly::{DimKind, DimSpace, Inequality, LinearTerm, Polyhedron, Space};
use crate::rational::Rational;

pub(super) fn lower(m: &ModelFile) -> Result<Pta, ParseError> {
    let origin = Pos { line: 1, col: 1 };
    let mut seen = BTreeSet::new();
    let declared = m
        .clocks
        .iter()
        .chain(&m.parameters)
        .chain(&m.data_parameters)
        .chain(m.discretes.iter().map(|d| &d.name))
        .chain(&m.actions);
    for name in declared {
        if !seen.insert(name.clone()) {
            return Err(ParseError::at(origin, format!("duplicate identifier `{name}`")));
        }
    }
    for d in &m.discretes {
        if d.lo > d.hi || d.init < d.lo || d.init > d.hi {
            return Err(ParseError::at(origin, format!("empty domain or bad initial value for `{}`", d.name)));
        }
    }
    for a in &m.synchronize {
        if !m.actions.contains(a) {
            return Err(ParseError::at(origin, format!("unknown identifier `{a}` in synchronize")));
        }
    }
    if m.automata.is_empty() {
        return Err(ParseError::at(origin, "the model declares no automaton"));
    }
    let dims = m
        .clocks
        .iter()
        .map(|n| (n.clone(), DimKind::Clock))
        .chain(m.parameters.iter().map(|n| (n.clone(), DimKind::TimingParameter)))
        .chain(m.data_parameters.iter().map(|n| (n.clone(), DimKind::DataParameter)));
    let space = DimSpace::new(dims).map_err(|e| ParseError::at(origin, e.to_string()))?;
    let cx = Context { m, space };

    for b in &m.benches {
        for (name, _) in &b.valuation {
            if !cx.space.index_of(name).is_some_and(|d| cx.space.kind(d).is_parameter()) {
                return Err(ParseError::at(b.pos, format!("unknown identifier `{name}` in bench valuation")));
            }
        }
    }

    let mut automata = Vec::new();
    for a in &m.automata {
        automata.push(cx.automaton(a)?);
    }
    if automata.len() == 1 {
        return Ok(automata.pop().expect("one automaton"));
    }
    let sync: BTreeSet<String> = m.synchronize.iter().cloned().collect();
    synchronized_product(&automata, &sync).map_err(|e| ParseError::at(m.automata[0].pos, e.to_string()))
}

struct Context<'a> {
    m: &'a ModelFile,
    space: Space,
}

enum Lowered {
    Linear(Inequality),
    Discrete(DiscreteAtom),
}

impl Context<'_> {
    fn automaton(&self, a: &AutomatonDecl) -> Result<Pta, ParseError> {
        let mut ids = BTreeMap::new();
        for (i, l) in a.locations.iter().enumerate() {
            if ids.insert(l.name.clone(), i).is_some() {
                return Err(ParseError::at(l.pos, format!("duplicate location `{}`", l.name)));
            }
        }
        let inits: Vec<usize> = (0..a.locations.len()).filter(|&i| a.locations[i].init).collect();
        let initial = match inits.as_slice() {
            [i] => *i,
            [] => return Err(ParseError::at(a.pos, format!("automaton `{}` has no initial location", a.name))),
            [_, second, ..] => {
                return Err(ParseError::at(a.locations[*second].pos, "more than one initial location"));
            }
        };
        let mut locations = Vec::new();
        let mut edges = Vec::new();
        let mut actions = BTreeSet::new();
        for (i, l) in a.locations.iter().enumerate() {
            let mut invariant = Polyhedron::top(&self.space);
            for atom in &l.invariant {
                match self.atom(atom)? {
                    Lowered::Linear(ineq) => invariant = invariant.with(&ineq).expect("declared dimension"),
                    Lowered::Discrete(_) => {
                        return Err(ParseError::at(atom.pos, "invariants cannot test discrete variables"));
                    }
                }
            }
            locations.push(Location { name: l.name.clone(), invariant, urgent: l.urgent });
            for e in &l.edges {
                let target = *ids
                    .get(&e.target)
                    .ok_or_else(|| ParseError::at(e.pos, format!("unknown location `{}`", e.target)))?;
                let mut edge = Edge {
                    source: i,
                    target,
                    guard: Polyhedron::top(&self.space),
                    discrete_guard: Vec::new(),
                    action: None,
                    resets: BTreeSet::new(),
                    updates: BTreeMap::new(),
                };
                for atom in &e.guard {
                    match self.atom(atom)? {
                        Lowered::Linear(ineq) => edge.guard = edge.guard.with(&ineq).expect("declared dimension"),
                        Lowered::Discrete(d) => edge.discrete_guard.push(d),
                    }
                }
                if let Some((action, pos)) = &e.sync {
                    if !self.m.actions.contains(action) {
                        return Err(ParseError::at(*pos, format!("unknown identifier `{action}`")));
                    }
                    actions.insert(action.clone());
                    edge.action = Some(action.clone());
                }
                for asg in &e.assignments {
                    if let Some(d) = self.space.index_of(&asg.target).filter(|&d| self.space.kind(d) == DimKind::Clock) {
                        if asg.value != 0 {
                            return Err(ParseError::at(asg.pos, "clocks can only be reset to 0"));
                        }
                        edge.resets.insert(d);
                    } else if let Some(v) = self.m.discretes.iter().position(|d| d.name == asg.target) {
                        let var = &self.m.discretes[v];
                        if asg.value < var.lo || asg.value > var.hi {
                            return Err(ParseError::at(
                                asg.pos,
                                format!("value {} is outside the domain of `{}`", asg.value, var.name),
                            ));
                        }
                        edge.updates.insert(v, asg.value);
                    } else {
                        return Err(ParseError::at(asg.pos, format!("unknown identifier `{}`", asg.target)));
                    }
                }
                edges.push(edge);
            }
        }
        let finals: Vec<usize> = (0..a.locations.len()).filter(|&i| a.locations[i].is_final).collect();
        let pta = Pta {
            name: a.name.clone(),
            space: self.space.clone(),
            actions,
            locations,
            initial,
            final_loc: finals.first().copied(),
            private: (0..a.locations.len()).filter(|&i| a.locations[i].private).collect(),
            discretes: self.m.discretes.clone(),
            edges,
            enrichment: None,
        };
        if finals.len() > 1 {
            return merge_finals(&pta, &finals).map_err(|e| ParseError::at(a.pos, e.to_string()));
        }
        Ok(pta)
    }

    fn atom(&self, atom: &Atom) -> Result<Lowered, ParseError> {
        let mut diff = Expr::default();
        diff.add(&atom.lhs, &Rational::one());
        diff.add(&atom.rhs, &-Rational::one());
        let mut term = LinearTerm::constant(diff.constant.clone());
        let mut discrete: Option<(usize, Rational)> = None;
        let mut clocks = 0;
        for (name, c) in &diff.terms {
            if let Some(d) = self.space.index_of(name) {
                if self.space.kind(d) == DimKind::Clock {
                    clocks += 1;
                }
                term = term.plus(d, c.clone());
            } else if let Some(v) = self.m.discretes.iter().position(|d| &d.name == name) {
                discrete = Some((v, c.clone()));
            } else {
                return Err(ParseError::at(atom.pos, format!("unknown identifier `{name}`")));
            }
        }
        if let Some((var, c)) = discrete {
            if diff.terms.len() != 1 {
                return Err(ParseError::at(atom.pos, "discrete variables may only be compared to integers"));
            }
            // c·v + k ⋈ 0  ⇔  v ⋈' -k/c
            let value = -&diff.constant / &c;
            if !value.is_integer() {
                return Err(ParseError::at(atom.pos, "discrete variables may only be compared to integers"));
            }
            let value = i64::try_from(value.numer().clone())
                .map_err(|_| ParseError::at(atom.pos, "integer out of range"))?;
            let cmp = if c.is_negative() { atom.cmp.flip() } else { atom.cmp };
            return Ok(Lowered::Discrete(DiscreteAtom { var, cmp, value }));
        }
        if clocks > 1 {
            return Err(ParseError::at(atom.pos, "a constraint may mention at most one clock"));
        }
        Ok(Lowered::Linear(Inequality::compare(term, atom.cmp, LinearTerm::zero())))
    }
}
