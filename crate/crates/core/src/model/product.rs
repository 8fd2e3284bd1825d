use std::collections::{BTreeMap, BTreeSet};

use super::{DiscreteAtom, DiscreteVar, Edge, Enrichment, LocId, Location, ModelError, Pta};
use crate::poly::{Dim, DimKind, DimSpace, Polyhedron, Space};

/// Parallel composition: actions in `sync` fire jointly in every component
/// owning them, all other actions interleave. Dimensions and discrete
/// variables with equal names are shared.
pub fn synchronized_product(components: &[Pta], sync: &BTreeSet<String>) -> Result<Pta, ModelError> {
    if components.is_empty() {
        return Err(ModelError::EmptyProduct);
    }
    for a in sync {
        if !components.iter().any(|c| c.actions.contains(a)) {
            return Err(ModelError::UnownedSyncAction(a.clone()));
        }
    }
    let space = merged_space(components)?;
    let (discretes, dmaps) = merged_discretes(components)?;
    let maps: Vec<ComponentMap> = components
        .iter()
        .zip(dmaps)
        .map(|(c, discrete)| ComponentMap::new(c, &space, discrete))
        .collect::<Result<_, _>>()?;

    let sizes: Vec<usize> = components.iter().map(|c| c.locations.len()).collect();
    let total: usize = sizes.iter().product();
    let encode = |tuple: &[LocId]| tuple.iter().zip(&sizes).fold(0, |acc, (l, n)| acc * n + l);
    let decode = |mut id: usize| {
        let mut tuple = vec![0; sizes.len()];
        for i in (0..sizes.len()).rev() {
            tuple[i] = id % sizes[i];
            id /= sizes[i];
        }
        tuple
    };

    let mut locations = Vec::with_capacity(total);
    let mut private = BTreeSet::new();
    for id in 0..total {
        let tuple = decode(id);
        let mut invariant = Polyhedron::top(&space);
        let mut names = Vec::new();
        let mut urgent = false;
        for (i, &l) in tuple.iter().enumerate() {
            let loc = &components[i].locations[l];
            invariant = invariant.intersect(&maps[i].poly(&loc.invariant)?)?;
            names.push(loc.name.clone());
            urgent |= loc.urgent;
            if components[i].private.contains(&l) {
                private.insert(id);
            }
        }
        locations.push(Location { name: names.join("|"), invariant, urgent });
    }

    let mut edges = Vec::new();
    for id in 0..total {
        let tuple = decode(id);
        for (i, comp) in components.iter().enumerate() {
            for e in comp.edges.iter().filter(|e| e.source == tuple[i]) {
                if e.action.as_ref().is_some_and(|a| sync.contains(a)) {
                    continue;
                }
                let mut target = tuple.clone();
                target[i] = e.target;
                edges.push(maps[i].edge(e, id, encode(&target))?);
            }
        }
        for a in sync {
            let owners: Vec<usize> = (0..components.len()).filter(|&i| components[i].actions.contains(a)).collect();
            let choices: Vec<Vec<&Edge>> = owners
                .iter()
                .map(|&i| {
                    components[i]
                        .edges
                        .iter()
                        .filter(|e| e.source == tuple[i] && e.action.as_deref() == Some(a.as_str()))
                        .collect()
                })
                .collect();
            for combo in cartesian(&choices) {
                let mut target = tuple.clone();
                let mut joint = Edge {
                    source: id,
                    target: 0,
                    guard: Polyhedron::top(&space),
                    discrete_guard: Vec::new(),
                    action: Some(a.clone()),
                    resets: BTreeSet::new(),
                    updates: BTreeMap::new(),
                };
                for (&i, e) in owners.iter().zip(combo) {
                    target[i] = e.target;
                    let m = maps[i].edge(e, id, 0)?;
                    joint.guard = joint.guard.intersect(&m.guard)?;
                    joint.discrete_guard.extend(m.discrete_guard);
                    joint.resets.extend(m.resets);
                    joint.updates.extend(m.updates);
                }
                joint.target = encode(&target);
                edges.push(joint);
            }
        }
    }

    let initial = encode(&components.iter().map(|c| c.initial).collect::<Vec<_>>());
    let final_loc = components
        .iter()
        .map(|c| c.final_loc)
        .collect::<Option<Vec<_>>>()
        .map(|t| encode(&t));
    let enrichment = components
        .iter()
        .zip(&maps)
        .find_map(|(c, m)| c.enrichment.as_ref().map(|en| (en, m)))
        .map(|(en, m)| Enrichment { flag: m.discrete[en.flag], x_abs: m.dims[en.x_abs], p_abs: en.p_abs.map(|d| m.dims[d]) });

    Ok(Pta {
        name: components.iter().map(|c| c.name.as_str()).collect::<Vec<_>>().join("|"),
        space,
        actions: components.iter().flat_map(|c| c.actions.iter().cloned()).collect(),
        locations,
        initial,
        final_loc,
        private,
        discretes,
        edges,
        enrichment,
    })
}

fn cartesian<'a>(choices: &[Vec<&'a Edge>]) -> Vec<Vec<&'a Edge>> {
    let mut out: Vec<Vec<&Edge>> = vec![Vec::new()];
    for options in choices {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                options.iter().map(move |e| {
                    let mut v = prefix.clone();
                    v.push(*e);
                    v
                })
            })
            .collect();
    }
    out
}

fn merged_space(components: &[Pta]) -> Result<Space, ModelError> {
    let mut dims: Vec<(String, DimKind)> = Vec::new();
    for c in components {
        for (_, name, kind) in c.space.iter() {
            match dims.iter().find(|(n, _)| n == name) {
                Some((_, k)) if *k != kind => return Err(ModelError::KindConflict(name.to_string())),
                Some(_) => {}
                None => dims.push((name.to_string(), kind)),
            }
        }
    }
    Ok(DimSpace::new(dims)?)
}

fn merged_discretes(components: &[Pta]) -> Result<(Vec<DiscreteVar>, Vec<Vec<usize>>), ModelError> {
    let mut vars: Vec<DiscreteVar> = Vec::new();
    let mut maps = Vec::new();
    for c in components {
        let mut map = Vec::new();
        for v in &c.discretes {
            match vars.iter().position(|w| w.name == v.name) {
                Some(i) if vars[i] != *v => return Err(ModelError::DomainConflict(v.name.clone())),
                Some(i) => map.push(i),
                None => {
                    map.push(vars.len());
                    vars.push(v.clone());
                }
            }
        }
        maps.push(map);
    }
    Ok((vars, maps))
}

/// Translation of one component's dimensions and variables into the product.
struct ComponentMap {
    space: Space,
    dims: Vec<Dim>,
    discrete: Vec<usize>,
}

impl ComponentMap {
    fn new(c: &Pta, target: &Space, discrete: Vec<usize>) -> Result<Self, ModelError> {
        let dims = c
            .space
            .iter()
            .map(|(_, n, _)| target.index_of(n).expect("merged space holds every component dimension"))
            .collect();
        Ok(ComponentMap { space: target.clone(), dims, discrete })
    }

    fn poly(&self, p: &Polyhedron) -> Result<Polyhedron, ModelError> {
        Ok(p.embed(&self.space, |d| Some(self.dims[d]))?)
    }

    fn edge(&self, e: &Edge, source: LocId, target: LocId) -> Result<Edge, ModelError> {
        Ok(Edge {
            source,
            target,
            guard: self.poly(&e.guard)?,
            discrete_guard: e
                .discrete_guard
                .iter()
                .map(|a| DiscreteAtom { var: self.discrete[a.var], ..*a })
                .collect(),
            action: e.action.clone(),
            resets: e.resets.iter().map(|&d| self.dims[d]).collect(),
            updates: e.updates.iter().map(|(&v, &x)| (self.discrete[v], x)).collect(),
        })
    }
}
