//! Parametric timed automata and their structural transformations.

mod product;
mod transform;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::poly::{Cmp, Dim, DimKind, PolyError, Polyhedron, Space};
use crate::rational::Rational;

pub use product::synchronized_product;
pub use transform::{
    a0inf, copy_name, copy_rename, enrich, is_lu, max_clock_constants, merge_finals, rescale,
    self_compose, valuate_partial, valuate_pta, Enriched, LuResult, ABS_CLOCK, ABS_PARAM, FINISH,
    FLAG,
};

pub type LocId = usize;

/// Parameter name to value.
pub type ParamValuation = BTreeMap<String, Rational>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown location `{0}`")]
    UnknownLocation(String),
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("no value given for parameter `{0}`")]
    MissingParameter(String),
    #[error("timing parameter `{0}` must not be negative")]
    NegativeTimingValue(String),
    #[error("synchronized action `{0}` occurs in no component")]
    UnownedSyncAction(String),
    #[error("dimension `{0}` is declared with different kinds")]
    KindConflict(String),
    #[error("discrete variable `{0}` is declared with different domains")]
    DomainConflict(String),
    #[error("value {value} is outside the domain of `{var}`")]
    DomainViolation { var: String, value: i64 },
    #[error("invalid lower/upper partition: {0}")]
    InvalidPartition(String),
    #[error("the automaton is not enriched")]
    NotEnriched,
    #[error("the set of private locations is empty")]
    EmptyPrivateSet,
    #[error("final location `{0}` is private")]
    FinalIsPrivate(String),
    #[error("name `{0}` is already used by the model")]
    NameCollision(String),
    #[error("no final location given")]
    NoFinal,
    #[error("product of zero automata")]
    EmptyProduct,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Debug, Clone)]
pub struct Location {
    pub name: String,
    /// Over the automaton's whole dimension space.
    pub invariant: Polyhedron,
    pub urgent: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteVar {
    pub name: String,
    pub lo: i64,
    pub hi: i64,
    pub init: i64,
}

/// `var cmp value` on a discrete variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiscreteAtom {
    pub var: usize,
    pub cmp: Cmp,
    pub value: i64,
}

impl DiscreteAtom {
    pub fn holds(&self, vals: &[i64]) -> bool {
        let (l, r) = (Rational::from(vals[self.var]), Rational::from(self.value));
        self.cmp.holds(&l, &r)
    }
}

#[derive(Debug, Clone)]
pub struct Edge {
    pub source: LocId,
    pub target: LocId,
    pub guard: Polyhedron,
    pub discrete_guard: Vec<DiscreteAtom>,
    /// `None` is a silent action that never synchronizes.
    pub action: Option<String>,
    pub resets: BTreeSet<Dim>,
    pub updates: BTreeMap<usize, i64>,
}

/// Dimensions and discrete variable added by [`enrich`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enrichment {
    pub flag: usize,
    pub x_abs: Dim,
    /// `None` once the execution time has been fixed.
    pub p_abs: Option<Dim>,
}

#[derive(Debug, Clone)]
pub struct Pta {
    pub name: String,
    pub space: Space,
    pub actions: BTreeSet<String>,
    pub locations: Vec<Location>,
    pub initial: LocId,
    pub final_loc: Option<LocId>,
    pub private: BTreeSet<LocId>,
    pub discretes: Vec<DiscreteVar>,
    pub edges: Vec<Edge>,
    pub enrichment: Option<Enrichment>,
}

impl Pta {
    pub fn location_id(&self, name: &str) -> Result<LocId, ModelError> {
        self.locations
            .iter()
            .position(|l| l.name == name)
            .ok_or_else(|| ModelError::UnknownLocation(name.to_string()))
    }

    /// Resolves a location name. A name that is not a location of the model
    /// matches every product location having it as a component.
    pub fn resolve_locations(&self, name: &str) -> Result<Vec<LocId>, ModelError> {
        if let Ok(id) = self.location_id(name) {
            return Ok(vec![id]);
        }
        let ids: Vec<LocId> = (0..self.locations.len())
            .filter(|&i| self.locations[i].name.split('|').any(|part| part == name))
            .collect();
        if ids.is_empty() {
            Err(ModelError::UnknownLocation(name.to_string()))
        } else {
            Ok(ids)
        }
    }

    pub fn discrete_index(&self, name: &str) -> Option<usize> {
        self.discretes.iter().position(|d| d.name == name)
    }

    pub fn initial_discretes(&self) -> Vec<i64> {
        self.discretes.iter().map(|d| d.init).collect()
    }

    pub fn clocks(&self) -> Vec<Dim> {
        self.space.clocks()
    }

    pub fn timing_parameters(&self) -> Vec<Dim> {
        self.space.dims_of(DimKind::TimingParameter)
    }

    pub fn data_parameters(&self) -> Vec<Dim> {
        self.space.dims_of(DimKind::DataParameter)
    }

    pub fn final_id(&self) -> Result<LocId, ModelError> {
        self.final_loc.ok_or(ModelError::NoFinal)
    }

    /// Parameters occurring in some guard or invariant.
    pub fn used_parameters(&self) -> BTreeSet<Dim> {
        let mut used = BTreeSet::new();
        for p in self.constraints() {
            used.extend(p.constrained_dims().into_iter().filter(|&d| self.space.kind(d).is_parameter()));
        }
        used
    }

    /// Every guard and invariant of the automaton.
    pub fn constraints(&self) -> impl Iterator<Item = &Polyhedron> + '_ {
        self.locations.iter().map(|l| &l.invariant).chain(self.edges.iter().map(|e| &e.guard))
    }

    pub fn incoming(&self, loc: LocId) -> impl Iterator<Item = &Edge> + '_ {
        self.edges.iter().filter(move |e| e.target == loc)
    }
}

impl fmt::Display for Pta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} locations, {} edges, {} clocks, {} parameters",
            self.name,
            self.locations.len(),
            self.edges.len(),
            self.clocks().len(),
            self.space.parameters().len()
        )
    }
}
