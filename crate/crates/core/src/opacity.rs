//! Execution-time opacity: duration sets of private and public runs,
//! their comparison, and parameter synthesis through self-composition.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    a0inf, copy_name, enrich, self_compose, valuate_partial, LocId, ModelError, ParamValuation, Pta, FLAG,
};
use crate::poly::{ConstraintUnion, Dim, DimKind, DurationSet, PolyError, Space};
use crate::symsem::{efsynth_pruned, ExplorationOptions, ExplorationResult, SymError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OpacityError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Exploration(#[from] SymError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Which runs to the final location are collected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    /// Runs visiting a private location first.
    Priv,
    /// Runs avoiding every private location.
    Pub,
    /// All runs.
    Any,
}

impl Polarity {
    fn accepts(self, flag: i64) -> bool {
        match self {
            Polarity::Priv => flag == 1,
            Polarity::Pub => flag == 0,
            Polarity::Any => true,
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::Priv => "priv",
            Polarity::Pub => "pub",
            Polarity::Any => "any",
        })
    }
}

#[derive(Debug, Clone)]
pub struct OpacitySpec {
    pub model: Pta,
    pub private: BTreeSet<LocId>,
    pub final_loc: LocId,
    pub fixed_valuation: Option<ParamValuation>,
}

impl OpacitySpec {
    /// Uses the private and final locations declared by the model.
    pub fn from_model(model: Pta) -> Result<Self, OpacityError> {
        let final_loc = model.final_id()?;
        let private = model.private.clone();
        Ok(OpacitySpec { model, private, final_loc, fixed_valuation: None })
    }

    pub fn with_valuation(mut self, v: ParamValuation) -> Self {
        self.fixed_valuation = Some(v);
        self
    }
}

/// A synthesized constraint together with the dimension holding the
/// execution time.
#[derive(Debug, Clone)]
pub struct TimedResult {
    pub exploration: ExplorationResult,
    pub space: Space,
    pub p_abs: Dim,
    pub warnings: Vec<String>,
}

impl TimedResult {
    pub fn constraint(&self) -> &ConstraintUnion {
        &self.exploration.constraint
    }

    /// The execution times as a canonical set; fails while other parameters
    /// remain constrained.
    pub fn durations(&self) -> Result<DurationSet, OpacityError> {
        Ok(self.exploration.constraint.to_duration_set(self.p_abs)?)
    }
}

fn enriched(spec: &OpacitySpec) -> Result<(Pta, Vec<String>), OpacityError> {
    let e = enrich(&spec.model, &spec.private, spec.final_loc)?;
    let pta = match &spec.fixed_valuation {
        Some(v) => valuate_partial(&e.pta, v)?,
        None => e.pta,
    };
    Ok((pta, e.warnings))
}

fn p_abs_of(pta: &Pta) -> Dim {
    pta.enrichment.as_ref().and_then(|en| en.p_abs).expect("enriched automaton keeps p_abs")
}

fn eliminate_data(r: &mut ExplorationResult, space: &Space) {
    let data = space.dims_of(DimKind::DataParameter);
    if !data.is_empty() {
        r.constraint = r.constraint.eliminate(&data);
    }
}

/// Parameter valuations and execution times of runs reaching the final
/// location with the given polarity.
pub fn dreach(spec: &OpacitySpec, polarity: Polarity, opts: &ExplorationOptions) -> Result<TimedResult, OpacityError> {
    let (pta, warnings) = enriched(spec)?;
    let flag = pta.enrichment.as_ref().expect("enriched").flag;
    let fin = spec.final_loc;
    let mut exploration = efsynth_pruned(
        &pta,
        |l, d| l == fin && polarity.accepts(d[flag]),
        |l, _| l == fin,
        opts,
    )?;
    eliminate_data(&mut exploration, &pta.space);
    Ok(TimedResult { exploration, p_abs: p_abs_of(&pta), space: pta.space, warnings })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VerdictKind {
    Opaque,
    NotOpaqueFixable,
    NotOpaqueVulnerable,
    Inconclusive,
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerdictKind::Opaque => "opaque",
            VerdictKind::NotOpaqueFixable => "not opaque, fixable",
            VerdictKind::NotOpaqueVulnerable => "not opaque, vulnerable",
            VerdictKind::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone)]
pub struct OpacityVerdict {
    pub kind: VerdictKind,
    pub opaque_times: DurationSet,
    pub priv_times: DurationSet,
    pub pub_times: DurationSet,
    pub priv_result: TimedResult,
    pub pub_result: TimedResult,
    pub warnings: Vec<String>,
}

impl OpacityVerdict {
    pub fn complete(&self) -> bool {
        self.priv_result.exploration.complete && self.pub_result.exploration.complete
    }

    pub fn states_explored(&self) -> usize {
        self.priv_result.exploration.states_explored + self.pub_result.exploration.states_explored
    }
}

/// The execution times that are both private and public, with a
/// classification of the two duration sets.
pub fn opaque_times(spec: &OpacitySpec, opts: &ExplorationOptions) -> Result<OpacityVerdict, OpacityError> {
    let priv_result = dreach(spec, Polarity::Priv, opts)?;
    let pub_result = dreach(spec, Polarity::Pub, opts)?;
    let priv_times = priv_result.durations()?;
    let pub_times = pub_result.durations()?;
    let opaque = priv_times.intersection(&pub_times);
    let mut warnings = priv_result.warnings.clone();
    let complete = priv_result.exploration.complete && pub_result.exploration.complete;
    let kind = if !complete {
        warnings.push("exploration budget exhausted: the duration sets are under-approximations".into());
        VerdictKind::Inconclusive
    } else if priv_times == pub_times {
        if priv_times.is_empty() {
            warnings.push("the final location is unreachable: opacity holds vacuously".into());
        }
        VerdictKind::Opaque
    } else if opaque.is_empty() {
        VerdictKind::NotOpaqueVulnerable
    } else {
        VerdictKind::NotOpaqueFixable
    };
    Ok(OpacityVerdict { kind, opaque_times: opaque, priv_times, pub_times, priv_result, pub_result, warnings })
}

/// Full timed opacity: the verdict is `Opaque` exactly when the private
/// and public duration sets coincide.
pub fn is_fully_opaque(spec: &OpacitySpec, opts: &ExplorationOptions) -> Result<OpacityVerdict, OpacityError> {
    opaque_times(spec, opts)
}

/// Timing parameters and execution times for which some private run and
/// some public run both take exactly `p_abs` time units.
pub fn synth_op(spec: &OpacitySpec, opts: &ExplorationOptions) -> Result<TimedResult, OpacityError> {
    let (pta, warnings) = enriched(spec)?;
    let product = self_compose(&pta)?;
    let flag = product.discrete_index(FLAG).expect("flag of the first copy");
    let flag_copy = product.discrete_index(&copy_name(FLAG)).expect("flag of the second copy");
    let fin = product.final_id()?;
    let mut exploration = efsynth_pruned(
        &product,
        |l, d| l == fin && d[flag] == 1 && d[flag_copy] == 0,
        |l, _| l == fin,
        opts,
    )?;
    eliminate_data(&mut exploration, &product.space);
    exploration.constraint = exploration.constraint.simplify();
    Ok(TimedResult { exploration, p_abs: p_abs_of(&product), space: product.space, warnings })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Emptiness {
    Empty,
    NonEmpty,
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct LuEmptiness {
    pub verdict: Emptiness,
    /// Opaque execution times of the transformed automaton.
    pub verdict_detail: OpacityVerdict,
}

/// Whether some valuation of an L/U automaton admits an opaque execution
/// time, decided on the automaton with lower-bound parameters at 0 and
/// upper-bound parameters at infinity. A witness valuation sets lower-bound
/// parameters to 0 and upper-bound ones to any value above the durations
/// of interest.
pub fn lu_opacity_emptiness(
    spec: &OpacitySpec,
    lower: &BTreeSet<String>,
    upper: &BTreeSet<String>,
    opts: &ExplorationOptions,
) -> Result<LuEmptiness, OpacityError> {
    let model = a0inf(&spec.model, lower, upper)?;
    let transformed = OpacitySpec { model, private: spec.private.clone(), final_loc: spec.final_loc, fixed_valuation: None };
    let v = opaque_times(&transformed, opts)?;
    let verdict = if !v.opaque_times.is_empty() {
        Emptiness::NonEmpty
    } else if v.complete() {
        Emptiness::Empty
    } else {
        Emptiness::Inconclusive
    };
    Ok(LuEmptiness { verdict, verdict_detail: v })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Answer {
    Yes,
    No,
    Inconclusive,
}

/// Whether the system is opaque for every execution time in `d`.
pub fn check_opaque_for(spec: &OpacitySpec, d: &DurationSet, opts: &ExplorationOptions) -> Result<Answer, OpacityError> {
    if d.is_empty() {
        return Ok(Answer::Yes);
    }
    let v = opaque_times(spec, opts)?;
    Ok(if d.is_subset(&v.opaque_times) {
        Answer::Yes
    } else if v.complete() {
        Answer::No
    } else {
        Answer::Inconclusive
    })
}
