//! Cross-validation on valuated automata: reachability at a fixed execution
//! time, duration sampling on a half-integer grid, and region equivalence.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{enrich, max_clock_constants, rescale, valuate_partial, LocId, ModelError, Pta, ABS_CLOCK, ABS_PARAM};
use crate::opacity::Polarity;
use crate::poly::{Cmp, Inequality, LinearTerm, PolyError};
use crate::rational::Rational;
use crate::symsem::{efsynth, efsynth_pruned, ExplorationOptions, SymError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("negative duration {0}")]
    NegativeDuration(Rational),
    #[error("timing parameter `{0}` has no value")]
    UnvaluatedParameter(String),
    #[error("horizon {0} is not a nonnegative integer after rescaling")]
    BadHorizon(Rational),
    #[error("{0} clocks in the first valuation, {1} in the second")]
    ClockCountMismatch(usize, usize),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Exploration(#[from] SymError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reach {
    Reachable,
    Unreachable,
    Inconclusive,
}

impl fmt::Display for Reach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Reach::Reachable => "reachable",
            Reach::Unreachable => "unreachable",
            Reach::Inconclusive => "inconclusive",
        })
    }
}

fn require_valuated(ta: &Pta) -> Result<(), OracleError> {
    match ta.timing_parameters().first() {
        Some(&d) => Err(OracleError::UnvaluatedParameter(ta.space.name(d).to_string())),
        None => Ok(()),
    }
}

fn options(budget: usize) -> ExplorationOptions {
    ExplorationOptions { budget, first_goal_only: true, ..ExplorationOptions::default() }
}

/// Whether some run of `ta` reaches `final_loc` with the given polarity
/// after exactly `d` time units. Data parameters are existential.
pub fn reachable_at_time(
    ta: &Pta,
    private: &BTreeSet<LocId>,
    final_loc: LocId,
    polarity: Polarity,
    d: &Rational,
    budget: usize,
) -> Result<Reach, OracleError> {
    if d.is_negative() {
        return Err(OracleError::NegativeDuration(d.clone()));
    }
    require_valuated(ta)?;
    let enriched = enrich(ta, private, final_loc)?.pta;
    let mut fixed = valuate_partial(&enriched, &BTreeMap::from([(ABS_PARAM.to_string(), d.clone())]))?;
    let x_abs = fixed.space.index_of(ABS_CLOCK).expect("enriched");
    let horizon = Inequality::compare(LinearTerm::var(x_abs), Cmp::Le, LinearTerm::constant(d.clone()));
    for loc in &mut fixed.locations {
        loc.invariant = loc.invariant.clone().with(&horizon)?;
    }
    let flag = fixed.enrichment.as_ref().expect("enriched").flag;
    let r = efsynth_pruned(
        &fixed,
        |l, v| {
            l == final_loc
                && match polarity {
                    Polarity::Priv => v[flag] == 1,
                    Polarity::Pub => v[flag] == 0,
                    Polarity::Any => true,
                }
        },
        |l, _| l == final_loc,
        &options(budget),
    )?;
    Ok(verdict(r.constraint.is_false(), r.complete))
}

fn verdict(none_found: bool, complete: bool) -> Reach {
    match (none_found, complete) {
        (false, _) => Reach::Reachable,
        (true, true) => Reach::Unreachable,
        (true, false) => Reach::Inconclusive,
    }
}

/// Whether `target` is reachable in the valuated automaton.
pub fn location_reachable(ta: &Pta, target: LocId, budget: usize) -> Result<Reach, OracleError> {
    require_valuated(ta)?;
    let r = efsynth(ta, |l, _| l == target, &options(budget))?;
    Ok(verdict(r.constraint.is_false(), r.complete))
}

/// Reachability verdicts at every multiple of `step` up to `horizon`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleReport {
    pub horizon: Rational,
    /// Half of a time unit of the rescaled automaton, in original units.
    pub step: Rational,
    pub samples: BTreeMap<Rational, Reach>,
}

impl SampleReport {
    pub fn reachable(&self) -> impl Iterator<Item = &Rational> + '_ {
        self.samples.iter().filter(|(_, r)| **r == Reach::Reachable).map(|(d, _)| d)
    }

    pub fn is_complete(&self) -> bool {
        self.samples.values().all(|r| *r != Reach::Inconclusive)
    }
}

impl fmt::Display for SampleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "duration\tverdict")?;
        for (d, r) in &self.samples {
            writeln!(f, "{d}\t{r}")?;
        }
        Ok(())
    }
}

/// Samples execution times on the half-integer grid of the automaton
/// rescaled to integer constants. Durations are reported in original
/// units, so the step is 1/2 divided by the rescaling factor.
pub fn sample_durations(
    ta: &Pta,
    private: &BTreeSet<LocId>,
    final_loc: LocId,
    polarity: Polarity,
    horizon: &Rational,
    budget: usize,
) -> Result<SampleReport, OracleError> {
    require_valuated(ta)?;
    let (scaled, factor) = rescale(ta)?;
    let scaled_horizon = horizon * &factor;
    if scaled_horizon.is_negative() || !scaled_horizon.is_integer() {
        return Err(OracleError::BadHorizon(horizon.clone()));
    }
    let half = Rational::new(1, 2);
    let steps = usize::try_from(scaled_horizon.numer() * 2).map_err(|_| OracleError::BadHorizon(horizon.clone()))?;
    let mut samples = BTreeMap::new();
    for k in 0..=steps {
        let d = &Rational::from_integer(k) * &half;
        let r = reachable_at_time(&scaled, private, final_loc, polarity, &d, budget)?;
        samples.insert(&d / &factor, r);
    }
    Ok(SampleReport { horizon: horizon.clone(), step: &half / &factor, samples })
}

/// Maximal constant of each clock, in clock order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionContext {
    pub constants: Vec<Rational>,
}

impl RegionContext {
    pub fn new(constants: impl IntoIterator<Item = i64>) -> Self {
        RegionContext { constants: constants.into_iter().map(Rational::from_integer).collect() }
    }

    /// The largest constant compared to each clock, rounded up.
    pub fn from_pta(ta: &Pta) -> Self {
        let max = max_clock_constants(ta);
        let constants = ta
            .clocks()
            .into_iter()
            .map(|c| {
                let k = max.get(&c).cloned().unwrap_or_else(Rational::zero);
                let f = k.floor();
                if f == k {
                    f
                } else {
                    &f + &Rational::one()
                }
            })
            .collect();
        RegionContext { constants }
    }
}

/// Region equivalence of two clock valuations.
pub fn region_equivalent(w: &[Rational], w2: &[Rational], ctx: &RegionContext) -> Result<bool, OracleError> {
    if w.len() != w2.len() || w.len() != ctx.constants.len() {
        return Err(OracleError::ClockCountMismatch(w.len(), w2.len()));
    }
    let n = w.len();
    for i in 0..n {
        let c = &ctx.constants[i];
        match (w[i] > *c, w2[i] > *c) {
            (true, true) => {}
            (false, false) if w[i].floor() == w2[i].floor() => {}
            _ => return Ok(false),
        }
    }
    let relevant: Vec<usize> = (0..n).filter(|&i| w[i] <= ctx.constants[i]).collect();
    for &i in &relevant {
        if w[i].fract().is_zero() != w2[i].fract().is_zero() {
            return Ok(false);
        }
        for &j in &relevant {
            if (w[i].fract() <= w[j].fract()) != (w2[i].fract() <= w2[j].fract()) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::fig1;
    use crate::model::valuate_pta;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn fig1_at(p1: &str, p2: &str) -> Pta {
        valuate_pta(&fig1(), &BTreeMap::from([("p1".to_string(), q(p1)), ("p2".to_string(), q(p2))])).unwrap()
    }

    #[test]
    fn fixed_time_reachability() {
        let ta = fig1_at("1", "2");
        let at = |d: &str| reachable_at_time(&ta, &ta.private, 1, Polarity::Priv, &q(d), 1000).unwrap();
        assert_eq!(at("1"), Reach::Reachable);
        assert_eq!(at("0.5"), Reach::Unreachable);
        assert!(matches!(
            reachable_at_time(&ta, &ta.private, 1, Polarity::Priv, &q("-1"), 10),
            Err(OracleError::NegativeDuration(_))
        ));
    }

    #[test]
    fn grid_on_running_example() {
        let ta = fig1_at("1", "2");
        let r = sample_durations(&ta, &ta.private, 1, Polarity::Priv, &q("4"), 1000).unwrap();
        assert_eq!(r.samples.len(), 9);
        let got: Vec<String> = r.reachable().map(|d| d.to_string()).collect();
        assert_eq!(got, ["1", "1.5", "2", "2.5", "3"]);
    }

    #[test]
    fn grid_follows_rescaling() {
        let ta = fig1_at("1.5", "1.5");
        let r = sample_durations(&ta, &ta.private, 1, Polarity::Priv, &q("2"), 1000).unwrap();
        assert_eq!(r.step, q("1/4"));
        assert_eq!(r.reachable().next(), Some(&q("1.5")));
    }

    #[test]
    fn unvaluated_rejected() {
        let a = fig1();
        assert!(matches!(location_reachable(&a, 1, 10), Err(OracleError::UnvaluatedParameter(_))));
    }

    #[test]
    fn region_examples() {
        let ctx = RegionContext::new([2, 2]);
        let eq = |a: [&str; 2], b: [&str; 2]| {
            region_equivalent(&a.map(q), &b.map(q), &ctx).unwrap()
        };
        assert!(eq(["0", "0.35"], ["0", "0.75"]));
        assert!(eq(["1.5", "0.2"], ["1.5", "0.2"]));
        assert!(!eq(["1.5", "0.2"], ["1.2", "0.5"]));
        assert!(eq(["3", "0.5"], ["7.25", "0.5"]));
        assert!(!eq(["1", "0.5"], ["1.5", "0.5"]));
    }

    #[test]
    fn region_context_of_running_example() {
        assert_eq!(RegionContext::from_pta(&fig1_at("1", "2")).constants, vec![q("3")]);
    }
}
