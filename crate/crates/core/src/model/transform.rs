use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::{DiscreteVar, Enrichment, LocId, Location, ModelError, ParamValuation, Pta};
use crate::poly::{
    Cmp, Dim, DimKind, DimSpace, Inequality, LinearTerm, Polyhedron, Relation,
};
use crate::rational::Rational;

pub const FLAG: &str = "b";
pub const ABS_CLOCK: &str = "x_abs";
pub const ABS_PARAM: &str = "p_abs";
pub const FINISH: &str = "finish";

/// Substitutes every parameter of `a`. Fails when one has no value.
pub fn valuate_pta(a: &Pta, v: &ParamValuation) -> Result<Pta, ModelError> {
    for d in a.space.parameters() {
        let name = a.space.name(d);
        if !v.contains_key(name) {
            return Err(ModelError::MissingParameter(name.to_string()));
        }
    }
    valuate_partial(a, v)
}

/// Substitutes the parameters named in `v`; the others stay symbolic.
pub fn valuate_partial(a: &Pta, v: &ParamValuation) -> Result<Pta, ModelError> {
    let mut values = Vec::new();
    for (name, value) in v {
        let d = a
            .space
            .index_of(name)
            .filter(|&d| a.space.kind(d).is_parameter())
            .ok_or_else(|| ModelError::UnknownParameter(name.clone()))?;
        if a.space.kind(d) == DimKind::TimingParameter && value.is_negative() {
            return Err(ModelError::NegativeTimingValue(name.clone()));
        }
        values.push((d, value.clone()));
    }
    let drop: BTreeSet<Dim> = values.iter().map(|(d, _)| *d).collect();
    restrict_space(a, &drop, |p| p.assign(&values))
}

/// Rebuilds `a` over its space minus `drop`, transforming every constraint
/// with `f` first. `f` must leave the dropped dimensions unconstrained.
fn restrict_space(
    a: &Pta,
    drop: &BTreeSet<Dim>,
    f: impl Fn(&Polyhedron) -> Polyhedron,
) -> Result<Pta, ModelError> {
    let kept: Vec<(Dim, &str, DimKind)> = a.space.iter().filter(|(d, _, _)| !drop.contains(d)).collect();
    let space = DimSpace::new(kept.iter().map(|(_, n, k)| (n.to_string(), *k)))?;
    let index: BTreeMap<Dim, Dim> = kept.iter().enumerate().map(|(i, (d, _, _))| (*d, i)).collect();
    let conv = |p: &Polyhedron| -> Result<Polyhedron, ModelError> {
        Ok(f(p).embed(&space, |d| index.get(&d).copied())?)
    };
    let mut out = a.clone();
    out.space = space.clone();
    for (loc, orig) in out.locations.iter_mut().zip(&a.locations) {
        loc.invariant = conv(&orig.invariant)?;
    }
    for (e, orig) in out.edges.iter_mut().zip(&a.edges) {
        e.guard = conv(&orig.guard)?;
        e.resets = orig.resets.iter().map(|d| index[d]).collect();
    }
    out.enrichment = a.enrichment.as_ref().and_then(|en| {
        Some(Enrichment { flag: en.flag, x_abs: *index.get(&en.x_abs)?, p_abs: en.p_abs.and_then(|d| index.get(&d).copied()) })
    });
    Ok(out)
}

/// Largest constant each clock is compared to, over parameter-free
/// single-clock constraints.
pub fn max_clock_constants(a: &Pta) -> BTreeMap<Dim, Rational> {
    let mut out: BTreeMap<Dim, Rational> = a.clocks().into_iter().map(|c| (c, Rational::zero())).collect();
    for p in a.constraints() {
        for ineq in p.inequalities() {
            let coeffs = ineq.term.coeffs();
            if coeffs.len() != 1 {
                continue;
            }
            let (&d, c) = coeffs.iter().next().expect("one entry");
            if a.space.kind(d) != DimKind::Clock {
                continue;
            }
            let bound = (ineq.term.constant_part() / c).abs();
            let cur = out.get_mut(&d).expect("clock");
            if bound > *cur {
                *cur = bound;
            }
        }
    }
    out
}

/// Multiplies every time constant by the least common multiple of their
/// denominators, giving an equivalent automaton with integer constants.
/// Returns the automaton and the factor; durations scale by the same factor.
pub fn rescale(a: &Pta) -> Result<(Pta, Rational), ModelError> {
    let is_time = |d: Dim| a.space.kind(d) != DimKind::DataParameter;
    let mut k = BigInt::one();
    for p in a.constraints() {
        for ineq in p.inequalities() {
            if let Some(g) = time_gcd(&ineq, is_time) {
                let c = ineq.term.constant_part() / &Rational::from_integer(g);
                k = k.lcm(c.denom());
            }
        }
    }
    let factor = Rational::from_integer(k);
    if factor == Rational::one() {
        return Ok((a.clone(), factor));
    }
    let scale = |p: &Polyhedron| -> Result<Polyhedron, ModelError> {
        let ineqs = p.inequalities().into_iter().map(|ineq| {
            if time_gcd(&ineq, is_time).is_none() {
                return ineq;
            }
            let mut term = LinearTerm::constant(ineq.term.constant_part() * &factor);
            for (&d, c) in ineq.term.coeffs() {
                term = term.plus(d, if is_time(d) { c.clone() } else { c * &factor });
            }
            Inequality::new(term, ineq.relation)
        });
        Ok(Polyhedron::from_inequalities(p.space(), ineqs)?)
    };
    let mut out = a.clone();
    for loc in &mut out.locations {
        loc.invariant = scale(&loc.invariant)?;
    }
    for e in &mut out.edges {
        e.guard = scale(&e.guard)?;
    }
    Ok((out, factor))
}

fn time_gcd(ineq: &Inequality, is_time: impl Fn(Dim) -> bool) -> Option<BigInt> {
    let g = ineq
        .term
        .coeffs()
        .iter()
        .filter(|(d, _)| is_time(**d))
        .fold(BigInt::zero(), |g, (_, c)| g.gcd(c.numer()));
    (!g.is_zero()).then_some(g)
}

/// Outcome of the lower/upper classification of timing parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LuResult {
    Lu { lower: BTreeSet<String>, upper: BTreeSet<String> },
    NotLu { witness: String },
}

#[derive(Debug, Clone, Copy, Default)]
struct Polarity {
    lower: bool,
    upper: bool,
}

fn polarities(a: &Pta) -> BTreeMap<Dim, Polarity> {
    let mut pol: BTreeMap<Dim, Polarity> =
        a.timing_parameters().into_iter().map(|d| (d, Polarity::default())).collect();
    for p in a.constraints() {
        for ineq in p.inequalities() {
            if !ineq.term.coeffs().keys().any(|&d| a.space.kind(d) == DimKind::Clock) {
                continue;
            }
            for (d, c) in ineq.term.coeffs() {
                let Some(entry) = pol.get_mut(d) else { continue };
                if ineq.relation == Relation::Eq {
                    entry.lower = true;
                    entry.upper = true;
                } else if c.is_positive() {
                    // In `term < 0` or `term <= 0`, a positive coefficient makes p a lower bound.
                    entry.lower = true;
                } else {
                    entry.upper = true;
                }
            }
        }
    }
    pol
}

/// Splits the timing parameters into lower-bound and upper-bound ones.
/// Parameters that never occur next to a clock are counted as lower-bound.
pub fn is_lu(a: &Pta) -> LuResult {
    let mut lower = BTreeSet::new();
    let mut upper = BTreeSet::new();
    for (d, pol) in polarities(a) {
        let name = a.space.name(d).to_string();
        match (pol.lower, pol.upper) {
            (true, true) => return LuResult::NotLu { witness: name },
            (false, true) => {
                upper.insert(name);
            }
            _ => {
                lower.insert(name);
            }
        }
    }
    LuResult::Lu { lower, upper }
}

/// The timed automaton where lower-bound parameters become 0 and every
/// conjunct bounding a clock by an upper-bound parameter is dropped.
pub fn a0inf(a: &Pta, lower: &BTreeSet<String>, upper: &BTreeSet<String>) -> Result<Pta, ModelError> {
    if let Some(p) = lower.intersection(upper).next() {
        return Err(ModelError::InvalidPartition(format!("`{p}` is both lower and upper")));
    }
    for name in lower.iter().chain(upper) {
        match a.space.index_of(name) {
            Some(d) if a.space.kind(d) == DimKind::TimingParameter => {}
            _ => return Err(ModelError::UnknownParameter(name.clone())),
        }
    }
    for (d, pol) in polarities(a) {
        let name = a.space.name(d);
        let ok = if lower.contains(name) {
            !pol.upper
        } else if upper.contains(name) {
            !pol.lower
        } else {
            !pol.lower && !pol.upper
        };
        if !ok {
            return Err(ModelError::InvalidPartition(format!("`{name}` is used against its class")));
        }
    }
    let upper_dims: BTreeSet<Dim> = upper.iter().filter_map(|n| a.space.index_of(n)).collect();
    if let Some(c) = parameter_only_upper(a, &upper_dims) {
        return Err(ModelError::InvalidPartition(format!("constraint `{c}` bounds an upper-bound parameter")));
    }
    let zero: Vec<(Dim, Rational)> = a.timing_parameters().into_iter().map(|d| (d, Rational::zero())).collect();
    let drop: BTreeSet<Dim> = a.timing_parameters().into_iter().collect();
    restrict_space(a, &drop, |p| {
        let kept = p
            .inequalities()
            .into_iter()
            .filter(|ineq| !ineq.term.coeffs().keys().any(|d| upper_dims.contains(d)));
        Polyhedron::from_inequalities(p.space(), kept).expect("same space").assign(&zero)
    })
}

fn parameter_only_upper(a: &Pta, upper: &BTreeSet<Dim>) -> Option<String> {
    let space = &a.space;
    for p in a.constraints() {
        for ineq in p.inequalities() {
            let has_upper = ineq.term.coeffs().keys().any(|d| upper.contains(d));
            let has_clock = ineq.term.coeffs().keys().any(|&d| space.kind(d) == DimKind::Clock);
            if has_upper && !has_clock {
                return Some(ineq.display(space).to_string());
            }
        }
    }
    None
}

/// An enriched automaton together with non-fatal diagnostics.
#[derive(Debug, Clone)]
pub struct Enriched {
    pub pta: Pta,
    pub warnings: Vec<String>,
}

/// Adds the private-visit flag, the `finish` action, the never-reset clock
/// `x_abs` and the execution-time parameter `p_abs`.
pub fn enrich(a: &Pta, private: &BTreeSet<LocId>, final_loc: LocId) -> Result<Enriched, ModelError> {
    if private.is_empty() {
        return Err(ModelError::EmptyPrivateSet);
    }
    for &l in private.iter().chain([&final_loc]) {
        if l >= a.locations.len() {
            return Err(ModelError::UnknownLocation(format!("#{l}")));
        }
    }
    if private.contains(&final_loc) {
        return Err(ModelError::FinalIsPrivate(a.locations[final_loc].name.clone()));
    }
    for name in [ABS_CLOCK, ABS_PARAM, FLAG] {
        if a.space.index_of(name).is_some() || a.discrete_index(name).is_some() {
            return Err(ModelError::NameCollision(name.to_string()));
        }
    }
    if a.actions.contains(FINISH) {
        return Err(ModelError::NameCollision(FINISH.to_string()));
    }
    let mut warnings = Vec::new();
    if a.incoming(final_loc).next().is_none() {
        warnings.push(format!("final location `{}` has no incoming edge", a.locations[final_loc].name));
    }

    let dims = a
        .space
        .iter()
        .map(|(_, n, k)| (n.to_string(), k))
        .chain([(ABS_CLOCK.to_string(), DimKind::Clock), (ABS_PARAM.to_string(), DimKind::TimingParameter)]);
    let space = DimSpace::new(dims)?;
    let x_abs = space.index_of(ABS_CLOCK).expect("added");
    let p_abs = space.index_of(ABS_PARAM).expect("added");
    let widen = |p: &Polyhedron| p.embed(&space, Some);
    let arrival = Inequality::compare(LinearTerm::var(x_abs), Cmp::Eq, LinearTerm::var(p_abs));

    let mut out = a.clone();
    out.space = space.clone();
    for loc in &mut out.locations {
        loc.invariant = widen(&loc.invariant)?;
    }
    let flag = out.discretes.len();
    out.discretes.push(DiscreteVar {
        name: FLAG.to_string(),
        lo: 0,
        hi: 1,
        init: i64::from(private.contains(&a.initial)),
    });
    for e in &mut out.edges {
        e.guard = widen(&e.guard)?;
        if private.contains(&e.target) {
            e.updates.insert(flag, 1);
        }
        if e.target == final_loc {
            e.guard = e.guard.clone().with(&arrival)?;
            e.action = Some(FINISH.to_string());
        }
    }
    out.actions.insert(FINISH.to_string());
    out.private = private.clone();
    out.final_loc = Some(final_loc);
    out.enrichment = Some(Enrichment { flag, x_abs, p_abs: Some(p_abs) });
    Ok(Enriched { pta: out, warnings })
}

pub fn copy_name(name: &str) -> String {
    format!("{name}'")
}

/// A renamed copy of an enriched automaton. Timing parameters (including
/// `p_abs`) and `x_abs` keep their names and are thus shared in a product.
pub fn copy_rename(a: &Pta) -> Result<Pta, ModelError> {
    let en = a.enrichment.as_ref().ok_or(ModelError::NotEnriched)?;
    let dims = a.space.iter().map(|(d, n, k)| {
        let shared = k == DimKind::TimingParameter || d == en.x_abs;
        (if shared { n.to_string() } else { copy_name(n) }, k)
    });
    let space = DimSpace::new(dims)?;
    let mut out = a.clone();
    out.name = copy_name(&a.name);
    out.space = space.clone();
    for loc in &mut out.locations {
        loc.name = copy_name(&loc.name);
        loc.invariant = loc.invariant.embed(&space, Some)?;
    }
    for e in &mut out.edges {
        e.guard = e.guard.embed(&space, Some)?;
    }
    for v in &mut out.discretes {
        v.name = copy_name(&v.name);
    }
    Ok(out)
}

/// The enriched automaton composed with its renamed copy, synchronized on
/// `finish` only.
pub fn self_compose(a: &Pta) -> Result<Pta, ModelError> {
    let copy = copy_rename(a)?;
    super::synchronized_product(&[a.clone(), copy], &[FINISH.to_string()].into())
}

/// Redirects every edge into one of `finals` to a single fresh final location.
pub fn merge_finals(a: &Pta, finals: &[LocId]) -> Result<Pta, ModelError> {
    let set: BTreeSet<LocId> = finals.iter().copied().collect();
    if let Some(&l) = set.iter().find(|&&l| l >= a.locations.len()) {
        return Err(ModelError::UnknownLocation(format!("#{l}")));
    }
    match set.len() {
        0 => return Err(ModelError::NoFinal),
        1 => {
            let mut out = a.clone();
            out.final_loc = set.first().copied();
            return Ok(out);
        }
        _ => {}
    }
    let name = set.iter().map(|&l| a.locations[l].name.as_str()).collect::<Vec<_>>().join("+");
    if a.location_id(&name).is_ok() {
        return Err(ModelError::NameCollision(name));
    }
    let mut out = a.clone();
    let merged = out.locations.len();
    out.locations.push(Location { name, invariant: Polyhedron::top(&a.space), urgent: false });
    for e in &mut out.edges {
        if set.contains(&e.target) {
            e.target = merged;
        }
    }
    out.final_loc = Some(merged);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;

    fn v(pairs: &[(&str, &str)]) -> ParamValuation {
        pairs.iter().map(|(n, x)| (n.to_string(), x.parse().unwrap())).collect()
    }

    fn fig8() -> Pta {
        let s = DimSpace::new([("x", DimKind::Clock), ("p", DimKind::TimingParameter)]).unwrap();
        Pta {
            name: "fig8".into(),
            space: s.clone(),
            actions: BTreeSet::new(),
            locations: vec![loc(&s, "l0", None), loc(&s, "lf", None), loc(&s, "lpriv", None)],
            initial: 0,
            final_loc: Some(1),
            private: [2].into(),
            discretes: Vec::new(),
            edges: vec![
                edge(&s, 0, 1, Some(atom(&s, "x", Cmp::Le, LinearTerm::var(1)))),
                edge(&s, 0, 2, None),
                edge(&s, 2, 1, Some(atom(&s, "x", Cmp::Le, LinearTerm::constant(1)))),
            ],
            enrichment: None,
        }
    }

    #[test]
    fn valuation_removes_parameters() {
        let a = valuate_pta(&fig1(), &v(&[("p1", "1"), ("p2", "2")])).unwrap();
        assert_eq!(a.space.len(), 1);
        assert_eq!(a.edges[0].guard.to_string(), "x >= 1");
        assert_eq!(a.edges[1].guard.to_string(), "x >= 2");
    }

    #[test]
    fn missing_and_unknown_parameters() {
        assert_eq!(
            valuate_pta(&fig1(), &v(&[("p1", "1")])).unwrap_err(),
            ModelError::MissingParameter("p2".into())
        );
        assert!(matches!(valuate_partial(&fig1(), &v(&[("q", "1")])), Err(ModelError::UnknownParameter(_))));
        assert!(matches!(
            valuate_partial(&fig1(), &v(&[("p1", "-1")])),
            Err(ModelError::NegativeTimingValue(_))
        ));
    }

    #[test]
    fn largest_constant_after_valuation() {
        let a = valuate_pta(&fig1(), &v(&[("p1", "2"), ("p2", "4")])).unwrap();
        assert_eq!(max_clock_constants(&a)[&0], Rational::from(4));
    }

    #[test]
    fn running_example_is_lower_bound_only() {
        let LuResult::Lu { lower, upper } = is_lu(&fig1()) else { panic!("expected L/U") };
        assert_eq!(lower, ["p1".to_string(), "p2".to_string()].into());
        assert!(upper.is_empty());
    }

    #[test]
    fn a0inf_drops_upper_bounds() {
        let a = fig8();
        let LuResult::Lu { lower, upper } = is_lu(&a) else { panic!() };
        assert_eq!(upper, ["p".to_string()].into());
        let t = a0inf(&a, &lower, &upper).unwrap();
        assert!(t.space.parameters().is_empty());
        assert!(t.edges[0].guard.is_empty());
        assert_eq!(t.edges[2].guard.to_string(), "x <= 1");
    }

    #[test]
    fn a0inf_rejects_wrong_partition() {
        let a = fig8();
        let r = a0inf(&a, &["p".to_string()].into(), &BTreeSet::new());
        assert!(matches!(r, Err(ModelError::InvalidPartition(_))));
    }

    #[test]
    fn enrich_adds_one_clock_and_one_parameter() {
        let a = fig1();
        let e = enrich(&a, &[2].into(), 1).unwrap().pta;
        assert_eq!(e.clocks().len(), a.clocks().len() + 1);
        assert_eq!(e.space.parameters().len(), a.space.parameters().len() + 1);
        assert_eq!(e.discretes.len(), 1);
        for edge in e.edges.iter().filter(|x| x.target == 1) {
            assert_eq!(edge.action.as_deref(), Some(FINISH));
            assert!(edge.guard.to_string().contains("x_abs - p_abs = 0"));
        }
        assert_eq!(e.edges[0].updates.get(&0), Some(&1));
        assert!(e.edges[1].updates.is_empty());
    }

    #[test]
    fn enrich_preconditions() {
        let a = fig1();
        assert_eq!(enrich(&a, &BTreeSet::new(), 1).unwrap_err(), ModelError::EmptyPrivateSet);
        assert!(matches!(enrich(&a, &[1].into(), 1), Err(ModelError::FinalIsPrivate(_))));
        let e = enrich(&a, &[2].into(), 1).unwrap().pta;
        assert!(matches!(enrich(&e, &[2].into(), 1), Err(ModelError::NameCollision(_))));
        let mut lonely = a.clone();
        lonely.edges.retain(|e| e.target != 1);
        assert_eq!(enrich(&lonely, &[2].into(), 1).unwrap().warnings.len(), 1);
    }

    #[test]
    fn initial_private_location_starts_flagged() {
        let e = enrich(&fig8(), &[0].into(), 1).unwrap().pta;
        assert_eq!(e.discretes[0].init, 1);
    }

    #[test]
    fn copy_shares_timing_parameters_only() {
        let e = enrich(&fig1(), &[2].into(), 1).unwrap().pta;
        let c = copy_rename(&e).unwrap();
        let names: Vec<&str> = c.space.iter().map(|(_, n, _)| n).collect();
        assert_eq!(names, ["x'", "p1", "p2", "x_abs", "p_abs"]);
        assert_eq!(c.locations[0].name, "l0'");
        assert_eq!(c.discretes[0].name, "b'");
        assert_eq!(copy_rename(&fig1()).unwrap_err(), ModelError::NotEnriched);
    }

    #[test]
    fn self_composition_synchronizes_finish() {
        let e = enrich(&fig1(), &[2].into(), 1).unwrap().pta;
        let sc = self_compose(&e).unwrap();
        assert!(sc.locations.len() <= e.locations.len().pow(2));
        let into_final: Vec<_> = sc.edges.iter().filter(|x| x.target == sc.final_loc.unwrap()).collect();
        assert!(!into_final.is_empty());
        assert!(into_final.iter().all(|x| x.action.as_deref() == Some(FINISH)));
        // No edge moves a single copy into its final location.
        for x in &sc.edges {
            let src: Vec<&str> = sc.locations[x.source].name.split('|').collect();
            let dst: Vec<&str> = sc.locations[x.target].name.split('|').collect();
            let finals = dst.iter().filter(|n| n.starts_with("l1")).count();
            let was = src.iter().filter(|n| n.starts_with("l1")).count();
            assert!(finals == was || finals == 2);
        }
    }

    #[test]
    fn merge_redirects_edges() {
        let a = fig8();
        let m = merge_finals(&a, &[1, 2]).unwrap();
        let f = m.final_loc.unwrap();
        assert_eq!(m.locations[f].name, "lf+lpriv");
        assert_eq!(m.incoming(f).count(), 3);
    }

    #[test]
    fn rescaling_makes_constants_integral() {
        let mut a = fig8();
        a.edges[2].guard = atom(&a.space, "x", Cmp::Le, LinearTerm::constant("1.5".parse::<Rational>().unwrap()));
        let (r, k) = rescale(&a).unwrap();
        assert_eq!(k, Rational::from(2));
        assert_eq!(r.edges[2].guard.to_string(), "x <= 3");
        assert_eq!(r.edges[0].guard.to_string(), a.edges[0].guard.to_string());
    }
}
