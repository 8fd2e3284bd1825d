use std::fmt::Write;

use super::{Atom, EdgeDecl, Expr, LocationDecl, ModelFile};
use crate::rational::Rational;

/// Renders a model file in the canonical layout accepted by the parser.
pub fn print_model(m: &ModelFile) -> String {
    let mut out = String::new();
    let list = |out: &mut String, kw: &str, names: &[String]| {
        if !names.is_empty() {
            let _ = writeln!(out, "{kw} {};", names.join(", "));
        }
    };
    list(&mut out, "clocks", &m.clocks);
    list(&mut out, "parameters", &m.parameters);
    list(&mut out, "data parameters", &m.data_parameters);
    for d in &m.discretes {
        let _ = writeln!(out, "discrete {} : {}..{} = {};", d.name, d.lo, d.hi, d.init);
    }
    list(&mut out, "actions", &m.actions);
    list(&mut out, "synchronize", &m.synchronize);
    for a in &m.automata {
        let _ = writeln!(out, "\nautomaton {} {{", a.name);
        for l in &a.locations {
            location(&mut out, l);
        }
        out.push_str("}\n");
    }
    if !m.benches.is_empty() {
        out.push('\n');
    }
    for b in &m.benches {
        let _ = write!(out, "bench {}", b.command);
        if !b.valuation.is_empty() {
            let vals: Vec<String> = b.valuation.iter().map(|(n, v)| format!("{n} = {v}")).collect();
            let _ = write!(out, " with {}", vals.join(", "));
        }
        if let Some(n) = b.budget {
            let _ = write!(out, " budget {n}");
        }
        out.push_str(";\n");
    }
    out
}

fn location(out: &mut String, l: &LocationDecl) {
    out.push_str("  ");
    for (flag, kw) in [(l.init, "init "), (l.is_final, "final "), (l.private, "private "), (l.urgent, "urgent ")] {
        if flag {
            out.push_str(kw);
        }
    }
    let _ = write!(out, "location {}", l.name);
    if !l.invariant.is_empty() {
        let _ = write!(out, " invariant {}", guard(&l.invariant));
    }
    if l.edges.is_empty() {
        out.push_str(";\n");
        return;
    }
    out.push_str(" {\n");
    for e in &l.edges {
        edge(out, e);
    }
    out.push_str("  }\n");
}

fn edge(out: &mut String, e: &EdgeDecl) {
    out.push_str("    ");
    if !e.guard.is_empty() {
        let _ = write!(out, "when {} ", guard(&e.guard));
    }
    if let Some((a, _)) = &e.sync {
        let _ = write!(out, "sync {a} ");
    }
    if !e.assignments.is_empty() {
        let asg: Vec<String> = e.assignments.iter().map(|a| format!("{} := {}", a.target, a.value)).collect();
        let _ = write!(out, "do {} ", asg.join(", "));
    }
    let _ = writeln!(out, "goto {};", e.target);
}

fn guard(atoms: &[Atom]) -> String {
    let parts: Vec<String> =
        atoms.iter().map(|a| format!("{} {} {}", expr(&a.lhs), a.cmp.symbol(), expr(&a.rhs))).collect();
    parts.join(" && ")
}

fn expr(e: &Expr) -> String {
    let mut s = String::new();
    for (i, (name, c)) in e.terms.iter().enumerate() {
        let mag = c.abs();
        match (i, c.is_negative()) {
            (0, true) => s.push('-'),
            (0, false) => {}
            (_, true) => s.push_str(" - "),
            (_, false) => s.push_str(" + "),
        }
        if mag == Rational::one() {
            s.push_str(name);
        } else {
            let _ = write!(s, "{mag}*{name}");
        }
    }
    let k = &e.constant;
    if e.terms.is_empty() {
        let _ = write!(s, "{k}");
    } else if k.is_positive() {
        let _ = write!(s, " + {k}");
    } else if k.is_negative() {
        let _ = write!(s, " - {}", k.abs());
    }
    s
}
