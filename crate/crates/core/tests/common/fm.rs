//! Plain Fourier–Motzkin feasibility over exact rationals, written apart
//! from the library's row engine: no normalization, no pruning.

use topaz_core::poly::{Dim, Inequality, Polyhedron, Relation};
use topaz_core::Rational;

#[derive(Debug, Clone)]
pub struct ORow {
    pub coeffs: Vec<Rational>,
    pub constant: Rational,
    pub strict: bool,
}

/// Rewrites `ineq` over `nv` fresh variables; `map(d)` gives dimension `d`
/// as `constant + Σ coeffs·vars`. Equalities become two rows.
pub fn substitute(ineq: &Inequality, nv: usize, map: &dyn Fn(Dim) -> (Rational, Vec<Rational>)) -> Vec<ORow> {
    let mut coeffs = vec![Rational::zero(); nv];
    let mut constant = ineq.term.constant_part().clone();
    for (&d, c) in ineq.term.coeffs() {
        let (k, v) = map(d);
        constant = constant + &(c * &k);
        for (acc, x) in coeffs.iter_mut().zip(&v) {
            *acc = &*acc + &(c * x);
        }
    }
    let row = ORow { coeffs, constant, strict: ineq.relation == Relation::Lt };
    if ineq.relation == Relation::Eq {
        let neg = ORow { coeffs: row.coeffs.iter().map(|c| -c).collect(), constant: -&row.constant, strict: false };
        vec![row, neg]
    } else {
        vec![row]
    }
}

/// Whether some real point satisfies every `Σ coeffs·v + constant < or ≤ 0`.
pub fn feasible(mut rows: Vec<ORow>, nv: usize) -> bool {
    for v in 0..nv {
        let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for r in rows {
            if r.coeffs[v].is_positive() {
                pos.push(r);
            } else if r.coeffs[v].is_negative() {
                neg.push(r);
            } else {
                rest.push(r);
            }
        }
        for p in &pos {
            for n in &neg {
                // scale p by -n_v and n by p_v, both positive
                let a = -&n.coeffs[v];
                let b = p.coeffs[v].clone();
                let coeffs = p.coeffs.iter().zip(&n.coeffs).map(|(x, y)| &(x * &a) + &(y * &b)).collect();
                let constant = &(&p.constant * &a) + &(&n.constant * &b);
                rest.push(ORow { coeffs, constant, strict: p.strict || n.strict });
            }
        }
        rows = rest;
    }
    rows.iter().all(|r| if r.strict { r.constant.is_negative() } else { !r.constant.is_positive() })
}

fn rows_of(p: &Polyhedron, nv: usize, map: &dyn Fn(Dim) -> (Rational, Vec<Rational>)) -> Vec<ORow> {
    p.inequalities().iter().flat_map(|i| substitute(i, nv, map)).collect()
}

fn unit(nv: usize, i: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); nv];
    v[i] = Rational::one();
    v
}

/// Satisfiability with every dimension free.
pub fn satisfiable(p: &Polyhedron) -> bool {
    let n = p.space().len();
    feasible(rows_of(p, n, &|d| (Rational::zero(), unit(n, d))), n)
}

/// `v ⊨ ∃dims. p`, the dropped dimensions being free.
pub fn in_projection(p: &Polyhedron, dims: &[Dim], v: &[Rational]) -> bool {
    let nv = dims.len();
    let map = |d: Dim| match dims.iter().position(|&x| x == d) {
        Some(i) => (Rational::zero(), unit(nv, i)),
        None => (v[d].clone(), vec![Rational::zero(); nv]),
    };
    feasible(rows_of(p, nv, &map), nv)
}

/// `v` is reached from `p` by a nonnegative delay on `clocks`.
pub fn in_elapse(p: &Polyhedron, clocks: &[Dim], v: &[Rational]) -> bool {
    let map = |d: Dim| {
        if clocks.contains(&d) {
            (v[d].clone(), vec![-Rational::one()])
        } else {
            (v[d].clone(), vec![Rational::zero()])
        }
    };
    let mut rows = rows_of(p, 1, &map);
    rows.push(ORow { coeffs: vec![-Rational::one()], constant: Rational::zero(), strict: false });
    feasible(rows, 1)
}

/// `v` is `p` with `clocks` set to zero.
pub fn in_reset(p: &Polyhedron, clocks: &[Dim], v: &[Rational]) -> bool {
    clocks.iter().all(|&c| v[c].is_zero()) && in_projection(p, clocks, v)
}
