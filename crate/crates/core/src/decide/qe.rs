//! Quantifier elimination for dense completions and the discrete unbounded order.

use super::point::{lit, mk_and, mk_or, Base, Lit, Norm, PointFormula, PointTheory, VarId};
use super::DecideError;

use PointFormula as PF;

/// Eliminates all quantifiers of `f` over a dense completion.
pub fn qe_dense(f: &PointFormula, th: PointTheory) -> Result<PointFormula, DecideError> {
    if !th.is_dense() {
        return Err(DecideError::TheoryMismatch(th, "qe_dense"));
    }
    if !f.fits(th) {
        return Err(DecideError::Malformed(format!("formula does not fit {th}")));
    }
    Ok(qe_rec(f, th))
}

/// Eliminates all quantifiers of `f` over the discrete unbounded order.
pub fn qe_discrete(f: &PointFormula) -> Result<PointFormula, DecideError> {
    let th = PointTheory::DiscreteUnbounded;
    if !f.fits(th) {
        return Err(DecideError::Malformed("endpoint constant in a discrete formula".into()));
    }
    Ok(qe_rec(f, th))
}

/// Eliminates quantifiers over any symbolic theory.
pub fn qe(f: &PointFormula, th: PointTheory) -> Result<PointFormula, DecideError> {
    match th {
        PointTheory::DiscreteUnbounded => qe_discrete(f),
        PointTheory::FiniteChain(_) => Err(DecideError::TheoryMismatch(th, "qe")),
        _ => qe_dense(f, th),
    }
}

/// Negation of a quantifier-free formula, pushed to the literals.
pub fn negate(f: &PointFormula, th: PointTheory) -> PointFormula {
    match f {
        PF::True => PF::False,
        PF::False => PF::True,
        PF::Lit(l) => l.negate(th),
        PF::Not(a) => nnf(a, th),
        PF::And(xs) => mk_or(xs.iter().map(|x| negate(x, th)).collect()),
        PF::Or(xs) => mk_and(xs.iter().map(|x| negate(x, th)).collect()),
        PF::Iff(a, b) => {
            let (a, b) = (nnf(a, th), nnf(b, th));
            mk_or(vec![
                mk_and(vec![a.clone(), negate(&b, th)]),
                mk_and(vec![negate(&a, th), b]),
            ])
        }
        PF::Exists(..) | PF::Forall(..) => PF::Not(Box::new(f.clone())),
    }
}

/// Negation normal form of a quantifier-free formula.
pub fn nnf(f: &PointFormula, th: PointTheory) -> PointFormula {
    match f {
        PF::True | PF::False => f.clone(),
        PF::Lit(l) => lit(*l),
        PF::Not(a) => negate(a, th),
        PF::And(xs) => mk_and(xs.iter().map(|x| nnf(x, th)).collect()),
        PF::Or(xs) => mk_or(xs.iter().map(|x| nnf(x, th)).collect()),
        PF::Iff(a, b) => {
            let (a, b) = (nnf(a, th), nnf(b, th));
            mk_or(vec![
                mk_and(vec![a.clone(), b.clone()]),
                mk_and(vec![negate(&a, th), negate(&b, th)]),
            ])
        }
        PF::Exists(..) | PF::Forall(..) => f.clone(),
    }
}

fn qe_rec(f: &PointFormula, th: PointTheory) -> PointFormula {
    match f {
        PF::True | PF::False => f.clone(),
        PF::Lit(l) => lit(*l),
        PF::Not(a) => negate(&qe_rec(a, th), th),
        PF::And(xs) => mk_and(xs.iter().map(|x| qe_rec(x, th)).collect()),
        PF::Or(xs) => mk_or(xs.iter().map(|x| qe_rec(x, th)).collect()),
        PF::Iff(a, b) => {
            let (a, b) = (qe_rec(a, th), qe_rec(b, th));
            mk_or(vec![
                mk_and(vec![a.clone(), b.clone()]),
                mk_and(vec![negate(&a, th), negate(&b, th)]),
            ])
        }
        PF::Exists(v, a) => elim(*v, &qe_rec(a, th), th),
        PF::Forall(v, a) => {
            let body = qe_rec(a, th);
            negate(&elim(*v, &negate(&body, th), th), th)
        }
    }
}

/// `∃v.f` for quantifier-free NNF `f`.
fn elim(v: VarId, f: &PointFormula, th: PointTheory) -> PointFormula {
    if !f.mentions(v) {
        return f.clone();
    }
    match f {
        PF::Or(xs) => mk_or(xs.iter().map(|x| elim(v, x, th)).collect()),
        PF::And(xs) => {
            let (bound, mut free): (Vec<_>, Vec<_>) = xs.iter().cloned().partition(|x| x.mentions(v));
            let disjuncts = dnf(&mk_and(bound), th);
            let eliminated = disjuncts
                .into_iter()
                .filter_map(|c| elim_conj(v, &c, th))
                .map(|c| mk_and(c.into_iter().map(PF::Lit).collect()))
                .collect();
            free.push(mk_or(eliminated));
            mk_and(free)
        }
        PF::Lit(l) => match elim_conj(v, &[*l], th) {
            Some(c) => mk_and(c.into_iter().map(PF::Lit).collect()),
            None => PF::False,
        },
        other => unreachable!("elimination expects NNF, got {other:?}"),
    }
}

/// Disjunctive normal form with unsatisfiable and subsumed disjuncts pruned.
pub fn dnf(f: &PointFormula, th: PointTheory) -> Vec<Vec<Lit>> {
    match f {
        PF::True => vec![vec![]],
        PF::False => vec![],
        PF::Lit(l) => vec![vec![*l]],
        PF::Or(xs) => {
            let mut out: Vec<Vec<Lit>> = xs.iter().flat_map(|x| dnf(x, th)).collect();
            prune(&mut out);
            out
        }
        PF::And(xs) => {
            let mut acc: Vec<Vec<Lit>> = vec![vec![]];
            // Literals first keeps intermediate products small.
            let mut parts: Vec<&PointFormula> = xs.iter().collect();
            parts.sort_by_key(|x| !matches!(x, PF::Lit(_)));
            for x in parts {
                let d = dnf(x, th);
                let mut next = Vec::with_capacity(acc.len() * d.len());
                for a in &acc {
                    for b in &d {
                        let mut c = a.clone();
                        c.extend_from_slice(b);
                        c.sort();
                        c.dedup();
                        if satisfiable(&c, th) {
                            next.push(c);
                        }
                    }
                }
                prune(&mut next);
                acc = next;
                if acc.is_empty() {
                    break;
                }
            }
            acc
        }
        other => unreachable!("dnf expects quantifier-free NNF, got {other:?}"),
    }
}

/// Drops duplicate disjuncts and those that contain another disjunct.
fn prune(ds: &mut Vec<Vec<Lit>>) {
    ds.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    ds.dedup();
    if ds.len() > 4000 {
        return;
    }
    let mut kept: Vec<Vec<Lit>> = Vec::with_capacity(ds.len());
    for d in ds.drain(..) {
        let subsumed = kept.iter().any(|k| k.iter().all(|l| d.binary_search(l).is_ok()));
        if !subsumed {
            kept.push(d);
        }
    }
    *ds = kept;
}

fn elim_conj(v: VarId, conj: &[Lit], th: PointTheory) -> Option<Vec<Lit>> {
    let sv = Base::Var(v);
    // Equalities: substitute and finish.
    for l in conj {
        if let Lit::Eq(a, b, c) = *l {
            let sub = if a == sv && b != sv {
                Some((b, c))
            } else if b == sv && a != sv {
                Some((a, -c))
            } else {
                None
            };
            if let Some((t, k)) = sub {
                return finish(conj.iter().map(|m| m.subst(v, t, k)).collect());
            }
        }
    }
    let mut out = Vec::new();
    // Bounds `t + k <= v` (lower) and `v <= t + k` (upper), with a strictness
    // flag in the dense case. Discrete bounds are inclusive.
    let mut lower: Vec<(Base, i64, bool)> = Vec::new();
    let mut upper: Vec<(Base, i64, bool)> = Vec::new();
    let dense = th.is_dense();
    for l in conj {
        match *l {
            Lit::Lt(a, b, c) if a == sv => upper.push(if dense { (b, c, true) } else { (b, c - 1, false) }),
            Lit::Lt(a, b, c) if b == sv => lower.push(if dense { (a, -c, true) } else { (a, 1 - c, false) }),
            Lit::Le(a, b, c) if a == sv => upper.push((b, c, false)),
            Lit::Le(a, b, c) if b == sv => lower.push((a, -c, false)),
            other => out.push(other),
        }
    }
    if dense {
        let cmp = |a: Base, b: Base, strict: bool| if strict { Lit::Lt(a, b, 0) } else { Lit::Le(a, b, 0) };
        for &(l, _, s1) in &lower {
            for &(u, _, s2) in &upper {
                out.push(cmp(l, u, s1 || s2));
            }
        }
        if lower.is_empty() && th.has_min() {
            out.extend(upper.iter().map(|&(u, _, s)| cmp(Base::Min, u, s)));
        }
        if upper.is_empty() && th.has_max() {
            out.extend(lower.iter().map(|&(l, _, s)| cmp(l, Base::Max, s)));
        }
    } else {
        for &(l, p, _) in &lower {
            for &(u, q, _) in &upper {
                // l + p <= u + q
                out.push(Lit::Lt(l, u, q - p + 1));
            }
        }
    }
    finish(out)
}

fn finish(lits: Vec<Lit>) -> Option<Vec<Lit>> {
    let mut out = Vec::with_capacity(lits.len());
    for l in lits {
        match l.normalize() {
            Norm::Const(true) => {}
            Norm::Const(false) => return None,
            Norm::Lit(l) => out.push(l),
        }
    }
    out.sort();
    out.dedup();
    Some(out)
}

/// Exact satisfiability of a conjunction of literals, via shortest paths over
/// difference constraints.
pub fn satisfiable(conj: &[Lit], th: PointTheory) -> bool {
    let mut nodes: Vec<Base> = Vec::new();
    if th.has_min() {
        nodes.push(Base::Min);
    }
    if th.has_max() {
        nodes.push(Base::Max);
    }
    for l in conj {
        let (a, b) = l.bases();
        for x in [a, b] {
            if !nodes.contains(&x) {
                nodes.push(x);
            }
        }
    }
    let n = nodes.len();
    let idx = |x: Base| nodes.iter().position(|&y| y == x).expect("node");
    // d[i][j] bounds x_j - x_i: (weight, strict).
    const INF: Option<(i64, bool)> = None;
    let mut d = vec![vec![INF; n]; n];
    let add = |d: &mut Vec<Vec<Option<(i64, bool)>>>, from: usize, to: usize, w: (i64, bool)| {
        let cell = &mut d[from][to];
        if cell.is_none_or(|c| tighter(w, c)) {
            *cell = Some(w);
        }
    };
    for i in 0..n {
        add(&mut d, i, i, (0, false));
    }
    let dense = th.is_dense();
    for l in conj {
        match *l {
            // a - b < c
            Lit::Lt(a, b, c) => {
                let w = if dense { (c, true) } else { (c - 1, false) };
                add(&mut d, idx(b), idx(a), w);
            }
            Lit::Le(a, b, c) => add(&mut d, idx(b), idx(a), (c, false)),
            Lit::Eq(a, b, c) => {
                add(&mut d, idx(b), idx(a), (c, false));
                add(&mut d, idx(a), idx(b), (-c, false));
            }
        }
    }
    if th.has_min() {
        let m = idx(Base::Min);
        for j in 0..n {
            add(&mut d, j, m, (0, false));
        }
    }
    if th.has_max() {
        let m = idx(Base::Max);
        for j in 0..n {
            add(&mut d, m, j, (0, false));
        }
    }
    if th.has_min() && th.has_max() {
        add(&mut d, idx(Base::Max), idx(Base::Min), (0, true));
    }
    for k in 0..n {
        for i in 0..n {
            let Some(ik) = d[i][k] else { continue };
            for j in 0..n {
                if let Some(kj) = d[k][j] {
                    let w = (ik.0 + kj.0, ik.1 || kj.1);
                    if d[i][j].is_none_or(|c| tighter(w, c)) {
                        d[i][j] = Some(w);
                    }
                }
            }
        }
        if (0..n).any(|i| d[i][i].is_some_and(|w| w.0 < 0 || (w.0 == 0 && w.1))) {
            return false;
        }
    }
    true
}

fn tighter(a: (i64, bool), b: (i64, bool)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 && !b.1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: VarId) -> Base {
        Base::Var(i)
    }

    fn lt(a: Base, b: Base, c: i64) -> PointFormula {
        PF::Lit(Lit::Lt(a, b, c))
    }

    fn ex(x: VarId, f: PointFormula) -> PointFormula {
        PF::Exists(x, Box::new(f))
    }

    #[test]
    fn dense_examples() {
        let f = ex(2, mk_and(vec![lt(v(0), v(2), 0), lt(v(2), v(1), 0)]));
        assert_eq!(qe_dense(&f, PointTheory::DloOpen).unwrap(), lt(v(0), v(1), 0));
        let f = ex(2, lt(v(2), v(1), 0));
        assert_eq!(qe_dense(&f, PointTheory::DloClosed).unwrap(), lt(Base::Min, v(1), 0));
        let f = ex(2, lt(v(0), v(2), 0));
        assert_eq!(qe_dense(&f, PointTheory::DloOpen).unwrap(), PF::True);
        assert!(qe_dense(&lt(v(0), v(1), 1), PointTheory::DloOpen).is_err());
    }

    #[test]
    fn discrete_examples() {
        let f = ex(2, mk_and(vec![lt(v(0), v(2), 0), lt(v(2), v(1), 0)]));
        assert_eq!(qe_discrete(&f).unwrap(), lt(v(0), v(1), -1));
        let f = ex(2, lt(v(0), v(2), 0));
        assert_eq!(qe_discrete(&f).unwrap(), PF::True);
        assert_eq!(qe_discrete(&lt(v(0), v(0), -1)).unwrap(), PF::False);
    }

    #[test]
    fn sentences_reduce_to_constants() {
        // all x. ex y. x < y
        let f = PF::Forall(0, Box::new(ex(1, lt(v(0), v(1), 0))));
        assert_eq!(qe_dense(&f, PointTheory::DloOpen).unwrap(), PF::True);
        assert_eq!(qe_dense(&f, PointTheory::DloRight).unwrap(), PF::False);
        assert_eq!(qe_discrete(&f).unwrap(), PF::True);
        // all x y. x < y -> ex z. x < z < y
        let dens = PF::Forall(
            0,
            Box::new(PF::Forall(
                1,
                Box::new(mk_or(vec![
                    PF::Not(Box::new(lt(v(0), v(1), 0))),
                    ex(2, mk_and(vec![lt(v(0), v(2), 0), lt(v(2), v(1), 0)])),
                ])),
            )),
        );
        assert_eq!(qe_dense(&dens, PointTheory::DloClosed).unwrap(), PF::True);
        assert_eq!(qe_discrete(&dens).unwrap(), PF::False);
    }

    #[test]
    fn satisfiability() {
        let th = PointTheory::DiscreteUnbounded;
        assert!(!satisfiable(&[Lit::Lt(v(0), v(1), 0), Lit::Lt(v(1), v(0), 1)], th));
        assert!(satisfiable(&[Lit::Lt(v(0), v(1), 0), Lit::Lt(v(1), v(0), 2)], th));
        let th = PointTheory::DloClosed;
        assert!(!satisfiable(&[Lit::Lt(v(0), Base::Min, 0)], th));
        assert!(!satisfiable(&[Lit::Eq(v(0), Base::Min, 0), Lit::Eq(v(0), Base::Max, 0)], th));
        assert!(satisfiable(&[Lit::Eq(v(0), Base::Min, 0), Lit::Lt(v(0), v(1), 0)], th));
    }
}
