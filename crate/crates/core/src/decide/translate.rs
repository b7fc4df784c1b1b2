//! Two-sorted to one-sorted translation: intervals become endpoint pairs.

use crate::formulas::{DefinabilityQuery, Formula};
use crate::relations::{Kind, RelationSymbol, Sort};

use super::point::{mk_and, mk_or, Lit, PointFormula, VarId};

use PointFormula as PF;

/// A translated query.
#[derive(Debug, Clone)]
pub struct Translation {
    /// Universal closure of the guarded biconditional.
    pub sentence: PointFormula,
    /// The guarded biconditional with the query variables free.
    pub matrix: PointFormula,
    /// Query variables with their sorts and endpoint variables.
    pub free: Vec<(String, Sort, Vec<VarId>)>,
    /// Display names indexed by variable id.
    pub names: Vec<String>,
}

#[derive(Default)]
struct Ctx {
    names: Vec<String>,
    scope: Vec<(String, Vec<VarId>)>,
}

impl Ctx {
    fn fresh(&mut self, name: String) -> VarId {
        self.names.push(name);
        (self.names.len() - 1) as VarId
    }

    fn bind(&mut self, var: &str, sort: Sort) -> Vec<VarId> {
        let ids = match sort {
            Sort::Point => vec![self.fresh(var.to_string())],
            Sort::Interval => vec![self.fresh(format!("{var}_l")), self.fresh(format!("{var}_r"))],
        };
        self.scope.push((var.to_string(), ids.clone()));
        ids
    }

    fn lookup(&self, var: &str) -> &[VarId] {
        &self
            .scope
            .iter()
            .rev()
            .find(|(n, _)| n == var)
            .unwrap_or_else(|| panic!("unbound variable `{var}` in a validated formula"))
            .1
    }

    fn formula(&mut self, f: &Formula) -> PointFormula {
        match f {
            Formula::Atom { rel, lhs, rhs } => {
                let (a, b) = (self.lookup(lhs).to_vec(), self.lookup(rhs).to_vec());
                atom(*rel, &a, &b)
            }
            Formula::Not(a) => PF::Not(Box::new(self.formula(a))),
            Formula::And(a, b) => mk_and(vec![self.formula(a), self.formula(b)]),
            Formula::Or(a, b) => mk_or(vec![self.formula(a), self.formula(b)]),
            Formula::Implies(a, b) => {
                mk_or(vec![PF::Not(Box::new(self.formula(a))), self.formula(b)])
            }
            Formula::Iff(a, b) => PF::Iff(Box::new(self.formula(a)), Box::new(self.formula(b))),
            Formula::Exists { var, sort, body } => {
                let ids = self.bind(var, *sort);
                let inner = self.formula(body);
                self.scope.pop();
                match ids[..] {
                    [p] => PF::Exists(p, Box::new(inner)),
                    [l, r] => PF::Exists(
                        l,
                        Box::new(PF::Exists(r, Box::new(mk_and(vec![PF::Lit(Lit::lt(l, r)), inner])))),
                    ),
                    _ => unreachable!(),
                }
            }
            Formula::Forall { var, sort, body } => {
                let ids = self.bind(var, *sort);
                let inner = self.formula(body);
                self.scope.pop();
                match ids[..] {
                    [p] => PF::Forall(p, Box::new(inner)),
                    [l, r] => PF::Forall(
                        l,
                        Box::new(PF::Forall(
                            r,
                            Box::new(mk_or(vec![PF::Not(Box::new(PF::Lit(Lit::lt(l, r)))), inner])),
                        )),
                    ),
                    _ => unreachable!(),
                }
            }
        }
    }
}

/// Literal placing point `c` in region `k` of the point `p`.
fn point_region_lits(k: u8, p: VarId, c: VarId) -> Vec<Lit> {
    match k {
        0 => vec![Lit::lt(c, p)],
        2 => vec![Lit::eq(p, c)],
        _ => vec![Lit::lt(p, c)],
    }
}

/// Literals placing point `c` in region `k` of the interval `[a,b]`.
fn interval_region_lits(k: u8, a: VarId, b: VarId, c: VarId) -> Vec<Lit> {
    match k {
        0 => vec![Lit::lt(c, a)],
        1 => vec![Lit::eq(a, c)],
        2 => vec![Lit::lt(a, c), Lit::lt(c, b)],
        3 => vec![Lit::eq(b, c)],
        _ => vec![Lit::lt(b, c)],
    }
}

/// Endpoint translation of the atom `r(a, b)`.
pub fn atom(r: RelationSymbol, a: &[VarId], b: &[VarId]) -> PointFormula {
    let lits = match r.kind() {
        Kind::PP => point_region_lits(r.region(), a[0], b[0]),
        Kind::IP => interval_region_lits(r.region(), a[0], a[1], b[0]),
        Kind::PI => {
            let (k, k2) = r.regions();
            let mut v = point_region_lits(k, a[0], b[0]);
            // b_l in region 4 already forces b_r there.
            if k != 4 {
                v.extend(point_region_lits(k2, a[0], b[1]));
            }
            v
        }
        Kind::II => {
            let (k, k2) = r.regions();
            let (l, rr) = (a[0], a[1]);
            let mut v = interval_region_lits(k, l, rr, b[0]);
            let mut w = interval_region_lits(k2, l, rr, b[1]);
            // Guards implied by b_l < b_r and the region of b_l.
            if k2 == 2 && k >= 1 {
                w.retain(|x| *x != Lit::lt(l, b[1]));
            }
            if k2 == 4 && k >= 3 {
                w.clear();
            }
            v.extend(w);
            v
        }
    };
    mk_and(lits.into_iter().map(PF::Lit).collect())
}

/// Translates a query into a one-sorted sentence.
pub fn translate(q: &DefinabilityQuery) -> Translation {
    let mut ctx = Ctx::default();
    let (s1, s2) = q.target.sorts();
    let mut free = Vec::new();
    for (v, s) in [(&q.vars.0, s1), (&q.vars.1, s2)] {
        let ids = ctx.bind(v, s);
        free.push((v.clone(), s, ids));
    }
    let body = ctx.formula(&q.body);
    let target = ctx.formula(&q.target_atom());
    let guards: Vec<PointFormula> = free
        .iter()
        .filter(|(_, _, ids)| ids.len() == 2)
        .map(|(_, _, ids)| PF::Not(Box::new(PF::Lit(Lit::lt(ids[0], ids[1])))))
        .collect();
    let mut parts = guards;
    parts.push(PF::Iff(Box::new(body), Box::new(target)));
    let matrix = mk_or(parts);
    let mut sentence = matrix.clone();
    for (_, _, ids) in free.iter().rev() {
        for &id in ids.iter().rev() {
            sentence = PF::Forall(id, Box::new(sentence));
        }
    }
    Translation { sentence, matrix, free, names: ctx.names }
}

/// Translates a closed or open two-sorted formula; free variables get fresh ids
/// in order of first occurrence.
pub fn translate_formula(f: &Formula) -> (PointFormula, Vec<(String, Sort, Vec<VarId>)>, Vec<String>) {
    let mut ctx = Ctx::default();
    let mut free = Vec::new();
    let sorts = f.free_vars();
    for v in f.free_vars_ordered() {
        let s = sorts[&v];
        let ids = ctx.bind(&v, s);
        free.push((v, s, ids));
    }
    let pf = ctx.formula(f);
    (pf, free, ctx.names)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulas::parse;
    use crate::relations::ExplicitSet;

    #[test]
    fn atoms() {
        let names = vec!["x_l".to_string(), "x_r".to_string(), "c".to_string()];
        let f = atom(RelationSymbol::IP0, &[0, 1], &[2]);
        assert_eq!(f.display(&names).to_string(), "c < x_l");
        let f = atom(RelationSymbol::LT, &[0], &[1]);
        assert_eq!(f, PF::Lit(Lit::lt(0, 1)));
        // meets: x_r = y_l, with y_r > x_r implied.
        let f = atom(RelationSymbol::II34, &[0, 1], &[2, 3]);
        assert_eq!(f, PF::Lit(Lit::eq(1, 2)));
        // during: y_l < x_l and x_r < y_r.
        let f = atom(RelationSymbol::II04, &[0, 1], &[2, 3]);
        assert_eq!(f, mk_and(vec![PF::Lit(Lit::lt(2, 0)), PF::Lit(Lit::lt(1, 3))]));
    }

    #[test]
    fn query_shape() {
        let body = parse("all z:p.(ip2(x,z) <-> ip2(y,z))").unwrap();
        let q = DefinabilityQuery::new(
            ExplicitSet::singleton(RelationSymbol::IP2).unwrap(),
            RelationSymbol::EQI,
            body,
            None,
        )
        .unwrap();
        let t = translate(&q);
        assert_eq!(t.names[..4], ["x_l", "x_r", "y_l", "y_r"]);
        assert_eq!(t.sentence.free_vars(), Vec::<VarId>::new());
        assert_eq!(t.matrix.free_vars(), vec![0, 1, 2, 3]);
        assert_eq!(t.sentence.quantifier_depth(), 5);
    }
}
