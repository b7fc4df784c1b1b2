//! Helpers shared by integration tests.

#![allow(dead_code)]

use ipdef::decide::{Base, Lit, PointFormula, PointTheory, VarId};
use rand::Rng;

/// A random sentence of quantifier depth at most `max_depth` that fits `th`.
pub fn random_sentence<R: Rng>(rng: &mut R, th: PointTheory, max_depth: usize) -> PointFormula {
    let depth = rng.gen_range(1..=max_depth);
    let f = gen(rng, th, depth, &mut Vec::new(), 3);
    debug_assert!(f.fits(th) && f.free_vars().is_empty());
    f
}

fn gen<R: Rng>(rng: &mut R, th: PointTheory, depth: usize, bound: &mut Vec<VarId>, size: usize) -> PointFormula {
    if depth > 0 && (bound.is_empty() || rng.gen_bool(0.5)) {
        let v = bound.len() as VarId;
        bound.push(v);
        let body = gen(rng, th, depth - 1, bound, 3);
        bound.pop();
        return if rng.gen_bool(0.5) {
            PointFormula::Exists(v, Box::new(body))
        } else {
            PointFormula::Forall(v, Box::new(body))
        };
    }
    if size == 0 || rng.gen_bool(0.35) {
        return PointFormula::Lit(literal(rng, th, bound));
    }
    let mut sub = |rng: &mut R| gen(rng, th, depth, bound, size - 1);
    match rng.gen_range(0..4) {
        0 => PointFormula::Not(Box::new(sub(rng))),
        1 => PointFormula::And(vec![sub(rng), sub(rng)]),
        2 => PointFormula::Or(vec![sub(rng), sub(rng)]),
        _ => PointFormula::Iff(Box::new(sub(rng)), Box::new(sub(rng))),
    }
}

fn literal<R: Rng>(rng: &mut R, th: PointTheory, bound: &[VarId]) -> Lit {
    let mut bases: Vec<Base> = bound.iter().map(|v| Base::Var(*v)).collect();
    if th.has_min() {
        bases.push(Base::Min);
    }
    if th.has_max() {
        bases.push(Base::Max);
    }
    let a = bases[rng.gen_range(0..bases.len())];
    let b = bases[rng.gen_range(0..bases.len())];
    if th.is_dense() {
        match rng.gen_range(0..3) {
            0 => Lit::Lt(a, b, 0),
            1 => Lit::Le(a, b, 0),
            _ => Lit::Eq(a, b, 0),
        }
    } else {
        let k = rng.gen_range(-2..=2);
        if rng.gen_bool(0.6) {
            Lit::Lt(a, b, k)
        } else {
            Lit::Eq(a, b, k)
        }
    }
}
