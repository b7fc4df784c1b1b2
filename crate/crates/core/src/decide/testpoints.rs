//! Test-point evaluation: an oracle for quantifier elimination that decides
//! quantifiers by instantiating finitely many candidate values.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::point::{Base, Lit, PointFormula, PointTheory, VarId};
use super::DecideError;

use PointFormula as PF;

/// A concrete point value.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Num {
    Rational(BigRational),
    Integer(i64),
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Num::Rational(q) => write!(f, "{q}"),
            Num::Integer(z) => write!(f, "{z}"),
        }
    }
}

/// Values of the endpoint constants in the concrete model of a dense theory.
pub fn dense_endpoints(th: PointTheory) -> (Option<BigRational>, Option<BigRational>) {
    let zero = BigRational::zero();
    let one = BigRational::one();
    match th {
        PointTheory::DloLeft => (Some(zero), None),
        PointTheory::DloRight => (None, Some(zero)),
        PointTheory::DloClosed => (Some(zero), Some(one)),
        _ => (None, None),
    }
}

/// Truth of `f` in `th` under `env`, which must cover the free variables.
pub fn eval_testpoints(
    f: &PointFormula,
    th: PointTheory,
    env: &HashMap<VarId, Num>,
) -> Result<bool, DecideError> {
    if th.is_dense() {
        let mut vals = Vec::new();
        for (v, n) in env {
            match n {
                Num::Rational(q) => vals.push((*v, q.clone())),
                Num::Integer(_) => return Err(DecideError::ValueMismatch(th)),
            }
        }
        let (lo, hi) = dense_endpoints(th);
        let mut ev = Dense { th, lo, hi };
        ev.eval(f, &mut vals)
    } else if th == PointTheory::DiscreteUnbounded {
        let mut vals = Vec::new();
        for (v, n) in env {
            match n {
                Num::Integer(z) => vals.push((*v, *z)),
                Num::Rational(_) => return Err(DecideError::ValueMismatch(th)),
            }
        }
        let k = f.max_offset();
        let ev = Discrete { k };
        ev.eval(f, &mut vals)
    } else {
        Err(DecideError::TheoryMismatch(th, "eval_testpoints"))
    }
}

fn lookup<T: Clone>(env: &[(VarId, T)], v: VarId) -> Result<T, DecideError> {
    env.iter()
        .rev()
        .find(|(w, _)| *w == v)
        .map(|(_, x)| x.clone())
        .ok_or(DecideError::Unassigned(v))
}

struct Dense {
    th: PointTheory,
    lo: Option<BigRational>,
    hi: Option<BigRational>,
}

impl Dense {
    fn value(&self, b: Base, env: &[(VarId, BigRational)]) -> Result<BigRational, DecideError> {
        match b {
            Base::Min => self.lo.clone().ok_or(DecideError::Malformed("min without endpoint".into())),
            Base::Max => self.hi.clone().ok_or(DecideError::Malformed("max without endpoint".into())),
            Base::Var(v) => lookup(env, v),
        }
    }

    fn lit(&self, l: Lit, env: &[(VarId, BigRational)]) -> Result<bool, DecideError> {
        let (a, b) = l.bases();
        let c = BigRational::from_integer(BigInt::from(l.offset()));
        let (x, y) = (self.value(a, env)?, self.value(b, env)? + c);
        Ok(match l {
            Lit::Lt(..) => x < y,
            Lit::Le(..) => x <= y,
            Lit::Eq(..) => x == y,
        })
    }

    fn candidates(&self, env: &[(VarId, BigRational)]) -> Vec<BigRational> {
        let mut vals: BTreeSet<BigRational> = env.iter().map(|(_, x)| x.clone()).collect();
        vals.extend(self.lo.iter().cloned());
        vals.extend(self.hi.iter().cloned());
        if vals.is_empty() {
            return vec![BigRational::zero()];
        }
        let sorted: Vec<BigRational> = vals.into_iter().collect();
        let two = BigRational::from_integer(BigInt::from(2));
        let mut out = sorted.clone();
        for w in sorted.windows(2) {
            out.push((&w[0] + &w[1]) / &two);
        }
        if self.lo.is_none() {
            out.push(&sorted[0] - BigRational::one());
        }
        if self.hi.is_none() {
            out.push(&sorted[sorted.len() - 1] + BigRational::one());
        }
        debug_assert!(self.th.is_dense());
        out
    }

    fn eval(&mut self, f: &PointFormula, env: &mut Vec<(VarId, BigRational)>) -> Result<bool, DecideError> {
        match f {
            PF::True => Ok(true),
            PF::False => Ok(false),
            PF::Lit(l) => self.lit(*l, env),
            PF::Not(a) => Ok(!self.eval(a, env)?),
            PF::And(xs) => {
                for x in xs {
                    if !self.eval(x, env)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            PF::Or(xs) => {
                for x in xs {
                    if self.eval(x, env)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            PF::Iff(a, b) => Ok(self.eval(a, env)? == self.eval(b, env)?),
            PF::Exists(v, a) | PF::Forall(v, a) => {
                let want = matches!(f, PF::Exists(..));
                for c in self.candidates(env) {
                    env.push((*v, c));
                    let r = self.eval(a, env);
                    env.pop();
                    if r? == want {
                        return Ok(want);
                    }
                }
                Ok(!want)
            }
        }
    }
}

struct Discrete {
    k: i64,
}

impl Discrete {
    fn lit(&self, l: Lit, env: &[(VarId, i64)]) -> Result<bool, DecideError> {
        let val = |b: Base| match b {
            Base::Var(v) => lookup(env, v),
            _ => Err(DecideError::Malformed("endpoint constant in a discrete formula".into())),
        };
        let (a, b) = l.bases();
        let (x, y) = (val(a)?, val(b)? + l.offset());
        Ok(match l {
            Lit::Lt(..) => x < y,
            Lit::Le(..) => x <= y,
            Lit::Eq(..) => x == y,
        })
    }

    fn candidates(&self, env: &[(VarId, i64)], depth: usize) -> Vec<i64> {
        if env.is_empty() {
            return vec![0];
        }
        let r = (1i64 << depth.min(40)) * (2 * self.k + 1);
        let mut out = BTreeSet::new();
        for (_, x) in env {
            for d in -r..=r {
                out.insert(x + d);
            }
        }
        let lo = env.iter().map(|(_, x)| *x).min().expect("nonempty");
        let hi = env.iter().map(|(_, x)| *x).max().expect("nonempty");
        out.insert(lo - r - 1);
        out.insert(hi + r + 1);
        out.into_iter().collect()
    }

    fn eval(&self, f: &PointFormula, env: &mut Vec<(VarId, i64)>) -> Result<bool, DecideError> {
        match f {
            PF::True => Ok(true),
            PF::False => Ok(false),
            PF::Lit(l) => self.lit(*l, env),
            PF::Not(a) => Ok(!self.eval(a, env)?),
            PF::And(xs) => {
                for x in xs {
                    if !self.eval(x, env)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            PF::Or(xs) => {
                for x in xs {
                    if self.eval(x, env)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            PF::Iff(a, b) => Ok(self.eval(a, env)? == self.eval(b, env)?),
            PF::Exists(v, a) | PF::Forall(v, a) => {
                let want = matches!(f, PF::Exists(..));
                for c in self.candidates(env, f.quantifier_depth()) {
                    env.push((*v, c));
                    let r = self.eval(a, env);
                    env.pop();
                    if r? == want {
                        return Ok(want);
                    }
                }
                Ok(!want)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decide::point::mk_and;

    fn between() -> PointFormula {
        PF::Exists(
            2,
            Box::new(mk_and(vec![
                PF::Lit(Lit::Lt(Base::Var(0), Base::Var(2), 0)),
                PF::Lit(Lit::Lt(Base::Var(2), Base::Var(1), 0)),
            ])),
        )
    }

    #[test]
    fn midpoint_and_discreteness() {
        let q = |n: i64| Num::Rational(BigRational::from_integer(BigInt::from(n)));
        let env: HashMap<VarId, Num> = [(0, q(0)), (1, q(1))].into_iter().collect();
        assert!(eval_testpoints(&between(), PointTheory::DloOpen, &env).unwrap());
        let env: HashMap<VarId, Num> = [(0, Num::Integer(0)), (1, Num::Integer(1))].into_iter().collect();
        assert!(!eval_testpoints(&between(), PointTheory::DiscreteUnbounded, &env).unwrap());
        let env2: HashMap<VarId, Num> = [(0, Num::Integer(0)), (1, Num::Integer(2))].into_iter().collect();
        assert!(eval_testpoints(&between(), PointTheory::DiscreteUnbounded, &env2).unwrap());
        assert!(matches!(
            eval_testpoints(&between(), PointTheory::DloOpen, &env),
            Err(DecideError::ValueMismatch(_))
        ));
    }

    #[test]
    fn endpoints() {
        // all x. ex y. y < x fails at the left endpoint.
        let f = PF::Forall(
            0,
            Box::new(PF::Exists(1, Box::new(PF::Lit(Lit::Lt(Base::Var(1), Base::Var(0), 0))))),
        );
        let env = HashMap::new();
        assert!(eval_testpoints(&f, PointTheory::DloOpen, &env).unwrap());
        assert!(eval_testpoints(&f, PointTheory::DloRight, &env).unwrap());
        assert!(!eval_testpoints(&f, PointTheory::DloLeft, &env).unwrap());
        assert!(!eval_testpoints(&f, PointTheory::DloClosed, &env).unwrap());
        assert!(eval_testpoints(&f, PointTheory::DiscreteUnbounded, &env).unwrap());
    }
}
