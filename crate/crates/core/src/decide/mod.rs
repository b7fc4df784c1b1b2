//! Validity of definability queries per class.
//!
//! Queries are translated to one-sorted point sentences, decided exactly by
//! quantifier elimination over the dense completions and the discrete
//! unbounded order, and by exhaustive evaluation over finite chains.

pub mod point;
pub mod qe;
pub mod testpoints;
pub mod translate;

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::formulas::{eval_finite, DefinabilityQuery, Formula, FormulaError};
use crate::relations::Sort;
use crate::rulebase::ClassTag;
use crate::structures::{ChainStructure, Element};

pub use point::{Base, Lit, PointFormula, PointTheory, VarId};
pub use qe::{qe, qe_dense, qe_discrete};
pub use testpoints::{eval_testpoints, Num};
pub use translate::{translate, Translation};

/// Errors raised by the deciders.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecideError {
    #[error("{1} does not apply to {0}")]
    TheoryMismatch(PointTheory, &'static str),
    #[error("value type does not match {0}")]
    ValueMismatch(PointTheory),
    #[error("variable v{0} has no value")]
    Unassigned(VarId),
    #[error("malformed point formula: {0}")]
    Malformed(String),
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

/// A falsifying model and assignment of the query variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Countermodel {
    pub theory: PointTheory,
    pub assignment: Vec<(String, String)>,
}

impl fmt::Display for Countermodel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.theory)?;
        for (v, x) in &self.assignment {
            write!(f, " {v}={x}")?;
        }
        Ok(())
    }
}

/// Outcome of a validity check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// Valid over the whole class (exact policies only).
    Valid,
    /// Refuted by a model of the class.
    Invalid(Countermodel),
    /// True in every representative model; evidence, not proof.
    ValidOnRepresentatives(Vec<PointTheory>),
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Valid => "VALID",
            Verdict::Invalid(_) => "INVALID",
            Verdict::ValidOnRepresentatives(_) => "VALID_ON_REPRESENTATIVES",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Valid => write!(f, "VALID"),
            Verdict::Invalid(c) => write!(f, "INVALID {c}"),
            Verdict::ValidOnRepresentatives(ts) => {
                write!(f, "VALID_ON_REPRESENTATIVES")?;
                for t in ts {
                    write!(f, " {t}")?;
                }
                Ok(())
            }
        }
    }
}

/// How a class is decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecisionMode {
    Exact,
    Representatives,
}

/// Decision mode and model list of a class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassPolicy {
    pub class: ClassTag,
    pub mode: DecisionMode,
    pub models: Vec<PointTheory>,
}

impl ClassPolicy {
    pub fn for_class(class: ClassTag) -> ClassPolicy {
        use PointTheory::*;
        let chains = (0..=6).map(FiniteChain);
        let (mode, models) = match class {
            ClassTag::Den => (
                DecisionMode::Exact,
                vec![DloOpen, DloLeft, DloRight, DloClosed, FiniteChain(0), FiniteChain(1)],
            ),
            ClassTag::Unb => (DecisionMode::Representatives, vec![DloOpen, DiscreteUnbounded]),
            ClassTag::Lin => (
                DecisionMode::Representatives,
                [DloOpen, DiscreteUnbounded].into_iter().chain(chains).collect(),
            ),
            ClassTag::Dis => {
                (DecisionMode::Representatives, std::iter::once(DiscreteUnbounded).chain(chains).collect())
            }
        };
        ClassPolicy { class, mode, models }
    }
}

/// Decides a query in one theory: `None` when valid there, otherwise a
/// falsifying assignment.
pub fn decide_in(q: &DefinabilityQuery, th: PointTheory) -> Result<Option<Countermodel>, DecideError> {
    if let PointTheory::FiniteChain(n) = th {
        return decide_on_chain(q, n);
    }
    let t = translate(q);
    match qe(&t.sentence, th)? {
        PointFormula::True => Ok(None),
        PointFormula::False => Ok(Some(find_witness(&t, th)?)),
        other => Err(DecideError::Malformed(format!(
            "sentence did not reduce to a constant: {}",
            other.display(&t.names)
        ))),
    }
}

/// Decides a query under the policy of `class`.
pub fn decide_validity(q: &DefinabilityQuery, class: ClassTag) -> Result<Verdict, DecideError> {
    let policy = ClassPolicy::for_class(class);
    for &th in &policy.models {
        if let Some(c) = decide_in(q, th)? {
            return Ok(Verdict::Invalid(c));
        }
    }
    Ok(match policy.mode {
        DecisionMode::Exact => Verdict::Valid,
        DecisionMode::Representatives => Verdict::ValidOnRepresentatives(policy.models),
    })
}

fn decide_on_chain(q: &DefinabilityQuery, n: usize) -> Result<Option<Countermodel>, DecideError> {
    let chain = ChainStructure::new(n);
    let (s1, s2) = q.target.sorts();
    let f = Formula::iff(q.body.clone(), q.target_atom());
    let mut env: HashMap<String, Element> = HashMap::new();
    for x in chain.elements(s1) {
        for y in chain.elements(s2) {
            env.insert(q.vars.0.clone(), x);
            env.insert(q.vars.1.clone(), y);
            if !eval_finite(&f, &chain, &env)? {
                return Ok(Some(Countermodel {
                    theory: PointTheory::FiniteChain(n),
                    assignment: vec![(q.vars.0.clone(), x.to_string()), (q.vars.1.clone(), y.to_string())],
                }));
            }
        }
    }
    Ok(None)
}

/// Candidate values for witness search, smallest first.
fn witness_values(th: PointTheory, n: usize) -> Vec<Num> {
    let int = |k: i64| Num::Rational(BigRational::from_integer(BigInt::from(k)));
    let n = n as i64;
    match th {
        PointTheory::DloOpen | PointTheory::DloLeft => (0..=n).map(int).collect(),
        PointTheory::DloRight => (-n..=0).rev().map(int).collect(),
        PointTheory::DloClosed => (0..=n + 1)
            .map(|k| Num::Rational(BigRational::new(BigInt::from(k), BigInt::from(n + 1))))
            .collect(),
        _ => (0..=3 * n).map(Num::Integer).collect(),
    }
}

/// Searches small assignments falsifying the matrix of a translated query.
fn find_witness(t: &Translation, th: PointTheory) -> Result<Countermodel, DecideError> {
    let m = qe(&t.matrix, th)?;
    let ids: Vec<VarId> = t.free.iter().flat_map(|(_, _, ids)| ids.iter().copied()).collect();
    let values = witness_values(th, ids.len());
    let k = ids.len();
    for bound in 0..values.len() {
        // All index tuples over 0..=bound using `bound` at least once.
        let mut idx = vec![0usize; k];
        loop {
            if idx.contains(&bound) {
                let env: HashMap<VarId, Num> =
                    ids.iter().zip(&idx).map(|(&v, &i)| (v, values[i].clone())).collect();
                if !eval_testpoints(&m, th, &env)? {
                    return Ok(Countermodel { theory: th, assignment: render(t, &env) });
                }
            }
            let mut done = true;
            for i in (0..k).rev() {
                if idx[i] < bound {
                    idx[i] += 1;
                    idx[i + 1..].iter_mut().for_each(|x| *x = 0);
                    done = false;
                    break;
                }
            }
            if done {
                break;
            }
        }
    }
    Ok(Countermodel {
        theory: th,
        assignment: vec![("assignment".into(), "outside-search-range".into())],
    })
}

fn render(t: &Translation, env: &HashMap<VarId, Num>) -> Vec<(String, String)> {
    t.free
        .iter()
        .map(|(name, sort, ids)| {
            let text = match sort {
                Sort::Point => env[&ids[0]].to_string(),
                Sort::Interval => format!("[{},{}]", env[&ids[0]], env[&ids[1]]),
            };
            (name.clone(), text)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulas::parse;
    use crate::relations::{ExplicitSet, RelationSymbol};

    fn query(prem: &str, target: RelationSymbol, body: &str) -> DefinabilityQuery {
        DefinabilityQuery::new(ExplicitSet::parse_list(prem).unwrap(), target, parse(body).unwrap(), None)
            .unwrap()
    }

    #[test]
    fn den_lt_from_ip0() {
        let q = query(
            "ip0",
            RelationSymbol::LT,
            "(~(ex z:i. ip0(z,y)) & (ex z:i. ip0(z,x))) | ex z:i.(ip0(z,x) & ~ip0(z,y))",
        );
        assert_eq!(decide_validity(&q, ClassTag::Den).unwrap(), Verdict::Valid);
    }

    #[test]
    fn interior_equality_fails_on_discrete_orders() {
        let q = query("ip2", RelationSymbol::EQI, "all p:p.(ip2(x,p) <-> ip2(y,p))");
        assert_eq!(decide_validity(&q, ClassTag::Den).unwrap(), Verdict::Valid);
        let v = decide_validity(&q, ClassTag::Lin).unwrap();
        assert_eq!(v.to_string(), "INVALID DISCRETE_UNBOUNDED x=[0,1] y=[1,2]");
    }

    #[test]
    fn unb_point_equality_from_interiors() {
        let q = query("ip2", RelationSymbol::EQP, "all z:i.(ip2(z,a) <-> ip2(z,b))");
        assert!(matches!(
            decide_validity(&q, ClassTag::Unb).unwrap(),
            Verdict::ValidOnRepresentatives(_)
        ));
    }

    #[test]
    fn chains_refute_density_arguments() {
        let q = query("ip2", RelationSymbol::EQI, "all p:p.(ip2(x,p) <-> ip2(y,p))");
        let c = decide_in(&q, PointTheory::FiniteChain(4)).unwrap().unwrap();
        assert_eq!(c.theory, PointTheory::FiniteChain(4));
    }
}
