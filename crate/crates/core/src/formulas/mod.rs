//! Two-sorted first-order formulas over relation atoms: AST, canonical
//! printing, free variables, the order-dual transform and evaluation on
//! finite chains.

mod parser;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

pub use parser::{parse, parse_with_free, ParseError};

use crate::relations::{ExplicitSet, RelationError, RelationSymbol, Sort};
use crate::structures::{holds_values, ChainStructure, Element};

/// A two-sorted formula. Atoms take variables only.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom { rel: RelationSymbol, lhs: String, rhs: String },
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Forall { var: String, sort: Sort, body: Box<Formula> },
    Exists { var: String, sort: Sort, body: Box<Formula> },
}

/// Errors raised while evaluating or transforming formulas.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("no binding for free variable `{0}`")]
    MissingBinding(String),
    #[error("variable `{var}` is bound to a {found} but used as a {expected}")]
    IllSorted { var: String, expected: Sort, found: Sort },
    #[error("element {0} does not belong to the structure")]
    OutOfRange(Element),
    #[error(transparent)]
    Relation(#[from] RelationError),
}

impl Formula {
    pub fn atom(rel: RelationSymbol, lhs: &str, rhs: &str) -> Formula {
        Formula::Atom { rel, lhs: lhs.to_string(), rhs: rhs.to_string() }
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn forall(var: &str, sort: Sort, body: Formula) -> Formula {
        Formula::Forall { var: var.to_string(), sort, body: Box::new(body) }
    }

    pub fn exists(var: &str, sort: Sort, body: Formula) -> Formula {
        Formula::Exists { var: var.to_string(), sort, body: Box::new(body) }
    }

    /// Free variables with their sorts, as determined by atom positions.
    ///
    /// Assumes the formula is well-sorted (as produced by the parser).
    pub fn free_vars(&self) -> BTreeMap<String, Sort> {
        let mut out = BTreeMap::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeMap<String, Sort>) {
        match self {
            Formula::Atom { rel, lhs, rhs } => {
                let (s1, s2) = rel.sorts();
                for (v, s) in [(lhs, s1), (rhs, s2)] {
                    if !bound.contains(v) {
                        out.entry(v.clone()).or_insert(s);
                    }
                }
            }
            Formula::Not(a) => a.collect_free(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Forall { var, body, .. } | Formula::Exists { var, body, .. } => {
                bound.push(var.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Free variables in order of first occurrence.
    pub fn free_vars_ordered(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut bound = Vec::new();
        self.collect_ordered(&mut bound, &mut out);
        out
    }

    fn collect_ordered(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        match self {
            Formula::Atom { lhs, rhs, .. } => {
                for v in [lhs, rhs] {
                    if !bound.contains(v) && !out.contains(v) {
                        out.push(v.clone());
                    }
                }
            }
            Formula::Not(a) => a.collect_ordered(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.collect_ordered(bound, out);
                b.collect_ordered(bound, out);
            }
            Formula::Forall { var, body, .. } | Formula::Exists { var, body, .. } => {
                bound.push(var.clone());
                body.collect_ordered(bound, out);
                bound.pop();
            }
        }
    }

    /// Relation symbols occurring in the formula.
    pub fn symbols(&self) -> BTreeSet<RelationSymbol> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |rel, _, _| {
            out.insert(rel);
        });
        out
    }

    /// The symbols as an explicit set, failing on non-explicit symbols.
    pub fn signature(&self) -> Result<ExplicitSet, RelationError> {
        ExplicitSet::from_symbols(self.symbols())
    }

    fn visit_atoms(&self, f: &mut impl FnMut(RelationSymbol, &str, &str)) {
        match self {
            Formula::Atom { rel, lhs, rhs } => f(*rel, lhs, rhs),
            Formula::Not(a) => a.visit_atoms(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.visit_atoms(f);
                b.visit_atoms(f);
            }
            Formula::Forall { body, .. } | Formula::Exists { body, .. } => body.visit_atoms(f),
        }
    }

    /// Number of nested quantifiers along the deepest path.
    pub fn quantifier_depth(&self) -> usize {
        match self {
            Formula::Atom { .. } => 0,
            Formula::Not(a) => a.quantifier_depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.quantifier_depth().max(b.quantifier_depth())
            }
            Formula::Forall { body, .. } | Formula::Exists { body, .. } => 1 + body.quantifier_depth(),
        }
    }

    /// Renames free occurrences of `from` to `to` (no capture checks; callers
    /// use fresh names).
    pub fn rename_free(&self, from: &str, to: &str) -> Formula {
        let sub = |v: &String| if v == from { to.to_string() } else { v.clone() };
        match self {
            Formula::Atom { rel, lhs, rhs } => {
                Formula::Atom { rel: *rel, lhs: sub(lhs), rhs: sub(rhs) }
            }
            Formula::Not(a) => Formula::not(a.rename_free(from, to)),
            Formula::And(a, b) => Formula::and(a.rename_free(from, to), b.rename_free(from, to)),
            Formula::Or(a, b) => Formula::or(a.rename_free(from, to), b.rename_free(from, to)),
            Formula::Implies(a, b) => {
                Formula::implies(a.rename_free(from, to), b.rename_free(from, to))
            }
            Formula::Iff(a, b) => Formula::iff(a.rename_free(from, to), b.rename_free(from, to)),
            Formula::Forall { var, sort, body } if var != from => {
                Formula::forall(var, *sort, body.rename_free(from, to))
            }
            Formula::Exists { var, sort, body } if var != from => {
                Formula::exists(var, *sort, body.rename_free(from, to))
            }
            other => other.clone(),
        }
    }
}

/// Order-dual transform: reversible symbols are reversed, symmetric
/// non-self-symmetric atoms get their arguments swapped.
pub fn dual_transform(f: &Formula) -> Result<Formula, FormulaError> {
    Ok(match f {
        Formula::Atom { rel, lhs, rhs } => {
            let (r, swap) = rel.dual_action()?;
            if swap {
                Formula::atom(r, rhs, lhs)
            } else {
                Formula::atom(r, lhs, rhs)
            }
        }
        Formula::Not(a) => Formula::not(dual_transform(a)?),
        Formula::And(a, b) => Formula::and(dual_transform(a)?, dual_transform(b)?),
        Formula::Or(a, b) => Formula::or(dual_transform(a)?, dual_transform(b)?),
        Formula::Implies(a, b) => Formula::implies(dual_transform(a)?, dual_transform(b)?),
        Formula::Iff(a, b) => Formula::iff(dual_transform(a)?, dual_transform(b)?),
        Formula::Forall { var, sort, body } => Formula::forall(var, *sort, dual_transform(body)?),
        Formula::Exists { var, sort, body } => Formula::exists(var, *sort, dual_transform(body)?),
    })
}

/// Evaluates `f` on a finite chain under `env`.
pub fn eval_finite(
    f: &Formula,
    chain: &ChainStructure,
    env: &HashMap<String, Element>,
) -> Result<bool, FormulaError> {
    for (var, sort) in f.free_vars() {
        let e = env.get(&var).ok_or_else(|| FormulaError::MissingBinding(var.clone()))?;
        if e.sort() != sort {
            return Err(FormulaError::IllSorted { var, expected: sort, found: e.sort() });
        }
        if !chain.contains(e) {
            return Err(FormulaError::OutOfRange(*e));
        }
    }
    let points: Vec<Element> = chain.points().collect();
    let intervals: Vec<Element> = chain.intervals().collect();
    let mut stack: Vec<(&str, Element)> = env.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    Ok(eval_rec(f, &points, &intervals, &mut stack))
}

fn lookup(stack: &[(&str, Element)], v: &str) -> Element {
    stack
        .iter()
        .rev()
        .find(|(n, _)| *n == v)
        .map(|(_, e)| *e)
        .expect("free variables checked before evaluation")
}

fn eval_rec<'a>(
    f: &'a Formula,
    points: &[Element],
    intervals: &[Element],
    stack: &mut Vec<(&'a str, Element)>,
) -> bool {
    match f {
        Formula::Atom { rel, lhs, rhs } => {
            let x = lookup(stack, lhs);
            let y = lookup(stack, rhs);
            holds_values(*rel, &x, &y).unwrap_or(false)
        }
        Formula::Not(a) => !eval_rec(a, points, intervals, stack),
        Formula::And(a, b) => {
            eval_rec(a, points, intervals, stack) && eval_rec(b, points, intervals, stack)
        }
        Formula::Or(a, b) => {
            eval_rec(a, points, intervals, stack) || eval_rec(b, points, intervals, stack)
        }
        Formula::Implies(a, b) => {
            !eval_rec(a, points, intervals, stack) || eval_rec(b, points, intervals, stack)
        }
        Formula::Iff(a, b) => {
            eval_rec(a, points, intervals, stack) == eval_rec(b, points, intervals, stack)
        }
        Formula::Forall { var, sort, body } | Formula::Exists { var, sort, body } => {
            let universal = matches!(f, Formula::Forall { .. });
            let domain = match sort {
                Sort::Point => points,
                Sort::Interval => intervals,
            };
            for e in domain {
                stack.push((var.as_str(), *e));
                let v = eval_rec(body, points, intervals, stack);
                stack.pop();
                if v != universal {
                    return !universal;
                }
            }
            universal
        }
    }
}

const PREC_IFF: u8 = 1;
const PREC_IMPLIES: u8 = 2;
const PREC_OR: u8 = 3;
const PREC_AND: u8 = 4;
const PREC_NOT: u8 = 5;

fn write_prec(f: &Formula, min: u8, out: &mut String) {
    let (prec, quant) = match f {
        Formula::Atom { .. } => (u8::MAX, false),
        Formula::Not(_) => (PREC_NOT, false),
        Formula::And(..) => (PREC_AND, false),
        Formula::Or(..) => (PREC_OR, false),
        Formula::Implies(..) => (PREC_IMPLIES, false),
        Formula::Iff(..) => (PREC_IFF, false),
        Formula::Forall { .. } | Formula::Exists { .. } => (0, true),
    };
    let paren = if quant { min > 0 } else { prec < min };
    if paren {
        out.push('(');
    }
    let bin = |out: &mut String, a: &Formula, op: &str, b: &Formula, lp: u8, rp: u8| {
        write_prec(a, lp, out);
        out.push_str(op);
        write_prec(b, rp, out);
    };
    match f {
        Formula::Atom { rel, lhs, rhs } => {
            out.push_str(&format!("{}({},{})", rel.name(), lhs, rhs));
        }
        Formula::Not(a) => {
            out.push('~');
            write_prec(a, PREC_NOT, out);
        }
        Formula::And(a, b) => bin(out, a, " & ", b, PREC_AND, PREC_NOT),
        Formula::Or(a, b) => bin(out, a, " | ", b, PREC_OR, PREC_AND),
        Formula::Implies(a, b) => bin(out, a, " -> ", b, PREC_OR, PREC_IMPLIES),
        Formula::Iff(a, b) => bin(out, a, " <-> ", b, PREC_IFF, PREC_IMPLIES),
        Formula::Forall { var, sort, body } | Formula::Exists { var, sort, body } => {
            let q = if matches!(f, Formula::Forall { .. }) { "all" } else { "ex" };
            out.push_str(&format!("{q} {var}:{}. ", sort.letter()));
            write_prec(body, 0, out);
        }
    }
    if paren {
        out.push(')');
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_prec(self, 0, &mut s);
        f.write_str(&s)
    }
}

/// A definability query: does `body` define `target` from `premises`?
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefinabilityQuery {
    pub premises: ExplicitSet,
    pub target: RelationSymbol,
    pub body: Formula,
    /// Names of the two free variables, in target argument order.
    pub vars: (String, String),
}

/// Errors raised when a query is malformed.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("target {0} is not an explicit relation")]
    TargetNotExplicit(RelationSymbol),
    #[error("symbol {0} is used in the body but is not a premise")]
    SymbolNotInPremises(RelationSymbol),
    #[error("free variable `{0}` is not one of the query variables")]
    UnexpectedFree(String),
    #[error("query variable `{var}` has sort {found}, target expects {expected}")]
    WrongSort { var: String, expected: Sort, found: Sort },
    #[error("query variables must be distinct")]
    SameVariable,
    #[error("cannot infer the two query variables from `{0}`")]
    CannotInferVars(String),
}

impl DefinabilityQuery {
    /// Builds and validates a query. When `vars` is `None`, the free
    /// variables are `x`,`y` if present, otherwise taken in order of first
    /// occurrence.
    pub fn new(
        premises: ExplicitSet,
        target: RelationSymbol,
        body: Formula,
        vars: Option<(String, String)>,
    ) -> Result<Self, QueryError> {
        if !target.is_explicit() {
            return Err(QueryError::TargetNotExplicit(target));
        }
        for s in body.symbols() {
            if !premises.contains(s) {
                return Err(QueryError::SymbolNotInPremises(s));
            }
        }
        let free = body.free_vars();
        let vars = match vars {
            Some(v) => v,
            None => {
                let ordered = body.free_vars_ordered();
                if ordered.iter().all(|v| v == "x" || v == "y") {
                    ("x".to_string(), "y".to_string())
                } else if ordered.len() == 2 {
                    (ordered[0].clone(), ordered[1].clone())
                } else {
                    return Err(QueryError::CannotInferVars(body.to_string()));
                }
            }
        };
        if vars.0 == vars.1 {
            return Err(QueryError::SameVariable);
        }
        let (s1, s2) = target.sorts();
        for (v, s) in &free {
            let expected = if *v == vars.0 {
                s1
            } else if *v == vars.1 {
                s2
            } else {
                return Err(QueryError::UnexpectedFree(v.clone()));
            };
            if *s != expected {
                return Err(QueryError::WrongSort { var: v.clone(), expected, found: *s });
            }
        }
        Ok(DefinabilityQuery { premises, target, body, vars })
    }

    /// The target atom over the query variables.
    pub fn target_atom(&self) -> Formula {
        Formula::atom(self.target, &self.vars.0, &self.vars.1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(pairs: &[(&str, &str)]) -> HashMap<String, Element> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.parse().unwrap())).collect()
    }

    #[test]
    fn eval_examples() {
        let f = parse("ex z:i. ii24(x,z)").unwrap();
        assert!(eval_finite(&f, &ChainStructure::new(4), &env(&[("x", "[0,2]")])).unwrap());
        let f = parse("ex z:p. ip2(x,z)").unwrap();
        assert!(!eval_finite(&f, &ChainStructure::new(2), &env(&[("x", "[0,1]")])).unwrap());
        let body = parse("~ii24(x,y) & ex z:i. (ii24(x,z) & ii24(z,y))").unwrap();
        let e = env(&[("x", "[0,1]"), ("y", "[1,2]")]);
        let c5 = ChainStructure::new(5);
        assert!(!eval_finite(&body, &c5, &e).unwrap());
        assert!(eval_finite(&parse("ii34(x,y)").unwrap(), &c5, &e).unwrap());
    }

    #[test]
    fn eval_errors() {
        let f = parse("ip2(x,z)").unwrap();
        let c = ChainStructure::new(3);
        assert!(matches!(
            eval_finite(&f, &c, &env(&[("x", "[0,1]")])),
            Err(FormulaError::MissingBinding(_))
        ));
        assert!(matches!(
            eval_finite(&f, &c, &env(&[("x", "1"), ("z", "1")])),
            Err(FormulaError::IllSorted { .. })
        ));
    }

    #[test]
    fn dual_examples() {
        let d = |s: &str| dual_transform(&parse(s).unwrap()).unwrap().to_string();
        assert_eq!(d("ip1(x,z)"), "ip3(x,z)");
        assert_eq!(d("ii24(x,z)"), "ii24(z,x)");
        assert_eq!(d("ii04(x,z)"), "ii04(x,z)");
        assert!(dual_transform(&parse("ii22(x,z)").unwrap()).is_err());
    }

    #[test]
    fn printer_parenthesization() {
        let f = parse("~ii24(x,y) & ex z:i. (ii24(x,z) & ii24(z,y))").unwrap();
        assert_eq!(f.to_string(), "~ii24(x,y) & (ex z:i. ii24(x,z) & ii24(z,y))");
        let f = parse("a1(x,y)".replace("a1", "ip0").as_str()).unwrap();
        assert_eq!(f.to_string(), "ip0(x,y)");
        let f = parse("(ii44(x,y) -> ii44(y,x)) -> ii44(x,x)").unwrap();
        assert_eq!(f.to_string(), "(ii44(x,y) -> ii44(y,x)) -> ii44(x,x)");
        let f = parse("ii44(x,y) -> ii44(y,x) -> ii44(x,x)").unwrap();
        assert_eq!(f.to_string(), "ii44(x,y) -> ii44(y,x) -> ii44(x,x)");
        let f = parse("~(all z:p. lt(z,z)) | lt(y,y)").unwrap();
        assert_eq!(f.to_string(), "~(all z:p. lt(z,z)) | lt(y,y)");
        assert_eq!(parse(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn query_validation() {
        let body = parse("all z:p. (ip2(x,z) <-> ip2(y,z))").unwrap();
        let q = DefinabilityQuery::new(
            ExplicitSet::parse_list("ip2").unwrap(),
            RelationSymbol::EQI,
            body.clone(),
            None,
        )
        .unwrap();
        assert_eq!(q.vars, ("x".to_string(), "y".to_string()));
        assert!(matches!(
            DefinabilityQuery::new(ExplicitSet::EMPTY, RelationSymbol::EQI, body, None),
            Err(QueryError::SymbolNotInPremises(_))
        ));
        let body = parse("all x:i. (ip2(x,a) <-> ip2(x,b))").unwrap();
        let q = DefinabilityQuery::new(
            ExplicitSet::parse_list("ip2").unwrap(),
            RelationSymbol::EQP,
            body,
            None,
        )
        .unwrap();
        assert_eq!(q.vars, ("a".to_string(), "b".to_string()));
    }
}
