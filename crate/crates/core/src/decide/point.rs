//! One-sorted point formulas: offset literals, theories and simplification.

use std::fmt;

/// Index of a point variable.
pub type VarId = u32;

/// A term base: an endpoint constant or a variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Base {
    Min,
    Max,
    Var(VarId),
}

/// `Lt(a, b, c)` is `a < b + c`; `Le(a, b, c)` is `a <= b + c`;
/// `Eq(a, b, c)` is `a = b + c`. `Le` only occurs in dense theories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Lit {
    Lt(Base, Base, i64),
    Le(Base, Base, i64),
    Eq(Base, Base, i64),
}

/// Point theories: the four dense completions, the discrete unbounded order
/// and finite chains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PointTheory {
    DloOpen,
    DloLeft,
    DloRight,
    DloClosed,
    DiscreteUnbounded,
    FiniteChain(usize),
}

impl PointTheory {
    pub const DENSE: [PointTheory; 4] = [
        PointTheory::DloOpen,
        PointTheory::DloLeft,
        PointTheory::DloRight,
        PointTheory::DloClosed,
    ];

    pub fn has_min(self) -> bool {
        matches!(self, PointTheory::DloLeft | PointTheory::DloClosed)
    }

    pub fn has_max(self) -> bool {
        matches!(self, PointTheory::DloRight | PointTheory::DloClosed)
    }

    pub fn is_dense(self) -> bool {
        matches!(
            self,
            PointTheory::DloOpen | PointTheory::DloLeft | PointTheory::DloRight | PointTheory::DloClosed
        )
    }
}

impl fmt::Display for PointTheory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointTheory::DloOpen => write!(f, "DLO_open"),
            PointTheory::DloLeft => write!(f, "DLO_left"),
            PointTheory::DloRight => write!(f, "DLO_right"),
            PointTheory::DloClosed => write!(f, "DLO_closed"),
            PointTheory::DiscreteUnbounded => write!(f, "DISCRETE_UNBOUNDED"),
            PointTheory::FiniteChain(n) => write!(f, "FINITE_CHAIN({n})"),
        }
    }
}

/// A one-sorted formula over point variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PointFormula {
    True,
    False,
    Lit(Lit),
    Not(Box<PointFormula>),
    And(Vec<PointFormula>),
    Or(Vec<PointFormula>),
    Iff(Box<PointFormula>, Box<PointFormula>),
    Exists(VarId, Box<PointFormula>),
    Forall(VarId, Box<PointFormula>),
}

use PointFormula as PF;

/// Result of normalizing a literal.
pub enum Norm {
    Const(bool),
    Lit(Lit),
}

impl Base {
    pub fn var(self) -> Option<VarId> {
        match self {
            Base::Var(v) => Some(v),
            _ => None,
        }
    }
}

impl Lit {
    pub fn lt(a: VarId, b: VarId) -> Lit {
        Lit::Lt(Base::Var(a), Base::Var(b), 0)
    }

    pub fn eq(a: VarId, b: VarId) -> Lit {
        Lit::Eq(Base::Var(a), Base::Var(b), 0)
    }

    pub fn bases(self) -> (Base, Base) {
        match self {
            Lit::Lt(a, b, _) | Lit::Le(a, b, _) | Lit::Eq(a, b, _) => (a, b),
        }
    }

    pub fn offset(self) -> i64 {
        match self {
            Lit::Lt(_, _, c) | Lit::Le(_, _, c) | Lit::Eq(_, _, c) => c,
        }
    }

    pub fn mentions(self, v: VarId) -> bool {
        let (a, b) = self.bases();
        a == Base::Var(v) || b == Base::Var(v)
    }

    /// Ground reduction, endpoint facts and canonical orientation.
    pub fn normalize(self) -> Norm {
        match self {
            Lit::Lt(a, b, c) if a == b => Norm::Const(0 < c),
            Lit::Le(a, b, c) if a == b => Norm::Const(0 <= c),
            Lit::Le(Base::Min, _, _) | Lit::Le(_, Base::Max, _) => Norm::Const(true),
            Lit::Le(Base::Max, Base::Min, _) => Norm::Const(false),
            Lit::Eq(a, b, c) if a == b => Norm::Const(c == 0),
            // Endpoint constants only occur in dense theories, where offsets are zero.
            Lit::Lt(_, Base::Min, _) | Lit::Lt(Base::Max, _, _) => Norm::Const(false),
            Lit::Lt(Base::Min, Base::Max, _) => Norm::Const(true),
            Lit::Eq(Base::Min, Base::Max, _) | Lit::Eq(Base::Max, Base::Min, _) => {
                Norm::Const(false)
            }
            Lit::Eq(a, b, c) if a > b => Norm::Lit(Lit::Eq(b, a, -c)),
            l => Norm::Lit(l),
        }
    }

    /// Replaces variable `v` by `t + k`.
    pub fn subst(self, v: VarId, t: Base, k: i64) -> Lit {
        let sv = Base::Var(v);
        match self {
            Lit::Lt(a, b, c) => {
                let (a, c) = if a == sv { (t, c - k) } else { (a, c) };
                let (b, c) = if b == sv { (t, c + k) } else { (b, c) };
                Lit::Lt(a, b, c)
            }
            Lit::Le(a, b, c) => {
                let (a, c) = if a == sv { (t, c - k) } else { (a, c) };
                let (b, c) = if b == sv { (t, c + k) } else { (b, c) };
                Lit::Le(a, b, c)
            }
            Lit::Eq(a, b, c) => {
                let (a, c) = if a == sv { (t, c - k) } else { (a, c) };
                let (b, c) = if b == sv { (t, c + k) } else { (b, c) };
                Lit::Eq(a, b, c)
            }
        }
    }

    /// Negation as a formula in the given theory.
    pub fn negate(self, th: PointTheory) -> PointFormula {
        match self {
            Lit::Lt(a, b, c) if th.is_dense() => lit(Lit::Le(b, a, -c)),
            Lit::Lt(a, b, c) => lit(Lit::Lt(b, a, 1 - c)),
            Lit::Le(a, b, c) => lit(Lit::Lt(b, a, -c)),
            Lit::Eq(a, b, c) => mk_or(vec![lit(Lit::Lt(a, b, c)), lit(Lit::Lt(b, a, -c))]),
        }
    }
}

/// A normalized literal as a formula.
pub fn lit(l: Lit) -> PointFormula {
    match l.normalize() {
        Norm::Const(true) => PF::True,
        Norm::Const(false) => PF::False,
        Norm::Lit(l) => PF::Lit(l),
    }
}

/// Flattening, deduplicating conjunction.
pub fn mk_and(items: Vec<PointFormula>) -> PointFormula {
    let mut out = Vec::with_capacity(items.len());
    for f in items {
        match f {
            PF::True => {}
            PF::False => return PF::False,
            PF::And(inner) => out.extend(inner),
            other => out.push(other),
        }
    }
    out.sort();
    out.dedup();
    match out.len() {
        0 => PF::True,
        1 => out.pop().expect("one item"),
        _ => PF::And(out),
    }
}

/// Flattening, deduplicating disjunction.
pub fn mk_or(items: Vec<PointFormula>) -> PointFormula {
    let mut out = Vec::with_capacity(items.len());
    for f in items {
        match f {
            PF::False => {}
            PF::True => return PF::True,
            PF::Or(inner) => out.extend(inner),
            other => out.push(other),
        }
    }
    out.sort();
    out.dedup();
    match out.len() {
        0 => PF::False,
        1 => out.pop().expect("one item"),
        _ => PF::Or(out),
    }
}

impl PointFormula {
    pub fn mentions(&self, v: VarId) -> bool {
        match self {
            PF::True | PF::False => false,
            PF::Lit(l) => l.mentions(v),
            PF::Not(a) => a.mentions(v),
            PF::And(xs) | PF::Or(xs) => xs.iter().any(|x| x.mentions(v)),
            PF::Iff(a, b) => a.mentions(v) || b.mentions(v),
            PF::Exists(w, a) | PF::Forall(w, a) => *w != v && a.mentions(v),
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            PF::True | PF::False | PF::Lit(_) => true,
            PF::Not(a) => a.is_quantifier_free(),
            PF::And(xs) | PF::Or(xs) => xs.iter().all(|x| x.is_quantifier_free()),
            PF::Iff(a, b) => a.is_quantifier_free() && b.is_quantifier_free(),
            PF::Exists(..) | PF::Forall(..) => false,
        }
    }

    pub fn quantifier_depth(&self) -> usize {
        match self {
            PF::True | PF::False | PF::Lit(_) => 0,
            PF::Not(a) => a.quantifier_depth(),
            PF::And(xs) | PF::Or(xs) => xs.iter().map(|x| x.quantifier_depth()).max().unwrap_or(0),
            PF::Iff(a, b) => a.quantifier_depth().max(b.quantifier_depth()),
            PF::Exists(_, a) | PF::Forall(_, a) => 1 + a.quantifier_depth(),
        }
    }

    /// Largest absolute offset over all literals.
    pub fn max_offset(&self) -> i64 {
        match self {
            PF::True | PF::False => 0,
            PF::Lit(l) => l.offset().abs(),
            PF::Not(a) | PF::Exists(_, a) | PF::Forall(_, a) => a.max_offset(),
            PF::And(xs) | PF::Or(xs) => xs.iter().map(|x| x.max_offset()).max().unwrap_or(0),
            PF::Iff(a, b) => a.max_offset().max(b.max_offset()),
        }
    }

    /// Whether the endpoint constants used are provided by `th`, and offsets
    /// are zero in dense theories.
    pub fn fits(&self, th: PointTheory) -> bool {
        match self {
            PF::True | PF::False => true,
            PF::Lit(l) => {
                let (a, b) = l.bases();
                let const_ok = |x: Base| match x {
                    Base::Min => th.has_min(),
                    Base::Max => th.has_max(),
                    Base::Var(_) => true,
                };
                const_ok(a) && const_ok(b) && (!th.is_dense() || l.offset() == 0)
            }
            PF::Not(a) | PF::Exists(_, a) | PF::Forall(_, a) => a.fits(th),
            PF::And(xs) | PF::Or(xs) => xs.iter().all(|x| x.fits(th)),
            PF::Iff(a, b) => a.fits(th) && b.fits(th),
        }
    }

    /// Free variables in increasing order.
    pub fn free_vars(&self) -> Vec<VarId> {
        let mut out = Vec::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_free(&self, bound: &mut Vec<VarId>, out: &mut Vec<VarId>) {
        match self {
            PF::True | PF::False => {}
            PF::Lit(l) => {
                let (a, b) = l.bases();
                for v in [a.var(), b.var()].into_iter().flatten() {
                    if !bound.contains(&v) {
                        out.push(v);
                    }
                }
            }
            PF::Not(a) => a.collect_free(bound, out),
            PF::And(xs) | PF::Or(xs) => xs.iter().for_each(|x| x.collect_free(bound, out)),
            PF::Iff(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            PF::Exists(v, a) | PF::Forall(v, a) => {
                bound.push(*v);
                a.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Size in nodes.
    pub fn size(&self) -> usize {
        match self {
            PF::True | PF::False | PF::Lit(_) => 1,
            PF::Not(a) | PF::Exists(_, a) | PF::Forall(_, a) => 1 + a.size(),
            PF::And(xs) | PF::Or(xs) => 1 + xs.iter().map(|x| x.size()).sum::<usize>(),
            PF::Iff(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Renders the formula with the given variable names.
    pub fn display<'a>(&'a self, names: &'a [String]) -> impl fmt::Display + 'a {
        Shown { f: self, names }
    }
}

struct Shown<'a> {
    f: &'a PointFormula,
    names: &'a [String],
}

fn base_name(b: Base, names: &[String]) -> String {
    match b {
        Base::Min => "min".into(),
        Base::Max => "max".into(),
        Base::Var(v) => names.get(v as usize).cloned().unwrap_or_else(|| format!("v{v}")),
    }
}

fn term(b: Base, k: i64, names: &[String]) -> String {
    match k {
        0 => base_name(b, names),
        k if k > 0 => format!("{}+{k}", base_name(b, names)),
        k => format!("{}-{}", base_name(b, names), -k),
    }
}

/// Renders a literal with offsets moved to the side where they are positive.
pub fn show_lit(l: Lit, names: &[String]) -> String {
    let (op, a, b, c) = match l {
        Lit::Lt(a, b, c) => ("<", a, b, c),
        Lit::Le(a, b, c) => ("<=", a, b, c),
        Lit::Eq(a, b, c) => ("=", a, b, c),
    };
    if c >= 0 {
        format!("{} {op} {}", term(a, 0, names), term(b, c, names))
    } else {
        format!("{} {op} {}", term(a, -c, names), term(b, 0, names))
    }
}

impl fmt::Display for Shown<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.names;
        let sub = |g: &PointFormula| Shown { f: g, names }.to_string();
        match self.f {
            PF::True => write!(f, "true"),
            PF::False => write!(f, "false"),
            PF::Lit(l) => write!(f, "{}", show_lit(*l, names)),
            PF::Not(a) => write!(f, "~({})", sub(a)),
            PF::And(xs) => {
                let parts: Vec<String> = xs.iter().map(|x| format!("({})", sub(x))).collect();
                write!(f, "{}", parts.join(" & "))
            }
            PF::Or(xs) => {
                let parts: Vec<String> = xs.iter().map(|x| format!("({})", sub(x))).collect();
                write!(f, "{}", parts.join(" | "))
            }
            PF::Iff(a, b) => write!(f, "({}) <-> ({})", sub(a), sub(b)),
            PF::Exists(v, a) => write!(f, "ex {}. ({})", base_name(Base::Var(*v), names), sub(a)),
            PF::Forall(v, a) => write!(f, "all {}. ({})", base_name(Base::Var(*v), names), sub(a)),
        }
    }
}
