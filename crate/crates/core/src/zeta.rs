//! Surjective truth-preserving relations between concrete orders and a
//! property-based verifier.
//!
//! A relation `zeta` is the graph of a bijection per sort, given as guarded
//! affine maps with explicit inverses, plus finitely many extra pairs. The
//! verifier samples a deterministic grid and seeded random elements to check
//! coverage, the bijection, respect of every listed relation and the supplied
//! witnesses of broken relations.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::closure::closure;
use crate::relations::{ExplicitSet, Kind, RelationSymbol, Sort, R_PLUS};
use crate::rulebase::{ClassTag, Rule};
use crate::structures::{holds_values, Value};

/// The bundled catalog.
pub const BUNDLED_CATALOG: &str = include_str!("../data/zeta.catalog");

/// Default seed of the random supplement.
pub const DEFAULT_SEED: u64 = 0x5eed;

/// Default number of random samples per check.
pub const DEFAULT_SAMPLES: usize = 100_000;

/// Exact rational numbers.
pub type Q = BigRational;

/// A point or interval with rational endpoints.
pub type Elem = Value<Q>;

/// Errors from loading a catalog.
#[derive(Debug, Error)]
pub enum ZetaError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
}

/// The carrier of a concrete structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OrderKind {
    /// All rationals.
    QQ,
    /// All integers.
    ZZ,
    /// Rationals in `[0,1]`.
    QQ01,
}

impl OrderKind {
    /// Whether `q` belongs to the carrier.
    pub fn contains(self, q: &Q) -> bool {
        match self {
            OrderKind::QQ => true,
            OrderKind::ZZ => q.is_integer(),
            OrderKind::QQ01 => !q.is_negative() && *q <= Q::one(),
        }
    }

    /// Whether `e` is a point or a proper interval over the carrier.
    pub fn contains_elem(self, e: &Elem) -> bool {
        match e {
            Value::Point(p) => self.contains(p),
            Value::Interval(a, b) => a < b && self.contains(a) && self.contains(b),
        }
    }

    /// Classes (besides `Lin`) this order belongs to.
    pub fn classes(self) -> Vec<ClassTag> {
        match self {
            OrderKind::QQ => vec![ClassTag::Den, ClassTag::Unb],
            OrderKind::ZZ => vec![ClassTag::Dis, ClassTag::Unb],
            OrderKind::QQ01 => vec![ClassTag::Den],
        }
    }

    /// Grid points for single-element checks.
    fn grid(self) -> Vec<Q> {
        let mut set = BTreeSet::new();
        match self {
            OrderKind::ZZ => set.extend((-20..=20).map(int)),
            _ => {
                for q in 1..=6i64 {
                    for p in -20..=20i64 {
                        let x = ratio(p, q);
                        if self.contains(&x) {
                            set.insert(x);
                        }
                    }
                }
            }
        }
        set.into_iter().collect()
    }

    /// Coarser grid used for exhaustive pairs.
    fn pair_grid(self) -> Vec<Q> {
        match self {
            OrderKind::QQ => (-8..=8).map(|k| ratio(k, 2)).collect(),
            OrderKind::ZZ => (-6..=6).map(int).collect(),
            OrderKind::QQ01 => {
                let mut v: BTreeSet<Q> = (0..=6).map(|k| ratio(k, 6)).collect();
                v.extend([ratio(1, 4), ratio(3, 4)]);
                v.into_iter().collect()
            }
        }
    }

    /// Finite support of the random supplement.
    fn random_support(self) -> Vec<Q> {
        let mut set = BTreeSet::new();
        match self {
            OrderKind::ZZ => set.extend((-8..=8).map(int)),
            OrderKind::QQ => {
                for q in 1..=6 {
                    set.extend((-6 * q..=6 * q).map(|p| ratio(p, q)));
                }
            }
            OrderKind::QQ01 => {
                for q in 1..=6 {
                    set.extend((0..=q).map(|p| ratio(p, q)));
                }
            }
        }
        set.into_iter().collect()
    }
}

impl fmt::Display for OrderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OrderKind::QQ => "QQ",
            OrderKind::ZZ => "ZZ",
            OrderKind::QQ01 => "QQ01",
        })
    }
}

impl FromStr for OrderKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "QQ" => Ok(OrderKind::QQ),
            "ZZ" => Ok(OrderKind::ZZ),
            "QQ01" => Ok(OrderKind::QQ01),
            _ => Err(format!("unknown order `{s}` (expected QQ, ZZ or QQ01)")),
        }
    }
}

fn int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

fn ratio(p: i64, q: i64) -> Q {
    Q::new(BigInt::from(p), BigInt::from(q))
}

/// An affine expression `ka*a + kb*b + k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Affine {
    ka: Q,
    kb: Q,
    k: Q,
}

impl Affine {
    fn eval(&self, a: &Q, b: &Q) -> Q {
        &self.ka * a + &self.kb * b + &self.k
    }

    fn sub(&self, other: &Affine) -> Affine {
        Affine { ka: &self.ka - &other.ka, kb: &self.kb - &other.kb, k: &self.k - &other.k }
    }

    /// Parses expressions such as `2a-b`, `a/2+b/2`, `-a+1`.
    pub fn parse(s: &str, allow_b: bool) -> Result<Affine, String> {
        let err = |m: &str| format!("bad expression `{s}`: {m}");
        let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        if chars.is_empty() {
            return Err(err("empty"));
        }
        let mut out = Affine { ka: Q::zero(), kb: Q::zero(), k: Q::zero() };
        let mut i = 0;
        let digits = |i: &mut usize| -> Option<BigInt> {
            let start = *i;
            while *i < chars.len() && chars[*i].is_ascii_digit() {
                *i += 1;
            }
            (start < *i).then(|| chars[start..*i].iter().collect::<String>().parse().expect("digits"))
        };
        while i < chars.len() {
            let mut sign = Q::one();
            if i == 0 || matches!(chars[i], '+' | '-') {
                match chars[i] {
                    '+' => i += 1,
                    '-' => {
                        sign = -sign;
                        i += 1;
                    }
                    _ if i == 0 => {}
                    _ => unreachable!(),
                }
            } else {
                return Err(err("expected + or -"));
            }
            let mut coef = match digits(&mut i) {
                Some(n) => {
                    if i + 1 < chars.len() && chars[i] == '/' && chars[i + 1].is_ascii_digit() {
                        i += 1;
                        let d = digits(&mut i).expect("checked digit");
                        if d.is_zero() {
                            return Err(err("zero denominator"));
                        }
                        Some(Q::new(n, d))
                    } else {
                        Some(Q::from_integer(n))
                    }
                }
                None => None,
            };
            if i < chars.len() && chars[i] == '*' {
                i += 1;
            }
            let var = match chars.get(i) {
                Some('a') => Some('a'),
                Some('b') if allow_b => Some('b'),
                Some('b') => return Err(err("`b` is not available for points")),
                _ => None,
            };
            if var.is_some() {
                i += 1;
                if i + 1 < chars.len() && chars[i] == '/' && chars[i + 1].is_ascii_digit() {
                    i += 1;
                    let d = digits(&mut i).expect("checked digit");
                    if d.is_zero() {
                        return Err(err("zero denominator"));
                    }
                    coef = Some(coef.unwrap_or_else(Q::one) / Q::from_integer(d));
                }
            }
            let value = match (coef, var) {
                (None, None) => return Err(err("expected a number or a variable")),
                (c, _) => sign * c.unwrap_or_else(Q::one),
            };
            match var {
                Some('a') => out.ka += value,
                Some(_) => out.kb += value,
                None => out.k += value,
            }
        }
        Ok(out)
    }
}

/// Comparison operator of a guard constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cmp {
    Eq,
    Lt,
    Le,
    Gt,
    Ge,
}

/// A constraint `diff cmp 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Constraint {
    diff: Affine,
    cmp: Cmp,
}

impl Constraint {
    fn holds(&self, a: &Q, b: &Q) -> bool {
        let v = self.diff.eval(a, b);
        match self.cmp {
            Cmp::Eq => v.is_zero(),
            Cmp::Lt => v.is_negative(),
            Cmp::Le => !v.is_positive(),
            Cmp::Gt => v.is_positive(),
            Cmp::Ge => !v.is_negative(),
        }
    }
}

fn parse_guard(s: &str, allow_b: bool) -> Result<Vec<Constraint>, String> {
    let mut out = Vec::new();
    for part in s.split('&').map(str::trim).filter(|p| !p.is_empty()) {
        let (pos, op, cmp) = ["<=", ">=", "=", "<", ">"]
            .iter()
            .zip([Cmp::Le, Cmp::Ge, Cmp::Eq, Cmp::Lt, Cmp::Gt])
            .find_map(|(op, cmp)| part.find(op).map(|p| (p, *op, cmp)))
            .ok_or_else(|| format!("constraint `{part}` has no comparison"))?;
        let lhs = Affine::parse(&part[..pos], allow_b)?;
        let rhs = Affine::parse(&part[pos + op.len()..], allow_b)?;
        out.push(Constraint { diff: lhs.sub(&rhs), cmp });
    }
    Ok(out)
}

/// One guarded piece of a map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Piece {
    pub guard_text: String,
    pub out_text: String,
    guard: Vec<Constraint>,
    out: Vec<Affine>,
}

impl Piece {
    fn identity(sort: Sort) -> Piece {
        let (a, b) = (Affine::parse("a", true).unwrap(), Affine::parse("b", true).unwrap());
        let (out, out_text) = match sort {
            Sort::Point => (vec![a], "a".to_string()),
            Sort::Interval => (vec![a, b], "[a,b]".to_string()),
        };
        Piece { guard_text: String::new(), out_text, guard: Vec::new(), out }
    }

    fn parse(sort: Sort, guard: &str, out: &str) -> Result<Piece, String> {
        let allow_b = sort == Sort::Interval;
        let exprs = match sort {
            Sort::Point => vec![Affine::parse(out, false)?],
            Sort::Interval => {
                let inner = out
                    .trim()
                    .strip_prefix('[')
                    .and_then(|r| r.strip_suffix(']'))
                    .ok_or_else(|| format!("interval output `{out}` must be [l,r]"))?;
                let (l, r) = inner.split_once(',').ok_or_else(|| format!("interval output `{out}` must be [l,r]"))?;
                vec![Affine::parse(l, true)?, Affine::parse(r, true)?]
            }
        };
        Ok(Piece {
            guard_text: guard.to_string(),
            out_text: out.to_string(),
            guard: parse_guard(guard, allow_b)?,
            out: exprs,
        })
    }

    fn coords(e: &Elem) -> (&Q, &Q) {
        match e {
            Value::Point(a) => (a, a),
            Value::Interval(a, b) => (a, b),
        }
    }

    fn matches(&self, e: &Elem) -> bool {
        let (a, b) = Self::coords(e);
        self.guard.iter().all(|c| c.holds(a, b))
    }

    fn apply(&self, e: &Elem) -> Elem {
        let (a, b) = Self::coords(e);
        match &self.out[..] {
            [p] => Value::Point(p.eval(a, b)),
            [l, r] => Value::Interval(l.eval(a, b), r.eval(a, b)),
            _ => unreachable!("pieces have one or two outputs"),
        }
    }
}

/// A map given by overrides and guarded affine pieces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuardedAffineMap {
    pub pieces: Vec<Piece>,
    pub overrides: Vec<(Elem, Elem)>,
}

impl GuardedAffineMap {
    /// Image of `e`, or a description of why the map is undefined there.
    pub fn apply(&self, e: &Elem) -> Result<Elem, String> {
        if let Some((_, y)) = self.overrides.iter().find(|(x, _)| x == e) {
            return Ok(y.clone());
        }
        let hits: Vec<&Piece> = self.pieces.iter().filter(|p| p.matches(e)).collect();
        match hits[..] {
            [p] => Ok(p.apply(e)),
            [] => Err(format!("{e} matches no piece")),
            _ => Err(format!("{e} matches {} pieces", hits.len())),
        }
    }
}

/// The part of `zeta` on one sort.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortMaps {
    pub forward: GuardedAffineMap,
    pub inverse: GuardedAffineMap,
    pub extras: Vec<(Elem, Elem)>,
}

impl SortMaps {
    /// All images of `e` under `zeta`.
    pub fn images(&self, e: &Elem) -> Result<Vec<Elem>, String> {
        let mut out = vec![self.forward.apply(e)?];
        for (x, y) in &self.extras {
            if x == e && !out.contains(y) {
                out.push(y.clone());
            }
        }
        Ok(out)
    }

    /// Whether `(x, y)` belongs to `zeta`.
    pub fn relates(&self, x: &Elem, y: &Elem) -> bool {
        self.images(x).map(|v| v.contains(y)).unwrap_or(false)
    }
}

/// A witness that `rel` is broken: `rel(x,y)` and `rel(x',y')` differ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub rel: RelationSymbol,
    pub pre: (Elem, Elem),
    pub post: (Elem, Elem),
}

/// One catalog entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZetaSpec {
    pub id: String,
    pub class: ClassTag,
    pub order: OrderKind,
    pub point: SortMaps,
    pub interval: SortMaps,
    pub respects: ExplicitSet,
    pub breaks: Vec<RelationSymbol>,
    pub witnesses: Vec<Witness>,
    pub deviates: bool,
    pub expect_fail: bool,
}

impl ZetaSpec {
    fn maps(&self, sort: Sort) -> &SortMaps {
        match sort {
            Sort::Point => &self.point,
            Sort::Interval => &self.interval,
        }
    }

    /// Elements named anywhere in the spec, with their endpoints as points.
    fn special_elements(&self) -> (Vec<Elem>, Vec<Elem>) {
        let mut all: Vec<Elem> = Vec::new();
        for m in [&self.point, &self.interval] {
            for (x, y) in m.forward.overrides.iter().chain(&m.inverse.overrides).chain(&m.extras) {
                all.extend([x.clone(), y.clone()]);
            }
        }
        for w in &self.witnesses {
            all.extend([w.pre.0.clone(), w.pre.1.clone(), w.post.0.clone(), w.post.1.clone()]);
        }
        let mut points = BTreeSet::new();
        let mut intervals = BTreeSet::new();
        for e in all {
            match e {
                Value::Point(p) => {
                    points.insert(Value::Point(p));
                }
                Value::Interval(a, b) => {
                    points.insert(Value::Point(a.clone()));
                    points.insert(Value::Point(b.clone()));
                    intervals.insert(Value::Interval(a, b));
                }
            }
        }
        (points.into_iter().collect(), intervals.into_iter().collect())
    }
}

/// Parses a point or interval such as `1/2` or `[-1,0]`.
pub fn parse_elem(s: &str) -> Result<Elem, String> {
    let t = s.trim();
    let num = |x: &str| Q::from_str(x.trim()).map_err(|_| format!("bad number `{x}`"));
    if let Some(inner) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
        let (a, b) = inner.split_once(',').ok_or_else(|| format!("bad interval `{t}`"))?;
        let (a, b) = (num(a)?, num(b)?);
        if a >= b {
            return Err(format!("interval `{t}` is not proper"));
        }
        Ok(Value::Interval(a, b))
    } else {
        Ok(Value::Point(num(t)?))
    }
}

fn parse_relations(s: &str) -> Result<ExplicitSet, String> {
    let mut set = ExplicitSet::EMPTY;
    for name in s.split(',').map(str::trim).filter(|n| !n.is_empty()) {
        set = set.union(match name {
            "I+" => ExplicitSet::I_PLUS,
            "M+" => ExplicitSet::M_PLUS,
            "P+" => ExplicitSet::P_PLUS,
            _ => ExplicitSet::parse_list(name).map_err(|e| e.to_string())?,
        });
    }
    Ok(set)
}

/// Splits `key="quoted value"` and bare tokens.
fn tokens(line: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    for c in line.chars() {
        match c {
            '"' => quoted = !quoted,
            c if c.is_whitespace() && !quoted => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if quoted {
        return Err("unterminated quote".into());
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    Ok(out)
}

#[derive(Default)]
struct Draft {
    header: Vec<(String, String)>,
    id: String,
    pieces: [[Vec<Piece>; 2]; 2],
    overrides: [[Vec<(Elem, Elem)>; 2]; 2],
    extras: [Vec<(Elem, Elem)>; 2],
    witnesses: Vec<Witness>,
}

fn sort_index(s: &str) -> Result<(usize, Sort), String> {
    match s {
        "point" => Ok((0, Sort::Point)),
        "interval" => Ok((1, Sort::Interval)),
        _ => Err(format!("unknown directive `{s}`")),
    }
}

fn parse_pair(toks: &[String], sort: Sort) -> Result<(Elem, Elem), String> {
    match toks {
        [x, arrow, y] if arrow == "->" => {
            let (x, y) = (parse_elem(x)?, parse_elem(y)?);
            if x.sort() != sort || y.sort() != sort {
                return Err(format!("pair {x} -> {y} does not match sort {sort}"));
            }
            Ok((x, y))
        }
        _ => Err("expected `<elem> -> <elem>`".into()),
    }
}

impl Draft {
    fn body_line(&mut self, toks: &[String]) -> Result<(), String> {
        if toks[0] == "witness" {
            let [_, rel, x, y, arrow, x2, y2] = toks else {
                return Err("expected `witness <rel> <x> <y> -> <x'> <y'>`".into());
            };
            if arrow != "->" {
                return Err("expected `->` in witness".into());
            }
            let rel: RelationSymbol = rel.parse().map_err(|e: crate::relations::RelationError| e.to_string())?;
            let elems = [x, y, x2, y2].map(|s| parse_elem(s));
            let [x, y, x2, y2] = elems;
            let (x, y, x2, y2) = (x?, y?, x2?, y2?);
            let (s1, s2) = rel.sorts();
            if x.sort() != s1 || x2.sort() != s1 || y.sort() != s2 || y2.sort() != s2 {
                return Err(format!("witness elements do not match the sorts of {}", rel.name()));
            }
            self.witnesses.push(Witness { rel, pre: (x, y), post: (x2, y2) });
            return Ok(());
        }
        let (si, sort) = sort_index(&toks[0])?;
        match toks.get(1).map(String::as_str) {
            Some("extra") => {
                let pair = parse_pair(&toks[2..], sort)?;
                self.extras[si].push(pair);
            }
            Some(dir @ ("map" | "inverse")) => {
                let di = usize::from(dir == "inverse");
                match toks.get(2).map(String::as_str) {
                    Some("override") => {
                        let pair = parse_pair(&toks[3..], sort)?;
                        self.overrides[si][di].push(pair);
                    }
                    Some("piece") => {
                        let mut guard = None;
                        let mut out = None;
                        for t in &toks[3..] {
                            match t.split_once('=') {
                                Some(("guard", v)) if guard.is_none() => guard = Some(v.to_string()),
                                Some(("out", v)) if out.is_none() => out = Some(v.to_string()),
                                _ => return Err(format!("unexpected piece field `{t}`")),
                            }
                        }
                        let out = out.ok_or("piece needs out=\"...\"")?;
                        let piece = Piece::parse(sort, guard.as_deref().unwrap_or(""), &out)?;
                        self.pieces[si][di].push(piece);
                    }
                    _ => return Err("expected `override` or `piece`".into()),
                }
            }
            _ => return Err("expected `map`, `inverse` or `extra`".into()),
        }
        Ok(())
    }

    fn finish(self) -> Result<ZetaSpec, String> {
        let mut class = None;
        let mut order = None;
        let mut respects = None;
        let mut breaks = None;
        let mut deviates = false;
        let mut expect_fail = false;
        for (k, v) in &self.header {
            match k.as_str() {
                "class" => class = Some(v.parse::<ClassTag>().map_err(|e| e.to_string())?),
                "order" => order = Some(v.parse::<OrderKind>()?),
                "respects" => respects = Some(parse_relations(v)?),
                "breaks" => breaks = Some(parse_relations(v)?),
                "flags" => {
                    for f in v.split(',') {
                        match f {
                            "deviates-from-paper" => deviates = true,
                            _ => return Err(format!("unknown flag `{f}`")),
                        }
                    }
                }
                "expect" if v == "fail" => expect_fail = true,
                _ => return Err(format!("unknown header field `{k}={v}`")),
            }
        }
        let class = class.ok_or("missing class=")?;
        let order = order.ok_or("missing order=")?;
        let respects = respects.ok_or("missing respects=")?;
        let breaks = breaks.ok_or("missing breaks=")?;
        if respects.0 & breaks.0 != 0 {
            return Err(format!("respects and breaks overlap in {}", ExplicitSet(respects.0 & breaks.0)));
        }
        let breaks: Vec<RelationSymbol> = breaks.iter().collect();
        for r in &breaks {
            if !self.witnesses.iter().any(|w| w.rel == *r) {
                return Err(format!("no witness for broken relation {}", r.name()));
            }
        }
        for w in &self.witnesses {
            if !breaks.contains(&w.rel) {
                return Err(format!("witness for {} which is not listed as broken", w.rel.name()));
            }
        }
        let [[pf, pi], [ifw, iinv]] = self.pieces;
        let [[pof, poi], [iof, ioi]] = self.overrides;
        let [pe, ie] = self.extras;
        let build = |sort: Sort, f: Vec<Piece>, i: Vec<Piece>, of, oi, extras| -> Result<SortMaps, String> {
            if f.is_empty() != i.is_empty() {
                return Err(format!("{sort} pieces need both `map` and `inverse`"));
            }
            let (f, i) = if f.is_empty() { (vec![Piece::identity(sort)], vec![Piece::identity(sort)]) } else { (f, i) };
            Ok(SortMaps {
                forward: GuardedAffineMap { pieces: f, overrides: of },
                inverse: GuardedAffineMap { pieces: i, overrides: oi },
                extras,
            })
        };
        let point = build(Sort::Point, pf, pi, pof, poi, pe)?;
        let interval = build(Sort::Interval, ifw, iinv, iof, ioi, ie)?;
        let spec = ZetaSpec {
            id: self.id,
            class,
            order,
            point,
            interval,
            respects,
            breaks,
            witnesses: self.witnesses,
            deviates,
            expect_fail,
        };
        let (sp, si) = spec.special_elements();
        if let Some(e) = sp.iter().chain(&si).find(|e| !order.contains_elem(e)) {
            return Err(format!("element {e} is outside {order}"));
        }
        Ok(spec)
    }
}

/// Parses a catalog.
pub fn parse_catalog(text: &str) -> Result<Vec<ZetaSpec>, ZetaError> {
    let mut out: Vec<ZetaSpec> = Vec::new();
    let mut draft: Option<(usize, Draft)> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| ZetaError::Line { line, message };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks = tokens(content).map_err(err)?;
        match (toks[0].as_str(), draft.as_mut()) {
            ("spec", None) => {
                let id = toks.get(1).ok_or_else(|| err("spec needs an id".into()))?.clone();
                if out.iter().any(|s| s.id == id) {
                    return Err(err(format!("duplicate spec id `{id}`")));
                }
                let mut header = Vec::new();
                for t in &toks[2..] {
                    let (k, v) = t.split_once('=').ok_or_else(|| err(format!("expected key=value, got `{t}`")))?;
                    header.push((k.to_string(), v.to_string()));
                }
                draft = Some((line, Draft { header, id, ..Draft::default() }));
            }
            ("spec", Some(_)) => return Err(err("`spec` inside an open block".into())),
            ("end", Some(_)) => {
                let (start, d) = draft.take().expect("open block");
                let spec = d.finish().map_err(|message| ZetaError::Line { line: start, message })?;
                out.push(spec);
            }
            (_, Some((_, d))) => d.body_line(&toks).map_err(err)?,
            (_, None) => return Err(err(format!("`{}` outside a spec block", toks[0]))),
        }
    }
    if let Some((start, _)) = draft {
        return Err(ZetaError::Line { line: start, message: "block is not closed with `end`".into() });
    }
    Ok(out)
}

/// Loads a catalog file.
pub fn load_catalog(path: &Path) -> Result<Vec<ZetaSpec>, ZetaError> {
    let text = std::fs::read_to_string(path).map_err(|source| ZetaError::Io { path: path.into(), source })?;
    parse_catalog(&text)
}

/// The bundled catalog.
pub fn catalog() -> Vec<ZetaSpec> {
    parse_catalog(BUNDLED_CATALOG).expect("bundled catalog parses")
}

/// One check of a verification report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckRow {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

/// Outcome of verifying one spec.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZetaReport {
    pub id: String,
    pub class: ClassTag,
    pub order: OrderKind,
    pub deviates: bool,
    pub expect_fail: bool,
    pub rows: Vec<CheckRow>,
}

impl ZetaReport {
    /// Whether every check passed.
    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(|r| r.ok)
    }

    /// Whether the outcome matches the expectation of the spec.
    pub fn as_expected(&self) -> bool {
        self.all_passed() != self.expect_fail
    }

    /// `PASS`, `FAIL`, `XFAIL` (expected failure) or `XPASS`.
    pub fn status(&self) -> &'static str {
        match (self.all_passed(), self.expect_fail) {
            (true, false) => "PASS",
            (false, false) => "FAIL",
            (false, true) => "XFAIL",
            (true, true) => "XPASS",
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {} class={} order={}", self.id, self.status(), self.class, self.order);
        if self.deviates {
            s.push_str(" deviates-from-paper");
        }
        s.push('\n');
        for r in &self.rows {
            let mark = if r.ok { "ok  " } else { "FAIL" };
            s.push_str(&format!("  {mark} {} {}\n", r.name, r.detail));
        }
        s
    }
}

/// Tallies violations and keeps the first one.
struct Tally {
    checked: usize,
    failures: usize,
    first: Option<String>,
}

impl Tally {
    fn new() -> Tally {
        Tally { checked: 0, failures: 0, first: None }
    }

    fn record(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures += 1;
            if self.first.is_none() {
                self.first = Some(detail());
            }
        }
    }

    fn row(self, name: String, unit: &str) -> CheckRow {
        let detail = match &self.first {
            None => format!("{} {unit} checked", self.checked),
            Some(f) => format!("{} of {} {unit} violate; first: {f}", self.failures, self.checked),
        };
        CheckRow { name, ok: self.failures == 0, detail }
    }
}

fn elements_of(order: OrderKind, sort: Sort, points: &[Q]) -> Vec<Elem> {
    match sort {
        Sort::Point => points.iter().cloned().map(Value::Point).collect(),
        Sort::Interval => {
            let mut v = Vec::new();
            for (i, a) in points.iter().enumerate() {
                for b in &points[i + 1..] {
                    v.push(Value::Interval(a.clone(), b.clone()));
                }
            }
            debug_assert!(v.iter().all(|e| order.contains_elem(e)));
            v
        }
    }
}

/// `holds_values` without cloning endpoints.
fn holds_ref(r: RelationSymbol, x: &Elem, y: &Elem) -> bool {
    fn by_ref(e: &Elem) -> Value<&Q> {
        match e {
            Value::Point(p) => Value::Point(p),
            Value::Interval(a, b) => Value::Interval(a, b),
        }
    }
    holds_values(r, &by_ref(x), &by_ref(y)).expect("sorts match")
}

/// Random elements of one order, drawn by index from a finite support with
/// precomputed images.
struct Sampler<'a> {
    support: Vec<Q>,
    spec: &'a ZetaSpec,
    point_images: Vec<Option<Vec<Elem>>>,
    interval_images: Vec<Option<Vec<Elem>>>,
}

impl<'a> Sampler<'a> {
    fn new(spec: &'a ZetaSpec) -> Sampler<'a> {
        let support = spec.order.random_support();
        let n = support.len();
        let point_images = support.iter().map(|q| spec.point.images(&Value::Point(q.clone())).ok()).collect();
        let mut interval_images = vec![None; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let e = Value::Interval(support[i].clone(), support[j].clone());
                interval_images[i * n + j] = spec.interval.images(&e).ok();
            }
        }
        Sampler { support, spec, point_images, interval_images }
    }

    /// All elements of the support of `sort`.
    fn elements(&self, sort: Sort) -> Vec<Elem> {
        elements_of(self.spec.order, sort, &self.support)
    }

    /// Draws an element and its images.
    fn draw(&self, sort: Sort, rng: &mut ChaCha8Rng) -> (Elem, Option<&[Elem]>) {
        let n = self.support.len();
        match sort {
            Sort::Point => {
                let i = rng.gen_range(0..n);
                (Value::Point(self.support[i].clone()), self.point_images[i].as_deref())
            }
            Sort::Interval => {
                let (i, j) = loop {
                    let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
                    if i != j {
                        break (i.min(j), i.max(j));
                    }
                };
                let e = Value::Interval(self.support[i].clone(), self.support[j].clone());
                (e, self.interval_images[i * n + j].as_deref())
            }
        }
    }
}

/// Records, for each relation, whether `r(x,y)` agrees with `r(x',y')` for
/// all images.
fn check_pair(rels: &[RelationSymbol], tallies: &mut [Tally], x: &Elem, y: &Elem, xs: &[Elem], ys: &[Elem]) {
    for (r, t) in rels.iter().zip(tallies.iter_mut()) {
        let before = holds_ref(*r, x, y);
        for x2 in xs {
            for y2 in ys {
                let after = holds_ref(*r, x2, y2);
                t.record(before == after, || format!("{n}({x},{y})={before} but {n}({x2},{y2})={after}", n = r.name()));
            }
        }
    }
}

/// Verifies one spec.
///
/// Single-element checks (coverage, range, bijection) run over the grid, the
/// elements named in the spec and the whole random support. Respect checks run
/// over all pairs of a coarse grid plus named elements, then over `samples`
/// seeded random pairs per relation signature.
pub fn verify(spec: &ZetaSpec, samples: usize, seed: u64) -> ZetaReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let order = spec.order;
    let (special_points, special_intervals) = spec.special_elements();
    let grid = order.grid();
    let sampler = Sampler::new(spec);
    let mut rows = Vec::new();

    let mut coverage = Tally::new();
    let mut range = Tally::new();
    // inverse(forward(e)) = e gives injectivity, forward(inverse(e)) = e surjectivity.
    let mut injective = Tally::new();
    let mut surjective = Tally::new();
    for sort in [Sort::Point, Sort::Interval] {
        let mut elems = elements_of(order, sort, &grid);
        elems.extend(match sort {
            Sort::Point => special_points.iter().cloned(),
            Sort::Interval => special_intervals.iter().cloned(),
        });
        elems.extend(sampler.elements(sort));
        elems.sort();
        elems.dedup();
        let m = spec.maps(sort);
        for e in &elems {
            for (dir, map, back) in [("map", &m.forward, &m.inverse), ("inverse", &m.inverse, &m.forward)] {
                match map.apply(e) {
                    Err(msg) => coverage.record(false, || format!("{sort} {dir}: {msg}")),
                    Ok(y) => {
                        coverage.record(true, String::new);
                        range.record(order.contains_elem(&y), || format!("{sort} {dir}: {e} -> {y} outside {order}"));
                        if let Ok(z) = back.apply(&y) {
                            let t = if dir == "map" { &mut injective } else { &mut surjective };
                            t.record(&z == e, || format!("{sort} {dir}: {e} -> {y} -> {z}"));
                        }
                    }
                }
            }
        }
        for (x, y) in &m.extras {
            range.record(order.contains_elem(x) && order.contains_elem(y), || format!("extra {x} -> {y} outside {order}"));
        }
    }
    rows.push(coverage.row("coverage".into(), "evaluations"));
    rows.push(range.row("range".into(), "images"));
    rows.push(injective.row("injective".into(), "round trips"));
    rows.push(surjective.row("surjective".into(), "round trips"));

    let coarse = order.pair_grid();
    let pool = |sort: Sort| -> Vec<(Elem, Option<Vec<Elem>>)> {
        let mut v = elements_of(order, sort, &coarse);
        v.extend(match sort {
            Sort::Point => special_points.iter().cloned(),
            Sort::Interval => special_intervals.iter().cloned(),
        });
        v.sort();
        v.dedup();
        v.into_iter().map(|e| { let im = spec.maps(sort).images(&e).ok(); (e, im) }).collect()
    };
    for kind in [Kind::PP, Kind::IP, Kind::II] {
        let rels: Vec<RelationSymbol> = spec.respects.iter().filter(|r| r.kind() == kind).collect();
        if rels.is_empty() {
            continue;
        }
        let (s1, s2) = kind.sorts();
        let mut tallies: Vec<Tally> = rels.iter().map(|_| Tally::new()).collect();
        let (p1, p2) = (pool(s1), pool(s2));
        for (x, xs) in &p1 {
            for (y, ys) in &p2 {
                if let (Some(xs), Some(ys)) = (xs, ys) {
                    check_pair(&rels, &mut tallies, x, y, xs, ys);
                }
            }
        }
        for _ in 0..samples {
            let (x, xs) = sampler.draw(s1, &mut rng);
            let (y, ys) = sampler.draw(s2, &mut rng);
            if let (Some(xs), Some(ys)) = (xs, ys) {
                check_pair(&rels, &mut tallies, &x, &y, xs, ys);
            }
        }
        for (r, t) in rels.iter().zip(tallies) {
            rows.push(t.row(format!("respects {}", r.name()), "image pairs"));
        }
    }

    for r in &spec.breaks {
        let mut t = Tally::new();
        for w in spec.witnesses.iter().filter(|w| w.rel == *r) {
            let (s1, s2) = r.sorts();
            let member = spec.maps(s1).relates(&w.pre.0, &w.post.0) && spec.maps(s2).relates(&w.pre.1, &w.post.1);
            let before = holds_values(*r, &w.pre.0, &w.pre.1).expect("sorts checked at load");
            let after = holds_values(*r, &w.post.0, &w.post.1).expect("sorts checked at load");
            let n = r.name();
            t.record(member && before != after, || {
                if member {
                    format!("{n}({},{})={before} and {n}({},{})={after}", w.pre.0, w.pre.1, w.post.0, w.post.1)
                } else {
                    format!("pairs ({},{}) and ({},{}) are not both in zeta", w.pre.0, w.post.0, w.pre.1, w.post.1)
                }
            });
        }
        rows.push(t.row(format!("breaks {}", r.name()), "witnesses"));
    }

    ZetaReport {
        id: spec.id.clone(),
        class: spec.class,
        order,
        deviates: spec.deviates,
        expect_fail: spec.expect_fail,
        rows,
    }
}

/// Verifies specs in parallel.
pub fn verify_all(specs: &[ZetaSpec], samples: usize, seed: u64) -> Vec<ZetaReport> {
    specs.par_iter().map(|s| verify(s, samples, seed)).collect()
}

/// Rules and closures that contradict a spec: a rule applicable to the
/// spec's order whose premises are respected but whose target is broken.
pub fn soundness_conflicts(spec: &ZetaSpec, rules: &[Rule]) -> Vec<String> {
    let mut out = Vec::new();
    let broken = ExplicitSet::from_symbols(spec.breaks.iter().copied()).expect("breaks are explicit");
    for class in spec.order.classes() {
        let ancestors = class.ancestors();
        for r in rules {
            if ancestors.contains(&r.class) && r.premises.is_subset(spec.respects) && broken.contains(r.target) {
                out.push(format!("{}: rule {} derives {} from respected {}", spec.id, r.id, r.target.name(), r.premises));
            }
        }
        let cl = closure(spec.respects, rules, class);
        let hit = ExplicitSet(cl.0 & broken.0);
        if !hit.is_empty() {
            out.push(format!("{}: {class} closure of {} contains broken {hit}", spec.id, spec.respects));
        }
    }
    out
}

/// The relations of R+ that `spec` neither respects nor breaks.
pub fn undetermined(spec: &ZetaSpec) -> Vec<RelationSymbol> {
    R_PLUS.iter().copied().filter(|r| !spec.respects.contains(*r) && !spec.breaks.contains(r)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Q {
        Q::from_str(s).unwrap()
    }

    #[test]
    fn affine_parsing() {
        let e = Affine::parse("2a-b", true).unwrap();
        assert_eq!(e.eval(&q("1"), &q("3")), q("-1"));
        let e = Affine::parse("a/2+b/2", true).unwrap();
        assert_eq!(e.eval(&q("1"), &q("2")), q("3/2"));
        let e = Affine::parse("-1/3a+1", false).unwrap();
        assert_eq!(e.eval(&q("3"), &q("0")), q("0"));
        assert!(Affine::parse("b", false).is_err());
        assert!(Affine::parse("2a b", true).is_err());
        assert!(Affine::parse("", true).is_err());
        assert!(Affine::parse("a/0", true).is_err());
    }

    #[test]
    fn guards_and_pieces() {
        let p = Piece::parse(Sort::Interval, "b-a=1", "[a+1,b+1]").unwrap();
        let unit = parse_elem("[0,1]").unwrap();
        assert!(p.matches(&unit));
        assert_eq!(p.apply(&unit), parse_elem("[1,2]").unwrap());
        assert!(!p.matches(&parse_elem("[0,2]").unwrap()));
        let g = parse_guard("a>=0 & b<=1", true).unwrap();
        assert!(g.iter().all(|c| c.holds(&q("0"), &q("1"))));
        assert!(parse_guard("a+1", true).is_err());
    }

    #[test]
    fn catalog_loads() {
        let specs = catalog();
        assert_eq!(specs.iter().filter(|s| s.class == ClassTag::Den && !s.expect_fail).count(), 9);
        assert_eq!(specs.iter().filter(|s| s.class == ClassTag::Unb).count(), 11);
        let stretch = specs.iter().find(|s| s.id == "den-stretch").unwrap();
        assert_eq!(stretch.breaks.len(), 8);
        let e = parse_elem("[1,3]").unwrap();
        assert_eq!(stretch.interval.forward.apply(&e).unwrap(), parse_elem("[-1,3]").unwrap());
    }

    #[test]
    fn load_errors() {
        let bad = [
            ("spec a class=Den order=QQ respects=eqp breaks=eqp\nwitness eqp 0 0 -> 0 1\nend\n", "overlap"),
            ("spec a class=Den order=QQ respects=lt breaks=eqp\nend\n", "no witness"),
            ("spec a class=Den order=QQ01 respects=lt breaks=eqp\nwitness eqp 2 2 -> 2 3\nend\n", "outside"),
            ("spec a class=Den order=QQ respects=lt breaks=eqp\npoint map piece out=\"a\"\nwitness eqp 0 0 -> 0 1\nend\n", "both"),
            ("spec a class=Den order=QQ respects=lt breaks=eqp\n", "not closed"),
            ("witness eqp 0 0 -> 0 1\n", "outside a spec"),
        ];
        for (text, needle) in bad {
            let e = parse_catalog(text).unwrap_err().to_string();
            assert!(e.contains(needle), "{e}");
        }
    }

    #[test]
    fn examples_verify() {
        let specs = catalog();
        for id in ["den-misc-eqp", "den-stretch", "unb-unit-shift", "den-ii14-breaker"] {
            let s = specs.iter().find(|s| s.id == id).unwrap();
            let r = verify(s, 2000, DEFAULT_SEED);
            assert_eq!(r.status(), "PASS", "{}", r.to_text());
        }
        let orig = specs.iter().find(|s| s.id == "den-ii14-breaker-original").unwrap();
        let r = verify(orig, 2000, DEFAULT_SEED);
        assert_eq!(r.status(), "XFAIL");
        let failed: Vec<&str> = r.rows.iter().filter(|c| !c.ok).map(|c| c.name.as_str()).collect();
        assert!(failed.contains(&"surjective"), "{failed:?}");
        assert!(failed.contains(&"respects eqi"), "{failed:?}");
    }

    #[test]
    fn broken_witness_is_reported() {
        let text = "spec a class=Den order=QQ respects=lt breaks=eqp\nwitness eqp 0 0 -> 0 1\nend\n";
        let s = &parse_catalog(text).unwrap()[0];
        let r = verify(s, 100, 1);
        let row = r.rows.iter().find(|c| c.name == "breaks eqp").unwrap();
        assert!(!row.ok && row.detail.contains("not both in zeta"), "{}", row.detail);
    }
}
