//! Finite chain structures and relation evaluation by region semantics.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::relations::{point_region, region_of, Kind, RelationSymbol, Sort};

/// Errors from element parsing and evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("sort mismatch: {rel} expects ({expected_lhs}, {expected_rhs})")]
    SortMismatch { rel: RelationSymbol, expected_lhs: Sort, expected_rhs: Sort },
    #[error("malformed element `{0}`")]
    BadElement(String),
    #[error("element {0} is not in a chain of size {1}")]
    OutOfRange(Element, usize),
}

/// A point or interval over some ordered carrier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value<T> {
    Point(T),
    Interval(T, T),
}

impl<T> Value<T> {
    pub fn sort(&self) -> Sort {
        match self {
            Value::Point(_) => Sort::Point,
            Value::Interval(..) => Sort::Interval,
        }
    }
}

impl<T: fmt::Display> fmt::Display for Value<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Point(p) => write!(f, "{p}"),
            Value::Interval(a, b) => write!(f, "[{a},{b}]"),
        }
    }
}

/// An element of a chain structure: point ids and intervals over them.
pub type Element = Value<usize>;

impl FromStr for Element {
    type Err = StructureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || StructureError::BadElement(s.to_string());
        let t = s.trim();
        if let Some(inner) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            let (a, b) = inner.split_once(',').ok_or_else(bad)?;
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim().parse().map_err(|_| bad())?;
            if a >= b {
                return Err(bad());
            }
            Ok(Value::Interval(a, b))
        } else {
            Ok(Value::Point(t.parse().map_err(|_| bad())?))
        }
    }
}

/// Truth of `r(x, y)` for values over any total order.
///
/// Returns `None` when the sorts do not match the relation's signature.
pub fn holds_values<T: Ord + Clone>(r: RelationSymbol, x: &Value<T>, y: &Value<T>) -> Option<bool> {
    match (r.kind(), x, y) {
        (Kind::PP, Value::Point(a), Value::Point(b)) => {
            Some(point_region(a.clone(), b.clone()) == r.region())
        }
        (Kind::IP, Value::Interval(a, b), Value::Point(c)) => {
            Some(region_of(a.clone(), b.clone(), c.clone()) == r.region())
        }
        (Kind::PI, Value::Point(p), Value::Interval(c, d)) => {
            let (k, k2) = r.regions();
            Some(point_region(p.clone(), c.clone()) == k && point_region(p.clone(), d.clone()) == k2)
        }
        (Kind::II, Value::Interval(a, b), Value::Interval(c, d)) => {
            let (k, k2) = r.regions();
            Some(
                region_of(a.clone(), b.clone(), c.clone()) == k
                    && region_of(a.clone(), b.clone(), d.clone()) == k2,
            )
        }
        _ => None,
    }
}

/// The chain `0 < 1 < ... < n-1` with all strict intervals over it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChainStructure {
    pub size: usize,
}

impl ChainStructure {
    pub fn new(size: usize) -> Self {
        ChainStructure { size }
    }

    pub fn points(&self) -> impl Iterator<Item = Element> {
        (0..self.size).map(Value::Point)
    }

    pub fn intervals(&self) -> impl Iterator<Item = Element> {
        let n = self.size;
        (0..n).flat_map(move |a| (a + 1..n).map(move |b| Value::Interval(a, b)))
    }

    pub fn elements(&self, sort: Sort) -> Vec<Element> {
        match sort {
            Sort::Point => self.points().collect(),
            Sort::Interval => self.intervals().collect(),
        }
    }

    pub fn contains(&self, e: &Element) -> bool {
        match *e {
            Value::Point(p) => p < self.size,
            Value::Interval(a, b) => a < b && b < self.size,
        }
    }

    /// The order dual (as a structure it is again a chain of the same size).
    pub fn dual(&self) -> ChainStructure {
        *self
    }

    /// Image of an element under the order reflection `i ↦ n-1-i`.
    pub fn dual_element(&self, e: &Element) -> Element {
        let n = self.size;
        match *e {
            Value::Point(p) => Value::Point(n - 1 - p),
            Value::Interval(a, b) => Value::Interval(n - 1 - b, n - 1 - a),
        }
    }
}

/// Region of point `c` relative to the interval `[a,b]`.
pub fn interval_region(a: usize, b: usize, c: usize) -> u8 {
    region_of(a, b, c)
}

/// Truth of `r(x, y)` in a chain; sort mismatch is an error.
pub fn holds(
    r: RelationSymbol,
    f: &ChainStructure,
    x: &Element,
    y: &Element,
) -> Result<bool, StructureError> {
    for e in [x, y] {
        if !f.contains(e) {
            return Err(StructureError::OutOfRange(*e, f.size));
        }
    }
    holds_values(r, x, y).ok_or_else(|| {
        let (expected_lhs, expected_rhs) = r.sorts();
        StructureError::SortMismatch { rel: r, expected_lhs, expected_rhs }
    })
}
