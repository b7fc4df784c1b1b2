//! Relation vocabulary: point-point, interval-point, point-interval and
//! interval-interval relations in region-pair encoding.
//!
//! An interval `[a,b]` splits the order into five regions: `0` (below `a`),
//! `1` (`a` itself), `2` (strictly inside), `3` (`b` itself) and `4` (above
//! `b`). A point `c` splits it into three: `0` (below), `2` (`c`), `4` (above).

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Errors raised by the relation vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RelationError {
    #[error("unknown relation `{0}`")]
    Unknown(String),
    #[error("invalid region encoding {kind}{regions}")]
    InvalidRegions { kind: &'static str, regions: String },
    #[error("`{0}` is not one of the explicit relations")]
    NotExplicit(RelationSymbol),
}

/// The two sorts of the language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Point,
    Interval,
}

impl Sort {
    pub fn letter(self) -> char {
        match self {
            Sort::Point => 'p',
            Sort::Interval => 'i',
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Point => write!(f, "point"),
            Sort::Interval => write!(f, "interval"),
        }
    }
}

/// Sort signature of a relation symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    /// point, point
    PP,
    /// interval, point
    IP,
    /// point, interval
    PI,
    /// interval, interval
    II,
}

impl Kind {
    pub fn sorts(self) -> (Sort, Sort) {
        match self {
            Kind::PP => (Sort::Point, Sort::Point),
            Kind::IP => (Sort::Interval, Sort::Point),
            Kind::PI => (Sort::Point, Sort::Interval),
            Kind::II => (Sort::Interval, Sort::Interval),
        }
    }
}

/// A region value in `0..=4`.
pub type Region = u8;

/// One of the 26 relation symbols.
///
/// `pp` and `ip` symbols carry a single region (stored in `k`, with `k2 == 0`);
/// `pi` and `ii` symbols carry an ordered region pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelationSymbol {
    kind: Kind,
    k: Region,
    k2: Region,
}

const II_PAIRS: [(Region, Region); 13] = [
    (0, 0),
    (0, 1),
    (0, 2),
    (0, 3),
    (0, 4),
    (1, 2),
    (1, 3),
    (1, 4),
    (2, 2),
    (2, 3),
    (2, 4),
    (3, 4),
    (4, 4),
];
const PI_PAIRS: [(Region, Region); 5] = [(0, 0), (0, 2), (0, 4), (2, 4), (4, 4)];

impl RelationSymbol {
    pub const LT: Self = Self::raw(Kind::PP, 4, 0);
    pub const EQP: Self = Self::raw(Kind::PP, 2, 0);
    pub const GTP: Self = Self::raw(Kind::PP, 0, 0);
    pub const IP0: Self = Self::raw(Kind::IP, 0, 0);
    pub const IP1: Self = Self::raw(Kind::IP, 1, 0);
    pub const IP2: Self = Self::raw(Kind::IP, 2, 0);
    pub const IP3: Self = Self::raw(Kind::IP, 3, 0);
    pub const IP4: Self = Self::raw(Kind::IP, 4, 0);
    pub const II34: Self = Self::raw(Kind::II, 3, 4);
    pub const II44: Self = Self::raw(Kind::II, 4, 4);
    pub const II14: Self = Self::raw(Kind::II, 1, 4);
    pub const II03: Self = Self::raw(Kind::II, 0, 3);
    pub const II04: Self = Self::raw(Kind::II, 0, 4);
    pub const II24: Self = Self::raw(Kind::II, 2, 4);
    pub const EQI: Self = Self::raw(Kind::II, 1, 3);
    pub const II22: Self = Self::raw(Kind::II, 2, 2);

    const fn raw(kind: Kind, k: Region, k2: Region) -> Self {
        RelationSymbol { kind, k, k2 }
    }

    /// Point-point symbol for the region of the second point relative to the first.
    pub fn pp(k: Region) -> Result<Self, RelationError> {
        match k {
            0 | 2 | 4 => Ok(Self::raw(Kind::PP, k, 0)),
            _ => Err(RelationError::InvalidRegions { kind: "pp", regions: k.to_string() }),
        }
    }

    /// Interval-point symbol: the point lies in region `k` of the interval.
    pub fn ip(k: Region) -> Result<Self, RelationError> {
        if k <= 4 {
            Ok(Self::raw(Kind::IP, k, 0))
        } else {
            Err(RelationError::InvalidRegions { kind: "ip", regions: k.to_string() })
        }
    }

    /// Point-interval symbol: the interval's endpoints lie in regions `k`, `k2` of the point.
    pub fn pi(k: Region, k2: Region) -> Result<Self, RelationError> {
        if PI_PAIRS.contains(&(k, k2)) {
            Ok(Self::raw(Kind::PI, k, k2))
        } else {
            Err(RelationError::InvalidRegions { kind: "pi", regions: format!("{k}{k2}") })
        }
    }

    /// Interval-interval symbol: the second interval's endpoints lie in
    /// regions `k`, `k2` of the first.
    pub fn ii(k: Region, k2: Region) -> Result<Self, RelationError> {
        if II_PAIRS.contains(&(k, k2)) {
            Ok(Self::raw(Kind::II, k, k2))
        } else {
            Err(RelationError::InvalidRegions { kind: "ii", regions: format!("{k}{k2}") })
        }
    }

    pub fn kind(self) -> Kind {
        self.kind
    }

    /// The single region of a `pp`/`ip` symbol, or the first region of a pair.
    pub fn region(self) -> Region {
        self.k
    }

    /// Region pair of a `pi`/`ii` symbol.
    pub fn regions(self) -> (Region, Region) {
        (self.k, self.k2)
    }

    pub fn sorts(self) -> (Sort, Sort) {
        self.kind.sorts()
    }

    /// All 26 symbols in a fixed order.
    pub fn all() -> Vec<RelationSymbol> {
        let mut out = Vec::with_capacity(26);
        for k in [4, 2, 0] {
            out.push(Self::raw(Kind::PP, k, 0));
        }
        for k in 0..=4 {
            out.push(Self::raw(Kind::IP, k, 0));
        }
        for (k, k2) in PI_PAIRS {
            out.push(Self::raw(Kind::PI, k, k2));
        }
        for (k, k2) in II_PAIRS {
            out.push(Self::raw(Kind::II, k, k2));
        }
        out
    }

    /// Canonical textual name.
    pub fn name(self) -> String {
        match (self.kind, self.k, self.k2) {
            (Kind::PP, 4, _) => "lt".into(),
            (Kind::PP, 2, _) => "eqp".into(),
            (Kind::PP, _, _) => "gtp".into(),
            (Kind::II, 1, 3) => "eqi".into(),
            (Kind::IP, k, _) => format!("ip{k}"),
            (Kind::PI, k, k2) => format!("pi{k}{k2}"),
            (Kind::II, k, k2) => format!("ii{k}{k2}"),
        }
    }

    /// The inverse relation: `r(x,y)` iff `inverse(r)(y,x)`.
    pub fn inverse(self) -> RelationSymbol {
        match self.kind {
            Kind::PP => Self::raw(Kind::PP, 4 - self.k, 0),
            Kind::IP => {
                let (k, k2) = match self.k {
                    0 => (4, 4),
                    1 => (2, 4),
                    2 => (0, 4),
                    3 => (0, 2),
                    _ => (0, 0),
                };
                Self::raw(Kind::PI, k, k2)
            }
            Kind::PI => {
                let k = match (self.k, self.k2) {
                    (4, 4) => 0,
                    (2, 4) => 1,
                    (0, 4) => 2,
                    (0, 2) => 3,
                    _ => 4,
                };
                Self::raw(Kind::IP, k, 0)
            }
            Kind::II => {
                // Canonical witness: the first interval is [4,8]; regions map to positions.
                let (c, d) = ii_witness(self.k, self.k2);
                let k = region_of(c, d, 4);
                let k2 = region_of(c, d, 8);
                Self::raw(Kind::II, k, k2)
            }
        }
    }

    /// Bit position in R+, if explicit.
    pub fn explicit_index(self) -> Option<usize> {
        R_PLUS.iter().position(|&r| r == self)
    }

    pub fn is_explicit(self) -> bool {
        self.explicit_index().is_some()
    }

    /// Reverse of an explicit relation (identity on non-reversible members).
    pub fn reverse(self) -> Result<RelationSymbol, RelationError> {
        if !self.is_explicit() {
            return Err(RelationError::NotExplicit(self));
        }
        Ok(match self {
            Self::IP0 => Self::IP4,
            Self::IP4 => Self::IP0,
            Self::IP1 => Self::IP3,
            Self::IP3 => Self::IP1,
            Self::II14 => Self::II03,
            Self::II03 => Self::II14,
            r => r,
        })
    }

    pub fn is_reversible(self) -> bool {
        matches!(
            self,
            Self::IP0 | Self::IP1 | Self::IP3 | Self::IP4 | Self::II14 | Self::II03
        )
    }

    /// Action of order dualization: the symbol to use in the dual structure and
    /// whether the arguments are swapped.
    pub fn dual_action(self) -> Result<(RelationSymbol, bool), RelationError> {
        let rev = self.reverse()?;
        if self.is_reversible() {
            Ok((rev, false))
        } else if self == Self::IP2 || self == Self::II04 {
            Ok((self, false))
        } else {
            Ok((self, true))
        }
    }
}

/// Region of `c` relative to the interval `[a,b]`.
pub fn region_of<T: Ord>(a: T, b: T, c: T) -> Region {
    if c < a {
        0
    } else if c == a {
        1
    } else if c < b {
        2
    } else if c == b {
        3
    } else {
        4
    }
}

/// Region of `c` relative to the point `p` (three-region partition).
pub fn point_region<T: Ord>(p: T, c: T) -> Region {
    match c.cmp(&p) {
        std::cmp::Ordering::Less => 0,
        std::cmp::Ordering::Equal => 2,
        std::cmp::Ordering::Greater => 4,
    }
}

fn ii_witness(k: Region, k2: Region) -> (i32, i32) {
    let low = |r: Region| [1, 4, 5, 8, 9][r as usize];
    let high = |r: Region| [2, 4, 6, 8, 10][r as usize];
    (low(k), high(k2))
}

impl fmt::Display for RelationSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for RelationSymbol {
    type Err = RelationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let alias = match s {
            "lt" | "<" | "pp4" => Some(Self::LT),
            "gt" | "gtp" | ">" | "pp0" => Some(Self::GTP),
            "eqp" | "eq_p" | "=p" | "pp2" => Some(Self::EQP),
            "eqi" | "eq_i" | "=i" | "ii13" => Some(Self::EQI),
            "meets" => Some(Self::II34),
            "before" => Some(Self::II44),
            "starts" => Some(Self::II14),
            "finishes" => Some(Self::II03),
            "during" => Some(Self::II04),
            "overlaps" => Some(Self::II24),
            "contains" => Some(Self::II22),
            _ => None,
        };
        if let Some(r) = alias {
            return Ok(r);
        }
        let unknown = || RelationError::Unknown(s.to_string());
        let digits: Vec<Region> = s
            .get(2..)
            .ok_or_else(unknown)?
            .chars()
            .map(|c| c.to_digit(10).map(|d| d as Region).ok_or_else(unknown))
            .collect::<Result<_, _>>()?;
        match (&s[..2], digits.as_slice()) {
            ("ip", [k]) => Self::ip(*k),
            ("pi", [k, k2]) => Self::pi(*k, *k2),
            ("ii", [k, k2]) => Self::ii(*k, *k2),
            _ => Err(unknown()),
        }
    }
}

/// The 14 explicit relations in bit order.
pub const R_PLUS: [RelationSymbol; 14] = [
    RelationSymbol::LT,
    RelationSymbol::EQP,
    RelationSymbol::IP0,
    RelationSymbol::IP1,
    RelationSymbol::IP2,
    RelationSymbol::IP3,
    RelationSymbol::IP4,
    RelationSymbol::II34,
    RelationSymbol::II44,
    RelationSymbol::II14,
    RelationSymbol::II03,
    RelationSymbol::II04,
    RelationSymbol::II24,
    RelationSymbol::EQI,
];

/// A subset of R+ as a 14-bit mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ExplicitSet(pub u16);

impl ExplicitSet {
    pub const EMPTY: ExplicitSet = ExplicitSet(0);
    pub const FULL: ExplicitSet = ExplicitSet((1 << 14) - 1);
    /// Interval-interval members including `eqi`.
    pub const I_PLUS: ExplicitSet = ExplicitSet(0b11_1111_1000_0000);
    /// Interval-point members.
    pub const M_PLUS: ExplicitSet = ExplicitSet(0b111_1100);
    /// Point-point members.
    pub const P_PLUS: ExplicitSet = ExplicitSet(0b11);

    pub fn singleton(r: RelationSymbol) -> Result<Self, RelationError> {
        r.explicit_index()
            .map(|i| ExplicitSet(1 << i))
            .ok_or(RelationError::NotExplicit(r))
    }

    pub fn from_symbols<I: IntoIterator<Item = RelationSymbol>>(
        it: I,
    ) -> Result<Self, RelationError> {
        let mut s = ExplicitSet::EMPTY;
        for r in it {
            s = s.with(r)?;
        }
        Ok(s)
    }

    pub fn with(self, r: RelationSymbol) -> Result<Self, RelationError> {
        Ok(ExplicitSet(self.0 | Self::singleton(r)?.0))
    }

    pub fn contains(self, r: RelationSymbol) -> bool {
        r.explicit_index().is_some_and(|i| self.0 & (1 << i) != 0)
    }

    pub fn is_subset(self, other: ExplicitSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: ExplicitSet) -> ExplicitSet {
        ExplicitSet(self.0 | other.0)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = RelationSymbol> {
        (0..14).filter(move |i| self.0 & (1 << i) != 0).map(|i| R_PLUS[i])
    }

    /// Replaces every reversible member by its reverse.
    pub fn symmetric(self) -> ExplicitSet {
        let mut out = 0u16;
        for r in self.iter() {
            let rev = r.reverse().expect("members are explicit");
            out |= 1 << rev.explicit_index().expect("reverse stays explicit");
        }
        ExplicitSet(out)
    }

    /// Comma-separated canonical names without braces.
    pub fn to_list(self) -> String {
        self.iter().map(|r| r.name()).collect::<Vec<_>>().join(",")
    }

    /// Parses a comma-separated list of relation names.
    pub fn parse_list(s: &str) -> Result<ExplicitSet, RelationError> {
        let mut set = ExplicitSet::EMPTY;
        for name in s.split(',').map(str::trim).filter(|n| !n.is_empty()) {
            set = set.with(name.parse()?)?;
        }
        Ok(set)
    }
}

impl fmt::Display for ExplicitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.iter().map(|r| r.name()).collect();
        write!(f, "{{{}}}", names.join(", "))
    }
}

/// Reverse of an explicit relation.
pub fn reverse(r: RelationSymbol) -> Result<RelationSymbol, RelationError> {
    r.reverse()
}

/// The symmetric set of `s`.
pub fn symmetric_set(s: ExplicitSet) -> ExplicitSet {
    s.symmetric()
}

/// Order-dualization action of an explicit relation.
pub fn dual_symbol_action(r: RelationSymbol) -> Result<(RelationSymbol, bool), RelationError> {
    r.dual_action()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(s: &str) -> RelationSymbol {
        s.parse().unwrap()
    }

    #[test]
    fn counts_and_names_round_trip() {
        let all = RelationSymbol::all();
        assert_eq!(all.len(), 26);
        for r in &all {
            assert_eq!(&r.name().parse::<RelationSymbol>().unwrap(), r);
        }
        let mut dedup = all.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), 26);
    }

    #[test]
    fn rejects_degenerate_pairs() {
        assert!(RelationSymbol::ii(1, 1).is_err());
        assert!(RelationSymbol::ii(3, 3).is_err());
        assert!(RelationSymbol::ii(4, 0).is_err());
        assert!(RelationSymbol::pi(0, 1).is_err());
        assert!("ip9".parse::<RelationSymbol>().is_err());
        assert!("ii11".parse::<RelationSymbol>().is_err());
    }

    #[test]
    fn aliases() {
        assert_eq!(sym("meets"), RelationSymbol::II34);
        assert_eq!(sym("before"), RelationSymbol::II44);
        assert_eq!(sym("starts"), RelationSymbol::II14);
        assert_eq!(sym("finishes"), RelationSymbol::II03);
        assert_eq!(sym("during"), RelationSymbol::II04);
        assert_eq!(sym("overlaps"), RelationSymbol::II24);
        assert_eq!(sym("eq_i"), sym("ii13"));
        assert_eq!(sym("lt"), sym("pp4"));
        assert_eq!(sym("eq_p"), sym("pp2"));
        assert_eq!(sym("gt"), sym("pp0"));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(sym("ii04").inverse(), sym("ii22"));
        assert_eq!(sym("ip3").inverse(), sym("pi02"));
        assert_eq!(sym("eqi").inverse(), sym("eqi"));
        assert_eq!(sym("ii34").inverse().name(), "ii01");
        assert_eq!(sym("ii44").inverse().name(), "ii00");
        assert_eq!(sym("ii14").inverse().name(), "ii12");
        assert_eq!(sym("lt").inverse(), sym("gtp"));
        for r in RelationSymbol::all() {
            assert_eq!(r.inverse().inverse(), r);
        }
    }

    #[test]
    fn reverse_examples() {
        assert_eq!(sym("ip0").reverse().unwrap(), sym("ip4"));
        assert_eq!(sym("ii14").reverse().unwrap(), sym("ii03"));
        assert_eq!(sym("ii24").reverse().unwrap(), sym("ii24"));
        assert!(sym("ii22").reverse().is_err());
    }

    #[test]
    fn symmetric_set_examples() {
        let s = ExplicitSet::parse_list("ip1,ii14").unwrap();
        assert_eq!(s.symmetric(), ExplicitSet::parse_list("ip3,ii03").unwrap());
        let s = ExplicitSet::parse_list("lt,eqp,ii24").unwrap();
        assert_eq!(s.symmetric(), s);
        let s = ExplicitSet::parse_list("ip0,ip1,ii14,eqi,eqp,lt").unwrap();
        assert_eq!(
            s.symmetric(),
            ExplicitSet::parse_list("ip4,ip3,ii03,eqi,eqp,lt").unwrap()
        );
    }

    #[test]
    fn involutions_exhaustive() {
        for m in 0..(1u16 << 14) {
            let s = ExplicitSet(m);
            assert_eq!(s.symmetric().symmetric(), s);
            assert_eq!(s.symmetric().len(), s.len());
        }
        for r in R_PLUS {
            assert_eq!(r.reverse().unwrap().reverse().unwrap(), r);
        }
    }

    #[test]
    fn dual_actions() {
        assert_eq!(sym("ip2").dual_action().unwrap(), (sym("ip2"), false));
        assert_eq!(sym("ii44").dual_action().unwrap(), (sym("ii44"), true));
        assert_eq!(sym("ip1").dual_action().unwrap(), (sym("ip3"), false));
        assert_eq!(sym("ii04").dual_action().unwrap(), (sym("ii04"), false));
    }

    #[test]
    fn set_display() {
        let s = ExplicitSet::parse_list("ip0,lt").unwrap();
        assert_eq!(s.to_string(), "{lt, ip0}");
        assert_eq!(ExplicitSet::I_PLUS.len(), 7);
        assert_eq!(ExplicitSet::M_PLUS.len(), 5);
        assert!(ExplicitSet::I_PLUS.iter().all(|r| r.kind() == Kind::II));
        assert!(ExplicitSet::M_PLUS.iter().all(|r| r.kind() == Kind::IP));
    }
}
