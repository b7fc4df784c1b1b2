//! Closure of relation sets under definability rules, with exhaustive
//! enumeration of minimally complete and maximally incomplete sets.

pub mod tables;

use rayon::prelude::*;

use crate::relations::{ExplicitSet, RelationSymbol, R_PLUS};
use crate::rulebase::{ClassTag, Rule};

pub use tables::{diff_tables, parse_expected, DiffReport, ExpectedTable, TableError, BUNDLED_TABLES};

/// Number of subsets of R+.
pub const SUBSETS: usize = 1 << 14;

/// Closure by least fixpoint over rules given as `(premises, target bit)`.
fn fixpoint(s: u16, rules: &[(u16, u16)]) -> u16 {
    let mut cur = s;
    loop {
        let mut next = cur;
        for &(p, t) in rules {
            if p & !next == 0 {
                next |= t;
            }
        }
        if next == cur {
            return cur;
        }
        cur = next;
    }
}

/// The rules applicable to `class`, as bitmasks.
fn compile(rules: &[Rule], class: ClassTag) -> Vec<(u16, u16)> {
    let anc = class.ancestors();
    let mut out: Vec<(u16, u16)> = rules
        .iter()
        .filter(|r| anc.contains(&r.class))
        .map(|r| (r.premises.0, ExplicitSet::singleton(r.target).expect("targets are explicit").0))
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Closure of `s` under the rules applicable to `class`.
pub fn closure(s: ExplicitSet, rules: &[Rule], class: ClassTag) -> ExplicitSet {
    ExplicitSet(fixpoint(s.0, &compile(rules, class)))
}

/// Closures of all subsets of R+ for one class.
#[derive(Debug, Clone)]
pub struct ClosureCache {
    pub class: ClassTag,
    table: Vec<u16>,
}

impl ClosureCache {
    pub fn new(rules: &[Rule], class: ClassTag) -> ClosureCache {
        let compiled = compile(rules, class);
        let table = (0..SUBSETS as u32).into_par_iter().map(|s| fixpoint(s as u16, &compiled)).collect();
        ClosureCache { class, table }
    }

    pub fn closure(&self, s: ExplicitSet) -> ExplicitSet {
        ExplicitSet(self.table[s.0 as usize])
    }

    /// Whether `target` is definable from `s`.
    pub fn defines(&self, s: ExplicitSet, target: RelationSymbol) -> bool {
        self.closure(s).contains(target)
    }

    /// Exact mcs and MIS of `target`.
    pub fn spectrum(&self, target: RelationSymbol) -> Spectrum {
        let bit = ExplicitSet::singleton(target).expect("spectrum targets are explicit").0;
        let complete = |s: u16| self.table[s as usize] & bit != 0;
        let mut mcs = Vec::new();
        let mut mis = Vec::new();
        for s in 0..SUBSETS as u16 {
            if complete(s) {
                if s & bit == 0 && members(s).all(|x| !complete(s & !x)) {
                    mcs.push(ExplicitSet(s));
                }
            } else if members(!s & ExplicitSet::FULL.0).all(|x| complete(s | x)) {
                mis.push(ExplicitSet(s));
            }
        }
        Spectrum { target, mcs: canonical(mcs), mis: canonical(mis) }
    }

    /// Minimal sets defining all of R+ and maximal sets that do not.
    pub fn harvest(&self) -> Harvest {
        let full = ExplicitSet::FULL.0;
        let complete = |s: u16| self.table[s as usize] == full;
        let mut mcs = Vec::new();
        let mut mis = Vec::new();
        for s in 0..SUBSETS as u16 {
            if complete(s) {
                if members(s).all(|x| !complete(s & !x)) {
                    mcs.push(ExplicitSet(s));
                }
            } else if members(!s & full).all(|x| complete(s | x)) {
                mis.push(ExplicitSet(s));
            }
        }
        Harvest { class: self.class, mcs: canonical(mcs), mis: canonical(mis) }
    }
}

/// Single-bit masks of the members of `s`.
fn members(s: u16) -> impl Iterator<Item = u16> {
    (0..14).map(|i| 1u16 << i).filter(move |b| s & b != 0)
}

/// Canonical order: by size, then by member list in bit order.
pub fn canonical(mut sets: Vec<ExplicitSet>) -> Vec<ExplicitSet> {
    sets.sort_by_key(|s| (s.len(), s.iter().filter_map(|r| r.explicit_index()).collect::<Vec<_>>()));
    sets.dedup();
    sets
}

/// mcs and MIS of one target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spectrum {
    pub target: RelationSymbol,
    pub mcs: Vec<ExplicitSet>,
    pub mis: Vec<ExplicitSet>,
}

/// mcs and MIS of the whole signature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Harvest {
    pub class: ClassTag,
    pub mcs: Vec<ExplicitSet>,
    pub mis: Vec<ExplicitSet>,
}

/// Spectra of every member of R+.
pub fn all_spectra(cache: &ClosureCache) -> Vec<Spectrum> {
    R_PLUS.par_iter().map(|&r| cache.spectrum(r)).collect()
}

/// Checks that `{S : r in Cl(S)}` is the complement of the down-closure of
/// MIS(r), over all subsets; returns the first counterexample.
pub fn check_duality(cache: &ClosureCache, sp: &Spectrum) -> Option<ExplicitSet> {
    (0..SUBSETS as u16).into_par_iter().map(ExplicitSet).find_first(|&s| {
        let complete = cache.defines(s, sp.target);
        let below_mis = sp.mis.iter().any(|m| s.is_subset(*m));
        complete == below_mis
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rulebase::bundled;

    fn set(s: &str) -> ExplicitSet {
        ExplicitSet::parse_list(s).unwrap()
    }

    #[test]
    fn closure_examples() {
        let rules = bundled();
        let den = closure(set("ii44"), &rules, ClassTag::Den);
        assert!(ExplicitSet::I_PLUS.is_subset(den));
        assert_eq!(closure(ExplicitSet::EMPTY, &rules, ClassTag::Unb), ExplicitSet::EMPTY);
        assert_eq!(closure(set("ii44"), &rules, ClassTag::Lin), set("ii44"));
    }

    #[test]
    fn spectrum_examples() {
        let cache = ClosureCache::new(&bundled(), ClassTag::Den);
        let sp = cache.spectrum(RelationSymbol::EQP);
        let want: Vec<ExplicitSet> = ["lt", "ip0", "ip1", "ip3", "ip4"].iter().map(|s| set(s)).collect();
        assert_eq!(sp.mcs, canonical(want));
        assert_eq!(sp.mis, vec![ExplicitSet::I_PLUS.with(RelationSymbol::IP2).unwrap()]);
        assert!(cache.spectrum(RelationSymbol::II14).mcs.contains(&set("ii44")));
        assert_eq!(check_duality(&cache, &sp), None);
    }

    #[test]
    fn harvest_examples() {
        let h = ClosureCache::new(&bundled(), ClassTag::Den).harvest();
        assert_eq!(h.mcs.len(), 29);
        assert!(h.mcs.contains(&set("ip2,lt")));
        assert!(h.mis.contains(&set("ip3,ip4,ii03,eqi,eqp,lt")));
        let h = ClosureCache::new(&bundled(), ClassTag::Unb).harvest();
        assert!(h.mis.contains(&set("ip2,ii04,eqi,eqp")));
    }
}
