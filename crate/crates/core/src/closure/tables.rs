//! Expected-table files and their comparison with computed spectra.
//!
//! Format: `#` comments; directives `@table <name>`, `@class <C>`,
//! `@universe R+|I+|M+|P+`, `@mode expanded|modulo-symmetry`; entries
//! `<target>: r1,r2` (or tab-separated), `mcs: ...`, `mis: ...` and
//! `mis-row: r1,r2 => t1,t2`. An entry may end in `!suspect` (listed but
//! doubted) or `!suspect-absent` (not listed but expected).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use thiserror::Error;

use super::{ClosureCache, Harvest, Spectrum};
use crate::relations::{ExplicitSet, RelationSymbol, R_PLUS};
use crate::rulebase::ClassTag;

/// Errors raised by the table parser and differ.
#[derive(Debug, Error)]
pub enum TableError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("missing directive @{0}")]
    MissingDirective(&'static str),
    #[error("table is for {table}, closure cache is for {cache}")]
    ClassMismatch { table: ClassTag, cache: ClassTag },
}

/// Flag attached to an expected entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Flag {
    Listed,
    Suspect,
    SuspectAbsent,
}

/// What an entry asserts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EntryKind {
    /// The set is minimally complete for the target.
    Mcs(RelationSymbol),
    /// The set is minimally complete for all of R+.
    HarvestMcs,
    /// The set is maximally incomplete for all of R+.
    HarvestMis,
    /// The set is maximally incomplete for exactly these targets.
    MisRow(Vec<RelationSymbol>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub line: usize,
    pub kind: EntryKind,
    pub set: ExplicitSet,
    pub flag: Flag,
}

/// Comparison mode of a table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Expanded,
    ModuloSymmetry,
}

/// A parsed expected-table file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpectedTable {
    pub name: String,
    pub class: ClassTag,
    pub universe: ExplicitSet,
    pub universe_name: String,
    pub mode: Mode,
    pub entries: Vec<Entry>,
}

/// Expected tables shipped with the crate, by file stem.
pub const BUNDLED_TABLES: &[(&str, &str)] = &[
    ("den-eq-lt", include_str!("../../data/tables/den-eq-lt.tbl")),
    ("den-harvest", include_str!("../../data/tables/den-harvest.tbl")),
    ("den-interval", include_str!("../../data/tables/den-interval.tbl")),
    ("den-interval-interval", include_str!("../../data/tables/den-interval-interval.tbl")),
    ("den-mis", include_str!("../../data/tables/den-mis.tbl")),
    ("den-mixed", include_str!("../../data/tables/den-mixed.tbl")),
    ("den-mixed-mixed", include_str!("../../data/tables/den-mixed-mixed.tbl")),
    ("lin-interval", include_str!("../../data/tables/lin-interval.tbl")),
    ("lin-point-mixed", include_str!("../../data/tables/lin-point-mixed.tbl")),
    ("unb-eq-lt", include_str!("../../data/tables/unb-eq-lt.tbl")),
    ("unb-harvest", include_str!("../../data/tables/unb-harvest.tbl")),
    ("unb-interval", include_str!("../../data/tables/unb-interval.tbl")),
    ("unb-interval-interval", include_str!("../../data/tables/unb-interval-interval.tbl")),
    ("unb-mis", include_str!("../../data/tables/unb-mis.tbl")),
    ("unb-mixed", include_str!("../../data/tables/unb-mixed.tbl")),
];

fn parse_set(s: &str) -> Result<ExplicitSet, String> {
    let inner = s.trim().trim_start_matches('{').trim_end_matches('}');
    ExplicitSet::parse_list(inner).map_err(|e| e.to_string())
}

fn universe(name: &str) -> Option<ExplicitSet> {
    match name {
        "R+" | "all" => Some(ExplicitSet::FULL),
        "I+" => Some(ExplicitSet::I_PLUS),
        "M+" => Some(ExplicitSet::M_PLUS),
        "P+" => Some(ExplicitSet::P_PLUS),
        _ => None,
    }
}

/// Parses an expected-table file.
pub fn parse_expected(text: &str) -> Result<ExpectedTable, TableError> {
    let (mut name, mut class, mut uni, mut mode) = (None, None, None, Mode::Expanded);
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |message: String| TableError::Line { line: line_no, message };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(d) = line.strip_prefix('@') {
            let (key, value) = d.split_once(char::is_whitespace).unwrap_or((d, ""));
            let value = value.trim();
            match key {
                "table" => name = Some(value.to_string()),
                "class" => class = Some(value.parse::<ClassTag>().map_err(err)?),
                "universe" => {
                    let u = universe(value).ok_or_else(|| err(format!("unknown universe `{value}`")))?;
                    uni = Some((u, value.to_string()));
                }
                "mode" => {
                    mode = match value {
                        "expanded" => Mode::Expanded,
                        "modulo-symmetry" => Mode::ModuloSymmetry,
                        _ => return Err(err(format!("unknown mode `{value}`"))),
                    }
                }
                _ => return Err(err(format!("unknown directive `@{key}`"))),
            }
            continue;
        }
        let (body, flag) = match line.split_once('!') {
            None => (line, Flag::Listed),
            Some((b, "suspect")) => (b.trim(), Flag::Suspect),
            Some((b, "suspect-absent")) => (b.trim(), Flag::SuspectAbsent),
            Some((_, f)) => return Err(err(format!("unknown flag `!{f}`"))),
        };
        let (label, rest) = body
            .split_once(':')
            .or_else(|| body.split_once('\t'))
            .ok_or_else(|| err("expected `<label>: <set>`".into()))?;
        let (label, rest) = (label.trim(), rest.trim());
        let (kind, set) = match label {
            "mcs" => (EntryKind::HarvestMcs, parse_set(rest).map_err(err)?),
            "mis" => (EntryKind::HarvestMis, parse_set(rest).map_err(err)?),
            "mis-row" => {
                let (s, ts) = rest.split_once("=>").ok_or_else(|| err("expected `set => targets`".into()))?;
                let targets: Vec<RelationSymbol> = parse_set(ts).map_err(err)?.iter().collect();
                (EntryKind::MisRow(targets), parse_set(s).map_err(err)?)
            }
            t => {
                let target: RelationSymbol = t.parse().map_err(|e| err(format!("{e}")))?;
                if !target.is_explicit() {
                    return Err(err(format!("target {target} is not in R+")));
                }
                (EntryKind::Mcs(target), parse_set(rest).map_err(err)?)
            }
        };
        if set.is_empty() {
            return Err(err("empty set".into()));
        }
        entries.push(Entry { line: line_no, kind, set, flag });
    }
    let (universe, universe_name) = uni.unwrap_or((ExplicitSet::FULL, "R+".into()));
    Ok(ExpectedTable {
        name: name.ok_or(TableError::MissingDirective("table"))?,
        class: class.ok_or(TableError::MissingDirective("class"))?,
        universe,
        universe_name,
        mode,
        entries,
    })
}

impl ExpectedTable {
    pub fn load(path: impl AsRef<Path>) -> Result<ExpectedTable, TableError> {
        let p = path.as_ref();
        let text =
            std::fs::read_to_string(p).map_err(|source| TableError::Io { path: p.display().to_string(), source })?;
        parse_expected(&text)
    }

    /// Entries with their order-dual images added.
    fn expanded_entries(&self) -> Vec<Entry> {
        let mut out = self.entries.clone();
        if self.mode == Mode::ModuloSymmetry {
            for e in &self.entries {
                let kind = match &e.kind {
                    EntryKind::Mcs(t) => EntryKind::Mcs(dual_target(*t)),
                    EntryKind::MisRow(ts) => EntryKind::MisRow(ts.iter().map(|t| dual_target(*t)).collect()),
                    k => k.clone(),
                };
                let d = Entry { line: e.line, kind, set: e.set.symmetric(), flag: e.flag };
                if !out.iter().any(|o| o.kind == d.kind && o.set == d.set) {
                    out.push(d);
                }
            }
        }
        out
    }
}

fn dual_target(t: RelationSymbol) -> RelationSymbol {
    t.dual_action().expect("targets are explicit").0
}

/// Sections of a diff report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Section {
    Match,
    Missing,
    Extra,
    SuspectConfirmed,
    SuspectCleared,
    Duplicate,
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Section::Match => "MATCH",
            Section::Missing => "MISSING",
            Section::Extra => "EXTRA",
            Section::SuspectConfirmed => "SUSPECT-CONFIRMED",
            Section::SuspectCleared => "SUSPECT-CLEARED",
            Section::Duplicate => "DUPLICATE",
        })
    }
}

/// One reported entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffRow {
    pub section: Section,
    pub label: String,
    pub set: ExplicitSet,
    pub reason: String,
}

/// Result of comparing a table with the closure engine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffReport {
    pub table: String,
    pub class: ClassTag,
    pub universe: String,
    pub rows: Vec<DiffRow>,
}

impl DiffReport {
    pub fn count(&self, s: Section) -> usize {
        self.rows.iter().filter(|r| r.section == s).count()
    }

    /// No MISSING and no EXTRA entries.
    pub fn is_clean(&self) -> bool {
        self.count(Section::Missing) == 0 && self.count(Section::Extra) == 0
    }

    pub fn summary(&self) -> String {
        format!(
            "summary match={} missing={} extra={} suspect-confirmed={} suspect-cleared={} duplicate={}",
            self.count(Section::Match),
            self.count(Section::Missing),
            self.count(Section::Extra),
            self.count(Section::SuspectConfirmed),
            self.count(Section::SuspectCleared),
            self.count(Section::Duplicate)
        )
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("table {} class={} universe={}\n", self.table, self.class, self.universe);
        let mut rows = self.rows.clone();
        rows.sort_by_key(|r| r.section);
        for r in &rows {
            out.push_str(&format!("{} {}: {}", r.section, r.label, r.set));
            if !r.reason.is_empty() {
                out.push_str(&format!(" ({})", r.reason));
            }
            out.push('\n');
        }
        out.push_str(&self.summary());
        out.push('\n');
        out
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("table\tsection\tlabel\tset\treason\n");
        let mut rows = self.rows.clone();
        rows.sort_by_key(|r| r.section);
        for r in &rows {
            out.push_str(&format!("{}\t{}\t{}\t{}\t{}\n", self.table, r.section, r.label, r.set.to_list(), r.reason));
        }
        out
    }
}

/// Why `s` is or is not minimally complete for `t`.
fn explain_mcs(cache: &ClosureCache, s: ExplicitSet, t: RelationSymbol, universe: ExplicitSet) -> String {
    if s.contains(t) {
        return "contains its own target".into();
    }
    if !s.is_subset(universe) {
        return "outside the table universe".into();
    }
    if !cache.defines(s, t) {
        return format!("incomplete: closure is {}", cache.closure(s));
    }
    for r in s.iter() {
        let smaller = ExplicitSet(s.0 & !ExplicitSet::singleton(r).expect("explicit").0);
        if cache.defines(smaller, t) {
            return format!("not minimal: {smaller} already complete");
        }
    }
    "minimally complete".into()
}

/// Why `s` is or is not maximally incomplete for `t`.
fn explain_mis(cache: &ClosureCache, s: ExplicitSet, t: RelationSymbol) -> String {
    if cache.defines(s, t) {
        return "complete".into();
    }
    for r in R_PLUS {
        if !s.contains(r) && !cache.defines(s.with(r).expect("explicit"), t) {
            return format!("not maximal: adding {r} stays incomplete");
        }
    }
    "maximally incomplete".into()
}

fn label(kind: &EntryKind) -> String {
    match kind {
        EntryKind::Mcs(t) => t.name(),
        EntryKind::HarvestMcs => "mcs".into(),
        EntryKind::HarvestMis => "mis".into(),
        EntryKind::MisRow(_) => "mis-row".into(),
    }
}

/// Compares an expected table with the closure engine.
pub fn diff_tables(cache: &ClosureCache, table: &ExpectedTable) -> Result<DiffReport, TableError> {
    if cache.class != table.class {
        return Err(TableError::ClassMismatch { table: table.class, cache: cache.class });
    }
    let entries = table.expanded_entries();
    let mut rows = Vec::new();
    let mut push = |section, label: String, set, reason: String| rows.push(DiffRow { section, label, set, reason });

    // Duplicates are reported once and otherwise ignored.
    let mut seen = BTreeSet::new();
    let mut unique = Vec::new();
    for e in entries {
        if seen.insert((e.kind.clone(), e.set)) {
            unique.push(e);
        } else {
            push(Section::Duplicate, label(&e.kind), e.set, format!("repeated on line {}", e.line));
        }
    }

    let mut by_target: BTreeMap<RelationSymbol, Vec<&Entry>> = BTreeMap::new();
    let mut harvest_entries: Vec<&Entry> = Vec::new();
    let mut mis_rows: Vec<&Entry> = Vec::new();
    for e in &unique {
        match &e.kind {
            EntryKind::Mcs(t) => by_target.entry(*t).or_default().push(e),
            EntryKind::HarvestMcs | EntryKind::HarvestMis => harvest_entries.push(e),
            EntryKind::MisRow(_) => mis_rows.push(e),
        }
    }

    let mut spectra: BTreeMap<RelationSymbol, Spectrum> = BTreeMap::new();
    let mut spectrum = |t: RelationSymbol| spectra.entry(t).or_insert_with(|| cache.spectrum(t)).clone();

    for (t, es) in &by_target {
        let computed: BTreeSet<ExplicitSet> =
            spectrum(*t).mcs.into_iter().filter(|s| s.is_subset(table.universe)).collect();
        let mut accounted = BTreeSet::new();
        for e in es {
            accounted.insert(e.set);
            let found = computed.contains(&e.set);
            let why = || explain_mcs(cache, e.set, *t, table.universe);
            match (e.flag, found) {
                (Flag::Listed, true) => push(Section::Match, t.name(), e.set, String::new()),
                (Flag::Listed, false) => push(Section::Missing, t.name(), e.set, why()),
                (Flag::Suspect, true) => push(Section::SuspectCleared, t.name(), e.set, why()),
                (Flag::Suspect, false) => push(Section::SuspectConfirmed, t.name(), e.set, why()),
                (Flag::SuspectAbsent, true) => {
                    push(Section::SuspectConfirmed, t.name(), e.set, "minimally complete, absent from the table".into())
                }
                (Flag::SuspectAbsent, false) => push(Section::SuspectCleared, t.name(), e.set, why()),
            }
        }
        for s in computed.difference(&accounted) {
            push(Section::Extra, t.name(), *s, "minimally complete".into());
        }
    }

    if !harvest_entries.is_empty() {
        let Harvest { mcs, mis, .. } = cache.harvest();
        for (kind, computed) in [(EntryKind::HarvestMcs, mcs), (EntryKind::HarvestMis, mis)] {
            let es: Vec<&&Entry> = harvest_entries.iter().filter(|e| e.kind == kind).collect();
            let computed: BTreeSet<ExplicitSet> = computed.into_iter().collect();
            let lab = label(&kind);
            for e in &es {
                let found = computed.contains(&e.set);
                let section = match (e.flag, found) {
                    (Flag::Listed, true) => Section::Match,
                    (Flag::Listed, false) => Section::Missing,
                    (Flag::Suspect, true) | (Flag::SuspectAbsent, false) => Section::SuspectCleared,
                    (Flag::Suspect, false) | (Flag::SuspectAbsent, true) => Section::SuspectConfirmed,
                };
                let reason = if found { String::new() } else { format!("closure is {}", cache.closure(e.set)) };
                push(section, lab.clone(), e.set, reason);
            }
            let listed: BTreeSet<ExplicitSet> = es.iter().map(|e| e.set).collect();
            for s in computed.difference(&listed) {
                push(Section::Extra, lab.clone(), *s, String::new());
            }
        }
    }

    if !mis_rows.is_empty() {
        let all: Vec<Spectrum> = R_PLUS.iter().map(|&t| spectrum(t)).collect();
        let targets_of = |s: ExplicitSet| -> Vec<RelationSymbol> {
            all.iter().filter(|sp| sp.mis.contains(&s)).map(|sp| sp.target).collect()
        };
        let mut listed = BTreeSet::new();
        for e in &mis_rows {
            let EntryKind::MisRow(ts) = &e.kind else { unreachable!() };
            listed.insert(e.set);
            let actual = targets_of(e.set);
            for t in ts {
                let lab = format!("mis-row {t}");
                if actual.contains(t) {
                    push(Section::Match, lab, e.set, String::new());
                } else {
                    push(Section::Missing, lab, e.set, explain_mis(cache, e.set, *t));
                }
            }
            for t in actual.iter().filter(|t| !ts.contains(t)) {
                push(Section::Extra, format!("mis-row {t}"), e.set, "maximally incomplete, target not listed".into());
            }
        }
        let mut unlisted: BTreeMap<ExplicitSet, Vec<String>> = BTreeMap::new();
        for sp in &all {
            for s in sp.mis.iter().filter(|s| !listed.contains(s)) {
                unlisted.entry(*s).or_default().push(sp.target.name());
            }
        }
        for (s, ts) in unlisted {
            push(Section::Extra, "mis-row".into(), s, format!("maximally incomplete for {}", ts.join(",")));
        }
    }

    Ok(DiffReport { table: table.name.clone(), class: table.class, universe: table.universe_name.clone(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_directives_and_flags() {
        let t = parse_expected(
            "@table t\n@class den\n@universe I+\nii14: ii24\nii14\tii34\nii14: ii14,ii04 !suspect\neqi: ii24 !suspect-absent\nmis-row: eqp,lt => ip0,ip1\n",
        )
        .unwrap();
        assert_eq!(t.universe, ExplicitSet::I_PLUS);
        assert_eq!(t.entries.len(), 5);
        assert_eq!(t.entries[2].flag, Flag::Suspect);
        assert_eq!(t.entries[3].flag, Flag::SuspectAbsent);
        assert_eq!(t.entries[4].kind, EntryKind::MisRow(vec![RelationSymbol::IP0, RelationSymbol::IP1]));
    }

    #[test]
    fn parse_errors() {
        let e = parse_expected("@table t\n@class den\nii14: ip9\n").unwrap_err();
        assert!(matches!(e, TableError::Line { line: 3, .. }));
        assert!(matches!(parse_expected("ii14: ii24\n"), Err(TableError::MissingDirective(_))));
        assert!(parse_expected("@table t\n@class den\nii14: ii24 !maybe\n").is_err());
    }
}
