//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on a verification failure or table mismatch,
//! 2 on usage, parse or load errors.

use std::collections::HashMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::closure::{diff_tables, parse_expected, ClosureCache, ExpectedTable, BUNDLED_TABLES};
use crate::decide::{decide_validity, Verdict};
use crate::formulas::{eval_finite, parse, DefinabilityQuery};
use crate::relations::{ExplicitSet, RelationSymbol};
use crate::rulebase::{self, verify_rules, ClassTag, Rule};
use crate::structures::{ChainStructure, Element};
use crate::zeta::{self, ZetaSpec, DEFAULT_SAMPLES, DEFAULT_SEED};

/// Exit code for success.
pub const EXIT_OK: i32 = 0;
/// Exit code for failed checks and mismatches.
pub const EXIT_FAIL: i32 = 1;
/// Exit code for usage and input errors.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "ipdef", version, about = "Definability of point-interval relations over linear orders")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ClassArg {
    Lin,
    Den,
    Dis,
    Unb,
}

impl From<ClassArg> for ClassTag {
    fn from(c: ClassArg) -> ClassTag {
        match c {
            ClassArg::Lin => ClassTag::Lin,
            ClassArg::Den => ClassTag::Den,
            ClassArg::Dis => ClassTag::Dis,
            ClassArg::Unb => ClassTag::Unb,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
enum Format {
    #[default]
    Text,
    Tsv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Relation symbols, inverses and duals.
    Relations {
        #[command(subcommand)]
        action: RelationsCmd,
    },
    /// Parse a formula and print its canonical form.
    Parse { formula: String },
    /// Evaluate a formula on the chain 0 < ... < size-1.
    Eval {
        formula: String,
        #[arg(long)]
        size: usize,
        /// Assignment such as `x=[0,2]` or `p=1`; repeatable.
        #[arg(long = "assign", value_name = "VAR=ELEM")]
        assign: Vec<String>,
    },
    /// Decide whether a formula defines the target from the given relations.
    Decide {
        /// Defining formula over the target arguments.
        body: String,
        #[arg(long)]
        target: String,
        /// Premise relations; defaults to the symbols of the body.
        #[arg(long)]
        set: Option<String>,
        #[arg(long, value_enum, default_value = "den")]
        class: ClassArg,
        /// Names of the target arguments, e.g. `x,y`.
        #[arg(long)]
        vars: Option<String>,
    },
    /// Verify every formula-bearing rule of the rulebase.
    CheckRules {
        #[arg(long, value_enum)]
        class: Option<ClassArg>,
        #[arg(long)]
        rulebase: Option<PathBuf>,
        #[arg(long)]
        id: Option<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Closure of a relation set.
    Closure {
        #[arg(long, value_enum, default_value = "den")]
        class: ClassArg,
        #[arg(long)]
        rulebase: Option<PathBuf>,
        #[arg(long)]
        set: String,
    },
    /// Minimal complete and maximal incomplete sets for one target.
    Spectrum {
        #[arg(long, value_enum, default_value = "den")]
        class: ClassArg,
        #[arg(long)]
        rulebase: Option<PathBuf>,
        #[arg(long)]
        target: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Minimal complete and maximal incomplete sets for all of R+.
    Harvest {
        #[arg(long, value_enum, default_value = "den")]
        class: ClassArg,
        #[arg(long)]
        rulebase: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Compare expected tables with the closure engine.
    DiffTables {
        #[arg(long)]
        expected: Vec<PathBuf>,
        /// Use every bundled table.
        #[arg(long)]
        all: bool,
        /// Only tables of this class.
        #[arg(long, value_enum)]
        class: Option<ClassArg>,
        #[arg(long)]
        rulebase: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Verify truth-preserving relations of the catalog.
    VerifyZeta {
        #[arg(long)]
        id: Option<String>,
        #[arg(long)]
        all: bool,
        #[arg(long, value_enum)]
        class: Option<ClassArg>,
        #[arg(long)]
        catalog: Option<PathBuf>,
        #[arg(long)]
        rulebase: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

#[derive(Debug, Subcommand)]
enum RelationsCmd {
    /// All 26 symbols with sorts and R+ bit positions.
    List {
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Inverse of a relation.
    Inverse { relation: String },
    /// Order-dual of a relation and whether its arguments swap.
    Dual { relation: String },
}

/// A failed command: usage errors exit 2, check failures exit 1.
enum Failure {
    Usage(String),
    Check,
}

type Outcome = Result<(), Failure>;

fn usage<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

/// Runs the command line `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(Failure::Check) => EXIT_FAIL,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_USAGE
        }
    }
}

fn rel(s: &str) -> Result<RelationSymbol, Failure> {
    s.parse::<RelationSymbol>().map_err(usage)
}

fn explicit_rel(s: &str) -> Result<RelationSymbol, Failure> {
    let r = rel(s)?;
    if !r.is_explicit() {
        return Err(Failure::Usage(format!("{r} is not in R+")));
    }
    Ok(r)
}

fn set(s: &str) -> Result<ExplicitSet, Failure> {
    ExplicitSet::parse_list(s.trim().trim_start_matches('{').trim_end_matches('}')).map_err(usage)
}

fn rules(path: &Option<PathBuf>) -> Result<Vec<Rule>, Failure> {
    match path {
        None => Ok(rulebase::bundled()),
        Some(p) => Ok(rulebase::expand_symmetry(&rulebase::load(p).map_err(usage)?)),
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Outcome {
    out.write_all(text.as_bytes()).map_err(usage)
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Outcome {
    match cmd {
        Command::Relations { action } => relations(action, out),
        Command::Parse { formula } => {
            let f = parse(&formula).map_err(usage)?;
            let free: Vec<String> = f.free_vars().into_iter().map(|(v, s)| format!("{v}:{}", s.letter())).collect();
            let sig = f.signature().map_err(usage)?;
            emit(
                out,
                &format!(
                    "{f}\nsignature {sig}\nfree {}\ndepth {}\n",
                    if free.is_empty() { "-".to_string() } else { free.join(" ") },
                    f.quantifier_depth()
                ),
            )
        }
        Command::Eval { formula, size, assign } => {
            let f = parse(&formula).map_err(usage)?;
            let chain = ChainStructure::new(size);
            let mut env: HashMap<String, Element> = HashMap::new();
            for a in &assign {
                let (v, e) = a.split_once('=').ok_or_else(|| Failure::Usage(format!("bad assignment `{a}`")))?;
                env.insert(v.trim().to_string(), e.parse::<Element>().map_err(usage)?);
            }
            let v = eval_finite(&f, &chain, &env).map_err(usage)?;
            emit(out, &format!("{v}\n"))
        }
        Command::Decide { body, target, set: prem, class, vars } => {
            let body = parse(&body).map_err(usage)?;
            let target = explicit_rel(&target)?;
            let premises = match prem {
                Some(s) => set(&s)?,
                None => body.signature().map_err(usage)?,
            };
            let vars = match vars {
                None => None,
                Some(v) => {
                    let (a, b) = v.split_once(',').ok_or_else(|| Failure::Usage("--vars expects `x,y`".into()))?;
                    Some((a.trim().to_string(), b.trim().to_string()))
                }
            };
            let q = DefinabilityQuery::new(premises, target, body, vars).map_err(usage)?;
            let v = decide_validity(&q, class.into()).map_err(usage)?;
            emit(out, &format!("{v}\n"))?;
            if matches!(v, Verdict::Invalid(_)) {
                Err(Failure::Check)
            } else {
                Ok(())
            }
        }
        Command::CheckRules { class, rulebase, id, format } => {
            let mut rs = rules(&rulebase)?;
            if let Some(id) = &id {
                rs.retain(|r| &r.id == id);
                if rs.is_empty() {
                    return Err(Failure::Usage(format!("no rule with id `{id}`")));
                }
            }
            let rows = verify_rules(&rs, class.map(Into::into));
            let mut text = String::new();
            let mut failed = 0;
            for r in &rows {
                if !r.is_ok() {
                    failed += 1;
                }
                let mark = if r.is_ok() { "ok" } else { "FAIL" };
                text.push_str(&match format {
                    Format::Text => format!("{mark} {} {} {}\n", r.id, r.class, r.status),
                    Format::Tsv => format!("{mark}\t{}\t{}\t{}\n", r.id, r.class, r.status),
                });
            }
            if format == Format::Text {
                text.push_str(&format!("summary rules={} failed={failed}\n", rows.len()));
            }
            emit(out, &text)?;
            if failed > 0 {
                Err(Failure::Check)
            } else {
                Ok(())
            }
        }
        Command::Closure { class, rulebase, set: s } => {
            let s = set(&s)?;
            let rs = rules(&rulebase)?;
            let c = crate::closure::closure(s, &rs, class.into());
            emit(out, &format!("{c}\n"))
        }
        Command::Spectrum { class, rulebase, target, format } => {
            let target = explicit_rel(&target)?;
            let class: ClassTag = class.into();
            let cache = ClosureCache::new(&rules(&rulebase)?, class);
            let sp = cache.spectrum(target);
            let text = match format {
                Format::Text => {
                    let mut t = format!("spectrum {} class={class}\nmcs ({}):\n", target.name(), sp.mcs.len());
                    for s in &sp.mcs {
                        t.push_str(&format!("  {s}\n"));
                    }
                    t.push_str(&format!("mis ({}):\n", sp.mis.len()));
                    for s in &sp.mis {
                        t.push_str(&format!("  {s}\n"));
                    }
                    t
                }
                Format::Tsv => {
                    let mut t = table_header(&format!("spectrum-{}-{}", lower(class), target.name()), class);
                    for s in &sp.mcs {
                        t.push_str(&format!("{}\t{}\n", target.name(), s.to_list()));
                    }
                    for s in &sp.mis {
                        t.push_str(&format!("# mis\t{}\n", s.to_list()));
                    }
                    t
                }
            };
            emit(out, &text)
        }
        Command::Harvest { class, rulebase, format } => {
            let class: ClassTag = class.into();
            let cache = ClosureCache::new(&rules(&rulebase)?, class);
            let h = cache.harvest();
            let text = match format {
                Format::Text => {
                    let mut t = format!("harvest class={class}\nmcs ({}):\n", h.mcs.len());
                    for s in &h.mcs {
                        t.push_str(&format!("  {s}\n"));
                    }
                    t.push_str(&format!("mis ({}):\n", h.mis.len()));
                    for s in &h.mis {
                        t.push_str(&format!("  {s}\n"));
                    }
                    t
                }
                Format::Tsv => {
                    let mut t = table_header(&format!("harvest-{}", lower(class)), class);
                    for s in &h.mcs {
                        t.push_str(&format!("mcs\t{}\n", s.to_list()));
                    }
                    for s in &h.mis {
                        t.push_str(&format!("mis\t{}\n", s.to_list()));
                    }
                    t
                }
            };
            emit(out, &text)
        }
        Command::DiffTables { expected, all, class, rulebase, format } => {
            if expected.is_empty() && !all {
                return Err(Failure::Usage("give --expected <path> or --all".into()));
            }
            let mut tables: Vec<ExpectedTable> = Vec::new();
            if all {
                for (name, text) in BUNDLED_TABLES {
                    tables.push(parse_expected(text).map_err(|e| Failure::Usage(format!("{name}: {e}")))?);
                }
            }
            for p in &expected {
                tables.push(ExpectedTable::load(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?);
            }
            if let Some(c) = class {
                let c: ClassTag = c.into();
                tables.retain(|t| t.class == c);
            }
            let rs = rules(&rulebase)?;
            let mut caches: Vec<ClosureCache> = Vec::new();
            let mut clean = true;
            let mut text = String::new();
            if format == Format::Tsv {
                text.push_str("table\tsection\tlabel\tset\treason\n");
            }
            for t in &tables {
                if !caches.iter().any(|c| c.class == t.class) {
                    caches.push(ClosureCache::new(&rs, t.class));
                }
                let cache = caches.iter().find(|c| c.class == t.class).expect("just built");
                let report = diff_tables(cache, t).map_err(usage)?;
                clean &= report.is_clean();
                match format {
                    Format::Text => text.push_str(&report.to_text()),
                    Format::Tsv => text.extend(report.to_tsv().lines().skip(1).map(|l| format!("{l}\n"))),
                }
            }
            emit(out, &text)?;
            if clean {
                Ok(())
            } else {
                Err(Failure::Check)
            }
        }
        Command::VerifyZeta { id, all, class, catalog, rulebase, samples, seed, format } => {
            let specs: Vec<ZetaSpec> = match &catalog {
                None => zeta::catalog(),
                Some(p) => zeta::load_catalog(p).map_err(usage)?,
            };
            let mut chosen: Vec<ZetaSpec> = match (&id, all) {
                (Some(id), false) => {
                    let s = specs.iter().find(|s| &s.id == id);
                    vec![s.ok_or_else(|| Failure::Usage(format!("no spec with id `{id}`")))?.clone()]
                }
                (None, true) => specs,
                _ => return Err(Failure::Usage("give exactly one of --id or --all".into())),
            };
            if let Some(c) = class {
                let c: ClassTag = c.into();
                chosen.retain(|s| s.class == c);
            }
            let rs = rules(&rulebase)?;
            let reports = zeta::verify_all(&chosen, samples, seed);
            let mut ok = true;
            let mut text = String::new();
            for (spec, report) in chosen.iter().zip(&reports) {
                let conflicts = zeta::soundness_conflicts(spec, &rs);
                ok &= report.as_expected() && conflicts.is_empty();
                match format {
                    Format::Text => {
                        text.push_str(&report.to_text());
                        for c in &conflicts {
                            text.push_str(&format!("  FAIL soundness {c}\n"));
                        }
                    }
                    Format::Tsv => {
                        for r in &report.rows {
                            let mark = if r.ok { "ok" } else { "FAIL" };
                            text.push_str(&format!("{}\t{}\t{mark}\t{}\t{}\n", report.id, report.status(), r.name, r.detail));
                        }
                        for c in &conflicts {
                            text.push_str(&format!("{}\t{}\tFAIL\tsoundness\t{c}\n", report.id, report.status()));
                        }
                    }
                }
            }
            if format == Format::Text {
                let pass = reports.iter().filter(|r| r.as_expected()).count();
                text.push_str(&format!("summary specs={} as-expected={pass}\n", reports.len()));
            }
            emit(out, &text)?;
            if ok {
                Ok(())
            } else {
                Err(Failure::Check)
            }
        }
    }
}

fn lower(c: ClassTag) -> String {
    c.to_string().to_ascii_lowercase()
}

fn table_header(name: &str, class: ClassTag) -> String {
    format!("@table {name}\n@class {}\n@universe R+\n@mode expanded\n", lower(class))
}

fn relations(action: RelationsCmd, out: &mut dyn Write) -> Outcome {
    match action {
        RelationsCmd::List { format } => {
            let mut text = String::new();
            for r in RelationSymbol::all() {
                let (s1, s2) = r.sorts();
                let bit = r.explicit_index().map(|i| i.to_string()).unwrap_or_else(|| "-".into());
                text.push_str(&match format {
                    Format::Text => format!("{:<5} {}{} bit={bit}\n", r.name(), s1.letter(), s2.letter()),
                    Format::Tsv => format!("{}\t{}{}\t{bit}\n", r.name(), s1.letter(), s2.letter()),
                });
            }
            emit(out, &text)
        }
        RelationsCmd::Inverse { relation } => {
            let r = rel(&relation)?;
            emit(out, &format!("{}\n", r.inverse().name()))
        }
        RelationsCmd::Dual { relation } => {
            let r = rel(&relation)?;
            let (d, swap) = r.dual_action().map_err(usage)?;
            emit(out, &format!("{}{}\n", d.name(), if swap { " swap" } else { "" }))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("ipdef").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn relation_queries() {
        assert_eq!(run_str(&["relations", "inverse", "ii04"]).1, "ii22\n");
        assert_eq!(run_str(&["relations", "dual", "ip0"]).1, "ip4\n");
        assert_eq!(run_str(&["relations", "dual", "lt"]).1, "lt swap\n");
        let (code, out, _) = run_str(&["relations", "list"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().count(), 26);
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_str(&["closure", "--set", "bogus"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["spectrum", "--target", "ii22"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["nonsense"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["verify-zeta"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn eval_and_parse() {
        let (code, out, _) = run_str(&["eval", "ex p:p. ip2(x,p)", "--size", "3", "--assign", "x=[0,2]"]);
        assert_eq!((code, out.as_str()), (0, "true\n"));
        let (code, out, _) = run_str(&["parse", "all z:i. ii04(z,x)"]);
        assert_eq!(code, 0);
        assert!(out.contains("free x:i"), "{out}");
    }
}
