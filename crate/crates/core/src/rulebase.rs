//! Definability rules: loading, symmetry expansion and verification.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::decide::{decide_validity, Verdict};
use crate::formulas::{dual_transform, parse, DefinabilityQuery, Formula};
use crate::relations::{ExplicitSet, RelationSymbol};

/// The rule file shipped with the crate.
pub const BUNDLED_RULES: &str = include_str!("../data/rulebase.txt");

/// Suffix of ids produced by [`expand_symmetry`].
pub const SYM_SUFFIX: &str = "~sym";

/// The classes of linear orders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassTag {
    Lin,
    Den,
    Dis,
    Unb,
}

impl ClassTag {
    pub const ALL: [ClassTag; 4] = [ClassTag::Lin, ClassTag::Den, ClassTag::Dis, ClassTag::Unb];

    /// The classes whose rules apply here: the class itself and `Lin`.
    pub fn ancestors(self) -> Vec<ClassTag> {
        if self == ClassTag::Lin {
            vec![ClassTag::Lin]
        } else {
            vec![ClassTag::Lin, self]
        }
    }
}

impl fmt::Display for ClassTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassTag::Lin => "Lin",
            ClassTag::Den => "Den",
            ClassTag::Dis => "Dis",
            ClassTag::Unb => "Unb",
        })
    }
}

impl FromStr for ClassTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lin" => Ok(ClassTag::Lin),
            "den" => Ok(ClassTag::Den),
            "dis" => Ok(ClassTag::Dis),
            "unb" => Ok(ClassTag::Unb),
            _ => Err(format!("unknown class `{s}`")),
        }
    }
}

/// A definability fact: `premises` define `target` over `class`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub id: String,
    pub class: ClassTag,
    pub premises: ExplicitSet,
    pub target: RelationSymbol,
    /// Defining formula over `x`, `y` (the target arguments in order).
    pub formula: Option<Formula>,
    pub provenance: String,
}

impl Rule {
    /// The query checked by verification, if the rule has a formula.
    pub fn query(&self) -> Option<Result<DefinabilityQuery, String>> {
        self.formula.as_ref().map(|f| {
            DefinabilityQuery::new(self.premises, self.target, f.clone(), Some(("x".into(), "y".into())))
                .map_err(|e| e.to_string())
        })
    }

    /// The rule in file syntax.
    pub fn to_line(&self) -> String {
        let mut s = format!(
            "rule {} class={} premises={} target={}",
            self.id,
            self.class,
            self.premises.to_list(),
            self.target.name()
        );
        if let Some(f) = &self.formula {
            s.push_str(&format!(" formula=\"{f}\""));
        }
        s.push_str(&format!(" src=\"{}\"", self.provenance));
        s
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_line())
    }
}

/// One diagnostic of the rule loader.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for LineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

/// Errors raised when loading rules.
#[derive(Debug, Error)]
pub enum RuleError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{}", .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<LineError>),
}

/// Splits `key=value` fields; values may be double-quoted.
fn fields(rest: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    let mut chars = rest.trim().chars().peekable();
    loop {
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        if chars.peek().is_none() {
            return Ok(out);
        }
        let mut key = String::new();
        while let Some(&c) = chars.peek() {
            if c == '=' || c.is_whitespace() {
                break;
            }
            key.push(c);
            chars.next();
        }
        if chars.next() != Some('=') {
            return Err(format!("expected `=` after `{key}`"));
        }
        let mut value = String::new();
        if chars.peek() == Some(&'"') {
            chars.next();
            loop {
                match chars.next() {
                    Some('"') => break,
                    Some(c) => value.push(c),
                    None => return Err(format!("unterminated quote in `{key}`")),
                }
            }
        } else {
            while let Some(&c) = chars.peek() {
                if c.is_whitespace() {
                    break;
                }
                value.push(c);
                chars.next();
            }
        }
        out.push((key, value));
    }
}

fn parse_line(line: &str) -> Result<Rule, String> {
    let rest = line.strip_prefix("rule ").ok_or("expected `rule <id> ...`")?;
    let rest = rest.trim_start();
    let (id, rest) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
    if id.is_empty() || id.contains('=') {
        return Err("missing rule id".into());
    }
    let (mut class, mut premises, mut target, mut formula, mut src) = (None, None, None, None, None);
    for (k, v) in fields(rest)? {
        let slot = match k.as_str() {
            "class" => &mut class,
            "premises" => &mut premises,
            "target" => &mut target,
            "formula" => &mut formula,
            "src" => &mut src,
            _ => return Err(format!("unknown field `{k}`")),
        };
        if slot.replace(v).is_some() {
            return Err(format!("field `{k}` given twice"));
        }
    }
    let class: ClassTag = class.ok_or("missing `class`")?.parse()?;
    let premises = ExplicitSet::parse_list(&premises.ok_or("missing `premises`")?).map_err(|e| e.to_string())?;
    if premises.is_empty() {
        return Err("empty premise set".into());
    }
    let target: RelationSymbol = target.ok_or("missing `target`")?.parse().map_err(|e| format!("{e}"))?;
    if !target.is_explicit() {
        return Err(format!("target {target} is not in R+"));
    }
    let formula = formula.map(|f| parse(&f).map_err(|e| format!("formula: {e}"))).transpose()?;
    let rule = Rule {
        id: id.to_string(),
        class,
        premises,
        target,
        formula,
        provenance: src.ok_or("missing `src`")?,
    };
    if let Some(q) = rule.query() {
        q.map_err(|e| format!("formula: {e}"))?;
    }
    Ok(rule)
}

/// Parses rule text, collecting every diagnostic.
pub fn parse_rules(text: &str) -> Result<Vec<Rule>, RuleError> {
    let mut rules: Vec<Rule> = Vec::new();
    let mut errors = Vec::new();
    let mut seen = std::collections::HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match parse_line(line) {
            Ok(r) => {
                if let Some(first) = seen.insert(r.id.clone(), i + 1) {
                    errors.push(LineError {
                        line: i + 1,
                        message: format!("duplicate rule id `{}` (first on line {first})", r.id),
                    });
                } else {
                    rules.push(r);
                }
            }
            Err(message) => errors.push(LineError { line: i + 1, message }),
        }
    }
    if errors.is_empty() {
        Ok(rules)
    } else {
        Err(RuleError::Invalid(errors))
    }
}

/// Loads rules from a file.
pub fn load(path: impl AsRef<Path>) -> Result<Vec<Rule>, RuleError> {
    let p = path.as_ref();
    let text = std::fs::read_to_string(p).map_err(|source| RuleError::Io { path: p.display().to_string(), source })?;
    parse_rules(&text)
}

/// The bundled rules, symmetry-expanded.
pub fn bundled() -> Vec<Rule> {
    expand_symmetry(&parse_rules(BUNDLED_RULES).expect("bundled rulebase is valid"))
}

/// The order-dual of a rule.
pub fn dual_rule(r: &Rule) -> Rule {
    let (target, swap) = r.target.dual_action().expect("rule targets are explicit");
    let formula = r.formula.as_ref().map(|f| {
        let d = dual_transform(f).expect("rule formulas use explicit symbols");
        if swap {
            d.rename_free("x", "x~").rename_free("y", "x").rename_free("x~", "y")
        } else {
            d
        }
    });
    Rule {
        id: format!("{}{SYM_SUFFIX}", r.id),
        class: r.class,
        premises: r.premises.symmetric(),
        target,
        formula,
        provenance: r.provenance.clone(),
    }
}

/// Adds the order-dual of every rule not already present.
pub fn expand_symmetry(rules: &[Rule]) -> Vec<Rule> {
    let same = |a: &Rule, b: &Rule| {
        a.class == b.class && a.premises == b.premises && a.target == b.target && a.formula == b.formula
    };
    let mut out = rules.to_vec();
    for r in rules {
        if r.id.ends_with(SYM_SUFFIX) {
            continue;
        }
        let d = dual_rule(r);
        if !out.iter().any(|o| same(o, &d) || o.id == d.id) {
            out.push(d);
        }
    }
    out
}

/// Verification status of one rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleStatus {
    Checked(Verdict),
    Trusted,
    Error(String),
}

impl fmt::Display for RuleStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleStatus::Checked(v) => write!(f, "{v}"),
            RuleStatus::Trusted => write!(f, "TRUSTED"),
            RuleStatus::Error(e) => write!(f, "ERROR {e}"),
        }
    }
}

/// One row of the verification report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyRow {
    pub id: String,
    pub class: ClassTag,
    pub status: RuleStatus,
}

impl VerifyRow {
    /// True for verdicts acceptable for a shipped rule.
    pub fn is_ok(&self) -> bool {
        match &self.status {
            RuleStatus::Trusted => true,
            RuleStatus::Checked(Verdict::Valid) => true,
            RuleStatus::Checked(Verdict::ValidOnRepresentatives(_)) => self.class != ClassTag::Den,
            _ => false,
        }
    }
}

/// Decides every formula-bearing rule of the selected class in parallel.
pub fn verify_rules(rules: &[Rule], class: Option<ClassTag>) -> Vec<VerifyRow> {
    rules
        .par_iter()
        .filter(|r| class.is_none_or(|c| r.class == c))
        .map(|r| {
            let status = match r.query() {
                None => RuleStatus::Trusted,
                Some(Err(e)) => RuleStatus::Error(e),
                Some(Ok(q)) => match decide_validity(&q, r.class) {
                    Ok(v) => RuleStatus::Checked(v),
                    Err(e) => RuleStatus::Error(e.to_string()),
                },
            };
            VerifyRow { id: r.id.clone(), class: r.class, status }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_examples() {
        let text = r#"
# comment
rule den-ii44-ii14 class=Den premises=ii44 target=ii14 formula="all z:i.(ii44(z,x) <-> ii44(z,y)) & ex z:i.(ii44(x,z) & ~ii44(y,z))" src="proof"
rule lin-meets-all class=Lin premises=ii34 target=ii24 src="imported"
"#;
        let rules = parse_rules(text).unwrap();
        assert_eq!(rules.len(), 2);
        assert!(rules[0].formula.is_some());
        assert_eq!(rules[1].formula, None);
        assert_eq!(parse_rules(&rules[0].to_line()).unwrap()[0], rules[0]);
    }

    #[test]
    fn diagnostics() {
        let text = "rule a class=Den premises=ip9 target=lt src=\"x\"\nrule b class=Den premises=ip0 target=lt src=\"x\"\nrule b class=Den premises=ip1 target=lt src=\"x\"\nrule c class=Den premises=ip0 target=lt formula=\"ip1(x,y)\" src=\"x\"";
        let RuleError::Invalid(errs) = parse_rules(text).unwrap_err() else { panic!() };
        let lines: Vec<usize> = errs.iter().map(|e| e.line).collect();
        assert_eq!(lines, vec![1, 3, 4]);
        assert!(errs[1].message.contains("duplicate"));
    }

    #[test]
    fn symmetry_examples() {
        let r = |p: &str, t: &str| Rule {
            id: "r".into(),
            class: ClassTag::Den,
            premises: ExplicitSet::parse_list(p).unwrap(),
            target: t.parse().unwrap(),
            formula: None,
            provenance: "proof".into(),
        };
        let d = dual_rule(&r("ip0", "eqp"));
        assert_eq!((d.premises.to_list(), d.target), ("ip4".to_string(), RelationSymbol::EQP));
        let d = dual_rule(&r("ip1,ii04", "ip2"));
        assert_eq!(d.premises.to_list(), "ip3,ii04");
        let d = dual_rule(&r("ii44", "ii14"));
        assert_eq!((d.premises.to_list(), d.target, d.id.as_str()), ("ii44".into(), RelationSymbol::II03, "r~sym"));
        let once = expand_symmetry(&[r("ii44", "ii14")]);
        assert_eq!(once.len(), 2);
        assert_eq!(expand_symmetry(&once), once);
    }

    #[test]
    fn lt_formula_swaps_arguments() {
        let rules = bundled();
        let d = rules.iter().find(|r| r.id == "den-ip0-lt~sym").unwrap();
        assert_eq!(d.premises.to_list(), "ip4");
        let f = d.formula.as_ref().unwrap().to_string();
        assert!(f.contains("ip4(z,x)") && f.contains("ip4(z,y)"), "{f}");
    }

    #[test]
    fn bundled_rules_load() {
        let raw = parse_rules(BUNDLED_RULES).unwrap();
        assert!(raw.iter().any(|r| r.provenance == "derivation chain"));
        assert!(raw.iter().filter(|r| r.formula.is_some()).all(|r| r.class != ClassTag::Lin));
    }
}
