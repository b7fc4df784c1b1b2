//! End-to-end tests of the `ipdef` binary.

use std::io::Write;
use std::process::Command;

fn ipdef(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_ipdef")).args(args).output().expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).expect("utf8"),
        String::from_utf8(out.stderr).expect("utf8"),
    )
}

fn temp_file(contents: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().expect("temp file");
    f.write_all(contents.as_bytes()).expect("write");
    f
}

#[test]
fn spectrum_of_point_equality() {
    let (code, out, _) = ipdef(&["spectrum", "--class", "den", "--target", "eqp"]);
    assert_eq!(code, 0);
    let mcs: Vec<&str> = out
        .lines()
        .skip_while(|l| !l.starts_with("mcs"))
        .skip(1)
        .take_while(|l| l.starts_with("  "))
        .map(str::trim)
        .collect();
    assert_eq!(mcs, ["{lt}", "{ip0}", "{ip1}", "{ip3}", "{ip4}"]);
}

#[test]
fn closure_of_before() {
    let (code, out, _) = ipdef(&["closure", "--class", "den", "--set", "ii44"]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "{ii34, ii44, ii14, ii03, ii04, ii24, eqi}");
}

#[test]
fn verify_zeta_single_spec() {
    let (code, out, _) = ipdef(&["verify-zeta", "--id", "den-misc-eqp", "--samples", "100000", "--seed", "7"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.starts_with("den-misc-eqp PASS"), "{out}");
}

#[test]
fn verify_zeta_reports_bad_witness() {
    let cat = temp_file("spec bad class=Den order=QQ respects=lt breaks=eqp\nwitness eqp 0 0 -> 0 1\nend\n");
    let (code, out, _) = ipdef(&["verify-zeta", "--all", "--samples", "10", "--catalog", cat.path().to_str().unwrap()]);
    assert_eq!(code, 1, "{out}");
    assert!(out.contains("bad FAIL"), "{out}");
}

#[test]
fn verify_zeta_expected_failure_is_success() {
    let (code, out, _) = ipdef(&["verify-zeta", "--id", "den-ii14-breaker-original", "--samples", "1000"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("XFAIL"), "{out}");
}

#[test]
fn harvest_tsv_round_trips_through_diff() {
    for class in ["den", "unb"] {
        let (code, tsv, _) = ipdef(&["harvest", "--class", class, "--format", "tsv"]);
        assert_eq!(code, 0);
        let f = temp_file(&tsv);
        let (code, out, _) = ipdef(&["diff-tables", "--expected", f.path().to_str().unwrap()]);
        assert_eq!(code, 0, "{out}");
        assert!(out.contains("missing=0 extra=0"), "{out}");
    }
}

#[test]
fn spectrum_tsv_round_trips_through_diff() {
    let (code, tsv, _) = ipdef(&["spectrum", "--class", "unb", "--target", "ii14", "--format", "tsv"]);
    assert_eq!(code, 0);
    let f = temp_file(&tsv);
    let (code, out, _) = ipdef(&["diff-tables", "--expected", f.path().to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");
}

#[test]
fn diff_detects_mismatches() {
    let f = temp_file("@table t\n@class den\neqp: lt\neqp: ii44\n");
    let (code, out, _) = ipdef(&["diff-tables", "--expected", f.path().to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(out.contains("MISSING eqp: {ii44}"), "{out}");
    assert!(out.contains("EXTRA eqp: {ip0}"), "{out}");
}

#[test]
fn bundled_tables_are_clean() {
    let (code, out, _) = ipdef(&["diff-tables", "--all"]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(out.matches("missing=0 extra=0").count(), 15);
}

#[test]
fn check_rules_passes_and_detects_bad_rules() {
    let (code, out, _) = ipdef(&["check-rules", "--class", "unb"]);
    assert_eq!(code, 0, "{out}");
    let rb = temp_file("rule wrong class=Den premises=ip2 target=eqp formula=\"all z:i.(ip2(z,x) <-> ip2(z,y)) & ~ip9(x,x)\" src=\"proof\"\n");
    let (code, _, err) = ipdef(&["check-rules", "--rulebase", rb.path().to_str().unwrap()]);
    assert_eq!(code, 2, "{err}");
    let rb = temp_file("rule wrong class=Den premises=lt target=eqp formula=\"lt(x,y)\" src=\"proof\"\n");
    let (code, out, _) = ipdef(&["check-rules", "--rulebase", rb.path().to_str().unwrap()]);
    assert_eq!(code, 1, "{out}");
    assert!(out.contains("FAIL wrong"), "{out}");
}

#[test]
fn decide_reports_countermodels() {
    let body = "all p:p.(ip2(x,p) <-> ip2(y,p))";
    let (code, out, _) = ipdef(&["decide", body, "--target", "eqi", "--class", "den"]);
    assert_eq!((code, out.trim()), (0, "VALID"));
    let (code, out, _) = ipdef(&["decide", body, "--target", "eqi", "--class", "unb"]);
    assert_eq!(code, 1);
    assert_eq!(out.trim(), "INVALID DISCRETE_UNBOUNDED x=[0,1] y=[1,2]");
}

#[test]
fn relations_and_eval() {
    let (code, out, _) = ipdef(&["relations", "list", "--format", "tsv"]);
    assert_eq!(code, 0);
    assert!(out.lines().any(|l| l == "eqi\tii\t13"), "{out}");
    let (_, out, _) = ipdef(&["eval", "ii04(x,y)", "--size", "4", "--assign", "x=[1,2]", "--assign", "y=[0,3]"]);
    assert_eq!(out.trim(), "true");
}

#[test]
fn usage_errors() {
    for args in [
        &["harvest", "--class", "foo"][..],
        &["spectrum", "--class", "den"],
        &["closure", "--set", "ip9"],
        &["diff-tables"],
        &["diff-tables", "--expected", "/nonexistent/table.tbl"],
        &["verify-zeta", "--id", "no-such-spec"],
        &["eval", "ip0(x,", "--size", "2"],
        &["check-rules", "--rulebase", "/nonexistent/rules.txt"],
    ] {
        let (code, _, err) = ipdef(args);
        assert_eq!(code, 2, "{args:?}: {err}");
        assert!(!err.is_empty());
    }
}
