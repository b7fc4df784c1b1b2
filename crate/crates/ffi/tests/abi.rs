//! Calls through the C ABI and checks of the generated header.

use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use ipdef_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(ipdef_last_error()) }.to_str().unwrap().to_owned()
}

fn bit(name: &str) -> u32 {
    let name = CString::new(name).unwrap();
    let mut out = u32::MAX;
    assert_eq!(unsafe { ipdef_relation_bit(name.as_ptr(), &mut out) }, IpdefStatus::Ok);
    out
}

#[test]
fn relation_names_and_bits() {
    assert_eq!(ipdef_relation_count(), 14);
    for (i, name) in ["lt", "eqp", "ip0", "ip1", "ip2", "ip3", "ip4", "ii34", "ii44", "ii14", "ii03", "ii04", "ii24", "eqi"]
        .iter()
        .enumerate()
    {
        assert_eq!(bit(name), i as u32);
        let got = unsafe { CStr::from_ptr(ipdef_relation_name(i as u32)) };
        assert_eq!(got.to_str().unwrap(), *name);
    }
    assert!(ipdef_relation_name(14).is_null());
}

#[test]
fn relation_errors() {
    let mut out = 0;
    let bad = CString::new("ip9").unwrap();
    assert_eq!(unsafe { ipdef_relation_bit(bad.as_ptr(), &mut out) }, IpdefStatus::InvalidArgument);
    assert!(!last_error().is_empty());
    let outside = CString::new("pi04").unwrap();
    assert_eq!(unsafe { ipdef_relation_bit(outside.as_ptr(), &mut out) }, IpdefStatus::NotFound);
    assert_eq!(unsafe { ipdef_relation_bit(ptr::null(), &mut out) }, IpdefStatus::NullPointer);
}

#[test]
fn closure_handle() {
    let class = CString::new("den").unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { ipdef_closure_new(class.as_ptr(), &mut h) }, IpdefStatus::Ok);
    assert!(!h.is_null());

    let mut out = 0u16;
    assert_eq!(unsafe { ipdef_closure_apply(h, 1 << bit("ii44"), &mut out) }, IpdefStatus::Ok);
    assert_eq!(out, 0b11_1111_1000_0000);

    let mut defines = false;
    assert_eq!(unsafe { ipdef_closure_defines(h, 1 << bit("lt"), bit("eqp"), &mut defines) }, IpdefStatus::Ok);
    assert!(defines);
    assert_eq!(unsafe { ipdef_closure_defines(h, 1 << bit("eqi"), bit("eqp"), &mut defines) }, IpdefStatus::Ok);
    assert!(!defines);

    assert_eq!(unsafe { ipdef_closure_apply(h, 1 << 14, &mut out) }, IpdefStatus::InvalidArgument);
    assert_eq!(unsafe { ipdef_closure_defines(h, 0, 14, &mut defines) }, IpdefStatus::InvalidArgument);
    assert_eq!(unsafe { ipdef_closure_apply(ptr::null(), 0, &mut out) }, IpdefStatus::NullPointer);
    unsafe { ipdef_closure_free(h) };
    unsafe { ipdef_closure_free(ptr::null_mut()) };

    let bad = CString::new("dense").unwrap();
    assert_eq!(unsafe { ipdef_closure_new(bad.as_ptr(), &mut h) }, IpdefStatus::InvalidArgument);
    assert!(h.is_null());
    assert!(last_error().contains("dense"));
}

#[test]
fn zeta_verification() {
    let mut out = IpdefZetaOutcome::Fail;
    let id = CString::new("den-misc-eqp").unwrap();
    assert_eq!(unsafe { ipdef_zeta_verify(id.as_ptr(), 1000, 7, &mut out) }, IpdefStatus::Ok);
    assert_eq!(out, IpdefZetaOutcome::Pass);
    let id = CString::new("den-ii14-breaker-original").unwrap();
    assert_eq!(unsafe { ipdef_zeta_verify(id.as_ptr(), 1000, 7, &mut out) }, IpdefStatus::Ok);
    assert_eq!(out, IpdefZetaOutcome::ExpectedFail);
    let id = CString::new("missing").unwrap();
    assert_eq!(unsafe { ipdef_zeta_verify(id.as_ptr(), 1000, 7, &mut out) }, IpdefStatus::NotFound);
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/ipdef.h")).unwrap();
    let source = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exports: Vec<&str> = source
        .split("extern \"C\" fn ")
        .skip(1)
        .map(|s| s.split('(').next().unwrap())
        .collect();
    assert_eq!(exports.len(), 9);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler; skipping");
        return;
    };
    assert!(cc.status.success());
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let src = std::env::temp_dir().join(format!("ipdef_header_{}.c", std::process::id()));
    std::fs::write(
        &src,
        "#include \"ipdef.h\"\nint main(void) { IpdefClosure *h = 0; bool d; uint16_t o;\n\
         (void)ipdef_closure_apply(h, 1, &o); (void)ipdef_closure_defines(h, 1, 0, &d);\n\
         return ipdef_closure_new(\"den\", &h) == IPDEF_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", dir])
        .arg(&src)
        .output()
        .unwrap();
    let _ = std::fs::remove_file(&src);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
