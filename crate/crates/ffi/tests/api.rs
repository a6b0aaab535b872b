use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use kacbench_ffi::*;

fn last_error() -> String {
    let p = kb_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

unsafe fn take_string(p: *mut c_char) -> String {
    let s = CStr::from_ptr(p).to_string_lossy().into_owned();
    kb_string_free(p);
    s
}

fn cycle(n: usize) -> *mut KbSystem {
    let mut sys = ptr::null_mut();
    assert_eq!(unsafe { kb_system_cycle(n, &mut sys) }, KbStatus::Ok);
    sys
}

#[test]
fn classical_kac_on_cycle() {
    let sys = cycle(5);
    let target = [0usize, 1];
    let mut integral = ptr::null_mut();
    let mut holds = false;
    unsafe {
        assert_eq!(
            kb_classical_kac(sys, target.as_ptr(), 2, &mut integral, &mut holds),
            KbStatus::Ok
        );
        assert!(holds);
        assert_eq!(take_string(integral), "1/1");
        kb_system_free(sys);
    }
}

#[test]
fn allocation_handles() {
    let sys = cycle(5);
    let target = [0usize, 1];
    let mut alloc = ptr::null_mut();
    unsafe {
        assert_eq!(
            kb_allocation_greedy(sys, target.as_ptr(), 2, 1000, &mut alloc),
            KbStatus::Ok
        );
        kb_system_free(sys);

        let expected = [0i64, 0, -1, -2, 1];
        for (x, want) in expected.iter().enumerate() {
            let mut c = [0i64; 2];
            let mut len = 0;
            assert_eq!(
                kb_allocation_kappa(alloc, x, c.as_mut_ptr(), 2, &mut len),
                KbStatus::Ok
            );
            assert_eq!((len, c[0]), (1, *want), "x = {x}");
        }
        let mut len = 0;
        assert_eq!(
            kb_allocation_kappa(alloc, 0, ptr::null_mut(), 0, &mut len),
            KbStatus::InvalidArgument
        );
        assert_eq!(len, 1);
        assert_eq!(
            kb_allocation_kappa(alloc, 9, ptr::null_mut(), 0, &mut len),
            KbStatus::InvalidArgument
        );

        let sizes: Vec<usize> = (0..5)
            .map(|x| {
                let mut s = 0;
                assert_eq!(kb_allocation_cell_size(alloc, x, &mut s), KbStatus::Ok);
                s
            })
            .collect();
        assert_eq!(sizes, [2, 3, 0, 0, 0]);

        let values: Vec<CString> = ["1/2", "3", "0", "inf", "7/3"]
            .iter()
            .map(|s| CString::new(*s).unwrap())
            .collect();
        let ptrs: Vec<*const c_char> = values.iter().map(|s| s.as_ptr()).collect();
        let mut json = ptr::null_mut();
        assert_eq!(
            kb_allocation_identity(alloc, ptrs.as_ptr(), 5, &mut json),
            KbStatus::Ok
        );
        let v: serde_json::Value = serde_json::from_str(&take_string(json)).unwrap();
        assert_eq!(v["equal"], true);
        assert_eq!(v["lhs"], "inf");

        let mut json = ptr::null_mut();
        assert_eq!(
            kb_allocation_identity(alloc, ptrs.as_ptr(), 4, &mut json),
            KbStatus::InvalidArgument
        );
        kb_allocation_free(alloc);
    }
}

#[test]
fn system_from_generators_and_masses() {
    let group = CString::new("Z").unwrap();
    let masses: Vec<CString> = ["1/9", "1/9", "1/9", "2/9", "2/9", "2/9"]
        .iter()
        .map(|s| CString::new(*s).unwrap())
        .collect();
    let mptr: Vec<*const c_char> = masses.iter().map(|s| s.as_ptr()).collect();
    let gens = [1usize, 2, 0, 4, 5, 3];
    let mut sys = ptr::null_mut();
    unsafe {
        assert_eq!(
            kb_system_new(group.as_ptr(), 6, mptr.as_ptr(), gens.as_ptr(), &mut sys),
            KbStatus::Ok
        );
        let mut ergodic = true;
        assert_eq!(kb_system_is_ergodic(sys, &mut ergodic), KbStatus::Ok);
        assert!(!ergodic);

        let target = [0usize];
        let mut alloc = ptr::null_mut();
        assert_eq!(
            kb_allocation_greedy(sys, target.as_ptr(), 1, 100, &mut alloc),
            KbStatus::InvalidArgument
        );
        assert!(last_error().contains("sweep"), "{}", last_error());
        kb_system_free(sys);

        let bad = ["1/2", "1/2", "1/2", "0", "0", "0"].map(|s| CString::new(s).unwrap());
        let bptr: Vec<*const c_char> = bad.iter().map(|s| s.as_ptr()).collect();
        let mut sys = ptr::null_mut();
        assert_eq!(
            kb_system_new(group.as_ptr(), 6, bptr.as_ptr(), gens.as_ptr(), &mut sys),
            KbStatus::InvalidArgument
        );
        assert!(sys.is_null());
        assert!(last_error().contains("3/2"));
    }
}

#[test]
fn null_and_utf8_errors() {
    unsafe {
        assert_eq!(kb_system_cycle(3, ptr::null_mut()), KbStatus::NullPointer);
        let mut holds = false;
        let mut s = ptr::null_mut();
        assert_eq!(
            kb_classical_kac(ptr::null(), ptr::null(), 0, &mut s, &mut holds),
            KbStatus::NullPointer
        );
        assert_eq!(kb_system_n_points(ptr::null()), 0);
        let bad = [0xffu8, 0];
        let mut sys = ptr::null_mut();
        assert_eq!(
            kb_system_new(bad.as_ptr().cast(), 1, ptr::null(), ptr::null(), &mut sys),
            KbStatus::InvalidUtf8
        );
        kb_system_free(ptr::null_mut());
        kb_allocation_free(ptr::null_mut());
        kb_string_free(ptr::null_mut());
    }
}

#[test]
fn run_command_reports() {
    let cmd = CString::new("verify-kac").unwrap();
    let cfg = CString::new("[system]\nkind = \"finite\"\ncycle = 5\n[target]\npoints = [0, 1]\n")
        .unwrap();
    let mut json = ptr::null_mut();
    let mut code = -1;
    unsafe {
        assert_eq!(
            kb_run_command(cmd.as_ptr(), cfg.as_ptr(), &mut json, &mut code),
            KbStatus::Ok
        );
        assert_eq!(code, 0);
        let body: serde_json::Value = serde_json::from_str(&take_string(json)).unwrap();
        assert_eq!(body["exact"]["integral"], "1/1");

        let bad = CString::new("[system]\nkind = \"finite\"\ncycle = 2\nmasses = [\"1\", \"1\"]\n[target]\npoints = [0]\n").unwrap();
        assert_eq!(
            kb_run_command(cmd.as_ptr(), bad.as_ptr(), &mut json, &mut code),
            KbStatus::InvalidArgument
        );
        assert!(last_error().contains("system.masses"));

        let unknown = CString::new("frobnicate").unwrap();
        assert_eq!(
            kb_run_command(unknown.as_ptr(), cfg.as_ptr(), &mut json, &mut code),
            KbStatus::InvalidArgument
        );

        let rot = CString::new("[system]\nkind = \"rotation\"\n[target]\ninterval = [\"0\", \"1/2\"]\n[run]\nbudget = 1\nsamples = 5000\n").unwrap();
        assert_eq!(
            kb_run_command(cmd.as_ptr(), rot.as_ptr(), &mut json, &mut code),
            KbStatus::Abstained
        );
        assert_eq!(code, 3);
        let body: serde_json::Value = serde_json::from_str(&take_string(json)).unwrap();
        assert_eq!(body["verdict"]["status"], "abstain");
    }
}

fn target_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_compiles_and_links_from_c() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib = target_dir().join("libkacbench_ffi.a");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if !lib.exists() || Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or static library");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new(&cc)
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
