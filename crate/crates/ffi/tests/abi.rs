use std::ffi::{CStr, CString};
use std::ptr;

use seqclone_ffi::*;

fn c(re: f64, im: f64) -> SeqcloneComplex {
    SeqcloneComplex { re, im }
}

fn plus() -> (SeqcloneComplex, SeqcloneComplex) {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    (c(h, 0.0), c(h, 0.0))
}

unsafe fn gm(clones: usize) -> *mut SeqcloneStatevector {
    let (a, b) = plus();
    let mut v = ptr::null_mut();
    assert_eq!(seqclone_gm_state(clones, a, b, &mut v), SeqcloneStatus::Ok);
    v
}

unsafe fn last_error() -> String {
    CStr::from_ptr(seqclone_last_error()).to_string_lossy().into_owned()
}

#[test]
fn statevector_amplitudes_are_copied_out() {
    unsafe {
        let v = gm(2);
        let mut n = 0;
        assert_eq!(seqclone_statevector_qubits(v, &mut n), SeqcloneStatus::Ok);
        assert_eq!(n, 3);
        let mut buf = vec![SeqcloneComplex::default(); 8];
        assert_eq!(seqclone_statevector_amplitudes(v, buf.as_mut_ptr(), 8), SeqcloneStatus::Ok);
        let norm: f64 = buf.iter().map(|z| z.re * z.re + z.im * z.im).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        assert_eq!(seqclone_statevector_amplitudes(v, buf.as_mut_ptr(), 4), SeqcloneStatus::InvalidArgument);
        seqclone_statevector_free(v);
    }
}

#[test]
fn mps_bond_dims_overlap_and_json() {
    unsafe {
        let v = gm(3);
        let mut m = ptr::null_mut();
        assert_eq!(seqclone_mps_from_statevector(v, 1e-10, &mut m), SeqcloneStatus::Ok);
        let mut count = 0;
        assert_eq!(seqclone_mps_bond_dims(m, ptr::null_mut(), 0, &mut count), SeqcloneStatus::Ok);
        assert_eq!(count, 6);
        let mut dims = vec![0usize; count];
        assert_eq!(seqclone_mps_bond_dims(m, dims.as_mut_ptr(), count, &mut count), SeqcloneStatus::Ok);
        assert_eq!(dims.iter().max(), Some(&3));

        let mut json = ptr::null_mut();
        assert_eq!(seqclone_mps_to_json(m, &mut json), SeqcloneStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(seqclone_mps_from_json(json, &mut back), SeqcloneStatus::Ok);
        let mut z = SeqcloneComplex::default();
        assert_eq!(seqclone_mps_overlap(m, back, &mut z), SeqcloneStatus::Ok);
        assert!((z.re - 1.0).abs() < 1e-12 && z.im.abs() < 1e-12);

        seqclone_string_free(json);
        seqclone_mps_free(back);
        seqclone_mps_free(m);
        seqclone_statevector_free(v);
    }
}

#[test]
fn compression_reports_fidelity() {
    unsafe {
        let v = gm(3);
        let mut m = ptr::null_mut();
        assert_eq!(seqclone_mps_from_statevector(v, 1e-10, &mut m), SeqcloneStatus::Ok);
        let mut small = ptr::null_mut();
        let mut f = 0.0;
        let status = seqclone_mps_compress(m, 2, SeqcloneMethod::VariationalSeededBySvd, 0, &mut small, &mut f);
        assert_eq!(status, SeqcloneStatus::Ok);
        assert!((1.0 - f - 0.0871).abs() < 1e-3);
        let mut exact = ptr::null_mut();
        assert_eq!(seqclone_mps_compress(m, 3, SeqcloneMethod::SvdTruncation, 0, &mut exact, &mut f), SeqcloneStatus::Ok);
        assert!((f - 1.0).abs() < 1e-12);
        for p in [small, exact, m] {
            seqclone_mps_free(p);
        }
        seqclone_statevector_free(v);
    }
}

#[test]
fn synthesis_handle() {
    unsafe {
        let v = gm(1);
        let mut s = ptr::null_mut();
        assert_eq!(seqclone_optimize_schedule(v, true, 1, 4, &mut s), SeqcloneStatus::Ok);
        let mut f = 0.0;
        assert_eq!(seqclone_synthesis_fidelity(s, &mut f), SeqcloneStatus::Ok);
        assert!(f > 1.0 - 1e-8);
        let mut json = ptr::null_mut();
        assert_eq!(seqclone_synthesis_schedule_json(s, &mut json), SeqcloneStatus::Ok);
        assert!(CStr::from_ptr(json).to_str().unwrap().contains("steps"));
        seqclone_string_free(json);
        seqclone_synthesis_free(s);
        seqclone_statevector_free(v);
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let mut v = ptr::null_mut();
        assert_eq!(seqclone_gm_state(0, c(1.0, 0.0), c(0.0, 0.0), &mut v), SeqcloneStatus::InvalidArgument);
        assert!(!last_error().is_empty());
        assert_eq!(seqclone_gm_state(2, c(1.0, 0.0), c(0.0, 0.0), ptr::null_mut()), SeqcloneStatus::NullPointer);
        let mut n = 0;
        assert_eq!(seqclone_statevector_qubits(ptr::null(), &mut n), SeqcloneStatus::NullPointer);
        let bad = CString::new("{}").unwrap();
        let mut m = ptr::null_mut();
        assert_eq!(seqclone_mps_from_json(bad.as_ptr(), &mut m), SeqcloneStatus::Parse);
        assert!(m.is_null());

        let (two, three) = (gm(2), gm(3));
        let (mut a, mut b) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(seqclone_mps_from_statevector(two, 0.0, &mut a), SeqcloneStatus::Ok);
        assert_eq!(seqclone_mps_from_statevector(three, 0.0, &mut b), SeqcloneStatus::Ok);
        let mut z = SeqcloneComplex::default();
        assert_eq!(seqclone_mps_overlap(a, b, &mut z), SeqcloneStatus::Structural);
        seqclone_mps_free(a);
        seqclone_mps_free(b);
        seqclone_statevector_free(three);

        let ok = two;
        let mut n = 0;
        assert_eq!(seqclone_statevector_qubits(ok, &mut n), SeqcloneStatus::Ok);
        assert!(seqclone_last_error().is_null());
        seqclone_statevector_free(ok);
        seqclone_statevector_free(ptr::null_mut());
    }
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/seqclone.h");
    let status = std::process::Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c", header])
        .status()
        .expect("a C compiler is needed to check the header");
    assert!(status.success());
}
