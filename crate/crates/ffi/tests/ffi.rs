use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::ptr;

use chainpolar_ffi::*;

fn noiseless_config() -> CString {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/noiseless.toml");
    CString::new(std::fs::read_to_string(path).unwrap()).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(cp_last_error()) }.to_string_lossy().into_owned()
}

struct Handle(*mut CpInstance);

impl Drop for Handle {
    fn drop(&mut self) {
        unsafe { cp_instance_free(self.0) }
    }
}

fn build() -> Handle {
    let mut inst = ptr::null_mut();
    let s = unsafe { cp_instance_construct(noiseless_config().as_ptr(), 0, &mut inst) };
    assert_eq!(s, CpStatus::Ok, "{}", last_error());
    Handle(inst)
}

fn dims(h: &Handle) -> (usize, usize, usize, usize) {
    let (mut n, mut k, mut p, mut q) = (0, 0, 0, 0);
    assert_eq!(unsafe { cp_instance_dims(h.0, &mut n, &mut k, &mut p, &mut q) }, CpStatus::Ok);
    (n, k, p, q)
}

#[test]
fn encode_decode_round_trip() {
    let h = build();
    let (n, k, pb, qb) = dims(&h);
    assert_eq!(n, 64);
    let public: Vec<u8> = (0..pb).map(|i| (i * 7 % 3 == 0) as u8).collect();
    let private: Vec<u8> = (0..qb).map(|i| (i % 2) as u8).collect();
    let mut x = vec![0u8; n * k];
    let s = unsafe { cp_encode(h.0, public.as_ptr(), pb, private.as_ptr(), qb, x.as_mut_ptr(), x.len()) };
    assert_eq!(s, CpStatus::Ok, "{}", last_error());
    let obs: Vec<u32> = x.iter().map(|&b| b as u32).collect();
    for j in 1..=3u8 {
        let mut p = vec![9u8; pb];
        let mut q = vec![9u8; if j == 1 { qb } else { 0 }];
        let s = unsafe {
            cp_decode(h.0, j, obs.as_ptr(), obs.len(), p.as_mut_ptr(), pb, q.as_mut_ptr(), q.len())
        };
        assert_eq!(s, CpStatus::Ok, "{}", last_error());
        assert_eq!(p, public);
        if j == 1 {
            assert_eq!(q, private);
        }
    }
}

#[test]
fn json_round_trip() {
    let h = build();
    let mut text = ptr::null_mut();
    assert_eq!(unsafe { cp_instance_to_json(h.0, &mut text) }, CpStatus::Ok);
    let mut back = ptr::null_mut();
    assert_eq!(unsafe { cp_instance_from_json(text, &mut back) }, CpStatus::Ok);
    let back = Handle(back);
    assert_eq!(dims(&back), dims(&h));
    unsafe { cp_string_free(text) };
}

#[test]
fn errors_carry_codes_and_messages() {
    let h = build();
    let (n, k, pb, qb) = dims(&h);
    let mut x = vec![0u8; n * k];
    let short = vec![0u8; pb.saturating_sub(1)];
    let private = vec![0u8; qb];
    let s = unsafe { cp_encode(h.0, short.as_ptr(), short.len(), private.as_ptr(), qb, x.as_mut_ptr(), x.len()) };
    assert_eq!(s, CpStatus::LengthMismatch);
    assert!(last_error().contains("message length"), "{}", last_error());

    let s = unsafe { cp_encode(ptr::null(), ptr::null(), 0, ptr::null(), 0, x.as_mut_ptr(), x.len()) };
    assert_eq!(s, CpStatus::NullPointer);

    let bad = CString::new("{not json").unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { cp_instance_from_json(bad.as_ptr(), &mut out) }, CpStatus::InvalidInput);
    assert!(out.is_null());

    let over = noiseless_config().to_str().unwrap().replace("r0 = 0.05", "r0 = 0.9");
    let over = CString::new(over).unwrap();
    assert_eq!(unsafe { cp_instance_construct(over.as_ptr(), 0, &mut out) }, CpStatus::Infeasible);
    assert!(last_error().contains("I(W;Y2)"), "{}", last_error());

    let obs = vec![5u32; n * k];
    let mut p = vec![0u8; pb];
    let s = unsafe { cp_decode(h.0, 2, obs.as_ptr(), obs.len(), p.as_mut_ptr(), pb, ptr::null_mut(), 0) };
    assert_eq!(s, CpStatus::InvalidInput);
    let s = unsafe { cp_decode(h.0, 4, obs.as_ptr(), obs.len(), p.as_mut_ptr(), pb, ptr::null_mut(), 0) };
    assert_eq!(s, CpStatus::InvalidInput);
}

#[test]
fn header_declares_the_interface() {
    let header = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/chainpolar.h")).unwrap();
    for name in [
        "cp_instance_construct",
        "cp_instance_from_json",
        "cp_instance_free",
        "cp_encode",
        "cp_decode",
        "cp_last_error",
        "CP_STATUS_INFEASIBLE",
        "typedef struct CpInstance CpInstance",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

#[test]
fn version_is_set() {
    let v = unsafe { CStr::from_ptr(cp_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
