//! C interface: opaque code instances, status codes and a per-thread last
//! error message.
//!
//! Every function returns a [`CpStatus`]; outputs go through pointers. Bit
//! buffers hold one bit per byte (`0` or `1`).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use chainpolar::codec::{construct, encode_chain, CodeInstance, Decoder};
use chainpolar::io::ConfigDocument;
use chainpolar::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    /// The requested rates do not fit the code.
    Infeasible = 3,
    LengthMismatch = 4,
    Internal = 5,
}

/// A constructed or loaded code instance.
pub struct CpInstance {
    inner: CodeInstance,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let clean = msg.replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(clean).unwrap_or_default());
}

fn status_of(e: &Error) -> CpStatus {
    match e {
        Error::NotAchievable(_) | Error::SplitFailed(_) | Error::BackoffRequired { .. } => CpStatus::Infeasible,
        Error::MessageLength(_) | Error::DimensionMismatch(_) => CpStatus::LengthMismatch,
        Error::Io(_) => CpStatus::Internal,
        _ => CpStatus::InvalidInput,
    }
}

fn fail(status: CpStatus, msg: &str) -> CpStatus {
    set_error(msg);
    status
}

/// Runs `f`, turning library errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), CpStatus>) -> CpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            CpStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => fail(CpStatus::Internal, "internal panic"),
    }
}

fn lib_err(e: Error) -> CpStatus {
    fail(status_of(&e), &e.to_string())
}

unsafe fn c_str<'a>(p: *const c_char) -> Result<&'a str, CpStatus> {
    if p.is_null() {
        return Err(fail(CpStatus::NullPointer, "null string"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(CpStatus::InvalidInput, "string is not UTF-8"))
}

unsafe fn bits_in<'a>(p: *const u8, len: usize) -> Result<&'a [u8], CpStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(CpStatus::NullPointer, "null bit buffer"));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn bits_out<'a>(p: *mut u8, len: usize) -> Result<&'a mut [u8], CpStatus> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(fail(CpStatus::NullPointer, "null output buffer"));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn instance<'a>(p: *const CpInstance) -> Result<&'a CodeInstance, CpStatus> {
    p.as_ref()
        .map(|i| &i.inner)
        .ok_or_else(|| fail(CpStatus::NullPointer, "null instance"))
}

fn length_check(what: &str, got: usize, want: usize) -> Result<(), CpStatus> {
    if got == want {
        Ok(())
    } else {
        Err(fail(
            CpStatus::LengthMismatch,
            &format!("{what}: buffer holds {got}, expected {want}"),
        ))
    }
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn cp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Loads an instance from its JSON document.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cp_instance_from_json(json: *const c_char, out: *mut *mut CpInstance) -> CpStatus {
    guard(|| {
        if out.is_null() {
            return Err(fail(CpStatus::NullPointer, "null output handle"));
        }
        let inner = CodeInstance::from_json(c_str(json)?).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(CpInstance { inner }));
        Ok(())
    })
}

/// Builds an instance from a TOML config at block length `2^n`
/// (`n = 0` takes the exponent from the config).
///
/// # Safety
/// `config_toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cp_instance_construct(
    config_toml: *const c_char,
    n: u32,
    out: *mut *mut CpInstance,
) -> CpStatus {
    guard(|| {
        if out.is_null() {
            return Err(fail(CpStatus::NullPointer, "null output handle"));
        }
        let doc = ConfigDocument::parse(c_str(config_toml)?).map_err(lib_err)?;
        let n = if n == 0 { doc.construct_n().map_err(lib_err)? } else { n };
        let params = doc.experiment().and_then(|c| c.construction_params(n)).map_err(lib_err)?;
        let inner = construct(&params).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(CpInstance { inner }));
        Ok(())
    })
}

/// Releases an instance; null is ignored.
///
/// # Safety
/// `inst` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cp_instance_free(inst: *mut CpInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Block length, block count and message sizes of an instance.
///
/// # Safety
/// `inst` must be a live instance; output pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn cp_instance_dims(
    inst: *const CpInstance,
    block_len: *mut usize,
    blocks: *mut usize,
    public_bits: *mut usize,
    private_bits: *mut usize,
) -> CpStatus {
    guard(|| {
        let i = instance(inst)?;
        for (p, v) in [
            (block_len, i.block_len()),
            (blocks, i.k),
            (public_bits, i.budget.public_total),
            (private_bits, i.budget.private_total),
        ] {
            if !p.is_null() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// Serializes an instance. Free the string with [`cp_string_free`].
///
/// # Safety
/// `inst` must be a live instance and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cp_instance_to_json(inst: *const CpInstance, out: *mut *mut c_char) -> CpStatus {
    guard(|| {
        if out.is_null() {
            return Err(fail(CpStatus::NullPointer, "null output string"));
        }
        let text = instance(inst)?.to_json().map_err(lib_err)?;
        *out = CString::new(text)
            .map_err(|_| fail(CpStatus::Internal, "JSON holds a NUL byte"))?
            .into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn cp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Encodes the messages into `blocks * block_len` codeword bits.
///
/// # Safety
/// Buffers must hold at least the given number of bytes.
#[no_mangle]
pub unsafe extern "C" fn cp_encode(
    inst: *const CpInstance,
    public_bits: *const u8,
    public_len: usize,
    private_bits: *const u8,
    private_len: usize,
    codeword: *mut u8,
    codeword_len: usize,
) -> CpStatus {
    guard(|| {
        let i = instance(inst)?;
        let public = bits_in(public_bits, public_len)?;
        let private = bits_in(private_bits, private_len)?;
        length_check("codeword", codeword_len, i.k * i.block_len())?;
        let out = bits_out(codeword, codeword_len)?;
        let blocks = encode_chain(i, public, private).map_err(lib_err)?;
        for (dst, src) in out.chunks_mut(i.block_len()).zip(&blocks) {
            dst.copy_from_slice(&src.x);
        }
        Ok(())
    })
}

/// Decodes `blocks * block_len` output symbols of `receiver` (1, 2 or 3).
/// Receiver 1 also fills `private_out`; other receivers leave it alone and
/// accept a null pointer with length 0.
///
/// # Safety
/// Buffers must hold at least the given number of elements.
#[no_mangle]
pub unsafe extern "C" fn cp_decode(
    inst: *const CpInstance,
    receiver: u8,
    observations: *const u32,
    observations_len: usize,
    public_out: *mut u8,
    public_len: usize,
    private_out: *mut u8,
    private_len: usize,
) -> CpStatus {
    guard(|| {
        let i = instance(inst)?;
        if !(1..=3).contains(&receiver) {
            return Err(fail(CpStatus::InvalidInput, "receiver must be 1, 2 or 3"));
        }
        let len = i.block_len();
        length_check("observations", observations_len, i.k * len)?;
        length_check("public message", public_len, i.budget.public_total)?;
        if receiver == 1 {
            length_check("private message", private_len, i.budget.private_total)?;
        }
        if observations.is_null() && observations_len > 0 {
            return Err(fail(CpStatus::NullPointer, "null observations"));
        }
        let obs: &[u32] = if observations_len == 0 {
            &[]
        } else {
            std::slice::from_raw_parts(observations, observations_len)
        };
        let ysize = i.channel.y_size(receiver);
        if obs.iter().any(|&y| y as usize >= ysize) {
            return Err(fail(CpStatus::InvalidInput, "observation symbol out of range"));
        }
        let blocks: Vec<Vec<usize>> = obs.chunks(len).map(|b| b.iter().map(|&y| y as usize).collect()).collect();
        let ys: Vec<&[usize]> = blocks.iter().map(Vec::as_slice).collect();
        let dec = Decoder::new(i, &i.channel).decode(receiver, &ys);
        bits_out(public_out, public_len)?.copy_from_slice(&dec.public);
        if let Some(p) = dec.private {
            bits_out(private_out, private_len)?.copy_from_slice(&p);
        }
        Ok(())
    })
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cp_version() -> *const c_char {
    static VERSION: &[u8] = concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes();
    VERSION.as_ptr().cast()
}
