//! C ABI over `hypervsa`.
//!
//! Every fallible call returns an [`HvStatus`]; on failure the message is
//! available from [`hv_last_error`] on the same thread. Objects are opaque
//! handles created by `*_new`/`*_load`/result out-parameters and released
//! with the matching `*_free`. Families are passed as an order byte: 0 for
//! binary, `n` in 2..=255 for the cyclic group of order `n`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use hypervsa::analysis::{cdc_binary_hdc, cdc_group, cdc_perceptron, CdcQuery};
use hypervsa::error::Error;
use hypervsa::expressivity::{bundling_angle_theory, check_binary_expressible};
use hypervsa::learn::{Classifier, Encoder, Model};
use hypervsa::linalg::SquareMatrix;
use hypervsa::rff::{sample_correlated, CorrelatedBasis, SimilarityTarget};
use hypervsa::rng::SeededRng;
use hypervsa::vsa::{
    bundle_binary, bundle_cyclic, record, BinaryHypervector, CyclicHypervector, Family, Hypervector,
};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimMismatch = 3,
    OrderMismatch = 4,
    Empty = 5,
    Numeric = 6,
    Data = 7,
    Format = 8,
    Io = 9,
    /// A Rust panic was caught at the boundary; the library state is intact
    /// but the call had no effect.
    Panic = 10,
}

impl From<&Error> for HvStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::DimMismatch { .. } => HvStatus::DimMismatch,
            Error::OrderMismatch { .. } => HvStatus::OrderMismatch,
            Error::Empty(_) => HvStatus::Empty,
            Error::InvalidArgument(_) | Error::Config(_) => HvStatus::InvalidArgument,
            Error::Numeric(_) => HvStatus::Numeric,
            Error::Data(_) => HvStatus::Data,
            Error::Format(_) => HvStatus::Format,
            Error::Io(_) => HvStatus::Io,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(HvStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(HvStatus::from(&e), e.to_string())
    }
}

type FfiResult<T> = Result<T, Fail>;

fn null(what: &str) -> Fail {
    Fail(HvStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(HvStatus::InvalidArgument, msg.into())
}

/// Runs `f`, records any failure, and maps it to a status.
fn guard(f: impl FnOnce() -> FfiResult<()>) -> HvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HvStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            HvStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> FfiResult<&'a T> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn deref_mut<'a, T>(p: *mut T, what: &str) -> FfiResult<&'a mut T> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> FfiResult<&'a [T]> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn write_out<T>(out: *mut T, v: T, what: &str) -> FfiResult<()> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

unsafe fn path_arg<'a>(p: *const c_char) -> FfiResult<&'a Path> {
    if p.is_null() {
        return Err(null("path"));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid("path is not valid UTF-8"))?;
    Ok(Path::new(s))
}

fn family(order: u8) -> FfiResult<Family> {
    Ok(Family::from_order_byte(order)?)
}

/// Seeded random stream.
pub struct HvRng(SeededRng);

/// A binary or cyclic hypervector.
pub struct HvVector(Hypervector);

/// A set of basis hypervectors, e.g. one per quantization level.
pub struct HvBasis(CorrelatedBasis);

/// A trained classifier loaded from a model file.
pub struct HvModel(Model);

/// Circuit depth of one inference model.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct HvCdcDepth {
    pub depth: f64,
    pub rounded: u64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct HvCdcReport {
    pub binary_hdc: HvCdcDepth,
    pub group: HvCdcDepth,
    pub perceptron: HvCdcDepth,
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hv_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

// ---- rng ----

/// Stream `stream` of master seed `seed`. Never returns NULL.
#[no_mangle]
pub extern "C" fn hv_rng_new(seed: u64, stream: u64) -> *mut HvRng {
    Box::into_raw(Box::new(HvRng(SeededRng::with_stream(seed, stream))))
}

/// # Safety
/// `rng` must be NULL or a handle from [`hv_rng_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hv_rng_free(rng: *mut HvRng) {
    if !rng.is_null() {
        drop(Box::from_raw(rng));
    }
}

// ---- vectors ----

/// # Safety
/// `v` must be NULL or a vector handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hv_vector_free(v: *mut HvVector) {
    if !v.is_null() {
        drop(Box::from_raw(v));
    }
}

unsafe fn emit(out: *mut *mut HvVector, v: Hypervector) -> FfiResult<()> {
    write_out(out, Box::into_raw(Box::new(HvVector(v))), "out")
}

/// Uniform random vector: fair signs, or uniform group elements.
///
/// # Safety
/// `rng` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hv_vector_random(
    order: u8,
    dim: usize,
    rng: *mut HvRng,
    out: *mut *mut HvVector,
) -> HvStatus {
    guard(|| {
        let rng = deref_mut(rng, "rng")?;
        let v = Hypervector::random(family(order)?, dim, &mut rng.0)?;
        emit(out, v)
    })
}

/// Binary vector from `len` signs, each -1 or +1.
///
/// # Safety
/// `signs` must point to `len` readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hv_vector_from_signs(
    signs: *const i8,
    len: usize,
    out: *mut *mut HvVector,
) -> HvStatus {
    guard(|| {
        let s = slice(signs, len, "signs")?;
        emit(out, Hypervector::Binary(BinaryHypervector::from_signs(s)?))
    })
}

/// Cyclic vector of order `order` from `len` elements in `0..order`.
///
/// # Safety
/// `elems` must point to `len` readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hv_vector_from_elems(
    order: u8,
    elems: *const u8,
    len: usize,
    out: *mut *mut HvVector,
) -> HvStatus {
    guard(|| {
        let e = slice(elems, len, "elems")?;
        emit(
            out,
            Hypervector::Cyclic(CyclicHypervector::new(order.into(), e.to_vec())?),
        )
    })
}

/// Dimension, or 0 for NULL.
///
/// # Safety
/// `v` must be NULL or a live vector handle.
#[no_mangle]
pub unsafe extern "C" fn hv_vector_dim(v: *const HvVector) -> usize {
    v.as_ref().map_or(0, |v| v.0.dim())
}

/// Order byte (0 = binary), or 0 for NULL.
///
/// # Safety
/// `v` must be NULL or a live vector handle.
#[no_mangle]
pub unsafe extern "C" fn hv_vector_order(v: *const HvVector) -> u8 {
    v.as_ref().map_or(0, |v| v.0.family().order_byte())
}

/// Copies coordinates into `buf`: -1/+1 for binary, elements for cyclic.
/// `len` must equal the dimension.
///
/// # Safety
/// `v` must be a live handle; `buf` must point to `len` writable `int32_t`.
#[no_mangle]
pub unsafe extern "C" fn hv_vector_read(v: *const HvVector, buf: *mut i32, len: usize) -> HvStatus {
    guard(|| {
        let v = deref(v, "vector")?;
        if len != v.0.dim() {
            return Err(Fail(
                HvStatus::DimMismatch,
                format!("buffer holds {len}, vector has {}", v.0.dim()),
            ));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        let out = std::slice::from_raw_parts_mut(buf, len);
        match &v.0 {
            Hypervector::Binary(b) => out
                .iter_mut()
                .enumerate()
                .for_each(|(i, o)| *o = b.get(i).into()),
            Hypervector::Cyclic(c) => out
                .iter_mut()
                .zip(c.elems())
                .for_each(|(o, &e)| *o = e.into()),
        }
        Ok(())
    })
}

/// Similarity in [-1, 1]; cyclic vectors use the default character kernel.
///
/// # Safety
/// `a`, `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hv_similarity(
    a: *const HvVector,
    b: *const HvVector,
    out: *mut f64,
) -> HvStatus {
    guard(|| {
        let (a, b) = (deref(a, "a")?, deref(b, "b")?);
        let spec = a.0.family().default_spec();
        let s = a.0.similarity(&b.0, spec.as_ref())?;
        write_out(out, s, "out")
    })
}

/// # Safety
/// `a`, `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hv_bind(
    a: *const HvVector,
    b: *const HvVector,
    out: *mut *mut HvVector,
) -> HvStatus {
    guard(|| {
        let v = deref(a, "a")?.0.bind(&deref(b, "b")?.0)?;
        emit(out, v)
    })
}

/// Cyclic shift: output coordinate `i` is input coordinate `i - shift` mod D.
///
/// # Safety
/// `v` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hv_permute(
    v: *const HvVector,
    shift: i64,
    out: *mut *mut HvVector,
) -> HvStatus {
    guard(|| {
        let p = deref(v, "vector")?.0.permute(shift);
        emit(out, p)
    })
}

/// Bundles `count` vectors of one family; ties are broken from `rng`.
///
/// # Safety
/// `vs` must point to `count` live handles; `rng` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hv_bundle(
    vs: *const *const HvVector,
    count: usize,
    rng: *mut HvRng,
    out: *mut *mut HvVector,
) -> HvStatus {
    guard(|| {
        let ptrs = slice(vs, count, "vs")?;
        let rng = deref_mut(rng, "rng")?;
        let items: Vec<&Hypervector> = ptrs
            .iter()
            .map(|&p| deref(p, "vs[i]").map(|v| &v.0))
            .collect::<FfiResult<_>>()?;
        let first = items
            .first()
            .ok_or_else(|| Fail(HvStatus::Empty, "bundle of zero hypervectors".into()))?;
        let v = match first.family() {
            Family::Binary => {
                let bs: Vec<BinaryHypervector> = items
                    .iter()
                    .map(|v| {
                        v.as_binary()
                            .cloned()
                            .ok_or_else(|| invalid("mixed families in bundle"))
                    })
                    .collect::<FfiResult<_>>()?;
                Hypervector::Binary(bundle_binary(&bs, &mut rng.0)?)
            }
            f @ Family::Cyclic(_) => {
                let cs: Vec<CyclicHypervector> = items
                    .iter()
                    .map(|v| {
                        v.as_cyclic()
                            .cloned()
                            .ok_or_else(|| invalid("mixed families in bundle"))
                    })
                    .collect::<FfiResult<_>>()?;
                let spec = f.default_spec().expect("cyclic family");
                Hypervector::Cyclic(bundle_cyclic(&cs, &spec, &mut rng.0)?)
            }
        };
        emit(out, v)
    })
}

/// Serializes to the canonical record format. Call with `buf = NULL` to get
/// the size in `len`; otherwise `*len` is the capacity on entry and the
/// written size on return.
///
/// # Safety
/// `v` must be live; `len` writable; `buf` NULL or `*len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn hv_vector_serialize(
    v: *const HvVector,
    buf: *mut u8,
    len: *mut usize,
) -> HvStatus {
    guard(|| {
        let bytes = record::to_bytes(&deref(v, "vector")?.0);
        let cap = deref_mut(len, "len")?;
        if !buf.is_null() {
            if *cap < bytes.len() {
                return Err(invalid(format!(
                    "buffer holds {cap} bytes, need {}",
                    bytes.len()
                )));
            }
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf, bytes.len());
        }
        *cap = bytes.len();
        Ok(())
    })
}

/// # Safety
/// `buf` must point to `len` readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hv_vector_deserialize(
    buf: *const u8,
    len: usize,
    out: *mut *mut HvVector,
) -> HvStatus {
    guard(|| {
        let v = record::from_bytes(slice(buf, len, "buf")?)?;
        emit(out, v)
    })
}

// ---- bases and encoding ----

/// # Safety
/// `b` must be NULL or a basis handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hv_basis_free(b: *mut HvBasis) {
    if !b.is_null() {
        drop(Box::from_raw(b));
    }
}

/// Samples `n` correlated vectors whose expected similarities approach the
/// row-major `n x n` target matrix.
///
/// # Safety
/// `target` must point to `n * n` doubles; `rng` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hv_basis_sample(
    target: *const f64,
    n: usize,
    order: u8,
    dim: usize,
    rng: *mut HvRng,
    out: *mut *mut HvBasis,
) -> HvStatus {
    guard(|| {
        let m = slice(
            target,
            n.checked_mul(n).ok_or_else(|| invalid("n too large"))?,
            "target",
        )?;
        let rng = deref_mut(rng, "rng")?;
        let t = SimilarityTarget::new(SquareMatrix::from_fn(n, |i, j| m[i * n + j]))?;
        let basis = sample_correlated(&t, family(order)?, dim, &mut rng.0)?;
        write_out(out, Box::into_raw(Box::new(HvBasis(basis))), "out")
    })
}

/// # Safety
/// `path` must be a NUL-terminated UTF-8 string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hv_basis_load(path: *const c_char, out: *mut *mut HvBasis) -> HvStatus {
    guard(|| {
        let b = CorrelatedBasis::load(path_arg(path)?)?;
        write_out(out, Box::into_raw(Box::new(HvBasis(b))), "out")
    })
}

/// # Safety
/// `b` must be live; `path` a NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn hv_basis_save(b: *const HvBasis, path: *const c_char) -> HvStatus {
    guard(|| Ok(deref(b, "basis")?.0.save(path_arg(path)?)?))
}

/// Number of vectors, or 0 for NULL.
///
/// # Safety
/// `b` must be NULL or live.
#[no_mangle]
pub unsafe extern "C" fn hv_basis_len(b: *const HvBasis) -> usize {
    b.as_ref().map_or(0, |b| b.0.len())
}

/// Copy of vector `i`.
///
/// # Safety
/// `b` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hv_basis_get(
    b: *const HvBasis,
    i: usize,
    out: *mut *mut HvVector,
) -> HvStatus {
    guard(|| {
        let b = deref(b, "basis")?;
        let v = b
            .0
            .get(i)
            .ok_or_else(|| invalid(format!("index {i} out of range for {} vectors", b.0.len())))?;
        emit(out, v.clone())
    })
}

/// Encodes quantized feature indices: feature `j` looks up basis vector
/// `indices[j]`, shifted by `j`, and all features are bound together.
///
/// # Safety
/// `b` must be live; `indices` must point to `n` bytes; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hv_encode(
    b: *const HvBasis,
    indices: *const u8,
    n: usize,
    out: *mut *mut HvVector,
) -> HvStatus {
    guard(|| {
        let b = deref(b, "basis")?;
        let p = slice(indices, n, "indices")?;
        let enc = Encoder::new(b.0.clone(), n)?;
        emit(out, enc.encode(p)?)
    })
}

// ---- models ----

/// # Safety
/// `path` must be a NUL-terminated UTF-8 string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hv_model_load(path: *const c_char, out: *mut *mut HvModel) -> HvStatus {
    guard(|| {
        let m = Model::load(path_arg(path)?)?;
        write_out(out, Box::into_raw(Box::new(HvModel(m))), "out")
    })
}

/// # Safety
/// `m` must be NULL or a model handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hv_model_free(m: *mut HvModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Number of classes, or 0 for NULL.
///
/// # Safety
/// `m` must be NULL or live.
#[no_mangle]
pub unsafe extern "C" fn hv_model_classes(m: *const HvModel) -> usize {
    m.as_ref().map_or(0, |m| m.0.classes())
}

/// # Safety
/// `m`, `v` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hv_model_predict(
    m: *const HvModel,
    v: *const HvVector,
    out: *mut usize,
) -> HvStatus {
    guard(|| {
        let c = deref(m, "model")?.0.predict(&deref(v, "vector")?.0)?;
        write_out(out, c, "out")
    })
}

// ---- analysis ----

/// Whether the row-major `n x n` similarity matrix lies within `eps` of a
/// mixture of binary sign patterns (`n` in 2..=12).
///
/// # Safety
/// `m` must point to `n * n` doubles; `feasible` and `residual` writable
/// (`residual` may be NULL).
#[no_mangle]
pub unsafe extern "C" fn hv_check_expressible(
    m: *const f64,
    n: usize,
    eps: f64,
    feasible: *mut bool,
    residual: *mut f64,
) -> HvStatus {
    guard(|| {
        let vals = slice(
            m,
            n.checked_mul(n).ok_or_else(|| invalid("n too large"))?,
            "m",
        )?;
        let t = SimilarityTarget::new(SquareMatrix::from_fn(n, |i, j| vals[i * n + j]))?;
        let r = check_binary_expressible(&t, eps)?;
        write_out(feasible, r.feasible, "feasible")?;
        if !residual.is_null() {
            residual.write(r.residual);
        }
        Ok(())
    })
}

/// Expected angle in degrees between a bundle of `2k + 1` random binary
/// vectors and one of its members.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hv_bundling_angle(k: i64, out: *mut f64) -> HvStatus {
    guard(|| write_out(out, bundling_angle_theory(k)?, "out"))
}

/// Circuit depth of inference for `n_features` inputs at dimension `dim`;
/// the group entry is G(2^`n_bits`).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hv_cdc(
    n_features: u64,
    dim: u64,
    n_bits: u32,
    out: *mut HvCdcReport,
) -> HvStatus {
    guard(|| {
        let q = CdcQuery::new(n_features, dim, n_bits)?;
        let d = |r: hypervsa::analysis::CdcReport| HvCdcDepth {
            depth: r.depth_real,
            rounded: r.depth_rounded,
        };
        let rep = HvCdcReport {
            binary_hdc: d(cdc_binary_hdc(&q)),
            group: d(cdc_group(&q)),
            perceptron: d(cdc_perceptron(&q)),
        };
        write_out(out, rep, "out")
    })
}
