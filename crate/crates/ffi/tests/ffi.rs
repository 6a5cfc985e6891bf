use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use hypervsa_ffi::*;

fn last_error() -> String {
    let p = hv_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn random(order: u8, dim: usize, rng: *mut HvRng) -> *mut HvVector {
    let mut v = ptr::null_mut();
    assert_eq!(
        unsafe { hv_vector_random(order, dim, rng, &mut v) },
        HvStatus::Ok
    );
    v
}

fn sim(a: *const HvVector, b: *const HvVector) -> f64 {
    let mut s = f64::NAN;
    assert_eq!(unsafe { hv_similarity(a, b, &mut s) }, HvStatus::Ok);
    s
}

#[test]
fn bind_permute_and_similarity() {
    let rng = hv_rng_new(1, 0);
    for order in [0u8, 2, 5, 16] {
        let a = random(order, 999, rng);
        let b = random(order, 999, rng);
        unsafe {
            assert_eq!(hv_vector_dim(a), 999);
            assert_eq!(hv_vector_order(a), order);
            let (mut ab, mut pa, mut pb, mut pab) = (
                ptr::null_mut(),
                ptr::null_mut(),
                ptr::null_mut(),
                ptr::null_mut(),
            );
            assert_eq!(hv_bind(a, b, &mut ab), HvStatus::Ok);
            assert_eq!(hv_permute(a, 17, &mut pa), HvStatus::Ok);
            assert_eq!(hv_permute(b, 17, &mut pb), HvStatus::Ok);
            assert_eq!(hv_bind(pa, pb, &mut pab), HvStatus::Ok);
            // Shifting and binding preserve similarity exactly.
            assert_eq!(sim(pa, pb), sim(a, b));
            assert_eq!(sim(ab, a), sim(pab, pa));
            assert_eq!(sim(a, a), 1.0);
            for v in [a, b, ab, pa, pb, pab] {
                hv_vector_free(v);
            }
        }
    }
    unsafe { hv_rng_free(rng) };
}

#[test]
fn read_and_construct_round_trip() {
    unsafe {
        let signs: Vec<i8> = (0..70).map(|i| if i % 3 == 0 { -1 } else { 1 }).collect();
        let mut v = ptr::null_mut();
        assert_eq!(
            hv_vector_from_signs(signs.as_ptr(), signs.len(), &mut v),
            HvStatus::Ok
        );
        let mut buf = vec![0i32; 70];
        assert_eq!(hv_vector_read(v, buf.as_mut_ptr(), 70), HvStatus::Ok);
        assert!(buf.iter().zip(&signs).all(|(&a, &b)| a == i32::from(b)));
        assert_eq!(
            hv_vector_read(v, buf.as_mut_ptr(), 69),
            HvStatus::DimMismatch
        );

        let mut len = 0usize;
        assert_eq!(
            hv_vector_serialize(v, ptr::null_mut(), &mut len),
            HvStatus::Ok
        );
        let mut bytes = vec![0u8; len];
        assert_eq!(
            hv_vector_serialize(v, bytes.as_mut_ptr(), &mut len),
            HvStatus::Ok
        );
        let mut w = ptr::null_mut();
        assert_eq!(
            hv_vector_deserialize(bytes.as_ptr(), len, &mut w),
            HvStatus::Ok
        );
        assert_eq!(sim(v, w), 1.0);
        let mut short = len - 1;
        assert_eq!(
            hv_vector_serialize(v, bytes.as_mut_ptr(), &mut short),
            HvStatus::InvalidArgument
        );
        hv_vector_free(v);
        hv_vector_free(w);

        let elems = [0u8, 1, 2, 3, 4];
        let mut c = ptr::null_mut();
        assert_eq!(
            hv_vector_from_elems(5, elems.as_ptr(), 5, &mut c),
            HvStatus::Ok
        );
        let mut out = [0i32; 5];
        assert_eq!(hv_vector_read(c, out.as_mut_ptr(), 5), HvStatus::Ok);
        assert_eq!(out, [0, 1, 2, 3, 4]);
        hv_vector_free(c);
        let mut bad = ptr::null_mut();
        assert_eq!(
            hv_vector_from_elems(4, elems.as_ptr(), 5, &mut bad),
            HvStatus::InvalidArgument
        );
        assert!(bad.is_null());
    }
}

#[test]
fn errors_set_codes_and_messages() {
    unsafe {
        let rng = hv_rng_new(3, 0);
        let a = random(0, 64, rng);
        let b = random(0, 65, rng);
        let g = random(7, 64, rng);
        let mut s = 0.0;
        assert_eq!(hv_similarity(a, b, &mut s), HvStatus::DimMismatch);
        assert!(last_error().contains("dimension"));
        let mut out = ptr::null_mut();
        assert_eq!(hv_bind(a, g, &mut out), HvStatus::InvalidArgument);
        assert_eq!(hv_similarity(ptr::null(), a, &mut s), HvStatus::NullPointer);
        assert_eq!(hv_similarity(a, a, ptr::null_mut()), HvStatus::NullPointer);
        assert_eq!(
            hv_vector_random(1, 64, rng, &mut out),
            HvStatus::InvalidArgument
        );
        assert_eq!(
            hv_vector_random(0, 64, ptr::null_mut(), &mut out),
            HvStatus::NullPointer
        );
        assert_eq!(hv_bundle(ptr::null(), 0, rng, &mut out), HvStatus::Empty);
        let mixed = [a as *const HvVector, g as *const HvVector];
        assert_eq!(
            hv_bundle(mixed.as_ptr(), 2, rng, &mut out),
            HvStatus::InvalidArgument
        );
        assert_eq!(hv_bundling_angle(-1, &mut s), HvStatus::InvalidArgument);
        assert_eq!(hv_vector_dim(ptr::null()), 0);
        hv_vector_free(ptr::null_mut());
        for v in [a, b, g] {
            hv_vector_free(v);
        }
        hv_rng_free(rng);
    }
}

#[test]
fn bundle_matches_members() {
    unsafe {
        let rng = hv_rng_new(4, 0);
        let vs: Vec<*mut HvVector> = (0..3).map(|_| random(0, 20000, rng)).collect();
        let ptrs: Vec<*const HvVector> = vs.iter().map(|&v| v as *const _).collect();
        let mut b = ptr::null_mut();
        assert_eq!(hv_bundle(ptrs.as_ptr(), 3, rng, &mut b), HvStatus::Ok);
        for &v in &vs {
            assert!((sim(b, v) - 0.5).abs() < 0.03);
        }
        let one = [ptrs[0]];
        let mut single = ptr::null_mut();
        assert_eq!(hv_bundle(one.as_ptr(), 1, rng, &mut single), HvStatus::Ok);
        assert_eq!(sim(single, vs[0]), 1.0);
        hv_vector_free(single);
        hv_vector_free(b);
        vs.into_iter().for_each(|v| hv_vector_free(v));
        hv_rng_free(rng);
    }
}

#[test]
fn analysis_entry_points() {
    unsafe {
        let mut r = HvCdcReport::default();
        assert_eq!(hv_cdc(784, 10000, 3, &mut r), HvStatus::Ok);
        assert_eq!(
            (r.binary_hdc.rounded, r.group.rounded, r.perceptron.rounded),
            (295, 405, 1299)
        );
        assert_eq!(hv_cdc(1, 10, 3, &mut r), HvStatus::InvalidArgument);

        let mut deg = 0.0;
        assert_eq!(hv_bundling_angle(1, &mut deg), HvStatus::Ok);
        assert!((deg - 60.0).abs() < 1e-12);

        let t = -1.0 / 3.0;
        let m = [1.0, t, t, t, 1.0, t, t, t, 1.0];
        let (mut feasible, mut residual) = (false, 1.0);
        assert_eq!(
            hv_check_expressible(m.as_ptr(), 3, 1e-9, &mut feasible, &mut residual),
            HvStatus::Ok
        );
        assert!(feasible && residual <= 1e-9 + 1e-12);
        let h = -0.6;
        let m = [1.0, h, h, h, 1.0, h, h, h, 1.0];
        assert_eq!(
            hv_check_expressible(m.as_ptr(), 3, 1e-9, &mut feasible, ptr::null_mut()),
            HvStatus::Ok
        );
        assert!(!feasible);
    }
}

#[test]
fn basis_sampling_encoding_and_files() {
    unsafe {
        let rng = hv_rng_new(5, 0);
        let n = 3;
        let t = -1.0 / 3.0;
        let m = [1.0, t, t, t, 1.0, t, t, t, 1.0];
        let mut basis = ptr::null_mut();
        assert_eq!(
            hv_basis_sample(m.as_ptr(), n, 0, 50000, rng, &mut basis),
            HvStatus::Ok
        );
        assert_eq!(hv_basis_len(basis), 3);
        let mut v0 = ptr::null_mut();
        let mut v1 = ptr::null_mut();
        assert_eq!(hv_basis_get(basis, 0, &mut v0), HvStatus::Ok);
        assert_eq!(hv_basis_get(basis, 1, &mut v1), HvStatus::Ok);
        assert!((sim(v0, v1) - t).abs() < 0.02);
        let mut none = ptr::null_mut();
        assert_eq!(hv_basis_get(basis, 3, &mut none), HvStatus::InvalidArgument);

        // One feature: the encoding is the basis vector itself.
        let idx = [1u8];
        let mut e = ptr::null_mut();
        assert_eq!(hv_encode(basis, idx.as_ptr(), 1, &mut e), HvStatus::Ok);
        assert_eq!(sim(e, v1), 1.0);
        let bad = [3u8];
        assert_eq!(
            hv_encode(basis, bad.as_ptr(), 1, &mut none),
            HvStatus::InvalidArgument
        );

        let dir = tempfile::tempdir().unwrap();
        let path = CString::new(dir.path().join("b.basis").to_str().unwrap()).unwrap();
        assert_eq!(hv_basis_save(basis, path.as_ptr()), HvStatus::Ok);
        let mut loaded = ptr::null_mut();
        assert_eq!(hv_basis_load(path.as_ptr(), &mut loaded), HvStatus::Ok);
        let mut l1 = ptr::null_mut();
        assert_eq!(hv_basis_get(loaded, 1, &mut l1), HvStatus::Ok);
        assert_eq!(sim(l1, v1), 1.0);
        let missing = CString::new(dir.path().join("nope").to_str().unwrap()).unwrap();
        let mut nob = ptr::null_mut();
        assert_eq!(hv_basis_load(missing.as_ptr(), &mut nob), HvStatus::Io);
        let mut model = ptr::null_mut();
        assert_eq!(hv_model_load(path.as_ptr(), &mut model), HvStatus::Format);

        for v in [v0, v1, e, l1] {
            hv_vector_free(v);
        }
        hv_basis_free(basis);
        hv_basis_free(loaded);
        hv_rng_free(rng);
    }
}

#[test]
fn model_predicts_through_the_handle() {
    use hypervsa::learn::{Model, PrototypeModel};
    use hypervsa::rng::SeededRng;
    use hypervsa::vsa::{BinaryHypervector, Hypervector};

    let mut r = SeededRng::new(9);
    let protos: Vec<Hypervector> = (0..4)
        .map(|_| Hypervector::Binary(BinaryHypervector::random(512, 0.5, &mut r).unwrap()))
        .collect();
    let model = Model::Prototypes(PrototypeModel::new(protos.clone(), None, 9).unwrap());
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m.vsa");
    model.save(&p).unwrap();
    let path = CString::new(p.to_str().unwrap()).unwrap();
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(hv_model_load(path.as_ptr(), &mut m), HvStatus::Ok);
        assert_eq!(hv_model_classes(m), 4);
        for (c, proto) in protos.iter().enumerate() {
            let bytes = hypervsa::vsa::record::to_bytes(proto);
            let mut v = ptr::null_mut();
            assert_eq!(
                hv_vector_deserialize(bytes.as_ptr(), bytes.len(), &mut v),
                HvStatus::Ok
            );
            let mut pred = usize::MAX;
            assert_eq!(hv_model_predict(m, v, &mut pred), HvStatus::Ok);
            assert_eq!(pred, c);
            hv_vector_free(v);
        }
        hv_model_free(m);
    }
}

/// `target/<profile>` of the running test binary.
fn profile_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_compiles_and_runs_against_the_header() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("note: no C compiler ({cc}) found; C smoke test not run");
        return;
    }
    let lib = profile_dir().join("libhypervsa_ffi.a");
    assert!(
        lib.exists(),
        "static library not built at {}",
        lib.display()
    );
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(root.join("include"))
        .arg(root.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(
        out.status.success(),
        "smoke program failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
