use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use forbidden_degree::analytic::{compute_pi, threshold_lhs};
use forbidden_degree_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(fd_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn analytic_calls_match_the_library() {
    let mut pi = 0.0;
    assert_eq!(fd_compute_pi(2.0, 5, &mut pi), FD_OK);
    assert_eq!(pi, compute_pi(2.0, 5).unwrap());
    let mut lhs = 0.0;
    assert_eq!(fd_threshold_lhs(2.0, 5, &mut lhs), FD_OK);
    assert_eq!(lhs, threshold_lhs(2.0, 5).unwrap());

    let (mut found, mut lo, mut hi) = (0, 0.0, 0.0);
    assert_eq!(fd_supercritical_interval(5, 8.0, &mut found, &mut lo, &mut hi), FD_OK);
    assert_eq!(found, 1);
    assert!(lo > 1.0 && lo < 1.2 && hi > 3.8 && hi < 3.9, "{lo} {hi}");
    assert_eq!(fd_supercritical_interval(4, 8.0, &mut found, &mut lo, &mut hi), FD_OK);
    assert_eq!(found, 0);
}

#[test]
fn errors_set_codes_and_messages() {
    let mut v = 0.0;
    assert_eq!(fd_compute_pi(-1.0, 5, &mut v), FD_ERR_INVALID_ARGUMENT);
    assert!(!last_error().is_empty());
    assert_eq!(fd_compute_pi(1.0, 5, ptr::null_mut()), FD_ERR_NULL);
    assert!(last_error().contains("out_pi"));
    let mut g = ptr::null_mut();
    assert_eq!(fd_graph_simulate(10, 1, 1.0, 1, 0, &mut g), FD_ERR_INVALID_ARGUMENT);
    assert!(g.is_null());
    assert_eq!(fd_graph_c_max(ptr::null(), ptr::null_mut()), FD_ERR_NULL);
    let bad = CString::new("experiment = \"simulate\"\nbogus = 1\n").unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(fd_run_config(bad.as_ptr(), &mut s), FD_ERR_CONFIG);
    assert!(s.is_null());
    let missing = CString::new("/nonexistent/dir/kernel.json").unwrap();
    let mut k = ptr::null_mut();
    assert_eq!(fd_kernel_load(missing.as_ptr(), &mut k), FD_ERR_IO);
    // freeing null is a no-op
    fd_graph_free(ptr::null_mut());
    fd_kernel_free(ptr::null_mut());
    fd_string_free(ptr::null_mut());
}

#[test]
fn graph_handle() {
    let mut g = ptr::null_mut();
    assert_eq!(fd_graph_simulate(500, 3, 2.0, 9, 0, &mut g), FD_OK);
    let (mut nv, mut ne) = (0, 0);
    assert_eq!(fd_graph_counts(g, &mut nv, &mut ne), FD_OK);
    assert_eq!(nv, 500);
    assert!(ne > 0);
    let mut deg = vec![0u32; nv];
    for i in 0..ne {
        let (mut u, mut w, mut l) = (0, 0, 0.0);
        assert_eq!(fd_graph_edge(g, i, &mut u, &mut w, &mut l), FD_OK);
        assert!(l.is_nan() || (0.0..=2.0).contains(&l));
        deg[u as usize] += 1;
        deg[w as usize] += 1;
    }
    assert!(deg.iter().all(|&d| d < 3));
    let (mut u, mut w, mut l) = (0, 0, 0.0);
    assert_eq!(fd_graph_edge(g, ne, &mut u, &mut w, &mut l), FD_ERR_INVALID_ARGUMENT);
    let mut c = 0;
    assert_eq!(fd_graph_c_max(g, &mut c), FD_OK);
    assert!(c >= 1 && c <= nv);

    let mut g2 = ptr::null_mut();
    assert_eq!(fd_graph_simulate(500, 3, 2.0, 9, 0, &mut g2), FD_OK);
    let mut c2 = 0;
    fd_graph_c_max(g2, &mut c2);
    assert_eq!(c, c2);
    fd_graph_free(g);
    fd_graph_free(g2);
}

#[test]
fn survival_and_kernel_handles() {
    let (mut a, mut se) = (0.0, 0.0);
    assert_eq!(fd_estimate_survival(0.5, 5, 400, 20, 500, 3, &mut a, &mut se), FD_OK);
    assert!(a < 0.05, "{a}");

    let mut k = ptr::null_mut();
    assert_eq!(fd_kernel_build(2.0, 5, 8, 200, 4, &mut k), FD_OK);
    let mut bins = 0;
    assert_eq!(fd_kernel_bins(k, &mut bins), FD_OK);
    assert_eq!(bins, 8);
    let ones = vec![1.0; bins];
    let mut out = vec![0.0; bins];
    assert_eq!(fd_kernel_phi(k, ones.as_ptr(), out.as_mut_ptr()), FD_OK);
    // total mass per bin, up to sampling error
    assert!(out.iter().all(|v| (0.85..=1.0).contains(v)), "{out:?}");
    let mut rho = 0.0;
    assert_eq!(fd_kernel_spectral_radius(k, &mut rho), FD_OK);
    assert!(rho > 1.0, "{rho}");
    let (mut q, mut rho2, mut conv) = (0.0, 0.0, 0);
    assert_eq!(fd_kernel_solve(k, 1e-10, &mut q, &mut rho2, &mut conv), FD_OK);
    assert!(q > 0.0 && q < 1.0, "{q}");

    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("k.json").to_str().unwrap()).unwrap();
    assert_eq!(fd_kernel_save(k, path.as_ptr()), FD_OK);
    let mut back = ptr::null_mut();
    assert_eq!(fd_kernel_load(path.as_ptr(), &mut back), FD_OK);
    let mut rho3 = 0.0;
    fd_kernel_spectral_radius(back, &mut rho3);
    assert_eq!(rho, rho3);
    fd_kernel_free(k);
    fd_kernel_free(back);
}

#[test]
fn run_config_returns_a_record() {
    let cfg = CString::new("experiment = \"simulate\"\nn = 200\nk = 3\nt = 1.0\nreplicas = 3\nseed = 5\n").unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(fd_run_config(cfg.as_ptr(), &mut s), FD_OK, "{}", last_error());
    let body = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    fd_string_free(s);
    assert!(body.starts_with("# schema=1\n"));
    assert!(body.contains("# experiment=simulate"));

    let json = CString::new(r#"{"experiment":"simulate","n":200,"k":3,"t":1.0,"replicas":3,"seed":5}"#).unwrap();
    let mut s2 = ptr::null_mut();
    assert_eq!(fd_run_config(json.as_ptr(), &mut s2), FD_OK, "{}", last_error());
    let body2 = unsafe { CStr::from_ptr(s2) }.to_str().unwrap().to_owned();
    fd_string_free(s2);
    assert_eq!(body, body2);
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(fd_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/forbidden_degree.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["fd_last_error", "fd_graph_simulate", "fd_kernel_solve", "fd_run_config", "FD_ERR_PANIC"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"forbidden_degree.h\"\nint main(void) { double p; FdGraph *g = 0; \
         (void)g; return fd_compute_pi(1.0, 5, &p) == FD_OK ? 0 : 1; }\n",
    )
    .unwrap();
    let inc = header.parent().unwrap();
    for (cc, extra) in [("cc", vec!["-std=c99"]), ("c++", vec!["-x", "c++"])] {
        let Ok(out) = Command::new(cc)
            .args(&extra)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-I"])
            .arg(inc)
            .arg(&src)
            .output()
        else {
            eprintln!("{cc} not found; skipping");
            continue;
        };
        assert!(out.status.success(), "{cc}: {}", String::from_utf8_lossy(&out.stderr));
    }
}
