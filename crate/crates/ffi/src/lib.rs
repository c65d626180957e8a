//! C ABI over `forbidden_degree`.
//!
//! Every fallible call returns an `int` status (`FD_OK` on success) and
//! writes results through out-pointers. On failure the message is available
//! from `fd_last_error` on the same thread until the next failing call.
//! Objects cross the boundary as opaque handles that the caller frees with
//! the matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use forbidden_degree::analytic::{compute_pi, supercritical_interval, threshold_lhs};
use forbidden_degree::branching::{
    estimate_kernel, estimate_spectral_radius, solve_extinction, KernelOptions, OffspringKernel, SolveOptions,
    SolveStatus,
};
use forbidden_degree::graph::sample_event_stream;
use forbidden_degree::harness::{run, ExperimentConfig};
use forbidden_degree::local::estimate_survival;
use forbidden_degree::process::{components, run_stream};
use forbidden_degree::{Error, ForbiddenDegree, LabeledMultigraph, RngStream};

pub const FD_OK: i32 = 0;
pub const FD_ERR_INVALID_ARGUMENT: i32 = 1;
pub const FD_ERR_NUMERIC: i32 = 2;
pub const FD_ERR_IO: i32 = 3;
pub const FD_ERR_CONFIG: i32 = 4;
pub const FD_ERR_RETRY_EXHAUSTED: i32 = 5;
pub const FD_ERR_NULL: i32 = 6;
pub const FD_ERR_PANIC: i32 = 7;

/// A graph of the process at the end of a run.
pub struct FdGraph(LabeledMultigraph);

/// A discretised offspring kernel.
pub struct FdKernel(OffspringKernel);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) => FD_ERR_INVALID_ARGUMENT,
        Error::NumericFailure(_) => FD_ERR_NUMERIC,
        Error::Io { .. } => FD_ERR_IO,
        Error::Config(_) => FD_ERR_CONFIG,
        Error::RetryExhausted { .. } => FD_ERR_RETRY_EXHAUSTED,
        Error::Replica { source, .. } => code(source),
    }
}

enum Fail {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FD_OK,
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            code(&e)
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            FD_ERR_NULL
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            FD_ERR_PANIC
        }
    }
}

fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    // SAFETY: the caller passes either null or a valid, writable pointer.
    unsafe { p.as_mut() }.ok_or(Fail::Null(what))
}

fn get<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    // SAFETY: the caller passes either null or a live handle from this library.
    unsafe { p.as_ref() }.ok_or(Fail::Null(what))
}

fn text<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    // SAFETY: non-null and NUL-terminated per the API contract.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| Fail::Lib(Error::InvalidArgument(format!("{what} is not UTF-8"))))
}

/// `0` stands for no forbidden degree.
fn degree(k: u32) -> Result<ForbiddenDegree, Error> {
    if k == 0 {
        Ok(ForbiddenDegree::Unbounded)
    } else {
        ForbiddenDegree::finite(k)
    }
}

/// Message of the last failure on this thread; empty if none. The pointer
/// stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn fd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

#[no_mangle]
pub extern "C" fn fd_compute_pi(t: f64, k: u32, out_pi: *mut f64) -> i32 {
    guard(|| {
        *out(out_pi, "out_pi")? = compute_pi(t, k)?;
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn fd_threshold_lhs(t: f64, k: u32, out_value: *mut f64) -> i32 {
    guard(|| {
        *out(out_value, "out_value")? = threshold_lhs(t, k)?;
        Ok(())
    })
}

/// Sets `*out_found` to 1 and fills the interval if `threshold_lhs(., k)`
/// exceeds 1 somewhere on `[0, t_max]`, else sets it to 0.
#[no_mangle]
pub extern "C" fn fd_supercritical_interval(
    k: u32,
    t_max: f64,
    out_found: *mut i32,
    out_lo: *mut f64,
    out_hi: *mut f64,
) -> i32 {
    guard(|| {
        let found = out(out_found, "out_found")?;
        let lo = out(out_lo, "out_lo")?;
        let hi = out(out_hi, "out_hi")?;
        match supercritical_interval(k, t_max)? {
            Some((a, b)) => {
                *found = 1;
                *lo = a;
                *hi = b;
            }
            None => *found = 0,
        }
        Ok(())
    })
}

/// Simulates `G^k_{n,t}` from stream `(seed, stream)`. `k = 0` means no
/// forbidden degree.
#[no_mangle]
pub extern "C" fn fd_graph_simulate(
    n: usize,
    k: u32,
    t: f64,
    seed: u64,
    stream: u64,
    out_graph: *mut *mut FdGraph,
) -> i32 {
    guard(|| {
        let slot = out(out_graph, "out_graph")?;
        let kf = degree(k)?;
        let events = sample_event_stream(n, t, &mut RngStream::new(seed, stream).rng())?;
        let g = run_stream(&events, kf, t)?.graph;
        *slot = Box::into_raw(Box::new(FdGraph(g)));
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn fd_graph_free(graph: *mut FdGraph) {
    if !graph.is_null() {
        // SAFETY: produced by Box::into_raw in this library and freed once.
        drop(unsafe { Box::from_raw(graph) });
    }
}

#[no_mangle]
pub extern "C" fn fd_graph_counts(graph: *const FdGraph, out_vertices: *mut usize, out_edges: *mut usize) -> i32 {
    guard(|| {
        let g = &get(graph, "graph")?.0;
        *out(out_vertices, "out_vertices")? = g.n();
        *out(out_edges, "out_edges")? = g.edge_count();
        Ok(())
    })
}

/// Endpoints and label of edge record `index`.
#[no_mangle]
pub extern "C" fn fd_graph_edge(
    graph: *const FdGraph,
    index: usize,
    out_u: *mut u32,
    out_v: *mut u32,
    out_label: *mut f64,
) -> i32 {
    guard(|| {
        let g = &get(graph, "graph")?.0;
        let e = g
            .edges()
            .get(index)
            .ok_or_else(|| Error::InvalidArgument(format!("edge {index} out of range ({})", g.edge_count())))?;
        *out(out_u, "out_u")? = e.u;
        *out(out_v, "out_v")? = e.v;
        *out(out_label, "out_label")? = e.label.unwrap_or(f64::NAN);
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn fd_graph_c_max(graph: *const FdGraph, out_c_max: *mut usize) -> i32 {
    guard(|| {
        let g = &get(graph, "graph")?.0;
        *out(out_c_max, "out_c_max")? = components(g).c_max();
        Ok(())
    })
}

/// Monte Carlo survival probability of `T^k_t` with generation cap
/// `gen_cap` and component cap `comp_cap`.
#[no_mangle]
pub extern "C" fn fd_estimate_survival(
    t: f64,
    k: u32,
    replicas: u64,
    gen_cap: u32,
    comp_cap: usize,
    seed: u64,
    out_a_hat: *mut f64,
    out_se: *mut f64,
) -> i32 {
    guard(|| {
        let a = out(out_a_hat, "out_a_hat")?;
        let s = out(out_se, "out_se")?;
        let est = estimate_survival(t, degree(k)?, replicas, gen_cap, comp_cap, RngStream::new(seed, 0))?;
        *a = est.a_hat;
        *s = est.se;
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn fd_kernel_build(
    t: f64,
    k: u32,
    bins: usize,
    samples_per_cell: usize,
    seed: u64,
    out_kernel: *mut *mut FdKernel,
) -> i32 {
    guard(|| {
        let slot = out(out_kernel, "out_kernel")?;
        let opts = KernelOptions {
            bins,
            samples_per_cell,
            m_samples: 20 * samples_per_cell,
            seed,
            ..KernelOptions::default()
        };
        let kern = estimate_kernel(t, degree(k)?, &opts)?;
        *slot = Box::into_raw(Box::new(FdKernel(kern)));
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn fd_kernel_free(kernel: *mut FdKernel) {
    if !kernel.is_null() {
        // SAFETY: produced by Box::into_raw in this library and freed once.
        drop(unsafe { Box::from_raw(kernel) });
    }
}

#[no_mangle]
pub extern "C" fn fd_kernel_bins(kernel: *const FdKernel, out_bins: *mut usize) -> i32 {
    guard(|| {
        *out(out_bins, "out_bins")? = get(kernel, "kernel")?.0.bins;
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn fd_kernel_spectral_radius(kernel: *const FdKernel, out_rho: *mut f64) -> i32 {
    guard(|| {
        let kern = &get(kernel, "kernel")?.0;
        *out(out_rho, "out_rho")? = estimate_spectral_radius(kern)?;
        Ok(())
    })
}

/// Applies the generating operator to `f` (length `bins`), writing `bins`
/// values to `out_values`.
#[no_mangle]
pub extern "C" fn fd_kernel_phi(kernel: *const FdKernel, f: *const f64, out_values: *mut f64) -> i32 {
    guard(|| {
        let kern = &get(kernel, "kernel")?.0;
        if f.is_null() {
            return Err(Fail::Null("f"));
        }
        if out_values.is_null() {
            return Err(Fail::Null("out_values"));
        }
        // SAFETY: both arrays hold `bins` doubles per the API contract.
        let input = unsafe { std::slice::from_raw_parts(f, kern.bins) };
        let res = kern.phi_apply(input);
        // SAFETY: as above.
        unsafe { std::slice::from_raw_parts_mut(out_values, kern.bins) }.copy_from_slice(&res);
        Ok(())
    })
}

/// Extinction fixed point: writes the two-stage extinction probability,
/// the spectral radius, and `1` to `*out_converged` if both brackets agreed.
#[no_mangle]
pub extern "C" fn fd_kernel_solve(
    kernel: *const FdKernel,
    tol: f64,
    out_q_twostage: *mut f64,
    out_rho: *mut f64,
    out_converged: *mut i32,
) -> i32 {
    guard(|| {
        let kern = &get(kernel, "kernel")?.0;
        let q = out(out_q_twostage, "out_q_twostage")?;
        let rho = out(out_rho, "out_rho")?;
        let conv = out(out_converged, "out_converged")?;
        let s = solve_extinction(kern, &SolveOptions { tol, ..SolveOptions::default() })?;
        *q = s.q_twostage;
        *rho = s.rho_hat;
        *conv = (s.status == SolveStatus::Converged) as i32;
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn fd_kernel_save(kernel: *const FdKernel, path: *const c_char) -> i32 {
    guard(|| {
        let kern = &get(kernel, "kernel")?.0;
        kern.save_json(Path::new(text(path, "path")?))?;
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn fd_kernel_load(path: *const c_char, out_kernel: *mut *mut FdKernel) -> i32 {
    guard(|| {
        let slot = out(out_kernel, "out_kernel")?;
        let kern = OffspringKernel::load_json(Path::new(text(path, "path")?), None)?;
        *slot = Box::into_raw(Box::new(FdKernel(kern)));
        Ok(())
    })
}

/// Runs an experiment described by a TOML (or, if it starts with `{`, JSON)
/// config and returns the record rendered in the config's format. The
/// string must be released with `fd_string_free`. Nothing is written to disk.
#[no_mangle]
pub extern "C" fn fd_run_config(config: *const c_char, out_text: *mut *mut c_char) -> i32 {
    guard(|| {
        let slot = out(out_text, "out_text")?;
        let body = text(config, "config")?;
        let mut c = if body.trim_start().starts_with('{') {
            ExperimentConfig::from_json(body)?
        } else {
            ExperimentConfig::from_toml(body)?
        };
        c.out = None;
        let rendered = run(&c)?.render(c.format)?;
        *slot = CString::new(rendered).map_err(|e| Error::Config(e.to_string()))?.into_raw();
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn fd_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: produced by CString::into_raw in this library and freed once.
        drop(unsafe { CString::from_raw(s) });
    }
}
