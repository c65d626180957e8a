//! The one-stage multitype branching process behind `T^k_t`: a discretised
//! offspring kernel on the type space `[0,t]`, the extinction fixed point, and
//! spectral-radius estimates.

mod extinction;
mod kernel;
mod spectral;

pub use extinction::{solve_extinction, two_stage_extinction, ExtinctionSolution, SolveOptions, SolveStatus};
pub use kernel::{bin_tuples, estimate_kernel, tuple_weight, KernelOptions, OffspringKernel};
pub use spectral::{estimate_spectral_radius, growth_rate_mc, spectral_radius, GrowthEstimate};
