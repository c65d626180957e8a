//! The local limit: Galton–Watson trees `T^inf_t`, propagation paths, and the
//! forbidden-degree tree `T^k_t` grown lazily.

mod lazy;
mod paths;
mod rootstat;
mod survival;
mod tree;

pub use lazy::{sample_tkt, RootOutcome, TktOptions, TktSample, TktStatus};
pub(crate) use lazy::{edge_removal_time, vertex_dynamics};
pub use rootstat::{graph_root_counts, root_category, root_categories, total_variation, tree_root_counts, LABEL_BINS};
pub use paths::{expected_propagation_count, find_propagation_paths, PathSearch};
pub use survival::{estimate_survival, root_offspring, SurvivalEstimate};
pub use tree::{sample_gw_levels, LocalTree, TreeNode};
