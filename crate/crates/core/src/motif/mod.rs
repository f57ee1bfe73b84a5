//! Template graphs and exact copy counting in geometric graphs.

mod census;
mod template;

pub use census::{
    brute_force_count, check_condition, count, count_embeddings, pair_mask, ConditionCheck, CopyCensus,
    BRUTE_FORCE_LIMIT,
};
pub use template::{factorial, pair_bit, MotifTemplate, Preset, MAX_TEMPLATE_VERTICES};

/// Builds a template from `k` and an edge list.
pub fn template_from_edges(k: usize, edges: &[(usize, usize)]) -> crate::Result<MotifTemplate> {
    MotifTemplate::from_edges(k, edges)
}
