//! Parallel-first, monolingual-second pretraining mix planning.

mod plan;
mod sample;
mod tables;

pub use plan::{
    budget_from_billions, plan_language, plan_mix, Allocation, Availability, MixPlan, Pool, BILLION,
};
pub use sample::{materialize, pool_rng, ManifestEntry, PoolSource, PoolSummary, SamplingManifest};
pub use tables::{
    compare_plans, infer_availability, jitter, parse_allocation_tables, pretrain_setup,
    published_tables, CellComparison, InferredAvailability, PUBLISHED_BUDGETS,
};
