//! DAGs, CPDAGs, random graph generation and structural accuracy.

mod cpdag;
mod dag;
mod metrics;

pub(crate) use cpdag::Pdag;
pub use cpdag::{dag_to_cpdag, v_structures, Cpdag, Edge};
pub use dag::{random_dag, sample_weights, topological_order, WeightedDag, WEIGHT_RANGE};
pub use metrics::{f1_score, StructureMetrics};
