//! PC structure learning with pluggable conditional-independence tests, and
//! the baseline / average / consensus strategies.

mod aggregate;
mod citest;
mod pc;

pub use aggregate::{average_dataset, consensus_cpdag, run_strategy, Strategy};
pub use citest::{
    chi_square_sf, ci_fisher_z, ci_g_squared, CiKind, CiParams, CiTest, CiTester, FisherZ, GSquared,
};
pub use pc::{pc, pc_fisher_z, pc_g_squared, PcOutput};
