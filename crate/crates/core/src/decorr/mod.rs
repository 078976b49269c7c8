//! EM-style decorrelation of the latent data.

mod em;
mod parents;

pub use em::{e_step, fit_initial_beta, m_step, run_em, EmConfig, EmState, INITIAL_FIT_ITERS};
pub use parents::{initial_parents, parents_from_cpdag, ParentSets};
