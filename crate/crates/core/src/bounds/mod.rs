//! Closed-form evaluation of scalar concentration and moment inequalities.

pub mod doukhan;
pub mod gq;
pub mod merlevede;
pub mod moment;
pub mod nagaev;
pub mod result;

pub use doukhan::{doukhan_constants, doukhan_louhichi_bound};
pub use gq::{g_q, g_q_detailed, GqEvaluation};
pub use merlevede::{ar1_long_run_sigma2, merlevede_chernoff, merlevede_mgf};
pub use moment::{phi_moment_bound, rosenthal_liu_xiao_wu};
pub use nagaev::{
    dan_a_n, ell, linear_c_p, nagaev_dan, nagaev_fdm, nagaev_linear_long, nagaev_linear_short, nagaev_vector_max,
    nu_sum, vector_max_threshold, FdmVariant,
};
pub use result::{BoundKind, BoundResult, ConstantPack, ConstantsSource};
