//! Coupling-based dependence measures.

pub mod fdm;
pub mod profile;
pub mod tau;
pub mod uniform;
pub mod weak;

pub use fdm::{
    default_window, fdm_analytic_linear, fdm_monte_carlo, with_tail, CausalMap, FnMap, LinearMap, LipschitzFn,
};
pub use profile::{DanValue, DependenceProfile, Provenance, TailCertificate, TailModel};
pub use tau::{tau_coupling_bound, TauEstimate};
pub use uniform::{uniform_fdm, UniformFdmProfile, UniformSource};
pub use weak::{weak_dependence_probe, BuiltinTest, PsiValues, TestFunction, WeakDependenceReport};
