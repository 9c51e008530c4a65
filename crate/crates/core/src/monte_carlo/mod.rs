//! Monte Carlo estimators for finite-blocklength bounds, plus the
//! deterministic log-chi-square error used to justify them.

pub mod dt;
pub mod engine;
pub mod log_chi2;
pub mod logdet;
pub mod sphere_packing;
pub mod typicality;

pub use dt::{dt_achievable_nld, dt_bound, info_density_moments, CubeRule, DtNld, DtResult, InfoDensityMoments};
pub use engine::{McConfig, McEstimate, McRng, Moments, SampleSummary};
pub use log_chi2::{log_chi2_tv_error, LogChi2Error};
pub use logdet::{det_log_verify, telatar_capacity_mc, DetLogVerification};
pub use sphere_packing::{sp_converse_nld, sphere_packing_bound, sphere_packing_bound_with, SpChannel, SpEstimator, SpResult};
pub use typicality::{lattice_typicality_bound, lattice_typicality_bound_tuned, TypicalityBound};
