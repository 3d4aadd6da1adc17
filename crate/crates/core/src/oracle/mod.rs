//! Independent, non-streaming reference computations: empirical quantiles,
//! numerical integration, true expansion coefficients, and Monte Carlo
//! checks of the estimator's error bounds.

pub mod bounds;
pub mod empirical;
pub mod quadrature;

pub use bounds::{
    check_cdf_mse_bound, check_ewgh_coefficient_mse, check_ewgh_variance, check_omega_bound,
    ewgh_change_point_mse, ewgh_iid_variance, ise, ise_against, term_variance, true_coefficient,
    BoundReport, McSettings,
};
pub use empirical::{edf, sample_quantile, EmpiricalDistribution};
pub use quadrature::integrate;
