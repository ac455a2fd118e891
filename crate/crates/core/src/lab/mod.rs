//! Convergence experiments, rate fits, theoretical rates and the exact
//! additive-cost identities.

pub mod convergence;
pub mod fit;
pub mod identities;
pub mod theory;

pub use convergence::{
    empirical_deviation, run_convergence, Benchmark, ConvergenceRow, ConvergenceTable, EstimatorKind,
    TableMetadata,
};
pub use fit::{fit_points, fit_rate, RateFit, DEFAULT_N_MIN};
pub use identities::{decomposition_residual, dependent_coupling_check, CouplingConfig, HeadLaw};
pub use theory::{
    dudley_rademacher_bound, rate_report, theory_rate_family, theory_rate_general, Family, RateClass,
    TheoryRate,
};
