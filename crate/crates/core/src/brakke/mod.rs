//! Test functions, the constants ledger and the Brakke residual of a
//! discretized mean curvature flow.

mod ledger;
mod measure;
mod residual;
mod test_function;

pub use ledger::{
    constants_ledger, gamma_feasible, ConstantsLedger, GammaBound, GammaChoice, LedgerInputs,
    DEFAULT_GAMMA_FLOOR,
};
pub use measure::{
    measure_c1, measure_c2, phi_eps_integral, static_comparison, C1Measurement, StaticComparison,
};
pub use residual::{
    brakke_residual, BoundConstants, HypothesisPolicy, ResidualReport, ResidualSetup,
    ResidualVariant, SnapshotTerms,
};
pub use test_function::{bump, Bump, ScalarField, TestNorms};
