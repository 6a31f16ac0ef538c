mod eigen;
mod propagator;
mod resolvent;
mod string;
mod tridiag;

pub use eigen::{
    eigendecompose, eigenvalue_scaling, sign_threshold, supnorm_growth_check, EigenSystem, Stencil, SupnormReport,
    WeylFit,
};
pub use propagator::{sine_factor, DeltaDecay, PropagatorEvaluator, TruncationWarning, DEFAULT_TRUNCATION};
pub use resolvent::{resolvent_density, resolvent_matrix, ResolventMatrix};
pub use string::{assemble_string, StieltjesString};
pub use tridiag::{symmetric_tridiagonal_eigen, TridiagonalEigen};
