mod drift;
mod ensemble;
mod initial;
mod noise;
mod simulate;

pub use drift::{Drift, DriftSpec};
pub use ensemble::{moment_estimator, PathEnsemble};
pub use initial::{deterministic_part, project_initial_data, InitialData, ProjectionDiagnostics};
pub use noise::{counter_normal, gaussian_pair, NoisePlan};
pub use simulate::{atom_sites, picard_solve, simulate_paths, PicardTrace};
