mod hoelder;
mod lyapunov;
mod theory;

pub use hoelder::{
    estimate_spatial_hoelder, estimate_temporal_hoelder, pair_sites, word_aligned_pairs, Direction, HoelderReport,
    SitePair, JACKKNIFE_GROUPS,
};
pub use lyapunov::{envelope_check, lyapunov_estimate, EnvelopeCheck, LyapunovReport};
pub use theory::{
    cantor_weight_sweep, exponent_inequality_check, log_grid, natural_family_sweep, predicted_exponents,
    summation_bound_check, summation_partial, summation_series, DimensionRow, InequalityCheck, PredictedExponents,
    SummationCheck, WeightRow,
};
