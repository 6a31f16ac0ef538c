//! Iterated function systems on `[0, 1]`, their self-similar measures, word-space
//! partitions, delta approximants and the exponents derived from them.

mod checks;
mod exponents;
mod ifs;
mod measure;
mod partition;
mod word;

pub use checks::{check_partition_lemma, partition_level_of, sample_admissible_spec, PartitionCheck};
pub use exponents::{compute_exponents, solve_dimension, solve_spectral_exponent, ExponentSet};
pub use ifs::{validate_ifs, Boundary, Contraction, IfsSpec, ValidatedIfs};
pub use measure::{
    discrete_measure, discrete_measure_with_cap, inner_product_with_approximant, neighborhood,
    DeltaApproximant, DiscreteMeasure,
};
pub use partition::{partition, partition_with_cap, PartitionLambdaN, DEFAULT_SIZE_CAP};
pub use word::{word_interval, word_measure, Word};
