use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Boundary condition of the Krein-Feller operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Neumann,
    Dirichlet,
}

/// Affine contraction `S(x) = ratio * x + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contraction<T> {
    pub ratio: T,
    pub offset: T,
}

impl<T: Scalar> Contraction<T> {
    pub fn apply(&self, x: T) -> T {
        self.ratio * x + self.offset
    }
}

/// Ordered family of affine contractions of `[0, 1]` together with the weights of
/// the self-similar measure they carry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IfsSpec<T> {
    pub contractions: Vec<Contraction<T>>,
    pub weights: Vec<T>,
    pub boundary: Boundary,
}

impl<T: Scalar> IfsSpec<T> {
    /// Builds a spec from parallel arrays. Lengths are checked by [`validate_ifs`].
    pub fn new(ratios: &[T], offsets: &[T], weights: &[T], boundary: Boundary) -> Self {
        let contractions = ratios
            .iter()
            .zip(offsets)
            .map(|(&ratio, &offset)| Contraction { ratio, offset })
            .collect();
        Self {
            contractions,
            weights: weights.to_vec(),
            boundary,
        }
    }

    /// Middle-thirds Cantor set with the natural (log 2 / log 3 dimensional) measure.
    pub fn cantor(boundary: Boundary) -> Self {
        Self::cantor_weighted(T::of(0.5), boundary)
    }

    /// Middle-thirds Cantor set carrying weights `(w, 1 - w)`.
    pub fn cantor_weighted(w: T, boundary: Boundary) -> Self {
        let third = T::one() / T::of(3.0);
        Self::new(
            &[third, third],
            &[T::zero(), T::of(2.0) * third],
            &[w, T::one() - w],
            boundary,
        )
    }

    /// Two halves of `[0, 1]` with equal weights; the measure is Lebesgue measure.
    pub fn lebesgue(boundary: Boundary) -> Self {
        let half = T::of(0.5);
        Self::new(&[half, half], &[T::zero(), half], &[half, half], boundary)
    }

    pub fn len(&self) -> usize {
        self.contractions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contractions.is_empty()
    }

    pub fn ratios(&self) -> impl Iterator<Item = T> + '_ {
        self.contractions.iter().map(|c| c.ratio)
    }

    pub fn r_max(&self) -> T {
        self.ratios().fold(T::zero(), T::max)
    }

    pub fn r_min(&self) -> T {
        self.ratios().fold(T::infinity(), T::min)
    }
}

/// An [`IfsSpec`] that passed [`validate_ifs`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidatedIfs<T>(IfsSpec<T>);

impl<T> ValidatedIfs<T> {
    pub fn spec(&self) -> &IfsSpec<T> {
        &self.0
    }

    pub fn into_inner(self) -> IfsSpec<T> {
        self.0
    }
}

impl<T> Deref for ValidatedIfs<T> {
    type Target = IfsSpec<T>;

    fn deref(&self) -> &IfsSpec<T> {
        &self.0
    }
}

/// Checks the ordering, non-overlap, coverage and weight conditions.
///
/// Checks run in the order: contraction domains, overlap, coverage, weights, so a
/// spec whose images overlap reports [`Error::Overlap`] even if it also fails to
/// reach `1`.
pub fn validate_ifs<T: Scalar>(spec: IfsSpec<T>) -> Result<ValidatedIfs<T>> {
    let n = spec.len();
    if n < 2 {
        return Err(Error::Contraction {
            index: n,
            reason: format!("need at least 2 contractions, got {n}"),
        });
    }
    if spec.weights.len() != n {
        return Err(Error::Weight(format!(
            "{} weights for {} contractions",
            spec.weights.len(),
            n
        )));
    }
    let tol = T::unit_tol();
    for (i, c) in spec.contractions.iter().enumerate() {
        if !(c.ratio > T::zero() && c.ratio < T::one()) {
            return Err(Error::Contraction {
                index: i + 1,
                reason: format!("ratio {} not in (0, 1)", c.ratio),
            });
        }
        if !(c.offset >= -tol && c.offset <= T::one() - c.ratio + tol) {
            return Err(Error::Contraction {
                index: i + 1,
                reason: format!("offset {} not in [0, 1 - ratio]", c.offset),
            });
        }
    }
    for (i, pair) in spec.contractions.windows(2).enumerate() {
        let end = pair[0].apply(T::one());
        let start = pair[1].apply(T::zero());
        if end > start + tol {
            return Err(Error::Overlap {
                left: i + 1,
                right: i + 2,
                end: end.to_f64_lossy(),
                start: start.to_f64_lossy(),
            });
        }
    }
    let first = spec.contractions[0].apply(T::zero());
    if first.abs() > tol {
        return Err(Error::Coverage(format!("S_1(0) = {first}, expected 0")));
    }
    let last = spec.contractions[n - 1].apply(T::one());
    if (last - T::one()).abs() > tol {
        return Err(Error::Coverage(format!("S_{n}(1) = {last}, expected 1")));
    }
    for (i, &w) in spec.weights.iter().enumerate() {
        if !(w > T::zero() && w < T::one()) {
            return Err(Error::Weight(format!("weight {} = {w} not in (0, 1)", i + 1)));
        }
    }
    let total: T = spec.weights.iter().copied().sum();
    if (total - T::one()).abs() > tol {
        return Err(Error::Weight(format!("weights sum to {total}, expected 1")));
    }
    Ok(ValidatedIfs(spec))
}
