use serde::Serialize;

use super::ifs::ValidatedIfs;
use super::partition::{PartitionLambdaN, DEFAULT_SIZE_CAP};
use super::word::Word;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Atomic approximation of the self-similar measure: one atom at `S_w(0)` with mass
/// `mu_w` for every word `w` of length `level`, sorted by position.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteMeasure<T> {
    pub level: usize,
    pub positions: Vec<T>,
    pub masses: Vec<T>,
    pub words: Vec<Word>,
}

impl<T: Scalar> DiscreteMeasure<T> {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn total_mass(&self) -> T {
        self.masses.iter().copied().sum()
    }

    /// Index of the atom at `x`, if one lies within `tol` of it.
    pub fn atom_index(&self, x: T, tol: T) -> Option<usize> {
        let i = self.positions.partition_point(|&p| p < x);
        [i.checked_sub(1), Some(i)]
            .into_iter()
            .flatten()
            .filter(|&j| j < self.len())
            .find(|&j| (self.positions[j] - x).abs() <= tol)
    }

    /// Indices of atoms inside the half-open interval `[lo, hi)`.
    pub fn atoms_in(&self, lo: T, hi: T) -> std::ops::Range<usize> {
        let tol = T::rel_tol() * (hi - lo);
        let start = self.positions.partition_point(|&p| p < lo - tol);
        let end = self.positions.partition_point(|&p| p < hi - tol);
        start..end
    }
}

pub fn discrete_measure<T: Scalar>(spec: &ValidatedIfs<T>, level: usize) -> Result<DiscreteMeasure<T>> {
    discrete_measure_with_cap(spec, level, DEFAULT_SIZE_CAP)
}

pub fn discrete_measure_with_cap<T: Scalar>(
    spec: &ValidatedIfs<T>,
    level: usize,
    cap: usize,
) -> Result<DiscreteMeasure<T>> {
    if level == 0 {
        return Err(Error::InvalidInput("measure level must be at least 1".into()));
    }
    let n = spec.len();
    let count = (n as f64).powi(level as i32);
    if count > cap as f64 {
        return Err(Error::Size { what: "discrete measure", cap });
    }
    let mut layer: Vec<(Vec<u16>, T, T, T)> = vec![(Vec::new(), T::one(), T::zero(), T::one())];
    for _ in 0..level {
        let mut next = Vec::with_capacity(layer.len() * n);
        for (letters, scale, shift, mass) in &layer {
            for (i, c) in spec.contractions.iter().enumerate() {
                let mut child = letters.clone();
                child.push(i as u16);
                next.push((child, *scale * c.ratio, *shift + *scale * c.offset, *mass * spec.weights[i]));
            }
        }
        layer = next;
    }
    // Lexicographic generation order is already ascending in position.
    let mut out = DiscreteMeasure {
        level,
        positions: Vec::with_capacity(layer.len()),
        masses: Vec::with_capacity(layer.len()),
        words: Vec::with_capacity(layer.len()),
    };
    for (letters, _, shift, mass) in layer {
        if let Some(&prev) = out.positions.last() {
            if shift <= prev {
                return Err(Error::DegenerateGap {
                    index: out.positions.len() - 1,
                    x: shift.to_f64_lossy(),
                });
            }
        }
        out.positions.push(shift);
        out.masses.push(mass);
        out.words.push(Word::from_indices(letters));
    }
    Ok(out)
}

/// The `n`-neighbourhood `D_n^0(x)`: union of the one or two partition cells
/// containing `x`, and its mass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaApproximant<T> {
    pub center: T,
    pub level: usize,
    pub support_words: Vec<Word>,
    pub support_intervals: Vec<(T, T)>,
    pub total_mass: T,
}

impl<T: Scalar> DeltaApproximant<T> {
    /// Diameter of the union of the support intervals.
    pub fn diameter(&self) -> T {
        let lo = self.support_intervals.iter().map(|iv| iv.0).fold(T::infinity(), T::min);
        let hi = self.support_intervals.iter().map(|iv| iv.1).fold(T::neg_infinity(), T::max);
        hi - lo
    }

    /// `||f_n^x||^2_mu = 1 / mu(D_n^0(x))`.
    pub fn norm_squared(&self) -> T {
        T::one() / self.total_mass
    }
}

/// Finds the cells of `Lambda_n` whose closed interval contains `x`.
///
/// Membership of `F` is decided at resolution `n`: a point in a gap between
/// level-`n` intervals is rejected, a point in a deeper gap is not.
pub fn neighborhood<T: Scalar>(spec: &ValidatedIfs<T>, x: T, level: usize) -> Result<DeltaApproximant<T>> {
    if level == 0 {
        return Err(Error::InvalidInput("neighbourhood level must be at least 1".into()));
    }
    let threshold = PartitionLambdaN::threshold(spec, level);
    let tol = T::unit_tol();
    let mut support_words = Vec::new();
    let mut support_intervals = Vec::new();
    let mut total_mass = T::zero();
    let mut stack: Vec<(Vec<u16>, T, T, T)> = vec![(Vec::new(), T::one(), T::zero(), T::one())];
    while let Some((letters, scale, shift, mass)) = stack.pop() {
        if x < shift - tol || x > shift + scale + tol {
            continue;
        }
        if !letters.is_empty() && scale <= threshold {
            support_words.push(Word::from_indices(letters));
            support_intervals.push((shift, shift + scale));
            total_mass = total_mass + mass;
            continue;
        }
        for (i, c) in spec.contractions.iter().enumerate().rev() {
            let mut child = letters.clone();
            child.push(i as u16);
            stack.push((child, scale * c.ratio, shift + scale * c.offset, mass * spec.weights[i]));
        }
    }
    if support_words.is_empty() {
        return Err(Error::NotInSupport {
            x: x.to_f64_lossy(),
            level,
        });
    }
    Ok(DeltaApproximant {
        center: x,
        level,
        support_words,
        support_intervals,
        total_mass,
    })
}

/// `<g, f_n^x>_mu` evaluated on the atomic measure `dm`.
///
/// Atoms are assigned to a cell by half-open interval membership, so an atom
/// shared by two touching cells is counted once. The normalisation uses the atom
/// mass inside the cells, which equals `mu(D_n^0(x))` whenever `dm.level >= n`.
pub fn inner_product_with_approximant<T: Scalar>(
    g: impl Fn(T) -> T,
    approx: &DeltaApproximant<T>,
    dm: &DiscreteMeasure<T>,
) -> Result<T> {
    if dm.level < approx.level {
        return Err(Error::InvalidInput(format!(
            "discrete measure level {} is coarser than approximant level {}",
            dm.level, approx.level
        )));
    }
    let mut weighted = T::zero();
    let mut mass = T::zero();
    for &(lo, hi) in &approx.support_intervals {
        for j in dm.atoms_in(lo, hi) {
            weighted = weighted + g(dm.positions[j]) * dm.masses[j];
            mass = mass + dm.masses[j];
        }
    }
    if mass <= T::zero() {
        return Err(Error::NotInSupport {
            x: approx.center.to_f64_lossy(),
            level: approx.level,
        });
    }
    Ok(weighted / mass)
}
