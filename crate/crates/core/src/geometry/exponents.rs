use serde::{Deserialize, Serialize};

use super::ifs::ValidatedIfs;
use crate::scalar::Scalar;

const BISECTION_MAX_ITER: usize = 200;
const BISECTION_ARG_TOL: f64 = 1e-13;
// Margin for the strict inequality delta + 1 < 1/gamma; the full-interval case sits
// exactly on the boundary.
const HYPOTHESIS_MARGIN: f64 = 1e-9;

/// Scalars derived from an IFS that govern every estimate downstream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentSet<T> {
    /// Hausdorff dimension of the attractor: `sum r_i^d = 1`.
    pub d_h: T,
    /// Spectral exponent: `sum (mu_i r_i)^gamma = 1`.
    pub gamma: T,
    /// Skewness indicator `max_i log mu_i / log((mu_i r_i)^gamma)`.
    pub delta: T,
    /// `min_i mu_i / r_i^{d_H}`.
    pub nu_min: T,
    pub r_max: T,
    pub r_min: T,
    /// Whether `delta + 1 < 1 / gamma`.
    pub hypothesis_i_satisfied: bool,
}

impl<T: Scalar> ExponentSet<T> {
    /// `d_H + 1 + log(nu_min) / log(r_max)`, the reciprocal of the temporal exponent.
    pub fn temporal_denominator(&self) -> T {
        self.d_h + T::one() + self.nu_min.ln() / self.r_max.ln()
    }

    /// Exponent in the eigenfunction sup-norm bound `||phi_k|| <= C lambda_k^{gamma delta / 2}`.
    pub fn supnorm_exponent(&self) -> T {
        self.gamma * self.delta / T::of(2.0)
    }
}

/// Root of a strictly decreasing function on `[lo, hi]` by bisection.
fn bisect_decreasing<T: Scalar>(f: impl Fn(T) -> T, mut lo: T, mut hi: T) -> T {
    let tol = T::of(BISECTION_ARG_TOL);
    let two = T::of(2.0);
    for _ in 0..BISECTION_MAX_ITER {
        let mid = (lo + hi) / two;
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if v == T::zero() {
            return mid;
        }
        if v > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= tol {
            break;
        }
    }
    (lo + hi) / two
}

/// Hausdorff dimension `d` with `sum r_i^d = 1`, bisected on `[0, 1]`.
pub fn solve_dimension<T: Scalar>(spec: &ValidatedIfs<T>) -> T {
    let residual = |d: T| spec.ratios().map(|r| r.powf(d)).sum::<T>() - T::one();
    if residual(T::one()).abs() <= T::unit_tol() {
        return T::one();
    }
    bisect_decreasing(residual, T::zero(), T::one())
}

/// Spectral exponent `gamma` with `sum (mu_i r_i)^gamma = 1`, bisected on `(0, 1)`.
pub fn solve_spectral_exponent<T: Scalar>(spec: &ValidatedIfs<T>) -> T {
    let residual = |g: T| {
        spec.contractions
            .iter()
            .zip(&spec.weights)
            .map(|(c, &m)| (m * c.ratio).powf(g))
            .sum::<T>()
            - T::one()
    };
    bisect_decreasing(residual, T::zero(), T::one())
}

pub fn compute_exponents<T: Scalar>(spec: &ValidatedIfs<T>) -> ExponentSet<T> {
    let d_h = solve_dimension(spec);
    let gamma = solve_spectral_exponent(spec);
    let pairs = || spec.contractions.iter().zip(&spec.weights);
    let delta = pairs()
        .map(|(c, &m)| m.ln() / (gamma * (m * c.ratio).ln()))
        .fold(T::neg_infinity(), T::max);
    let nu_min = pairs()
        .map(|(c, &m)| m / c.ratio.powf(d_h))
        .fold(T::infinity(), T::min);
    let hypothesis_i_satisfied = delta + T::one() < T::one() / gamma - T::of(HYPOTHESIS_MARGIN);
    ExponentSet {
        d_h,
        gamma,
        delta,
        nu_min,
        r_max: spec.r_max(),
        r_min: spec.r_min(),
        hypothesis_i_satisfied,
    }
}
