use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate<T> {
    pub value: T,
    pub std_error: T,
}

impl<T: Scalar> Estimate<T> {
    /// Number of standard errors separating the value from `target`.
    pub fn z_score(&self, target: T) -> T {
        (self.value - target) / self.std_error
    }
}

pub fn mean<T: Scalar>(xs: &[T]) -> T {
    xs.iter().copied().sum::<T>() / T::of_usize(xs.len())
}

/// Unbiased sample variance.
pub fn variance<T: Scalar>(xs: &[T]) -> T {
    let m = mean(xs);
    xs.iter().map(|&x| (x - m) * (x - m)).sum::<T>() / T::of_usize(xs.len().saturating_sub(1).max(1))
}

/// Sample mean with its jackknife standard error (which equals `s / sqrt(n)` for the mean).
pub fn mean_estimate<T: Scalar>(xs: &[T]) -> Estimate<T> {
    Estimate {
        value: mean(xs),
        std_error: (variance(xs) / T::of_usize(xs.len())).sqrt(),
    }
}

/// Delete-one-group jackknife of `stat`, which receives the excluded group or `None`.
pub fn grouped_jackknife<T: Scalar>(groups: usize, mut stat: impl FnMut(Option<usize>) -> T) -> Estimate<T> {
    let full = stat(None);
    let leave: Vec<T> = (0..groups).map(|g| stat(Some(g))).collect();
    let m = mean(&leave);
    let g = T::of_usize(groups);
    let spread: T = leave.iter().map(|&v| (v - m) * (v - m)).sum();
    Estimate {
        value: full,
        std_error: ((g - T::one()) / g * spread).sqrt(),
    }
}

/// Sample skewness and excess kurtosis with their large-sample standard errors.
pub fn shape<T: Scalar>(xs: &[T]) -> (Estimate<T>, Estimate<T>) {
    let n = T::of_usize(xs.len());
    let m = mean(xs);
    let m2 = xs.iter().map(|&x| (x - m).powi(2)).sum::<T>() / n;
    let m3 = xs.iter().map(|&x| (x - m).powi(3)).sum::<T>() / n;
    let m4 = xs.iter().map(|&x| (x - m).powi(4)).sum::<T>() / n;
    (
        Estimate {
            value: m3 / m2.powf(T::of(1.5)),
            std_error: (T::of(6.0) / n).sqrt(),
        },
        Estimate {
            value: m4 / (m2 * m2) - T::of(3.0),
            std_error: (T::of(24.0) / n).sqrt(),
        },
    )
}

/// Ordinary least squares `y = intercept + slope x`.
pub fn ols<T: Scalar>(xs: &[T], ys: &[T]) -> (T, T) {
    let mx = mean(xs);
    let my = mean(ys);
    let sxy: T = xs.iter().zip(ys).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    let sxx: T = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}
