use serde::{Deserialize, Serialize};

use super::hoelder::JACKKNIFE_GROUPS;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spde::PathEnsemble;
use crate::stats::{grouped_jackknife, ols};

/// Finite-horizon growth rate of `log E|u(t, x)|^p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovReport<T> {
    pub p: T,
    pub site: T,
    pub window: (T, T),
    pub times: Vec<T>,
    pub log_moments: Vec<T>,
    pub growth_rate: T,
    pub std_error: T,
    /// Growth rate exceeds zero by three standard errors.
    pub positive: bool,
}

/// Fits the slope of `log E|u(t, x)|^p` in `t` over output times inside `window`.
///
/// The window must lie in `[T/2, T]` with `T` the last output time.
pub fn lyapunov_estimate<T: Scalar>(ensemble: &PathEnsemble<T>, p: T, x: T, window: (T, T)) -> Result<LyapunovReport<T>> {
    if !(p > T::zero()) {
        return Err(Error::InvalidInput(format!("moment order must be positive, got {p}")));
    }
    let si = ensemble.site_index(x)?;
    let horizon = ensemble.times.last().copied().unwrap_or(T::zero());
    let tol = T::of(1e-9) * (T::one() + horizon);
    if window.0 >= window.1 || window.0 < horizon / T::of(2.0) - tol || window.1 > horizon + tol {
        return Err(Error::InsufficientHorizon(format!(
            "window [{}, {}] is not inside [T/2, T] for T = {horizon}",
            window.0, window.1
        )));
    }
    let idx: Vec<usize> = (0..ensemble.times.len())
        .filter(|&i| ensemble.times[i] >= window.0 - tol && ensemble.times[i] <= window.1 + tol)
        .collect();
    if idx.len() < 3 {
        return Err(Error::InsufficientHorizon(format!(
            "only {} output times inside the window",
            idx.len()
        )));
    }
    let times: Vec<T> = idx.iter().map(|&i| ensemble.times[i]).collect();
    let groups = JACKKNIFE_GROUPS.min(ensemble.n_paths);
    let mut sums = vec![vec![T::zero(); idx.len()]; groups];
    let mut sizes = vec![0usize; groups];
    for path in 0..ensemble.n_paths {
        let g = path * groups / ensemble.n_paths;
        sizes[g] += 1;
        for (j, &i) in idx.iter().enumerate() {
            sums[g][j] = sums[g][j] + ensemble.value(path, i, si).abs().powf(p);
        }
    }
    let log_moments_without = |skip: Option<usize>| -> Vec<T> {
        let n: usize = (0..groups).filter(|&g| Some(g) != skip).map(|g| sizes[g]).sum();
        (0..idx.len())
            .map(|j| {
                let s: T = (0..groups).filter(|&g| Some(g) != skip).map(|g| sums[g][j]).sum();
                (s / T::of_usize(n)).ln()
            })
            .collect()
    };
    let est = grouped_jackknife(groups, |skip| ols(&times, &log_moments_without(skip)).1);
    Ok(LyapunovReport {
        p,
        site: ensemble.sites[si],
        window,
        times,
        log_moments: log_moments_without(None),
        growth_rate: est.value,
        std_error: est.std_error,
        positive: est.value - T::of(3.0) * est.std_error > T::zero(),
    })
}

/// Comparison of growth rates with a `C p^2` envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeCheck<T> {
    pub orders: Vec<T>,
    /// `rate(p) / p^2` divided by its value at the lowest order.
    pub normalized: Vec<T>,
    /// `C` fitted as the largest `rate(p) / p^2` over the first two orders.
    pub c_fit: T,
    /// `rate(p_last) / (C p_last^2)`.
    pub last_ratio: T,
    /// Every normalized ratio is at most `factor`.
    pub bounded: bool,
}

pub fn envelope_check<T: Scalar>(reports: &[LyapunovReport<T>], factor: T) -> Result<EnvelopeCheck<T>> {
    if reports.len() < 3 {
        return Err(Error::InvalidInput("envelope check needs at least three orders".into()));
    }
    let per_p2: Vec<T> = reports.iter().map(|r| r.growth_rate / (r.p * r.p)).collect();
    if per_p2[0] <= T::zero() {
        return Err(Error::InvalidInput("lowest-order growth rate is not positive".into()));
    }
    let normalized: Vec<T> = per_p2.iter().map(|&v| v / per_p2[0]).collect();
    let c_fit = per_p2[0].max(per_p2[1]);
    let last = reports.last().expect("non-empty");
    Ok(EnvelopeCheck {
        orders: reports.iter().map(|r| r.p).collect(),
        bounded: normalized.iter().all(|&v| v <= factor),
        last_ratio: last.growth_rate / (c_fit * last.p * last.p),
        c_fit,
        normalized,
    })
}
