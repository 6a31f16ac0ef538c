use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::stats::{mean_estimate, Estimate};

/// Solution values `u(t, x)` on a grid of output times and atom sites, per path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathEnsemble<T> {
    pub times: Vec<T>,
    /// Grid step of each output time.
    pub time_steps: Vec<usize>,
    pub sites: Vec<T>,
    /// Atom index of each site.
    pub site_atoms: Vec<usize>,
    pub n_paths: usize,
    pub seed: u64,
    /// Flattened `[path][time][site]`.
    pub values: Vec<T>,
    /// Digest of the configuration that produced the run, if any.
    pub config_digest: Option<String>,
}

impl<T: Scalar> PathEnsemble<T> {
    pub fn value(&self, path: usize, time: usize, site: usize) -> T {
        self.values[(path * self.times.len() + time) * self.sites.len() + site]
    }

    /// All paths at one grid point.
    pub fn samples(&self, time: usize, site: usize) -> Vec<T> {
        (0..self.n_paths).map(|p| self.value(p, time, site)).collect()
    }

    pub fn time_index(&self, t: T) -> Result<usize> {
        let tol = T::of(1e-9) * (T::one() + t.abs());
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= tol)
            .ok_or_else(|| Error::InvalidInput(format!("time {t} is not an output time")))
    }

    pub fn site_index(&self, x: T) -> Result<usize> {
        let tol = T::unit_tol();
        self.sites
            .iter()
            .position(|&s| (s - x).abs() <= tol)
            .ok_or_else(|| Error::InvalidInput(format!("site {x} is not an output site")))
    }

    /// Per-grid-point summary rows `(t, x, mean, var)`.
    pub fn summary(&self) -> Vec<(T, T, T, T)> {
        let mut rows = Vec::with_capacity(self.times.len() * self.sites.len());
        for (ti, &t) in self.times.iter().enumerate() {
            for (si, &x) in self.sites.iter().enumerate() {
                let s = self.samples(ti, si);
                rows.push((t, x, crate::stats::mean(&s), crate::stats::variance(&s)));
            }
        }
        rows
    }
}

/// `E|u(t, x)|^q` over the ensemble with its standard error.
pub fn moment_estimator<T: Scalar>(ensemble: &PathEnsemble<T>, q: T, time: usize, site: usize) -> Result<Estimate<T>> {
    if !(q >= T::one()) {
        return Err(Error::InvalidInput(format!("moment order must be at least 1, got {q}")));
    }
    if time >= ensemble.times.len() || site >= ensemble.sites.len() {
        return Err(Error::InvalidInput("grid point outside the ensemble".into()));
    }
    let xs: Vec<T> = ensemble.samples(time, site).into_iter().map(|u| u.abs().powf(q)).collect();
    Ok(mean_estimate(&xs))
}
