use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Time grid and seeding for a Monte Carlo run.
///
/// The Gaussian for `(path, step, cell)` is a pure function of the master seed,
/// so results do not depend on evaluation order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoisePlan<T> {
    pub master_seed: u64,
    pub n_paths: usize,
    pub dt: T,
    pub horizon: T,
    pub steps: usize,
}

impl<T: Scalar> NoisePlan<T> {
    pub fn new(master_seed: u64, n_paths: usize, dt: T, horizon: T) -> Result<Self> {
        if !(dt > T::zero() && dt.is_finite()) {
            return Err(Error::InvalidInput(format!("time step must be positive, got {dt}")));
        }
        if !(horizon > T::zero() && horizon.is_finite()) {
            return Err(Error::InvalidInput(format!("horizon must be positive, got {horizon}")));
        }
        if n_paths == 0 {
            return Err(Error::InvalidInput("at least one path is required".into()));
        }
        let steps = step_index(horizon, dt)?;
        Ok(Self {
            master_seed,
            n_paths,
            dt,
            horizon,
            steps,
        })
    }

    pub fn time(&self, step: usize) -> T {
        T::of_usize(step) * self.dt
    }

    /// Grid index of `t`, which must be a multiple of `dt` in `[0, horizon]`.
    pub fn step_of(&self, t: T) -> Result<usize> {
        let j = step_index(t, self.dt)?;
        if j > self.steps {
            return Err(Error::InvalidInput(format!("time {t} exceeds the horizon {}", self.horizon)));
        }
        Ok(j)
    }
}

fn step_index<T: Scalar>(t: T, dt: T) -> Result<usize> {
    let ratio = t / dt;
    let j = ratio.round();
    if j < T::zero() || (ratio - j).abs() > T::of(1e-6) {
        return Err(Error::InvalidInput(format!("time {t} is not on the grid of step {dt}")));
    }
    j.to_usize()
        .ok_or_else(|| Error::InvalidInput(format!("time {t} is not on the grid of step {dt}")))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn unit_open(bits: u64) -> f64 {
    ((bits >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Two independent standard normals for the cell pair `pair` (cells `2 pair` and `2 pair + 1`).
pub fn gaussian_pair(seed: u64, path: u64, step: u64, pair: u64) -> (f64, f64) {
    let key = splitmix64(seed ^ splitmix64(path ^ splitmix64(step ^ splitmix64(pair))));
    let u1 = unit_open(splitmix64(key));
    let u2 = unit_open(splitmix64(key ^ 0x6a09_e667_f3bc_c909));
    let r = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
    (r * c, r * s)
}

/// Standard normal attached to `(path, step, cell)`.
pub fn counter_normal(seed: u64, path: u64, step: u64, cell: u64) -> f64 {
    let (a, b) = gaussian_pair(seed, path, step, cell / 2);
    if cell % 2 == 0 {
        a
    } else {
        b
    }
}
