use std::fmt;

use serde::Serialize;

use super::eigen::{apply_stencil, EigenSystem};
use crate::error::{Error, Result};
use crate::geometry::{neighborhood, ValidatedIfs};
use crate::scalar::Scalar;
use crate::stats::ols;

pub const DEFAULT_TRUNCATION: usize = 400;
const TAIL_TOLERANCE: f64 = 1e-3;

/// Raised when the discarded modes carry a noticeable share of `sum phi_k(x)^2 / lambda_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationWarning {
    pub x: f64,
    pub k_trunc: usize,
    pub retained: f64,
    pub tail: f64,
}

impl fmt::Display for TruncationWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "truncation at {} modes drops {:.3e} of {:.3e} at x = {}",
            self.k_trunc, self.tail, self.retained, self.x
        )
    }
}

/// Wave propagator `P_b(t, x, y)` from a truncated eigen-expansion.
#[derive(Debug, Clone, Copy)]
pub struct PropagatorEvaluator<'a, T> {
    pub eigen: &'a EigenSystem<T>,
    pub k_trunc: usize,
}

/// `sin(sqrt(lambda) t) / sqrt(lambda)`, equal to `t` for `lambda = 0`.
pub fn sine_factor<T: Scalar>(lambda: T, t: T) -> T {
    if lambda <= T::zero() {
        t
    } else {
        let w = lambda.sqrt();
        (w * t).sin() / w
    }
}

impl<'a, T: Scalar> PropagatorEvaluator<'a, T> {
    pub fn new(eigen: &'a EigenSystem<T>, k_trunc: usize) -> Result<Self> {
        if k_trunc == 0 || k_trunc > eigen.k_count() {
            return Err(Error::InvalidInput(format!(
                "truncation {k_trunc} outside 1..={}",
                eigen.k_count()
            )));
        }
        Ok(Self { eigen, k_trunc })
    }

    pub fn with_default_truncation(eigen: &'a EigenSystem<T>) -> Self {
        Self {
            eigen,
            k_trunc: eigen.k_count().min(DEFAULT_TRUNCATION),
        }
    }

    fn check_time(t: T) -> Result<()> {
        if t >= T::zero() {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("time must be non-negative, got {t}")))
        }
    }

    fn modes(&self) -> impl Iterator<Item = (T, &'a [T])> + 'a {
        let e = self.eigen;
        e.eigenvalues[..self.k_trunc]
            .iter()
            .copied()
            .zip(e.eigenvectors[..self.k_trunc].iter().map(Vec::as_slice))
    }

    pub fn eval(&self, t: T, x: T, y: T) -> Result<T> {
        Self::check_time(t)?;
        let sx = self.eigen.stencil(x);
        let sy = self.eigen.stencil(y);
        Ok(self
            .modes()
            .map(|(l, phi)| sine_factor(l, t) * apply_stencil(&sx, phi) * apply_stencil(&sy, phi))
            .sum())
    }

    /// `||P_b(t, x, .)||^2` in `L^2(mu_n)` by Parseval.
    pub fn row_norm_squared(&self, t: T, x: T) -> Result<T> {
        Self::check_time(t)?;
        let sx = self.eigen.stencil(x);
        Ok(self
            .modes()
            .map(|(l, phi)| {
                let s = sine_factor(l, t) * apply_stencil(&sx, phi);
                s * s
            })
            .sum())
    }

    pub fn row_norm(&self, t: T, x: T) -> Result<T> {
        self.row_norm_squared(t, x).map(T::sqrt)
    }

    /// `int_0^t ||P_b(s, x, .)||^2 ds` by composite Simpson with `panels` panels.
    pub fn integrated_row_norm_squared(&self, t: T, x: T, panels: usize) -> Result<T> {
        Self::check_time(t)?;
        let panels = panels.max(1) * 2;
        let h = t / T::of_usize(panels);
        let mut acc = T::zero();
        for i in 0..=panels {
            let w = if i == 0 || i == panels {
                T::one()
            } else if i % 2 == 1 {
                T::of(4.0)
            } else {
                T::of(2.0)
            };
            acc = acc + w * self.row_norm_squared(T::of_usize(i) * h, x)?;
        }
        Ok(acc * h / T::of(3.0))
    }

    /// Retained and discarded parts of `sum_k phi_k(x)^2 / lambda_k` over positive modes.
    pub fn tail_indicator(&self, x: T) -> (T, T) {
        let sx = self.eigen.stencil(x);
        let mut retained = T::zero();
        let mut tail = T::zero();
        for (k, (&l, phi)) in self.eigen.eigenvalues.iter().zip(&self.eigen.eigenvectors).enumerate() {
            if l <= T::zero() {
                continue;
            }
            let v = apply_stencil(&sx, phi);
            if k < self.k_trunc {
                retained = retained + v * v / l;
            } else {
                tail = tail + v * v / l;
            }
        }
        (retained, tail)
    }

    pub fn check_truncation(&self, x: T) -> Option<TruncationWarning> {
        let (retained, tail) = self.tail_indicator(x);
        (tail > T::of(TAIL_TOLERANCE) * retained).then(|| TruncationWarning {
            x: x.to_f64_lossy(),
            k_trunc: self.k_trunc,
            retained: retained.to_f64_lossy(),
            tail: tail.to_f64_lossy(),
        })
    }

    /// `int (<P_b(t, ., y), f_n^x> - P_b(t, x, y))^2 dmu_n(y)`.
    ///
    /// The pairing with `f_n^x` uses the atoms of the eigen system inside `D_n^0(x)`.
    pub fn delta_approx_error(&self, spec: &ValidatedIfs<T>, t: T, x: T, n: usize) -> Result<T> {
        Self::check_time(t)?;
        let approx = neighborhood(spec, x, n)?;
        let nodes = &self.eigen.nodes;
        let masses = &self.eigen.masses;
        let mut atoms = Vec::new();
        for &(lo, hi) in &approx.support_intervals {
            let tol = T::rel_tol() * (hi - lo);
            let start = nodes.partition_point(|&p| p < lo - tol);
            let end = nodes.partition_point(|&p| p < hi - tol);
            atoms.extend(start..end);
        }
        let mass: T = atoms.iter().map(|&j| masses[j]).sum();
        if mass <= T::zero() {
            return Err(Error::NotInSupport {
                x: x.to_f64_lossy(),
                level: n,
            });
        }
        let sx = self.eigen.stencil(x);
        Ok(self
            .modes()
            .map(|(l, phi)| {
                let avg = atoms.iter().map(|&j| phi[j] * masses[j]).sum::<T>() / mass;
                let d = sine_factor(l, t) * (avg - apply_stencil(&sx, phi));
                d * d
            })
            .sum())
    }

    /// Errors over `levels` and the slope of `log error` against `n`.
    pub fn delta_decay_fit(
        &self,
        spec: &ValidatedIfs<T>,
        t: T,
        x: T,
        levels: std::ops::RangeInclusive<usize>,
    ) -> Result<DeltaDecay<T>> {
        let mut out = DeltaDecay {
            levels: Vec::new(),
            errors: Vec::new(),
            slope: T::zero(),
            reference: spec.r_max().ln(),
        };
        for n in levels {
            out.levels.push(n);
            out.errors.push(self.delta_approx_error(spec, t, x, n)?);
        }
        if out.levels.len() < 2 {
            return Err(Error::InsufficientScales {
                found: out.levels.len(),
                needed: 2,
            });
        }
        let xs: Vec<T> = out.levels.iter().map(|&n| T::of_usize(n)).collect();
        let ys: Vec<T> = out.errors.iter().map(|e| e.ln()).collect();
        out.slope = ols(&xs, &ys).1;
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaDecay<T> {
    pub levels: Vec<usize>,
    pub errors: Vec<T>,
    /// Fitted slope of `log error` in `n`.
    pub slope: T,
    /// `log r_max`.
    pub reference: T,
}
