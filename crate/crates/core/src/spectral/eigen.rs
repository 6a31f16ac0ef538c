use serde::Serialize;

use super::string::StieltjesString;
use super::tridiag::symmetric_tridiagonal_eigen;
use crate::error::{Error, Result};
use crate::geometry::{Boundary, ExponentSet};
use crate::scalar::Scalar;
use crate::stats::ols;

/// Ascending eigenpairs of the string, normalised in `L^2(mu_n)`.
///
/// Modes are indexed from zero. `eigenvectors[k][j]` is `phi_k` at node `j`,
/// including clamped nodes where it vanishes.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem<T> {
    pub eigenvalues: Vec<T>,
    pub eigenvectors: Vec<Vec<T>>,
    pub nodes: Vec<T>,
    pub masses: Vec<T>,
    pub boundary: Boundary,
}

/// Interpolation weights of at most two nodes.
pub type Stencil<T> = [(usize, T); 2];

impl<T: Scalar> EigenSystem<T> {
    pub fn k_count(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Weights for evaluating a piecewise-linear node function at `x`.
    pub fn stencil(&self, x: T) -> Stencil<T> {
        node_stencil(&self.nodes, self.boundary, x)
    }

    /// `phi_k(x)` with the piecewise-linear extension between and beyond atoms.
    pub fn eval(&self, k: usize, x: T) -> T {
        apply_stencil(&self.stencil(x), &self.eigenvectors[k])
    }

    pub fn supnorm(&self, k: usize) -> T {
        self.eigenvectors[k].iter().fold(T::zero(), |a, &b| a.max(b.abs()))
    }

    /// `sum_j m_j phi_i(x_j) phi_k(x_j)`.
    pub fn inner(&self, i: usize, k: usize) -> T {
        self.eigenvectors[i]
            .iter()
            .zip(&self.eigenvectors[k])
            .zip(&self.masses)
            .map(|((&a, &b), &m)| a * b * m)
            .sum()
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn orthonormality_defect(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.k_count() {
            for k in i..self.k_count() {
                let target = if i == k { T::one() } else { T::zero() };
                worst = worst.max((self.inner(i, k) - target).abs());
            }
        }
        worst
    }

    /// `max_k ||K phi_k - lambda_k M phi_k||_inf / lambda_max`.
    pub fn relative_residual(&self, string: &StieltjesString<T>) -> T {
        let scale = self.eigenvalues.last().copied().unwrap_or(T::one()).abs().max(T::one());
        let free = string.free.clone();
        let mut worst = T::zero();
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let phi = &self.eigenvectors[k][free.clone()];
            let kphi = string.apply_stiffness(phi);
            for ((&a, &p), &m) in kphi.iter().zip(phi).zip(string.free_masses()) {
                worst = worst.max((a - lambda * m * p).abs() / scale);
            }
        }
        worst
    }

    /// Smallest eigenvalue that is not the Neumann zero mode.
    pub fn first_positive(&self) -> Option<T> {
        let skip = usize::from(self.boundary == Boundary::Neumann);
        self.eigenvalues.get(skip).copied()
    }

    /// Warning text if the first positive eigenvalue does not exceed one.
    pub fn spectral_gap_warning(&self) -> Option<String> {
        let l = self.first_positive()?;
        (l <= T::one()).then(|| format!("first positive eigenvalue {l} does not exceed 1"))
    }
}

/// Relative size below which an atom value counts as zero for the sign convention.
pub fn sign_threshold<T: Scalar>() -> T {
    T::epsilon().sqrt()
}

pub(crate) fn node_stencil<T: Scalar>(nodes: &[T], boundary: Boundary, x: T) -> Stencil<T> {
    let n = nodes.len();
    let zero = T::zero();
    let first = nodes[0];
    let last = nodes[n - 1];
    if x <= first {
        let w = match boundary {
            Boundary::Neumann => T::one(),
            Boundary::Dirichlet if first > zero => (x / first).max(zero),
            Boundary::Dirichlet => zero,
        };
        return [(0, w), (0, zero)];
    }
    if x >= last {
        let w = match boundary {
            Boundary::Neumann => T::one(),
            Boundary::Dirichlet if last < T::one() => ((T::one() - x) / (T::one() - last)).max(zero),
            Boundary::Dirichlet => zero,
        };
        return [(n - 1, w), (n - 1, zero)];
    }
    let i = nodes.partition_point(|&p| p <= x) - 1;
    let t = (x - nodes[i]) / (nodes[i + 1] - nodes[i]);
    [(i, T::one() - t), (i + 1, t)]
}

pub(crate) fn apply_stencil<T: Scalar>(s: &Stencil<T>, values: &[T]) -> T {
    s[0].1 * values[s[0].0] + s[1].1 * values[s[1].0]
}

/// Solves `K phi = lambda M phi` and keeps the lowest `k_max` pairs.
pub fn eigendecompose<T: Scalar>(string: &StieltjesString<T>, k_max: usize) -> Result<EigenSystem<T>> {
    if k_max == 0 {
        return Err(Error::InvalidInput("k_max must be positive".into()));
    }
    let masses = string.free_masses();
    if masses.iter().any(|&m| m <= T::zero()) {
        return Err(Error::InvalidInput("masses must be positive".into()));
    }
    let inv_sqrt: Vec<T> = masses.iter().map(|&m| T::one() / m.sqrt()).collect();
    let diag: Vec<T> = string.diag.iter().zip(&inv_sqrt).map(|(&d, &s)| d * s * s).collect();
    let off: Vec<T> = string
        .off
        .iter()
        .enumerate()
        .map(|(i, &o)| o * inv_sqrt[i] * inv_sqrt[i + 1])
        .collect();
    let eig = symmetric_tridiagonal_eigen(&diag, &off)?;
    let n = string.free_len();
    let keep = k_max.min(n);
    let total = string.len();
    let mut eigenvalues = Vec::with_capacity(keep);
    let mut eigenvectors = Vec::with_capacity(keep);
    for k in 0..keep {
        let mut phi = vec![T::zero(); total];
        if k == 0 && string.boundary == Boundary::Neumann {
            let norm = masses.iter().copied().sum::<T>().sqrt();
            phi.iter_mut().for_each(|p| *p = T::one() / norm);
            eigenvalues.push(T::zero());
        } else {
            for (j, (&v, &s)) in eig.vector(k).iter().zip(&inv_sqrt).enumerate() {
                phi[string.free.start + j] = v * s;
            }
            let peak = phi.iter().fold(T::zero(), |a, &b| a.max(b.abs()));
            let lead = phi.iter().copied().find(|p| p.abs() > peak * sign_threshold::<T>());
            if lead.is_some_and(|p| p < T::zero()) {
                phi.iter_mut().for_each(|p| *p = -*p);
            }
            eigenvalues.push(eig.values[k]);
        }
        eigenvectors.push(phi);
    }
    Ok(EigenSystem {
        eigenvalues,
        eigenvectors,
        nodes: string.nodes.clone(),
        masses: string.masses.clone(),
        boundary: string.boundary,
    })
}

/// Per-mode sup-norm data with the fitted growth exponent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupnormReport<T> {
    /// One-based mode numbers.
    pub modes: Vec<usize>,
    pub eigenvalues: Vec<T>,
    pub supnorms: Vec<T>,
    /// `||phi_k||_inf / lambda_k^(gamma delta / 2)`.
    pub ratios: Vec<T>,
    pub max_ratio: T,
    /// Slope of `log ||phi_k||_inf` against `log lambda_k`.
    pub slope: T,
    pub bound: T,
}

impl<T: Scalar> SupnormReport<T> {
    /// Whether the fitted slope stays below `bound + slack`.
    pub fn holds(&self, slack: T) -> bool {
        self.slope <= self.bound + slack
    }
}

/// Compares sup-norms to `lambda_k^(gamma delta / 2)` over the one-based modes in `modes`.
pub fn supnorm_growth_check<T: Scalar>(
    eigen: &EigenSystem<T>,
    exponents: &ExponentSet<T>,
    modes: std::ops::RangeInclusive<usize>,
) -> Result<SupnormReport<T>> {
    let bound = exponents.supnorm_exponent();
    let mut report = SupnormReport {
        modes: Vec::new(),
        eigenvalues: Vec::new(),
        supnorms: Vec::new(),
        ratios: Vec::new(),
        max_ratio: T::zero(),
        slope: T::zero(),
        bound,
    };
    for k in modes {
        if k == 0 || k > eigen.k_count() {
            continue;
        }
        let lambda = eigen.eigenvalues[k - 1];
        if lambda <= T::zero() {
            continue;
        }
        let sup = eigen.supnorm(k - 1);
        let ratio = sup / lambda.powf(bound);
        report.max_ratio = report.max_ratio.max(ratio);
        report.modes.push(k);
        report.eigenvalues.push(lambda);
        report.supnorms.push(sup);
        report.ratios.push(ratio);
    }
    if report.modes.len() < 3 {
        return Err(Error::InsufficientScales {
            found: report.modes.len(),
            needed: 3,
        });
    }
    let xs: Vec<T> = report.eigenvalues.iter().map(|l| l.ln()).collect();
    let ys: Vec<T> = report.supnorms.iter().map(|s| s.ln()).collect();
    report.slope = ols(&xs, &ys).1;
    Ok(report)
}

/// Fit of `log lambda_k` against `log k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeylFit<T> {
    pub slope: T,
    /// `max / min` of `lambda_k / k^(1/gamma)` over the fitted modes.
    pub band: T,
}

/// Weyl-type scaling of the eigenvalues over the one-based modes in `modes`.
pub fn eigenvalue_scaling<T: Scalar>(
    eigen: &EigenSystem<T>,
    gamma: T,
    modes: std::ops::RangeInclusive<usize>,
) -> Result<WeylFit<T>> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut lo = T::infinity();
    let mut hi = T::zero();
    for k in modes {
        if k == 0 || k > eigen.k_count() || eigen.eigenvalues[k - 1] <= T::zero() {
            continue;
        }
        let kt = T::of_usize(k);
        let lambda = eigen.eigenvalues[k - 1];
        xs.push(kt.ln());
        ys.push(lambda.ln());
        let r = lambda / kt.powf(T::one() / gamma);
        lo = lo.min(r);
        hi = hi.max(r);
    }
    if xs.len() < 3 {
        return Err(Error::InsufficientScales {
            found: xs.len(),
            needed: 3,
        });
    }
    Ok(WeylFit {
        slope: ols(&xs, &ys).1,
        band: hi / lo,
    })
}
