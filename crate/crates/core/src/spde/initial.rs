use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectral::{sine_factor, EigenSystem};
use crate::stats::ols;

/// Modal coefficients `u_{0,k}` and `u_{1,k}` of the initial position and velocity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitialData<T> {
    pub u0: Vec<T>,
    pub u1: Vec<T>,
}

/// Summability sums and fitted decay of the coefficients.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionDiagnostics<T> {
    /// `sum_k lambda_k^2 u_{0,k}^2`.
    pub position_energy: T,
    /// `sum_k lambda_k u_{1,k}^2`.
    pub velocity_energy: T,
    /// Slope of `log |u_{0,k}|` against `log k`, if enough coefficients are nonzero.
    pub u0_decay: Option<T>,
    pub u1_decay: Option<T>,
}

impl<T: Scalar> InitialData<T> {
    pub fn zero(k_count: usize) -> Self {
        Self {
            u0: vec![T::zero(); k_count],
            u1: vec![T::zero(); k_count],
        }
    }

    /// Coefficient lists, zero-padded or truncated to `k_count` modes.
    pub fn from_coefficients(u0: &[T], u1: &[T], k_count: usize) -> Self {
        let fit = |c: &[T]| (0..k_count).map(|k| c.get(k).copied().unwrap_or(T::zero())).collect();
        Self {
            u0: fit(u0),
            u1: fit(u1),
        }
    }

    pub fn diagnostics(&self, eigen: &EigenSystem<T>) -> ProjectionDiagnostics<T> {
        let l = &eigen.eigenvalues;
        ProjectionDiagnostics {
            position_energy: l.iter().zip(&self.u0).map(|(&l, &c)| l * l * c * c).sum(),
            velocity_energy: l.iter().zip(&self.u1).map(|(&l, &c)| l * c * c).sum(),
            u0_decay: decay(&self.u0),
            u1_decay: decay(&self.u1),
        }
    }

    pub fn validate(&self, eigen: &EigenSystem<T>) -> Result<()> {
        if self.u0.len() != eigen.k_count() || self.u1.len() != eigen.k_count() {
            return Err(Error::InvalidInput(format!(
                "initial data has {} and {} coefficients for {} modes",
                self.u0.len(),
                self.u1.len(),
                eigen.k_count()
            )));
        }
        if !self.u0.iter().chain(&self.u1).all(|c| c.is_finite()) {
            return Err(Error::InvalidInput("initial coefficients must be finite".into()));
        }
        Ok(())
    }
}

fn decay<T: Scalar>(c: &[T]) -> Option<T> {
    let floor = c.iter().fold(T::zero(), |a, &b| a.max(b.abs())) * T::rel_tol();
    let (xs, ys): (Vec<T>, Vec<T>) = c
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > floor)
        .map(|(k, v)| (T::of_usize(k + 1).ln(), v.abs().ln()))
        .unzip();
    (xs.len() >= 3).then(|| ols(&xs, &ys).1)
}

/// `u_{i,k} = sum_j m_j u_i(x_j) phi_k(x_j)`.
pub fn project_initial_data<T: Scalar>(
    u0: impl Fn(T) -> T,
    u1: impl Fn(T) -> T,
    eigen: &EigenSystem<T>,
) -> (InitialData<T>, ProjectionDiagnostics<T>) {
    let project = |f: &dyn Fn(T) -> T| -> Vec<T> {
        let values: Vec<T> = eigen.nodes.iter().zip(&eigen.masses).map(|(&x, &m)| m * f(x)).collect();
        eigen
            .eigenvectors
            .iter()
            .map(|phi| phi.iter().zip(&values).map(|(&p, &v)| p * v).sum())
            .collect()
    };
    let data = InitialData {
        u0: project(&u0),
        u1: project(&u1),
    };
    let diag = data.diagnostics(eigen);
    (data, diag)
}

/// `(v2, v3)`: the free evolution of the initial velocity and position at `(t, x)`.
pub fn deterministic_part<T: Scalar>(eigen: &EigenSystem<T>, init: &InitialData<T>, t: T, x: T) -> Result<(T, T)> {
    if t < T::zero() {
        return Err(Error::InvalidInput(format!("time must be non-negative, got {t}")));
    }
    init.validate(eigen)?;
    let s = eigen.stencil(x);
    let mut v2 = T::zero();
    let mut v3 = T::zero();
    for (k, &l) in eigen.eigenvalues.iter().enumerate() {
        let phi = s[0].1 * eigen.eigenvectors[k][s[0].0] + s[1].1 * eigen.eigenvectors[k][s[1].0];
        let cos = if l <= T::zero() { T::one() } else { (l.sqrt() * t).cos() };
        v2 = v2 + sine_factor(l, t) * init.u1[k] * phi;
        v3 = v3 + cos * init.u0[k] * phi;
    }
    Ok((v2, v3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{discrete_measure, Boundary, validate_ifs, IfsSpec};
    use crate::spectral::{assemble_string, eigendecompose};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn eigen(spec: IfsSpec<f64>, level: usize) -> EigenSystem<f64> {
        let b = spec.boundary;
        let dm = discrete_measure(&validate_ifs(spec).unwrap(), level).unwrap();
        eigendecompose(&assemble_string(&dm, b).unwrap(), usize::MAX).unwrap()
    }

    #[test]
    fn eigenfunction_projects_to_unit_vector() {
        let e = eigen(IfsSpec::cantor(Boundary::Dirichlet), 5);
        let (d, _) = project_initial_data(|x| e.eval(2, x), |_| 0.0, &e);
        for (k, &c) in d.u0.iter().enumerate() {
            assert_abs_diff_eq!(c, if k == 2 { 1.0 } else { 0.0 }, epsilon = 1e-8);
        }
    }

    #[test]
    fn constant_neumann_is_zero_mode() {
        let e = eigen(IfsSpec::cantor(Boundary::Neumann), 5);
        let (d, _) = project_initial_data(|_| 1.0, |_| 0.0, &e);
        assert_abs_diff_eq!(d.u0[0], 1.0, epsilon = 1e-12);
        assert!(d.u0[1..].iter().all(|c| c.abs() < 1e-8));
        for t in [0.0, 0.4, 2.0] {
            for x in [0.0, 0.3, 2.0 / 3.0] {
                let (v2, v3) = deterministic_part(&e, &d, t, x).unwrap();
                assert_abs_diff_eq!(v2, 0.0, epsilon = 1e-12);
                assert_abs_diff_eq!(v3, 1.0, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn fourier_sine_coefficients() {
        let e = eigen(IfsSpec::lebesgue(Boundary::Dirichlet), 9);
        let (d, diag) = project_initial_data(|_| 1.0, |_| 0.0, &e);
        for k in 1..=9usize {
            let kp = k as f64 * PI;
            let exact = 2f64.sqrt() * (1.0 - kp.cos()) / kp;
            assert_abs_diff_eq!(d.u0[k - 1], exact, epsilon = 0.02);
        }
        assert!(diag.position_energy.is_finite());
    }

    #[test]
    fn velocity_mode_evolves_classically() {
        let e = eigen(IfsSpec::lebesgue(Boundary::Dirichlet), 9);
        let (d, _) = project_initial_data(|_| 0.0, |x| e.eval(0, x), &e);
        for &(t, x) in &[(0.3, 0.5), (0.7, 0.2), (1.4, 0.8)] {
            let (v2, v3) = deterministic_part(&e, &d, t, x).unwrap();
            let exact = (PI * t).sin() / PI * 2f64.sqrt() * (PI * x).sin();
            assert!((v2 - exact).abs() <= 0.01 * exact.abs().max(1e-3));
            assert_abs_diff_eq!(v3, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn initial_position_recovered() {
        let e = eigen(IfsSpec::cantor(Boundary::Dirichlet), 6);
        let f = |x: f64| x * (1.0 - x);
        let (d, _) = project_initial_data(f, |_| 0.0, &e);
        for &x in e.nodes.iter().step_by(9) {
            let (v2, v3) = deterministic_part(&e, &d, 0.0, x).unwrap();
            assert_eq!(v2, 0.0);
            assert_abs_diff_eq!(v3, f(x), epsilon = 1e-10);
        }
    }
}
