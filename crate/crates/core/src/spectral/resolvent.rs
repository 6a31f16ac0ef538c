use super::eigen::{apply_stencil, node_stencil, EigenSystem};
use super::string::StieltjesString;
use crate::error::{Error, Result};
use crate::geometry::Boundary;
use crate::scalar::Scalar;

/// `rho_lambda(x, y) = sum_k phi_k(x) phi_k(y) / (lambda + lambda_k)` over the retained modes.
pub fn resolvent_density<T: Scalar>(eigen: &EigenSystem<T>, lambda: T, x: T, y: T) -> Result<T> {
    check_lambda(lambda)?;
    let sx = eigen.stencil(x);
    let sy = eigen.stencil(y);
    Ok(eigen
        .eigenvalues
        .iter()
        .zip(&eigen.eigenvectors)
        .map(|(&l, phi)| apply_stencil(&sx, phi) * apply_stencil(&sy, phi) / (lambda + l))
        .sum())
}

fn check_lambda<T: Scalar>(lambda: T) -> Result<()> {
    if lambda > T::zero() && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("resolvent parameter must be positive, got {lambda}")))
    }
}

/// `(lambda M + K)^{-1}` on all nodes, zero on clamped nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolventMatrix<T> {
    pub lambda: T,
    pub nodes: Vec<T>,
    pub boundary: Boundary,
    /// Row-major `n * n`.
    pub values: Vec<T>,
}

impl<T: Scalar> ResolventMatrix<T> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn at(&self, i: usize, j: usize) -> T {
        self.values[i * self.nodes.len() + j]
    }

    /// Bilinear interpolation in the piecewise-linear node basis.
    pub fn eval(&self, x: T, y: T) -> T {
        let (x, y) = if x <= y { (x, y) } else { (y, x) };
        let sx = node_stencil(&self.nodes, self.boundary, x);
        let sy = node_stencil(&self.nodes, self.boundary, y);
        let mut acc = T::zero();
        for &(i, wi) in &sx {
            for &(j, wj) in &sy {
                acc = acc + wi * wj * self.at(i, j);
            }
        }
        acc
    }
}

/// Solves `(lambda M + K) G = I` column by column with the Thomas algorithm.
pub fn resolvent_matrix<T: Scalar>(string: &StieltjesString<T>, lambda: T) -> Result<ResolventMatrix<T>> {
    check_lambda(lambda)?;
    let n = string.free_len();
    let total = string.len();
    let diag: Vec<T> = string
        .diag
        .iter()
        .zip(string.free_masses())
        .map(|(&d, &m)| d + lambda * m)
        .collect();
    // Forward elimination shared by all right-hand sides.
    let mut pivots = Vec::with_capacity(n);
    let mut multipliers = Vec::with_capacity(n.saturating_sub(1));
    pivots.push(diag[0]);
    for i in 1..n {
        let prev = pivots[i - 1];
        if prev.abs() <= T::epsilon() * diag[i - 1].abs() {
            return Err(Error::Singular {
                row: i - 1,
                pivot: prev.to_f64_lossy(),
            });
        }
        let l = string.off[i - 1] / prev;
        multipliers.push(l);
        pivots.push(diag[i] - l * string.off[i - 1]);
    }
    if pivots[n - 1].abs() <= T::epsilon() * diag[n - 1].abs() {
        return Err(Error::Singular {
            row: n - 1,
            pivot: pivots[n - 1].to_f64_lossy(),
        });
    }
    let mut values = vec![T::zero(); total * total];
    let mut col = vec![T::zero(); n];
    for j in 0..n {
        col.iter_mut().for_each(|c| *c = T::zero());
        col[j] = T::one();
        for i in (j + 1)..n {
            col[i] = col[i] - multipliers[i - 1] * col[i - 1];
        }
        col[n - 1] = col[n - 1] / pivots[n - 1];
        for i in (0..n - 1).rev() {
            col[i] = (col[i] - string.off[i] * col[i + 1]) / pivots[i];
        }
        let gj = string.free.start + j;
        for (i, &c) in col.iter().enumerate() {
            values[(string.free.start + i) * total + gj] = c;
        }
    }
    // Symmetrise to make rho(x, y) = rho(y, x) exact.
    for i in 0..total {
        for j in (i + 1)..total {
            let avg = (values[i * total + j] + values[j * total + i]) / T::of(2.0);
            values[i * total + j] = avg;
            values[j * total + i] = avg;
        }
    }
    Ok(ResolventMatrix {
        lambda,
        nodes: string.nodes.clone(),
        boundary: string.boundary,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{discrete_measure, validate_ifs, IfsSpec};
    use crate::spectral::{assemble_string, eigendecompose};

    fn build(spec: IfsSpec<f64>, level: usize) -> (StieltjesString<f64>, EigenSystem<f64>) {
        let b = spec.boundary;
        let dm = discrete_measure(&validate_ifs(spec).unwrap(), level).unwrap();
        let s = assemble_string(&dm, b).unwrap();
        let e = eigendecompose(&s, usize::MAX).unwrap();
        (s, e)
    }

    #[test]
    fn expansion_matches_direct_solve() {
        for b in [Boundary::Neumann, Boundary::Dirichlet] {
            let (s, e) = build(
                IfsSpec::new(&[0.3, 0.2, 0.1], &[0.0, 0.5, 0.9], &[0.2, 0.3, 0.5], b),
                4,
            );
            let g = resolvent_matrix(&s, 1.0).unwrap();
            let scale = g.values.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
            for i in 0..s.len() {
                for j in 0..s.len() {
                    let d = resolvent_density(&e, 1.0, s.nodes[i], s.nodes[j]).unwrap();
                    assert!((d - g.at(i, j)).abs() <= 1e-8 * scale.max(1.0), "{b:?} {i} {j}");
                }
            }
        }
    }

    #[test]
    fn lebesgue_sinh_closed_form() {
        let (s, _) = build(IfsSpec::lebesgue(Boundary::Dirichlet), 8);
        let g = resolvent_matrix(&s, 1.0).unwrap();
        let exact = |x: f64, y: f64| x.min(y).sinh() * (1.0 - x.max(y)).sinh() / 1f64.sinh();
        for &(x, y) in &[(0.5, 0.5), (0.25, 0.75), (0.1, 0.3), (0.9, 0.2), (0.33, 0.61)] {
            let v = g.eval(x, y);
            assert!((v / exact(x, y) - 1.0).abs() < 0.01, "({x},{y}) {v}");
        }
    }

    #[test]
    fn symmetric_and_lipschitz() {
        let (s, _) = build(IfsSpec::cantor(Boundary::Dirichlet), 6);
        let g = resolvent_matrix(&s, 1.0).unwrap();
        let mut worst = 0.0f64;
        let mut state = 7u64;
        let mut u = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..2000 {
            let (x, y, z) = (u(), u(), u());
            assert_eq!(g.eval(x, y), g.eval(y, x));
            if (y - z).abs() > 1e-9 {
                worst = worst.max((g.eval(x, y) - g.eval(x, z)).abs() / (y - z).abs());
            }
        }
        // Green's function of -u'' has slope at most one.
        assert!(worst.is_finite() && worst <= 1.0 + 1e-9, "{worst}");
    }

    #[test]
    fn rejects_nonpositive_lambda() {
        let (s, e) = build(IfsSpec::cantor(Boundary::Neumann), 2);
        assert!(resolvent_matrix(&s, 0.0).is_err());
        assert!(resolvent_density(&e, -1.0, 0.0, 0.0).is_err());
    }
}
