use std::ops::Range;

use crate::error::{Error, Result};
use crate::geometry::{Boundary, DiscreteMeasure};
use crate::scalar::Scalar;

/// Finite string with point masses at the atoms of a discrete measure.
///
/// `diag` and `off` hold the stiffness matrix `K` restricted to the free nodes.
/// Under Dirichlet conditions nodes sitting on `0` or `1` are clamped and excluded.
#[derive(Debug, Clone, PartialEq)]
pub struct StieltjesString<T> {
    pub nodes: Vec<T>,
    pub masses: Vec<T>,
    pub boundary: Boundary,
    pub free: Range<usize>,
    pub diag: Vec<T>,
    pub off: Vec<T>,
}

impl<T: Scalar> StieltjesString<T> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn free_len(&self) -> usize {
        self.free.len()
    }

    pub fn free_masses(&self) -> &[T] {
        &self.masses[self.free.clone()]
    }

    /// `K v` for `v` indexed by free nodes.
    pub fn apply_stiffness(&self, v: &[T]) -> Vec<T> {
        let n = self.free_len();
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * v[i];
                if i > 0 {
                    acc = acc + self.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    acc = acc + self.off[i] * v[i + 1];
                }
                acc
            })
            .collect()
    }

    /// `v^T K v` for `v` indexed by free nodes.
    pub fn energy(&self, v: &[T]) -> T {
        self.apply_stiffness(v).iter().zip(v).map(|(&a, &b)| a * b).sum()
    }
}

pub fn assemble_string<T: Scalar>(dm: &DiscreteMeasure<T>, boundary: Boundary) -> Result<StieltjesString<T>> {
    let nodes = dm.positions.clone();
    let masses = dm.masses.clone();
    let total = nodes.len();
    if total == 0 {
        return Err(Error::InvalidInput("string needs at least one atom".into()));
    }
    for (i, w) in nodes.windows(2).enumerate() {
        if w[1] <= w[0] {
            return Err(Error::DegenerateGap {
                index: i,
                x: w[0].to_f64_lossy(),
            });
        }
    }
    let tol = T::unit_tol();
    let free = match boundary {
        Boundary::Neumann => 0..total,
        Boundary::Dirichlet => {
            let start = usize::from(nodes[0] <= tol);
            let end = if nodes[total - 1] >= T::one() - tol { total - 1 } else { total };
            if start >= end {
                return Err(Error::InvalidInput("Dirichlet string has no free atoms".into()));
            }
            start..end
        }
    };
    let gap = |i: usize| T::one() / (nodes[i + 1] - nodes[i]);
    let mut diag = Vec::with_capacity(free.len());
    for i in free.clone() {
        let mut d = T::zero();
        if i > 0 {
            d = d + gap(i - 1);
        } else if boundary == Boundary::Dirichlet {
            d = d + T::one() / nodes[0];
        }
        if i + 1 < total {
            d = d + gap(i);
        } else if boundary == Boundary::Dirichlet {
            d = d + T::one() / (T::one() - nodes[i]);
        }
        diag.push(d);
    }
    let off = free.clone().skip(1).map(|i| -gap(i - 1)).collect();
    Ok(StieltjesString {
        nodes,
        masses,
        boundary,
        free,
        diag,
        off,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{discrete_measure, validate_ifs, IfsSpec};
    use approx::assert_abs_diff_eq;

    fn dm(spec: IfsSpec<f64>, level: usize) -> DiscreteMeasure<f64> {
        discrete_measure(&validate_ifs(spec).unwrap(), level).unwrap()
    }

    #[test]
    fn neumann_constant_in_kernel() {
        let d = dm(
            IfsSpec::new(&[0.3, 0.2, 0.1], &[0.0, 0.5, 0.9], &[0.2, 0.3, 0.5], Boundary::Neumann),
            4,
        );
        let s = assemble_string(&d, Boundary::Neumann).unwrap();
        let k1 = s.apply_stiffness(&vec![1.0; s.free_len()]);
        let scale = s.diag.iter().fold(0.0f64, |a, &b| a.max(b));
        assert!(k1.iter().all(|v| v.abs() <= 1e-12 * scale));
    }

    #[test]
    fn uniform_dirichlet_grid() {
        let d = dm(IfsSpec::lebesgue(Boundary::Dirichlet), 3);
        let s = assemble_string(&d, Boundary::Dirichlet).unwrap();
        assert_eq!(s.free, 1..8);
        assert!(s.diag.iter().all(|&v| (v - 16.0).abs() < 1e-12));
        assert!(s.off.iter().all(|&v| (v + 8.0).abs() < 1e-12));
    }

    #[test]
    fn cantor_level_one_dirichlet() {
        let d = dm(IfsSpec::cantor(Boundary::Dirichlet), 1);
        let s = assemble_string(&d, Boundary::Dirichlet).unwrap();
        assert_eq!(s.free, 1..2);
        // 1 / (2/3 - 0) + 1 / (1 - 2/3)
        assert_abs_diff_eq!(s.diag[0], 4.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s.diag[0] / s.masses[1], 9.0, epsilon = 1e-12);
    }

    #[test]
    fn coincident_nodes_rejected() {
        let d = DiscreteMeasure {
            level: 1,
            positions: vec![0.0, 0.5, 0.5],
            masses: vec![0.2, 0.4, 0.4],
            words: Vec::new(),
        };
        assert!(matches!(
            assemble_string(&d, Boundary::Neumann),
            Err(Error::DegenerateGap { index: 1, .. })
        ));
    }
}
