use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAX_SWEEPS: usize = 60;

/// Eigenpairs of a symmetric tridiagonal matrix.
#[derive(Debug, Clone)]
pub struct TridiagonalEigen<T> {
    /// Ascending eigenvalues.
    pub values: Vec<T>,
    /// Row `k` holds the unit eigenvector for `values[k]`, flattened `n * n`.
    pub vectors: Vec<T>,
    pub n: usize,
}

impl<T: Scalar> TridiagonalEigen<T> {
    pub fn vector(&self, k: usize) -> &[T] {
        &self.vectors[k * self.n..(k + 1) * self.n]
    }
}

/// Implicit-shift QL on the matrix with diagonal `diag` and off-diagonal `off`.
pub fn symmetric_tridiagonal_eigen<T: Scalar>(diag: &[T], off: &[T]) -> Result<TridiagonalEigen<T>> {
    let n = diag.len();
    if n == 0 {
        return Err(Error::InvalidInput("empty tridiagonal matrix".into()));
    }
    if off.len() + 1 != n {
        return Err(Error::InvalidInput(format!(
            "off-diagonal has length {}, expected {}",
            off.len(),
            n - 1
        )));
    }
    let mut d = diag.to_vec();
    let mut e: Vec<T> = off.iter().copied().chain(std::iter::once(T::zero())).collect();
    // vt[i * n + k] is component k of the i-th Givens-accumulated column.
    let mut vt = vec![T::zero(); n * n];
    for i in 0..n {
        vt[i * n + i] = T::one();
    }
    let two = T::of(2.0);
    let eps = T::epsilon();
    let mut f = T::zero();
    let mut tst1 = T::zero();

    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_SWEEPS {
                    return Err(Error::Convergence {
                        index: l,
                        iterations: MAX_SWEEPS,
                    });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di = *di - h;
                }
                f = f + h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (lo, hi) = vt.split_at_mut((i + 1) * n);
                    let vi = &mut lo[i * n..];
                    let vi1 = &mut hi[..n];
                    for (a, b) in vi.iter_mut().zip(vi1.iter_mut()) {
                        let h = *b;
                        *b = s * *a + c * h;
                        *a = c * *a - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] = d[l] + f;
        e[l] = T::zero();
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| d[i]).collect();
    let mut vectors = Vec::with_capacity(n * n);
    for &i in &order {
        vectors.extend_from_slice(&vt[i * n..(i + 1) * n]);
    }
    Ok(TridiagonalEigen { values, vectors, n })
}
