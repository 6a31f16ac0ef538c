use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Multiplicative noise coefficient `f(u)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Drift<T> {
    Zero,
    Constant { value: T },
    Linear { lambda: T },
    /// `max(min(lambda u, bound), -bound)`.
    Bounded { lambda: T, bound: T },
    /// Piecewise-linear through `(u, f)` with constant extension.
    Table { u: Vec<T>, f: Vec<T> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftSpec<T> {
    pub drift: Drift<T>,
    pub lipschitz: T,
    /// `|f(u)| <= growth (1 + |u|)`.
    pub growth: T,
}

impl<T: Scalar> Drift<T> {
    pub fn eval(&self, u: T) -> T {
        match self {
            Drift::Zero => T::zero(),
            Drift::Constant { value } => *value,
            Drift::Linear { lambda } => *lambda * u,
            Drift::Bounded { lambda, bound } => (*lambda * u).min(*bound).max(-*bound),
            Drift::Table { u: us, f } => {
                if u <= us[0] {
                    return f[0];
                }
                let last = us.len() - 1;
                if u >= us[last] {
                    return f[last];
                }
                let i = us.partition_point(|&p| p <= u) - 1;
                let t = (u - us[i]) / (us[i + 1] - us[i]);
                f[i] + t * (f[i + 1] - f[i])
            }
        }
    }

    /// Whether `f` ignores the solution value.
    pub fn is_state_independent(&self) -> bool {
        matches!(self, Drift::Zero | Drift::Constant { .. })
    }

    fn lipschitz(&self) -> T {
        match self {
            Drift::Zero | Drift::Constant { .. } => T::zero(),
            Drift::Linear { lambda } | Drift::Bounded { lambda, .. } => lambda.abs(),
            Drift::Table { u, f } => u
                .windows(2)
                .zip(f.windows(2))
                .map(|(a, b)| ((b[1] - b[0]) / (a[1] - a[0])).abs())
                .fold(T::zero(), T::max),
        }
    }

    fn growth(&self, lipschitz: T) -> T {
        match self {
            Drift::Zero => T::zero(),
            Drift::Constant { value } => value.abs(),
            Drift::Linear { lambda } => lambda.abs(),
            Drift::Bounded { lambda, bound } => lambda.abs().min(*bound),
            Drift::Table { u, f } => (f[0].abs() + lipschitz * u[0].abs()).max(lipschitz),
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = |v: &T| v.is_finite();
        match self {
            Drift::Zero => Ok(()),
            Drift::Constant { value } if finite(value) => Ok(()),
            Drift::Linear { lambda } if finite(lambda) => Ok(()),
            Drift::Bounded { lambda, bound } if finite(lambda) && finite(bound) && *bound >= T::zero() => Ok(()),
            Drift::Table { u, f } => {
                if u.len() < 2 || u.len() != f.len() {
                    return Err(Error::InvalidInput("drift table needs at least two (u, f) pairs".into()));
                }
                if !u.windows(2).all(|w| w[0] < w[1]) || !u.iter().chain(f).all(finite) {
                    return Err(Error::InvalidInput("drift table abscissae must be finite and increasing".into()));
                }
                Ok(())
            }
            _ => Err(Error::InvalidInput(format!("invalid drift parameters: {self:?}"))),
        }
    }
}

impl<T: Scalar> DriftSpec<T> {
    /// Derives the Lipschitz and growth constants from the coefficient.
    pub fn new(drift: Drift<T>) -> Result<Self> {
        drift.validate()?;
        let lipschitz = drift.lipschitz();
        let growth = drift.growth(lipschitz);
        Ok(Self {
            drift,
            lipschitz,
            growth,
        })
    }

    /// Uses a declared Lipschitz constant after checking it against difference quotients.
    pub fn with_lipschitz(drift: Drift<T>, lipschitz: T) -> Result<Self> {
        let mut spec = Self::new(drift)?;
        let observed = spec.sampled_lipschitz(T::of(-100.0), T::of(100.0), 4001);
        if observed > lipschitz * (T::one() + T::rel_tol()) + T::rel_tol() {
            return Err(Error::InvalidInput(format!(
                "declared Lipschitz constant {lipschitz} is below the sampled value {observed}"
            )));
        }
        spec.lipschitz = lipschitz;
        spec.growth = spec.drift.growth(lipschitz);
        Ok(spec)
    }

    pub fn eval(&self, u: T) -> T {
        self.drift.eval(u)
    }

    /// Largest difference quotient over an even grid on `[lo, hi]`.
    pub fn sampled_lipschitz(&self, lo: T, hi: T, points: usize) -> T {
        let h = (hi - lo) / T::of_usize(points - 1);
        (0..points - 1)
            .map(|i| {
                let a = lo + T::of_usize(i) * h;
                ((self.eval(a + h) - self.eval(a)) / h).abs()
            })
            .fold(T::zero(), T::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluations() {
        assert_eq!(Drift::Zero.eval(3.0), 0.0);
        assert_eq!(Drift::Constant { value: 1.0 }.eval(3.0), 1.0);
        assert_eq!(Drift::Linear { lambda: 5.0 }.eval(2.0), 10.0);
        let b = Drift::Bounded { lambda: 2.0, bound: 1.0 };
        assert_eq!((b.eval(0.25), b.eval(3.0), b.eval(-3.0)), (0.5, 1.0, -1.0));
        let t = Drift::Table {
            u: vec![0.0, 1.0, 3.0],
            f: vec![1.0, 2.0, 0.0],
        };
        assert_eq!((t.eval(-1.0), t.eval(0.5), t.eval(2.0), t.eval(9.0)), (1.0, 1.5, 1.0, 0.0));
    }

    #[test]
    fn constants_dominate_samples() {
        for d in [
            Drift::<f64>::Linear { lambda: -5.0 },
            Drift::Bounded { lambda: 3.0, bound: 2.0 },
            Drift::Table {
                u: vec![-1.0, 0.0, 2.0],
                f: vec![0.0, 4.0, 3.0],
            },
        ] {
            let s = DriftSpec::new(d).unwrap();
            assert!(s.sampled_lipschitz(-10.0, 10.0, 2001) <= s.lipschitz * (1.0 + 1e-9));
            for u in [-50.0, -1.0, 0.0, 0.3, 7.0] {
                assert!(s.eval(u).abs() <= s.growth * (1.0 + u.abs()) + 1e-12);
            }
        }
    }

    #[test]
    fn declared_constant_checked() {
        assert!(DriftSpec::with_lipschitz(Drift::Linear { lambda: 2.0 }, 1.0).is_err());
        assert_eq!(DriftSpec::with_lipschitz(Drift::Linear { lambda: 2.0 }, 3.0).unwrap().lipschitz, 3.0);
        assert!(DriftSpec::new(Drift::Table { u: vec![1.0, 0.0], f: vec![0.0, 0.0] }).is_err());
    }
}
