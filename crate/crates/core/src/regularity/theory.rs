use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{compute_exponents, validate_ifs, Boundary, ExponentSet, IfsSpec};
use crate::scalar::Scalar;

/// Hölder exponents predicted for moment order `q` (which may be infinite).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictedExponents<T> {
    pub spatial: T,
    pub temporal: T,
}

/// `spatial = 1/2 - 1/q`, `temporal = 1/(d_H + 1 + log nu_min / log r_max) - 1/q`.
///
/// Orders below 2 are rejected along with orders at or below the temporal threshold.
pub fn predicted_exponents<T: Scalar>(exponents: &ExponentSet<T>, q: T) -> Result<PredictedExponents<T>> {
    let denominator = exponents.temporal_denominator();
    let threshold = denominator.recip().max(T::of(2.0));
    if q.is_nan() || q < T::of(2.0) || q <= denominator.recip() {
        return Err(Error::Threshold {
            q: q.to_f64_lossy(),
            threshold: threshold.to_f64_lossy(),
        });
    }
    let inv_q = q.recip();
    Ok(PredictedExponents {
        spatial: T::of(0.5) - inv_q,
        temporal: denominator.recip() - inv_q,
    })
}

/// Both sides of `(d_H + 1 + log nu_min / log r_max)^{-1} <= 2 - (2 + delta) gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck<T> {
    pub stochastic: T,
    pub deterministic: T,
    /// `deterministic - stochastic`.
    pub margin: T,
    pub holds: bool,
}

pub fn exponent_inequality_check<T: Scalar>(exponents: &ExponentSet<T>) -> InequalityCheck<T> {
    let stochastic = exponents.temporal_denominator().recip();
    let deterministic = T::of(2.0) - (T::of(2.0) + exponents.delta) * exponents.gamma;
    let margin = deterministic - stochastic;
    InequalityCheck {
        stochastic,
        deterministic,
        margin,
        holds: margin >= -T::of(1e-12),
    }
}

/// `sum_{k >= 1} min(k^{a-1}, t k^{b-1})`, summed directly past the crossover and
/// closed with an Euler-Maclaurin tail.
pub fn summation_series(a: f64, b: f64, t: f64) -> Result<f64> {
    if !(a < 0.0 && b >= 0.0 && t > 0.0) {
        return Err(Error::InvalidInput(format!(
            "need a < 0 <= b and t > 0, got a = {a}, b = {b}, t = {t}"
        )));
    }
    let crossover = t.powf(1.0 / (a - b));
    let n = (4.0 * crossover).ceil().max(1000.0) as u64;
    let direct: f64 = (1..=n).map(|k| summation_term(a, b, t, k)).sum();
    let nf = n as f64;
    let tail = -nf.powf(a) / a - 0.5 * nf.powf(a - 1.0) - (a - 1.0) * nf.powf(a - 2.0) / 12.0;
    Ok(direct + tail)
}

fn summation_term(a: f64, b: f64, t: f64, k: u64) -> f64 {
    let k = k as f64;
    k.powf(a - 1.0).min(t * k.powf(b - 1.0))
}

/// Partial sum over `k <= terms`.
pub fn summation_partial(a: f64, b: f64, t: f64, terms: u64) -> f64 {
    (1..=terms).map(|k| summation_term(a, b, t, k)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummationCheck {
    /// `sup_t sum * t^{a / (b - a)}` over the grid.
    pub sup_ratio: f64,
    pub argmax_t: f64,
}

pub fn summation_bound_check(a: f64, b: f64, t_grid: &[f64]) -> Result<SummationCheck> {
    let mut best = SummationCheck {
        sup_ratio: f64::NEG_INFINITY,
        argmax_t: f64::NAN,
    };
    for &t in t_grid {
        let r = summation_series(a, b, t)? * t.powf(a / (b - a));
        if r > best.sup_ratio {
            best = SummationCheck { sup_ratio: r, argmax_t: t };
        }
    }
    if !best.sup_ratio.is_finite() {
        return Err(Error::InvalidInput("empty or degenerate t grid".into()));
    }
    Ok(best)
}

/// Logarithmically spaced grid with `points` nodes on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1).max(1) as f64).exp())
        .collect()
}

/// Row of the natural-measure sweep: symmetric two-map Cantor sets with ratio `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionRow {
    pub ratio: f64,
    pub d_h: f64,
    pub spatial: f64,
    pub temporal: f64,
}

/// Limiting exponents across symmetric Cantor sets with natural weights.
pub fn natural_family_sweep(ratios: &[f64]) -> Result<Vec<DimensionRow>> {
    ratios
        .iter()
        .map(|&r| {
            let spec = validate_ifs(IfsSpec::new(&[r, r], &[0.0, 1.0 - r], &[0.5, 0.5], Boundary::Dirichlet))?;
            let ex = compute_exponents(&spec);
            let p = predicted_exponents(&ex, f64::INFINITY)?;
            Ok(DimensionRow {
                ratio: r,
                d_h: ex.d_h,
                spatial: p.spatial,
                temporal: p.temporal,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightRow {
    pub mu_min: f64,
    pub temporal_exponent: f64,
}

/// Limiting temporal exponent on the middle-third Cantor set with weights `(mu_min, 1 - mu_min)`.
pub fn cantor_weight_sweep(mu_mins: &[f64]) -> Result<Vec<WeightRow>> {
    mu_mins
        .iter()
        .map(|&m| {
            let spec = validate_ifs(IfsSpec::cantor_weighted(m, Boundary::Dirichlet))?;
            let p = predicted_exponents(&compute_exponents(&spec), f64::INFINITY)?;
            Ok(WeightRow {
                mu_min: m,
                temporal_exponent: p.temporal,
            })
        })
        .collect()
}
