use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ValidatedIfs;
use crate::scalar::Scalar;
use crate::spde::PathEnsemble;
use crate::stats::{grouped_jackknife, ols};

pub const JACKKNIFE_GROUPS: usize = 20;
const MIN_SCALES: usize = 4;

/// Two points of the attractor separated at one word level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SitePair<T> {
    pub level: usize,
    pub x: T,
    pub y: T,
}

/// Pairs `(S_w(b_1), S_w(b_N))` for words `w` of length `level - 1`, at most `per_level`
/// evenly strided words per level.
pub fn word_aligned_pairs<T: Scalar>(
    spec: &ValidatedIfs<T>,
    levels: std::ops::RangeInclusive<usize>,
    per_level: usize,
) -> Vec<SitePair<T>> {
    let first = spec.contractions[0].offset;
    let last = spec.contractions[spec.len() - 1].offset;
    let mut out = Vec::new();
    let mut layer = vec![(T::one(), T::zero())];
    let mut depth = 0;
    for level in levels {
        if level == 0 {
            continue;
        }
        while depth + 1 < level {
            layer = layer
                .iter()
                .flat_map(|&(a, c)| spec.contractions.iter().map(move |m| (a * m.ratio, c + a * m.offset)))
                .collect();
            depth += 1;
        }
        let stride = (layer.len() / per_level.max(1)).max(1);
        for &(a, c) in layer.iter().step_by(stride) {
            out.push(SitePair {
                level,
                x: c + a * first,
                y: c + a * last,
            });
        }
    }
    out
}

/// Distinct sites used by `pairs`, ascending.
pub fn pair_sites<T: Scalar>(pairs: &[SitePair<T>]) -> Vec<T> {
    let mut s: Vec<T> = pairs.iter().flat_map(|p| [p.x, p.y]).collect();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    s.dedup_by(|a, b| (*a - *b).abs() <= T::unit_tol());
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Space,
    Time,
}

/// Moment-scaling regression for one direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoelderReport<T> {
    pub direction: Direction,
    pub q: T,
    pub scales: Vec<T>,
    pub moments: Vec<T>,
    /// Fitted slope of `log moment` against `log scale`, divided by `q`.
    pub exponent: T,
    pub std_error: T,
    pub ci_low: T,
    pub ci_high: T,
    /// The exponent the moments should scale with (`q -> infinity` limit of the Hölder exponent).
    pub predicted: T,
    /// Whether `predicted` lies in the confidence interval.
    pub pass: bool,
}

impl<T: Scalar> HoelderReport<T> {
    fn from_groups(
        direction: Direction,
        q: T,
        scales: Vec<T>,
        group_sums: &[Vec<T>],
        group_sizes: &[usize],
        predicted: T,
    ) -> Result<Self> {
        if scales.len() < MIN_SCALES {
            return Err(Error::InsufficientScales {
                found: scales.len(),
                needed: MIN_SCALES,
            });
        }
        let xs: Vec<T> = scales.iter().map(|s| s.ln()).collect();
        let moments_without = |skip: Option<usize>| -> Vec<T> {
            let count: usize = group_sizes.iter().enumerate().filter(|(g, _)| Some(*g) != skip).map(|(_, &n)| n).sum();
            (0..scales.len())
                .map(|i| {
                    let s: T = group_sums.iter().enumerate().filter(|(g, _)| Some(*g) != skip).map(|(_, v)| v[i]).sum();
                    s / T::of_usize(count)
                })
                .collect()
        };
        let moments = moments_without(None);
        if moments.iter().any(|m| *m <= T::zero() || !m.is_finite()) {
            return Err(Error::InvalidInput("moments must be positive and finite".into()));
        }
        let est = grouped_jackknife(group_sums.len(), |skip| {
            let ys: Vec<T> = moments_without(skip).iter().map(|m| m.ln()).collect();
            ols(&xs, &ys).1 / q
        });
        let half = T::of(1.96) * est.std_error;
        Ok(Self {
            direction,
            q,
            scales,
            moments,
            exponent: est.value,
            std_error: est.std_error,
            ci_low: est.value - half,
            ci_high: est.value + half,
            predicted,
            pass: (est.value - predicted).abs() <= half,
        })
    }

    /// CSV with `#`-prefixed metadata lines and one `scale,moment` row per scale.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let dir = match self.direction {
            Direction::Space => "space",
            Direction::Time => "time",
        };
        let _ = writeln!(s, "# direction={dir}");
        for (k, v) in [
            ("q", self.q),
            ("exponent", self.exponent),
            ("std_error", self.std_error),
            ("ci_low", self.ci_low),
            ("ci_high", self.ci_high),
            ("predicted", self.predicted),
        ] {
            let _ = writeln!(s, "# {k}={v}");
        }
        let _ = writeln!(s, "# pass={}", self.pass);
        s.push_str("scale,moment\n");
        for (a, b) in self.scales.iter().zip(&self.moments) {
            let _ = writeln!(s, "{a},{b}");
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let bad = |what: &str| Error::InvalidInput(format!("malformed report CSV: {what}"));
        let parse = |v: &str| v.trim().parse::<T>().map_err(|_| bad(v));
        let mut meta = std::collections::HashMap::new();
        let mut scales = Vec::new();
        let mut moments = Vec::new();
        let mut header = false;
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.trim().split_once('=') {
                    meta.insert(k.trim().to_string(), v.trim().to_string());
                }
            } else if !header {
                if line.trim() != "scale,moment" {
                    return Err(bad(line));
                }
                header = true;
            } else {
                let (a, b) = line.split_once(',').ok_or_else(|| bad(line))?;
                scales.push(parse(a)?);
                moments.push(parse(b)?);
            }
        }
        let get = |k: &str| meta.get(k).ok_or_else(|| bad(k));
        let direction = match get("direction")?.as_str() {
            "space" => Direction::Space,
            "time" => Direction::Time,
            other => return Err(bad(other)),
        };
        Ok(Self {
            direction,
            q: parse(get("q")?)?,
            scales,
            moments,
            exponent: parse(get("exponent")?)?,
            std_error: parse(get("std_error")?)?,
            ci_low: parse(get("ci_low")?)?,
            ci_high: parse(get("ci_high")?)?,
            predicted: parse(get("predicted")?)?,
            pass: get("pass")?.parse().map_err(|_| bad("pass"))?,
        })
    }
}

fn groups_for(n_paths: usize) -> Vec<usize> {
    let g = JACKKNIFE_GROUPS.min(n_paths);
    (0..n_paths).map(|p| p * g / n_paths).collect()
}

/// Regresses `log E|u(t,y) - u(t,x)|^q` on `log |y - x|` with moments averaged over the pairs of each level.
pub fn estimate_spatial_hoelder<T: Scalar>(
    ensemble: &PathEnsemble<T>,
    pairs: &[SitePair<T>],
    q: T,
    t: T,
    predicted: T,
) -> Result<HoelderReport<T>> {
    let ti = ensemble.time_index(t)?;
    let mut levels: Vec<usize> = pairs.iter().map(|p| p.level).collect();
    levels.sort_unstable();
    levels.dedup();
    let mut scales = Vec::new();
    let mut members: Vec<Vec<(usize, usize)>> = Vec::new();
    for &level in &levels {
        let group: Vec<&SitePair<T>> = pairs.iter().filter(|p| p.level == level).collect();
        let idx = group
            .iter()
            .map(|p| Ok((ensemble.site_index(p.x)?, ensemble.site_index(p.y)?)))
            .collect::<Result<Vec<_>>>()?;
        let h = group.iter().map(|p| (p.y - p.x).abs()).sum::<T>() / T::of_usize(group.len());
        scales.push(h);
        members.push(idx);
    }
    let group_of = groups_for(ensemble.n_paths);
    let n_groups = group_of.last().map_or(0, |g| g + 1);
    let mut sums = vec![vec![T::zero(); scales.len()]; n_groups];
    let mut sizes = vec![0usize; n_groups];
    for p in 0..ensemble.n_paths {
        let g = group_of[p];
        sizes[g] += 1;
        for (i, idx) in members.iter().enumerate() {
            let m = idx
                .iter()
                .map(|&(a, b)| (ensemble.value(p, ti, b) - ensemble.value(p, ti, a)).abs().powf(q))
                .sum::<T>()
                / T::of_usize(idx.len());
            sums[g][i] = sums[g][i] + m;
        }
    }
    HoelderReport::from_groups(Direction::Space, q, scales, &sums, &sizes, predicted)
}

/// Regresses `log E|u(t + lag, x) - u(t, x)|^q` on `log lag` for lags `dt 2^j`, `j` in `lag_powers`,
/// averaging over base times `t` in `[T/2, T - lag]`.
pub fn estimate_temporal_hoelder<T: Scalar>(
    ensemble: &PathEnsemble<T>,
    q: T,
    x: T,
    dt: T,
    lag_powers: std::ops::RangeInclusive<u32>,
    predicted: T,
) -> Result<HoelderReport<T>> {
    let si = ensemble.site_index(x)?;
    let last = *ensemble
        .time_steps
        .last()
        .ok_or_else(|| Error::InsufficientHorizon("ensemble has no output times".into()))?;
    let start = last / 2;
    let position = |step: usize| ensemble.time_steps.binary_search(&step).ok();
    let mut scales = Vec::new();
    let mut members: Vec<Vec<(usize, usize)>> = Vec::new();
    for j in lag_powers {
        let lag = 1usize << j;
        let idx: Vec<(usize, usize)> = (start..=last.saturating_sub(lag))
            .filter_map(|s| Some((position(s)?, position(s + lag)?)))
            .collect();
        if idx.is_empty() {
            continue;
        }
        scales.push(dt * T::of_usize(lag));
        members.push(idx);
    }
    if scales.len() < MIN_SCALES {
        return Err(Error::InsufficientScales {
            found: scales.len(),
            needed: MIN_SCALES,
        });
    }
    let group_of = groups_for(ensemble.n_paths);
    let n_groups = group_of.last().map_or(0, |g| g + 1);
    let mut sums = vec![vec![T::zero(); scales.len()]; n_groups];
    let mut sizes = vec![0usize; n_groups];
    for p in 0..ensemble.n_paths {
        let g = group_of[p];
        sizes[g] += 1;
        for (i, idx) in members.iter().enumerate() {
            let m = idx
                .iter()
                .map(|&(a, b)| (ensemble.value(p, b, si) - ensemble.value(p, a, si)).abs().powf(q))
                .sum::<T>()
                / T::of_usize(idx.len());
            sums[g][i] = sums[g][i] + m;
        }
    }
    HoelderReport::from_groups(Direction::Time, q, scales, &sums, &sizes, predicted)
}
