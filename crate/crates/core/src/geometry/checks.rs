use serde::Serialize;

use super::exponents::compute_exponents;
use super::ifs::{validate_ifs, Boundary, IfsSpec, ValidatedIfs};
use super::measure::{discrete_measure, neighborhood};
use super::partition::{partition, PartitionLambdaN};
use super::word::{compose, Word};
use crate::error::Result;
use crate::scalar::Scalar;

/// Builds an admissible spec from uniform draws in `[0, 1)`.
///
/// Uses `2..=5` maps with ratios and gaps rescaled to fill `[0, 1]`; gaps may vanish.
pub fn sample_admissible_spec(draw: &mut impl FnMut() -> f64, boundary: Boundary) -> ValidatedIfs<f64> {
    let n = 2 + (draw() * 4.0) as usize;
    let raw_ratios: Vec<f64> = (0..n).map(|_| 0.2 + 0.8 * draw()).collect();
    let raw_gaps: Vec<f64> = (0..n - 1)
        .map(|_| {
            let g = draw();
            if g < 0.1 {
                0.0
            } else {
                g
            }
        })
        .collect();
    let total: f64 = raw_ratios.iter().sum::<f64>() + raw_gaps.iter().sum::<f64>();
    let ratios: Vec<f64> = raw_ratios.iter().map(|r| r / total).collect();
    let mut offsets = Vec::with_capacity(n);
    let mut x = 0.0;
    for i in 0..n {
        offsets.push(x);
        x += ratios[i] + raw_gaps.get(i).map_or(0.0, |g| g / total);
    }
    // Pin the last image to the right endpoint exactly.
    offsets[n - 1] = 1.0 - ratios[n - 1];
    let raw_w: Vec<f64> = (0..n).map(|_| 0.05 + draw()).collect();
    let wsum: f64 = raw_w.iter().sum();
    let mut weights: Vec<f64> = raw_w.iter().map(|w| w / wsum).collect();
    let head: f64 = weights[..n - 1].iter().sum();
    weights[n - 1] = 1.0 - head;
    validate_ifs(IfsSpec::new(&ratios, &offsets, &weights, boundary)).expect("sampled spec is admissible")
}

/// Outcome of the partition lemma checks at one level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartitionCheck {
    pub level: usize,
    pub size: usize,
    /// Prefix-free and covering the word space, with total mass one.
    pub covers: bool,
    /// Every word of the next level refines exactly one word, with matching mass and containment.
    pub refines: bool,
    /// Distinct cells share at most one point.
    pub at_most_point_overlap: bool,
    /// Each word satisfies both defining inequalities.
    pub defining_inequalities: bool,
    /// `mu_w > r_max^{n d_H} r_min^{d_H} nu_min^n`.
    pub mass_lower_bound: bool,
    /// `1 / mu(D_n^0(x))` obeys the matching upper bound at sampled atoms.
    pub approximant_norm_bound: bool,
}

impl PartitionCheck {
    pub fn all(&self) -> bool {
        self.covers
            && self.refines
            && self.at_most_point_overlap
            && self.defining_inequalities
            && self.mass_lower_bound
            && self.approximant_norm_bound
    }
}

fn ratio_of<T: Scalar>(spec: &ValidatedIfs<T>, w: &Word) -> T {
    compose(spec, w).0
}

fn parent(w: &Word) -> Word {
    Word::from_indices(w.indices()[..w.len() - 1].to_vec())
}

/// Runs the partition lemma checks for `Lambda_level` against `Lambda_{level+1}`.
pub fn check_partition_lemma<T: Scalar>(spec: &ValidatedIfs<T>, level: usize) -> Result<PartitionCheck> {
    let p = partition(spec, level)?;
    let next = partition(spec, level + 1)?;
    let ex = compute_exponents(spec);
    let tol = T::rel_tol();
    let n_maps = T::of_usize(spec.len());

    let total_mass: T = p.word_measures.iter().copied().sum();
    let bernoulli: T = p.words.iter().map(|w| n_maps.powi(-(w.len() as i32))).sum();
    let prefix_free = p.words.windows(2).all(|w| !w[0].is_prefix_of(&w[1]));
    let covers = prefix_free && (total_mass - T::one()).abs() <= tol && (bernoulli - T::one()).abs() <= tol;

    let mut refines = true;
    let mut child_mass = vec![T::zero(); p.len()];
    for (nu, (&m, &(lo, hi))) in next.words.iter().zip(next.word_measures.iter().zip(&next.word_intervals)) {
        // Words are in lexicographic order, so the only candidate ancestor is the last one not after `nu`.
        let Some(i) = p.words.partition_point(|w| w <= nu).checked_sub(1) else {
            refines = false;
            continue;
        };
        if !p.words[i].is_prefix_of(nu) {
            refines = false;
            continue;
        }
        child_mass[i] = child_mass[i] + m;
        let (plo, phi) = p.word_intervals[i];
        // Endpoint rounding scales with the position, not the interval width.
        let slack = tol * (phi - plo) + T::epsilon() * T::of(4.0) * (T::one() + phi.abs());
        refines &= lo >= plo - slack && hi <= phi + slack;
    }
    refines &= child_mass
        .iter()
        .zip(&p.word_measures)
        .all(|(&c, &m)| (c - m).abs() <= tol * m.max(T::one()));

    let mut sorted = p.word_intervals.clone();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let at_most_point_overlap = sorted.windows(2).all(|w| w[0].1 <= w[1].0 + T::unit_tol());

    let threshold = PartitionLambdaN::threshold(spec, level);
    let defining_inequalities = p
        .words
        .iter()
        .all(|w| ratio_of(spec, w) <= threshold && (w.len() == 1 || ratio_of(spec, &parent(w)) > threshold));

    let nf = T::of_usize(level);
    let bound = (ex.r_max.ln() * nf * ex.d_h + ex.r_min.ln() * ex.d_h + ex.nu_min.ln() * nf).exp();
    let mass_lower_bound = p.word_measures.iter().all(|&m| m > bound * (T::one() - tol));

    let dm = discrete_measure(spec, level.min(6))?;
    let stride = (dm.len() / 25).max(1);
    let mut approximant_norm_bound = true;
    for &x in dm.positions.iter().step_by(stride) {
        let d = neighborhood(spec, x, level)?;
        approximant_norm_bound &= d.norm_squared() <= bound.recip() * (T::one() + tol);
    }

    Ok(PartitionCheck {
        level,
        size: p.len(),
        covers,
        refines,
        at_most_point_overlap,
        defining_inequalities,
        mass_lower_bound,
        approximant_norm_bound,
    })
}

/// Smallest `n` with `w` in `Lambda_n`, if one exists up to `max_level`.
pub fn partition_level_of<T: Scalar>(spec: &ValidatedIfs<T>, w: &Word, max_level: usize) -> Option<usize> {
    if w.is_empty() {
        return None;
    }
    let r = ratio_of(spec, w);
    let rp = if w.len() == 1 { T::one() } else { ratio_of(spec, &parent(w)) };
    (1..=max_level).find(|&n| {
        let t = PartitionLambdaN::threshold(spec, n);
        r <= t && rp > t
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cantor_passes() {
        let spec = validate_ifs(IfsSpec::<f64>::cantor(Boundary::Neumann)).unwrap();
        for n in 1..=5 {
            assert!(check_partition_lemma(&spec, n).unwrap().all());
        }
    }

    /// Narrow intervals near 0.5 where composed endpoints differ by one ulp.
    #[test]
    fn refinement_tolerates_positional_rounding() {
        let spec = validate_ifs(IfsSpec::new(
            &[0.10722726152043276, 0.08530343083051282, 0.11953316993845521, 0.03978888878870322, 0.11993130385654596],
            &[0.0, 0.22554941071440743, 0.4328883479438628, 0.7064434247407314, 0.8800686961434541],
            &[0.3614112942919241, 0.09698497659008175, 0.05594373954825732, 0.3489685033729472, 0.1366914861967896],
            Boundary::Neumann,
        ))
        .unwrap();
        let c = check_partition_lemma(&spec, 6).unwrap();
        assert!(c.all(), "{c:?}");
    }

    #[test]
    fn sampler_is_admissible() {
        let mut state = 3u64;
        let mut draw = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..200 {
            let s = sample_admissible_spec(&mut draw, Boundary::Dirichlet);
            assert!((2..=5).contains(&s.len()));
        }
    }

    #[test]
    fn level_of_word() {
        let spec = validate_ifs(IfsSpec::<f64>::new(&[0.5, 0.25], &[0.0, 0.75], &[0.5, 0.5], Boundary::Neumann)).unwrap();
        let w = Word::from_letters(&[2, 1]);
        let n = partition_level_of(&spec, &w, 10).unwrap();
        assert_eq!(n, 3);
        assert!(partition(&spec, n).unwrap().words.contains(&w));
    }
}
