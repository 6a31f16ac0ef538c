use serde::Serialize;

use super::ifs::ValidatedIfs;
use super::word::Word;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DEFAULT_SIZE_CAP: usize = 10_000_000;

/// The partition `Lambda_n`: words whose composed ratio first drops to `r_max^n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionLambdaN<T> {
    pub level: usize,
    pub words: Vec<Word>,
    pub word_measures: Vec<T>,
    pub word_intervals: Vec<(T, T)>,
}

impl<T: Scalar> PartitionLambdaN<T> {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// `r_max^n`, the threshold on composed ratios, with the relative slack used
    /// to absorb rounding in products of equal ratios.
    pub fn threshold(spec: &ValidatedIfs<T>, level: usize) -> T {
        spec.r_max().powi(level as i32) * (T::one() + T::rel_tol())
    }
}

pub fn partition<T: Scalar>(spec: &ValidatedIfs<T>, level: usize) -> Result<PartitionLambdaN<T>> {
    partition_with_cap(spec, level, DEFAULT_SIZE_CAP)
}

/// Enumerates `Lambda_n` by depth-first extension, left to right.
pub fn partition_with_cap<T: Scalar>(
    spec: &ValidatedIfs<T>,
    level: usize,
    cap: usize,
) -> Result<PartitionLambdaN<T>> {
    if level == 0 {
        return Err(Error::InvalidInput("partition level must be at least 1".into()));
    }
    let threshold = PartitionLambdaN::threshold(spec, level);
    let n = spec.len();
    let mut out = PartitionLambdaN {
        level,
        words: Vec::new(),
        word_measures: Vec::new(),
        word_intervals: Vec::new(),
    };
    // (letters, scale, shift, mass); children pushed in reverse to pop left-first.
    let mut stack: Vec<(Vec<u16>, T, T, T)> = vec![(Vec::new(), T::one(), T::zero(), T::one())];
    while let Some((letters, scale, shift, mass)) = stack.pop() {
        if !letters.is_empty() && scale <= threshold {
            if out.words.len() >= cap {
                return Err(Error::Size { what: "partition", cap });
            }
            out.words.push(Word::from_indices(letters));
            out.word_measures.push(mass);
            out.word_intervals.push((shift, shift + scale));
            continue;
        }
        for i in (0..n).rev() {
            let c = &spec.contractions[i];
            let mut child = letters.clone();
            child.push(i as u16);
            stack.push((child, scale * c.ratio, shift + scale * c.offset, mass * spec.weights[i]));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{validate_ifs, word_interval, word_measure, Boundary, IfsSpec};

    #[test]
    fn cantor_level_two_is_full_level() {
        let spec = validate_ifs(IfsSpec::<f64>::cantor(Boundary::Neumann)).unwrap();
        let p = partition(&spec, 2).unwrap();
        let names: Vec<String> = p.words.iter().map(|w| w.to_string()).collect();
        assert_eq!(names, ["11", "12", "21", "22"]);
        assert!(p.word_measures.iter().all(|&m| m == 0.25));
    }

    #[test]
    fn equal_ratios_level_one_is_alphabet() {
        let spec = validate_ifs(IfsSpec::<f64>::new(
            &[0.2, 0.2, 0.2],
            &[0.0, 0.4, 0.8],
            &[0.2, 0.5, 0.3],
            Boundary::Neumann,
        ))
        .unwrap();
        let p = partition(&spec, 1).unwrap();
        assert_eq!(p.len(), 3);
    }

    /// Brute force over all words up to length 4 checking the two defining inequalities.
    #[test]
    fn unequal_ratios_match_brute_force() {
        let spec = validate_ifs(IfsSpec::<f64>::new(&[0.5, 0.25], &[0.0, 0.75], &[0.5, 0.5], Boundary::Neumann))
            .unwrap();
        let level = 2usize;
        let thr = 0.5f64.powi(level as i32);
        let mut expected = Vec::new();
        for len in 1..=4usize {
            for code in 0..(1usize << len) {
                let letters: Vec<u16> = (0..len).map(|i| ((code >> (len - 1 - i)) & 1) as u16 + 1).collect();
                let w = Word::from_letters(&letters);
                let (lo, hi) = word_interval(&spec, &w);
                let prefix = Word::from_letters(&letters[..len - 1]);
                let (plo, phi) = word_interval(&spec, &prefix);
                if phi - plo > thr && hi - lo <= thr {
                    expected.push(w);
                }
            }
        }
        expected.sort();
        let p = partition(&spec, level).unwrap();
        assert_eq!(p.words, expected);
        let names: Vec<String> = p.words.iter().map(|w| w.to_string()).collect();
        assert_eq!(names, ["11", "12", "2"]);
        for (w, &m) in p.words.iter().zip(&p.word_measures) {
            assert_eq!(m, word_measure(&spec, w));
        }
    }

    #[test]
    fn cap_is_enforced() {
        let spec = validate_ifs(IfsSpec::<f64>::cantor(Boundary::Neumann)).unwrap();
        assert!(matches!(partition_with_cap(&spec, 5, 31), Err(Error::Size { .. })));
        assert_eq!(partition_with_cap(&spec, 5, 32).unwrap().len(), 32);
    }

    #[test]
    fn level_zero_rejected() {
        let spec = validate_ifs(IfsSpec::<f64>::cantor(Boundary::Neumann)).unwrap();
        assert!(partition(&spec, 0).is_err());
    }
}
