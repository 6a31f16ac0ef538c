use std::fmt;

use serde::{Deserialize, Serialize};

use super::ifs::IfsSpec;
use crate::scalar::Scalar;

/// Finite word over the alphabet `{1, ..., N}`.
///
/// Letters are stored zero-based; `Display` prints them one-based. Words order
/// lexicographically, which matches the left-to-right order of their intervals.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Word(Vec<u16>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Builds a word from one-based letters, e.g. `Word::from_letters(&[2, 1])` is `21`.
    pub fn from_letters(letters: &[u16]) -> Self {
        assert!(letters.iter().all(|&l| l >= 1), "letters are one-based");
        Word(letters.iter().map(|&l| l - 1).collect())
    }

    pub(crate) fn from_indices(indices: Vec<u16>) -> Self {
        Word(indices)
    }

    /// Zero-based letter indices.
    pub fn indices(&self) -> &[u16] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, index: u16) -> Word {
        let mut letters = self.0.clone();
        letters.push(index);
        Word(letters)
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.starts_with(&self.0)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wide = self.0.iter().any(|&l| l >= 9);
        for (i, l) in self.0.iter().enumerate() {
            if wide && i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{}", l + 1)?;
        }
        Ok(())
    }
}

/// Composed affine map `S_w = S_{w_1} o ... o S_{w_m}` as `(scale, shift)`.
pub(crate) fn compose<T: Scalar>(spec: &IfsSpec<T>, word: &Word) -> (T, T) {
    word.0.iter().fold((T::one(), T::zero()), |(scale, shift), &l| {
        let c = &spec.contractions[l as usize];
        (scale * c.ratio, shift + scale * c.offset)
    })
}

/// `[S_w(0), S_w(1)]`.
pub fn word_interval<T: Scalar>(spec: &IfsSpec<T>, word: &Word) -> (T, T) {
    let (scale, shift) = compose(spec, word);
    (shift, shift + scale)
}

/// `mu_w = mu_{w_1} * ... * mu_{w_m}`.
pub fn word_measure<T: Scalar>(spec: &IfsSpec<T>, word: &Word) -> T {
    word.0
        .iter()
        .fold(T::one(), |acc, &l| acc * spec.weights[l as usize])
}
