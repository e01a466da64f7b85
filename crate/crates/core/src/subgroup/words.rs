use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symmspace::GroupElement;

/// Default cap on the number of words a single enumeration may produce.
pub const DEFAULT_WORD_BUDGET: u64 = 5_000_000;

/// A free group given by matrix generators. Freeness is assumed (or certified
/// separately by ping-pong); reduced words are then its geodesics.
#[derive(Debug, Clone)]
pub struct FreeGroupPresentation {
    generators: Vec<GroupElement>,
    inverses: Vec<GroupElement>,
    pub assumed_free: bool,
}

impl FreeGroupPresentation {
    pub fn new(generators: Vec<GroupElement>) -> Result<Self> {
        let Some(first) = generators.first() else {
            return Err(Error::InvalidInput(
                "at least one generator is needed".into(),
            ));
        };
        let n = first.dim();
        if let Some(g) = generators.iter().find(|g| g.dim() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: g.dim(),
            });
        }
        let inverses = generators.iter().map(|g| g.inverse()).collect();
        Ok(Self {
            generators,
            inverses,
            assumed_free: true,
        })
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn dim(&self) -> usize {
        self.generators[0].dim()
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    /// Letters are `±k` for generator `k` (1-based) and its inverse.
    pub fn letters(&self) -> Vec<i32> {
        (1..=self.rank() as i32).flat_map(|k| [k, -k]).collect()
    }

    pub fn letter(&self, l: i32) -> &GroupElement {
        let k = l.unsigned_abs() as usize - 1;
        if l > 0 {
            &self.generators[k]
        } else {
            &self.inverses[k]
        }
    }

    pub fn evaluate(&self, word: &ReducedWord) -> GroupElement {
        word.letters
            .iter()
            .fold(GroupElement::identity(self.dim()), |acc, &l| {
                acc.compose(self.letter(l))
            })
    }

    /// The conjugate presentation `q Γ q⁻¹`.
    pub fn conjugate(&self, q: &GroupElement) -> Self {
        let generators = self.generators.iter().map(|g| g.conjugate_by(q)).collect();
        let mut out = Self::new(generators).expect("non-empty");
        out.assumed_free = self.assumed_free;
        out
    }
}

/// A reduced word in the generators: no letter is followed by its inverse.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ReducedWord {
    letters: Vec<i32>,
}

impl ReducedWord {
    pub fn new(letters: Vec<i32>) -> Result<Self> {
        if letters.contains(&0) {
            return Err(Error::InvalidInput("letter 0 is not a generator".into()));
        }
        if letters.windows(2).any(|w| w[0] == -w[1]) {
            return Err(Error::InvalidInput(format!(
                "word {letters:?} is not reduced"
            )));
        }
        Ok(Self { letters })
    }

    pub fn empty() -> Self {
        Self {
            letters: Vec::new(),
        }
    }

    pub fn letters(&self) -> &[i32] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> ReducedWord {
        ReducedWord {
            letters: self.letters.iter().rev().map(|l| -l).collect(),
        }
    }
}

/// Number of reduced words of length exactly `len` in a free group of rank `r`.
pub fn count_words(rank: usize, len: usize) -> u64 {
    if len == 0 {
        return 1;
    }
    let r = rank as u64;
    (2 * r).saturating_mul((2 * r - 1).saturating_pow(len as u32 - 1))
}

/// Iterator over reduced words by increasing length, letters ordered as in
/// [`FreeGroupPresentation::letters`].
#[derive(Debug, Clone)]
pub struct Geodesics {
    alphabet: Vec<i32>,
    max_len: usize,
    current: Vec<usize>,
}

impl Iterator for Geodesics {
    type Item = ReducedWord;

    fn next(&mut self) -> Option<ReducedWord> {
        if !self.advance() {
            return None;
        }
        Some(ReducedWord {
            letters: self.current.iter().map(|&i| self.alphabet[i]).collect(),
        })
    }
}

impl Geodesics {
    fn reduced_at(&self, pos: usize) -> bool {
        pos == 0 || self.alphabet[self.current[pos]] != -self.alphabet[self.current[pos - 1]]
    }

    /// Smallest reduced completion of positions `from..` given the prefix.
    fn fill_from(&mut self, from: usize) {
        for pos in from..self.current.len() {
            self.current[pos] = 0;
            while !self.reduced_at(pos) {
                self.current[pos] += 1;
            }
        }
    }

    fn advance(&mut self) -> bool {
        let k = self.alphabet.len();
        if self.current.is_empty() {
            if self.max_len == 0 {
                return false;
            }
            self.current.push(0);
            return true;
        }
        let mut pos = self.current.len();
        while pos > 0 {
            pos -= 1;
            loop {
                self.current[pos] += 1;
                if self.current[pos] >= k || self.reduced_at(pos) {
                    break;
                }
            }
            if self.current[pos] < k {
                self.fill_from(pos + 1);
                return true;
            }
        }
        if self.current.len() == self.max_len {
            return false;
        }
        let len = self.current.len() + 1;
        self.current = vec![0; len];
        self.fill_from(0);
        true
    }
}

/// All reduced words of length `1..=max_len`, refusing enumerations larger
/// than `budget`.
pub fn enumerate_geodesics(
    group: &FreeGroupPresentation,
    max_len: usize,
    budget: u64,
) -> Result<Geodesics> {
    if max_len == 0 {
        return Err(Error::InvalidInput(
            "maximal length must be at least 1".into(),
        ));
    }
    let total: u64 = (1..=max_len)
        .map(|l| count_words(group.rank(), l))
        .fold(0, u64::saturating_add);
    if total > budget {
        return Err(Error::BudgetExceeded(total));
    }
    Ok(Geodesics {
        alphabet: group.letters(),
        max_len,
        current: Vec::new(),
    })
}

/// Reduced words together with their group elements, built by extending
/// shorter words so that each element costs one product.
pub fn evaluated_words(
    group: &FreeGroupPresentation,
    max_len: usize,
    budget: u64,
) -> Result<Vec<(ReducedWord, GroupElement)>> {
    let words: Vec<ReducedWord> = enumerate_geodesics(group, max_len, budget)?.collect();
    let mut out: Vec<(ReducedWord, GroupElement)> = Vec::with_capacity(words.len());
    let mut index: std::collections::HashMap<Vec<i32>, usize> =
        std::collections::HashMap::with_capacity(words.len());
    for w in words {
        let letters = w.letters();
        let element = if letters.len() == 1 {
            group.letter(letters[0]).clone()
        } else {
            let &i = index
                .get(&letters[..letters.len() - 1])
                .expect("prefixes are enumerated first");
            let parent: &GroupElement = &out[i].1;
            parent.compose(group.letter(*letters.last().expect("non-empty")))
        };
        index.insert(letters.to_vec(), out.len());
        out.push((w, element));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rank_two() -> FreeGroupPresentation {
        let g = GroupElement::diag_exp(&[1.0, -1.0]).unwrap();
        FreeGroupPresentation::new(vec![g.clone(), g]).unwrap()
    }

    #[test]
    fn word_counts() {
        let g = rank_two();
        assert_eq!(
            enumerate_geodesics(&g, 1, DEFAULT_WORD_BUDGET)
                .unwrap()
                .count(),
            4
        );
        assert_eq!(
            enumerate_geodesics(&g, 2, DEFAULT_WORD_BUDGET)
                .unwrap()
                .count(),
            16
        );
        for l in 1..=6 {
            let exact = enumerate_geodesics(&g, l, DEFAULT_WORD_BUDGET)
                .unwrap()
                .filter(|w| w.len() == l)
                .count() as u64;
            assert_eq!(exact, count_words(2, l));
        }
    }

    #[test]
    fn words_are_reduced_and_distinct() {
        let words: Vec<ReducedWord> = enumerate_geodesics(&rank_two(), 5, DEFAULT_WORD_BUDGET)
            .unwrap()
            .collect();
        let mut seen = std::collections::HashSet::new();
        for w in &words {
            assert!(w.letters().windows(2).all(|p| p[0] != -p[1]));
            assert!(seen.insert(w.clone()));
        }
    }

    #[test]
    fn budget_guard() {
        assert!(matches!(
            enumerate_geodesics(&rank_two(), 30, 1000),
            Err(Error::BudgetExceeded(_))
        ));
    }

    #[test]
    fn rejects_unreduced() {
        assert!(ReducedWord::new(vec![1, -1]).is_err());
    }
}
