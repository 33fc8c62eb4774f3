use crate::{Error, Result};

/// A bipolar hypervector; every entry is exactly `-1` or `+1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Hypervector {
    signs: Vec<i8>,
}

impl Hypervector {
    pub fn from_signs(signs: Vec<i8>) -> Result<Self> {
        if let Some(pos) = signs.iter().position(|&s| s != 1 && s != -1) {
            return Err(Error::contract(format!(
                "hypervector entry {pos} is {}, expected -1 or +1",
                signs[pos]
            )));
        }
        Ok(Hypervector { signs })
    }

    pub(crate) fn from_signs_unchecked(signs: Vec<i8>) -> Self {
        debug_assert!(signs.iter().all(|&s| s == 1 || s == -1));
        Hypervector { signs }
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    /// Exact inner product with an integer accumulator row.
    #[inline]
    pub fn dot(&self, acc: &[i32]) -> i64 {
        debug_assert_eq!(acc.len(), self.signs.len());
        acc.iter()
            .zip(&self.signs)
            .map(|(&a, &s)| a as i64 * s as i64)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_bipolar_entries() {
        assert!(Hypervector::from_signs(vec![1, -1, 1]).is_ok());
        assert!(Hypervector::from_signs(vec![1, 0, 1]).is_err());
        assert!(Hypervector::from_signs(vec![2]).is_err());
    }

    #[test]
    fn dot_matches_naive_sum() {
        let hv = Hypervector::from_signs(vec![1, -1, -1, 1, 1]).unwrap();
        let acc = [3, -2, 7, 0, -5];
        assert_eq!(hv.dot(&acc), 3 + 2 - 7 - 5);
    }
}
