//! Finite permutations on 0-based indices.

use serde::Serialize;
use std::fmt;

/// Permutation stored as its image table: `apply(x) = images[x]`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm {
    images: Vec<u32>,
}

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm {
            images: (0..n as u32).collect(),
        }
    }

    /// Builds from an image table, checking bijectivity.
    pub fn from_images(images: Vec<u32>) -> Option<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &y in &images {
            let y = y as usize;
            if y >= n || seen[y] {
                return None;
            }
            seen[y] = true;
        }
        Some(Perm { images })
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn apply(&self, x: u32) -> u32 {
        self.images[x as usize]
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &y)| i as u32 == y)
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0; self.images.len()];
        for (x, &y) in self.images.iter().enumerate() {
            inv[y as usize] = x as u32;
        }
        Perm { images: inv }
    }

    /// Composition `self ∘ first`: `first` acts before `self`.
    pub fn compose_after(&self, first: &Perm) -> Perm {
        debug_assert_eq!(self.degree(), first.degree());
        Perm {
            images: first.images.iter().map(|&y| self.images[y as usize]).collect(),
        }
    }

    pub fn images(&self) -> &[u32] {
        &self.images
    }

    pub fn fixed_points(&self) -> impl Iterator<Item = u32> + '_ {
        self.images
            .iter()
            .enumerate()
            .filter(|&(x, &y)| x as u32 == y)
            .map(|(x, _)| x as u32)
    }

    /// One-based image list, the form used in automaton files and reports.
    pub fn one_based(&self) -> Vec<u32> {
        self.images.iter().map(|&y| y + 1).collect()
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, y) in self.one_based().iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", y)?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Perm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.one_based().serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compose_applies_first_argument_last() {
        // p = (1 2), q = (2 3) on three points, images 0-based
        let p = Perm::from_images(vec![1, 0, 2]).unwrap();
        let q = Perm::from_images(vec![0, 2, 1]).unwrap();
        let pq = p.compose_after(&q); // q first, then p
        assert_eq!(pq.apply(1), 2); // q: 1->2, p: 2->2
        assert_eq!(pq.apply(2), 0); // q: 2->1, p: 1->0
    }

    #[test]
    fn rejects_non_bijections() {
        assert!(Perm::from_images(vec![0, 0]).is_none());
        assert!(Perm::from_images(vec![0, 5]).is_none());
    }

    #[test]
    fn inverse_round_trip() {
        let p = Perm::from_images(vec![2, 0, 1]).unwrap();
        assert!(p.compose_after(&p.inverse()).is_identity());
        assert!(p.inverse().compose_after(&p).is_identity());
    }
}
