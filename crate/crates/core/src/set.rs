//! Sorted id sets with merge-based set algebra.
//!
//! Every region this crate manipulates (balls, cubes, levels, stopping sets)
//! is a finite set of point ids. Keeping them as sorted deduplicated vectors
//! makes subset / disjointness tests cheap and all iteration orders
//! deterministic.

use std::fmt;

/// Index of a sample point inside a [`crate::space::PointCloud`].
pub type PointId = usize;

/// A set of point ids kept as a sorted, deduplicated vector.
#[derive(Clone, PartialEq, Eq, Default, serde::Serialize)]
#[serde(transparent)]
pub struct PointSet {
    ids: Vec<PointId>,
}

impl PointSet {
    pub fn new() -> Self {
        Self { ids: Vec::new() }
    }

    /// Builds a set from arbitrary ids; sorts and deduplicates.
    pub fn from_vec(mut ids: Vec<PointId>) -> Self {
        ids.sort_unstable();
        ids.dedup();
        Self { ids }
    }

    /// Wraps a vector that is already sorted and unique.
    pub fn from_sorted(ids: Vec<PointId>) -> Self {
        debug_assert!(ids.windows(2).all(|w| w[0] < w[1]), "ids not sorted/unique");
        Self { ids }
    }

    pub fn singleton(id: PointId) -> Self {
        Self { ids: vec![id] }
    }

    /// The full universe `{0, .., n-1}`.
    pub fn universe(n: usize) -> Self {
        Self { ids: (0..n).collect() }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, id: PointId) -> bool {
        self.ids.binary_search(&id).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = PointId> + '_ {
        self.ids.iter().copied()
    }

    pub fn as_slice(&self) -> &[PointId] {
        &self.ids
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        if self.ids.len() > other.ids.len() {
            return false;
        }
        let mut it = other.ids.iter();
        'outer: for &a in &self.ids {
            for &b in it.by_ref() {
                if b == a {
                    continue 'outer;
                }
                if b > a {
                    return false;
                }
            }
            return false;
        }
        true
    }

    pub fn is_disjoint(&self, other: &PointSet) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.ids.len() && j < other.ids.len() {
            match self.ids[i].cmp(&other.ids[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return false,
            }
        }
        true
    }

    pub fn union(&self, other: &PointSet) -> PointSet {
        let mut out = Vec::with_capacity(self.ids.len() + other.ids.len());
        let (mut i, mut j) = (0, 0);
        while i < self.ids.len() && j < other.ids.len() {
            match self.ids[i].cmp(&other.ids[j]) {
                std::cmp::Ordering::Less => {
                    out.push(self.ids[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(other.ids[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push(self.ids[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.ids[i..]);
        out.extend_from_slice(&other.ids[j..]);
        PointSet { ids: out }
    }

    pub fn intersection(&self, other: &PointSet) -> PointSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.ids.len() && j < other.ids.len() {
            match self.ids[i].cmp(&other.ids[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    out.push(self.ids[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        PointSet { ids: out }
    }

    pub fn difference(&self, other: &PointSet) -> PointSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.ids.len() {
            if j >= other.ids.len() || self.ids[i] < other.ids[j] {
                out.push(self.ids[i]);
                i += 1;
            } else if self.ids[i] > other.ids[j] {
                j += 1;
            } else {
                i += 1;
                j += 1;
            }
        }
        PointSet { ids: out }
    }

    pub fn union_all<'a>(sets: impl IntoIterator<Item = &'a PointSet>) -> PointSet {
        let mut acc = PointSet::new();
        for s in sets {
            acc = acc.union(s);
        }
        acc
    }
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ids.len() <= 16 {
            write!(f, "PointSet{:?}", self.ids)
        } else {
            write!(
                f,
                "PointSet[{} ids: {}..{}]",
                self.ids.len(),
                self.ids[0],
                self.ids[self.ids.len() - 1]
            )
        }
    }
}

impl FromIterator<PointId> for PointSet {
    fn from_iter<T: IntoIterator<Item = PointId>>(iter: T) -> Self {
        Self::from_vec(iter.into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algebra_basics() {
        let a = PointSet::from_vec(vec![3, 1, 2, 3]);
        let b = PointSet::from_vec(vec![2, 4]);
        assert_eq!(a.len(), 3);
        assert!(a.contains(2) && !a.contains(4));
        assert_eq!(a.union(&b).as_slice(), &[1, 2, 3, 4]);
        assert_eq!(a.intersection(&b).as_slice(), &[2]);
        assert_eq!(a.difference(&b).as_slice(), &[1, 3]);
        assert!(PointSet::from_vec(vec![1, 3]).is_subset(&a));
        assert!(!a.is_subset(&b));
        assert!(b.is_disjoint(&PointSet::from_vec(vec![1, 3])));
        assert!(!b.is_disjoint(&a));
    }

    #[test]
    fn universe_and_empty() {
        let u = PointSet::universe(4);
        assert_eq!(u.as_slice(), &[0, 1, 2, 3]);
        let e = PointSet::new();
        assert!(e.is_empty());
        assert!(e.is_subset(&u));
        assert!(e.is_disjoint(&u));
        assert_eq!(PointSet::union_all([&e, &u]).as_slice(), u.as_slice());
    }
}
