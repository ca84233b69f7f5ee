use std::collections::{BTreeMap, BTreeSet};

use super::CechError;

/// Sorted element indices of a nerve simplex (0-based).
pub type Simplex = Vec<usize>;

/// A finite cover given by its nerve. Elements are `0..elements`; vertices
/// are implicit and `simplices[k]` holds the sorted `k`-simplices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cover {
    elements: usize,
    simplices: Vec<Vec<Simplex>>,
    index: Vec<BTreeMap<Simplex, usize>>,
}

/// Highest simplex dimension stored.
pub const MAX_DEGREE: usize = 3;

impl Cover {
    /// Builds the nerve from the listed simplices of dimension 1 to 3. Every
    /// face of a listed simplex must itself be listed.
    pub fn new(elements: usize, listed: &[Simplex]) -> Result<Self, CechError> {
        if elements == 0 {
            return Err(CechError::Cover("a cover needs at least one element".into()));
        }
        let mut sets: Vec<BTreeSet<Simplex>> = vec![BTreeSet::new(); MAX_DEGREE + 1];
        sets[0] = (0..elements).map(|v| vec![v]).collect();
        for s in listed {
            let mut t = s.clone();
            t.sort_unstable();
            t.dedup();
            if t.len() != s.len() || t.len() < 2 || t.len() > MAX_DEGREE + 1 {
                return Err(CechError::Cover(format!("invalid nerve simplex {s:?}")));
            }
            if let Some(v) = t.iter().find(|&&v| v >= elements) {
                return Err(CechError::Cover(format!("element {v} out of range in {s:?}")));
            }
            sets[t.len() - 1].insert(t);
        }
        for k in 1..=MAX_DEGREE {
            for s in &sets[k] {
                for f in faces(s) {
                    if !sets[k - 1].contains(&f) {
                        return Err(CechError::Incomplete { simplex: s.clone(), face: f });
                    }
                }
            }
        }
        let simplices: Vec<Vec<Simplex>> = sets.into_iter().map(|s| s.into_iter().collect()).collect();
        let index = simplices.iter().map(|l| l.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect()).collect();
        Ok(Self { elements, simplices, index })
    }

    /// Full nerve closure of a list of maximal simplices.
    pub fn from_facets(elements: usize, facets: &[Simplex]) -> Result<Self, CechError> {
        let mut all = BTreeSet::new();
        for f in facets {
            let mut t = f.clone();
            t.sort_unstable();
            close(&t, &mut all);
        }
        let listed: Vec<Simplex> = all.into_iter().filter(|s| s.len() >= 2).collect();
        Self::new(elements, &listed)
    }

    pub fn elements(&self) -> usize {
        self.elements
    }

    pub fn simplices(&self, degree: usize) -> &[Simplex] {
        self.simplices.get(degree).map_or(&[], |v| v.as_slice())
    }

    pub fn count(&self, degree: usize) -> usize {
        self.simplices(degree).len()
    }

    pub fn position(&self, s: &[usize]) -> Option<usize> {
        self.index.get(s.len().checked_sub(1)?)?.get(s).copied()
    }

    pub fn contains(&self, s: &[usize]) -> bool {
        self.position(s).is_some()
    }

    /// Disjoint union, relabelling the elements of `other` after ours.
    pub fn disjoint_union(&self, other: &Cover) -> Cover {
        let shift = self.elements;
        let mut listed: Vec<Simplex> = (1..=MAX_DEGREE).flat_map(|k| self.simplices(k).to_vec()).collect();
        listed.extend(
            (1..=MAX_DEGREE).flat_map(|k| other.simplices(k).iter().map(|s| s.iter().map(|v| v + shift).collect())),
        );
        Cover::new(self.elements + other.elements, &listed).expect("union of valid nerves is valid")
    }
}

/// Codimension-one faces in the order `∂_0, ∂_1, ...` (drop vertex `i`).
pub fn faces(s: &[usize]) -> Vec<Simplex> {
    (0..s.len()).map(|i| s.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).collect()).collect()
}

fn close(s: &Simplex, out: &mut BTreeSet<Simplex>) {
    if s.is_empty() || !out.insert(s.clone()) {
        return;
    }
    if s.len() > 1 {
        for f in faces(s) {
            close(&f, out);
        }
    }
}

/// Nerve of the cover of a circle by `k ≥ 3` arcs.
pub fn circle_cover(k: usize) -> Cover {
    let edges: Vec<Simplex> = (0..k).map(|v| vec![v, (v + 1) % k]).collect();
    Cover::from_facets(k, &edges).expect("circle nerve is valid")
}

/// Seven-vertex triangulation of the torus, triangles `{v, v+1, v+3}` and
/// `{v, v+2, v+3}` mod 7.
pub fn torus7() -> Cover {
    let tri: Vec<Simplex> =
        (0..7).flat_map(|v| [vec![v, (v + 1) % 7, (v + 3) % 7], vec![v, (v + 2) % 7, (v + 3) % 7]]).collect();
    Cover::from_facets(7, &tri).expect("torus nerve is valid")
}

/// Boundary of the 3-simplex: a nerve with the cohomology of the 2-sphere.
pub fn sphere4() -> Cover {
    let tri: Vec<Simplex> = faces(&[0, 1, 2, 3]);
    Cover::from_facets(4, &tri).expect("sphere nerve is valid")
}

/// Cone over a `k`-cycle: a disk, element 0 is the apex.
pub fn disk_cover(k: usize) -> Cover {
    let tri: Vec<Simplex> = (0..k).map(|i| vec![0, 1 + i, 1 + (i + 1) % k]).collect();
    Cover::from_facets(k + 1, &tri).expect("disk nerve is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_counts() {
        let t = torus7();
        assert_eq!((t.count(0), t.count(1), t.count(2), t.count(3)), (7, 21, 14, 0));
    }

    #[test]
    fn downward_closure_is_required() {
        let err = Cover::new(3, &[vec![0, 1, 2], vec![0, 1], vec![1, 2]]).unwrap_err();
        assert!(matches!(err, CechError::Incomplete { .. }));
        assert!(Cover::new(2, &[vec![0, 2]]).is_err());
        assert!(Cover::new(2, &[vec![1, 1]]).is_err());
    }

    #[test]
    fn positions_and_union() {
        let c = circle_cover(3);
        assert_eq!(c.position(&[0, 2]), Some(1));
        let u = c.disjoint_union(&c);
        assert_eq!(u.elements(), 6);
        assert!(u.contains(&[3, 5]));
        assert!(!u.contains(&[2, 3]));
    }
}
