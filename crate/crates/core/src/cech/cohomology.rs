use super::cochain::coboundary_matrix;
use super::cover::Cover;

/// Dimensions of `H^k(nerve; Z/2)` for `k = 0, 1, 2` from explicit ranks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CohomologyReport {
    pub dims: [usize; 3],
    /// `rank δ^k` for `k = 0, 1, 2`.
    pub ranks: [usize; 3],
    /// Number of `k`-simplices for `k = 0..=3`.
    pub counts: [usize; 4],
}

pub fn z2_cohomology(cover: &Cover) -> CohomologyReport {
    let counts = [cover.count(0), cover.count(1), cover.count(2), cover.count(3)];
    let ranks = [0, 1, 2].map(|k| coboundary_matrix(cover, k).rank());
    // dim H^k = dim ker δ^k − rank δ^{k−1}
    let dims = [counts[0] - ranks[0], counts[1] - ranks[1] - ranks[0], counts[2] - ranks[2] - ranks[1]];
    CohomologyReport { dims, ranks, counts }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cech::cover::{circle_cover, disk_cover, sphere4, torus7};

    #[test]
    fn standard_nerves() {
        assert_eq!(z2_cohomology(&circle_cover(3)).dims, [1, 1, 0]);
        assert_eq!(z2_cohomology(&circle_cover(3)).ranks[..2], [2, 0]);
        assert_eq!(z2_cohomology(&torus7()).dims, [1, 2, 1]);
        assert_eq!(z2_cohomology(&sphere4()).dims, [1, 0, 1]);
        assert_eq!(z2_cohomology(&disk_cover(5)).dims, [1, 0, 0]);
        let d = disk_cover(4);
        assert_eq!(z2_cohomology(&d.disjoint_union(&d)).dims, [2, 0, 0]);
        let full = Cover::from_facets(4, &[vec![0, 1, 2, 3]]).unwrap();
        assert_eq!(z2_cohomology(&full).dims, [1, 0, 0]);
    }
}
