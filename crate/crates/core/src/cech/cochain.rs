use std::collections::BTreeMap;

use super::cover::{faces, Cover, Simplex};
use super::gf2::Gf2Matrix;
use super::group::{Element, Group};
use super::CechError;

/// Group-valued function on the `degree`-simplices of a nerve. Simplices are
/// stored with increasing vertices; a 1-cochain is read as
/// `q_βα = q_αβ⁻¹` for the reversed orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct Cochain {
    pub degree: usize,
    pub group: Group,
    pub values: BTreeMap<Simplex, Element>,
}

impl Cochain {
    pub fn new(
        cover: &Cover,
        degree: usize,
        group: Group,
        values: BTreeMap<Simplex, Element>,
    ) -> Result<Self, CechError> {
        for (s, e) in &values {
            if s.len() != degree + 1 || !cover.contains(s) {
                return Err(CechError::Cover(format!("{s:?} is not a {degree}-simplex of the nerve")));
            }
            group.check(e)?;
        }
        Ok(Self { degree, group, values })
    }

    /// Identity on every `degree`-simplex.
    pub fn constant(cover: &Cover, degree: usize, group: Group, value: Element) -> Result<Self, CechError> {
        let values = cover.simplices(degree).iter().map(|s| (s.clone(), value.clone())).collect();
        Self::new(cover, degree, group, values)
    }

    pub fn get(&self, s: &[usize]) -> Result<&Element, CechError> {
        self.values.get(s).ok_or_else(|| CechError::Missing(s.to_vec()))
    }

    /// `q_αβ` for either orientation of an edge.
    pub fn edge(&self, a: usize, b: usize) -> Result<Element, CechError> {
        if a < b {
            self.get(&[a, b]).cloned()
        } else {
            Ok(self.group.inv(self.get(&[b, a])?))
        }
    }

    /// Z/2 cochain as a bit vector over the simplices of its degree (`-1 ↦ 1`).
    pub fn to_bits(&self, cover: &Cover) -> Result<Vec<bool>, CechError> {
        if self.group != Group::Z2 {
            return Err(CechError::Group("bit vectors need a Z2 cochain".into()));
        }
        cover.simplices(self.degree).iter().map(|s| Ok(matches!(self.get(s)?, Element::Sign(-1)))).collect()
    }

    pub fn from_bits(cover: &Cover, degree: usize, bits: &[bool]) -> Self {
        let values = cover
            .simplices(degree)
            .iter()
            .zip(bits)
            .map(|(s, &b)| (s.clone(), Element::Sign(if b { -1 } else { 1 })))
            .collect();
        Self { degree, group: Group::Z2, values }
    }

    pub fn is_identity(&self) -> bool {
        self.values.values().all(|e| self.group.distance_to_identity(e) == 0.0)
    }

    /// Largest distance from the identity over all values.
    pub fn max_deviation(&self) -> f64 {
        self.values.values().map(|e| self.group.distance_to_identity(e)).fold(0.0, f64::max)
    }
}

/// `c_αβγ = q_αβ q_βγ q_γα` on every triangle of the nerve.
pub fn cocycle_of_chain(cover: &Cover, q: &Cochain) -> Result<Cochain, CechError> {
    if q.degree != 1 {
        return Err(CechError::Degree { expected: 1, found: q.degree });
    }
    let g = q.group;
    let mut values = BTreeMap::new();
    for t in cover.simplices(2) {
        let (a, b, c) = (t[0], t[1], t[2]);
        let v = g.mul(&g.mul(&q.edge(a, b)?, &q.edge(b, c)?), &q.edge(c, a)?);
        values.insert(t.clone(), v);
    }
    Ok(Cochain { degree: 2, group: g, values })
}

/// Alternating coboundary `(δc)(σ) = Π_i c(∂_i σ)^{(−1)^i}` for abelian groups.
pub fn coboundary(cover: &Cover, c: &Cochain) -> Result<Cochain, CechError> {
    let g = c.group;
    if !g.is_abelian() {
        return Err(CechError::NonAbelian(g.tag()));
    }
    let mut values = BTreeMap::new();
    for s in cover.simplices(c.degree + 1) {
        let mut acc = g.identity();
        for (i, f) in faces(s).iter().enumerate() {
            let v = c.get(f)?;
            let v = if i % 2 == 0 { v.clone() } else { g.inv(v) };
            acc = g.mul(&acc, &v);
        }
        values.insert(s.clone(), acc);
    }
    Ok(Cochain { degree: c.degree + 1, group: g, values })
}

/// Worst violation of the 2-cocycle identity of `c = cocycle_of_chain(q)` on
/// the tetrahedra: `(q_αβ c_βγδ q_βα) c_αβδ = c_αβγ c_αγδ`, which reduces to
/// `δc = 1` for abelian groups.
pub fn cocycle_defect(cover: &Cover, q: &Cochain, c: &Cochain) -> Result<f64, CechError> {
    let g = q.group;
    let mut worst = 0.0f64;
    for s in cover.simplices(3) {
        let (a, b, cc, d) = (s[0], s[1], s[2], s[3]);
        let qab = q.edge(a, b)?;
        let lhs = g.mul(&g.mul(&g.mul(&qab, c.get(&[b, cc, d])?), &g.inv(&qab)), c.get(&[a, b, d])?);
        let rhs = g.mul(c.get(&[a, b, cc])?, c.get(&[a, cc, d])?);
        worst = worst.max(g.distance_to_identity(&g.mul(&lhs, &g.inv(&rhs))));
    }
    Ok(worst)
}

/// GF(2) matrix of `δ: C^k → C^{k+1}`.
pub fn coboundary_matrix(cover: &Cover, k: usize) -> Gf2Matrix {
    let mut m = Gf2Matrix::zeros(cover.count(k + 1), cover.count(k));
    for (r, s) in cover.simplices(k + 1).iter().enumerate() {
        for f in faces(s) {
            let c = cover.position(&f).expect("nerve is downward closed");
            m.flip(r, c);
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cech::cover::{circle_cover, Cover};

    #[test]
    fn z2_triangle_of_minus_ones() {
        let cover = Cover::from_facets(3, &[vec![0, 1, 2]]).unwrap();
        let q = Cochain::constant(&cover, 1, Group::Z2, Element::Sign(-1)).unwrap();
        let c = cocycle_of_chain(&cover, &q).unwrap();
        assert_eq!(c.values[&vec![0, 1, 2]], Element::Sign(-1));
        let id = Cochain::constant(&cover, 1, Group::Z2, Element::Sign(1)).unwrap();
        assert!(cocycle_of_chain(&cover, &id).unwrap().is_identity());
    }

    #[test]
    fn missing_edges_are_reported() {
        let cover = Cover::from_facets(3, &[vec![0, 1, 2]]).unwrap();
        let mut values = BTreeMap::new();
        values.insert(vec![0, 1], Element::Sign(1));
        let q = Cochain::new(&cover, 1, Group::Z2, values).unwrap();
        assert_eq!(cocycle_of_chain(&cover, &q).unwrap_err(), CechError::Missing(vec![1, 2]));
    }

    #[test]
    fn zk_coboundary_of_constant_vanishes() {
        let cover = circle_cover(4);
        let z = Cochain::constant(&cover, 0, Group::Zk(5), Element::Mod(3)).unwrap();
        assert!(coboundary(&cover, &z).unwrap().is_identity());
        let mut v = z.clone();
        v.values.insert(vec![2], Element::Mod(1));
        let d = coboundary(&cover, &v).unwrap();
        // (δz)_{12} = z_2 − z_1
        assert_eq!(d.values[&vec![1, 2]], Element::Mod(3));
        assert_eq!(d.values[&vec![2, 3]], Element::Mod(2));
    }

    #[test]
    fn nonabelian_coboundary_is_rejected() {
        let cover = circle_cover(3);
        let q = Cochain::constant(&cover, 1, Group::Quaternion, Group::Quaternion.identity()).unwrap();
        assert!(matches!(coboundary(&cover, &q), Err(CechError::NonAbelian(_))));
    }
}
