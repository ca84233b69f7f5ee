use nalgebra::{DMatrix, Quaternion};

use super::CechError;

/// Structure group of a cochain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    /// `{±1}` under multiplication.
    Z2,
    /// `Z/k` under addition, `k ≥ 2`.
    Zk(u32),
    /// Orthogonal `d × d` matrices.
    Orthogonal(usize),
    /// Unit quaternions.
    Quaternion,
}

/// Orthogonality tolerance for matrix elements and unit norm for quaternions.
pub const MEMBERSHIP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    Sign(i8),
    Mod(u32),
    Matrix(DMatrix<f64>),
    Quat(Quaternion<f64>),
}

impl Group {
    pub fn is_abelian(&self) -> bool {
        matches!(self, Group::Z2 | Group::Zk(_))
    }

    pub fn tag(&self) -> String {
        match self {
            Group::Z2 => "Z2".into(),
            Group::Zk(k) => format!("Z{k}"),
            Group::Orthogonal(d) => format!("O{d}"),
            Group::Quaternion => "quaternion".into(),
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self, CechError> {
        let bad = || CechError::Group(format!("unknown group tag {tag:?}"));
        if tag == "quaternion" {
            return Ok(Group::Quaternion);
        }
        let (head, num) = tag.split_at(tag.find(|c: char| c.is_ascii_digit()).ok_or_else(bad)?);
        let k: u32 = num.parse().map_err(|_| bad())?;
        match (head, k) {
            ("Z", 2) => Ok(Group::Z2),
            ("Z", k) if k > 2 => Ok(Group::Zk(k)),
            ("O", d) if d >= 1 => Ok(Group::Orthogonal(d as usize)),
            _ => Err(bad()),
        }
    }

    pub fn identity(&self) -> Element {
        match *self {
            Group::Z2 => Element::Sign(1),
            Group::Zk(_) => Element::Mod(0),
            Group::Orthogonal(d) => Element::Matrix(DMatrix::identity(d, d)),
            Group::Quaternion => Element::Quat(Quaternion::identity()),
        }
    }

    /// Checks membership; matrices must satisfy `AᵀA = I` to [`MEMBERSHIP_TOL`].
    pub fn check(&self, e: &Element) -> Result<(), CechError> {
        let ok = match (self, e) {
            (Group::Z2, Element::Sign(s)) => *s == 1 || *s == -1,
            (Group::Zk(k), Element::Mod(v)) => v < k,
            (Group::Orthogonal(d), Element::Matrix(m)) => {
                if m.shape() != (*d, *d) {
                    false
                } else {
                    let dev = (m.transpose() * m - DMatrix::identity(*d, *d)).abs().max();
                    if dev > MEMBERSHIP_TOL {
                        return Err(CechError::NotOrthogonal { deviation: dev });
                    }
                    true
                }
            }
            (Group::Quaternion, Element::Quat(q)) => (q.norm() - 1.0).abs() <= MEMBERSHIP_TOL,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(CechError::Group(format!("{e:?} is not an element of {}", self.tag())))
        }
    }

    pub fn mul(&self, a: &Element, b: &Element) -> Element {
        match (self, a, b) {
            (Group::Z2, Element::Sign(x), Element::Sign(y)) => Element::Sign(x * y),
            (Group::Zk(k), Element::Mod(x), Element::Mod(y)) => Element::Mod((x + y) % k),
            (_, Element::Matrix(x), Element::Matrix(y)) => Element::Matrix(x * y),
            (_, Element::Quat(x), Element::Quat(y)) => Element::Quat(x * y),
            _ => panic!("group operation on mismatched elements"),
        }
    }

    pub fn inv(&self, a: &Element) -> Element {
        match (self, a) {
            (Group::Z2, Element::Sign(x)) => Element::Sign(*x),
            (Group::Zk(k), Element::Mod(x)) => Element::Mod((k - x) % k),
            (_, Element::Matrix(x)) => Element::Matrix(x.transpose()),
            (_, Element::Quat(x)) => Element::Quat(x.conjugate()),
            _ => panic!("inverse of mismatched element"),
        }
    }

    /// Distance from the identity: 0/1 for discrete groups, max-entry
    /// deviation otherwise.
    pub fn distance_to_identity(&self, a: &Element) -> f64 {
        match a {
            Element::Sign(s) => f64::from(u8::from(*s != 1)),
            Element::Mod(v) => f64::from(u8::from(*v != 0)),
            Element::Matrix(m) => (m - DMatrix::identity(m.nrows(), m.ncols())).abs().max(),
            Element::Quat(q) => (q - Quaternion::identity()).coords.abs().max(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_round_trip() {
        for g in [Group::Z2, Group::Zk(5), Group::Orthogonal(3), Group::Quaternion] {
            assert_eq!(Group::from_tag(&g.tag()).unwrap(), g);
        }
        assert!(Group::from_tag("Z1").is_err());
        assert!(Group::from_tag("SU2").is_err());
    }

    #[test]
    fn arithmetic() {
        let g = Group::Zk(5);
        assert_eq!(g.mul(&Element::Mod(3), &Element::Mod(4)), Element::Mod(2));
        assert_eq!(g.inv(&Element::Mod(0)), Element::Mod(0));
        let o = Group::Orthogonal(2);
        let r = Element::Matrix(DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]));
        assert!(o.check(&r).is_ok());
        assert_eq!(o.distance_to_identity(&o.mul(&r, &o.inv(&r))), 0.0);
        let bad = Element::Matrix(DMatrix::from_row_slice(2, 2, &[1.0, 1e-6, 0.0, 1.0]));
        assert!(matches!(o.check(&bad), Err(CechError::NotOrthogonal { .. })));
    }
}
