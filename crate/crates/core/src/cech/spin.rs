use std::collections::BTreeMap;

use nalgebra::{DMatrix, Matrix3, Quaternion, Rotation3, UnitQuaternion};

use super::cochain::{coboundary_matrix, cocycle_of_chain, Cochain};
use super::cover::{Cover, Simplex};
use super::group::{Element, Group};
use super::CechError;

/// Tolerance for `q_αβ q_βγ q_γα = I` before lifting.
pub const COCYCLE_TOL: f64 = 1e-9;

/// Deterministic lift of a rotation: the unit quaternion whose first
/// component above `1e-12` in absolute value is positive.
pub fn lift_rotation(m: &DMatrix<f64>) -> Result<Quaternion<f64>, CechError> {
    if m.shape() != (3, 3) {
        return Err(CechError::Group(format!("rotation must be 3x3, got {:?}", m.shape())));
    }
    let dev = (m.transpose() * m - DMatrix::identity(3, 3)).abs().max();
    if dev > super::group::MEMBERSHIP_TOL {
        return Err(CechError::NotOrthogonal { deviation: dev });
    }
    let det = m.determinant();
    if det < 0.0 {
        return Err(CechError::Group(format!("determinant {det} is not +1")));
    }
    let r = Rotation3::from_matrix_unchecked(Matrix3::from_iterator(m.iter().copied()));
    let q = UnitQuaternion::from_rotation_matrix(&r).into_inner();
    Ok(canonical_sign(q))
}

pub fn canonical_sign(q: Quaternion<f64>) -> Quaternion<f64> {
    let c = [q.w, q.i, q.j, q.k];
    match c.iter().find(|v| v.abs() > 1e-12) {
        Some(v) if *v < 0.0 => -q,
        _ => q,
    }
}

/// Rotation matrix of a unit quaternion.
pub fn rotation_of(q: &Quaternion<f64>) -> DMatrix<f64> {
    let r = UnitQuaternion::from_quaternion(*q).to_rotation_matrix();
    DMatrix::from_iterator(3, 3, r.matrix().iter().copied())
}

/// Second Stiefel–Whitney data of an SO(3) transition cocycle.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinObstruction {
    /// `w_αβγ = ŝ_αβ ŝ_βγ ŝ_γα ∈ {±1}` for the chosen lifts `ŝ`.
    pub cocycle: Cochain,
    /// Representative of the class reduced modulo `im δ¹`.
    pub class: Vec<bool>,
    /// `true` iff `w` is a coboundary, i.e. the lifts can be re-signed into a
    /// Spin(3) cocycle.
    pub spin_exists: bool,
    /// A 1-cochain `x` with `δx = w` when one exists.
    pub witness: Option<Cochain>,
}

/// Lifts `q` (an `O3` 1-cochain of rotations) to unit quaternions, optionally
/// flipping the sign of the lifts on `flips`, and computes the obstruction.
pub fn spin_obstruction_with_flips(
    cover: &Cover,
    q: &Cochain,
    flips: &[Simplex],
) -> Result<SpinObstruction, CechError> {
    if q.degree != 1 || q.group != Group::Orthogonal(3) {
        return Err(CechError::Group("spin obstruction needs an O3 1-cochain".into()));
    }
    let c = cocycle_of_chain(cover, q)?;
    if let Some((s, e)) = c.values.iter().find(|(_, e)| Group::Orthogonal(3).distance_to_identity(e) > COCYCLE_TOL) {
        return Err(CechError::NotCocycle {
            simplex: s.clone(),
            deviation: Group::Orthogonal(3).distance_to_identity(e),
        });
    }
    let mut lifts = BTreeMap::new();
    for e in cover.simplices(1) {
        let Element::Matrix(m) = q.get(e)? else { unreachable!("checked O3 cochain") };
        let mut s = lift_rotation(m)?;
        if flips.contains(e) {
            s = -s;
        }
        lifts.insert(e.clone(), Element::Quat(s));
    }
    let lifted = Cochain { degree: 1, group: Group::Quaternion, values: lifts };
    let prod = cocycle_of_chain(cover, &lifted)?;
    let mut values = BTreeMap::new();
    for (t, e) in &prod.values {
        let Element::Quat(p) = e else { unreachable!("quaternion cochain") };
        values.insert(t.clone(), Element::Sign(if p.w < 0.0 { -1 } else { 1 }));
    }
    let w = Cochain { degree: 2, group: Group::Z2, values };
    let bits = w.to_bits(cover)?;
    let d1 = coboundary_matrix(cover, 1);
    let class = d1.reduce_mod_image(&bits);
    let witness = d1.solve(&bits).map(|x| Cochain::from_bits(cover, 1, &x));
    Ok(SpinObstruction { cocycle: w, class, spin_exists: witness.is_some(), witness })
}

pub fn spin_obstruction(cover: &Cover, q: &Cochain) -> Result<SpinObstruction, CechError> {
    spin_obstruction_with_flips(cover, q, &[])
}

/// Rotation about `z` by `θ`, as an `O3` element.
pub fn z_rotation(theta: f64) -> DMatrix<f64> {
    let (s, c) = theta.sin_cos();
    DMatrix::from_row_slice(3, 3, &[c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0])
}

/// `q_αβ = R(θ_α − θ_β)` about a fixed axis: a cocycle whose canonical lifts
/// pick up a sign on every edge with `|θ_α − θ_β| > π`.
pub fn angle_chain(cover: &Cover, angles: &[f64]) -> Result<Cochain, CechError> {
    let values = cover
        .simplices(1)
        .iter()
        .map(|e| (e.clone(), Element::Matrix(z_rotation(angles[e[0]] - angles[e[1]]))))
        .collect();
    Cochain::new(cover, 1, Group::Orthogonal(3), values)
}

/// `q = R_x(π)^{α} R_y(π)^{β}` for two Z/2 1-cocycles `α, β`: a flat
/// Klein-four bundle whose lift to the quaternion group is obstructed by
/// `α ∪ β`.
pub fn klein_chain(cover: &Cover, alpha: &[bool], beta: &[bool]) -> Result<Cochain, CechError> {
    let rx = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -1.0, -1.0]));
    let ry = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, 1.0, -1.0]));
    let id = DMatrix::identity(3, 3);
    let values = cover
        .simplices(1)
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let a = if alpha[i] { &rx } else { &id };
            let b = if beta[i] { &ry } else { &id };
            (e.clone(), Element::Matrix(a * b))
        })
        .collect();
    Cochain::new(cover, 1, Group::Orthogonal(3), values)
}

/// Two independent representatives of `H¹(nerve; Z/2)` when it has dimension
/// at least two.
pub fn h1_pair(cover: &Cover) -> Option<(Vec<bool>, Vec<bool>)> {
    let d0 = coboundary_matrix(cover, 0);
    let d1 = coboundary_matrix(cover, 1);
    let mut found: Vec<Vec<bool>> = Vec::new();
    for z in d1.kernel() {
        // reduction is linear and canonical, so distinct nonzero residues are independent
        let r = d0.reduce_mod_image(&z);
        if r.iter().any(|&b| b) && !found.contains(&r) {
            found.push(r);
            if found.len() == 2 {
                return Some((found[0].clone(), found[1].clone()));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cech::cover::{disk_cover, torus7};

    #[test]
    fn lift_is_canonical() {
        let q = lift_rotation(&z_rotation(3.0)).unwrap();
        assert!(q.w > 0.0);
        let q = lift_rotation(&z_rotation(std::f64::consts::PI)).unwrap();
        assert!(q.w.abs() < 1e-12 && q.k > 0.0);
        assert!((rotation_of(&q) - z_rotation(std::f64::consts::PI)).abs().max() < 1e-12);
        let mut bad = z_rotation(0.3);
        bad[(0, 0)] += 1e-6;
        assert!(matches!(lift_rotation(&bad), Err(CechError::NotOrthogonal { .. })));
    }

    #[test]
    fn identity_chain_is_unobstructed() {
        let cover = torus7();
        let q = Cochain::constant(&cover, 1, Group::Orthogonal(3), Group::Orthogonal(3).identity()).unwrap();
        let s = spin_obstruction(&cover, &q).unwrap();
        assert!(s.cocycle.is_identity() && s.spin_exists);
    }

    #[test]
    fn disk_sign_on_one_triangle_is_exact() {
        let cover = disk_cover(4);
        let q = angle_chain(&cover, &[0.0, 1.7, -1.7, -0.5, 0.5]).unwrap();
        let s = spin_obstruction(&cover, &q).unwrap();
        let minus: Vec<_> = s.cocycle.values.iter().filter(|(_, e)| **e == Element::Sign(-1)).collect();
        assert_eq!(minus.len(), 1);
        assert_eq!(minus[0].0, &vec![0, 1, 2]);
        assert!(s.spin_exists);
        assert!(s.class.iter().all(|&b| !b));
    }

    #[test]
    fn torus_klein_bundle_is_obstructed_for_every_lift() {
        let cover = torus7();
        let (a, b) = h1_pair(&cover).unwrap();
        let q = klein_chain(&cover, &a, &b).unwrap();
        let s = spin_obstruction(&cover, &q).unwrap();
        assert!(!s.spin_exists);
        for e in cover.simplices(1).iter().take(7) {
            let f = spin_obstruction_with_flips(&cover, &q, std::slice::from_ref(e)).unwrap();
            assert!(!f.spin_exists);
            assert_eq!(f.class, s.class);
        }
    }

    #[test]
    fn non_cocycle_is_rejected() {
        let cover = disk_cover(3);
        let mut q = angle_chain(&cover, &[0.0, 0.1, 0.2, 0.3]).unwrap();
        q.values.insert(vec![0, 1], Element::Matrix(z_rotation(0.5)));
        assert!(matches!(spin_obstruction(&cover, &q), Err(CechError::NotCocycle { .. })));
    }
}
