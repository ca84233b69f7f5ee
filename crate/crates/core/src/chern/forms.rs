//! Exterior algebra on `dim ≤ MAX_FORM_DIM` generators with basis monomials
//! indexed by bitmasks: bit `μ` set means `dx^μ` is a factor, factors in
//! increasing order.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::ChernError;

pub const MAX_FORM_DIM: usize = 8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Sign of `dx^I ∧ dx^J` relative to `dx^{I∪J}`, or `None` when they overlap.
pub fn wedge_sign(i: u32, j: u32) -> Option<f64> {
    if i & j != 0 {
        return None;
    }
    // count pairs (a ∈ I, b ∈ J) with a > b
    let mut inversions = 0;
    let mut rest = j;
    while rest != 0 {
        let b = rest.trailing_zeros();
        inversions += (i >> (b + 1)).count_ones();
        rest &= rest - 1;
    }
    Some(if inversions % 2 == 0 { 1.0 } else { -1.0 })
}

/// Mask of the pair `dx^μ ∧ dx^ν` with `μ < ν`.
pub fn pair_mask(mu: usize, nu: usize) -> u32 {
    (1 << mu) | (1 << nu)
}

/// Complex-valued inhomogeneous form.
#[derive(Debug, Clone, PartialEq)]
pub struct Form {
    dim: usize,
    c: Vec<Complex64>,
}

impl Form {
    pub fn zero(dim: usize) -> Result<Self, ChernError> {
        if dim == 0 || dim > MAX_FORM_DIM {
            return Err(ChernError::Dimension(dim));
        }
        Ok(Self { dim, c: vec![ZERO; 1 << dim] })
    }

    pub fn scalar(dim: usize, x: Complex64) -> Result<Self, ChernError> {
        let mut f = Self::zero(dim)?;
        f.c[0] = x;
        Ok(f)
    }

    /// `x · dx^0 ∧ ... ∧ dx^{dim-1}`.
    pub fn volume(dim: usize, x: Complex64) -> Result<Self, ChernError> {
        let mut f = Self::zero(dim)?;
        let top = f.c.len() - 1;
        f.c[top] = x;
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, mask: u32) -> Complex64 {
        self.c[mask as usize]
    }

    pub fn set(&mut self, mask: u32, v: Complex64) {
        self.c[mask as usize] = v;
    }

    pub fn top(&self) -> Complex64 {
        self.c[self.c.len() - 1]
    }

    pub fn wedge(&self, other: &Form) -> Form {
        let mut out = Form { dim: self.dim, c: vec![ZERO; self.c.len()] };
        for (i, a) in self.c.iter().enumerate().filter(|(_, a)| **a != ZERO) {
            for (j, b) in other.c.iter().enumerate().filter(|(_, b)| **b != ZERO) {
                if let Some(s) = wedge_sign(i as u32, j as u32) {
                    out.c[i | j] += a * b * s;
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Form) -> Form {
        Form { dim: self.dim, c: self.c.iter().zip(&other.c).map(|(a, b)| a + b).collect() }
    }

    pub fn scale(&self, s: Complex64) -> Form {
        Form { dim: self.dim, c: self.c.iter().map(|a| a * s).collect() }
    }

    /// Homogeneous part of degree `k`.
    pub fn part(&self, k: usize) -> Form {
        Form {
            dim: self.dim,
            c: self
                .c
                .iter()
                .enumerate()
                .map(|(m, a)| if (m as u32).count_ones() as usize == k { *a } else { ZERO })
                .collect(),
        }
    }

    /// Largest `|coefficient|` outside degree `k`.
    pub fn off_degree(&self, k: usize) -> f64 {
        self.c
            .iter()
            .enumerate()
            .filter(|(m, _)| (*m as u32).count_ones() as usize != k)
            .map(|(_, a)| a.norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.c.iter().map(|a| a.im.abs()).fold(0.0, f64::max)
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.c
    }
}

/// Matrix-valued form of fixed rank.
#[derive(Debug, Clone, PartialEq)]
pub struct MatForm {
    dim: usize,
    rank: usize,
    c: Vec<DMatrix<Complex64>>,
}

impl MatForm {
    pub fn zero(dim: usize, rank: usize) -> Result<Self, ChernError> {
        if dim == 0 || dim > MAX_FORM_DIM {
            return Err(ChernError::Dimension(dim));
        }
        Ok(Self { dim, rank, c: vec![DMatrix::zeros(rank, rank); 1 << dim] })
    }

    /// `Σ_{μ<ν} F_μν dx^μ ∧ dx^ν` from a component function.
    pub fn two_form(
        dim: usize,
        rank: usize,
        f: impl Fn(usize, usize) -> DMatrix<Complex64>,
    ) -> Result<Self, ChernError> {
        let mut out = Self::zero(dim, rank)?;
        for mu in 0..dim {
            for nu in mu + 1..dim {
                let m = f(mu, nu);
                if m.shape() != (rank, rank) {
                    return Err(ChernError::Shape(format!("component of shape {:?} for rank {rank}", m.shape())));
                }
                out.c[pair_mask(mu, nu) as usize] = m;
            }
        }
        Ok(out)
    }

    pub fn identity(dim: usize, rank: usize) -> Result<Self, ChernError> {
        let mut out = Self::zero(dim, rank)?;
        out.c[0] = DMatrix::identity(rank, rank);
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn get(&self, mask: u32) -> &DMatrix<Complex64> {
        &self.c[mask as usize]
    }

    /// `F_μν` for any ordered pair, antisymmetric by construction.
    pub fn component(&self, mu: usize, nu: usize) -> DMatrix<Complex64> {
        match mu.cmp(&nu) {
            std::cmp::Ordering::Less => self.c[pair_mask(mu, nu) as usize].clone(),
            std::cmp::Ordering::Greater => -self.c[pair_mask(nu, mu) as usize].clone(),
            std::cmp::Ordering::Equal => DMatrix::zeros(self.rank, self.rank),
        }
    }

    pub fn wedge(&self, other: &MatForm) -> MatForm {
        let mut out =
            MatForm { dim: self.dim, rank: self.rank, c: vec![DMatrix::zeros(self.rank, self.rank); self.c.len()] };
        for (i, a) in self.c.iter().enumerate().filter(|(_, a)| a.iter().any(|z| *z != ZERO)) {
            for (j, b) in other.c.iter().enumerate().filter(|(_, b)| b.iter().any(|z| *z != ZERO)) {
                if let Some(s) = wedge_sign(i as u32, j as u32) {
                    out.c[i | j] += a * b * Complex64::new(s, 0.0);
                }
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> MatForm {
        MatForm { dim: self.dim, rank: self.rank, c: self.c.iter().map(|a| a * s).collect() }
    }

    pub fn trace(&self) -> Form {
        Form { dim: self.dim, c: self.c.iter().map(|a| a.trace()).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().flat_map(|a| a.iter()).map(|z| z.norm()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn signs() {
        // dx1 ∧ dx0 = −dx0 ∧ dx1
        assert_eq!(wedge_sign(0b10, 0b01), Some(-1.0));
        assert_eq!(wedge_sign(0b01, 0b10), Some(1.0));
        assert_eq!(wedge_sign(0b11, 0b01), None);
        // (dx0∧dx2) ∧ dx1 = −dx0∧dx1∧dx2
        assert_eq!(wedge_sign(0b101, 0b010), Some(-1.0));
    }

    #[test]
    fn two_forms_commute_and_one_forms_anticommute() {
        let mut a = Form::zero(4).unwrap();
        a.set(pair_mask(0, 1), c(2.0));
        a.set(pair_mask(1, 3), c(-1.0));
        let mut b = Form::zero(4).unwrap();
        b.set(pair_mask(2, 3), c(0.5));
        b.set(pair_mask(0, 2), c(3.0));
        assert_eq!(a.wedge(&b), b.wedge(&a));
        let mut x = Form::zero(3).unwrap();
        x.set(0b001, c(1.0));
        let mut y = Form::zero(3).unwrap();
        y.set(0b100, c(1.0));
        assert_eq!(x.wedge(&y), y.wedge(&x).scale(c(-1.0)));
        assert_eq!(x.wedge(&x).max_abs(), 0.0);
    }
}
