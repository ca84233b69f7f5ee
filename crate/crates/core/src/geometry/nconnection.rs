//! Nonlinear connections `N = N^a_i(u) dx^i ⊗ ∂_a`, their adapted frames and
//! the curvature `Ω^a_ij` of the horizontal distribution.

use ndarray::{Array2, Array3};

use super::GeometryError;
use crate::expr::{parse, ChartPoint, Differentiator, Dimensions, Evaluator, Expr, Var};

/// Coefficients `N^a_i`, stored `coeffs[[i, a]]`.
#[derive(Debug, Clone)]
pub struct NConnectionField {
    dims: Dimensions,
    coeffs: Array2<Expr>,
}

impl NConnectionField {
    pub fn new(dims: Dimensions, coeffs: Array2<Expr>) -> Result<Self, GeometryError> {
        if coeffs.dim() != (dims.n, dims.m) {
            return Err(GeometryError::Shape(format!(
                "N-connection must be {}x{}, got {:?}",
                dims.n,
                dims.m,
                coeffs.dim()
            )));
        }
        for e in coeffs.iter() {
            if let Some(v) = e.out_of_range(dims) {
                return Err(GeometryError::Shape(format!("variable {v} outside dims in N")));
            }
        }
        Ok(Self { dims, coeffs })
    }

    pub fn zero(dims: Dimensions) -> Self {
        Self { dims, coeffs: Array2::from_elem((dims.n, dims.m), Expr::zero()) }
    }

    /// Rows indexed by `i`, columns by `a`.
    pub fn from_strings(dims: Dimensions, rows: &[Vec<String>]) -> Result<Self, GeometryError> {
        if rows.len() != dims.n || rows.iter().any(|r| r.len() != dims.m) {
            return Err(GeometryError::Shape(format!("N-connection must be {}x{}", dims.n, dims.m)));
        }
        let mut coeffs = Array2::from_elem((dims.n, dims.m), Expr::zero());
        for (i, row) in rows.iter().enumerate() {
            for (a, text) in row.iter().enumerate() {
                coeffs[[i, a]] = parse(text, dims)?;
            }
        }
        Ok(Self { dims, coeffs })
    }

    pub fn dims(&self) -> Dimensions {
        self.dims
    }

    /// `N^a_i`.
    pub fn get(&self, i: usize, a: usize) -> &Expr {
        &self.coeffs[[i, a]]
    }

    pub fn coeffs(&self) -> &Array2<Expr> {
        &self.coeffs
    }

    /// `e_i f = ∂_i f − N^a_i ∂_a f` as an expression.
    pub fn adapted_derivative(&self, f: &Expr, i: usize, diff: &mut Differentiator) -> Expr {
        let mut out = diff.diff(f, Var::X(i));
        for a in 0..self.dims.m {
            let n = self.get(i, a);
            if n.is_zero() {
                continue;
            }
            let df = diff.diff(f, Var::Y(a));
            out = &out - &(n * &df);
        }
        out
    }

    /// Adapted frame derivative along direction `alpha ∈ 0..n+m`; `e_a = ∂_a`.
    pub fn frame_derivative(&self, f: &Expr, alpha: usize, diff: &mut Differentiator) -> Expr {
        if alpha < self.dims.n {
            self.adapted_derivative(f, alpha, diff)
        } else {
            diff.diff(f, Var::Y(alpha - self.dims.n))
        }
    }

    /// Symbolic `Ω^a_ij = e_j N^a_i − e_i N^a_j`, stored `[[a, i, j]]`.
    pub fn curvature_field(&self, diff: &mut Differentiator) -> Array3<Expr> {
        let Dimensions { n, m } = self.dims;
        let mut out = Array3::from_elem((m, n, n), Expr::zero());
        for a in 0..m {
            for i in 0..n {
                for j in (i + 1)..n {
                    let w = self.adapted_derivative(self.get(i, a), j, diff)
                        - self.adapted_derivative(self.get(j, a), i, diff);
                    out[[a, j, i]] = -&w;
                    out[[a, i, j]] = w;
                }
            }
        }
        out
    }

    pub fn eval(&self, p: &ChartPoint) -> Result<Array2<f64>, GeometryError> {
        p.check(self.dims)?;
        let mut ev = Evaluator::new(p);
        let mut out = Array2::zeros((self.dims.n, self.dims.m));
        for ((i, a), e) in self.coeffs.indexed_iter() {
            out[[i, a]] = ev.eval(e)?;
        }
        Ok(out)
    }

    /// `∂_μ N^a_i` at `p`, stored `[[i, a, mu]]`.
    pub fn gradient(&self, p: &ChartPoint, diff: &mut Differentiator) -> Result<Array3<f64>, GeometryError> {
        let Dimensions { n, m } = self.dims;
        let mut ev = Evaluator::new(p);
        let mut out = Array3::zeros((n, m, n + m));
        for i in 0..n {
            for a in 0..m {
                for mu in 0..n + m {
                    let d = diff.diff(self.get(i, a), self.dims.var(mu));
                    out[[i, a, mu]] = ev.eval(&d)?;
                }
            }
        }
        Ok(out)
    }
}

/// `Ω^a_ij` at `p`, stored `[[a, i, j]]`; antisymmetric in `i, j`.
pub fn nconnection_curvature(nc: &NConnectionField, p: &ChartPoint) -> Result<Array3<f64>, GeometryError> {
    p.check(nc.dims())?;
    let mut diff = Differentiator::new();
    let field = nc.curvature_field(&mut diff);
    let mut ev = Evaluator::new(p);
    let mut out = Array3::zeros(field.dim());
    for (idx, e) in field.indexed_iter() {
        out[idx] = ev.eval(e)?;
    }
    Ok(out)
}

/// Nonzero anholonomy coefficients of `[e_α, e_β] = W^γ_αβ e_γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Anholonomy {
    /// `W^b_ia = ∂_a N^b_i`, stored `[[b, i, a]]`.
    pub w_hv: Array3<f64>,
    /// `W^a_ij`, stored `[[a, i, j]]`. Equal to `Ω^a_ij`.
    pub w_hh: Array3<f64>,
}

impl Anholonomy {
    /// All coefficients in one `(n+m)^3` array `[[gamma, alpha, beta]]`,
    /// antisymmetric in the last two slots.
    pub fn full(&self, dims: Dimensions) -> Array3<f64> {
        let Dimensions { n, m } = dims;
        let mut w = Array3::zeros((n + m, n + m, n + m));
        for b in 0..m {
            for i in 0..n {
                for a in 0..m {
                    let v = self.w_hv[[b, i, a]];
                    w[[n + b, i, n + a]] = v;
                    w[[n + b, n + a, i]] = -v;
                }
            }
        }
        for a in 0..m {
            for i in 0..n {
                for j in 0..n {
                    w[[n + a, i, j]] = self.w_hh[[a, i, j]];
                }
            }
        }
        w
    }
}

pub fn anholonomy(nc: &NConnectionField, p: &ChartPoint) -> Result<Anholonomy, GeometryError> {
    let Dimensions { n, m } = nc.dims();
    let mut diff = Differentiator::new();
    let grad = nc.gradient(p, &mut diff)?;
    let mut w_hv = Array3::zeros((m, n, m));
    for b in 0..m {
        for i in 0..n {
            for a in 0..m {
                w_hv[[b, i, a]] = grad[[i, b, n + a]];
            }
        }
    }
    Ok(Anholonomy { w_hv, w_hh: nconnection_curvature(nc, p)? })
}

/// `e_i f` for an expression `f`, with `i` zero-based.
pub fn adapted_derivative(f: &Expr, nc: &NConnectionField, i: usize) -> Expr {
    nc.adapted_derivative(f, i, &mut Differentiator::new())
}
