//! d-metrics `g = g_ij e^i ⊗ e^j + h_ab e^a ⊗ e^b`, their off-diagonal
//! coordinate form and the adapted frame that block-diagonalizes it.

use nalgebra::DMatrix;
use ndarray::Array2;

use super::{GeometryError, NConnectionField};
use crate::expr::{parse, sum, ChartPoint, Dimensions, Evaluator, Expr};

pub(crate) const DEGENERACY_TOL: f64 = 1e-12;

/// Square matrix of expressions.
pub type ExprMatrix = Array2<Expr>;

/// Determinant by Laplace expansion along rows, memoized on the set of
/// remaining columns (`O(k 2^k)` nodes for a `k x k` matrix).
pub fn symbolic_det(a: &ExprMatrix) -> Expr {
    let k = a.nrows();
    let mut memo = std::collections::HashMap::new();
    det_rec(a, 0, (1usize << k) - 1, &mut memo)
}

fn det_rec(a: &ExprMatrix, row: usize, cols: usize, memo: &mut std::collections::HashMap<usize, Expr>) -> Expr {
    if cols == 0 {
        return Expr::one();
    }
    if let Some(e) = memo.get(&cols) {
        return e.clone();
    }
    let mut acc = Expr::zero();
    let mut sign = 1.0;
    for c in 0..a.ncols() {
        if cols & (1 << c) == 0 {
            continue;
        }
        let entry = &a[[row, c]];
        if !entry.is_zero() {
            let minor = det_rec(a, row + 1, cols & !(1 << c), memo);
            let term = entry * &minor;
            acc = if sign > 0.0 { &acc + &term } else { &acc - &term };
        }
        sign = -sign;
    }
    memo.insert(cols, acc.clone());
    acc
}

/// Inverse through the adjugate. Entries are left as quotients by the
/// determinant; nothing cancels symbolically.
pub fn symbolic_inverse(a: &ExprMatrix) -> ExprMatrix {
    let k = a.nrows();
    if k == 1 {
        return Array2::from_elem((1, 1), &Expr::one() / &a[[0, 0]]);
    }
    let det = symbolic_det(a);
    let mut inv = Array2::from_elem((k, k), Expr::zero());
    for i in 0..k {
        for j in 0..k {
            // inv[i][j] = cofactor(j, i) / det
            let minor = Array2::from_shape_fn((k - 1, k - 1), |(r, c)| {
                let rr = if r < j { r } else { r + 1 };
                let cc = if c < i { c } else { c + 1 };
                a[[rr, cc]].clone()
            });
            let cof = symbolic_det(&minor);
            let cof = if (i + j) % 2 == 0 { cof } else { -cof };
            inv[[i, j]] = &cof / &det;
        }
    }
    inv
}

pub(crate) fn eval_matrix(a: &ExprMatrix, ev: &mut Evaluator) -> Result<DMatrix<f64>, GeometryError> {
    let mut out = DMatrix::zeros(a.nrows(), a.ncols());
    for ((r, c), e) in a.indexed_iter() {
        out[(r, c)] = ev.eval(e)?;
    }
    Ok(out)
}

fn check_symmetric(block: &'static str, a: &ExprMatrix) -> Result<(), GeometryError> {
    for ((r, c), e) in a.indexed_iter() {
        if r < c && *e != a[[c, r]] {
            return Err(GeometryError::Shape(format!(
                "{block} block is not symmetric at ({}, {}): `{}` vs `{}`",
                r + 1,
                c + 1,
                e,
                a[[c, r]]
            )));
        }
    }
    Ok(())
}

pub(crate) fn nondegenerate(block: &'static str, a: &DMatrix<f64>, p: &ChartPoint) -> Result<(), GeometryError> {
    let det = a.determinant();
    if det.abs() <= DEGENERACY_TOL || !det.is_finite() {
        return Err(GeometryError::Degenerate { block, det, point: p.flat() });
    }
    Ok(())
}

/// Block data `(g_ij, h_ab, N^a_i)` of a d-metric.
#[derive(Debug, Clone)]
pub struct DMetric {
    dims: Dimensions,
    g: ExprMatrix,
    h: ExprMatrix,
    nc: NConnectionField,
}

/// A d-metric evaluated at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct DMetricEval {
    pub g: DMatrix<f64>,
    pub h: DMatrix<f64>,
    /// `N^a_i` stored `(i, a)`.
    pub n: DMatrix<f64>,
}

impl DMetric {
    pub fn new(g: ExprMatrix, h: ExprMatrix, nc: NConnectionField) -> Result<Self, GeometryError> {
        let dims = nc.dims();
        if g.dim() != (dims.n, dims.n) || h.dim() != (dims.m, dims.m) {
            return Err(GeometryError::Shape(format!(
                "expected g {0}x{0} and h {1}x{1}, got {2:?} and {3:?}",
                dims.n,
                dims.m,
                g.dim(),
                h.dim()
            )));
        }
        check_symmetric("g", &g)?;
        check_symmetric("h", &h)?;
        for e in g.iter().chain(h.iter()) {
            if let Some(v) = e.out_of_range(dims) {
                return Err(GeometryError::Shape(format!("variable {v} outside dims")));
            }
        }
        Ok(Self { dims, g, h, nc })
    }

    pub fn from_strings(
        dims: Dimensions,
        g: &[Vec<String>],
        h: &[Vec<String>],
        n: &[Vec<String>],
    ) -> Result<Self, GeometryError> {
        let block = |rows: &[Vec<String>], k: usize, name: &str| -> Result<ExprMatrix, GeometryError> {
            if rows.len() != k || rows.iter().any(|r| r.len() != k) {
                return Err(GeometryError::Shape(format!("{name} must be {k}x{k}")));
            }
            let mut out = Array2::from_elem((k, k), Expr::zero());
            for (r, row) in rows.iter().enumerate() {
                for (c, text) in row.iter().enumerate() {
                    out[[r, c]] = parse(text, dims)?;
                }
            }
            Ok(out)
        };
        let nc = if n.is_empty() { NConnectionField::zero(dims) } else { NConnectionField::from_strings(dims, n)? };
        Self::new(block(g, dims.n, "g")?, block(h, dims.m, "h")?, nc)
    }

    /// `g = I`, `h = I`, `N = 0`.
    pub fn flat(dims: Dimensions) -> Self {
        Self::euclidean_blocks(NConnectionField::zero(dims))
    }

    /// Identity blocks around a given N-connection.
    pub fn euclidean_blocks(nc: NConnectionField) -> Self {
        let dims = nc.dims();
        let id = |k: usize| Array2::from_shape_fn((k, k), |(r, c)| if r == c { Expr::one() } else { Expr::zero() });
        Self { dims, g: id(dims.n), h: id(dims.m), nc }
    }

    pub fn dims(&self) -> Dimensions {
        self.dims
    }

    pub fn g(&self) -> &ExprMatrix {
        &self.g
    }

    pub fn h(&self) -> &ExprMatrix {
        &self.h
    }

    pub fn nconnection(&self) -> &NConnectionField {
        &self.nc
    }

    pub fn with_nconnection(&self, nc: NConnectionField) -> Result<Self, GeometryError> {
        Self::new(self.g.clone(), self.h.clone(), nc)
    }

    /// The d-metric in the adapted frame as one `(n+m)` block-diagonal matrix.
    pub fn frame_metric(&self) -> ExprMatrix {
        let Dimensions { n, m } = self.dims;
        Array2::from_shape_fn((n + m, n + m), |(r, c)| {
            if r < n && c < n {
                self.g[[r, c]].clone()
            } else if r >= n && c >= n {
                self.h[[r - n, c - n]].clone()
            } else {
                Expr::zero()
            }
        })
    }

    /// Coordinate-basis matrix `[[g + NᵀhN, Nh], [hN, h]]` as expressions.
    pub fn coordinate_metric(&self) -> ExprMatrix {
        let Dimensions { n, m } = self.dims;
        let nn = |i: usize, a: usize| self.nc.get(i, a);
        // (hN)_{a i} = h_ab N^b_i
        let hn = Array2::from_shape_fn((m, n), |(a, i)| sum((0..m).map(|b| &self.h[[a, b]] * nn(i, b))));
        let mut out = Array2::from_elem((n + m, n + m), Expr::zero());
        for i in 0..n {
            for j in 0..n {
                let corr = sum((0..m).map(|a| nn(i, a) * &hn[[a, j]]));
                out[[i, j]] = &self.g[[i, j]] + &corr;
            }
            for a in 0..m {
                out[[i, n + a]] = hn[[a, i]].clone();
                out[[n + a, i]] = hn[[a, i]].clone();
            }
        }
        for a in 0..m {
            for b in 0..m {
                out[[n + a, n + b]] = self.h[[a, b]].clone();
            }
        }
        out
    }

    pub fn eval(&self, p: &ChartPoint) -> Result<DMetricEval, GeometryError> {
        p.check(self.dims)?;
        let mut ev = Evaluator::new(p);
        let g = eval_matrix(&self.g, &mut ev)?;
        let h = eval_matrix(&self.h, &mut ev)?;
        let mut n = DMatrix::zeros(self.dims.n, self.dims.m);
        for ((i, a), e) in self.nc.coeffs().indexed_iter() {
            n[(i, a)] = ev.eval(e)?;
        }
        Ok(DMetricEval { g, h, n })
    }

    /// Evaluates and checks `|det g|, |det h| > 1e-12`.
    pub fn eval_checked(&self, p: &ChartPoint) -> Result<DMetricEval, GeometryError> {
        let e = self.eval(p)?;
        nondegenerate("g", &e.g, p)?;
        if self.dims.m > 0 {
            nondegenerate("h", &e.h, p)?;
        }
        Ok(e)
    }
}

/// Adapted frame at a point. Rows of `e` are the frame vectors
/// `e_i = ∂_i − N^a_i ∂_a`, `e_a = ∂_a` in coordinate components, so the
/// lower-left block is zero. Columns of `e_inv` are the coframe
/// `e^i = dx^i`, `e^a = dy^a + N^a_i dx^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameEval {
    pub e: DMatrix<f64>,
    pub e_inv: DMatrix<f64>,
}

impl FrameEval {
    /// `n` holds `N^a_i` at `(i, a)`.
    pub fn from_nconnection(n: &DMatrix<f64>) -> Self {
        let (nb, mb) = n.shape();
        let mut e = DMatrix::identity(nb + mb, nb + mb);
        let mut e_inv = DMatrix::identity(nb + mb, nb + mb);
        for i in 0..nb {
            for a in 0..mb {
                e[(i, nb + a)] = -n[(i, a)];
                e_inv[(i, nb + a)] = n[(i, a)];
            }
        }
        Self { e, e_inv }
    }

    pub fn at(nc: &NConnectionField, p: &ChartPoint) -> Result<Self, GeometryError> {
        let n = nc.eval(p)?;
        Ok(Self::from_nconnection(&DMatrix::from_fn(n.nrows(), n.ncols(), |r, c| n[[r, c]])))
    }

    /// `E G Eᵀ`: the coordinate metric expressed in the adapted frame.
    pub fn block_diagonalize(&self, coordinate: &DMatrix<f64>) -> DMatrix<f64> {
        &self.e * coordinate * self.e.transpose()
    }

    /// Coordinate components of the vector with adapted components `v`.
    pub fn to_coordinates(&self, v: &nalgebra::DVector<f64>) -> nalgebra::DVector<f64> {
        self.e.transpose() * v
    }
}

pub fn assemble_offdiagonal(m: &DMetric, p: &ChartPoint) -> Result<DMatrix<f64>, GeometryError> {
    let blocks = m.eval_checked(p)?;
    Ok(assemble_from_blocks(&blocks))
}

/// `[[g + NᵀhN, Nh], [hN, h]]` from numeric blocks.
pub fn assemble_from_blocks(b: &DMetricEval) -> DMatrix<f64> {
    let (n, m) = b.n.shape();
    // NN[i][a] = N^a_i, so (NᵀhN)_ij in coordinates is (NN h NNᵀ)_ij
    let hn = &b.h * b.n.transpose(); // (a, i)
    let mut out = DMatrix::zeros(n + m, n + m);
    let upper = &b.g + &b.n * &hn;
    out.view_mut((0, 0), (n, n)).copy_from(&upper);
    out.view_mut((0, n), (n, m)).copy_from(&hn.transpose());
    out.view_mut((n, 0), (m, n)).copy_from(&hn);
    out.view_mut((n, n), (m, m)).copy_from(&b.h);
    out
}

/// Recovers `(g, h, N)` from a coordinate metric.
pub fn split_to_dmetric(coordinate: &DMatrix<f64>, dims: Dimensions) -> Result<DMetricEval, GeometryError> {
    let Dimensions { n, m } = dims;
    if coordinate.shape() != (n + m, n + m) {
        return Err(GeometryError::Shape(format!(
            "coordinate metric must be {0}x{0}, got {1:?}",
            n + m,
            coordinate.shape()
        )));
    }
    let h = coordinate.view((n, n), (m, m)).into_owned();
    let det = h.determinant();
    if det.abs() <= DEGENERACY_TOL {
        return Err(GeometryError::Degenerate { block: "h", det, point: vec![] });
    }
    let h_inv = h.clone().try_inverse().ok_or(GeometryError::Degenerate { block: "h", det, point: vec![] })?;
    // G_{i, n+b} = h_ba N^a_i  =>  N^a_i = (h⁻¹)_{ab} G_{i, n+b}
    let off = coordinate.view((0, n), (n, m)).into_owned();
    let nmat = &off * &h_inv;
    let g = coordinate.view((0, 0), (n, n)).into_owned() - &nmat * &h * nmat.transpose();
    Ok(DMetricEval { g, h, n: nmat })
}
