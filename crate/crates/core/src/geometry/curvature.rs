use nalgebra::DMatrix;
use ndarray::{Array2, Array3, Array4};

use super::metric::eval_matrix;
use super::{inverse_checked, symbolic_inverse, DConnectionField, DMetric, ExprMatrix, FrameEval, GeometryError};
use crate::expr::{ChartPoint, Differentiator, Dimensions, Evaluator, Expr, Var};

/// The six curvature families at a point. `R^α_βγδ = [R(e_δ, e_γ) e_β]^α`,
/// antisymmetric in the last two slots.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureEval {
    /// `R^i_hjk` at `[[i, h, j, k]]`.
    pub r_hhhh: Array4<f64>,
    /// `R^a_bjk` at `[[a, b, j, k]]`.
    pub r_vvhh: Array4<f64>,
    /// `R^i_jka` at `[[i, j, k, a]]`.
    pub r_hhhv: Array4<f64>,
    /// `R^c_bka` at `[[c, b, k, a]]`.
    pub r_vvhv: Array4<f64>,
    /// `R^i_jbc` at `[[i, j, b, c]]`.
    pub r_hhvv: Array4<f64>,
    /// `R^a_bcd` at `[[a, b, c, d]]`.
    pub r_vvvv: Array4<f64>,
    pub at: ChartPoint,
}

/// Ricci d-tensor blocks and the scalar curvature.
#[derive(Debug, Clone, PartialEq)]
pub struct RicciEval {
    pub r_ij: Array2<f64>,
    pub r_ia: Array2<f64>,
    pub r_ai: Array2<f64>,
    pub r_ab: Array2<f64>,
    /// `g^ij R_ij`.
    pub scalar_h: f64,
    /// `h^ab R_ab`.
    pub scalar_v: f64,
    pub scalar: f64,
    pub at: ChartPoint,
}

/// Coordinate partials `∂_μ` of every entry, stored with `μ` appended.
fn partials3(a: &Array3<Expr>, dims: Dimensions, diff: &mut Differentiator) -> Array4<Expr> {
    let (p, q, r) = a.dim();
    let t = dims.total();
    Array4::from_shape_fn((p, q, r, t), |(i, j, k, mu)| diff.diff(&a[[i, j, k]], dims.var(mu)))
}

/// `e_α` of every entry at a point: `E[α][μ] ∂_μ`.
fn frame_grad3(partials: &Array4<Expr>, frame: &FrameEval, ev: &mut Evaluator) -> Result<Array4<f64>, GeometryError> {
    let (p, q, r, t) = partials.dim();
    let mut coord = Array4::zeros((p, q, r, t));
    for (idx, e) in partials.indexed_iter() {
        if !e.is_zero() {
            coord[idx] = ev.eval(e)?;
        }
    }
    let mut out = Array4::zeros((p, q, r, t));
    for i in 0..p {
        for j in 0..q {
            for k in 0..r {
                for alpha in 0..t {
                    out[[i, j, k, alpha]] = (0..t).map(|mu| frame.e[(alpha, mu)] * coord[[i, j, k, mu]]).sum();
                }
            }
        }
    }
    Ok(out)
}

/// Everything symbolic that curvature evaluation needs, differentiated once
/// so that evaluation at many points only walks expression DAGs.
#[derive(Debug, Clone)]
pub struct CurvatureField {
    metric: DMetric,
    field: DConnectionField,
    d_lhh: Array4<Expr>,
    d_lvv: Array4<Expr>,
    d_chh: Array4<Expr>,
    d_cvv: Array4<Expr>,
    /// `Ω^a_ij` at `[[a, i, j]]`.
    omega: Array3<Expr>,
    /// `∂_a N^b_k` at `[[b, k, a]]`.
    dn: Array3<Expr>,
    g_inv: ExprMatrix,
    h_inv: ExprMatrix,
}

impl CurvatureField {
    pub fn new(metric: &DMetric, field: &DConnectionField) -> Self {
        let dims = metric.dims();
        let Dimensions { n, m } = dims;
        let nc = metric.nconnection();
        let mut diff = Differentiator::new();
        let omega = nc.curvature_field(&mut diff);
        let dn = Array3::from_shape_fn((m, n, m), |(b, k, a)| diff.diff(nc.get(k, b), Var::Y(a)));
        Self {
            metric: metric.clone(),
            field: field.clone(),
            d_lhh: partials3(&field.lhh, dims, &mut diff),
            d_lvv: partials3(&field.lvv, dims, &mut diff),
            d_chh: partials3(&field.chh, dims, &mut diff),
            d_cvv: partials3(&field.cvv, dims, &mut diff),
            omega,
            dn,
            g_inv: symbolic_inverse(metric.g()),
            h_inv: if m > 0 { symbolic_inverse(metric.h()) } else { metric.h().clone() },
        }
    }

    /// The canonical d-connection's curvature data.
    pub fn canonical(metric: &DMetric) -> Self {
        Self::new(metric, &DConnectionField::canonical(metric))
    }

    pub fn metric(&self) -> &DMetric {
        &self.metric
    }

    pub fn connection(&self) -> &DConnectionField {
        &self.field
    }

    pub fn eval(&self, p: &ChartPoint) -> Result<CurvatureEval, GeometryError> {
        let dims = self.metric.dims();
        let Dimensions { n, m } = dims;
        self.metric.eval_checked(p)?;
        let frame = FrameEval::at(self.metric.nconnection(), p)?;
        let mut ev = Evaluator::new(p);
        let d = self.field.eval(p)?;
        let dl = frame_grad3(&self.d_lhh, &frame, &mut ev)?;
        let dlv = frame_grad3(&self.d_lvv, &frame, &mut ev)?;
        let dc = frame_grad3(&self.d_chh, &frame, &mut ev)?;
        let dcv = frame_grad3(&self.d_cvv, &frame, &mut ev)?;
        let mut omega = Array3::zeros(self.omega.dim());
        for (idx, e) in self.omega.indexed_iter() {
            omega[idx] = ev.eval(e)?;
        }
        // T^b_ka = ∂_a N^b_k − L^b_ak at [[b, k, a]]
        let mut t_vhv = Array3::zeros((m, n, m));
        for ((b, k, a), e) in self.dn.indexed_iter() {
            t_vhv[[b, k, a]] = ev.eval(e)? - d.lvv[[b, a, k]];
        }
        Ok(assemble_blocks(&d, &dl, &dlv, &dc, &dcv, &omega, &t_vhv, p))
    }

    pub fn ricci(&self, p: &ChartPoint) -> Result<RicciEval, GeometryError> {
        let r = self.eval(p)?;
        let mut ev = Evaluator::new(p);
        let g_inv = eval_matrix(&self.g_inv, &mut ev)?;
        let h_inv = eval_matrix(&self.h_inv, &mut ev)?;
        Ok(RicciEval::from_curvature(&r, &g_inv, &h_inv))
    }
}

pub fn d_curvature(metric: &DMetric, field: &DConnectionField, p: &ChartPoint) -> Result<CurvatureEval, GeometryError> {
    CurvatureField::new(metric, field).eval(p)
}

#[allow(clippy::too_many_arguments)]
fn assemble_blocks(
    d: &super::DConnectionEval,
    dl: &Array4<f64>,
    dlv: &Array4<f64>,
    dc: &Array4<f64>,
    dcv: &Array4<f64>,
    omega: &Array3<f64>,
    t_vhv: &Array3<f64>,
    p: &ChartPoint,
) -> CurvatureEval {
    let n = d.lhh.dim().0;
    let m = d.cvv.dim().0;
    let (l, lv, c, cv) = (&d.lhh, &d.lvv, &d.chh, &d.cvv);

    let r_hhhh = Array4::from_shape_fn((n, n, n, n), |(i, h, j, k)| {
        let mut s = dl[[i, h, j, k]] - dl[[i, h, k, j]];
        for mm in 0..n {
            s += l[[mm, h, j]] * l[[i, mm, k]] - l[[mm, h, k]] * l[[i, mm, j]];
        }
        for a in 0..m {
            s -= c[[i, h, a]] * omega[[a, k, j]];
        }
        s
    });
    let r_vvhh = Array4::from_shape_fn((m, m, n, n), |(a, b, j, k)| {
        let mut s = dlv[[a, b, j, k]] - dlv[[a, b, k, j]];
        for cc in 0..m {
            s += lv[[cc, b, j]] * lv[[a, cc, k]] - lv[[cc, b, k]] * lv[[a, cc, j]];
            s -= cv[[a, b, cc]] * omega[[cc, k, j]];
        }
        s
    });
    let r_hhhv = Array4::from_shape_fn((n, n, n, m), |(i, j, k, a)| {
        // D_k C^i_ja
        let mut dk = dc[[i, j, a, k]];
        for mm in 0..n {
            dk += l[[i, mm, k]] * c[[mm, j, a]] - l[[mm, j, k]] * c[[i, mm, a]];
        }
        for b in 0..m {
            dk -= lv[[b, a, k]] * c[[i, j, b]];
        }
        let mut s = dl[[i, j, k, n + a]] - dk;
        for b in 0..m {
            s += c[[i, j, b]] * t_vhv[[b, k, a]];
        }
        s
    });
    let r_vvhv = Array4::from_shape_fn((m, m, n, m), |(cc, b, k, a)| {
        // D_k C^c_ba
        let mut dk = dcv[[cc, b, a, k]];
        for e in 0..m {
            dk += lv[[cc, e, k]] * cv[[e, b, a]] - lv[[e, b, k]] * cv[[cc, e, a]] - lv[[e, a, k]] * cv[[cc, b, e]];
        }
        let mut s = dlv[[cc, b, k, n + a]] - dk;
        for e in 0..m {
            s += cv[[cc, b, e]] * t_vhv[[e, k, a]];
        }
        s
    });
    let r_hhvv = Array4::from_shape_fn((n, n, m, m), |(i, j, b, cc)| {
        let mut s = dc[[i, j, b, n + cc]] - dc[[i, j, cc, n + b]];
        for h in 0..n {
            s += c[[h, j, b]] * c[[i, h, cc]] - c[[h, j, cc]] * c[[i, h, b]];
        }
        s
    });
    let r_vvvv = Array4::from_shape_fn((m, m, m, m), |(a, b, cc, dd)| {
        let mut s = dcv[[a, b, cc, n + dd]] - dcv[[a, b, dd, n + cc]];
        for e in 0..m {
            s += cv[[e, b, cc]] * cv[[a, e, dd]] - cv[[e, b, dd]] * cv[[a, e, cc]];
        }
        s
    });
    CurvatureEval { r_hhhh, r_vvhh, r_hhhv, r_vvhv, r_hhvv, r_vvvv, at: p.clone() }
}

impl CurvatureEval {
    pub fn dims(&self) -> (usize, usize) {
        (self.r_hhhh.dim().0, self.r_vvvv.dim().0)
    }

    /// Full tensor `R^α_βγδ` at `[[α, β, γ, δ]]`.
    pub fn full(&self) -> Array4<f64> {
        let (n, m) = self.dims();
        let t = n + m;
        let mut r = Array4::zeros((t, t, t, t));
        for ((i, h, j, k), v) in self.r_hhhh.indexed_iter() {
            r[[i, h, j, k]] = *v;
        }
        for ((a, b, j, k), v) in self.r_vvhh.indexed_iter() {
            r[[n + a, n + b, j, k]] = *v;
        }
        for ((i, j, k, a), v) in self.r_hhhv.indexed_iter() {
            r[[i, j, k, n + a]] = *v;
            r[[i, j, n + a, k]] = -*v;
        }
        for ((c, b, k, a), v) in self.r_vvhv.indexed_iter() {
            r[[n + c, n + b, k, n + a]] = *v;
            r[[n + c, n + b, n + a, k]] = -*v;
        }
        for ((i, j, b, c), v) in self.r_hhvv.indexed_iter() {
            r[[i, j, n + b, n + c]] = *v;
        }
        for ((a, b, c, d), v) in self.r_vvvv.indexed_iter() {
            r[[n + a, n + b, n + c, n + d]] = *v;
        }
        r
    }

    pub fn max_abs(&self) -> f64 {
        [&self.r_hhhh, &self.r_vvhh, &self.r_hhhv, &self.r_vvhv, &self.r_hhvv, &self.r_vvvv]
            .iter()
            .flat_map(|a| a.iter())
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    /// `R(e_μ, e_ν)` as a matrix acting on frame components.
    pub fn two_form_component(&self, mu: usize, nu: usize) -> DMatrix<f64> {
        let full = self.full();
        let t = full.dim().0;
        // R(e_μ, e_ν) e_β = R^α_{β ν μ} e_α
        DMatrix::from_fn(t, t, |alpha, beta| full[[alpha, beta, nu, mu]])
    }
}

impl RicciEval {
    pub fn from_curvature(r: &CurvatureEval, g_inv: &DMatrix<f64>, h_inv: &DMatrix<f64>) -> Self {
        let (n, m) = r.dims();
        let r_ij = Array2::from_shape_fn((n, n), |(i, j)| (0..n).map(|k| r.r_hhhh[[k, i, j, k]]).sum());
        let r_ia = Array2::from_shape_fn((n, m), |(i, a)| -(0..n).map(|k| r.r_hhhv[[k, i, k, a]]).sum::<f64>());
        let r_ai = Array2::from_shape_fn((m, n), |(a, i)| (0..m).map(|b| r.r_vvhv[[b, a, i, b]]).sum());
        let r_ab = Array2::from_shape_fn((m, m), |(a, b)| (0..m).map(|c| r.r_vvvv[[c, a, b, c]]).sum());
        let mut scalar_h = 0.0;
        for i in 0..n {
            for j in 0..n {
                scalar_h += g_inv[(i, j)] * r_ij[[i, j]];
            }
        }
        let mut scalar_v = 0.0;
        for a in 0..m {
            for b in 0..m {
                scalar_v += h_inv[(a, b)] * r_ab[[a, b]];
            }
        }
        Self { r_ij, r_ia, r_ai, r_ab, scalar_h, scalar_v, scalar: scalar_h + scalar_v, at: r.at.clone() }
    }
}

pub fn ricci_and_scalar(
    metric: &DMetric,
    field: &DConnectionField,
    p: &ChartPoint,
) -> Result<RicciEval, GeometryError> {
    let r = d_curvature(metric, field, p)?;
    let blocks = metric.eval_checked(p)?;
    let g_inv = inverse_checked("g", &blocks.g, p)?;
    let h_inv = if metric.dims().m > 0 { inverse_checked("h", &blocks.h, p)? } else { DMatrix::zeros(0, 0) };
    Ok(RicciEval::from_curvature(&r, &g_inv, &h_inv))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(rows: &[&[&str]]) -> Vec<Vec<String>> {
        rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect()
    }

    fn sphere_product() -> DMetric {
        let dims = Dimensions::new(2, 2).unwrap();
        DMetric::from_strings(
            dims,
            &strings(&[&["1", "0"], &["0", "sin(x1)^2"]]),
            &strings(&[&["1", "0"], &["0", "sin(y1)^2"]]),
            &[],
        )
        .unwrap()
    }

    #[test]
    fn flat_is_flat() {
        let dims = Dimensions::new(2, 1).unwrap();
        let m = DMetric::flat(dims);
        let field = DConnectionField::canonical(&m);
        let p = ChartPoint::new(vec![0.1, 0.2], vec![0.3]);
        assert_eq!(d_curvature(&m, &field, &p).unwrap().max_abs(), 0.0);
        assert_eq!(ricci_and_scalar(&m, &field, &p).unwrap().scalar, 0.0);
    }

    #[test]
    fn product_of_spheres() {
        let m = sphere_product();
        let field = DConnectionField::canonical(&m);
        let p = ChartPoint::new(vec![0.8, 0.1], vec![1.1, -0.3]);
        let ric = ricci_and_scalar(&m, &field, &p).unwrap();
        assert!((ric.scalar_h - 2.0).abs() < 1e-12);
        assert!((ric.scalar_v - 2.0).abs() < 1e-12);
        let r = d_curvature(&m, &field, &p).unwrap();
        // R^1_221 = sin^2 x1 for the round sphere
        assert!((r.r_hhhh[[0, 1, 1, 0]] - 0.8f64.sin().powi(2)).abs() < 1e-12);
        assert!(r.r_hhhv.iter().chain(r.r_vvhv.iter()).all(|v| v.abs() < 1e-14));
    }
}
