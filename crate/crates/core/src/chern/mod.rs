//! Curvature 2-forms, Chern forms, the Chern character and their integrals
//! over periodic grids.
//!
//! Forms are written in the coordinate coframe `dx^μ` of the chart, so top
//! forms integrate by a plain Riemann sum. Chern forms are normalized by
//! `det(I + X) = Σ_k c_k` with `X = (i/2π) R`, computed from the trace powers
//! `p_j = Tr X^j` by Newton's identities; `ch = Σ_k p_k / k!`.

mod forms;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::clifford::Grid;
use crate::expr::ChartPoint;
use crate::geometry::{CurvatureField, DMetric, FrameEval, GeometryError, NConnectionField};

pub use forms::{pair_mask, wedge_sign, Form, MatForm, MAX_FORM_DIM};

/// Tolerance on imaginary parts of integrals that must be real.
pub const REAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChernError {
    #[error("form dimension {0} outside 1..=8")]
    Dimension(usize),
    #[error("degree {degree} exceeds the dimension {dim}")]
    DegreeTooHigh { degree: usize, dim: usize },
    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("integral is not real (imaginary part {0:e})")]
    NotReal(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Matrix-valued curvature 2-form at every node of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureFormField {
    pub grid: Grid,
    pub rank: usize,
    pub nodes: Vec<MatForm>,
}

/// Scalar form at every node of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FormField {
    pub grid: Grid,
    pub nodes: Vec<Form>,
}

impl FormField {
    pub fn constant(grid: &Grid, f: &Form) -> Self {
        Self { grid: grid.clone(), nodes: vec![f.clone(); grid.volume()] }
    }

    pub fn part(&self, k: usize) -> FormField {
        self.map(|f| f.part(k))
    }

    pub fn map(&self, f: impl Fn(&Form) -> Form) -> FormField {
        FormField { grid: self.grid.clone(), nodes: self.nodes.iter().map(f).collect() }
    }

    pub fn wedge(&self, other: &FormField) -> FormField {
        FormField {
            grid: self.grid.clone(),
            nodes: self.nodes.iter().zip(&other.nodes).map(|(a, b)| a.wedge(b)).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.nodes.iter().map(Form::max_abs).fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.nodes.iter().map(Form::max_imag).fold(0.0, f64::max)
    }

    /// Largest distance between two fields of the same grid.
    pub fn distance(&self, other: &FormField) -> f64 {
        self.nodes
            .iter()
            .zip(&other.nodes)
            .map(|(a, b)| a.add(&b.scale(Complex64::new(-1.0, 0.0))).max_abs())
            .fold(0.0, f64::max)
    }
}

impl CurvatureFormField {
    pub fn from_fn(
        grid: &Grid,
        rank: usize,
        f: impl Fn(&[f64]) -> Result<MatForm, ChernError>,
    ) -> Result<Self, ChernError> {
        let nodes = (0..grid.volume())
            .map(|node| {
                let m = f(&grid.coordinates(node))?;
                if m.rank() != rank || m.dim() != grid.dim() {
                    return Err(ChernError::Shape(format!(
                        "node form of rank {} and dimension {} on a rank-{rank} field over a {}-dimensional grid",
                        m.rank(),
                        m.dim(),
                        grid.dim()
                    )));
                }
                Ok(m)
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { grid: grid.clone(), rank, nodes })
    }

    pub fn max_abs(&self) -> f64 {
        self.nodes.iter().map(MatForm::max_abs).fold(0.0, f64::max)
    }

    fn x_form(&self) -> Vec<MatForm> {
        let s = Complex64::new(0.0, 1.0 / (2.0 * std::f64::consts::PI));
        self.nodes.iter().map(|r| r.scale(s)).collect()
    }

    /// `p_j = Tr X^j` for `j = 0..=kmax` at every node (`p_0 = rank`).
    fn trace_powers(&self, kmax: usize) -> Vec<Vec<Form>> {
        let dim = self.grid.dim();
        self.x_form()
            .iter()
            .map(|x| {
                let mut pw = MatForm::identity(dim, self.rank).expect("grid dimension checked");
                let mut out = Vec::with_capacity(kmax + 1);
                out.push(pw.trace());
                for _ in 0..kmax {
                    pw = pw.wedge(x);
                    out.push(pw.trace());
                }
                out
            })
            .collect()
    }

    fn check_degree(&self, k: usize) -> Result<(), ChernError> {
        let dim = self.grid.dim();
        if 2 * k > dim {
            return Err(ChernError::DegreeTooHigh { degree: 2 * k, dim });
        }
        Ok(())
    }

    /// `Tr X^k`, a `2k`-form.
    pub fn trace_power(&self, k: usize) -> Result<FormField, ChernError> {
        self.check_degree(k)?;
        Ok(FormField {
            grid: self.grid.clone(),
            nodes: self.trace_powers(k).into_iter().map(|mut p| p.swap_remove(k)).collect(),
        })
    }
}

/// Chern form `c_k`, a `2k`-form, from `k c_k = Σ_{j=1}^k (−1)^{j−1} c_{k−j} ∧ p_j`.
pub fn chern_form(f: &CurvatureFormField, k: usize) -> Result<FormField, ChernError> {
    if k == 0 {
        return Err(ChernError::DegreeMismatch("Chern forms start at k = 1".into()));
    }
    f.check_degree(k)?;
    let dim = f.grid.dim();
    let nodes = f
        .trace_powers(k)
        .iter()
        .map(|p| {
            let mut c = vec![Form::scalar(dim, Complex64::new(1.0, 0.0)).expect("grid dimension checked")];
            for kk in 1..=k {
                let mut acc = Form::zero(dim).expect("grid dimension checked");
                for j in 1..=kk {
                    let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                    acc = acc.add(&c[kk - j].wedge(&p[j]).scale(Complex64::new(sign, 0.0)));
                }
                c.push(acc.scale(Complex64::new(1.0 / kk as f64, 0.0)));
            }
            c.swap_remove(k)
        })
        .collect();
    Ok(FormField { grid: f.grid.clone(), nodes })
}

/// Total Chern character `Σ_{k ≤ dim/2} p_k / k!`.
pub fn chern_character(f: &CurvatureFormField) -> FormField {
    let dim = f.grid.dim();
    let kmax = dim / 2;
    let nodes = f
        .trace_powers(kmax)
        .iter()
        .map(|p| {
            let mut fact = 1.0;
            let mut acc = Form::zero(dim).expect("grid dimension checked");
            for (k, pk) in p.iter().enumerate() {
                if k > 0 {
                    fact *= k as f64;
                }
                acc = acc.add(&pk.scale(Complex64::new(1.0 / fact, 0.0)));
            }
            acc
        })
        .collect();
    FormField { grid: f.grid.clone(), nodes }
}

/// Riemann sum of a top-degree form with cell volume `Π h_μ`, summed over
/// nodes in storage order. The result must be real to [`REAL_TOL`].
pub fn integrate_form(f: &FormField) -> Result<f64, ChernError> {
    let dim = f.grid.dim();
    let off = f.nodes.iter().map(|n| n.off_degree(dim)).fold(0.0, f64::max);
    if off > 0.0 {
        return Err(ChernError::DegreeMismatch(format!(
            "integrand has components of degree below {dim} (max {off:e})"
        )));
    }
    let cell: f64 = (0..dim).map(|mu| f.grid.spacing(mu)).product();
    let mut sum = Complex64::new(0.0, 0.0);
    for n in &f.nodes {
        sum += n.top();
    }
    sum *= cell;
    if sum.im.abs() > REAL_TOL {
        return Err(ChernError::NotReal(sum.im));
    }
    Ok(sum.re)
}

/// `∫ ch_{(dim − deg t)} ∧ t` for a homogeneous class form `t` of degree `t_degree`.
pub fn index_pairing(ch: &FormField, t: &FormField, t_degree: usize) -> Result<f64, ChernError> {
    let dim = ch.grid.dim();
    if t_degree > dim {
        return Err(ChernError::DegreeTooHigh { degree: t_degree, dim });
    }
    let stray = t.nodes.iter().map(|n| n.off_degree(t_degree)).fold(0.0, f64::max);
    if stray > 0.0 {
        return Err(ChernError::DegreeMismatch(format!("class form is not homogeneous of degree {t_degree}")));
    }
    integrate_form(&ch.part(dim - t_degree).wedge(t))
}

/// Index pairings of the same class form against the Chern characters of the
/// canonical d-connection and of the N-connection variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexPairings {
    pub d_metric: f64,
    pub n_connection: f64,
}

pub fn index_pairings(
    metric: &DMetric,
    grid: &Grid,
    t: &FormField,
    t_degree: usize,
) -> Result<IndexPairings, ChernError> {
    let d = chern_character(&curvature_form_from_dconnection(metric, grid)?);
    let n = chern_character(&nconnection_curvature_form(metric.nconnection(), grid)?);
    Ok(IndexPairings { d_metric: index_pairing(&d, t, t_degree)?, n_connection: index_pairing(&n, t, t_degree)? })
}

/// Curvature 2-form of the canonical d-connection,
/// `R(∂_μ, ∂_ν) = (E⁻¹)_μα (E⁻¹)_νβ R(e_α, e_β)`, as an endomorphism in the
/// adapted frame.
pub fn curvature_form_from_dconnection(metric: &DMetric, grid: &Grid) -> Result<CurvatureFormField, ChernError> {
    let dims = metric.dims();
    let t = dims.total();
    if grid.dim() != t {
        return Err(ChernError::Shape(format!("grid of dimension {} for a chart of dimension {t}", grid.dim())));
    }
    let field = CurvatureField::canonical(metric);
    CurvatureFormField::from_fn(grid, t, |u| {
        let p = ChartPoint::from_flat(dims, u);
        let r = field.eval(&p)?;
        let frame = FrameEval::at(metric.nconnection(), &p)?;
        let adapted: Vec<Vec<DMatrix<f64>>> =
            (0..t).map(|a| (0..t).map(|b| r.two_form_component(a, b)).collect()).collect();
        let ei = &frame.e_inv;
        MatForm::two_form(t, t, |mu, nu| {
            let mut m = DMatrix::<f64>::zeros(t, t);
            for a in 0..t {
                for b in 0..t {
                    let w = ei[(mu, a)] * ei[(nu, b)];
                    if w != 0.0 {
                        m += &adapted[a][b] * w;
                    }
                }
            }
            m.map(|x| Complex64::new(x, 0.0))
        })
    })
}

/// `R^[N]`: the same construction for Euclidean blocks `g = I`, `h = I` and the
/// given N-connection, so it depends only on `N` and its derivatives.
pub fn nconnection_curvature_form(nc: &NConnectionField, grid: &Grid) -> Result<CurvatureFormField, ChernError> {
    curvature_form_from_dconnection(&DMetric::euclidean_blocks(nc.clone()), grid)
}

/// Rank-1 field with constant `F_01 = −2πi q / (L_0 L_1)` on a 2-dimensional
/// periodic grid, the curvature of a line bundle of degree `q`.
pub fn monopole(grid: &Grid, q: i64) -> Result<CurvatureFormField, ChernError> {
    if grid.dim() != 2 {
        return Err(ChernError::Shape("the monopole lives on a 2-torus".into()));
    }
    let f = Complex64::new(0.0, -2.0 * std::f64::consts::PI * q as f64 / (grid.lengths[0] * grid.lengths[1]));
    CurvatureFormField::from_fn(grid, 1, |_| MatForm::two_form(2, 1, |_, _| DMatrix::from_element(1, 1, f)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Dimensions;

    fn torus() -> Grid {
        Grid::periodic(vec![5, 7], vec![2.0, 3.0]).unwrap()
    }

    #[test]
    fn monopole_degrees() {
        let g = torus();
        for q in [1, 2, 3, -2] {
            let c1 = chern_form(&monopole(&g, q).unwrap(), 1).unwrap();
            assert!((c1.nodes[0].top().re - q as f64 / 6.0).abs() < 1e-15);
            assert!((integrate_form(&c1).unwrap() - q as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn character_and_chern_forms_agree_in_degree_two() {
        let g = torus();
        let f = monopole(&g, 2).unwrap();
        let ch = chern_character(&f);
        assert!(ch.part(2).distance(&chern_form(&f, 1).unwrap()) < 1e-15);
        assert!((ch.nodes[0].get(0).re - 1.0).abs() < 1e-15);
        assert!(matches!(chern_form(&f, 2), Err(ChernError::DegreeTooHigh { .. })));
    }

    #[test]
    fn integrals_check_degree() {
        let g = torus();
        let one = FormField::constant(&g, &Form::scalar(2, Complex64::new(1.0, 0.0)).unwrap());
        assert!(matches!(integrate_form(&one), Err(ChernError::DegreeMismatch(_))));
        let vol = FormField::constant(&g, &Form::volume(2, Complex64::new(1.0, 0.0)).unwrap());
        assert!((integrate_form(&vol).unwrap() - 6.0).abs() < 1e-15);
    }

    #[test]
    fn flat_metric_has_zero_curvature_form() {
        let m = DMetric::flat(Dimensions::new(1, 1).unwrap());
        let g = Grid::periodic(vec![4, 4], vec![1.0, 1.0]).unwrap();
        let f = curvature_form_from_dconnection(&m, &g).unwrap();
        assert_eq!(f.max_abs(), 0.0);
        let ch = chern_character(&f);
        assert!((ch.nodes[3].get(0).re - 2.0).abs() < 1e-15);
    }
}
