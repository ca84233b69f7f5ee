//! The geometric tower of a regular Lagrangian `L(x, y)` on a tangent bundle:
//! Hessian metric, canonical semispray and N-connection, nonlinear geodesics,
//! the Sasaki lift and its almost complex structure.

use nalgebra::DMatrix;
use ndarray::Array2;

use crate::expr::{parse, sum, ChartPoint, Differentiator, Dimensions, EvalError, Evaluator, Expr, ParseError, Var};
use crate::geometry::{
    assemble_offdiagonal, symbolic_inverse, DMetric, ExprMatrix, FrameEval, GeometryError, NConnectionField,
};

const REGULARITY_TOL: f64 = 1e-12;
const FINSLER_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LagrangeError {
    #[error("a Lagrangian needs m = n, got n={n}, m={m}")]
    NotTangent { n: usize, m: usize },
    #[error("degenerate Hessian (det = {det:e}) at {point:?}")]
    Degenerate { det: f64, point: Vec<f64> },
    #[error("non-finite state at integration step {step}")]
    NonFinite { step: usize },
    #[error("homogeneity is not testable on the null section y = 0")]
    NullSection,
    #[error("homogeneity is not testable where L = {value:e} <= 0")]
    NotTestable { value: f64 },
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A Lagrangian on a chart of `TM`, `dims.m == dims.n`.
#[derive(Debug, Clone)]
pub struct Lagrangian {
    dims: Dimensions,
    l: Expr,
}

impl Lagrangian {
    pub fn new(dims: Dimensions, l: Expr) -> Result<Self, LagrangeError> {
        if dims.m != dims.n {
            return Err(LagrangeError::NotTangent { n: dims.n, m: dims.m });
        }
        if let Some(v) = l.out_of_range(dims) {
            return Err(LagrangeError::Invalid(format!("variable {v} outside dims")));
        }
        Ok(Self { dims, l })
    }

    pub fn parse(text: &str, n: usize) -> Result<Self, LagrangeError> {
        let dims = Dimensions::new(n, n).map_err(GeometryError::from)?;
        Self::new(dims, parse(text, dims)?)
    }

    pub fn dims(&self) -> Dimensions {
        self.dims
    }

    pub fn expr(&self) -> &Expr {
        &self.l
    }

    /// `g^L_ij = ½ ∂²L/∂y^i∂y^j`; the lower triangle shares nodes with the
    /// upper one, so the matrix is symmetric as expressions.
    pub fn hessian_field(&self) -> ExprMatrix {
        let n = self.dims.n;
        let mut diff = Differentiator::new();
        let mut g = Array2::from_elem((n, n), Expr::zero());
        for i in 0..n {
            let di = diff.diff(&self.l, Var::Y(i));
            for j in i..n {
                let e = diff.diff(&di, Var::Y(j)) * 0.5;
                g[[j, i]] = e.clone();
                g[[i, j]] = e;
            }
        }
        g
    }

    /// `y^i ∂L/∂y^i − L`.
    pub fn energy(&self) -> Expr {
        let mut diff = Differentiator::new();
        let contraction = sum((0..self.dims.n).map(|i| Expr::y(i) * diff.diff(&self.l, Var::Y(i))));
        contraction - &self.l
    }

    fn check_regular(&self, p: &ChartPoint) -> Result<DMatrix<f64>, LagrangeError> {
        p.check(self.dims).map_err(GeometryError::from)?;
        let field = self.hessian_field();
        let mut ev = Evaluator::new(p);
        let n = self.dims.n;
        let mut g = DMatrix::zeros(n, n);
        for ((r, c), e) in field.indexed_iter() {
            g[(r, c)] = ev.eval(e)?;
        }
        let det = g.determinant();
        if det.is_nan() || det.abs() <= REGULARITY_TOL {
            return Err(LagrangeError::Degenerate { det, point: p.flat() });
        }
        Ok(g)
    }
}

pub fn hessian_metric(lag: &Lagrangian, p: &ChartPoint) -> Result<DMatrix<f64>, LagrangeError> {
    lag.check_regular(p)
}

/// Coefficients `G^i` of the canonical semispray `S = y^i ∂_i − 2G^i ∂/∂y^i`.
#[derive(Debug, Clone)]
pub struct Semispray {
    dims: Dimensions,
    pub g: Vec<Expr>,
}

impl Semispray {
    pub fn dims(&self) -> Dimensions {
        self.dims
    }

    pub fn eval(&self, p: &ChartPoint) -> Result<Vec<f64>, EvalError> {
        let mut ev = Evaluator::new(p);
        self.g.iter().map(|e| ev.eval(e)).collect()
    }
}

/// `G^i = ¼ g^{ij} (∂²L/∂y^j∂x^k y^k − ∂L/∂x^j)`.
pub fn semispray(lag: &Lagrangian) -> Semispray {
    let n = lag.dims.n;
    let g_inv = symbolic_inverse(&lag.hessian_field());
    let mut diff = Differentiator::new();
    let rhs: Vec<Expr> = (0..n)
        .map(|j| {
            let dy = diff.diff(&lag.l, Var::Y(j));
            let mixed = sum((0..n).map(|k| diff.diff(&dy, Var::X(k)) * Expr::y(k)));
            mixed - diff.diff(&lag.l, Var::X(j))
        })
        .collect();
    let g = (0..n).map(|i| sum((0..n).map(|j| &g_inv[[i, j]] * &rhs[j])) * 0.25).collect();
    Semispray { dims: lag.dims, g }
}

/// Cartan N-connection `N^i_j = ∂G^i/∂y^j`.
pub fn canonical_nconnection(lag: &Lagrangian) -> NConnectionField {
    nconnection_of(&semispray(lag))
}

pub fn nconnection_of(s: &Semispray) -> NConnectionField {
    let n = s.dims.n;
    let mut diff = Differentiator::new();
    // stored [[base j, fiber i]]
    let coeffs = Array2::from_shape_fn((n, n), |(j, i)| diff.diff(&s.g[i], Var::Y(j)));
    NConnectionField::new(s.dims, coeffs).expect("semispray N has matching shape")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub tau: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn point(&self, k: usize) -> ChartPoint {
        ChartPoint::new(self.x[k].clone(), self.y[k].clone())
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }
}

/// Fixed-step RK4 for `ẍ + 2G(x, ẋ) = 0`. Returns `steps + 1` samples.
pub fn geodesic_integrate(
    s: &Semispray,
    x0: &[f64],
    y0: &[f64],
    tau_end: f64,
    steps: usize,
) -> Result<Trajectory, LagrangeError> {
    let n = s.dims.n;
    if steps == 0 {
        return Err(LagrangeError::Invalid("steps must be at least 1".into()));
    }
    if x0.len() != n || y0.len() != n {
        return Err(LagrangeError::Invalid(format!("initial data must have length {n}")));
    }
    let dt = tau_end / steps as f64;
    let rhs = |x: &[f64], y: &[f64]| -> Result<(Vec<f64>, Vec<f64>), EvalError> {
        let g = s.eval(&ChartPoint::new(x.to_vec(), y.to_vec()))?;
        Ok((y.to_vec(), g.iter().map(|v| -2.0 * v).collect()))
    };
    let axpy = |a: &[f64], k: &[f64], h: f64| a.iter().zip(k).map(|(u, v)| u + h * v).collect::<Vec<f64>>();
    let mut traj = Trajectory { tau: vec![0.0], x: vec![x0.to_vec()], y: vec![y0.to_vec()] };
    let (mut x, mut y) = (x0.to_vec(), y0.to_vec());
    for step in 1..=steps {
        let (k1x, k1y) = rhs(&x, &y)?;
        let (k2x, k2y) = rhs(&axpy(&x, &k1x, dt / 2.0), &axpy(&y, &k1y, dt / 2.0))?;
        let (k3x, k3y) = rhs(&axpy(&x, &k2x, dt / 2.0), &axpy(&y, &k2y, dt / 2.0))?;
        let (k4x, k4y) = rhs(&axpy(&x, &k3x, dt), &axpy(&y, &k3y, dt))?;
        for i in 0..n {
            x[i] += dt / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
            y[i] += dt / 6.0 * (k1y[i] + 2.0 * k2y[i] + 2.0 * k3y[i] + k4y[i]);
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(LagrangeError::NonFinite { step });
        }
        traj.tau.push(step as f64 * dt);
        traj.x.push(x.clone());
        traj.y.push(y.clone());
    }
    Ok(traj)
}

/// Largest `|d/dτ(∂L/∂y^i) − ∂L/∂x^i|` over interior samples, with the
/// τ-derivative taken by the fourth-order central stencil on the samples.
pub fn euler_lagrange_residual(lag: &Lagrangian, traj: &Trajectory) -> Result<f64, LagrangeError> {
    let n = lag.dims.n;
    if traj.len() < 5 {
        return Err(LagrangeError::Invalid("need at least 5 samples".into()));
    }
    let dt = traj.tau[1] - traj.tau[0];
    let mut diff = Differentiator::new();
    let dly: Vec<Expr> = (0..n).map(|i| diff.diff(&lag.l, Var::Y(i))).collect();
    let dlx: Vec<Expr> = (0..n).map(|i| diff.diff(&lag.l, Var::X(i))).collect();
    let mut py = Vec::with_capacity(traj.len());
    let mut px = Vec::with_capacity(traj.len());
    for k in 0..traj.len() {
        let p = traj.point(k);
        let mut ev = Evaluator::new(&p);
        py.push(dly.iter().map(|e| ev.eval(e)).collect::<Result<Vec<_>, _>>()?);
        px.push(dlx.iter().map(|e| ev.eval(e)).collect::<Result<Vec<_>, _>>()?);
    }
    let mut worst = 0.0f64;
    for k in 2..traj.len() - 2 {
        for i in 0..n {
            let d = (py[k - 2][i] - 8.0 * py[k - 1][i] + 8.0 * py[k + 1][i] - py[k + 2][i]) / (12.0 * dt);
            worst = worst.max((d - px[k][i]).abs());
        }
    }
    Ok(worst)
}

/// `g = h = g^L` with the Cartan N-connection.
pub fn sasaki_lift(lag: &Lagrangian) -> Result<DMetric, LagrangeError> {
    let g = lag.hessian_field();
    Ok(DMetric::new(g.clone(), g, canonical_nconnection(lag))?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlmostComplexEval {
    /// `[[0, −I], [I, 0]]` in the adapted basis `(e_i, ∂/∂y^i)`.
    pub adapted: DMatrix<f64>,
    /// The same endomorphism on coordinate components.
    pub coordinate: DMatrix<f64>,
    pub at: ChartPoint,
}

pub fn almost_complex(lag: &Lagrangian, p: &ChartPoint) -> Result<AlmostComplexEval, LagrangeError> {
    lag.check_regular(p)?;
    let n = lag.dims.n;
    let mut adapted = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        adapted[(i, n + i)] = -1.0;
        adapted[(n + i, i)] = 1.0;
    }
    let frame = FrameEval::at(&canonical_nconnection(lag), p)?;
    // coordinate components of a vector with adapted components v are Eᵀ v
    let et = frame.e.transpose();
    let et_inv = frame.e_inv.transpose();
    let coordinate = &et * &adapted * &et_inv;
    Ok(AlmostComplexEval { adapted, coordinate, at: p.clone() })
}

/// `max |Fᵀ G F − G|` for the Sasaki lift at `p`.
pub fn almost_complex_compatibility(lag: &Lagrangian, p: &ChartPoint) -> Result<f64, LagrangeError> {
    let f = almost_complex(lag, p)?;
    let g = assemble_offdiagonal(&sasaki_lift(lag)?, p)?;
    Ok((f.coordinate.transpose() * &g * &f.coordinate - &g).abs().max())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FinslerReport {
    pub is_finsler: bool,
    /// Largest `|F(x, λy) − λF(x, y)| / (λF(x, y))` over the samples.
    pub max_deviation: f64,
    pub lambdas: Vec<f64>,
}

/// Tests positive 1-homogeneity of `F = sqrt(L)` in `y` at `p`.
pub fn finsler_check(lag: &Lagrangian, p: &ChartPoint, lambdas: &[f64]) -> Result<FinslerReport, LagrangeError> {
    p.check(lag.dims).map_err(GeometryError::from)?;
    if p.y.iter().all(|v| *v == 0.0) {
        return Err(LagrangeError::NullSection);
    }
    if lambdas.iter().any(|l| l.is_nan() || *l <= 0.0) {
        return Err(LagrangeError::Invalid("scaling factors must be positive".into()));
    }
    let f_at = |lambda: f64| -> Result<f64, LagrangeError> {
        let q = ChartPoint::new(p.x.clone(), p.y.iter().map(|v| lambda * v).collect());
        let value = lag.l.eval(&q)?;
        if value <= 0.0 {
            return Err(LagrangeError::NotTestable { value });
        }
        Ok(value.sqrt())
    };
    let f0 = f_at(1.0)?;
    let mut worst = 0.0f64;
    for &lambda in lambdas {
        let dev = (f_at(lambda)? - lambda * f0).abs() / (lambda * f0);
        worst = worst.max(dev);
    }
    Ok(FinslerReport { is_finsler: worst < FINSLER_TOL, max_deviation: worst, lambdas: lambdas.to_vec() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn sphere() -> Lagrangian {
        Lagrangian::parse("y1^2 + sin(x1)^2*y2^2", 2).unwrap()
    }

    #[test]
    fn hessian_examples() {
        let p = ChartPoint::new(vec![FRAC_PI_4, 0.0], vec![0.3, 0.1]);
        let g = hessian_metric(&Lagrangian::parse("y1^2 + y2^2", 2).unwrap(), &p).unwrap();
        assert_eq!(g, DMatrix::identity(2, 2));
        let g = hessian_metric(&sphere(), &p).unwrap();
        assert!((g[(1, 1)] - 0.5).abs() < 1e-15);
        let g = hessian_metric(&Lagrangian::parse("y1*y2", 2).unwrap(), &p).unwrap();
        assert_eq!(g, DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]));
        assert!((g.determinant() + 0.25).abs() < 1e-15);
        let degenerate = Lagrangian::parse("y1^2", 2).unwrap();
        assert!(matches!(hessian_metric(&degenerate, &p), Err(LagrangeError::Degenerate { .. })));
    }

    #[test]
    fn sphere_spray_and_connection() {
        let lag = sphere();
        let p = ChartPoint::new(vec![FRAC_PI_4, 0.0], vec![0.0, 1.0]);
        let g = semispray(&lag).eval(&p).unwrap();
        assert!((g[0] + 0.25).abs() < 1e-15);
        let n = canonical_nconnection(&lag).eval(&p).unwrap();
        // N^1_2 stored at [[2-1, 1-1]]
        assert!((n[[1, 0]] + 0.5).abs() < 1e-15);
        let flat = Lagrangian::parse("y1^2 + y2^2", 2).unwrap();
        assert!(canonical_nconnection(&flat).coeffs().iter().all(|e| e.is_zero()));
    }

    #[test]
    fn straight_lines_and_equator() {
        let flat = semispray(&Lagrangian::parse("y1^2 + y2^2", 2).unwrap());
        let t = geodesic_integrate(&flat, &[0.0, 0.0], &[1.0, 2.0], 1.0, 10).unwrap();
        let end = t.x.last().unwrap();
        assert!((end[0] - 1.0).abs() < 1e-14 && (end[1] - 2.0).abs() < 1e-14);

        let lag = sphere();
        let s = semispray(&lag);
        let t = geodesic_integrate(&s, &[std::f64::consts::FRAC_PI_2, 0.0], &[0.0, 1.0], 3.0, 300).unwrap();
        assert!(t.x.iter().all(|x| (x[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-6));

        let t = geodesic_integrate(&s, &[1.0, 0.0], &[0.3, 0.8], 2.0, 2000).unwrap();
        let e0 = lag.expr().eval(&t.point(0)).unwrap();
        for k in 0..t.len() {
            assert!((lag.expr().eval(&t.point(k)).unwrap() - e0).abs() < 1e-6);
        }
        assert!(euler_lagrange_residual(&lag, &t).unwrap() < 1e-5);
    }

    #[test]
    fn almost_complex_structure() {
        let lag = sphere();
        let p = ChartPoint::new(vec![FRAC_PI_4, 0.2], vec![0.4, -0.7]);
        let f = almost_complex(&lag, &p).unwrap();
        let sq = &f.coordinate * &f.coordinate + DMatrix::identity(4, 4);
        assert!(sq.abs().max() < 1e-12);
        assert!(almost_complex_compatibility(&lag, &p).unwrap() < 1e-12);
    }

    #[test]
    fn finsler_detection() {
        let p = ChartPoint::new(vec![0.5, 0.1], vec![0.7, -0.4]);
        let check = |text: &str| finsler_check(&Lagrangian::parse(text, 2).unwrap(), &p, &[0.5, 2.0, 3.0]);
        assert!(check("y1^2 + y2^2").unwrap().is_finsler);
        let r = check("y1^2 + y2^2 + x1*y1").unwrap();
        assert!(!r.is_finsler && r.max_deviation > 1e-3);
        let r = check("(y1^4 + y2^4)^0.5").unwrap();
        assert!(r.is_finsler, "{}", r.max_deviation);
        let null = ChartPoint::new(vec![0.5, 0.1], vec![0.0, 0.0]);
        let lag = Lagrangian::parse("y1^2 + y2^2", 2).unwrap();
        assert_eq!(finsler_check(&lag, &null, &[2.0]), Err(LagrangeError::NullSection));
        let neg = Lagrangian::parse("y1*y2", 2).unwrap();
        assert!(matches!(finsler_check(&neg, &p, &[2.0]), Err(LagrangeError::NotTestable { .. })));
    }
}
