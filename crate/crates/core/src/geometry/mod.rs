//! N-connections, adapted frames, d-metrics, the canonical d-connection and
//! its torsion and curvature.
//!
//! Index conventions used throughout:
//! - base indices `i, j, k` run over `0..n`, fiber indices `a, b, c` over
//!   `0..m`; a frame index `alpha` over `0..n+m` puts the fiber after the base;
//! - connection coefficients are stored with the direction last:
//!   `Γ[[γ, β, μ]] = (D_μ e_β)⌋e^γ`;
//! - `[e_i, e_j] = Ω^a_ij e_a`.

mod curvature;
mod dconnection;
mod levi_civita;
mod metric;
mod nconnection;
mod torsion;

use nalgebra::DMatrix;

use crate::expr::{ChartPoint, Differentiator, DimensionError, EvalError, Evaluator, Expr, ParseError};

pub use curvature::{d_curvature, ricci_and_scalar, CurvatureEval, CurvatureField, RicciEval};
pub use dconnection::{canonical_dconnection, metric_compatibility, DConnectionEval, DConnectionField};
pub use levi_civita::{christoffel_numeric, distortion_formula, levi_civita, LeviCivitaEval};
pub use metric::{
    assemble_from_blocks, assemble_offdiagonal, split_to_dmetric, symbolic_det, symbolic_inverse, DMetric, DMetricEval,
    ExprMatrix, FrameEval,
};
pub use nconnection::{adapted_derivative, anholonomy, nconnection_curvature, Anholonomy, NConnectionField};
pub use torsion::{d_torsion, TorsionEval};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Dimension(#[from] DimensionError),
    #[error("degenerate {block} block (det = {det:e}) at {point:?}")]
    Degenerate { block: &'static str, det: f64, point: Vec<f64> },
}

/// Coordinate gradient `∂_μ f(p)` for all `μ ∈ 0..n+m`.
pub(crate) fn coordinate_gradient(
    f: &Expr,
    dims: crate::expr::Dimensions,
    diff: &mut Differentiator,
    ev: &mut Evaluator,
) -> Result<Vec<f64>, EvalError> {
    dims.vars().map(|v| ev.eval(&diff.diff(f, v))).collect()
}

/// Adapted-frame gradient `e_α f(p) = E[α][μ] ∂_μ f(p)`.
pub(crate) fn frame_gradient(
    f: &Expr,
    frame: &FrameEval,
    dims: crate::expr::Dimensions,
    diff: &mut Differentiator,
    ev: &mut Evaluator,
) -> Result<Vec<f64>, EvalError> {
    let d = coordinate_gradient(f, dims, diff, ev)?;
    let total = dims.total();
    Ok((0..total).map(|alpha| (0..total).map(|mu| frame.e[(alpha, mu)] * d[mu]).sum()).collect())
}

pub(crate) fn inverse_checked(
    block: &'static str,
    a: &DMatrix<f64>,
    p: &ChartPoint,
) -> Result<DMatrix<f64>, GeometryError> {
    metric::nondegenerate(block, a, p)?;
    a.clone().try_inverse().ok_or_else(|| GeometryError::Degenerate { block, det: a.determinant(), point: p.flat() })
}
