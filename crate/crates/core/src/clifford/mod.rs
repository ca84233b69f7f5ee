//! Gamma matrices, spin d-connections and the lattice Dirac d-operator.
//!
//! Only positive-definite blocks are supported. Vielbeins are the transposed
//! Cholesky factors of `g` and `h`, so representations are deterministic.

mod gamma;
mod lattice;
mod sparse;
mod spin;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::expr::EvalError;
use crate::geometry::GeometryError;

pub use gamma::{anticommutator_residual, build_gamma, d_gamma, hermiticity_residual, DGammaCouple, GammaRep, MAX_DIM};
pub use lattice::{
    assemble_dirac, fourier_spectrum, hermitian_spectrum, lichnerowicz_residual, smooth_probe, Grid, LatticeDirac,
    LatticeGeometry, LichnerowiczReport, SpinorField, MAX_OPERATOR_DIM, MIN_NODES,
};
pub use sparse::CsrC;
pub use spin::{
    dirac_symbol, frame_gamma, spin_dconnection, symbol_ellipticity_residual, FrameGammas, SpinDConnectionEval,
    SpinPlan,
};

pub type CMatrix = DMatrix<Complex64>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliffordError {
    #[error("outside the supported envelope: {0}")]
    Envelope(String),
    #[error("{block} block is not positive definite at {point:?}")]
    NotPositiveDefinite { block: &'static str, point: Vec<f64> },
    #[error("shape error: {0}")]
    Shape(String),
    #[error("non-finite spinor entry")]
    NonFinite,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}
