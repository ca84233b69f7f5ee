//! Levi-Civita connection of the coordinate metric, read in the adapted frame,
//! and its distortion relative to the canonical d-connection.

use nalgebra::DMatrix;
use ndarray::Array3;

use super::metric::eval_matrix;
use super::{inverse_checked, nconnection_curvature, DConnectionField, DMetric, FrameEval, GeometryError};
use crate::expr::{ChartPoint, Differentiator, Dimensions, Evaluator, Var};

#[derive(Debug, Clone, PartialEq)]
pub struct LeviCivitaEval {
    /// Coordinate Christoffel symbols `Γ^λ_νσ` at `[[λ, ν, σ]]`.
    pub coordinate: Array3<f64>,
    /// Adapted-frame coefficients `[[γ, β, μ]] = (∇_{e_μ} e_β)⌋e^γ`.
    pub adapted: Array3<f64>,
    /// Canonical minus Levi-Civita, adapted frame, same layout.
    pub distortion: Array3<f64>,
    pub at: ChartPoint,
}

/// Christoffel symbols of a coordinate metric given its values and first
/// partials `dg[μ]`.
pub fn christoffel_numeric(g: &DMatrix<f64>, dg: &[DMatrix<f64>], g_inv: &DMatrix<f64>) -> Array3<f64> {
    let t = g.nrows();
    Array3::from_shape_fn((t, t, t), |(l, nu, sigma)| {
        0.5 * (0..t)
            .map(|k| g_inv[(l, k)] * (dg[nu][(k, sigma)] + dg[sigma][(k, nu)] - dg[k][(nu, sigma)]))
            .sum::<f64>()
    })
}

pub fn levi_civita(metric: &DMetric, p: &ChartPoint) -> Result<LeviCivitaEval, GeometryError> {
    let dims = metric.dims();
    let Dimensions { n, m } = dims;
    let t = n + m;
    metric.eval_checked(p)?;
    let coord = metric.coordinate_metric();
    let mut diff = Differentiator::new();
    let mut ev = Evaluator::new(p);
    let g = eval_matrix(&coord, &mut ev)?;
    let g_inv = inverse_checked("full", &g, p)?;
    let mut dg = Vec::with_capacity(t);
    for v in dims.vars() {
        let d = coord.map(|e| diff.diff(e, v));
        dg.push(eval_matrix(&d, &mut ev)?);
    }
    let gamma_c = christoffel_numeric(&g, &dg, &g_inv);

    let frame = FrameEval::at(metric.nconnection(), p)?;
    let (e, e_inv) = (&frame.e, &frame.e_inv);
    let grad_n = metric.nconnection().gradient(p, &mut diff)?;
    // ∂_ν E[β][λ]: nonzero only for β = i, λ = n + a, where it is −∂_ν N^a_i
    let d_e = |beta: usize, lambda: usize, nu: usize| -> f64 {
        if beta < n && lambda >= n {
            -grad_n[[beta, lambda - n, nu]]
        } else {
            0.0
        }
    };
    let mut adapted = Array3::zeros((t, t, t));
    for gamma in 0..t {
        for beta in 0..t {
            for mu in 0..t {
                let mut s = 0.0;
                for lambda in 0..t {
                    let mut inner = 0.0;
                    for nu in 0..t {
                        inner += e[(mu, nu)] * d_e(beta, lambda, nu);
                        for sigma in 0..t {
                            inner += e[(mu, nu)] * e[(beta, sigma)] * gamma_c[[lambda, nu, sigma]];
                        }
                    }
                    s += e_inv[(lambda, gamma)] * inner;
                }
                adapted[[gamma, beta, mu]] = s;
            }
        }
    }
    let canonical = DConnectionField::canonical(metric).eval(p)?.full();
    let distortion = &canonical - &adapted;
    Ok(LeviCivitaEval { coordinate: gamma_c, adapted, distortion, at: p.clone() })
}

/// The three-block deformation tensor `P^a_bk = ∂_b N^a_k`,
/// `P^i_jc = −½ g^{ik} Ω^a_kj h_ca`, other blocks zero, at `[[γ, β, μ]]`.
pub fn distortion_formula(metric: &DMetric, p: &ChartPoint) -> Result<Array3<f64>, GeometryError> {
    let dims = metric.dims();
    let Dimensions { n, m } = dims;
    let t = n + m;
    let blocks = metric.eval_checked(p)?;
    let g_inv = inverse_checked("g", &blocks.g, p)?;
    let omega = nconnection_curvature(metric.nconnection(), p)?;
    let mut diff = Differentiator::new();
    let mut out = Array3::zeros((t, t, t));
    for a in 0..m {
        for b in 0..m {
            for k in 0..n {
                out[[n + a, n + b, k]] = diff.diff(metric.nconnection().get(k, a), Var::Y(b)).eval(p)?;
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for c in 0..m {
                let mut s = 0.0;
                for k in 0..n {
                    for a in 0..m {
                        s += g_inv[(i, k)] * omega[[a, k, j]] * blocks.h[(c, a)];
                    }
                }
                out[[i, j, n + c]] = -0.5 * s;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_metric_has_no_distortion() {
        let dims = Dimensions::new(2, 2).unwrap();
        let p = ChartPoint::new(vec![0.2, 0.1], vec![-0.4, 0.5]);
        let lc = levi_civita(&DMetric::flat(dims), &p).unwrap();
        assert!(lc.adapted.iter().all(|v| *v == 0.0));
        assert!(lc.distortion.iter().all(|v| *v == 0.0));
        assert!(distortion_formula(&DMetric::flat(dims), &p).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn holonomic_base_metric_matches_canonical() {
        // N = 0 and h constant: the coordinate metric is a product and both
        // connections reduce to the Christoffel symbols of g.
        let dims = Dimensions::new(2, 1).unwrap();
        let s =
            |v: &[&[&str]]| v.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect::<Vec<Vec<String>>>();
        let m = DMetric::from_strings(dims, &s(&[&["1", "0"], &["0", "sin(x1)^2"]]), &s(&[&["1"]]), &[]).unwrap();
        let p = ChartPoint::new(vec![0.7, 0.0], vec![0.0]);
        let lc = levi_civita(&m, &p).unwrap();
        assert!(lc.distortion.iter().all(|v| v.abs() < 1e-14));
    }
}
