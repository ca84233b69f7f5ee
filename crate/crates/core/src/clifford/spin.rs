use nalgebra::DMatrix;
use ndarray::Array3;
use num_complex::Complex64;

use super::gamma::{build_gamma, GammaRep};
use super::{max_abs, CMatrix, CliffordError};
use crate::expr::{ChartPoint, Differentiator, Evaluator, Expr};
use crate::geometry::{DConnectionField, DMetric, FrameEval};

/// Frame-index gammas at a point together with the vielbein that produced them.
///
/// With the frame metric `D = diag(g, h) = L Lᵀ` (Cholesky), the vielbein is
/// `V = Lᵀ`, so `D = Vᵀ V`. Then `γ^α = (V⁻¹)^α_μ̂ γ^μ̂` and `γ_α = V^μ̂_α γ^μ̂`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameGammas {
    pub upper: Vec<CMatrix>,
    pub lower: Vec<CMatrix>,
    /// `V[(μ̂, α)]`.
    pub vielbein: DMatrix<f64>,
    pub vielbein_inv: DMatrix<f64>,
    /// `D = diag(g, h)`.
    pub frame_metric: DMatrix<f64>,
}

fn combine(coeffs: impl Iterator<Item = f64>, gammas: &[CMatrix]) -> CMatrix {
    let k = gammas[0].nrows();
    let mut out = CMatrix::zeros(k, k);
    for (c, g) in coeffs.zip(gammas) {
        if c != 0.0 {
            out += g * Complex64::new(c, 0.0);
        }
    }
    out
}

/// Cholesky factor of `diag(g, h)`, rejecting non-positive-definite blocks.
fn cholesky_blocks(g: &DMatrix<f64>, h: &DMatrix<f64>, p: &ChartPoint) -> Result<DMatrix<f64>, CliffordError> {
    let (n, m) = (g.nrows(), h.nrows());
    let mut l = DMatrix::zeros(n + m, n + m);
    for (block, a, off) in [("g", g, 0), ("h", h, n)] {
        if a.nrows() == 0 {
            continue;
        }
        let c = nalgebra::Cholesky::new(a.clone())
            .ok_or_else(|| CliffordError::NotPositiveDefinite { block, point: p.flat() })?;
        l.view_mut((off, off), (a.nrows(), a.nrows())).copy_from(&c.l());
    }
    Ok(l)
}

impl FrameGammas {
    pub fn from_blocks(
        rep: &GammaRep,
        g: &DMatrix<f64>,
        h: &DMatrix<f64>,
        p: &ChartPoint,
    ) -> Result<Self, CliffordError> {
        let t = g.nrows() + h.nrows();
        if rep.dim != t {
            return Err(CliffordError::Shape(format!("gamma dimension {} for a frame of size {t}", rep.dim)));
        }
        let l = cholesky_blocks(g, h, p)?;
        let v = l.transpose();
        let v_inv = v.clone().try_inverse().expect("Cholesky factor is invertible");
        let upper = (0..t).map(|a| combine((0..t).map(|mu| v_inv[(a, mu)]), &rep.gammas)).collect();
        let lower = (0..t).map(|a| combine((0..t).map(|mu| v[(mu, a)]), &rep.gammas)).collect();
        let mut d = DMatrix::zeros(t, t);
        d.view_mut((0, 0), g.shape()).copy_from(g);
        d.view_mut((g.nrows(), g.nrows()), h.shape()).copy_from(h);
        Ok(Self { upper, lower, vielbein: v, vielbein_inv: v_inv, frame_metric: d })
    }

    /// `max |{γ^α, γ^β} − 2 D^{αβ} I|`.
    pub fn clifford_residual(&self) -> f64 {
        let d_inv = self.frame_metric.clone().try_inverse().expect("positive definite");
        super::gamma::anticommutator_residual(&self.upper, &d_inv)
    }
}

/// Frame-index gammas `γ^α(p)` for a d-metric.
pub fn frame_gamma(rep: &GammaRep, metric: &DMetric, p: &ChartPoint) -> Result<FrameGammas, CliffordError> {
    let b = metric.eval_checked(p)?;
    FrameGammas::from_blocks(rep, &b.g, &b.h, p)
}

/// Spin d-connection at a point.
///
/// `omega[[ĉ, d̂, μ]] = V^ĉ_β (e_μ (V⁻¹)^β_d̂ + Γ̂^β_γμ (V⁻¹)^γ_d̂)` and
/// `ρ_μ = ¼ ω^ĉ_d̂μ γ^ĉ γ^d̂`, which makes `[ρ_μ, γ^b̂] = ω^ĉ_b̂μ γ^ĉ`.
/// The d-metric is block diagonal in the adapted frame, so `ω` splits into an
/// h-sector (`ĉ, d̂ < n`) and a v-sector; `rho_h` and `rho_v` are those parts
/// and `rho = rho_h + rho_v`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinDConnectionEval {
    pub n: usize,
    pub omega: Array3<f64>,
    pub rho: Vec<CMatrix>,
    pub rho_h: Vec<CMatrix>,
    pub rho_v: Vec<CMatrix>,
    pub at: ChartPoint,
}

impl SpinDConnectionEval {
    /// `max_μ |ρ_μ + ρ_μ†|`.
    pub fn anti_hermitian_residual(&self) -> f64 {
        self.rho.iter().map(|r| max_abs(&(r + r.adjoint()))).fold(0.0, f64::max)
    }

    /// `max |ω^ĉ_d̂μ + ω^d̂_ĉμ|`.
    pub fn omega_antisymmetry(&self) -> f64 {
        let (t, _, _) = self.omega.dim();
        let mut worst = 0.0f64;
        for c in 0..t {
            for d in 0..t {
                for mu in 0..t {
                    worst = worst.max((self.omega[[c, d, mu]] + self.omega[[d, c, mu]]).abs());
                }
            }
        }
        worst
    }
}

/// Symbolic data shared by every evaluation of the spin d-connection of one
/// d-metric; built once per metric, evaluated once per node.
#[derive(Debug, Clone)]
pub struct SpinPlan {
    metric: DMetric,
    rep: GammaRep,
    field: DConnectionField,
    /// `∂_ν D_αβ` at `[[α, β, ν]]`.
    d_frame_metric: Array3<Expr>,
}

/// Derivative of the Cholesky factor: `dL = L Φ(L⁻¹ dD L⁻ᵀ)` with `Φ` the lower
/// triangle and halved diagonal.
fn cholesky_derivative(l: &DMatrix<f64>, l_inv: &DMatrix<f64>, dd: &DMatrix<f64>) -> DMatrix<f64> {
    let mut phi = l_inv * dd * l_inv.transpose();
    let t = phi.nrows();
    for r in 0..t {
        for c in 0..t {
            if c > r {
                phi[(r, c)] = 0.0;
            } else if c == r {
                phi[(r, c)] *= 0.5;
            }
        }
    }
    l * phi
}

impl SpinPlan {
    pub fn new(metric: &DMetric) -> Result<Self, CliffordError> {
        let dims = metric.dims();
        let t = dims.total();
        let rep = build_gamma(t)?;
        let d = metric.frame_metric();
        let mut diff = Differentiator::new();
        let d_frame_metric = Array3::from_shape_fn((t, t, t), |(a, b, nu)| diff.diff(&d[[a, b]], dims.var(nu)));
        Ok(Self { metric: metric.clone(), rep, field: DConnectionField::canonical(metric), d_frame_metric })
    }

    pub fn metric(&self) -> &DMetric {
        &self.metric
    }

    pub fn gamma(&self) -> &GammaRep {
        &self.rep
    }

    pub fn eval(&self, p: &ChartPoint) -> Result<(FrameGammas, SpinDConnectionEval), CliffordError> {
        let dims = self.metric.dims();
        let t = dims.total();
        let n = dims.n;
        let b = self.metric.eval_checked(p)?;
        let fg = FrameGammas::from_blocks(&self.rep, &b.g, &b.h, p)?;
        let frame = FrameEval::from_nconnection(&b.n);
        let gamma_hat = self.field.eval(p)?.full();
        let mut ev = Evaluator::new(p);
        let mut coord = Array3::<f64>::zeros((t, t, t));
        for (idx, e) in self.d_frame_metric.indexed_iter() {
            coord[idx] = ev.eval(e)?;
        }
        let v = &fg.vielbein;
        let v_inv = &fg.vielbein_inv;
        let l = v.transpose();
        let l_inv = v_inv.transpose();
        let mut omega = Array3::zeros((t, t, t));
        for mu in 0..t {
            // e_μ D = E[μ][ν] ∂_ν D
            let dd = DMatrix::from_fn(t, t, |a, bb| (0..t).map(|nu| frame.e[(mu, nu)] * coord[[a, bb, nu]]).sum());
            let dl = cholesky_derivative(&l, &l_inv, &dd);
            let dv_inv = -(&l_inv.transpose()) * dl.transpose() * l_inv.transpose();
            let gm = DMatrix::from_fn(t, t, |beta, gam| gamma_hat[[beta, gam, mu]]);
            let w = v * (dv_inv + gm * v_inv);
            for c in 0..t {
                for d in 0..t {
                    omega[[c, d, mu]] = w[(c, d)];
                }
            }
        }
        let k = self.rep.size;
        let mut rho_h = Vec::with_capacity(t);
        let mut rho_v = Vec::with_capacity(t);
        for mu in 0..t {
            let mut rh = CMatrix::zeros(k, k);
            let mut rv = CMatrix::zeros(k, k);
            for c in 0..t {
                for d in 0..t {
                    let w = omega[[c, d, mu]];
                    if c == d || w == 0.0 {
                        continue;
                    }
                    let term = &self.rep.gammas[c] * &self.rep.gammas[d] * Complex64::new(0.25 * w, 0.0);
                    if c < n && d < n {
                        rh += term;
                    } else {
                        rv += term;
                    }
                }
            }
            rho_h.push(rh);
            rho_v.push(rv);
        }
        let rho = rho_h.iter().zip(&rho_v).map(|(a, b)| a + b).collect();
        Ok((fg, SpinDConnectionEval { n, omega, rho, rho_h, rho_v, at: p.clone() }))
    }
}

/// Canonical spin d-connection of `metric` at `p`.
pub fn spin_dconnection(metric: &DMetric, p: &ChartPoint) -> Result<SpinDConnectionEval, CliffordError> {
    Ok(SpinPlan::new(metric)?.eval(p)?.1)
}

/// Principal symbol `σ(k) = γ^α(p) k_α` of the Dirac d-operator.
pub fn dirac_symbol(g: &FrameGammas, k: &[f64]) -> Result<CMatrix, CliffordError> {
    if k.len() != g.upper.len() {
        return Err(CliffordError::Shape(format!("covector of length {} for {} directions", k.len(), g.upper.len())));
    }
    Ok(combine(k.iter().copied(), &g.upper))
}

/// `max |σ(k)² − |k|²_g I|` with `|k|²_g = D^{αβ} k_α k_β`.
pub fn symbol_ellipticity_residual(g: &FrameGammas, k: &[f64]) -> Result<f64, CliffordError> {
    let s = dirac_symbol(g, k)?;
    let d_inv = g.frame_metric.clone().try_inverse().expect("positive definite");
    let kv = nalgebra::DVector::from_column_slice(k);
    let norm2 = (kv.transpose() * d_inv * &kv)[(0, 0)];
    let id = CMatrix::identity(s.nrows(), s.nrows());
    Ok(max_abs(&(&s * &s - id * Complex64::new(norm2, 0.0))))
}
