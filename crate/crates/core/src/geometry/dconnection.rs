//! d-connections `Γ = (L^i_jk, L^a_bk, C^i_jc, C^a_bc)` and the canonical one
//! built from `(g, h, N)`.

use ndarray::Array3;

use super::metric::symbolic_inverse;
use super::{frame_gradient, DMetric, FrameEval, GeometryError};
use crate::expr::{sum, ChartPoint, Differentiator, Dimensions, Evaluator, Expr, Var};

/// Symbolic d-connection coefficients.
#[derive(Debug, Clone)]
pub struct DConnectionField {
    dims: Dimensions,
    /// `L^i_jk` at `[[i, j, k]]`.
    pub lhh: Array3<Expr>,
    /// `L^a_bk` at `[[a, b, k]]`.
    pub lvv: Array3<Expr>,
    /// `C^i_jc` at `[[i, j, c]]`.
    pub chh: Array3<Expr>,
    /// `C^a_bc` at `[[a, b, c]]`.
    pub cvv: Array3<Expr>,
}

/// d-connection coefficients at one point, same layout as [`DConnectionField`].
#[derive(Debug, Clone, PartialEq)]
pub struct DConnectionEval {
    pub lhh: Array3<f64>,
    pub lvv: Array3<f64>,
    pub chh: Array3<f64>,
    pub cvv: Array3<f64>,
    pub at: ChartPoint,
}

impl DConnectionField {
    /// The canonical d-connection of a d-metric.
    pub fn canonical(metric: &DMetric) -> Self {
        let dims = metric.dims();
        let Dimensions { n, m } = dims;
        let g = metric.g();
        let h = metric.h();
        let nc = metric.nconnection();
        let g_inv = symbolic_inverse(g);
        let h_inv = if m > 0 { symbolic_inverse(h) } else { h.clone() };
        let mut diff = Differentiator::new();

        // e_k g_jr at [[j, r, k]], e_k h_bc at [[b, c, k]]
        let eg = Array3::from_shape_fn((n, n, n), |(j, r, k)| nc.adapted_derivative(&g[[j, r]], k, &mut diff));
        let eh = Array3::from_shape_fn((m, m, n), |(b, c, k)| nc.adapted_derivative(&h[[b, c]], k, &mut diff));
        // ∂_c g_jk at [[j, k, c]], ∂_c h_bd at [[b, d, c]]
        let dg = Array3::from_shape_fn((n, n, m), |(j, k, c)| diff.diff(&g[[j, k]], Var::Y(c)));
        let dh = Array3::from_shape_fn((m, m, m), |(b, d, c)| diff.diff(&h[[b, d]], Var::Y(c)));
        // ∂_b N^d_k at [[d, k, b]]
        let dn = Array3::from_shape_fn((m, n, m), |(d, k, b)| diff.diff(nc.get(k, d), Var::Y(b)));

        let lhh = Array3::from_shape_fn((n, n, n), |(i, j, k)| {
            let s = sum((0..n).map(|r| &g_inv[[i, r]] * (&eg[[j, r, k]] + &eg[[k, r, j]] - &eg[[j, k, r]])));
            s * 0.5
        });
        let lvv = Array3::from_shape_fn((m, m, n), |(a, b, k)| {
            let inner = sum((0..m).map(|c| {
                let t = &eh[[b, c, k]]
                    - sum((0..m).map(|d| &h[[d, c]] * &dn[[d, k, b]]))
                    - sum((0..m).map(|d| &h[[d, b]] * &dn[[d, k, c]]));
                &h_inv[[a, c]] * t
            }));
            &dn[[a, k, b]] + inner * 0.5
        });
        let chh =
            Array3::from_shape_fn((n, n, m), |(i, j, c)| sum((0..n).map(|k| &g_inv[[i, k]] * &dg[[j, k, c]])) * 0.5);
        let cvv = Array3::from_shape_fn((m, m, m), |(a, b, c)| {
            let s = sum((0..m).map(|d| &h_inv[[a, d]] * (&dh[[b, d, c]] + &dh[[c, d, b]] - &dh[[b, c, d]])));
            s * 0.5
        });
        Self { dims, lhh, lvv, chh, cvv }
    }

    pub fn dims(&self) -> Dimensions {
        self.dims
    }

    /// All coefficients as one `(n+m)^3` array `[[γ, β, μ]]`; entries that a
    /// d-connection forces to vanish are zero.
    pub fn full(&self) -> Array3<Expr> {
        let Dimensions { n, m } = self.dims;
        let t = n + m;
        let mut out = Array3::from_elem((t, t, t), Expr::zero());
        scatter(&mut out, n, m, |blk, idx| match blk {
            Block::Lhh => self.lhh[idx].clone(),
            Block::Lvv => self.lvv[idx].clone(),
            Block::Chh => self.chh[idx].clone(),
            Block::Cvv => self.cvv[idx].clone(),
        });
        out
    }

    pub fn eval(&self, p: &ChartPoint) -> Result<DConnectionEval, GeometryError> {
        p.check(self.dims)?;
        let mut ev = Evaluator::new(p);
        let mut num = |a: &Array3<Expr>| -> Result<Array3<f64>, GeometryError> {
            let mut out = Array3::zeros(a.dim());
            for (idx, e) in a.indexed_iter() {
                let v = ev.eval(e)?;
                out[idx] = v;
            }
            Ok(out)
        };
        Ok(DConnectionEval {
            lhh: num(&self.lhh)?,
            lvv: num(&self.lvv)?,
            chh: num(&self.chh)?,
            cvv: num(&self.cvv)?,
            at: p.clone(),
        })
    }
}

enum Block {
    Lhh,
    Lvv,
    Chh,
    Cvv,
}

fn scatter<T>(out: &mut Array3<T>, n: usize, m: usize, mut get: impl FnMut(Block, [usize; 3]) -> T) {
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                out[[i, j, k]] = get(Block::Lhh, [i, j, k]);
            }
            for c in 0..m {
                out[[i, j, n + c]] = get(Block::Chh, [i, j, c]);
            }
        }
    }
    for a in 0..m {
        for b in 0..m {
            for k in 0..n {
                out[[n + a, n + b, k]] = get(Block::Lvv, [a, b, k]);
            }
            for c in 0..m {
                out[[n + a, n + b, n + c]] = get(Block::Cvv, [a, b, c]);
            }
        }
    }
}

impl DConnectionEval {
    /// `(n+m)^3` array `[[γ, β, μ]]`.
    pub fn full(&self) -> Array3<f64> {
        let n = self.lhh.dim().0;
        let m = self.cvv.dim().0;
        let t = n + m;
        let mut out = Array3::zeros((t, t, t));
        scatter(&mut out, n, m, |blk, idx| match blk {
            Block::Lhh => self.lhh[idx],
            Block::Lvv => self.lvv[idx],
            Block::Chh => self.chh[idx],
            Block::Cvv => self.cvv[idx],
        });
        out
    }

    pub fn max_abs(&self) -> f64 {
        [&self.lhh, &self.lvv, &self.chh, &self.cvv]
            .iter()
            .flat_map(|a| a.iter())
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
    }
}

pub fn canonical_dconnection(metric: &DMetric, p: &ChartPoint) -> Result<DConnectionEval, GeometryError> {
    metric.eval_checked(p)?;
    DConnectionField::canonical(metric).eval(p)
}

/// Largest residuals of the four compatibility identities
/// `D_k g = 0`, `D_k h = 0`, `D_c g = 0`, `D_c h = 0`, in that order.
pub fn metric_compatibility(metric: &DMetric, d: &DConnectionEval, p: &ChartPoint) -> Result<[f64; 4], GeometryError> {
    let dims = metric.dims();
    let Dimensions { n, m } = dims;
    let blocks = metric.eval_checked(p)?;
    let frame = FrameEval::at(metric.nconnection(), p)?;
    let mut diff = Differentiator::new();
    let mut ev = Evaluator::new(p);
    let mut dg = vec![vec![Vec::new(); n]; n];
    for (r, row) in dg.iter_mut().enumerate() {
        for (c, slot) in row.iter_mut().enumerate() {
            *slot = frame_gradient(&metric.g()[[r, c]], &frame, dims, &mut diff, &mut ev)?;
        }
    }
    let mut dh = vec![vec![Vec::new(); m]; m];
    for (r, row) in dh.iter_mut().enumerate() {
        for (c, slot) in row.iter_mut().enumerate() {
            *slot = frame_gradient(&metric.h()[[r, c]], &frame, dims, &mut diff, &mut ev)?;
        }
    }
    let (g, h) = (&blocks.g, &blocks.h);
    let mut res = [0.0f64; 4];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let s: f64 = (0..n).map(|l| d.lhh[[l, i, k]] * g[(l, j)] + d.lhh[[l, j, k]] * g[(i, l)]).sum();
                res[0] = res[0].max((dg[i][j][k] - s).abs());
            }
            for c in 0..m {
                let s: f64 = (0..n).map(|l| d.chh[[l, i, c]] * g[(l, j)] + d.chh[[l, j, c]] * g[(i, l)]).sum();
                res[2] = res[2].max((dg[i][j][n + c] - s).abs());
            }
        }
    }
    for a in 0..m {
        for b in 0..m {
            for k in 0..n {
                let s: f64 = (0..m).map(|c| d.lvv[[c, a, k]] * h[(c, b)] + d.lvv[[c, b, k]] * h[(a, c)]).sum();
                res[1] = res[1].max((dh[a][b][k] - s).abs());
            }
            for c in 0..m {
                let s: f64 = (0..m).map(|e| d.cvv[[e, a, c]] * h[(e, b)] + d.cvv[[e, b, c]] * h[(a, e)]).sum();
                res[3] = res[3].max((dh[a][b][n + c] - s).abs());
            }
        }
    }
    Ok(res)
}
