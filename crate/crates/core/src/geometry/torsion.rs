use ndarray::Array3;

use super::{nconnection_curvature, DConnectionEval, DMetric, GeometryError};
use crate::expr::{ChartPoint, Differentiator, Dimensions, Var};

/// The five torsion families of a d-connection at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct TorsionEval {
    /// `T^i_jk = L^i_jk − L^i_kj` at `[[i, j, k]]`.
    pub thhh: Array3<f64>,
    /// `T^i_ja = C^i_ja` at `[[i, j, a]]`.
    pub thhv: Array3<f64>,
    /// `T^a_ji = Ω^a_ji` at `[[a, j, i]]`.
    pub tvhh: Array3<f64>,
    /// `T^a_bi = ∂_b N^a_i − L^a_bi` at `[[a, b, i]]`.
    pub tvvh: Array3<f64>,
    /// `T^a_bc = C^a_bc − C^a_cb` at `[[a, b, c]]`.
    pub tvvv: Array3<f64>,
    pub at: ChartPoint,
}

impl TorsionEval {
    pub fn max_abs(&self) -> f64 {
        [&self.thhh, &self.thhv, &self.tvhh, &self.tvvh, &self.tvvv]
            .iter()
            .flat_map(|a| a.iter())
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
    }
}

pub fn d_torsion(metric: &DMetric, d: &DConnectionEval, p: &ChartPoint) -> Result<TorsionEval, GeometryError> {
    let dims = metric.dims();
    let Dimensions { n, m } = dims;
    let nc = metric.nconnection();
    p.check(dims)?;
    let thhh = Array3::from_shape_fn((n, n, n), |(i, j, k)| d.lhh[[i, j, k]] - d.lhh[[i, k, j]]);
    let tvvv = Array3::from_shape_fn((m, m, m), |(a, b, c)| d.cvv[[a, b, c]] - d.cvv[[a, c, b]]);
    let tvhh = nconnection_curvature(nc, p)?;
    let mut diff = Differentiator::new();
    let mut tvvh = Array3::zeros((m, m, n));
    for a in 0..m {
        for b in 0..m {
            for i in 0..n {
                let dn = diff.diff(nc.get(i, a), Var::Y(b)).eval(p)?;
                tvvh[[a, b, i]] = dn - d.lvv[[a, b, i]];
            }
        }
    }
    Ok(TorsionEval { thhh, thhv: d.chh.clone(), tvhh, tvvh, tvvv, at: p.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::canonical_dconnection;

    #[test]
    fn h_torsion_equals_omega() {
        let dims = Dimensions::new(2, 1).unwrap();
        let rows = |r: &[&str]| r.iter().map(|s| vec![s.to_string()]).collect::<Vec<_>>();
        let one = vec![vec!["1".to_string()]];
        let id2 = vec![vec!["1".to_string(), "0".to_string()], vec!["0".to_string(), "1".to_string()]];
        let m = DMetric::from_strings(dims, &id2, &one, &rows(&["y1", "x1"])).unwrap();
        let p = ChartPoint::new(vec![0.3, 0.0], vec![1.0]);
        let d = canonical_dconnection(&m, &p).unwrap();
        let t = d_torsion(&m, &d, &p).unwrap();
        assert!((t.tvhh[[0, 0, 1]] + 1.3).abs() < 1e-12);
        assert!((t.tvhh[[0, 1, 0]] - 1.3).abs() < 1e-12);
        assert!(t.thhh.iter().all(|v| v.abs() < 1e-14));
        assert!(t.tvvv.iter().all(|v| v.abs() < 1e-14));
    }
}
