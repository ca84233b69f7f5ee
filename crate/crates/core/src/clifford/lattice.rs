use nalgebra::DMatrix;
use num_complex::Complex64;

use super::sparse::{self, CsrC};
use super::spin::{FrameGammas, SpinDConnectionEval, SpinPlan};
use super::{CMatrix, CliffordError};
use crate::expr::ChartPoint;
use crate::geometry::{CurvatureField, DMetric, FrameEval};

/// Largest admissible operator dimension (nodes times spinor size).
pub const MAX_OPERATOR_DIM: usize = 20_000;
/// Smallest admissible number of nodes per direction.
pub const MIN_NODES: usize = 4;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Periodic box in chart coordinates. Node `j` along direction `μ` sits at
/// `origin[μ] + j · lengths[μ] / sizes[μ]`; the last direction varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub sizes: Vec<usize>,
    pub lengths: Vec<f64>,
    pub origin: Vec<f64>,
}

impl Grid {
    pub fn new(sizes: Vec<usize>, lengths: Vec<f64>, origin: Vec<f64>) -> Result<Self, CliffordError> {
        if sizes.len() != lengths.len() || sizes.len() != origin.len() || sizes.is_empty() {
            return Err(CliffordError::Shape("grid sizes, lengths and origin must have one common length".into()));
        }
        if let Some(s) = sizes.iter().find(|&&s| s < MIN_NODES) {
            return Err(CliffordError::Envelope(format!("{s} nodes in a direction, need at least {MIN_NODES}")));
        }
        if let Some(l) = lengths.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(CliffordError::Shape(format!("box length {l} must be positive")));
        }
        Ok(Self { sizes, lengths, origin })
    }

    /// Box `[0, L_μ)` in every direction.
    pub fn periodic(sizes: Vec<usize>, lengths: Vec<f64>) -> Result<Self, CliffordError> {
        let origin = vec![0.0; sizes.len()];
        Self::new(sizes, lengths, origin)
    }

    pub fn dim(&self) -> usize {
        self.sizes.len()
    }

    pub fn volume(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn spacing(&self, mu: usize) -> f64 {
        self.lengths[mu] / self.sizes[mu] as f64
    }

    pub fn multi_index(&self, mut node: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for mu in (0..self.dim()).rev() {
            idx[mu] = node % self.sizes[mu];
            node /= self.sizes[mu];
        }
        idx
    }

    pub fn node(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.sizes).fold(0, |acc, (i, s)| acc * s + i)
    }

    /// Node reached from `node` by `step` sites along `mu`, wrapping around.
    pub fn neighbor(&self, node: usize, mu: usize, step: isize) -> usize {
        let mut idx = self.multi_index(node);
        let s = self.sizes[mu] as isize;
        idx[mu] = (idx[mu] as isize + step).rem_euclid(s) as usize;
        self.node(&idx)
    }

    pub fn coordinates(&self, node: usize) -> Vec<f64> {
        self.multi_index(node)
            .iter()
            .enumerate()
            .map(|(mu, &j)| self.origin[mu] + j as f64 * self.spacing(mu))
            .collect()
    }

    fn check_envelope(&self, k: usize) -> Result<(), CliffordError> {
        let total = self.volume() * k;
        if total > MAX_OPERATOR_DIM {
            return Err(CliffordError::Envelope(format!("operator dimension {total} exceeds {MAX_OPERATOR_DIM}")));
        }
        Ok(())
    }
}

/// Complex spinor per node, stored node-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    pub k: usize,
    pub data: Vec<Complex64>,
}

impl SpinorField {
    pub fn from_fn(grid: &Grid, k: usize, f: impl Fn(&[f64]) -> Vec<Complex64>) -> Result<Self, CliffordError> {
        let mut data = Vec::with_capacity(grid.volume() * k);
        for node in 0..grid.volume() {
            let v = f(&grid.coordinates(node));
            if v.len() != k {
                return Err(CliffordError::Shape(format!("spinor of length {} where {k} expected", v.len())));
            }
            if v.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return Err(CliffordError::NonFinite);
            }
            data.extend(v);
        }
        Ok(Self { k, data })
    }

    /// `sqrt(Σ |ψ|² / volume)`.
    pub fn rms(&self) -> f64 {
        rms(&self.data, self.k)
    }
}

fn rms(v: &[Complex64], k: usize) -> f64 {
    let nodes = (v.len() / k.max(1)).max(1);
    (v.iter().map(|z| z.norm_sqr()).sum::<f64>() / nodes as f64).sqrt()
}

/// Per-node geometric data used by every lattice operator.
#[derive(Debug, Clone)]
struct NodeData {
    gammas: FrameGammas,
    spin: SpinDConnectionEval,
    frame: DMatrix<f64>,
    /// `sqrt(det g · det h)`.
    density: f64,
}

/// Geometry sampled at every node of a grid.
#[derive(Debug, Clone)]
pub struct LatticeGeometry {
    grid: Grid,
    k: usize,
    nodes: Vec<NodeData>,
}

impl LatticeGeometry {
    pub fn sample(metric: &DMetric, grid: &Grid) -> Result<Self, CliffordError> {
        let dims = metric.dims();
        if grid.dim() != dims.total() {
            return Err(CliffordError::Shape(format!(
                "grid of dimension {} for a chart of dimension {}",
                grid.dim(),
                dims.total()
            )));
        }
        let plan = SpinPlan::new(metric)?;
        let k = plan.gamma().size;
        grid.check_envelope(k)?;
        let mut nodes = Vec::with_capacity(grid.volume());
        for node in 0..grid.volume() {
            let p = ChartPoint::from_flat(dims, &grid.coordinates(node));
            let (gammas, spin) = plan.eval(&p)?;
            let b = metric.eval(&p)?;
            let frame = FrameEval::from_nconnection(&b.n).e;
            let density = (b.g.determinant() * if dims.m > 0 { b.h.determinant() } else { 1.0 }).sqrt();
            nodes.push(NodeData { gammas, spin, frame, density });
        }
        Ok(Self { grid: grid.clone(), k, nodes })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn spinor_dim(&self) -> usize {
        self.k
    }

    /// Operator `Σ_μ C_μ(u) δ_μ + B(u)` with `δ_μ` the central difference;
    /// `coeff(node)` returns `(C_0..C_{t-1}, B)`.
    fn stencil(&self, coeff: impl Fn(&NodeData) -> (Vec<CMatrix>, CMatrix)) -> CsrC {
        let k = self.k;
        let t = self.grid.dim();
        let size = self.grid.volume() * k;
        let mut trip = Vec::with_capacity(size * k * (2 * t + 1));
        for (node, data) in self.nodes.iter().enumerate() {
            let (c, b) = coeff(data);
            let mut push = |col_node: usize, m: &CMatrix, s: f64| {
                for r in 0..k {
                    for q in 0..k {
                        trip.push((node * k + r, col_node * k + q, m[(r, q)] * s));
                    }
                }
            };
            push(node, &b, 1.0);
            for (mu, cm) in c.iter().enumerate() {
                let inv = 0.5 / self.grid.spacing(mu);
                push(self.grid.neighbor(node, mu, 1), cm, inv);
                push(self.grid.neighbor(node, mu, -1), cm, -inv);
            }
        }
        sparse::from_triplets(size, size, &trip)
    }

    /// `Đ = −i Σ_α γ^α(u)(e_α + ρ_α)` with `e_α = E[α][μ] δ_μ`.
    pub fn dirac(&self) -> CsrC {
        let t = self.grid.dim();
        let k = self.k;
        self.stencil(|d| {
            let c = (0..t)
                .map(|mu| {
                    let mut m = CMatrix::zeros(k, k);
                    for a in 0..t {
                        let e = d.frame[(a, mu)];
                        if e != 0.0 {
                            m += &d.gammas.upper[a] * Complex64::new(e, 0.0);
                        }
                    }
                    m * -I
                })
                .collect();
            let mut b = CMatrix::zeros(k, k);
            for a in 0..t {
                b += &d.gammas.upper[a] * &d.spin.rho[a];
            }
            (c, b * -I)
        })
    }

    /// Orthonormal covariant derivative `A_μ̂ = (V⁻¹)^α_μ̂ (e_α + ρ_α)`.
    fn covariant(&self, hat: usize) -> CsrC {
        let t = self.grid.dim();
        let k = self.k;
        self.stencil(|d| {
            let vi = &d.gammas.vielbein_inv;
            let c = (0..t)
                .map(|mu| {
                    let s: f64 = (0..t).map(|a| vi[(a, hat)] * d.frame[(a, mu)]).sum();
                    CMatrix::identity(k, k) * Complex64::new(s, 0.0)
                })
                .collect();
            let mut b = CMatrix::zeros(k, k);
            for a in 0..t {
                b += &d.spin.rho[a] * Complex64::new(vi[(a, hat)], 0.0);
            }
            (c, b)
        })
    }

    /// `Đ*Đ = Σ_μ̂ W⁻¹ A_μ̂† W A_μ̂` with the density `W = sqrt(det g det h)`.
    pub fn connection_laplacian(&self) -> CsrC {
        let k = self.k;
        let w: Vec<f64> = self.nodes.iter().flat_map(|d| std::iter::repeat_n(d.density, k)).collect();
        let w_inv: Vec<f64> = w.iter().map(|x| 1.0 / x).collect();
        let size = self.grid.volume() * k;
        let mut out = sparse::from_triplets(size, size, &[]);
        for hat in 0..self.grid.dim() {
            let a = self.covariant(hat);
            let wa = sparse::scale_rows(&a, &w);
            let term = sparse::scale_rows(&(&sparse::adjoint(&a) * &wa), &w_inv);
            out = &out + &term;
        }
        out
    }
}

/// Lattice Dirac d-operator on a periodic box.
#[derive(Debug, Clone)]
pub struct LatticeDirac {
    pub grid: Grid,
    pub spinor_dim: usize,
    pub matrix: CsrC,
    pub metric: DMetric,
}

pub fn assemble_dirac(metric: &DMetric, grid: &Grid) -> Result<LatticeDirac, CliffordError> {
    let geo = LatticeGeometry::sample(metric, grid)?;
    Ok(LatticeDirac { grid: grid.clone(), spinor_dim: geo.k, matrix: geo.dirac(), metric: metric.clone() })
}

impl LatticeDirac {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        sparse::hermiticity_residual(&self.matrix)
    }

    pub fn apply(&self, psi: &SpinorField) -> Result<SpinorField, CliffordError> {
        if psi.data.len() != self.dim() {
            return Err(CliffordError::Shape(format!(
                "spinor field of length {} for operator of size {}",
                psi.data.len(),
                self.dim()
            )));
        }
        Ok(SpinorField { k: self.spinor_dim, data: sparse::matvec(&self.matrix, &psi.data) })
    }

    /// Sorted eigenvalues of the Hermitian part `(Đ + Đ†)/2` by dense
    /// diagonalization; equals the spectrum when the operator is self-adjoint.
    pub fn spectrum(&self) -> Vec<f64> {
        hermitian_spectrum(&self.matrix)
    }
}

pub fn hermitian_spectrum(a: &CsrC) -> Vec<f64> {
    let d = sparse::to_dense(a);
    let h = (&d + d.adjoint()) * Complex64::new(0.5, 0.0);
    let mut ev: Vec<f64> = nalgebra::SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Exact discrete spectrum for flat blocks and constant `N` (`n_coeffs[(i, a)]`).
///
/// A plane wave turns `δ_μ` into `i s_μ` with `s_μ = sin(k_μ h_μ)/h_μ`, so
/// `Đ` acts as `σ(s')` with `s'_i = s_i − N^a_i s_a`, `s'_a = s_a`, whose
/// eigenvalues are `±|s'|`, each with multiplicity `K/2` (`K = 1`: `s'` itself).
pub fn fourier_spectrum(grid: &Grid, n: usize, n_coeffs: &DMatrix<f64>) -> Vec<f64> {
    let t = grid.dim();
    let k = 1usize << (t / 2);
    let mut out = Vec::with_capacity(grid.volume() * k);
    for node in 0..grid.volume() {
        let idx = grid.multi_index(node);
        let s: Vec<f64> = (0..t)
            .map(|mu| {
                let h = grid.spacing(mu);
                let kk = 2.0 * std::f64::consts::PI * idx[mu] as f64 / grid.lengths[mu];
                (kk * h).sin() / h
            })
            .collect();
        let shifted: Vec<f64> = (0..t)
            .map(
                |mu| {
                    if mu < n {
                        s[mu] - (0..t - n).map(|a| n_coeffs[(mu, a)] * s[n + a]).sum::<f64>()
                    } else {
                        s[mu]
                    }
                },
            )
            .collect();
        if k == 1 {
            out.push(shifted[0]);
        } else {
            let r = shifted.iter().map(|x| x * x).sum::<f64>().sqrt();
            for _ in 0..k / 2 {
                out.push(r);
                out.push(-r);
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Residuals of `D² − (Đ*Đ + ¼R)` on a grid.
///
/// `operator` is the Frobenius norm over `sqrt(volume)`; `probe` is the RMS of
/// the defect applied to a smooth spinor field. The `_n` fields repeat both for
/// the d-metric with Euclidean blocks and the same N-connection, whose scalar
/// curvature comes from the N-connection alone.
#[derive(Debug, Clone, PartialEq)]
pub struct LichnerowiczReport {
    pub operator: f64,
    pub probe: f64,
    pub operator_n: f64,
    pub probe_n: f64,
    pub max_scalar: f64,
    pub max_scalar_n: f64,
}

struct Defect {
    operator: f64,
    probe: f64,
    max_scalar: f64,
}

fn defect(metric: &DMetric, grid: &Grid, probe: &dyn Fn(&[f64]) -> Vec<Complex64>) -> Result<Defect, CliffordError> {
    let geo = LatticeGeometry::sample(metric, grid)?;
    let k = geo.k;
    let dims = metric.dims();
    let curv = CurvatureField::canonical(metric);
    let mut scalar = Vec::with_capacity(grid.volume() * k);
    let mut max_scalar = 0.0f64;
    for node in 0..grid.volume() {
        let p = ChartPoint::from_flat(dims, &grid.coordinates(node));
        let r = curv.ricci(&p)?.scalar;
        max_scalar = max_scalar.max(r.abs());
        scalar.extend(std::iter::repeat_n(Complex64::new(0.25 * r, 0.0), k));
    }
    let d = geo.dirac();
    let lap = geo.connection_laplacian();
    let size = d.nrows();
    let quarter_r =
        sparse::from_triplets(size, size, &scalar.iter().enumerate().map(|(r, v)| (r, r, *v)).collect::<Vec<_>>());
    let diff = &(&d * &d) - &(&lap + &quarter_r);
    let operator = sparse::frobenius(&diff) / (grid.volume() as f64).sqrt();
    let psi = SpinorField::from_fn(grid, k, |u| probe(u))?;
    let probe = rms(&sparse::matvec(&diff, &psi.data), k);
    Ok(Defect { operator, probe, max_scalar })
}

/// Default smooth probe: `Π_μ sin⁸(π(u_μ − o_μ)/L_μ) · e^{2πi(u_0 − o_0)/L_0}`
/// times a fixed unit spinor with all components equal. The bump vanishes to
/// high order at the box faces, so periodic wrapping of nonperiodic
/// coefficients does not reach it.
pub fn smooth_probe(grid: &Grid, k: usize) -> impl Fn(&[f64]) -> Vec<Complex64> + '_ {
    move |u: &[f64]| {
        let mut amp = 1.0;
        for mu in 0..grid.dim() {
            amp *= (std::f64::consts::PI * (u[mu] - grid.origin[mu]) / grid.lengths[mu]).sin().powi(8);
        }
        let phase = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (u[0] - grid.origin[0]) / grid.lengths[0]);
        let c = amp / (k as f64).sqrt();
        vec![phase * c; k]
    }
}

pub fn lichnerowicz_residual(metric: &DMetric, grid: &Grid) -> Result<LichnerowiczReport, CliffordError> {
    let k = 1usize << (metric.dims().total() / 2);
    let probe = smooth_probe(grid, k);
    let full = defect(metric, grid, &probe)?;
    let nmetric = DMetric::euclidean_blocks(metric.nconnection().clone());
    let nvar = defect(&nmetric, grid, &probe)?;
    Ok(LichnerowiczReport {
        operator: full.operator,
        probe: full.probe,
        operator_n: nvar.operator,
        probe_n: nvar.probe,
        max_scalar: full.max_scalar,
        max_scalar_n: nvar.max_scalar,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Dimensions;
    use crate::geometry::NConnectionField;

    #[test]
    fn grid_indexing_wraps() {
        let g = Grid::periodic(vec![4, 5], vec![1.0, 2.0]).unwrap();
        assert_eq!(g.volume(), 20);
        assert_eq!(g.multi_index(7), vec![1, 2]);
        assert_eq!(g.node(&[1, 2]), 7);
        assert_eq!(g.neighbor(g.node(&[3, 4]), 1, 1), g.node(&[3, 0]));
        assert_eq!(g.neighbor(g.node(&[0, 4]), 0, -1), g.node(&[3, 4]));
        assert!((g.coordinates(7)[1] - 0.8).abs() < 1e-15);
        assert!(matches!(Grid::periodic(vec![3, 5], vec![1.0, 1.0]), Err(CliffordError::Envelope(_))));
    }

    #[test]
    fn envelope_is_enforced() {
        let m = DMetric::flat(Dimensions::new(2, 2).unwrap());
        let g = Grid::periodic(vec![12, 12, 12, 4], vec![1.0; 4]).unwrap();
        assert!(matches!(assemble_dirac(&m, &g), Err(CliffordError::Envelope(_))));
    }

    #[test]
    fn one_dimensional_torus() {
        let m = DMetric::flat(Dimensions::base_only(1).unwrap());
        let g = Grid::periodic(vec![10], vec![3.0]).unwrap();
        let op = assemble_dirac(&m, &g).unwrap();
        assert_eq!(op.spinor_dim, 1);
        let oracle = fourier_spectrum(&g, 1, &DMatrix::zeros(1, 0));
        let err = op.spectrum().iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn constant_n_spectrum_and_identity() {
        let dims = Dimensions::new(1, 1).unwrap();
        let nc = NConnectionField::from_strings(dims, &[vec!["0.3".into()]]).unwrap();
        let m = DMetric::euclidean_blocks(nc);
        let grid = Grid::periodic(vec![6, 8], vec![2.0, 3.0]).unwrap();
        let op = assemble_dirac(&m, &grid).unwrap();
        assert!(op.hermiticity_residual() < 1e-12);
        let oracle = fourier_spectrum(&grid, 1, &DMatrix::from_element(1, 1, 0.3));
        let err = op.spectrum().iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
        let r = lichnerowicz_residual(&m, &grid).unwrap();
        assert!(r.operator < 1e-10 && r.probe < 1e-10 && r.operator_n < 1e-10, "{r:?}");
    }

    #[test]
    fn curved_operator_is_not_mistaken_for_flat() {
        let dims = Dimensions::base_only(2).unwrap();
        let m = DMetric::from_strings(
            dims,
            &[vec!["1".into(), "0".into()], vec!["0".into(), "sin(x1)^2".into()]],
            &[],
            &[],
        )
        .unwrap();
        let g = Grid::new(vec![8, 8], vec![2.0, 6.0], vec![0.5, 0.0]).unwrap();
        let r = lichnerowicz_residual(&m, &g).unwrap();
        assert!((r.max_scalar - 2.0).abs() < 1e-9);
        assert!(r.probe > 1e-3);
    }
}
