//! Python bindings. Matrices cross the boundary as nested lists of floats
//! (complex entries as Python `complex`); points are passed as `x`, `y` lists.

use anholonomic::cech::{parse_cover, z2_cohomology, Cover};
use anholonomic::chern::{chern_form, integrate_form, monopole};
use anholonomic::cli::{build_report, run_selftest, RunConfig, DEFAULT_SEED};
use anholonomic::clifford::{assemble_dirac, build_gamma, lichnerowicz_residual, Grid};
use anholonomic::expr::{ChartPoint, Dimensions};
use anholonomic::geometry::{
    assemble_offdiagonal, canonical_dconnection, d_torsion, levi_civita, metric_compatibility, CurvatureField,
    DMetric as CoreMetric,
};
use anholonomic::lagrange::{
    almost_complex, canonical_nconnection, hessian_metric, sasaki_lift, Lagrangian as CoreLagrangian,
};
use nalgebra::DMatrix;
use ndarray::Array3;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyComplex, PyDict};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect()
}

fn tensor3(a: &Array3<f64>) -> Vec<Vec<Vec<f64>>> {
    let (s0, s1, s2) = a.dim();
    (0..s0).map(|i| (0..s1).map(|j| (0..s2).map(|k| a[[i, j, k]]).collect()).collect()).collect()
}

fn point(dims: Dimensions, x: Vec<f64>, y: Vec<f64>) -> PyResult<ChartPoint> {
    if x.len() != dims.n || y.len() != dims.m {
        return Err(err(format!("point needs {} base and {} fiber coordinates", dims.n, dims.m)));
    }
    Ok(ChartPoint::new(x, y))
}

fn grid(sizes: Vec<usize>, lengths: Vec<f64>, origin: Option<Vec<f64>>) -> PyResult<Grid> {
    let origin = origin.unwrap_or_else(|| vec![0.0; sizes.len()]);
    Grid::new(sizes, lengths, origin).map_err(err)
}

/// Regular Lagrangian `L(x, y)` on an `n`-dimensional base.
#[pyclass(frozen)]
struct Lagrangian {
    inner: CoreLagrangian,
}

#[pymethods]
impl Lagrangian {
    #[new]
    fn new(expr: &str, n: usize) -> PyResult<Self> {
        Ok(Self { inner: CoreLagrangian::parse(expr, n).map_err(err)? })
    }

    /// `g_ij = ½ ∂²L/∂y^i∂y^j`.
    fn hessian(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        let p = point(self.inner.dims(), x, y)?;
        Ok(rows(&hessian_metric(&self.inner, &p).map_err(err)?))
    }

    /// Canonical `N^i_j` as rows `[j][i]` (base index first).
    fn nconnection(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        let p = point(self.inner.dims(), x, y)?;
        let n = canonical_nconnection(&self.inner).eval(&p).map_err(err)?;
        let s = n.shape();
        Ok((0..s[0]).map(|j| (0..s[1]).map(|i| n[[j, i]]).collect()).collect())
    }

    /// Almost complex structure on coordinate components.
    fn almost_complex(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        let p = point(self.inner.dims(), x, y)?;
        Ok(rows(&almost_complex(&self.inner, &p).map_err(err)?.coordinate))
    }

    /// The Sasaki lift as a d-metric on the total space.
    fn sasaki(&self) -> PyResult<DMetric> {
        Ok(DMetric { inner: sasaki_lift(&self.inner).map_err(err)? })
    }
}

/// D-metric `g ⊕ h` with N-connection rows `n[i][a] = N^a_i`.
#[pyclass(frozen)]
struct DMetric {
    inner: CoreMetric,
}

#[pymethods]
impl DMetric {
    #[new]
    #[pyo3(signature = (g, h, n=None))]
    fn new(g: Vec<Vec<String>>, h: Vec<Vec<String>>, n: Option<Vec<Vec<String>>>) -> PyResult<Self> {
        let dims = if h.is_empty() { Dimensions::base_only(g.len()) } else { Dimensions::new(g.len(), h.len()) }
            .map_err(err)?;
        let n = n.unwrap_or_default();
        Ok(Self { inner: CoreMetric::from_strings(dims, &g, &h, &n).map_err(err)? })
    }

    /// `(n, m)`.
    fn dims(&self) -> (usize, usize) {
        let d = self.inner.dims();
        (d.n, d.m)
    }

    /// Coordinate-basis metric with off-diagonal blocks.
    fn coordinate_metric(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        let p = point(self.inner.dims(), x, y)?;
        Ok(rows(&assemble_offdiagonal(&self.inner, &p).map_err(err)?))
    }

    /// Canonical d-connection `[γ][β][μ] = (D_μ e_β)⌋e^γ` in the adapted frame.
    fn dconnection(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<Vec<Vec<Vec<f64>>>> {
        let p = point(self.inner.dims(), x, y)?;
        Ok(tensor3(&canonical_dconnection(&self.inner, &p).map_err(err)?.full()))
    }

    /// Canonical minus Levi-Civita in the adapted frame, same layout.
    fn distortion(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<Vec<Vec<Vec<f64>>>> {
        let p = point(self.inner.dims(), x, y)?;
        Ok(tensor3(&levi_civita(&self.inner, &p).map_err(err)?.distortion))
    }

    /// Largest `|T^i_jk|` and `|T^a_bc|`, which vanish for the canonical connection.
    fn pure_torsion(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
        let p = point(self.inner.dims(), x, y)?;
        let d = canonical_dconnection(&self.inner, &p).map_err(err)?;
        let t = d_torsion(&self.inner, &d, &p).map_err(err)?;
        Ok(t.thhh.iter().chain(t.tvvv.iter()).fold(0.0, |a, b| a.max(b.abs())))
    }

    /// The four metric-compatibility residuals.
    fn compatibility(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<[f64; 4]> {
        let p = point(self.inner.dims(), x, y)?;
        let d = canonical_dconnection(&self.inner, &p).map_err(err)?;
        metric_compatibility(&self.inner, &d, &p).map_err(err)
    }

    /// `(R_h, R_v, R)` scalar curvatures.
    fn scalar_curvature(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<(f64, f64, f64)> {
        let p = point(self.inner.dims(), x, y)?;
        let r = CurvatureField::canonical(&self.inner).ricci(&p).map_err(err)?;
        Ok((r.scalar_h, r.scalar_v, r.scalar))
    }

    /// Sorted eigenvalues of the Hermitian part of the lattice Dirac operator.
    #[pyo3(signature = (sizes, lengths, origin=None))]
    fn dirac_spectrum(&self, sizes: Vec<usize>, lengths: Vec<f64>, origin: Option<Vec<f64>>) -> PyResult<Vec<f64>> {
        let g = grid(sizes, lengths, origin)?;
        Ok(assemble_dirac(&self.inner, &g).map_err(err)?.spectrum())
    }

    /// Lichnerowicz residuals as a dict.
    #[pyo3(signature = (sizes, lengths, origin=None))]
    fn lichnerowicz<'py>(
        &self,
        py: Python<'py>,
        sizes: Vec<usize>,
        lengths: Vec<f64>,
        origin: Option<Vec<f64>>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let g = grid(sizes, lengths, origin)?;
        let r = lichnerowicz_residual(&self.inner, &g).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("operator", r.operator)?;
        d.set_item("probe", r.probe)?;
        d.set_item("operator_n", r.operator_n)?;
        d.set_item("probe_n", r.probe_n)?;
        d.set_item("max_scalar", r.max_scalar)?;
        Ok(d)
    }
}

/// Gamma matrices for dimension `d` as a list of complex matrices.
#[pyfunction]
fn gamma_matrices(py: Python<'_>, d: usize) -> PyResult<Vec<Vec<Vec<Bound<'_, PyComplex>>>>> {
    let rep = build_gamma(d).map_err(err)?;
    Ok(rep
        .gammas
        .iter()
        .map(|g| {
            (0..g.nrows())
                .map(|r| (0..g.ncols()).map(|c| PyComplex::from_doubles(py, g[(r, c)].re, g[(r, c)].im)).collect())
                .collect()
        })
        .collect())
}

/// `dim H^k(nerve; Z/2)` for `k = 0, 1, 2`; `simplices` are 0-based element lists.
#[pyfunction]
fn z2_betti(elements: usize, simplices: Vec<Vec<usize>>) -> PyResult<[usize; 3]> {
    Ok(z2_cohomology(&Cover::new(elements, &simplices).map_err(err)?).dims)
}

/// Same as [`z2_betti`] for a cover document in JSON text.
#[pyfunction]
fn cover_betti(text: &str) -> PyResult<[usize; 3]> {
    Ok(z2_cohomology(&parse_cover(text).map_err(err)?.cover).dims)
}

/// `∫ c₁` of the charge-`q` monopole on a periodic 2-torus grid.
#[pyfunction]
#[pyo3(signature = (q, sizes=vec![8, 8], lengths=vec![1.0, 1.0]))]
fn monopole_degree(q: i64, sizes: Vec<usize>, lengths: Vec<f64>) -> PyResult<f64> {
    let g = grid(sizes, lengths, None)?;
    let c1 = chern_form(&monopole(&g, q).map_err(err)?, 1).map_err(err)?;
    integrate_form(&c1).map_err(err)
}

/// Selftest results as `(module, name, residual, tol, passed)` tuples; a
/// failed evaluation reports `nan` residual.
#[pyfunction]
#[pyo3(signature = (seed=DEFAULT_SEED))]
fn selftest(seed: u64) -> Vec<(String, String, f64, f64, bool)> {
    run_selftest(seed)
        .into_iter()
        .map(|r| {
            let (res, tol) = r.outcome.as_ref().map_or((f64::NAN, f64::NAN), |m| (m.residual, m.tol));
            (r.module.to_string(), r.name.to_string(), res, tol, r.pass())
        })
        .collect()
}

/// Runs a config file and returns `(report_json, all_passed)`.
#[pyfunction]
#[pyo3(signature = (path, seed=DEFAULT_SEED, tol_scale=1.0))]
fn run_config(path: &str, seed: u64, tol_scale: f64) -> PyResult<(String, bool)> {
    if tol_scale.is_nan() || tol_scale <= 0.0 {
        return Err(err("tol_scale must be positive"));
    }
    let cfg = RunConfig::from_path(std::path::Path::new(path)).map_err(err)?;
    let (report, ok) = build_report(&cfg, seed, tol_scale);
    Ok((report.to_compact(), ok))
}

#[pymodule]
#[pyo3(name = "anholonomic")]
fn anholonomic_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Lagrangian>()?;
    m.add_class::<DMetric>()?;
    m.add_function(wrap_pyfunction!(gamma_matrices, m)?)?;
    m.add_function(wrap_pyfunction!(z2_betti, m)?)?;
    m.add_function(wrap_pyfunction!(cover_betti, m)?)?;
    m.add_function(wrap_pyfunction!(monopole_degree, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    Ok(())
}
