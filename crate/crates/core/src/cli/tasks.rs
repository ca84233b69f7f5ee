//! Task execution. Each task appends result blocks keyed by probe or grid and
//! named checks with residuals and tolerances.

use nalgebra::DMatrix;
use ndarray::{ArrayBase, ArrayViewD, Data, Dimension};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{RunConfig, Source, Synthetic, SyntheticValue};
use super::json::Json;
use crate::cech::{
    cocycle_defect, cocycle_of_chain, spin_obstruction, spin_obstruction_with_flips, z2_cohomology, Cochain,
    CoverDocument, Element,
};
use crate::chern::{
    chern_character, chern_form, curvature_form_from_dconnection, integrate_form, monopole, nconnection_curvature_form,
    CurvatureFormField, FormField, MatForm,
};
use crate::clifford::{
    anticommutator_residual, assemble_dirac, build_gamma, fourier_spectrum, frame_gamma, hermiticity_residual,
    lichnerowicz_residual, symbol_ellipticity_residual, CMatrix, Grid, SpinPlan,
};
use crate::expr::{ChartPoint, Dimensions};
use crate::geometry::{
    anholonomy, canonical_dconnection, d_torsion, distortion_formula, levi_civita, metric_compatibility,
    nconnection_curvature, CurvatureField, DMetric, FrameEval, NConnectionField,
};
use crate::lagrange::{
    almost_complex, almost_complex_compatibility, canonical_nconnection, finsler_check, hessian_metric, semispray,
    LagrangeError, Lagrangian,
};
use crate::oracle;

/// Largest operator size for which a dense spectrum is computed.
pub const DENSE_SPECTRUM_LIMIT: usize = 4096;
/// Number of eigenvalues of smallest modulus listed per spectrum.
pub const LOWEST_EIGENVALUES: usize = 8;
const FINSLER_LAMBDAS: [f64; 3] = [0.5, 2.0, 3.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl Status {
    pub fn tag(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Error => "error",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub location: Json,
    pub residual: f64,
    pub tol: f64,
}

impl Check {
    pub fn pass(&self) -> bool {
        self.residual <= self.tol
    }

    fn to_json(&self) -> Json {
        Json::obj()
            .with("name", self.name.as_str())
            .with("location", self.location.clone())
            .with("residual", self.residual)
            .with("tol", self.tol)
            .with("pass", self.pass())
    }
}

#[derive(Debug, Clone)]
pub struct TaskOutcome {
    pub task: String,
    pub status: Status,
    pub error: Option<String>,
    pub results: Vec<Json>,
    pub checks: Vec<Check>,
}

impl TaskOutcome {
    pub fn to_json(&self) -> Json {
        Json::obj()
            .with("task", self.task.as_str())
            .with("status", self.status.tag())
            .with("error", self.error.clone().map_or(Json::Null, Json::Str))
            .with("results", Json::Arr(self.results.clone()))
            .with("checks", Json::Arr(self.checks.iter().map(Check::to_json).collect()))
    }
}

/// Shared state of one run.
pub struct Runner<'a> {
    cfg: &'a RunConfig,
    tol_scale: f64,
    seed: u64,
}

struct Out<'r, 'a> {
    runner: &'r Runner<'a>,
    results: Vec<Json>,
    checks: Vec<Check>,
}

impl Out<'_, '_> {
    fn check(&mut self, name: &str, location: Json, residual: f64, tol_key: &str) {
        let tol = self.runner.tol(tol_key);
        // NaN residuals fail
        let residual = if residual.is_nan() { f64::INFINITY } else { residual };
        self.checks.push(Check { name: name.to_string(), location, residual, tol });
    }

    /// A count-valued check that passes only at zero.
    fn exact(&mut self, name: &str, location: Json, mismatches: usize) {
        self.checks.push(Check { name: name.to_string(), location, residual: mismatches as f64, tol: 0.0 });
    }
}

type TaskResult = Result<(), String>;

impl<'a> Runner<'a> {
    pub fn new(cfg: &'a RunConfig, tol_scale: f64, seed: u64) -> Self {
        Self { cfg, tol_scale, seed }
    }

    pub fn tol(&self, key: &str) -> f64 {
        self.cfg.tolerance(key) * self.tol_scale
    }

    pub fn run_all(&self) -> Vec<TaskOutcome> {
        self.cfg.tasks.iter().map(|t| self.run(t)).collect()
    }

    pub fn run(&self, task: &str) -> TaskOutcome {
        let mut out = Out { runner: self, results: Vec::new(), checks: Vec::new() };
        let res = self.dispatch(task, &mut out);
        let (status, error) = match res {
            Err(e) => (Status::Error, Some(e)),
            Ok(()) if out.checks.iter().all(Check::pass) => (Status::Pass, None),
            Ok(()) => (Status::Fail, None),
        };
        TaskOutcome { task: task.to_string(), status, error, results: out.results, checks: out.checks }
    }

    fn dispatch(&self, task: &str, out: &mut Out) -> TaskResult {
        match (&self.cfg.source, task) {
            (Source::Lagrangian(l), "hessian") => self.hessian(l, out),
            (Source::Lagrangian(l), "spray") => self.spray(l, out),
            (Source::Lagrangian(l), "nconnection") => self.lagrange_nconnection(l, out),
            (Source::Lagrangian(l), "almost_complex") => self.almost_complex(l, out),
            (Source::Lagrangian(l), "finsler") => self.finsler(l, out),
            (Source::Cover(doc), "cohomology") => {
                self.cohomology(doc, out);
                Ok(())
            }
            (Source::Cover(doc), "spin_obstruction") => self.spin_obstruction(doc, out),
            (Source::Cover(doc), "cocycle") => self.cocycle(doc, out),
            (Source::Synthetic(s), "chern") => self.synthetic_chern(s, out),
            (Source::Metric(_) | Source::Lagrangian(_), _) => {
                let metric = self.metric()?;
                match task {
                    "nconnection" => self.nconnection(metric.nconnection(), out),
                    "anholonomy" => self.anholonomy(metric.nconnection(), out),
                    "dconnection" => self.dconnection(&metric, out),
                    "torsion" => self.torsion(&metric, out),
                    "curvature" => self.curvature(&metric, out),
                    "distortion" => self.distortion(&metric, out),
                    "clifford" => self.clifford(&metric, out),
                    "spin" => self.spin(&metric, out),
                    "dirac" => self.dirac(&metric, out),
                    "lichnerowicz" => self.lichnerowicz(&metric, out),
                    "chern" => self.metric_chern(&metric, out),
                    _ => Err(format!("unknown task {task:?}")),
                }
            }
            _ => Err(format!("task {task:?} is not available for a {} source", self.cfg.source.kind())),
        }
    }

    /// The d-metric behind metric-level tasks; a Lagrangian contributes its Sasaki lift.
    fn metric(&self) -> Result<DMetric, String> {
        match &self.cfg.source {
            Source::Metric(m) => Ok(m.clone()),
            Source::Lagrangian(l) => crate::lagrange::sasaki_lift(l).map_err(|e| e.to_string()),
            _ => Err("no metric source".into()),
        }
    }

    fn probes(&self) -> Result<&[ChartPoint], String> {
        if self.cfg.probes.is_empty() {
            return Err("this task needs at least one probe".into());
        }
        Ok(&self.cfg.probes)
    }

    fn grid(&self, dim: usize) -> Result<&Grid, String> {
        let g = self.cfg.grid.as_ref().ok_or("this task needs a grid")?;
        if g.dim() != dim {
            return Err(format!("grid has dimension {}, the task needs {dim}", g.dim()));
        }
        Ok(g)
    }

    fn hessian(&self, lag: &Lagrangian, out: &mut Out) -> TaskResult {
        let dims = lag.dims();
        for (k, p) in self.probes()?.iter().enumerate() {
            let g = hessian_metric(lag, p).map_err(|e| at_probe(k, e))?;
            // independent: g_ij = ½ ∂²L/∂y^i∂y^j by nested differences
            let f = oracle::expr_fn(lag.expr(), dims);
            let u = p.flat();
            let n = dims.n;
            let mut fd = 0.0f64;
            for i in 0..n {
                for j in 0..n {
                    let dj = |w: &[f64]| oracle::partial(&f, w, n + j, oracle::STEP);
                    let v = 0.5 * oracle::partial(&dj, &u, n + i, oracle::STEP);
                    fd = fd.max((v - g[(i, j)]).abs());
                }
            }
            out.results.push(probe_block(k, p).with("g", &g).with("det", g.determinant()));
            out.check("hessian_symmetric", probe_loc(k), (&g - g.transpose()).abs().max(), "symmetry");
            out.check("hessian_vs_finite_differences", probe_loc(k), fd, "nconnection");
        }
        Ok(())
    }

    fn spray(&self, lag: &Lagrangian, out: &mut Out) -> TaskResult {
        let s = semispray(lag);
        for (k, p) in self.probes()?.iter().enumerate() {
            let g = s.eval(p).map_err(|e| at_probe(k, e))?;
            out.results.push(probe_block(k, p).with("G", g));
        }
        Ok(())
    }

    fn lagrange_nconnection(&self, lag: &Lagrangian, out: &mut Out) -> TaskResult {
        let dims = lag.dims();
        let s = semispray(lag);
        let nc = canonical_nconnection(lag);
        for (k, p) in self.probes()?.iter().enumerate() {
            let n = nc.eval(p).map_err(|e| at_probe(k, e))?;
            // independent: N^i_j = ∂G^i/∂y^j by differences of point values of G
            let u = p.flat();
            let mut worst = 0.0f64;
            for i in 0..dims.n {
                let gi = |w: &[f64]| s.eval(&ChartPoint::from_flat(dims, w)).map(|v| v[i]).unwrap_or(f64::NAN);
                for j in 0..dims.n {
                    let d = oracle::partial(&gi, &u, dims.n + j, oracle::STEP);
                    worst = worst.max((d - n[[j, i]]).abs());
                }
            }
            out.check("nconnection_vs_spray_derivative", probe_loc(k), worst, "nconnection");
        }
        self.nconnection(&nc, out)
    }

    fn nconnection(&self, nc: &NConnectionField, out: &mut Out) -> TaskResult {
        for (k, p) in self.probes()?.iter().enumerate() {
            let n = nc.eval(p).map_err(|e| at_probe(k, e))?;
            let omega = nconnection_curvature(nc, p).map_err(|e| at_probe(k, e))?;
            let mut anti = 0.0f64;
            for ((a, i, j), v) in omega.indexed_iter() {
                anti = anti.max((v + omega[[a, j, i]]).abs());
            }
            out.results.push(probe_block(k, p).with("N_ia", nd(&n)).with("Omega_aij", nd(&omega)));
            out.check("omega_antisymmetric", probe_loc(k), anti, "symmetry");
        }
        Ok(())
    }

    fn anholonomy(&self, nc: &NConnectionField, out: &mut Out) -> TaskResult {
        let dims = nc.dims();
        let t = dims.total();
        for (k, p) in self.probes()?.iter().enumerate() {
            let an = anholonomy(nc, p).map_err(|e| at_probe(k, e))?;
            let w = an.full(dims);
            let frame = FrameEval::at(nc, p).map_err(|e| at_probe(k, e))?;
            let u = p.flat();
            // [e_α, e_β] u^γ = W^δ_αβ E[δ][γ] on the coordinate functions
            let mut worst = 0.0f64;
            for alpha in 0..t {
                for beta in alpha + 1..t {
                    for gamma in 0..t {
                        let coord = move |v: &[f64]| v[gamma];
                        let fd = oracle::frame_commutator(nc, &coord, &u, alpha, beta, oracle::STEP);
                        let exact: f64 = (0..t).map(|d| w[[d, alpha, beta]] * frame.e[(d, gamma)]).sum();
                        worst = worst.max((fd - exact).abs());
                    }
                }
            }
            let mut anti = 0.0f64;
            for ((g, a, b), v) in w.indexed_iter() {
                anti = anti.max((v + w[[g, b, a]]).abs());
            }
            out.results.push(probe_block(k, p).with("W_gab", nd(&w)));
            out.check("frame_commutator_vs_finite_differences", probe_loc(k), worst, "anholonomy");
            out.check("anholonomy_antisymmetric", probe_loc(k), anti, "symmetry");
        }
        Ok(())
    }

    fn dconnection(&self, metric: &DMetric, out: &mut Out) -> TaskResult {
        for (k, p) in self.probes()?.iter().enumerate() {
            let d = canonical_dconnection(metric, p).map_err(|e| at_probe(k, e))?;
            let compat = metric_compatibility(metric, &d, p).map_err(|e| at_probe(k, e))?;
            let tor = d_torsion(metric, &d, p).map_err(|e| at_probe(k, e))?;
            out.results.push(
                probe_block(k, p)
                    .with("L_hh", nd(&d.lhh))
                    .with("L_vv", nd(&d.lvv))
                    .with("C_hh", nd(&d.chh))
                    .with("C_vv", nd(&d.cvv)),
            );
            for (name, r) in ["D_h_g", "D_v_g", "D_h_h", "D_v_h"].iter().zip(compat) {
                out.check(&format!("metric_compatibility_{name}"), probe_loc(k), r, "compatibility");
            }
            out.check("torsion_T_hhh", probe_loc(k), max_abs(&tor.thhh), "torsion");
            out.check("torsion_T_vvv", probe_loc(k), max_abs(&tor.tvvv), "torsion");
        }
        Ok(())
    }

    fn torsion(&self, metric: &DMetric, out: &mut Out) -> TaskResult {
        for (k, p) in self.probes()?.iter().enumerate() {
            let d = canonical_dconnection(metric, p).map_err(|e| at_probe(k, e))?;
            let tor = d_torsion(metric, &d, p).map_err(|e| at_probe(k, e))?;
            out.results.push(
                probe_block(k, p)
                    .with("T_i_jk", nd(&tor.thhh))
                    .with("T_i_ja", nd(&tor.thhv))
                    .with("T_a_ij", nd(&tor.tvhh))
                    .with("T_a_bi", nd(&tor.tvvh))
                    .with("T_a_bc", nd(&tor.tvvv)),
            );
            out.check("torsion_T_hhh", probe_loc(k), max_abs(&tor.thhh), "torsion");
            out.check("torsion_T_vvv", probe_loc(k), max_abs(&tor.tvvv), "torsion");
        }
        Ok(())
    }

    fn curvature(&self, metric: &DMetric, out: &mut Out) -> TaskResult {
        let field = CurvatureField::canonical(metric);
        for (k, p) in self.probes()?.iter().enumerate() {
            let r = field.eval(p).map_err(|e| at_probe(k, e))?;
            let ric = field.ricci(p).map_err(|e| at_probe(k, e))?;
            let full = r.full();
            let mut anti = 0.0f64;
            for ((a, b, c, d), v) in full.indexed_iter() {
                anti = anti.max((v + full[[a, b, d, c]]).abs());
            }
            out.results.push(
                probe_block(k, p)
                    .with("R_i_hjk", nd(&r.r_hhhh))
                    .with("R_a_bjk", nd(&r.r_vvhh))
                    .with("P_i_jka", nd(&r.r_hhhv))
                    .with("P_c_bka", nd(&r.r_vvhv))
                    .with("S_i_jbc", nd(&r.r_hhvv))
                    .with("S_a_bcd", nd(&r.r_vvvv))
                    .with("R_ij", nd(&ric.r_ij))
                    .with("R_ab", nd(&ric.r_ab))
                    .with("scalar_h", ric.scalar_h)
                    .with("scalar_v", ric.scalar_v)
                    .with("scalar", ric.scalar),
            );
            out.check("curvature_antisymmetric", probe_loc(k), anti, "symmetry");
        }
        Ok(())
    }

    fn distortion(&self, metric: &DMetric, out: &mut Out) -> TaskResult {
        for (k, p) in self.probes()?.iter().enumerate() {
            let lc = levi_civita(metric, p).map_err(|e| at_probe(k, e))?;
            let formula = distortion_formula(metric, p).map_err(|e| at_probe(k, e))?;
            let diff = max_abs(&(&lc.distortion - &formula));
            out.results.push(
                probe_block(k, p)
                    .with("distortion_measured", nd(&lc.distortion))
                    .with("distortion_formula", nd(&formula)),
            );
            out.check("distortion_three_block_formula", probe_loc(k), diff, "distortion");
        }
        Ok(())
    }

    fn clifford(&self, metric: &DMetric, out: &mut Out) -> TaskResult {
        let t = metric.dims().total();
        let rep = build_gamma(t).map_err(|e| e.to_string())?;
        let flat_ac = anticommutator_residual(&rep.gammas, &DMatrix::identity(t, t));
        let herm = hermiticity_residual(&rep.gammas);
        out.results.push(
            Json::obj()
                .with("location", "flat")
                .with("dim", t)
                .with("spinor_dim", rep.size)
                .with("anticommutator_residual", flat_ac)
                .with("hermiticity_residual", herm),
        );
        out.check("flat_anticommutator", Json::from("flat"), flat_ac, "clifford");
        out.check("flat_hermiticity", Json::from("flat"), herm, "clifford");
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        for (k, p) in self.probes()?.iter().enumerate() {
            let fg = frame_gamma(&rep, metric, p).map_err(|e| at_probe(k, e))?;
            let res = fg.clifford_residual();
            let mut ell = 0.0f64;
            let mut covectors = Vec::new();
            for _ in 0..3 {
                let kv: Vec<f64> = (0..t).map(|_| rng.random_range(-1.0..1.0)).collect();
                ell = ell.max(symbol_ellipticity_residual(&fg, &kv).map_err(|e| at_probe(k, e))?);
                covectors.push(Json::from(kv));
            }
            out.results.push(
                probe_block(k, p)
                    .with("frame_metric", &fg.frame_metric)
                    .with("vielbein", &fg.vielbein)
                    .with("clifford_residual", res)
                    .with("symbol_covectors", Json::Arr(covectors))
                    .with("symbol_residual", ell),
            );
            out.check("frame_clifford_relation", probe_loc(k), res, "clifford");
            out.check("symbol_ellipticity", probe_loc(k), ell, "ellipticity");
        }
        Ok(())
    }

    fn spin(&self, metric: &DMetric, out: &mut Out) -> TaskResult {
        let plan = SpinPlan::new(metric).map_err(|e| e.to_string())?;
        for (k, p) in self.probes()?.iter().enumerate() {
            let (_, s) = plan.eval(p).map_err(|e| at_probe(k, e))?;
            out.results.push(
                probe_block(k, p)
                    .with("omega_cdmu", nd(&s.omega))
                    .with("rho_norms", s.rho.iter().map(|r| r.norm()).collect::<Vec<f64>>()),
            );
            out.check("rho_anti_hermitian", probe_loc(k), s.anti_hermitian_residual(), "hermiticity");
            out.check("omega_antisymmetric", probe_loc(k), s.omega_antisymmetry(), "hermiticity");
        }
        Ok(())
    }

    fn dirac(&self, metric: &DMetric, out: &mut Out) -> TaskResult {
        let grid = self.grid(metric.dims().total())?;
        let d = assemble_dirac(metric, grid).map_err(|e| e.to_string())?;
        let herm = d.hermiticity_residual();
        let flat_n = constant_flat_n(metric);
        // self-adjoint in the plain l² product only for identity blocks and constant N
        let mut block = grid_block(grid)
            .with("operator_dim", d.dim())
            .with("hermiticity_residual", herm)
            .with("spectrum_of", if flat_n.is_some() { "operator" } else { "hermitian_part" });
        if flat_n.is_some() {
            out.check("dirac_hermitian", Json::from("grid"), herm, "hermiticity");
        }
        if d.dim() <= DENSE_SPECTRUM_LIMIT {
            let spec = d.spectrum();
            let mut lowest = spec.clone();
            lowest.sort_by(|a, b| a.abs().total_cmp(&b.abs()).then(a.total_cmp(b)));
            lowest.truncate(LOWEST_EIGENVALUES);
            block.push("lowest_eigenvalues", lowest);
            if let Some(n_coeffs) = flat_n {
                let exact = fourier_spectrum(grid, metric.dims().n, &n_coeffs);
                let worst = spec.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                block.push("fourier_max_deviation", worst);
                out.check("spectrum_vs_discrete_dispersion", Json::from("grid"), worst, "spectrum");
            }
        } else {
            block.push("lowest_eigenvalues", Json::Null);
        }
        out.results.push(block);
        Ok(())
    }

    fn lichnerowicz(&self, metric: &DMetric, out: &mut Out) -> TaskResult {
        let grid = self.grid(metric.dims().total())?;
        let r = lichnerowicz_residual(metric, grid).map_err(|e| e.to_string())?;
        out.results.push(
            grid_block(grid)
                .with("operator", r.operator)
                .with("probe", r.probe)
                .with("operator_n", r.operator_n)
                .with("probe_n", r.probe_n)
                .with("max_scalar", r.max_scalar)
                .with("max_scalar_n", r.max_scalar_n),
        );
        if constant_flat_n(metric).is_some() {
            out.check("lichnerowicz_flat", Json::from("grid"), r.operator, "lichnerowicz");
        }
        Ok(())
    }

    fn metric_chern(&self, metric: &DMetric, out: &mut Out) -> TaskResult {
        let grid = self.grid(metric.dims().total())?;
        let d = curvature_form_from_dconnection(metric, grid).map_err(|e| e.to_string())?;
        let n = nconnection_curvature_form(metric.nconnection(), grid).map_err(|e| e.to_string())?;
        self.chern_block("dconnection", &d, out)?;
        self.chern_block("nconnection", &n, out)
    }

    fn synthetic_chern(&self, s: &Synthetic, out: &mut Out) -> TaskResult {
        let grid = self.cfg.grid.as_ref().ok_or("this task needs a grid")?;
        let field = match s {
            Synthetic::Monopole(q) => monopole(grid, *q).map_err(|e| e.to_string())?,
            Synthetic::Components { rank, values } => synthetic_field(grid, *rank, values)?,
        };
        self.chern_block("synthetic", &field, out)
    }

    fn chern_block(&self, source: &str, f: &CurvatureFormField, out: &mut Out) -> TaskResult {
        let grid = &f.grid;
        let dim = grid.dim();
        let loc = Json::obj().with("grid", "grid").with("curvature", source);
        let ch = chern_character(f);
        let mut classes = Vec::new();
        let mut c1: Option<FormField> = None;
        for k in 1..=dim / 2 {
            let c = chern_form(f, k).map_err(|e| e.to_string())?;
            let mut entry = Json::obj().with("degree", 2 * k).with("max_abs", c.max_abs());
            out.check(&format!("c{k}_real"), loc.clone(), c.max_imag(), "chern_real");
            if 2 * k == dim {
                entry.push("integral", integrate_form(&c).map_err(|e| e.to_string())?);
            }
            classes.push(entry);
            if k == 1 {
                c1 = Some(c);
            }
        }
        let mut block = grid_block(grid).with("curvature", source).with("rank", f.rank).with("chern_forms", classes);
        if let Some(c1) = c1 {
            out.check("ch_degree_two_equals_c1", loc.clone(), ch.part(2).distance(&c1), "chern_real");
        }
        if dim.is_multiple_of(2) {
            block.push("ch_top_integral", integrate_form(&ch.part(dim)).map_err(|e| e.to_string())?);
        }
        out.results.push(block);
        Ok(())
    }

    fn cohomology(&self, doc: &CoverDocument, out: &mut Out) {
        let r = z2_cohomology(&doc.cover);
        out.results.push(
            Json::obj()
                .with("location", "cover")
                .with("h", r.dims.iter().map(|v| Json::from(*v)).collect::<Vec<_>>())
                .with("ranks", r.ranks.iter().map(|v| Json::from(*v)).collect::<Vec<_>>())
                .with("counts", r.counts.iter().map(|v| Json::from(*v)).collect::<Vec<_>>()),
        );
    }

    fn cochain(doc: &CoverDocument) -> Result<&Cochain, String> {
        doc.cochain.as_ref().ok_or_else(|| "the cover file has no transition values".to_string())
    }

    fn spin_obstruction(&self, doc: &CoverDocument, out: &mut Out) -> TaskResult {
        let q = Self::cochain(doc)?;
        let s = spin_obstruction(&doc.cover, q).map_err(|e| e.to_string())?;
        let mut changed = 0;
        for e in doc.cover.simplices(1) {
            let f = spin_obstruction_with_flips(&doc.cover, q, std::slice::from_ref(e)).map_err(|e| e.to_string())?;
            if f.class != s.class {
                changed += 1;
            }
        }
        out.results.push(
            Json::obj()
                .with("location", "cover")
                .with("w2", cochain_json(&s.cocycle))
                .with("class", s.class.iter().map(|b| Json::from(*b as usize)).collect::<Vec<_>>())
                .with("spin_exists", s.spin_exists)
                .with("witness", s.witness.as_ref().map_or(Json::Null, cochain_json)),
        );
        out.exact("class_invariant_under_lift_flips", Json::from("cover"), changed);
        Ok(())
    }

    fn cocycle(&self, doc: &CoverDocument, out: &mut Out) -> TaskResult {
        let q = Self::cochain(doc)?;
        let c = cocycle_of_chain(&doc.cover, q).map_err(|e| e.to_string())?;
        let defect = cocycle_defect(&doc.cover, q, &c).map_err(|e| e.to_string())?;
        out.results.push(
            Json::obj()
                .with("location", "cover")
                .with("group", q.group.tag())
                .with("triple_products", cochain_json(&c))
                .with("max_deviation", c.max_deviation())
                .with("cocycle_defect", defect),
        );
        out.check("transition_cocycle", Json::from("cover"), c.max_deviation(), "cocycle");
        out.check("two_cocycle_identity", Json::from("cover"), defect, "cocycle");
        Ok(())
    }
}

fn at_probe(k: usize, e: impl std::fmt::Display) -> String {
    format!("probe {k}: {e}")
}

impl From<LagrangeError> for Json {
    fn from(e: LagrangeError) -> Self {
        Json::Str(e.to_string())
    }
}

pub(crate) fn point_json(p: &ChartPoint) -> Json {
    Json::obj().with("x", p.x.clone()).with("y", p.y.clone())
}

fn probe_block(k: usize, p: &ChartPoint) -> Json {
    Json::obj().with("probe", k).with("at", point_json(p))
}

fn probe_loc(k: usize) -> Json {
    Json::obj().with("probe", k)
}

pub(crate) fn grid_json(g: &Grid) -> Json {
    Json::obj()
        .with("sizes", g.sizes.iter().map(|v| Json::from(*v)).collect::<Vec<_>>())
        .with("lengths", g.lengths.clone())
        .with("origin", g.origin.clone())
}

fn grid_block(g: &Grid) -> Json {
    Json::obj().with("location", "grid").with("grid", grid_json(g))
}

/// Nested arrays for an n-dimensional array.
pub(crate) fn nd<S: Data<Elem = f64>, D: Dimension>(a: &ArrayBase<S, D>) -> Json {
    fn rec(v: ArrayViewD<f64>) -> Json {
        if v.ndim() == 0 {
            Json::Num(*v.first().expect("zero-dimensional view holds one value"))
        } else {
            Json::Arr(v.outer_iter().map(rec).collect())
        }
    }
    rec(a.view().into_dyn())
}

fn max_abs<S: Data<Elem = f64>, D: Dimension>(a: &ArrayBase<S, D>) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// `N^a_i` when the blocks are the identity and `N` is constant.
fn constant_flat_n(metric: &DMetric) -> Option<DMatrix<f64>> {
    let identity = |m: &ndarray::Array2<crate::expr::Expr>| {
        m.indexed_iter().all(|((r, c), e)| e.as_const() == Some(if r == c { 1.0 } else { 0.0 }))
    };
    if !identity(metric.g()) || !identity(metric.h()) {
        return None;
    }
    let Dimensions { n, m } = metric.dims();
    let coeffs = metric.nconnection().coeffs();
    let mut out = DMatrix::zeros(n, m);
    for i in 0..n {
        for a in 0..m {
            out[(i, a)] = coeffs[[i, a]].as_const()?;
        }
    }
    Some(out)
}

fn element_json(e: &Element) -> Json {
    match e {
        Element::Sign(s) => Json::Int(i64::from(*s)),
        Element::Mod(v) => Json::Int(i64::from(*v)),
        Element::Matrix(m) => Json::from(m),
        Element::Quat(q) => Json::from(vec![q.w, q.i, q.j, q.k]),
    }
}

/// One-based keys, as in cover files.
fn cochain_json(c: &Cochain) -> Json {
    Json::Obj(
        c.values
            .iter()
            .map(|(s, e)| {
                let key = s.iter().map(|v| (v + 1).to_string()).collect::<Vec<_>>().join(",");
                (key, element_json(e))
            })
            .collect(),
    )
}

fn to_complex(m: &[Vec<[f64; 2]>], rank: usize) -> Result<CMatrix, String> {
    if m.len() != rank || m.iter().any(|r| r.len() != rank) {
        return Err(format!("synthetic component must be {rank}x{rank}"));
    }
    Ok(CMatrix::from_fn(rank, rank, |r, c| Complex64::new(m[r][c][0], m[r][c][1])))
}

fn synthetic_field(
    grid: &Grid,
    rank: usize,
    values: &std::collections::BTreeMap<(usize, usize), SyntheticValue>,
) -> Result<CurvatureFormField, String> {
    let dim = grid.dim();
    if let Some((mu, nu)) = values.keys().find(|(_, nu)| *nu >= dim) {
        return Err(format!("component {},{} outside a grid of dimension {dim}", mu + 1, nu + 1));
    }
    let volume = grid.volume();
    let mut per_node: Vec<Vec<((usize, usize), CMatrix)>> = vec![Vec::new(); volume];
    for (key, v) in values {
        match v {
            SyntheticValue::Constant(m) => {
                let c = to_complex(m, rank)?;
                for node in per_node.iter_mut() {
                    node.push((*key, c.clone()));
                }
            }
            SyntheticValue::PerNode(ms) => {
                if ms.len() != volume {
                    return Err(format!("component {},{} needs {volume} node values", key.0 + 1, key.1 + 1));
                }
                for (node, m) in per_node.iter_mut().zip(ms) {
                    node.push((*key, to_complex(m, rank)?));
                }
            }
        }
    }
    let nodes = per_node
        .iter()
        .map(|comps| {
            MatForm::two_form(dim, rank, |mu, nu| {
                comps
                    .iter()
                    .find(|(k, _)| *k == (mu, nu))
                    .map_or_else(|| CMatrix::zeros(rank, rank), |(_, m)| m.clone())
            })
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    Ok(CurvatureFormField { grid: grid.clone(), rank, nodes })
}

impl Runner<'_> {
    fn almost_complex(&self, lag: &Lagrangian, out: &mut Out) -> TaskResult {
        for (k, p) in self.probes()?.iter().enumerate() {
            let f = almost_complex(lag, p).map_err(|e| at_probe(k, e))?;
            let t = f.coordinate.nrows();
            let sq = (&f.coordinate * &f.coordinate + DMatrix::<f64>::identity(t, t)).abs().max();
            let compat = almost_complex_compatibility(lag, p).map_err(|e| at_probe(k, e))?;
            out.results.push(probe_block(k, p).with("F", &f.coordinate));
            out.check("F_squared_is_minus_identity", probe_loc(k), sq, "almost_complex");
            out.check("F_preserves_sasaki_metric", probe_loc(k), compat, "almost_complex");
        }
        Ok(())
    }

    fn finsler(&self, lag: &Lagrangian, out: &mut Out) -> TaskResult {
        for (k, p) in self.probes()?.iter().enumerate() {
            let block = probe_block(k, p);
            let block = match finsler_check(lag, p, &FINSLER_LAMBDAS) {
                Ok(r) => block
                    .with("testable", true)
                    .with("is_finsler", r.is_finsler)
                    .with("max_deviation", r.max_deviation)
                    .with("lambdas", r.lambdas),
                Err(e @ (LagrangeError::NullSection | LagrangeError::NotTestable { .. })) => {
                    block.with("testable", false).with("reason", e)
                }
                Err(e) => return Err(at_probe(k, e)),
            };
            out.results.push(block);
        }
        Ok(())
    }
}
