//! Embedded invariant corpus. Every check is deterministic for a given seed
//! and reports a residual against a fixed tolerance.

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_PI_4, PI};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::RunConfig;
use super::json::{format_float, Json};
use crate::cech::{
    angle_chain, circle_cover, coboundary_matrix, cocycle_defect, cocycle_of_chain, disk_cover, glue_sections, h1_pair,
    klein_chain, sections_from_seed, sphere4, spin_obstruction, spin_obstruction_with_flips, torus7, z2_cohomology,
    Cochain, Cover, Element, Group,
};
use crate::chern::{
    chern_character, chern_form, integrate_form, monopole, nconnection_curvature_form, CurvatureFormField, MatForm,
};
use crate::clifford::{
    anticommutator_residual, assemble_dirac, build_gamma, fourier_spectrum, frame_gamma, hermiticity_residual,
    lichnerowicz_residual, symbol_ellipticity_residual, CMatrix, Grid, SpinPlan,
};
use crate::expr::{parse, ChartPoint, Dimensions, Var};
use crate::fuzz;
use crate::geometry::{
    anholonomy, canonical_dconnection, d_torsion, levi_civita, metric_compatibility, nconnection_curvature,
    CurvatureField, DMetric, FrameEval, NConnectionField,
};
use crate::lagrange::{
    almost_complex, almost_complex_compatibility, canonical_nconnection, euler_lagrange_residual, finsler_check,
    geodesic_integrate, hessian_metric, semispray, Lagrangian,
};
use crate::oracle;

/// Default fuzz seed.
pub const DEFAULT_SEED: u64 = 20_240_917;

/// Residual of one check against its tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measure {
    pub residual: f64,
    pub tol: f64,
}

fn within(residual: f64, tol: f64) -> Result<Measure, String> {
    Ok(Measure { residual, tol })
}

/// A boolean property as a count of violations.
fn holds(ok: bool) -> Result<Measure, String> {
    within(if ok { 0.0 } else { 1.0 }, 0.0)
}

type CheckFn = fn(&mut ChaCha8Rng) -> Result<Measure, String>;

pub struct SelfCheck {
    pub module: &'static str,
    pub name: &'static str,
    run: CheckFn,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfCheckResult {
    pub module: &'static str,
    pub name: &'static str,
    pub outcome: Result<Measure, String>,
}

impl SelfCheckResult {
    pub fn pass(&self) -> bool {
        matches!(self.outcome, Ok(m) if m.residual <= m.tol)
    }
}

fn e(x: impl std::fmt::Display) -> String {
    x.to_string()
}

fn strings(rows: &[&[&str]]) -> Vec<Vec<String>> {
    rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect()
}

fn sphere_lagrangian() -> Lagrangian {
    Lagrangian::parse("y1^2 + sin(x1)^2*y2^2", 2).expect("valid sphere Lagrangian")
}

fn sphere_product() -> DMetric {
    DMetric::from_strings(
        Dimensions::new(2, 2).expect("dims"),
        &strings(&[&["1", "0"], &["0", "sin(x1)^2"]]),
        &strings(&[&["1", "0"], &["0", "sin(y1)^2"]]),
        &[],
    )
    .expect("valid product metric")
}

fn fuzzed(rng: &mut ChaCha8Rng) -> (DMetric, ChartPoint) {
    let dims = fuzz::dims(rng, 3);
    let m = fuzz::dmetric(rng, dims).build();
    let p = fuzz::point(rng, dims);
    (m, p)
}

const FUZZ_CASES: usize = 6;

fn max_over<F: FnMut(&mut ChaCha8Rng) -> Result<f64, String>>(rng: &mut ChaCha8Rng, mut f: F) -> Result<f64, String> {
    let mut worst = 0.0f64;
    for _ in 0..FUZZ_CASES {
        worst = worst.max(f(rng)?);
    }
    Ok(worst)
}

fn fmax(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, |a, b| a.max(b.abs()))
}

// expr

fn expr_eval_closed_form(_: &mut ChaCha8Rng) -> Result<Measure, String> {
    let dims = Dimensions::new(2, 1).map_err(e)?;
    let f = parse("sin(x1)*y1^2 + exp(x2)/2 - ln(1 + x1^2)", dims).map_err(e)?;
    let p = ChartPoint::new(vec![0.3, -0.2], vec![1.5]);
    let exact = 0.3f64.sin() * 2.25 + (-0.2f64).exp() / 2.0 - (1.09f64).ln();
    within((f.eval(&p).map_err(e)? - exact).abs(), 1e-15)
}

fn expr_derivative_vs_differences(rng: &mut ChaCha8Rng) -> Result<Measure, String> {
    let dims = Dimensions::new(2, 2).map_err(e)?;
    let f = parse("sin(x1*y2)*exp(0.3*y1) + sqrt(2 + x2^2)*cos(y1 - x1) + (1 + y2^2)^1.5", dims).map_err(e)?;
    let worst = max_over(rng, |rng| {
        let p = fuzz::point(rng, dims);
        let g = oracle::expr_fn(&f, dims);
        let mut w = 0.0f64;
        for (mu, v) in dims.vars().enumerate() {
            let d = f.diff(v).eval(&p).map_err(e)?;
            w = w.max((d - oracle::partial(&g, &p.flat(), mu, oracle::STEP)).abs());
        }
        Ok(w)
    })?;
    within(worst, 1e-10)
}

fn expr_domain_error(_: &mut ChaCha8Rng) -> Result<Measure, String> {
    let dims = Dimensions::new(1, 1).map_err(e)?;
    let f = parse("ln(x1)", dims).map_err(e)?;
    holds(f.eval(&ChartPoint::new(vec![-1.0], vec![0.0])).is_err())
}

fn expr_dimension_check(_: &mut ChaCha8Rng) -> Result<Measure, String> {
    let dims = Dimensions::new(2, 1).map_err(e)?;
    holds(parse("x3 + y1", dims).is_err() && parse("y2", dims).is_err() && parse("x2*y1", dims).is_ok())
}

fn expr_second_derivative_symmetry(rng: &mut ChaCha8Rng) -> Result<Measure, String> {
    let dims = Dimensions::new(2, 1).map_err(e)?;
    let f = parse("exp(x1*y1)*sin(x2) + x1^3*y1", dims).map_err(e)?;
    let p = fuzz::point(rng, dims);
    let a = f.diff(Var::X(0)).diff(Var::Y(0)).eval(&p).map_err(e)?;
    let b = f.diff(Var::Y(0)).diff(Var::X(0)).eval(&p).map_err(e)?;
    within((a - b).abs(), 1e-13)
}

// geometry

fn torsion_hhh(rng: &mut ChaCha8Rng) -> Result<Measure, String> {
    let w = max_over(rng, |rng| {
        let (m, p) = fuzzed(rng);
        let d = canonical_dconnection(&m, &p).map_err(e)?;
        Ok(fmax(d_torsion(&m, &d, &p).map_err(e)?.thhh.iter().copied()))
    })?;
    within(w, 1e-10)
}

fn torsion_vvv(rng: &mut ChaCha8Rng) -> Result<Measure, String> {
    let w = max_over(rng, |rng| {
        let (m, p) = fuzzed(rng);
        let d = canonical_dconnection(&m, &p).map_err(e)?;
        Ok(fmax(d_torsion(&m, &d, &p).map_err(e)?.tvvv.iter().copied()))
    })?;
    within(w, 1e-10)
}

fn compatibility(rng: &mut ChaCha8Rng, block: usize) -> Result<Measure, String> {
    let w = max_over(rng, |rng| {
        let (m, p) = fuzzed(rng);
        let d = canonical_dconnection(&m, &p).map_err(e)?;
        Ok(metric_compatibility(&m, &d, &p).map_err(e)?[block])
    })?;
    within(w, 1e-8)
}

fn compat_hg(rng: &mut ChaCha8Rng) -> Result<Measure, String> {
    compatibility(rng, 0)
}

fn compat_vg(rng: &mut ChaCha8Rng) -> Result<Measure, String> {
    compatibility(rng, 1)
}

fn compat_hh(rng: &mut ChaCha8Rng) -> Result<Measure, String> {
    compatibility(rng, 2)
}

fn compat_vh(rng: &mut ChaCha8Rng) -> Result<Measure, String> {
    compatibility(rng, 3)
}

fn omega_antisymmetry(rng: &mut ChaCha8Rng) -> Result<Measure, String> {
    let w = max_over(rng, |rng| {
        let dims = fuzz::dims(rng, 3);
        let nc = NConnectionField::from_strings(dims, &fuzz::nconnection_rows(rng, dims)).map_err(e)?;
        let o = nconnection_curvature(&nc, &fuzz::point(rng, dims)).map_err(e)?;
        Ok(fmax(o.indexed_iter().map(|((a, i, j), v)| v + o[[a, j, i]])))
    })?;
    within(w, 0.0)
}

fn anholonomy_vs_commutators(rng: &mut ChaCha8Rng) -> Result<Measure, String> {
    let w = max_over(rng, |rng| {
        let dims = fuzz::dims(rng, 2);
        let t = dims.total();
        let nc = NConnectionField::from_strings(dims, &fuzz::nconnection_rows(rng, dims)).map_err(e)?;
        let p = fuzz::point(rng, dims);
        let w = anholonomy(&nc, &p).map_err(e)?.full(dims);
        let frame = FrameEval::at(&nc, &p).map_err(e)?;
        let u = p.flat();
        let mut worst = 0.0f64;
        for a in 0..t {
            for b in a + 1..t {
                for g in 0..t {
                    let coord = move |v: &[f64]| v[g];
                    let fd = oracle::frame_commutator(&nc, &coord, &u, a, b, oracle::STEP);
                    let exact: f64 = (0..t).map(|d| w[[d, a, b]] * frame.e[(d, g)]).sum();
                    worst = worst.max((fd - exact).abs());
                }
            }
        }
        Ok(worst)
    })?;
    within(w, 1e-6)
}

fn frame_block_diagonalizes(rng: &mut ChaCha8Rng) -> Result<Measure, String> {
    let w = max_over(rng, |rng| {
        let (m, p) = fuzzed(rng);
        let coord = crate::geometry::assemble_offdiagonal(&m, &p).map_err(e)?;
        let frame = FrameEval::at(m.nconnection(), &p).map_err(e)?;
        let mut blocks = m.eval(&p).map_err(e)?;
        blocks.n.fill(0.0);
        let diag = crate::geometry::assemble_from_blocks(&blocks);
        Ok((frame.block_diagonalize(&coord) - diag).abs().max())
    })?;
    within(w, 1e-12)
}

fn curvature_antisymmetry(rng: &mut ChaCha8Rng) -> Result<Measure, String> {
    let w = max_over(rng, |rng| {
        let (m, p) = fuzzed(rng);
        let full = CurvatureField::canonical(&m).eval(&p).map_err(e)?.full();
        Ok(fmax(full.indexed_iter().map(|((a, b, c, d), v)| v + full[[a, b, d, c]])))
    })?;
    within(w, 1e-12)
}

fn sphere_scalar_curvature(_: &mut ChaCha8Rng) -> Result<Measure, String> {
    let ric = CurvatureField::canonical(&sphere_product())
        .ricci(&ChartPoint::new(vec![0.8, 0.1], vec![1.1, -0.3]))
        .map_err(e)?;
    within((ric.scalar_h - 2.0).abs().max((ric.scalar_v - 2.0).abs()), 1e-6)
}

fn product_blocks_vs_riemann_oracle(rng: &mut ChaCha8Rng) -> Result<Measure, String> {
    let m = sphere_product();
    let p = fuzz::point(rng, m.dims());
    let p = ChartPoint::new(p.x.iter().map(|v| v + 1.5).collect(), p.y.iter().map(|v| v + 1.5).collect());
    let r = CurvatureField::canonical(&m).eval(&p).map_err(e)?;
    let sphere = |u: &[f64]| DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, u[0].sin().powi(2)]);
    let rg = oracle::riemann(&sphere, &p.x, oracle::STEP);
    let rh = oracle::riemann(&sphere, &p.y, oracle::STEP);
    let mut worst = 0.0f64;
    for ((a, b, c, d), v) in r.r_hhhh.indexed_iter() {
        worst = worst.max((v - rg[[a, b, d, c]]).abs());
    }
    for ((a, b, c, d), v) in r.r_vvvv.indexed_iter() {
        worst = worst.max((v - rh[[a, b, d, c]]).abs());
    }
    worst = worst.max(fmax(r.r_vvhh.iter().chain(&r.r_hhhv).chain(&r.r_vvhv).chain(&r.r_hhvv).copied()));
    within(worst, 1e-8)
}

fn flat_distortion_zero(rng: &mut ChaCha8Rng) -> Result<Measure, String> {
    let dims = fuzz::dims(rng, 3);
    let lc = levi_civita(&DMetric::flat(dims), &fuzz::point(rng, dims)).map_err(e)?;
    within(fmax(lc.distortion.iter().copied()), 0.0)
}

// lagrange

fn sphere_hessian_spot(_: &mut ChaCha8Rng) -> Result<Measure, String> {
    let g = hessian_metric(&sphere_lagrangian(), &ChartPoint::new(vec![FRAC_PI_4, 0.0], vec![0.3, 0.1])).map_err(e)?;
    within((g[(1, 1)] - 0.5).abs(), 1e-14)
}

fn sphere_nconnection_spot(_: &mut ChaCha8Rng) -> Result<Measure, String> {
    let n = canonical_nconnection(&sphere_lagrangian())
        .eval(&ChartPoint::new(vec![FRAC_PI_4, 0.0], vec![0.0, 1.0]))
        .map_err(e)?;
    // N^1_2 at [[base 2, fiber 1]]
    within((n[[1, 0]] + 0.5).abs(), 1e-14)
}

fn nconnection_vs_christoffel_oracle(rng: &mut ChaCha8Rng) -> Result<Measure, String> {
    let w = max_over(rng, |rng| {
        let n = rng.random_range(1..=3);
        let q = fuzz::quadratic_lagrangian(rng, n);
        let dims = Dimensions::new(n, n).map_err(e)?;
        let entries: Vec<Vec<crate::expr::Expr>> = q
            .metric
            .iter()
            .map(|r| r.iter().map(|s| parse(s, dims)).collect::<Result<_, _>>())
            .collect::<Result<_, _>>()
            .map_err(e)?;
        let metric = |x: &[f64]| {
            let p = ChartPoint::new(x.to_vec(), vec![0.0; n]);
            DMatrix::from_fn(n, n, |r, c| entries[r][c].eval(&p).expect("metric evaluable"))
        };
        let p = fuzz::point(rng, dims);
        let gamma = oracle::christoffel(&metric, &p.x, oracle::STEP);
        let nv = canonical_nconnection(&q.build()).eval(&p).map_err(e)?;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let exact: f64 = (0..n).map(|k| gamma[[i, j, k]] * p.y[k]).sum();
                worst = worst.max((nv[[j, i]] - exact).abs());
            }
        }
        Ok(worst)
    })?;
    within(w, 1e-8)
}

fn geodesics_solve_euler_lagrange(_: &mut ChaCha8Rng) -> Result<Measure, String> {
    let lag = sphere_lagrangian();
    let t = geodesic_integrate(&semispray(&lag), &[1.0, 0.0], &[0.3, 0.8], 2.0, 2000).map_err(e)?;
    within(euler_lagrange_residual(&lag, &t).map_err(e)?, 1e-5)
}

fn almost_complex_square(rng: &mut ChaCha8Rng) -> Result<Measure, String> {
    let w = max_over(rng, |rng| {
        let q = fuzz::quadratic_lagrangian(rng, 2);
        let lag = q.build();
        let f = almost_complex(&lag, &fuzz::point(rng, lag.dims())).map_err(e)?;
        Ok((&f.coordinate * &f.coordinate + DMatrix::<f64>::identity(4, 4)).abs().max())
    })?;
    within(w, 1e-10)
}

fn almost_complex_compatible(rng: &mut ChaCha8Rng) -> Result<Measure, String> {
    let w = max_over(rng, |rng| {
        let lag = fuzz::quadratic_lagrangian(rng, 2).build();
        almost_complex_compatibility(&lag, &fuzz::point(rng, lag.dims())).map_err(e)
    })?;
    within(w, 1e-10)
}

fn finsler_verdicts(_: &mut ChaCha8Rng) -> Result<Measure, String> {
    let p = ChartPoint::new(vec![0.5, 0.1], vec![0.7, -0.4]);
    let check = |t: &str| finsler_check(&Lagrangian::parse(t, 2).map_err(e)?, &p, &[0.5, 2.0, 3.0]).map_err(e);
    holds(check("y1^2 + y2^2")?.is_finsler && !check("y1^2 + y2^2 + x1*y1")?.is_finsler)
}

// clifford

fn flat_gamma_relations(_: &mut ChaCha8Rng) -> Result<Measure, String> {
    let mut worst = 0.0f64;
    for d in 1..=8 {
        let rep = build_gamma(d).map_err(e)?;
        worst = worst.max(anticommutator_residual(&rep.gammas, &DMatrix::identity(d, d)));
        worst = worst.max(hermiticity_residual(&rep.gammas));
    }
    within(worst, 1e-13)
}

fn frame_gamma_relations(rng: &mut ChaCha8Rng) -> Result<Measure, String> {
    let w = max_over(rng, |rng| {
        let (m, p) = fuzzed(rng);
        let rep = build_gamma(m.dims().total()).map_err(e)?;
        Ok(frame_gamma(&rep, &m, &p).map_err(e)?.clifford_residual())
    })?;
    within(w, 1e-13)
}

fn symbol_ellipticity(rng: &mut ChaCha8Rng) -> Result<Measure, String> {
    let w = max_over(rng, |rng| {
        let (m, p) = fuzzed(rng);
        let t = m.dims().total();
        let rep = build_gamma(t).map_err(e)?;
        let fg = frame_gamma(&rep, &m, &p).map_err(e)?;
        let k: Vec<f64> = (0..t).map(|_| rng.random_range(-1.0..1.0)).collect();
        symbol_ellipticity_residual(&fg, &k).map_err(e)
    })?;
    within(w, 1e-12)
}

fn spin_connection_anti_hermitian(rng: &mut ChaCha8Rng) -> Result<Measure, String> {
    let w = max_over(rng, |rng| {
        let (m, p) = fuzzed(rng);
        let (_, s) = SpinPlan::new(&m).map_err(e)?.eval(&p).map_err(e)?;
        Ok(s.anti_hermitian_residual().max(s.omega_antisymmetry()))
    })?;
    within(w, 1e-12)
}

fn flat_torus_dispersion(_: &mut ChaCha8Rng) -> Result<Measure, String> {
    let grid = Grid::periodic(vec![8, 8], vec![2.0 * PI, 3.0]).map_err(e)?;
    let m = DMetric::flat(Dimensions::base_only(2).map_err(e)?);
    let spec = assemble_dirac(&m, &grid).map_err(e)?.spectrum();
    let exact = fourier_spectrum(&grid, 2, &DMatrix::zeros(2, 0));
    within(fmax(spec.iter().zip(&exact).map(|(a, b)| a - b)), 1e-9)
}

fn constant_n_dispersion(_: &mut ChaCha8Rng) -> Result<Measure, String> {
    let dims = Dimensions::new(1, 1).map_err(e)?;
    let nc = NConnectionField::from_strings(dims, &strings(&[&["0.4"]])).map_err(e)?;
    let m = DMetric::euclidean_blocks(nc);
    let grid = Grid::periodic(vec![6, 8], vec![3.0, 4.0]).map_err(e)?;
    let spec = assemble_dirac(&m, &grid).map_err(e)?.spectrum();
    let exact = fourier_spectrum(&grid, 1, &DMatrix::from_element(1, 1, 0.4));
    within(fmax(spec.iter().zip(&exact).map(|(a, b)| a - b)), 1e-9)
}

fn lichnerowicz_flat(_: &mut ChaCha8Rng) -> Result<Measure, String> {
    let grid = Grid::periodic(vec![6, 6], vec![1.0, 2.0]).map_err(e)?;
    let r = lichnerowicz_residual(&DMetric::flat(Dimensions::new(1, 1).map_err(e)?), &grid).map_err(e)?;
    within(r.operator.max(r.probe), 1e-10)
}

fn dirac_hermitian_on_constant_n(_: &mut ChaCha8Rng) -> Result<Measure, String> {
    let dims = Dimensions::new(2, 1).map_err(e)?;
    let nc = NConnectionField::from_strings(dims, &strings(&[&["0.3"], &["-0.7"]])).map_err(e)?;
    let grid = Grid::periodic(vec![4, 4, 4], vec![1.0, 1.5, 2.0]).map_err(e)?;
    within(assemble_dirac(&DMetric::euclidean_blocks(nc), &grid).map_err(e)?.hermiticity_residual(), 1e-12)
}

// cech

fn cohomology_of(cover: &Cover, expected: [usize; 3]) -> Result<Measure, String> {
    holds(z2_cohomology(cover).dims == expected)
}

fn circle_cohomology(_: &mut ChaCha8Rng) -> Result<Measure, String> {
    cohomology_of(&circle_cover(3), [1, 1, 0])
}

fn torus_cohomology(_: &mut ChaCha8Rng) -> Result<Measure, String> {
    cohomology_of(&torus7(), [1, 2, 1])
}

fn sphere_cohomology(_: &mut ChaCha8Rng) -> Result<Measure, String> {
    cohomology_of(&sphere4(), [1, 0, 1])
}

fn disk_cohomology(_: &mut ChaCha8Rng) -> Result<Measure, String> {
    let d = disk_cover(5);
    cohomology_of(&d.disjoint_union(&d), [2, 0, 0])
}

fn coboundary_squares_to_zero(_: &mut ChaCha8Rng) -> Result<Measure, String> {
    let covers = [circle_cover(3), circle_cover(5), torus7(), sphere4(), disk_cover(4)];
    let mut bad = 0;
    for c in &covers {
        for k in 0..2 {
            if !coboundary_matrix(c, k + 1).mul(&coboundary_matrix(c, k)).is_zero() {
                bad += 1;
            }
        }
    }
    within(bad as f64, 0.0)
}

fn obstruction_invariant_under_flips(_: &mut ChaCha8Rng) -> Result<Measure, String> {
    let cover = torus7();
    let (a, b) = h1_pair(&cover).ok_or("torus has no H1 pair")?;
    let q = klein_chain(&cover, &a, &b).map_err(e)?;
    let s = spin_obstruction(&cover, &q).map_err(e)?;
    let mut changed = usize::from(s.spin_exists);
    for edge in cover.simplices(1) {
        let f = spin_obstruction_with_flips(&cover, &q, std::slice::from_ref(edge)).map_err(e)?;
        changed += usize::from(f.class != s.class);
    }
    let all = spin_obstruction_with_flips(&cover, &q, cover.simplices(1)).map_err(e)?;
    changed += usize::from(all.class != s.class);
    within(changed as f64, 0.0)
}

fn disk_obstruction_has_witness(_: &mut ChaCha8Rng) -> Result<Measure, String> {
    let cover = disk_cover(4);
    let q = angle_chain(&cover, &[0.0, 1.7, -1.7, -0.5, 0.5]).map_err(e)?;
    let s = spin_obstruction(&cover, &q).map_err(e)?;
    let minus = s.cocycle.values.values().filter(|v| **v == Element::Sign(-1)).count();
    let witness = s.witness.ok_or("no witness on a disk")?;
    let d1 = coboundary_matrix(&cover, 1);
    let ok = minus == 1 && d1.mul_vec(&witness.to_bits(&cover).map_err(e)?) == s.cocycle.to_bits(&cover).map_err(e)?;
    holds(ok)
}

fn glue_detects_fault(_: &mut ChaCha8Rng) -> Result<Measure, String> {
    let cover = circle_cover(3);
    let samples: Vec<BTreeSet<usize>> = (0..3).map(|a| (0..3).map(|j| (2 * a + j) % 6).collect()).collect();
    let g = [0.0, 0.7, -1.1];
    let values = cover
        .simplices(1)
        .iter()
        .map(|s| (s.clone(), Element::Matrix(crate::cech::z_rotation(g[s[0]] - g[s[1]]))))
        .collect();
    let q = Cochain::new(&cover, 1, Group::Orthogonal(3), values).map_err(e)?;
    let seed = |s: usize| DVector::from_vec(vec![(s as f64).cos(), 0.5, (s as f64).sin()]);
    let mut z = sections_from_seed(&cover, &q, &samples, seed).map_err(e)?;
    let clean = glue_sections(&cover, &q, &z, None).map_err(e)?;
    let clean_dev = clean.map_err(|i| format!("clean data rejected at {:?}", i.overlap))?.max_deviation;
    z.values[2].get_mut(&0).ok_or("sample 0 missing")?[2] += 1e-3;
    let bad = glue_sections(&cover, &q, &z, None).map_err(e)?;
    match bad {
        Err(i) if i.overlap == [0, 2] => within(clean_dev.max((i.deviation - 1e-3).abs()), 1e-9),
        _ => holds(false),
    }
}

fn nonabelian_cocycle_identity(rng: &mut ChaCha8Rng) -> Result<Measure, String> {
    // q_αβ = g_α g_β⁻¹ for random rotations g_α
    let cover = Cover::from_facets(4, &[vec![0, 1, 2, 3]]).map_err(e)?;
    let rot = |rng: &mut ChaCha8Rng| {
        let axis = nalgebra::Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 1.0);
        let r = nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), rng.random_range(0.0..3.0));
        DMatrix::from_iterator(3, 3, r.matrix().iter().copied())
    };
    let gs: Vec<DMatrix<f64>> = (0..4).map(|_| rot(rng)).collect();
    let values =
        cover.simplices(1).iter().map(|s| (s.clone(), Element::Matrix(&gs[s[0]] * gs[s[1]].transpose()))).collect();
    let q = Cochain::new(&cover, 1, Group::Orthogonal(3), values).map_err(e)?;
    let c = cocycle_of_chain(&cover, &q).map_err(e)?;
    within(c.max_deviation().max(cocycle_defect(&cover, &q, &c).map_err(e)?), 1e-12)
}

// chern

fn monopole_degrees(_: &mut ChaCha8Rng) -> Result<Measure, String> {
    let grid = Grid::periodic(vec![6, 5], vec![2.0, 3.0]).map_err(e)?;
    let mut worst = 0.0f64;
    for q in 1..=3 {
        let c1 = chern_form(&monopole(&grid, q).map_err(e)?, 1).map_err(e)?;
        worst = worst.max((integrate_form(&c1).map_err(e)? - q as f64).abs());
    }
    within(worst, 1e-9)
}

fn trace_free_c1_vanishes(rng: &mut ChaCha8Rng) -> Result<Measure, String> {
    let grid = Grid::periodic(vec![4, 4, 4, 4], vec![1.0; 4]).map_err(e)?;
    let a: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
    let f = CurvatureFormField::from_fn(&grid, 2, |u| {
        MatForm::two_form(4, 2, |mu, nu| {
            let s = a[mu + nu] * (u[mu] + 2.0 * u[nu]).sin();
            let b = Complex64::new(0.0, a[mu] * u[nu].cos());
            CMatrix::from_row_slice(2, 2, &[Complex64::new(s, 0.0), b, -b.conj(), Complex64::new(-s, 0.0)])
        })
    })
    .map_err(e)?;
    within(chern_form(&f, 1).map_err(e)?.max_abs(), 1e-14)
}

fn character_degree_two_is_c1(rng: &mut ChaCha8Rng) -> Result<Measure, String> {
    let dims = fuzz::dims(rng, 2);
    let m = fuzz::dmetric(rng, dims).build();
    let t = dims.total();
    let grid = Grid::new(vec![4; t], vec![1.0; t], vec![-0.5; t]).map_err(e)?;
    let f = crate::chern::curvature_form_from_dconnection(&m, &grid).map_err(e)?;
    let c1 = chern_form(&f, 1).map_err(e)?;
    within(chern_character(&f).part(2).distance(&c1), 1e-12)
}

fn nconnection_curvature_flat_iff(_: &mut ChaCha8Rng) -> Result<Measure, String> {
    let dims = Dimensions::new(2, 2).map_err(e)?;
    let grid = Grid::new(vec![4; 4], vec![1.0; 4], vec![0.2, -0.3, 0.4, 0.1]).map_err(e)?;
    // N^a_i = f_i J^a_b y^b: flat exactly when curl f = 0
    let rows = |f1: &str, f2: &str| {
        let r = |f: &str| vec![format!("-({f})*y2"), format!("({f})*y1")];
        vec![r(f1), r(f2)]
    };
    let size = |f1: &str, f2: &str| -> Result<f64, String> {
        let nc = NConnectionField::from_strings(dims, &rows(f1, f2)).map_err(e)?;
        Ok(nconnection_curvature_form(&nc, &grid).map_err(e)?.max_abs())
    };
    let flat = fmax([size("0", "0")?, size("1", "2")?, size("cos(x1)*x2", "sin(x1)")?]);
    let curved = [size("x2", "0")?, size("0", "x1^2")?, size("sin(x2)", "x1")?];
    let weakest = curved.iter().copied().fold(f64::INFINITY, f64::min);
    holds(flat < 1e-10 && weakest > 1e-3)
}

// cli

fn float_format(_: &mut ChaCha8Rng) -> Result<Measure, String> {
    holds(format_float(1.0) == "1.000000000000e+00" && format_float(-2.5e-7) == "-2.500000000000e-07")
}

fn report_is_byte_stable(_: &mut ChaCha8Rng) -> Result<Measure, String> {
    let text = r#"{"dims":[2,2],"source":{"kind":"lagrangian","expr":"y1^2 + sin(x1)^2*y2^2"},
        "probes":[{"x":[0.785398163397,0.0],"y":[0.0,1.0]}],"tasks":["hessian","nconnection","clifford"]}"#;
    let cfg = RunConfig::parse(text, None).map_err(e)?;
    let a = super::build_report(&cfg, DEFAULT_SEED, 1.0).0.to_compact();
    let b = super::build_report(&RunConfig::parse(text, None).map_err(e)?, DEFAULT_SEED, 1.0).0.to_compact();
    holds(a == b)
}

fn malformed_config_rejected(_: &mut ChaCha8Rng) -> Result<Measure, String> {
    let text = r#"{"dims":[2,2],"source":{"kind":"lagrangian","expr":"y1^2 +* y2"},"tasks":["hessian"]}"#;
    holds(RunConfig::parse(text, None).is_err())
}

/// The full corpus in execution order.
pub fn corpus() -> Vec<SelfCheck> {
    macro_rules! checks {
        ($($module:literal => [$($f:ident),* $(,)?]),* $(,)?) => {
            vec![$($(SelfCheck { module: $module, name: stringify!($f), run: $f }),*),*]
        };
    }
    checks![
        "expr" => [
            expr_eval_closed_form,
            expr_derivative_vs_differences,
            expr_domain_error,
            expr_dimension_check,
            expr_second_derivative_symmetry,
        ],
        "geometry" => [
            torsion_hhh,
            torsion_vvv,
            compat_hg,
            compat_vg,
            compat_hh,
            compat_vh,
            omega_antisymmetry,
            anholonomy_vs_commutators,
            frame_block_diagonalizes,
            curvature_antisymmetry,
            sphere_scalar_curvature,
            product_blocks_vs_riemann_oracle,
            flat_distortion_zero,
        ],
        "lagrange" => [
            sphere_hessian_spot,
            sphere_nconnection_spot,
            nconnection_vs_christoffel_oracle,
            geodesics_solve_euler_lagrange,
            almost_complex_square,
            almost_complex_compatible,
            finsler_verdicts,
        ],
        "clifford" => [
            flat_gamma_relations,
            frame_gamma_relations,
            symbol_ellipticity,
            spin_connection_anti_hermitian,
            flat_torus_dispersion,
            constant_n_dispersion,
            lichnerowicz_flat,
            dirac_hermitian_on_constant_n,
        ],
        "cech" => [
            circle_cohomology,
            torus_cohomology,
            sphere_cohomology,
            disk_cohomology,
            coboundary_squares_to_zero,
            obstruction_invariant_under_flips,
            disk_obstruction_has_witness,
            glue_detects_fault,
            nonabelian_cocycle_identity,
        ],
        "chern" => [
            monopole_degrees,
            trace_free_c1_vanishes,
            character_degree_two_is_c1,
            nconnection_curvature_flat_iff,
        ],
        "cli" => [float_format, report_is_byte_stable, malformed_config_rejected],
    ]
}

/// Runs every check; check `k` draws from its own stream `seed + k`.
pub fn run_selftest(seed: u64) -> Vec<SelfCheckResult> {
    corpus()
        .into_iter()
        .enumerate()
        .map(|(k, c)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
            SelfCheckResult { module: c.module, name: c.name, outcome: (c.run)(&mut rng) }
        })
        .collect()
}

pub fn selftest_table(results: &[SelfCheckResult]) -> String {
    let mut s = String::new();
    for r in results {
        let status = if r.pass() { "PASS" } else { "FAIL" };
        let detail = match &r.outcome {
            Ok(m) => format!("residual {} tol {}", format_float(m.residual), format_float(m.tol)),
            Err(msg) => format!("error: {msg}"),
        };
        s.push_str(&format!("{status}  {:<9} {:<40} {detail}\n", r.module, r.name));
    }
    let passed = results.iter().filter(|r| r.pass()).count();
    s.push_str(&format!("{passed}/{} checks passed\n", results.len()));
    s
}

pub fn selftest_json(results: &[SelfCheckResult], seed: u64) -> Json {
    let checks = results
        .iter()
        .map(|r| {
            let mut j = Json::obj().with("module", r.module).with("name", r.name).with("pass", r.pass());
            match &r.outcome {
                Ok(m) => {
                    j.push("residual", m.residual);
                    j.push("tol", m.tol);
                }
                Err(msg) => j.push("error", msg.as_str()),
            }
            j
        })
        .collect::<Vec<_>>();
    Json::obj()
        .with("version", env!("CARGO_PKG_VERSION"))
        .with("seed", seed)
        .with("checks", checks)
        .with("passed", results.iter().filter(|r| r.pass()).count())
        .with("total", results.len())
}
