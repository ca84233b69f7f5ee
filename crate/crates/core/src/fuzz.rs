//! Seeded generators of analytic test data: d-metrics, N-connections and
//! quadratic Lagrangians written as parser strings.
//!
//! Blocks are diagonally dominant (diagonal entries ≥ 1, off-diagonal sums
//! below 1/2), so every generated d-metric is positive definite everywhere.

use rand::Rng;

use crate::expr::Dimensions;
use crate::geometry::DMetric;
use crate::lagrange::Lagrangian;

fn coeff<R: Rng>(rng: &mut R, scale: f64) -> f64 {
    // three decimals keep the strings short and exactly reproducible
    (rng.random_range(-scale..scale) * 1000.0).round() / 1000.0
}

fn var_names(dims: Dimensions, fiber: bool) -> Vec<String> {
    let mut v: Vec<String> = (1..=dims.n).map(|i| format!("x{i}")).collect();
    if fiber {
        v.extend((1..=dims.m).map(|a| format!("y{a}")));
    }
    v
}

/// `c·sin(Σ k_μ u^μ + φ)` over the given variables.
fn wave<R: Rng>(rng: &mut R, vars: &[String], amplitude: f64) -> String {
    let mut arg = format!("{}", coeff(rng, 1.0));
    for v in vars {
        let k = coeff(rng, 1.0);
        if k != 0.0 {
            arg.push_str(&format!(" + ({k})*{v}"));
        }
    }
    format!("({})*sin({arg})", coeff(rng, amplitude))
}

/// A symmetric positive definite `k×k` block of strings in `vars`.
pub fn spd_block<R: Rng>(rng: &mut R, k: usize, vars: &[String]) -> Vec<Vec<String>> {
    let off = if k > 1 { 0.4 / (k - 1) as f64 } else { 0.0 };
    let mut b = vec![vec![String::new(); k]; k];
    for r in 0..k {
        b[r][r] = format!("1 + ({})^2", wave(rng, vars, 0.7));
        for c in r + 1..k {
            let e = wave(rng, vars, off);
            b[r][c] = e.clone();
            b[c][r] = e;
        }
    }
    b
}

/// `N^a_i` rows `[i][a]` mixing base and fiber dependence, including terms
/// nonlinear in `y` so that both anholonomy blocks are generically nonzero.
pub fn nconnection_rows<R: Rng>(rng: &mut R, dims: Dimensions) -> Vec<Vec<String>> {
    let vars = var_names(dims, true);
    (0..dims.n)
        .map(|_| {
            (0..dims.m)
                .map(|a| {
                    let lin = coeff(rng, 0.5);
                    format!("{} + ({lin})*y{}", wave(rng, &vars, 0.5), a + 1)
                })
                .collect()
        })
        .collect()
}

/// Strings of a random d-metric, kept for reports and reproduction.
#[derive(Debug, Clone, PartialEq)]
pub struct DMetricSpec {
    pub dims: Dimensions,
    pub g: Vec<Vec<String>>,
    pub h: Vec<Vec<String>>,
    pub n: Vec<Vec<String>>,
}

impl DMetricSpec {
    pub fn build(&self) -> DMetric {
        DMetric::from_strings(self.dims, &self.g, &self.h, &self.n).expect("generated d-metric is valid")
    }
}

/// Random d-metric with blocks depending on all coordinates.
pub fn dmetric<R: Rng>(rng: &mut R, dims: Dimensions) -> DMetricSpec {
    let vars = var_names(dims, true);
    DMetricSpec {
        dims,
        g: spd_block(rng, dims.n, &vars),
        h: spd_block(rng, dims.m, &vars),
        n: nconnection_rows(rng, dims),
    }
}

/// Dimensions with `1 ≤ n, m ≤ max`.
pub fn dims<R: Rng>(rng: &mut R, max: usize) -> Dimensions {
    Dimensions::new(rng.random_range(1..=max), rng.random_range(1..=max)).expect("positive dimensions")
}

/// A Riemannian quadratic Lagrangian `L = Σ a_ij(x) y^i y^j` with its
/// coefficient block `a_ij(x)`, which is also its Hessian metric.
#[derive(Debug, Clone)]
pub struct QuadraticLagrangian {
    pub n: usize,
    pub metric: Vec<Vec<String>>,
    pub text: String,
}

impl QuadraticLagrangian {
    pub fn build(&self) -> Lagrangian {
        Lagrangian::parse(&self.text, self.n).expect("generated Lagrangian is valid")
    }
}

pub fn quadratic_lagrangian<R: Rng>(rng: &mut R, n: usize) -> QuadraticLagrangian {
    let dims = Dimensions::new(n, n).expect("positive dimension");
    let metric = spd_block(rng, n, &var_names(dims, false));
    let mut terms = Vec::new();
    for i in 0..n {
        for j in 0..n {
            terms.push(format!("({})*y{}*y{}", metric[i][j], i + 1, j + 1));
        }
    }
    QuadraticLagrangian { n, metric, text: terms.join(" + ") }
}

/// Uniform point in `[-1, 1]^{n+m}`.
pub fn point<R: Rng>(rng: &mut R, dims: Dimensions) -> crate::expr::ChartPoint {
    crate::expr::ChartPoint::new(
        (0..dims.n).map(|_| rng.random_range(-1.0..1.0)).collect(),
        (0..dims.m).map(|_| rng.random_range(-1.0..1.0)).collect(),
    )
}
