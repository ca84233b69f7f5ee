//! Independent numerical oracles built only from point evaluations.
//!
//! Nothing here uses symbolic differentiation; tests and the selftest corpus
//! compare the symbolic pipeline against these routines.

use nalgebra::DMatrix;
use ndarray::{Array3, Array4};

use crate::expr::{ChartPoint, Dimensions, Expr};
use crate::geometry::NConnectionField;

/// Default step for the sixth-order stencils.
pub const STEP: f64 = 1e-3;

const W6: [(f64, f64); 6] = [
    (-3.0, -1.0 / 60.0),
    (-2.0, 9.0 / 60.0),
    (-1.0, -45.0 / 60.0),
    (1.0, 45.0 / 60.0),
    (2.0, -9.0 / 60.0),
    (3.0, 1.0 / 60.0),
];

/// Sixth-order central difference of a scalar function along coordinate `i`.
pub fn partial<F: Fn(&[f64]) -> f64>(f: &F, u: &[f64], i: usize, h: f64) -> f64 {
    let mut v = u.to_vec();
    let mut acc = 0.0;
    for (s, w) in W6 {
        v[i] = u[i] + s * h;
        acc += w * f(&v);
    }
    acc / h
}

/// Sixth-order central difference of a matrix-valued function.
pub fn partial_matrix<F: Fn(&[f64]) -> DMatrix<f64>>(f: &F, u: &[f64], i: usize, h: f64) -> DMatrix<f64> {
    let mut v = u.to_vec();
    let mut acc: Option<DMatrix<f64>> = None;
    for (s, w) in W6 {
        v[i] = u[i] + s * h;
        let term = f(&v) * w;
        acc = Some(match acc {
            Some(a) => a + term,
            None => term,
        });
    }
    acc.expect("stencil is nonempty") / h
}

/// Second-order central difference with a small step, for checks where a
/// different stencil than [`partial`] is wanted.
pub fn partial_o2<F: Fn(&[f64]) -> f64>(f: &F, u: &[f64], i: usize, h: f64) -> f64 {
    let mut a = u.to_vec();
    let mut b = u.to_vec();
    a[i] += h;
    b[i] -= h;
    (f(&a) - f(&b)) / (2.0 * h)
}

/// Expression as a function of the flat coordinate vector. Panics on domain
/// errors; oracles are only used at points where the expression is valid.
pub fn expr_fn(e: &Expr, dims: Dimensions) -> impl Fn(&[f64]) -> f64 + '_ {
    move |u: &[f64]| e.eval(&ChartPoint::from_flat(dims, u)).expect("oracle evaluated outside the expression domain")
}

/// Coordinate Christoffel symbols `Γ^λ_νσ` at `[[λ, ν, σ]]` from finite
/// differences of a metric-valued function.
pub fn christoffel<F: Fn(&[f64]) -> DMatrix<f64>>(metric: &F, u: &[f64], h: f64) -> Array3<f64> {
    let g = metric(u);
    let t = g.nrows();
    let g_inv = g.clone().try_inverse().expect("oracle metric must be invertible");
    let dg: Vec<DMatrix<f64>> = (0..t).map(|mu| partial_matrix(metric, u, mu, h)).collect();
    Array3::from_shape_fn((t, t, t), |(l, nu, sigma)| {
        0.5 * (0..t)
            .map(|k| g_inv[(l, k)] * (dg[nu][(k, sigma)] + dg[sigma][(k, nu)] - dg[k][(nu, sigma)]))
            .sum::<f64>()
    })
}

/// Coordinate Riemann tensor `R^ρ_σμν = [R(∂_μ, ∂_ν) ∂_σ]^ρ` at
/// `[[ρ, σ, μ, ν]]` by nested differences of [`christoffel`].
pub fn riemann<F: Fn(&[f64]) -> DMatrix<f64>>(metric: &F, u: &[f64], h: f64) -> Array4<f64> {
    let gamma = christoffel(metric, u, h);
    let t = gamma.dim().0;
    let mut dgamma = Vec::with_capacity(t);
    for mu in 0..t {
        let mut v = u.to_vec();
        let mut acc = Array3::<f64>::zeros((t, t, t));
        for (s, w) in W6 {
            v[mu] = u[mu] + s * h;
            acc = acc + christoffel(metric, &v, h) * w;
        }
        dgamma.push(acc / h);
    }
    Array4::from_shape_fn((t, t, t, t), |(r, s, mu, nu)| {
        let mut v = dgamma[mu][[r, nu, s]] - dgamma[nu][[r, mu, s]];
        for l in 0..t {
            v += gamma[[r, mu, l]] * gamma[[l, nu, s]] - gamma[[r, nu, l]] * gamma[[l, mu, s]];
        }
        v
    })
}

/// Coordinate components of the adapted frame vector `e_α` at `u`, from
/// point values of `N` only.
pub fn frame_vector(nc: &NConnectionField, u: &[f64], alpha: usize) -> Vec<f64> {
    let dims = nc.dims();
    let t = dims.total();
    let mut v = vec![0.0; t];
    v[alpha] = 1.0;
    if alpha < dims.n {
        let p = ChartPoint::from_flat(dims, u);
        for a in 0..dims.m {
            v[dims.n + a] = -nc.get(alpha, a).eval(&p).expect("N evaluable at oracle points");
        }
    }
    v
}

/// `e_α f` by first differences along the frame vector.
pub fn frame_derivative<F: Fn(&[f64]) -> f64>(nc: &NConnectionField, f: &F, u: &[f64], alpha: usize, h: f64) -> f64 {
    let v = frame_vector(nc, u, alpha);
    v.iter().enumerate().filter(|(_, c)| **c != 0.0).map(|(mu, c)| c * partial(f, u, mu, h)).sum()
}

/// `[e_α, e_β] f = e_α(e_β f) − e_β(e_α f)` by nested differences.
pub fn frame_commutator<F: Fn(&[f64]) -> f64>(
    nc: &NConnectionField,
    f: &F,
    u: &[f64],
    alpha: usize,
    beta: usize,
    h: f64,
) -> f64 {
    let eb = |w: &[f64]| frame_derivative(nc, f, w, beta, h);
    let ea = |w: &[f64]| frame_derivative(nc, f, w, alpha, h);
    frame_derivative(nc, &eb, u, alpha, h) - frame_derivative(nc, &ea, u, beta, h)
}

/// Directional derivative `d/dt f(u + t v)` at `t = 0`.
pub fn directional<F: Fn(&[f64]) -> f64>(f: &F, u: &[f64], v: &[f64], h: f64) -> f64 {
    let along = |t: &[f64]| {
        let w: Vec<f64> = u.iter().zip(v).map(|(a, b)| a + t[0] * b).collect();
        f(&w)
    };
    partial(&along, &[0.0], 0, h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sixth_order_is_accurate() {
        let f = |u: &[f64]| (u[0] * 1.3).sin() * u[1].exp();
        let d = partial(&f, &[0.4, 0.2], 0, STEP);
        let exact = 1.3 * (0.52f64).cos() * 0.2f64.exp();
        assert!((d - exact).abs() < 1e-12);
    }

    #[test]
    fn sphere_riemann() {
        let metric = |u: &[f64]| DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, u[0].sin().powi(2)]);
        let u = [0.9, 0.0];
        let r = riemann(&metric, &u, STEP);
        // R^1_212 = sin^2 for the round sphere in this convention
        assert!((r[[0, 1, 0, 1]] - 0.9f64.sin().powi(2)).abs() < 1e-8);
        let gamma = christoffel(&metric, &u, STEP);
        assert!((gamma[[0, 1, 1]] + 0.9f64.sin() * 0.9f64.cos()).abs() < 1e-11);
    }
}
