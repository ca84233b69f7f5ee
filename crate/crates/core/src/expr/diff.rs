use std::collections::HashMap;

use super::{Expr, Func, Node, Var};

/// Symbolic differentiation with a memo shared across calls.
///
/// Geometric constructions differentiate the same subexpressions (metric
/// components, inverse-metric entries) many times; keeping one
/// `Differentiator` alive for a whole construction keeps the resulting DAG
/// shared instead of rebuilt per component.
#[derive(Default)]
pub struct Differentiator {
    // keyed by node address; the source expression is kept alive alongside
    memo: HashMap<(usize, Var), (Expr, Expr)>,
}

impl Differentiator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn diff(&mut self, e: &Expr, v: Var) -> Expr {
        if let Some((_, d)) = self.memo.get(&(e.id(), v)) {
            return d.clone();
        }
        let d = match e.node() {
            Node::Const(_) => Expr::zero(),
            Node::Var(w) => {
                if *w == v {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Neg(a) => -self.diff(a, v),
            Node::Add(a, b) => self.diff(a, v) + self.diff(b, v),
            Node::Sub(a, b) => self.diff(a, v) - self.diff(b, v),
            Node::Mul(a, b) => {
                let da = self.diff(a, v);
                let db = self.diff(b, v);
                &da * b + a * &db
            }
            Node::Div(a, b) => {
                let da = self.diff(a, v);
                let db = self.diff(b, v);
                if db.is_zero() {
                    &da / b
                } else {
                    (&da * b - a * &db) / b.powf(2.0)
                }
            }
            Node::Pow(a, c) => {
                let da = self.diff(a, v);
                Expr::constant(*c) * a.powf(c - 1.0) * da
            }
            Node::Func(f, a) => {
                let da = self.diff(a, v);
                if da.is_zero() {
                    Expr::zero()
                } else {
                    match f {
                        Func::Sin => da * a.cos(),
                        Func::Cos => -(da * a.sin()),
                        Func::Exp => da * e,
                        Func::Ln => da / a,
                        Func::Sqrt => da / (Expr::constant(2.0) * e),
                    }
                }
            }
        };
        self.memo.insert((e.id(), v), (e.clone(), d.clone()));
        d
    }

    /// Mixed partial along `vars` in order.
    pub fn diff_many(&mut self, e: &Expr, vars: &[Var]) -> Expr {
        vars.iter().fold(e.clone(), |acc, &v| self.diff(&acc, v))
    }
}
