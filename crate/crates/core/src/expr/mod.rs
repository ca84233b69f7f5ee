//! Scalar expressions in chart coordinates `u = (x, y)`.
//!
//! An [`Expr`] is an immutable, reference-counted expression DAG. Variables are
//! `x1..xn` (base directions) and `y1..ym` (fiber directions); internally both
//! kinds are stored with zero-based indices and the fiber index is never offset
//! by `n`.
//!
//! Construction through the arithmetic operators and the named constructors
//! applies constant folding together with the `x*0`, `x*1`, `x+0` family of
//! rewrites. Nothing beyond that is simplified.

mod diff;
mod eval;
mod parse;
mod print;

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

pub use diff::Differentiator;
pub use eval::{EvalError, Evaluator};
pub use parse::{parse, ParseError};

/// Split dimension of a chart: `n` base (h) directions and `m` fiber (v) directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Dimensions {
    pub n: usize,
    pub m: usize,
}

impl Dimensions {
    pub fn new(n: usize, m: usize) -> Result<Self, DimensionError> {
        if n == 0 || m == 0 {
            return Err(DimensionError::Empty { n, m });
        }
        Ok(Self { n, m })
    }

    /// A chart with no fiber directions. Only the lattice and form machinery
    /// accept this; geometric constructions over `(n, 0)` degenerate to the
    /// base alone.
    pub fn base_only(n: usize) -> Result<Self, DimensionError> {
        if n == 0 {
            return Err(DimensionError::Empty { n, m: 0 });
        }
        Ok(Self { n, m: 0 })
    }

    pub fn total(&self) -> usize {
        self.n + self.m
    }

    /// Variable for frame direction `alpha` in `0..n+m`.
    pub fn var(&self, alpha: usize) -> Var {
        if alpha < self.n {
            Var::X(alpha)
        } else {
            Var::Y(alpha - self.n)
        }
    }

    pub fn contains(&self, v: Var) -> bool {
        match v {
            Var::X(i) => i < self.n,
            Var::Y(a) => a < self.m,
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        (0..self.total()).map(|alpha| self.var(alpha))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DimensionError {
    #[error("dimensions must be positive, got n={n}, m={m}")]
    Empty { n: usize, m: usize },
    #[error("point has {got_x} x- and {got_y} y-coordinates, expected {n} and {m}")]
    PointShape { n: usize, m: usize, got_x: usize, got_y: usize },
}

/// A chart variable. Indices are zero-based: `X(0)` prints as `x1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X(usize),
    Y(usize),
}

impl Var {
    /// Frame/coordinate index in `0..n+m`.
    pub fn flat_index(&self, dims: Dimensions) -> usize {
        match *self {
            Var::X(i) => i,
            Var::Y(a) => dims.n + a,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X(i) => write!(f, "x{}", i + 1),
            Var::Y(a) => write!(f, "y{}", a + 1),
        }
    }
}

/// A point `u = (x, y)` of a chart.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ChartPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl ChartPoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        Self { x, y }
    }

    pub fn from_flat(dims: Dimensions, u: &[f64]) -> Self {
        Self { x: u[..dims.n].to_vec(), y: u[dims.n..dims.n + dims.m].to_vec() }
    }

    pub fn check(&self, dims: Dimensions) -> Result<(), DimensionError> {
        if self.x.len() != dims.n || self.y.len() != dims.m {
            return Err(DimensionError::PointShape { n: dims.n, m: dims.m, got_x: self.x.len(), got_y: self.y.len() });
        }
        Ok(())
    }

    pub fn get(&self, v: Var) -> f64 {
        match v {
            Var::X(i) => self.x[i],
            Var::Y(a) => self.y[a],
        }
    }

    pub fn set(&mut self, v: Var, value: f64) {
        match v {
            Var::X(i) => self.x[i] = value,
            Var::Y(a) => self.y[a] = value,
        }
    }

    pub fn flat(&self) -> Vec<f64> {
        self.x.iter().chain(self.y.iter()).copied().collect()
    }

    /// Copy with coordinate `v` shifted by `h`.
    pub fn shifted(&self, v: Var, h: f64) -> Self {
        let mut p = self.clone();
        p.set(v, p.get(v) + h);
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
}

impl Func {
    pub fn name(&self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    /// `None` outside the real domain.
    fn apply(&self, v: f64) -> Option<f64> {
        match self {
            Func::Sin => Some(v.sin()),
            Func::Cos => Some(v.cos()),
            Func::Exp => Some(v.exp()),
            Func::Ln => (v > 0.0).then(|| v.ln()),
            Func::Sqrt => (v >= 0.0).then(|| v.sqrt()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Var(Var),
    Neg(Expr),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    /// Power with a constant real exponent.
    Pow(Expr, f64),
    Func(Func, Expr),
}

/// Shared handle to an expression node. Cloning is cheap.
#[derive(Clone)]
pub struct Expr(Arc<Node>);

/// Structural equality; shared nodes compare by address first.
impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl Expr {
    /// Wraps a node without any simplification.
    pub fn raw(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub(crate) fn id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn constant(c: f64) -> Self {
        Self::raw(Node::Const(c))
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn var(v: Var) -> Self {
        Self::raw(Node::Var(v))
    }

    /// Base coordinate, zero-based (`x(0)` is `x1`).
    pub fn x(i: usize) -> Self {
        Self::var(Var::X(i))
    }

    /// Fiber coordinate, zero-based (`y(0)` is `y1`).
    pub fn y(a: usize) -> Self {
        Self::var(Var::Y(a))
    }

    pub fn as_const(&self) -> Option<f64> {
        match *self.node() {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_const() == Some(1.0)
    }

    pub fn powf(&self, exponent: f64) -> Self {
        if exponent == 0.0 {
            return Self::one();
        }
        if exponent == 1.0 {
            return self.clone();
        }
        if let Some(c) = self.as_const() {
            let v = c.powf(exponent);
            if v.is_finite() {
                return Self::constant(v);
            }
        }
        Self::raw(Node::Pow(self.clone(), exponent))
    }

    pub fn apply(&self, func: Func) -> Self {
        if let Some(c) = self.as_const() {
            if let Some(v) = func.apply(c).filter(|v| v.is_finite()) {
                return Self::constant(v);
            }
        }
        Self::raw(Node::Func(func, self.clone()))
    }

    pub fn sin(&self) -> Self {
        self.apply(Func::Sin)
    }

    pub fn cos(&self) -> Self {
        self.apply(Func::Cos)
    }

    pub fn exp(&self) -> Self {
        self.apply(Func::Exp)
    }

    pub fn ln(&self) -> Self {
        self.apply(Func::Ln)
    }

    pub fn sqrt(&self) -> Self {
        self.apply(Func::Sqrt)
    }

    /// Exact partial derivative with respect to `v`.
    pub fn diff(&self, v: Var) -> Self {
        Differentiator::new().diff(self, v)
    }

    pub fn eval(&self, p: &ChartPoint) -> Result<f64, EvalError> {
        Evaluator::new(p).eval(self)
    }

    /// Calls `f` once for every variable occurrence (with repetition).
    pub fn visit_vars(&self, f: &mut impl FnMut(Var)) {
        let mut seen = std::collections::HashSet::new();
        self.visit_vars_inner(f, &mut seen);
    }

    fn visit_vars_inner(&self, f: &mut impl FnMut(Var), seen: &mut std::collections::HashSet<usize>) {
        if !seen.insert(self.id()) {
            return;
        }
        match self.node() {
            Node::Const(_) => {}
            Node::Var(v) => f(*v),
            Node::Neg(a) | Node::Pow(a, _) | Node::Func(_, a) => a.visit_vars_inner(f, seen),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.visit_vars_inner(f, seen);
                b.visit_vars_inner(f, seen);
            }
        }
    }

    /// First variable that does not fit `dims`, if any.
    pub fn out_of_range(&self, dims: Dimensions) -> Option<Var> {
        let mut bad = None;
        self.visit_vars(&mut |v| {
            if bad.is_none() && !dims.contains(v) {
                bad = Some(v);
            }
        });
        bad
    }

    pub fn depends_on(&self, v: Var) -> bool {
        let mut found = false;
        self.visit_vars(&mut |w| found |= w == v);
        found
    }

    /// Number of distinct DAG nodes.
    pub fn node_count(&self) -> usize {
        fn walk(e: &Expr, seen: &mut std::collections::HashSet<usize>) {
            if !seen.insert(e.id()) {
                return;
            }
            match e.node() {
                Node::Const(_) | Node::Var(_) => {}
                Node::Neg(a) | Node::Pow(a, _) | Node::Func(_, a) => walk(a, seen),
                Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                    walk(a, seen);
                    walk(b, seen);
                }
            }
        }
        let mut seen = std::collections::HashSet::new();
        walk(self, &mut seen);
        seen.len()
    }
}

impl From<f64> for Expr {
    fn from(c: f64) -> Self {
        Expr::constant(c)
    }
}

fn fold2(a: &Expr, b: &Expr, op: impl Fn(f64, f64) -> f64) -> Option<Expr> {
    let v = op(a.as_const()?, b.as_const()?);
    v.is_finite().then(|| Expr::constant(v))
}

impl Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        if let Some(c) = fold2(self, rhs, |a, b| a + b) {
            return c;
        }
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        Expr::raw(Node::Add(self.clone(), rhs.clone()))
    }
}

impl Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        if let Some(c) = fold2(self, rhs, |a, b| a - b) {
            return c;
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return -rhs;
        }
        Expr::raw(Node::Sub(self.clone(), rhs.clone()))
    }
}

impl Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        if let Some(c) = fold2(self, rhs, |a, b| a * b) {
            return c;
        }
        if self.is_zero() || rhs.is_zero() {
            return Expr::zero();
        }
        if self.is_one() {
            return rhs.clone();
        }
        if rhs.is_one() {
            return self.clone();
        }
        Expr::raw(Node::Mul(self.clone(), rhs.clone()))
    }
}

impl Div for &Expr {
    type Output = Expr;
    fn div(self, rhs: &Expr) -> Expr {
        if rhs.as_const() != Some(0.0) {
            if let Some(c) = fold2(self, rhs, |a, b| a / b) {
                return c;
            }
            if self.is_zero() {
                return Expr::zero();
            }
        }
        if rhs.is_one() {
            return self.clone();
        }
        Expr::raw(Node::Div(self.clone(), rhs.clone()))
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match self.node() {
            Node::Const(c) => Expr::constant(-c),
            Node::Neg(inner) => inner.clone(),
            _ => Expr::raw(Node::Neg(self.clone())),
        }
    }
}

macro_rules! forward_owned {
    ($($tr:ident $method:ident),*) => {$(
        impl $tr for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr { (&self).$method(&rhs) }
        }
        impl $tr<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr { (&self).$method(rhs) }
        }
        impl $tr<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr { self.$method(&rhs) }
        }
        impl $tr<f64> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr { self.$method(&Expr::constant(rhs)) }
        }
        impl $tr<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr { (&self).$method(&Expr::constant(rhs)) }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul, Div div);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

/// Sum of an iterator of expressions with the usual folding.
pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
    terms.into_iter().fold(Expr::zero(), |acc, t| &acc + &t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folding_rules() {
        let x = Expr::x(0);
        assert!((&x * 0.0).is_zero());
        assert_eq!(&x + 0.0, x);
        assert_eq!(&x * 1.0, x);
        assert_eq!((Expr::constant(2.0) * Expr::constant(3.0)).as_const(), Some(6.0));
        assert_eq!(-(-&x), x);
        assert_eq!(x.powf(1.0), x);
        assert!(x.powf(0.0).is_one());
        // ln(-1) is not folded into a NaN constant
        assert!(Expr::constant(-1.0).ln().as_const().is_none());
    }

    #[test]
    fn dimensions() {
        assert!(Dimensions::new(0, 2).is_err());
        assert!(Dimensions::new(2, 0).is_err());
        let d = Dimensions::new(2, 3).unwrap();
        assert_eq!(d.var(1), Var::X(1));
        assert_eq!(d.var(2), Var::Y(0));
        assert_eq!(Var::Y(2).flat_index(d), 4);
        assert_eq!(Dimensions::base_only(1).unwrap().total(), 1);
    }
}
