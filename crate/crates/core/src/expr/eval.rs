use std::collections::HashMap;

use super::{ChartPoint, Expr, Func, Node};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("domain error: {message} in `{subexpr}`")]
pub struct EvalError {
    pub message: String,
    /// The offending subexpression, printed canonically.
    pub subexpr: String,
}

impl EvalError {
    fn at(e: &Expr, message: impl Into<String>) -> Self {
        Self { message: message.into(), subexpr: e.to_string() }
    }
}

/// Evaluates expressions at one fixed point, memoizing shared subtrees.
///
/// Reuse one evaluator for every component evaluated at the same point: the
/// memo is what keeps DAG evaluation linear in the number of distinct nodes.
pub struct Evaluator<'p> {
    point: &'p ChartPoint,
    // the node is held so its address cannot be recycled while memoized
    memo: HashMap<usize, (Expr, f64)>,
}

impl<'p> Evaluator<'p> {
    pub fn new(point: &'p ChartPoint) -> Self {
        Self { point, memo: HashMap::new() }
    }

    pub fn point(&self) -> &ChartPoint {
        self.point
    }

    pub fn eval(&mut self, e: &Expr) -> Result<f64, EvalError> {
        if let Some((_, v)) = self.memo.get(&e.id()) {
            return Ok(*v);
        }
        let v = match e.node() {
            Node::Const(c) => *c,
            Node::Var(var) => self.point.get(*var),
            Node::Neg(a) => -self.eval(a)?,
            Node::Add(a, b) => self.eval(a)? + self.eval(b)?,
            Node::Sub(a, b) => self.eval(a)? - self.eval(b)?,
            Node::Mul(a, b) => self.eval(a)? * self.eval(b)?,
            Node::Div(a, b) => {
                let num = self.eval(a)?;
                let den = self.eval(b)?;
                if den == 0.0 {
                    return Err(EvalError::at(e, "division by zero"));
                }
                num / den
            }
            Node::Pow(a, c) => {
                let base = self.eval(a)?;
                if base < 0.0 && c.fract() != 0.0 {
                    return Err(EvalError::at(e, "non-integer power of a negative number"));
                }
                if base == 0.0 && *c < 0.0 {
                    return Err(EvalError::at(e, "negative power of zero"));
                }
                if *c == 2.0 {
                    base * base
                } else {
                    base.powf(*c)
                }
            }
            Node::Func(f, a) => {
                let arg = self.eval(a)?;
                match f.apply(arg) {
                    Some(v) => v,
                    None => {
                        let what = match f {
                            Func::Ln => "logarithm of a non-positive number",
                            _ => "square root of a negative number",
                        };
                        return Err(EvalError::at(e, what));
                    }
                }
            }
        };
        self.memo.insert(e.id(), (e.clone(), v));
        Ok(v)
    }
}
