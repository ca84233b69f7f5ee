//! Canonical printer. Output re-parses to the identical tree.

use std::fmt::{self, Write};

use super::{Expr, Node};

const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const UNARY: u8 = 3;
const POWER: u8 = 4;
const ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e.node() {
        Node::Add(..) | Node::Sub(..) => SUM,
        Node::Mul(..) | Node::Div(..) => PRODUCT,
        Node::Neg(_) => UNARY,
        Node::Const(c) if c.is_sign_negative() => UNARY,
        Node::Pow(..) => POWER,
        Node::Const(_) | Node::Var(_) | Node::Func(..) => ATOM,
    }
}

fn write_child(out: &mut String, e: &Expr, parens: bool) {
    if parens {
        out.push('(');
        write_expr(out, e);
        out.push(')');
    } else {
        write_expr(out, e);
    }
}

fn write_number(out: &mut String, c: f64) {
    // Display for f64 is the shortest string that round-trips.
    write!(out, "{c}").expect("write to String");
}

fn write_expr(out: &mut String, e: &Expr) {
    match e.node() {
        Node::Const(c) => {
            if c.is_sign_negative() {
                out.push('-');
                write_number(out, -c);
            } else {
                write_number(out, *c);
            }
        }
        Node::Var(v) => write!(out, "{v}").expect("write to String"),
        Node::Neg(a) => {
            out.push('-');
            let parens = precedence(a) < POWER || a.as_const().is_some();
            write_child(out, a, parens);
        }
        Node::Add(a, b) | Node::Sub(a, b) => {
            write_child(out, a, false);
            out.push_str(if matches!(e.node(), Node::Add(..)) { " + " } else { " - " });
            write_child(out, b, precedence(b) <= SUM);
        }
        Node::Mul(a, b) | Node::Div(a, b) => {
            write_child(out, a, precedence(a) < PRODUCT);
            out.push(if matches!(e.node(), Node::Mul(..)) { '*' } else { '/' });
            write_child(out, b, precedence(b) <= PRODUCT);
        }
        Node::Pow(a, exp) => {
            write_child(out, a, precedence(a) < ATOM);
            out.push('^');
            if exp.is_sign_negative() {
                out.push('-');
                write_number(out, -exp);
            } else {
                write_number(out, *exp);
            }
        }
        Node::Func(f, a) => {
            out.push_str(f.name());
            out.push('(');
            write_expr(out, a);
            out.push(')');
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_expr(&mut s, self);
        f.write_str(&s)
    }
}
