use std::fmt;

use crate::jets::Elementary;

use super::ParameterEnv;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X0,
    R,
    S,
    Z,
}

impl Var {
    pub const ALL: [Var; 4] = [Var::X0, Var::R, Var::S, Var::Z];

    pub fn name(self) -> &'static str {
        match self {
            Var::X0 => "x0",
            Var::R => "r",
            Var::S => "s",
            Var::Z => "z",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_name(name: &str) -> Option<Var> {
        Var::ALL.into_iter().find(|v| v.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Param(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Elementary, Box<Expr>),
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn call(f: Elementary, a: Expr) -> Expr {
        Expr::Call(f, Box::new(a))
    }

    /// Parameter names in order of first appearance, duplicates kept.
    pub fn parameter_refs(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let Expr::Param(p) = e {
                out.push(p.as_str());
            }
        });
        out
    }

    pub fn depends_on(&self, v: Var) -> bool {
        let mut found = false;
        self.walk(&mut |e| found |= *e == Expr::Var(v));
        found
    }

    fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Neg(a) | Expr::Call(_, a) => a.walk(f),
            Expr::Bin(_, a, b) => {
                a.walk(f);
                b.walk(f);
            }
            _ => {}
        }
    }

    /// Replaces every bound parameter by its literal value.
    pub fn substitute_params(&self, env: &ParameterEnv) -> Expr {
        self.map_leaves(&|e| match e {
            Expr::Param(p) => env.get(p).map(Expr::Num),
            _ => None,
        })
    }

    /// Replaces parameters by whole expressions.
    pub fn substitute_exprs(&self, lookup: &dyn Fn(&str) -> Option<Expr>) -> Expr {
        self.map_leaves(&|e| match e {
            Expr::Param(p) => lookup(p),
            _ => None,
        })
    }

    fn map_leaves(&self, f: &dyn Fn(&Expr) -> Option<Expr>) -> Expr {
        if let Some(e) = f(self) {
            return e;
        }
        match self {
            Expr::Neg(a) => Expr::Neg(Box::new(a.map_leaves(f))),
            Expr::Call(g, a) => Expr::Call(*g, Box::new(a.map_leaves(f))),
            Expr::Bin(op, a, b) => Expr::Bin(*op, Box::new(a.map_leaves(f)), Box::new(b.map_leaves(f))),
            other => other.clone(),
        }
    }
}

/// Fully parenthesized form; parses back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => write!(f, "(-{:?})", -v),
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var(v) => f.write_str(v.name()),
            Expr::Param(p) => f.write_str(p),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Bin(op, a, b) => write!(f, "({a}{}{b})", op.symbol()),
            Expr::Call(g, a) => write!(f, "{}({a})", g.name()),
        }
    }
}
