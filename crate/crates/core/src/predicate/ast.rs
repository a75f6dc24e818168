use std::fmt;

use crate::lattice::{Offset, MAX_DIMS};

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// Expression node. Equality is structural and ignores spans.
#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Number(f64),
    Bool(bool),
    /// `rho[dx, ...][dt]`
    Rho(RhoRef),
    /// Bare `rho` inside an aggregate: the value being aggregated over.
    Cursor,
    /// `is_present(rho[...][...])`
    Present(RhoRef),
    Neg(Box<Expr>),
    Not(Box<Expr>),
    Arith { op: ArithOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Compare { op: CompareOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Logic { op: LogicOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Aggregate { func: Aggregate, body: Box<Expr> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RhoRef {
    /// Spatial offset as written; missing trailing components are zero.
    pub offset: Vec<i64>,
    /// Steps into the past.
    pub dt: usize,
}

impl RhoRef {
    pub fn padded(&self) -> Offset {
        let mut out = [0; MAX_DIMS];
        out[..self.offset.len()].copy_from_slice(&self.offset);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogicOp {
    And,
    Or,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregate {
    Mean,
    Min,
    Max,
    Sum,
    Count,
}

impl Aggregate {
    pub fn name(self) -> &'static str {
        match self {
            Aggregate::Mean => "mean",
            Aggregate::Min => "min",
            Aggregate::Max => "max",
            Aggregate::Sum => "sum",
            Aggregate::Count => "count",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "mean" => Aggregate::Mean,
            "min" => Aggregate::Min,
            "max" => Aggregate::Max,
            "sum" => Aggregate::Sum,
            "count" => Aggregate::Count,
            _ => return None,
        })
    }
}

/// `quale <name>: <expr>`
#[derive(Debug, Clone)]
pub struct Declaration {
    pub name: String,
    pub expr: Expr,
    pub span: Span,
}

impl PartialEq for Declaration {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.expr == other.expr
    }
}

/// Ordered quale declarations; earlier declarations win ties.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PredicateProgram {
    pub declarations: Vec<Declaration>,
}

impl PredicateProgram {
    pub fn quale_names(&self) -> Vec<String> {
        self.declarations.iter().map(|d| d.name.clone()).collect()
    }

    /// Largest `dt` or `|dx|` referenced anywhere.
    pub fn max_reach(&self) -> usize {
        fn walk(e: &Expr, acc: &mut usize) {
            match &e.kind {
                ExprKind::Rho(r) | ExprKind::Present(r) => {
                    *acc = (*acc).max(r.dt);
                    for &d in &r.offset {
                        *acc = (*acc).max(d.unsigned_abs() as usize);
                    }
                }
                ExprKind::Neg(x) | ExprKind::Not(x) => walk(x, acc),
                ExprKind::Arith { lhs, rhs, .. } | ExprKind::Compare { lhs, rhs, .. } | ExprKind::Logic { lhs, rhs, .. } => {
                    walk(lhs, acc);
                    walk(rhs, acc);
                }
                ExprKind::Aggregate { body, .. } => walk(body, acc),
                _ => {}
            }
        }
        let mut acc = 0;
        for d in &self.declarations {
            walk(&d.expr, &mut acc);
        }
        acc
    }
}

// Binding strength, loosest first.
const OR: u8 = 1;
const AND: u8 = 2;
const NOT: u8 = 3;
const CMP: u8 = 4;
const ADD: u8 = 5;
const MUL: u8 = 6;
const NEG: u8 = 7;
const ATOM: u8 = 8;

impl Expr {
    fn precedence(&self) -> u8 {
        match &self.kind {
            ExprKind::Logic { op: LogicOp::Or, .. } => OR,
            ExprKind::Logic { op: LogicOp::And, .. } => AND,
            ExprKind::Not(_) => NOT,
            ExprKind::Compare { .. } => CMP,
            ExprKind::Arith { op: ArithOp::Add | ArithOp::Sub, .. } => ADD,
            ExprKind::Arith { .. } => MUL,
            ExprKind::Neg(_) => NEG,
            _ => ATOM,
        }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let wrap = self.precedence() < min;
        if wrap {
            f.write_str("(")?;
        }
        match &self.kind {
            ExprKind::Number(x) => write!(f, "{x:?}")?,
            ExprKind::Bool(b) => write!(f, "{b}")?,
            ExprKind::Rho(r) => write!(f, "{r}")?,
            ExprKind::Cursor => f.write_str("rho")?,
            ExprKind::Present(r) => write!(f, "is_present({r})")?,
            ExprKind::Neg(x) => {
                f.write_str("-")?;
                x.write(f, NEG)?;
            }
            ExprKind::Not(x) => {
                f.write_str("not ")?;
                x.write(f, NOT)?;
            }
            ExprKind::Arith { op, lhs, rhs } => {
                let (p, sym) = match op {
                    ArithOp::Add => (ADD, "+"),
                    ArithOp::Sub => (ADD, "-"),
                    ArithOp::Mul => (MUL, "*"),
                    ArithOp::Div => (MUL, "/"),
                };
                lhs.write(f, p)?;
                write!(f, " {sym} ")?;
                rhs.write(f, p + 1)?;
            }
            ExprKind::Compare { op, lhs, rhs } => {
                let sym = match op {
                    CompareOp::Lt => "<",
                    CompareOp::Le => "<=",
                    CompareOp::Gt => ">",
                    CompareOp::Ge => ">=",
                    CompareOp::Eq => "=",
                    CompareOp::Ne => "!=",
                };
                lhs.write(f, ADD)?;
                write!(f, " {sym} ")?;
                rhs.write(f, ADD)?;
            }
            ExprKind::Logic { op, lhs, rhs } => {
                let (p, word) = match op {
                    LogicOp::Or => (OR, "or"),
                    LogicOp::And => (AND, "and"),
                };
                lhs.write(f, p)?;
                write!(f, " {word} ")?;
                rhs.write(f, p + 1)?;
            }
            ExprKind::Aggregate { func, body } => {
                write!(f, "{}(", func.name())?;
                body.write(f, OR)?;
                f.write_str(")")?;
            }
        }
        if wrap {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for RhoRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("rho[")?;
        for (i, d) in self.offset.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, "][{}]", self.dt)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, OR)
    }
}

impl fmt::Display for PredicateProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.declarations {
            writeln!(f, "quale {}: {}", d.name, d.expr)?;
        }
        Ok(())
    }
}
