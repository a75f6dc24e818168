use super::ast::*;

/// Equality tolerance for `=` and `!=`.
pub const EQ_TOLERANCE: f64 = 1e-9;

/// Density values visible from one lattice point.
pub trait Window {
    /// Value at a padded spatial offset and `dt` steps back; `None` when
    /// the slot is outside the lattice (or otherwise masked).
    fn value(&self, offset: &crate::lattice::Offset, dt: usize) -> Option<f64>;

    /// Values of every present slot, in window order.
    fn present_values(&self) -> Vec<f64>;
}

/// A predicate that could not be evaluated.
#[derive(Debug, Clone, PartialEq)]
pub enum Fault {
    DivisionByZero { span: Span },
}

impl std::fmt::Display for Fault {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Fault::DivisionByZero { span } => write!(f, "division by zero at {span}"),
        }
    }
}

/// Absent neighbors propagate through arithmetic; any comparison involving
/// an absent value is false.
fn num(e: &Expr, w: &dyn Window, cursor: Option<f64>) -> Result<Option<f64>, Fault> {
    Ok(match &e.kind {
        ExprKind::Number(x) => Some(*x),
        ExprKind::Rho(r) => w.value(&r.padded(), r.dt),
        ExprKind::Cursor => cursor,
        ExprKind::Neg(x) => num(x, w, cursor)?.map(|v| -v),
        ExprKind::Arith { op, lhs, rhs } => {
            let (a, b) = (num(lhs, w, cursor)?, num(rhs, w, cursor)?);
            match (a, b) {
                (Some(a), Some(b)) => Some(match op {
                    ArithOp::Add => a + b,
                    ArithOp::Sub => a - b,
                    ArithOp::Mul => a * b,
                    ArithOp::Div => {
                        if b == 0.0 {
                            return Err(Fault::DivisionByZero { span: e.span });
                        }
                        a / b
                    }
                }),
                _ => None,
            }
        }
        ExprKind::Aggregate { func, body } => {
            let values = w.present_values();
            if *func == Aggregate::Count {
                let mut n = 0usize;
                for v in values {
                    if boolean(body, w, Some(v))? {
                        n += 1;
                    }
                }
                Some(n as f64)
            } else {
                let mut acc: Vec<f64> = Vec::with_capacity(values.len());
                for v in values {
                    if let Some(x) = num(body, w, Some(v))? {
                        acc.push(x);
                    }
                }
                if acc.is_empty() {
                    None
                } else {
                    Some(match func {
                        Aggregate::Mean => acc.iter().sum::<f64>() / acc.len() as f64,
                        Aggregate::Sum => acc.iter().sum(),
                        Aggregate::Min => acc.iter().copied().fold(f64::INFINITY, f64::min),
                        Aggregate::Max => acc.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                        Aggregate::Count => unreachable!(),
                    })
                }
            }
        }
        _ => unreachable!("type-checked numeric expression"),
    })
}

fn boolean(e: &Expr, w: &dyn Window, cursor: Option<f64>) -> Result<bool, Fault> {
    Ok(match &e.kind {
        ExprKind::Bool(b) => *b,
        ExprKind::Present(r) => w.value(&r.padded(), r.dt).is_some(),
        ExprKind::Not(x) => !boolean(x, w, cursor)?,
        ExprKind::Logic { op: LogicOp::And, lhs, rhs } => boolean(lhs, w, cursor)? && boolean(rhs, w, cursor)?,
        ExprKind::Logic { op: LogicOp::Or, lhs, rhs } => boolean(lhs, w, cursor)? || boolean(rhs, w, cursor)?,
        ExprKind::Compare { op, lhs, rhs } => match (num(lhs, w, cursor)?, num(rhs, w, cursor)?) {
            (Some(a), Some(b)) => match op {
                CompareOp::Lt => a < b,
                CompareOp::Le => a <= b,
                CompareOp::Gt => a > b,
                CompareOp::Ge => a >= b,
                CompareOp::Eq => (a - b).abs() <= EQ_TOLERANCE,
                CompareOp::Ne => (a - b).abs() > EQ_TOLERANCE,
            },
            _ => false,
        },
        _ => unreachable!("type-checked boolean expression"),
    })
}

impl Declaration {
    pub fn holds(&self, window: &dyn Window) -> Result<bool, Fault> {
        boolean(&self.expr, window, None)
    }
}

/// Outcome of evaluating a program at one point.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Evaluation {
    /// Index of the first declaration that holds.
    pub quale: Option<usize>,
    /// `(declaration index, fault)` for predicates treated as false.
    pub faults: Vec<(usize, Fault)>,
}

impl PredicateProgram {
    /// First declaration, in program order, whose predicate holds.
    pub fn first_match(&self, window: &dyn Window) -> Evaluation {
        let mut out = Evaluation::default();
        for (i, d) in self.declarations.iter().enumerate() {
            match d.holds(window) {
                Ok(true) => {
                    out.quale = Some(i);
                    break;
                }
                Ok(false) => {}
                Err(fault) => out.faults.push((i, fault)),
            }
        }
        out
    }
}
