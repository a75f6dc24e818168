//! Predicate language for quale rules.
//!
//! A program is a sequence of declarations, one per quale type:
//!
//! ```text
//! # comments run to end of line
//! quale bright: rho[0][0] > 0.8
//! quale edge:   rho[0][0] > 0.5 and not is_present(rho[1][0])
//! quale busy:   count(rho > 0.5) >= 3 or mean(rho) = 0.5
//! ```
//!
//! `rho[dx, dy, dz][dt]` is the density at a spatial offset (trailing zero
//! components may be omitted) and `dt` steps in the past; offsets must lie
//! within the neighborhood radius. Aggregates `mean`, `min`, `max`, `sum`
//! and `count` range over every present slot of the window, with bare `rho`
//! naming the slot value. Arithmetic is `+ - * /`, comparisons are
//! `< <= > >= = !=` (equality within 1e-9), and booleans combine with
//! `and`, `or`, `not`.

mod ast;
mod eval;
mod lexer;
mod parser;

use thiserror::Error;

pub use ast::{Aggregate, ArithOp, CompareOp, Declaration, Expr, ExprKind, LogicOp, PredicateProgram, RhoRef, Span};
pub use eval::{Evaluation, Fault, Window, EQ_TOLERANCE};

/// Lattice facts the parser checks offsets against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseContext {
    pub radius: usize,
    pub dims: usize,
}

impl ParseContext {
    pub fn for_lattice(lattice: &crate::lattice::Lattice) -> Self {
        Self { radius: lattice.radius(), dims: lattice.dims() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Syntax,
    UnknownIdentifier,
    OffsetOutOfRange,
    DuplicateQuale,
    Type,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub kind: ErrorKind,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(kind: ErrorKind, span: Span, message: String) -> Self {
        Self { kind, line: span.line, column: span.column, message }
    }
}

pub fn parse_predicates(src: &str, ctx: &ParseContext) -> Result<PredicateProgram, ParseError> {
    parser::parse(src, ctx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Offset;

    const CTX: ParseContext = ParseContext { radius: 2, dims: 1 };

    struct Line {
        values: Vec<Vec<f64>>, // [dt][dx + radius]
    }

    impl Window for Line {
        fn value(&self, offset: &Offset, dt: usize) -> Option<f64> {
            self.values.get(dt)?.get((offset[0] + 2) as usize).copied().filter(|v| !v.is_nan())
        }
        fn present_values(&self) -> Vec<f64> {
            self.values.iter().flatten().copied().filter(|v| !v.is_nan()).collect()
        }
    }

    fn flat(v: f64) -> Line {
        Line { values: vec![vec![v; 5]; 3] }
    }

    fn program(src: &str) -> PredicateProgram {
        parse_predicates(src, &CTX).unwrap()
    }

    #[test]
    fn single_declaration() {
        let p = program("quale bright: rho[0][0] > 0.8");
        assert_eq!(p.quale_names(), vec!["bright"]);
        assert_eq!(p.first_match(&flat(0.9)).quale, Some(0));
        assert_eq!(p.first_match(&flat(0.5)).quale, None);
    }

    #[test]
    fn offset_beyond_radius() {
        let err = parse_predicates("quale x: rho[5][0] > 0", &CTX).unwrap_err();
        assert_eq!(err.kind, ErrorKind::OffsetOutOfRange);
        assert_eq!((err.line, err.column), (1, 14));
        let err = parse_predicates("quale x: rho[0][3] > 0", &CTX).unwrap_err();
        assert_eq!(err.kind, ErrorKind::OffsetOutOfRange);
        let err = parse_predicates("quale x: rho[0, 1][0] > 0", &CTX).unwrap_err();
        assert_eq!(err.kind, ErrorKind::OffsetOutOfRange);
    }

    #[test]
    fn first_match_wins() {
        let p = program("quale a: rho[0][0] > 0.1\nquale b: rho[0][0] > 0.2");
        assert_eq!(p.first_match(&flat(0.5)).quale, Some(0));
    }

    #[test]
    fn errors_are_positioned() {
        let cases = [
            ("quale x rho[0][0] > 1", ErrorKind::Syntax, (1, 9)),
            ("quale x: foo > 1", ErrorKind::UnknownIdentifier, (1, 10)),
            ("quale x: rho[0][0]", ErrorKind::Type, (1, 10)),
            ("quale x: true\nquale x: false", ErrorKind::DuplicateQuale, (2, 7)),
            ("\n  quale x: 1 < 2 < 3", ErrorKind::Syntax, (2, 18)),
            ("quale x: rho > 0", ErrorKind::Syntax, (1, 10)),
            ("quale x: mean(mean(rho)) > 0", ErrorKind::Syntax, (1, 15)),
            ("quale x: 1e999 > 0", ErrorKind::Syntax, (1, 10)),
        ];
        for (src, kind, pos) in cases {
            let err = parse_predicates(src, &CTX).unwrap_err();
            assert_eq!((err.kind, (err.line, err.column)), (kind, pos), "{src}: {err}");
        }
    }

    #[test]
    fn division_by_zero_is_false_with_fault() {
        let p = program("quale x: rho[0][0] / (rho[1][0] - rho[1][0]) > 0\nquale y: true");
        let ev = p.first_match(&flat(0.3));
        assert_eq!(ev.quale, Some(1));
        assert_eq!(ev.faults.len(), 1);
        assert!(matches!(ev.faults[0], (0, Fault::DivisionByZero { .. })));
    }

    #[test]
    fn absent_neighbors() {
        let mut w = flat(0.7);
        w.values[0][3] = f64::NAN;
        let p = program("quale a: rho[1][0] > 0.5\nquale b: not is_present(rho[1][0])");
        assert_eq!(p.first_match(&w).quale, Some(1));
        let agg = program("quale m: mean(rho) = 0.7 and count(rho > 0) = 14 and max(rho) <= min(rho)");
        assert_eq!(agg.first_match(&w).quale, Some(0));
    }

    #[test]
    fn equality_tolerance() {
        let p = program("quale e: rho[0][0] = 0.5");
        assert_eq!(p.first_match(&flat(0.5 + 5e-10)).quale, Some(0));
        assert_eq!(p.first_match(&flat(0.5 + 5e-9)).quale, None);
    }

    #[test]
    fn pretty_print_round_trips() {
        let src = "quale a: -(-rho[-1][2]) * (2 - (3 - 4)) / 5 >= 1e-5 or not (true and false)\n\
                   quale b: count(rho > 0.5 or rho < 0.1) - sum(rho * 2) != 0 and is_present(rho[2][0])";
        let p = program(src);
        let printed = p.to_string();
        assert_eq!(parse_predicates(&printed, &CTX).unwrap(), p, "{printed}");
    }

    #[test]
    fn comments_and_blank_lines() {
        let p = program("# header\n\nquale a: true # trailing\n   # more\nquale b: false\n");
        assert_eq!(p.declarations.len(), 2);
        assert_eq!(program("").declarations.len(), 0);
    }

    #[test]
    fn max_reach_tracks_offsets() {
        assert_eq!(program("quale a: rho[-2][1] > 0 or rho[0][1] < 1").max_reach(), 2);
    }
}
