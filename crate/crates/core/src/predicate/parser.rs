use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::{ErrorKind, ParseContext, ParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ty {
    Num,
    Bool,
}

impl Ty {
    fn name(self) -> &'static str {
        match self {
            Ty::Num => "number",
            Ty::Bool => "boolean",
        }
    }
}

const KEYWORDS: &[&str] = &["quale", "and", "or", "not", "true", "false", "rho", "is_present", "mean", "min", "max", "sum", "count"];

pub(crate) fn parse(src: &str, ctx: &ParseContext) -> Result<PredicateProgram, ParseError> {
    let tokens = tokenize(src)?;
    let mut p = Parser { tokens, pos: 0, ctx, in_aggregate: false };
    p.program()
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    ctx: &'a ParseContext,
    in_aggregate: bool,
}

type Typed = (Expr, Ty);

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn is_ident(&self, word: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == word)
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        let t = self.peek();
        ParseError::new(ErrorKind::Syntax, t.span, format!("expected {expected}, found {}", t.tok.describe()))
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<Token, ParseError> {
        if self.peek().tok == tok {
            Ok(self.bump())
        } else {
            Err(self.unexpected(expected))
        }
    }

    fn program(&mut self) -> Result<PredicateProgram, ParseError> {
        let mut declarations: Vec<Declaration> = Vec::new();
        while self.peek().tok != Tok::Eof {
            if !self.is_ident("quale") {
                return Err(self.unexpected("`quale`"));
            }
            let kw = self.bump();
            let name_tok = self.bump();
            let name = match name_tok.tok {
                Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => s,
                other => {
                    return Err(ParseError::new(ErrorKind::Syntax, name_tok.span, format!("expected quale name, found {}", other.describe())))
                }
            };
            if declarations.iter().any(|d| d.name == name) {
                return Err(ParseError::new(ErrorKind::DuplicateQuale, name_tok.span, format!("quale `{name}` declared twice")));
            }
            self.expect(Tok::Colon, "`:`")?;
            let expr = self.boolean()?;
            if !(self.peek().tok == Tok::Eof || self.is_ident("quale")) {
                return Err(self.unexpected("operator, `quale` or end of input"));
            }
            declarations.push(Declaration { name, expr, span: kw.span });
        }
        Ok(PredicateProgram { declarations })
    }

    fn require(&self, (e, ty): Typed, want: Ty) -> Result<Expr, ParseError> {
        if ty == want {
            Ok(e)
        } else {
            Err(ParseError::new(ErrorKind::Type, e.span, format!("expected {}, found {}", want.name(), ty.name())))
        }
    }

    fn boolean(&mut self) -> Result<Expr, ParseError> {
        let t = self.or()?;
        self.require(t, Ty::Bool)
    }

    fn numeric(&mut self) -> Result<Expr, ParseError> {
        let t = self.or()?;
        self.require(t, Ty::Num)
    }

    fn or(&mut self) -> Result<Typed, ParseError> {
        let mut lhs = self.and()?;
        while self.is_ident("or") {
            self.bump();
            let l = self.require(lhs, Ty::Bool)?;
            let r = self.and()?;
            let r = self.require(r, Ty::Bool)?;
            let span = l.span;
            lhs = (Expr { kind: ExprKind::Logic { op: LogicOp::Or, lhs: Box::new(l), rhs: Box::new(r) }, span }, Ty::Bool);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Typed, ParseError> {
        let mut lhs = self.not()?;
        while self.is_ident("and") {
            self.bump();
            let l = self.require(lhs, Ty::Bool)?;
            let r = self.not()?;
            let r = self.require(r, Ty::Bool)?;
            let span = l.span;
            lhs = (Expr { kind: ExprKind::Logic { op: LogicOp::And, lhs: Box::new(l), rhs: Box::new(r) }, span }, Ty::Bool);
        }
        Ok(lhs)
    }

    fn not(&mut self) -> Result<Typed, ParseError> {
        if self.is_ident("not") {
            let span = self.bump().span;
            let inner = self.not()?;
            let inner = self.require(inner, Ty::Bool)?;
            return Ok((Expr { kind: ExprKind::Not(Box::new(inner)), span }, Ty::Bool));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<Typed, ParseError> {
        let lhs = self.additive()?;
        let op = match self.peek().tok {
            Tok::Lt => CompareOp::Lt,
            Tok::Le => CompareOp::Le,
            Tok::Gt => CompareOp::Gt,
            Tok::Ge => CompareOp::Ge,
            Tok::Eq => CompareOp::Eq,
            Tok::Ne => CompareOp::Ne,
            _ => return Ok(lhs),
        };
        self.bump();
        let l = self.require(lhs, Ty::Num)?;
        let r = self.additive()?;
        let r = self.require(r, Ty::Num)?;
        if matches!(self.peek().tok, Tok::Lt | Tok::Le | Tok::Gt | Tok::Ge | Tok::Eq | Tok::Ne) {
            return Err(ParseError::new(ErrorKind::Syntax, self.peek().span, "comparisons cannot be chained; use `and`".into()));
        }
        let span = l.span;
        Ok((Expr { kind: ExprKind::Compare { op, lhs: Box::new(l), rhs: Box::new(r) }, span }, Ty::Bool))
    }

    fn additive(&mut self) -> Result<Typed, ParseError> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = self.arith(lhs, op, Self::multiplicative)?;
        }
    }

    fn multiplicative(&mut self) -> Result<Typed, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Star => ArithOp::Mul,
                Tok::Slash => ArithOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = self.arith(lhs, op, Self::unary)?;
        }
    }

    fn arith(&mut self, lhs: Typed, op: ArithOp, next: fn(&mut Self) -> Result<Typed, ParseError>) -> Result<Typed, ParseError> {
        let l = self.require(lhs, Ty::Num)?;
        let r = next(self)?;
        let r = self.require(r, Ty::Num)?;
        let span = l.span;
        Ok((Expr { kind: ExprKind::Arith { op, lhs: Box::new(l), rhs: Box::new(r) }, span }, Ty::Num))
    }

    fn unary(&mut self) -> Result<Typed, ParseError> {
        if self.peek().tok == Tok::Minus {
            let span = self.bump().span;
            let inner = self.unary()?;
            let inner = self.require(inner, Ty::Num)?;
            return Ok((Expr { kind: ExprKind::Neg(Box::new(inner)), span }, Ty::Num));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Typed, ParseError> {
        let tok = self.peek().clone();
        match tok.tok {
            Tok::Number(x) => {
                self.bump();
                Ok((Expr { kind: ExprKind::Number(x), span: tok.span }, Ty::Num))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.or()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Ident(ref word) => match word.as_str() {
                "true" | "false" => {
                    self.bump();
                    Ok((Expr { kind: ExprKind::Bool(word == "true"), span: tok.span }, Ty::Bool))
                }
                "rho" => {
                    self.bump();
                    if self.peek().tok == Tok::LBracket {
                        let r = self.rho_ref(tok.span)?;
                        Ok((Expr { kind: ExprKind::Rho(r), span: tok.span }, Ty::Num))
                    } else if self.in_aggregate {
                        Ok((Expr { kind: ExprKind::Cursor, span: tok.span }, Ty::Num))
                    } else {
                        Err(ParseError::new(ErrorKind::Syntax, tok.span, "bare `rho` is only allowed inside an aggregate".into()))
                    }
                }
                "is_present" => {
                    self.bump();
                    self.expect(Tok::LParen, "`(`")?;
                    let at = self.peek().span;
                    if !self.is_ident("rho") {
                        return Err(self.unexpected("`rho[...][...]`"));
                    }
                    self.bump();
                    let r = self.rho_ref(at)?;
                    self.expect(Tok::RParen, "`)`")?;
                    Ok((Expr { kind: ExprKind::Present(r), span: tok.span }, Ty::Bool))
                }
                name => {
                    if let Some(func) = Aggregate::from_name(name) {
                        self.bump();
                        if self.in_aggregate {
                            return Err(ParseError::new(ErrorKind::Syntax, tok.span, "aggregates cannot be nested".into()));
                        }
                        self.expect(Tok::LParen, "`(`")?;
                        self.in_aggregate = true;
                        let body = if func == Aggregate::Count { self.boolean() } else { self.numeric() };
                        self.in_aggregate = false;
                        let body = body?;
                        self.expect(Tok::RParen, "`)`")?;
                        Ok((Expr { kind: ExprKind::Aggregate { func, body: Box::new(body) }, span: tok.span }, Ty::Num))
                    } else if KEYWORDS.contains(&name) {
                        Err(self.unexpected("expression"))
                    } else {
                        Err(ParseError::new(ErrorKind::UnknownIdentifier, tok.span, format!("unknown identifier `{name}`")))
                    }
                }
            },
            _ => Err(self.unexpected("expression")),
        }
    }

    fn integer(&mut self) -> Result<(i64, super::Span), ParseError> {
        let span = self.peek().span;
        let negative = if self.peek().tok == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        match self.peek().tok {
            Tok::Number(x) if x.fract() == 0.0 && x.abs() < 1e9 => {
                self.bump();
                Ok((if negative { -(x as i64) } else { x as i64 }, span))
            }
            _ => Err(self.unexpected("integer offset")),
        }
    }

    fn rho_ref(&mut self, at: super::Span) -> Result<RhoRef, ParseError> {
        let n = self.ctx.radius as i64;
        self.expect(Tok::LBracket, "`[`")?;
        let mut offset = Vec::new();
        loop {
            let (d, span) = self.integer()?;
            if d.abs() > n {
                return Err(ParseError::new(ErrorKind::OffsetOutOfRange, span, format!("spatial offset {d} exceeds neighborhood radius {n}")));
            }
            offset.push(d);
            if self.peek().tok == Tok::Comma {
                self.bump();
            } else {
                break;
            }
        }
        if offset.len() > self.ctx.dims {
            return Err(ParseError::new(
                ErrorKind::OffsetOutOfRange,
                at,
                format!("offset has {} components for a {}-dimensional lattice", offset.len(), self.ctx.dims),
            ));
        }
        self.expect(Tok::RBracket, "`]`")?;
        self.expect(Tok::LBracket, "`[`")?;
        let (dt, span) = self.integer()?;
        if dt < 0 || dt > n {
            return Err(ParseError::new(ErrorKind::OffsetOutOfRange, span, format!("time offset {dt} outside 0..={n}")));
        }
        self.expect(Tok::RBracket, "`]`")?;
        Ok(RhoRef { offset, dt: dt as usize })
    }
}
