//! One-variable expression ASTs: parsing and exact/float evaluation.
//!
//! Grammar: variable `x`, integer/decimal literals, `+ - * /`, integer
//! exponents via `^`, and the functions `sin cos exp log abs`. Expressions
//! without function symbols are rational functions of `x` and evaluate
//! exactly at rational points.

use std::fmt;

use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::scalar::{format_rat, parse_rat, rat_pow};
use crate::Rat;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExprError {
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown function {name:?} at offset {pos}")]
    UnknownFunction { pos: usize, name: String },
    #[error("exact evaluation requested for a non-rational expression")]
    ExactnessViolation,
    #[error("evaluation domain error: {0}")]
    EvaluationDomain(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Abs,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Abs => "abs",
        }
    }
}

/// Expression tree over one variable.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    X,
    Lit(Rat),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i64),
    Fun(Func, Box<Expr>),
}

impl Expr {
    /// True when the expression is a rational function (no `sin`/`cos`/...),
    /// hence exactly evaluable at rational points.
    pub fn is_exact(&self) -> bool {
        match self {
            Expr::X | Expr::Lit(_) => true,
            Expr::Neg(e) | Expr::Pow(e, _) => e.is_exact(),
            Expr::Add(l, r) | Expr::Sub(l, r) | Expr::Mul(l, r) | Expr::Div(l, r) => {
                l.is_exact() && r.is_exact()
            }
            Expr::Fun(..) => false,
        }
    }

    /// Syntactic degree when the expression is an honest polynomial in `x`
    /// (division only by literals, nonnegative exponents); `None` otherwise.
    pub fn polynomial_degree(&self) -> Option<i64> {
        match self {
            Expr::X => Some(1),
            Expr::Lit(_) => Some(0),
            Expr::Neg(e) => e.polynomial_degree(),
            Expr::Add(l, r) | Expr::Sub(l, r) => {
                Some(l.polynomial_degree()?.max(r.polynomial_degree()?))
            }
            Expr::Mul(l, r) => Some(l.polynomial_degree()? + r.polynomial_degree()?),
            Expr::Div(l, r) => match (l.polynomial_degree(), r.as_ref()) {
                (Some(d), Expr::Lit(c)) if !c.is_zero() => Some(d),
                _ => None,
            },
            Expr::Pow(e, k) if *k >= 0 => Some(e.polynomial_degree()? * k),
            Expr::Pow(..) => None,
            Expr::Fun(..) => None,
        }
    }

    /// Exact evaluation at a rational point.
    pub fn eval_rat(&self, x: &Rat) -> Result<Rat, ExprError> {
        match self {
            Expr::X => Ok(x.clone()),
            Expr::Lit(c) => Ok(c.clone()),
            Expr::Neg(e) => Ok(-e.eval_rat(x)?),
            Expr::Add(l, r) => Ok(l.eval_rat(x)? + r.eval_rat(x)?),
            Expr::Sub(l, r) => Ok(l.eval_rat(x)? - r.eval_rat(x)?),
            Expr::Mul(l, r) => Ok(l.eval_rat(x)? * r.eval_rat(x)?),
            Expr::Div(l, r) => {
                let den = r.eval_rat(x)?;
                if den.is_zero() {
                    return Err(ExprError::EvaluationDomain("division by zero".into()));
                }
                Ok(l.eval_rat(x)? / den)
            }
            Expr::Pow(e, k) => {
                let base = e.eval_rat(x)?;
                if *k >= 0 {
                    Ok(rat_pow(&base, *k as u64))
                } else if base.is_zero() {
                    Err(ExprError::EvaluationDomain("zero to a negative power".into()))
                } else {
                    Ok(rat_pow(&base, (-k) as u64).recip())
                }
            }
            Expr::Fun(..) => Err(ExprError::ExactnessViolation),
        }
    }

    /// Float evaluation; non-finite intermediate results are domain errors.
    pub fn eval_f64(&self, x: f64) -> Result<f64, ExprError> {
        let v = match self {
            Expr::X => x,
            Expr::Lit(c) => crate::scalar::rat_to_f64(c),
            Expr::Neg(e) => -e.eval_f64(x)?,
            Expr::Add(l, r) => l.eval_f64(x)? + r.eval_f64(x)?,
            Expr::Sub(l, r) => l.eval_f64(x)? - r.eval_f64(x)?,
            Expr::Mul(l, r) => l.eval_f64(x)? * r.eval_f64(x)?,
            Expr::Div(l, r) => {
                let den = r.eval_f64(x)?;
                if den == 0.0 {
                    return Err(ExprError::EvaluationDomain("division by zero".into()));
                }
                l.eval_f64(x)? / den
            }
            Expr::Pow(e, k) => e.eval_f64(x)?.powi((*k).clamp(i32::MIN as i64, i32::MAX as i64) as i32),
            Expr::Fun(f, e) => {
                let v = e.eval_f64(x)?;
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                    Func::Log => {
                        if v <= 0.0 {
                            return Err(ExprError::EvaluationDomain(
                                "log of a non-positive value".into(),
                            ));
                        }
                        v.ln()
                    }
                    Func::Abs => v.abs(),
                }
            }
        };
        if !v.is_finite() {
            return Err(ExprError::EvaluationDomain("non-finite value".into()));
        }
        Ok(v)
    }
}

// Display writes a fully parenthesized infix form; stable for round trips.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::X => write!(f, "x"),
            Expr::Lit(c) => write!(f, "{}", format_rat(c)),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Add(l, r) => write!(f, "({l} + {r})"),
            Expr::Sub(l, r) => write!(f, "({l} - {r})"),
            Expr::Mul(l, r) => write!(f, "({l} * {r})"),
            Expr::Div(l, r) => write!(f, "({l} / {r})"),
            Expr::Pow(e, k) => write!(f, "{e}^{k}"),
            Expr::Fun(g, e) => write!(f, "{}({e})", g.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rat),
    X,
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a str,
    toks: Vec<(usize, Tok)>,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\r' => i += 1,
            '+' => {
                toks.push((i, Tok::Plus));
                i += 1;
            }
            '-' | '\u{2212}' => {
                toks.push((i, Tok::Minus));
                i += c.len_utf8();
            }
            '*' => {
                toks.push((i, Tok::Star));
                i += 1;
            }
            '/' => {
                toks.push((i, Tok::Slash));
                i += 1;
            }
            '^' => {
                toks.push((i, Tok::Caret));
                i += 1;
            }
            '(' => {
                toks.push((i, Tok::LParen));
                i += 1;
            }
            ')' => {
                toks.push((i, Tok::RParen));
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                let mut saw_dot = false;
                while i < bytes.len()
                    && (bytes[i].is_ascii_digit() || (bytes[i] == b'.' && !saw_dot))
                {
                    saw_dot |= bytes[i] == b'.';
                    i += 1;
                }
                let text = &src[start..i];
                let value = parse_rat(text).ok_or_else(|| ExprError::Syntax {
                    pos: start,
                    msg: format!("bad numeric literal {text:?}"),
                })?;
                toks.push((start, Tok::Num(value)));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                let name = &src[start..i];
                if name == "x" {
                    toks.push((start, Tok::X));
                } else {
                    toks.push((start, Tok::Ident(name.to_string())));
                }
            }
            other => {
                return Err(ExprError::Syntax {
                    pos: i,
                    msg: format!("unexpected character {other:?}"),
                })
            }
        }
    }
    Ok(toks)
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&(usize, Tok)> {
        self.lexer.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<(usize, Tok)> {
        let t = self.lexer.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn end_offset(&self) -> usize {
        self.lexer.src.len()
    }

    fn parse_expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.parse_term()?;
        while let Some((_, tok)) = self.peek() {
            let op = match tok {
                Tok::Plus => true,
                Tok::Minus => false,
                _ => break,
            };
            self.next();
            let rhs = self.parse_term()?;
            lhs = if op {
                Expr::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn parse_term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.parse_unary()?;
        while let Some((_, tok)) = self.peek() {
            let mul = match tok {
                Tok::Star => true,
                Tok::Slash => false,
                _ => break,
            };
            self.next();
            let rhs = self.parse_unary()?;
            lhs = if mul {
                Expr::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> Result<Expr, ExprError> {
        if matches!(self.peek(), Some((_, Tok::Minus))) {
            self.next();
            return Ok(Expr::Neg(Box::new(self.parse_unary()?)));
        }
        self.parse_power()
    }

    fn parse_power(&mut self) -> Result<Expr, ExprError> {
        let base = self.parse_atom()?;
        if matches!(self.peek(), Some((_, Tok::Caret))) {
            self.next();
            let exponent = self.parse_int_literal()?;
            return Ok(Expr::Pow(Box::new(base), exponent));
        }
        Ok(base)
    }

    /// Exponents are integer literals, optionally negated.
    fn parse_int_literal(&mut self) -> Result<i64, ExprError> {
        let neg = if matches!(self.peek(), Some((_, Tok::Minus))) {
            self.next();
            true
        } else {
            false
        };
        match self.next() {
            Some((pos, Tok::Num(r))) => {
                if !r.is_integer() {
                    return Err(ExprError::Syntax {
                        pos,
                        msg: "exponent must be an integer literal".into(),
                    });
                }
                let k = r.to_integer().to_i64().ok_or(ExprError::Syntax {
                    pos,
                    msg: "exponent out of range".into(),
                })?;
                Ok(if neg { -k } else { k })
            }
            Some((pos, _)) => Err(ExprError::Syntax {
                pos,
                msg: "expected an integer exponent".into(),
            }),
            None => Err(ExprError::Syntax {
                pos: self.end_offset(),
                msg: "expected an integer exponent".into(),
            }),
        }
    }

    fn parse_atom(&mut self) -> Result<Expr, ExprError> {
        match self.next() {
            Some((_, Tok::Num(r))) => Ok(Expr::Lit(r)),
            Some((_, Tok::X)) => Ok(Expr::X),
            Some((pos, Tok::Ident(name))) => {
                let func = match name.as_str() {
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    "exp" => Func::Exp,
                    "log" => Func::Log,
                    "abs" => Func::Abs,
                    _ => return Err(ExprError::UnknownFunction { pos, name }),
                };
                match self.next() {
                    Some((_, Tok::LParen)) => {}
                    _ => {
                        return Err(ExprError::Syntax {
                            pos,
                            msg: format!("expected '(' after {}", func.name()),
                        })
                    }
                }
                let arg = self.parse_expr()?;
                match self.next() {
                    Some((_, Tok::RParen)) => Ok(Expr::Fun(func, Box::new(arg))),
                    _ => Err(ExprError::Syntax {
                        pos: self.end_offset(),
                        msg: "missing ')'".into(),
                    }),
                }
            }
            Some((_, Tok::LParen)) => {
                let inner = self.parse_expr()?;
                match self.next() {
                    Some((_, Tok::RParen)) => Ok(inner),
                    Some((pos, _)) => Err(ExprError::Syntax {
                        pos,
                        msg: "missing ')'".into(),
                    }),
                    None => Err(ExprError::Syntax {
                        pos: self.end_offset(),
                        msg: "missing ')'".into(),
                    }),
                }
            }
            Some((pos, tok)) => Err(ExprError::Syntax {
                pos,
                msg: format!("unexpected token {tok:?}"),
            }),
            None => Err(ExprError::Syntax {
                pos: self.end_offset(),
                msg: "expected an operand".into(),
            }),
        }
    }
}

/// Parses a single expression, requiring the whole input to be consumed.
pub fn parse_expr(src: &str) -> Result<Expr, ExprError> {
    let toks = lex(src)?;
    let mut parser = Parser {
        lexer: Lexer { src, toks },
        pos: 0,
    };
    let expr = parser.parse_expr()?;
    if let Some((pos, tok)) = parser.peek() {
        return Err(ExprError::Syntax {
            pos: *pos,
            msg: format!("trailing input {tok:?}"),
        });
    }
    Ok(expr)
}
