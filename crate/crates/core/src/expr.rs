//! Real-valued arithmetic expressions in `n` variables.
//!
//! Evaluation is total: any non-finite intermediate (division by zero, `log`
//! of a non-positive number, overflow, NaN) makes the whole result
//! [`EvalResult::Undefined`]. That is how the function's domain is modelled.
//!
//! ```
//! use limitscout::expr::{Expression, EvalResult};
//!
//! let f = Expression::parse("x*y/(x^2+y^2)", 2).unwrap();
//! assert_eq!(f.evaluate(&[1.0, 1.0]).unwrap(), EvalResult::Defined(0.5));
//! assert_eq!(f.evaluate(&[0.0, 0.0]).unwrap(), EvalResult::Undefined);
//! ```

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, ParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
            BinaryOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    pub const ALL: [Func; 7] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Tan => v.tan(),
            Func::Exp => v.exp(),
            // ln(0) = -inf and ln(<0) = NaN both fall out as Undefined
            Func::Log => v.ln(),
            Func::Sqrt => v.sqrt(),
            Func::Abs => v.abs(),
        }
    }
}

/// Syntax-tree node. Variables are stored 0-based.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Var(usize),
    Neg(Box<Node>),
    Binary(BinaryOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    fn max_var(&self) -> Option<usize> {
        match self {
            Node::Const(_) => None,
            Node::Var(i) => Some(*i),
            Node::Neg(a) | Node::Call(_, a) => a.max_var(),
            Node::Binary(_, a, b) => a.max_var().max(b.max_var()),
        }
    }

    fn collect_vars(&self, out: &mut BTreeSet<usize>) {
        match self {
            Node::Const(_) => {}
            Node::Var(i) => {
                out.insert(*i + 1);
            }
            Node::Neg(a) | Node::Call(_, a) => a.collect_vars(out),
            Node::Binary(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// `None` as soon as any intermediate value is non-finite.
    fn eval(&self, point: &[f64]) -> Option<f64> {
        let v = match self {
            Node::Const(c) => *c,
            Node::Var(i) => point[*i],
            Node::Neg(a) => -a.eval(point)?,
            Node::Call(f, a) => f.apply(a.eval(point)?),
            Node::Binary(op, a, b) => {
                let a = a.eval(point)?;
                let b = b.eval(point)?;
                match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div => a / b,
                    BinaryOp::Pow => {
                        if a < 0.0 && b.fract() != 0.0 {
                            return None;
                        }
                        a.powf(b)
                    }
                }
            }
        };
        v.is_finite().then_some(v)
    }
}

impl fmt::Display for Node {
    /// Fully parenthesised; re-parses to an identical tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Const(c) if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) => {
                write!(f, "(-{:?})", -c)
            }
            Node::Const(c) => write!(f, "{c:?}"),
            Node::Var(i) => write!(f, "x{}", i + 1),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Node::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

/// Result of evaluating an expression at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EvalResult {
    Defined(f64),
    Undefined,
}

impl EvalResult {
    pub fn value(self) -> Option<f64> {
        match self {
            EvalResult::Defined(v) => Some(v),
            EvalResult::Undefined => None,
        }
    }

    pub fn is_defined(self) -> bool {
        matches!(self, EvalResult::Defined(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Node,
    arity: usize,
}

impl Expression {
    pub fn parse(source: &str, arity: usize) -> Result<Self, ParseError> {
        if arity == 0 {
            return Err(ParseError::new(0, "arity must be positive"));
        }
        let tokens = lex(source)?;
        let mut parser = Parser {
            tokens,
            pos: 0,
            arity,
            end: source.len(),
        };
        let root = parser.expr()?;
        if let Some(tok) = parser.peek() {
            return Err(ParseError::new(
                tok.offset,
                format!("unexpected {}", tok.kind.describe()),
            ));
        }
        Ok(Self { root, arity })
    }

    /// Wraps an already-built tree, checking that every variable fits `arity`.
    pub fn from_node(root: Node, arity: usize) -> Result<Self, Error> {
        if arity == 0 {
            return Err(Error::usage("arity must be positive"));
        }
        if let Some(max) = root.max_var() {
            if max >= arity {
                return Err(Error::usage(format!(
                    "variable x{} exceeds arity {arity}",
                    max + 1
                )));
            }
        }
        Ok(Self { root, arity })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn evaluate(&self, point: &[f64]) -> Result<EvalResult, Error> {
        check_dim(self.arity, point.len())?;
        Ok(self.eval_point(point))
    }

    /// Same as [`Expression::evaluate`] for callers that already checked the dimension.
    pub(crate) fn eval_point(&self, point: &[f64]) -> EvalResult {
        debug_assert_eq!(point.len(), self.arity);
        match self.root.eval(point) {
            Some(v) => EvalResult::Defined(v),
            None => EvalResult::Undefined,
        }
    }

    /// 1-based indices of the variables that occur in the tree.
    pub fn free_variables(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.root.collect_vars(&mut out);
        out
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

impl TokenKind {
    fn describe(&self) -> String {
        match self {
            TokenKind::Num(v) => format!("number {v}"),
            TokenKind::Ident(s) => format!("identifier '{s}'"),
            TokenKind::Plus => "'+'".into(),
            TokenKind::Minus => "'-'".into(),
            TokenKind::Star => "'*'".into(),
            TokenKind::Slash => "'/'".into(),
            TokenKind::Caret => "'^'".into(),
            TokenKind::LParen => "'('".into(),
            TokenKind::RParen => "')'".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    offset: usize,
}

fn lex(source: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let single = match c {
            b'+' => Some(TokenKind::Plus),
            b'-' => Some(TokenKind::Minus),
            b'*' => Some(TokenKind::Star),
            b'/' => Some(TokenKind::Slash),
            b'^' => Some(TokenKind::Caret),
            b'(' => Some(TokenKind::LParen),
            b')' => Some(TokenKind::RParen),
            _ => None,
        };
        if let Some(kind) = single {
            tokens.push(Token {
                kind,
                offset: start,
            });
            i += 1;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &source[start..i];
            let value: f64 = text
                .parse()
                .map_err(|_| ParseError::new(start, format!("invalid number '{text}'")))?;
            if !value.is_finite() {
                return Err(ParseError::new(start, format!("number '{text}' is out of range")));
            }
            tokens.push(Token {
                kind: TokenKind::Num(value),
                offset: start,
            });
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            tokens.push(Token {
                kind: TokenKind::Ident(source[start..i].to_string()),
                offset: start,
            });
        } else {
            // offset must stay on a char boundary for multi-byte input
            let ch = source[start..].chars().next().unwrap_or('?');
            return Err(ParseError::new(start, format!("unexpected character '{ch}'")));
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    arity: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek().is_some_and(|t| &t.kind == kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn error_here(&self, expected: &str) -> ParseError {
        match self.peek() {
            Some(tok) => ParseError::new(
                tok.offset,
                format!("expected {expected}, found {}", tok.kind.describe()),
            ),
            None => ParseError::new(self.end, format!("expected {expected}, found end of input")),
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat(&TokenKind::Plus) {
                BinaryOp::Add
            } else if self.eat(&TokenKind::Minus) {
                BinaryOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat(&TokenKind::Star) {
                BinaryOp::Mul
            } else if self.eat(&TokenKind::Slash) {
                BinaryOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    // `-x^2` is `-(x^2)`; `^` is right-associative and accepts a signed exponent.
    fn unary(&mut self) -> Result<Node, ParseError> {
        if self.eat(&TokenKind::Minus) {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        let base = self.atom()?;
        if self.eat(&TokenKind::Caret) {
            let exponent = self.unary()?;
            return Ok(Node::Binary(BinaryOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.error_here("an operand"));
        };
        match tok.kind {
            TokenKind::Num(v) => {
                self.pos += 1;
                Ok(Node::Const(v))
            }
            TokenKind::LParen => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(&TokenKind::RParen) {
                    return Err(self.error_here("')'"));
                }
                Ok(inner)
            }
            TokenKind::Ident(name) => {
                self.pos += 1;
                if let Some(func) = Func::from_name(&name) {
                    if !self.eat(&TokenKind::LParen) {
                        return Err(self.error_here(&format!("'(' after {name}")));
                    }
                    let arg = self.expr()?;
                    if !self.eat(&TokenKind::RParen) {
                        return Err(self.error_here("')'"));
                    }
                    return Ok(Node::Call(func, Box::new(arg)));
                }
                match variable_index(&name, self.arity) {
                    Some(i) => Ok(Node::Var(i)),
                    None if looks_like_variable(&name) => Err(ParseError::new(
                        tok.offset,
                        format!("unknown variable '{name}' for arity {}", self.arity),
                    )),
                    None => Err(ParseError::new(
                        tok.offset,
                        format!("unknown identifier '{name}'"),
                    )),
                }
            }
            _ => Err(self.error_here("an operand")),
        }
    }
}

fn looks_like_variable(name: &str) -> bool {
    matches!(name, "x" | "y" | "z")
        || (name.len() > 1 && name.starts_with('x') && name[1..].bytes().all(|b| b.is_ascii_digit()))
}

/// 0-based index for `x`, `y`, `z` (arity <= 3) or `x1`, `x2`, ...
fn variable_index(name: &str, arity: usize) -> Option<usize> {
    let idx = match name {
        "x" | "y" | "z" if arity <= 3 => match name {
            "x" => 0,
            "y" => 1,
            _ => 2,
        },
        _ if looks_like_variable(name) && name.len() > 1 => {
            let k: usize = name[1..].parse().ok()?;
            k.checked_sub(1)?
        }
        _ => return None,
    };
    (idx < arity).then_some(idx)
}
