//! Parsing and differentiable evaluation of uncertainty functionals.
//!
//! A functional is an arithmetic expression over the moment variables
//! `x` (momentum variance), `y` (position variance), `w` (covariance) and
//! the derived variable `z = x + y + 2*w`, with named real parameters, the
//! constants `pi`, `e` and `hbar`, and the functions `sqrt`, `exp`, `ln`,
//! `abs` and `pow`. Evaluation runs either on plain floats or on dual
//! numbers, so gradients are exact.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::dual::{Dual3, NumIssue};
use crate::geometry::Moments3;

// ======================================================================
// Errors
// ======================================================================

/// Errors from parsing or evaluating a functional.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown function `{name}` at byte {pos}")]
    UnknownFunction { name: String, pos: usize },
    #[error("parameter `{name}` is not bound to a value")]
    UnboundParameter { name: String },
    #[error("domain error: {detail}")]
    Domain { detail: String },
    #[error("gradient undefined: {detail}")]
    NonDifferentiable { detail: String },
}

fn issue_to_error(issue: NumIssue) -> ExprError {
    match issue {
        NumIssue::NegativeSqrt(v) => ExprError::Domain {
            detail: format!("sqrt of negative value {v}"),
        },
        NumIssue::LogNonPositive(v) => ExprError::Domain {
            detail: format!("ln of non-positive value {v}"),
        },
        NumIssue::DivByZero => ExprError::Domain {
            detail: "division by zero".into(),
        },
        NumIssue::FractionalPowNegative { base, exp } => ExprError::Domain {
            detail: format!("negative base {base} raised to non-integer power {exp}"),
        },
        NumIssue::NegativePowZero { exp } => ExprError::Domain {
            detail: format!("zero raised to negative power {exp}"),
        },
        NumIssue::NonFinite => ExprError::Domain {
            detail: "evaluation left the finite range".into(),
        },
        NumIssue::AbsKink => ExprError::NonDifferentiable {
            detail: "abs(w) has no derivative at w = 0; pin a sign branch".into(),
        },
        NumIssue::SqrtKink => ExprError::NonDifferentiable {
            detail: "fractional power has unbounded derivative at zero".into(),
        },
    }
}

// ======================================================================
// AST
// ======================================================================

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Var {
    X,
    Y,
    W,
    /// Expanded on the fly as `x + y + 2*w`.
    Z,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Const(f64),
    Var(Var),
    Param(String),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Sqrt(Box<Node>),
    Exp(Box<Node>),
    Ln(Box<Node>),
    Abs(Box<Node>),
}

/// Sign branch used to remove the `abs(w)` kink: the functional is solved
/// once per branch with `abs(w)` replaced by `+w` or `-w`, and a converged
/// point is only kept where the replacement is valid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbsBranch {
    /// `abs(w) -> w`, valid on `w >= 0`.
    NonNegativeW,
    /// `abs(w) -> -w`, valid on `w <= 0`.
    NonPositiveW,
}

impl AbsBranch {
    /// Whether a converged covariance respects this branch (tiny slack for
    /// roundoff at the boundary).
    pub fn admits(&self, w: f64, scale: f64) -> bool {
        let slack = 1e-10 * (1.0 + scale.abs());
        match self {
            AbsBranch::NonNegativeW => w >= -slack,
            AbsBranch::NonPositiveW => w <= slack,
        }
    }
}

/// Value and the three exact partial derivatives of a functional at a
/// moment triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grad3 {
    pub value: f64,
    pub dx: f64,
    pub dy: f64,
    pub dw: f64,
}

// ======================================================================
// Scalar abstraction: one evaluator for f64 and Dual3
// ======================================================================

trait Scalar: Copy {
    fn constant(c: f64) -> Self;
    fn add(self, o: Self) -> Self;
    fn sub(self, o: Self) -> Self;
    fn mul(self, o: Self) -> Self;
    fn neg(self) -> Self;
    fn div(self, o: Self) -> Result<Self, NumIssue>;
    fn sqrt(self) -> Result<Self, NumIssue>;
    fn exp(self) -> Result<Self, NumIssue>;
    fn ln(self) -> Result<Self, NumIssue>;
    fn abs(self, lenient: bool) -> Result<Self, NumIssue>;
    fn pow(self, e: Self) -> Result<Self, NumIssue>;
}

impl Scalar for f64 {
    fn constant(c: f64) -> Self {
        c
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn mul(self, o: Self) -> Self {
        self * o
    }
    fn neg(self) -> Self {
        -self
    }
    fn div(self, o: Self) -> Result<Self, NumIssue> {
        if o == 0.0 {
            Err(NumIssue::DivByZero)
        } else {
            Ok(self / o)
        }
    }
    fn sqrt(self) -> Result<Self, NumIssue> {
        if self < 0.0 {
            Err(NumIssue::NegativeSqrt(self))
        } else {
            Ok(f64::sqrt(self))
        }
    }
    fn exp(self) -> Result<Self, NumIssue> {
        let e = f64::exp(self);
        if e.is_finite() {
            Ok(e)
        } else {
            Err(NumIssue::NonFinite)
        }
    }
    fn ln(self) -> Result<Self, NumIssue> {
        if self <= 0.0 {
            Err(NumIssue::LogNonPositive(self))
        } else {
            Ok(f64::ln(self))
        }
    }
    fn abs(self, _lenient: bool) -> Result<Self, NumIssue> {
        Ok(f64::abs(self))
    }
    fn pow(self, e: Self) -> Result<Self, NumIssue> {
        let is_int = e == e.round() && e.abs() < 1e9;
        if self < 0.0 && !is_int {
            return Err(NumIssue::FractionalPowNegative { base: self, exp: e });
        }
        if self == 0.0 && e < 0.0 {
            return Err(NumIssue::NegativePowZero { exp: e });
        }
        let v = f64::powf(self, e);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(NumIssue::NonFinite)
        }
    }
}

impl Scalar for Dual3 {
    fn constant(c: f64) -> Self {
        Dual3::constant(c)
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn sub(self, o: Self) -> Self {
        self - o
    }
    fn mul(self, o: Self) -> Self {
        self * o
    }
    fn neg(self) -> Self {
        -self
    }
    fn div(self, o: Self) -> Result<Self, NumIssue> {
        self.checked_div(o)
    }
    fn sqrt(self) -> Result<Self, NumIssue> {
        self.checked_sqrt()
    }
    fn exp(self) -> Result<Self, NumIssue> {
        self.checked_exp()
    }
    fn ln(self) -> Result<Self, NumIssue> {
        self.checked_ln()
    }
    fn abs(self, lenient: bool) -> Result<Self, NumIssue> {
        self.checked_abs(lenient)
    }
    fn pow(self, e: Self) -> Result<Self, NumIssue> {
        self.checked_pow(e)
    }
}

struct EvalCtx<'a, S> {
    x: S,
    y: S,
    w: S,
    params: &'a BTreeMap<String, f64>,
    lenient_abs: bool,
}

fn eval_node<S: Scalar>(node: &Node, ctx: &EvalCtx<'_, S>) -> Result<S, ExprError> {
    let out = match node {
        Node::Const(c) => S::constant(*c),
        Node::Var(Var::X) => ctx.x,
        Node::Var(Var::Y) => ctx.y,
        Node::Var(Var::W) => ctx.w,
        Node::Var(Var::Z) => ctx.x.add(ctx.y).add(S::constant(2.0).mul(ctx.w)),
        Node::Param(name) => match ctx.params.get(name) {
            Some(v) => S::constant(*v),
            None if name == "hbar" => S::constant(1.0),
            None => return Err(ExprError::UnboundParameter { name: name.clone() }),
        },
        Node::Neg(a) => eval_node(a, ctx)?.neg(),
        Node::Add(a, b) => eval_node(a, ctx)?.add(eval_node(b, ctx)?),
        Node::Sub(a, b) => eval_node(a, ctx)?.sub(eval_node(b, ctx)?),
        Node::Mul(a, b) => eval_node(a, ctx)?.mul(eval_node(b, ctx)?),
        Node::Div(a, b) => eval_node(a, ctx)?
            .div(eval_node(b, ctx)?)
            .map_err(issue_to_error)?,
        Node::Pow(a, b) => eval_node(a, ctx)?
            .pow(eval_node(b, ctx)?)
            .map_err(issue_to_error)?,
        Node::Sqrt(a) => eval_node(a, ctx)?.sqrt().map_err(issue_to_error)?,
        Node::Exp(a) => eval_node(a, ctx)?.exp().map_err(issue_to_error)?,
        Node::Ln(a) => eval_node(a, ctx)?.ln().map_err(issue_to_error)?,
        Node::Abs(a) => eval_node(a, ctx)?
            .abs(ctx.lenient_abs)
            .map_err(issue_to_error)?,
    };
    Ok(out)
}

// ======================================================================
// Lexer
// ======================================================================

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0 }
    }

    fn tokens(mut self) -> Result<Vec<(Tok, usize)>, ExprError> {
        let mut out = Vec::new();
        while let Some(&c) = self.src.get(self.pos) {
            let start = self.pos;
            match c {
                b' ' | b'\t' | b'\n' | b'\r' => {
                    self.pos += 1;
                }
                b'+' => {
                    out.push((Tok::Plus, start));
                    self.pos += 1;
                }
                b'-' => {
                    out.push((Tok::Minus, start));
                    self.pos += 1;
                }
                b'*' => {
                    out.push((Tok::Star, start));
                    self.pos += 1;
                }
                b'/' => {
                    out.push((Tok::Slash, start));
                    self.pos += 1;
                }
                b'^' => {
                    out.push((Tok::Caret, start));
                    self.pos += 1;
                }
                b'(' => {
                    out.push((Tok::LParen, start));
                    self.pos += 1;
                }
                b')' => {
                    out.push((Tok::RParen, start));
                    self.pos += 1;
                }
                b',' => {
                    out.push((Tok::Comma, start));
                    self.pos += 1;
                }
                b'0'..=b'9' => {
                    out.push((self.number(start)?, start));
                }
                c if c.is_ascii_alphabetic() || c == b'_' => {
                    let mut end = self.pos;
                    while end < self.src.len()
                        && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_')
                    {
                        end += 1;
                    }
                    let name = std::str::from_utf8(&self.src[self.pos..end])
                        .expect("identifier bytes are ascii")
                        .to_string();
                    self.pos = end;
                    out.push((Tok::Ident(name), start));
                }
                other => {
                    return Err(ExprError::Syntax {
                        pos: start,
                        msg: format!("unexpected character `{}`", other as char),
                    });
                }
            }
        }
        Ok(out)
    }

    fn number(&mut self, start: usize) -> Result<Tok, ExprError> {
        let mut end = self.pos;
        while end < self.src.len() && self.src[end].is_ascii_digit() {
            end += 1;
        }
        if end < self.src.len() && self.src[end] == b'.' {
            end += 1;
            while end < self.src.len() && self.src[end].is_ascii_digit() {
                end += 1;
            }
        }
        // Exponent part only when it is unambiguously numeric: `1e5`,
        // `2.5e-3`; a bare `e` after the digits stays a separate token so
        // `2e` still lexes as `2 * <ident e>`... it does not: reject it.
        if end < self.src.len() && (self.src[end] == b'e' || self.src[end] == b'E') {
            let mut probe = end + 1;
            if probe < self.src.len() && (self.src[probe] == b'+' || self.src[probe] == b'-') {
                probe += 1;
            }
            if probe < self.src.len() && self.src[probe].is_ascii_digit() {
                end = probe;
                while end < self.src.len() && self.src[end].is_ascii_digit() {
                    end += 1;
                }
            }
        }
        let text = std::str::from_utf8(&self.src[start..end]).expect("number bytes are ascii");
        let value: f64 = text.parse().map_err(|_| ExprError::Syntax {
            pos: start,
            msg: format!("invalid number literal `{text}`"),
        })?;
        self.pos = end;
        Ok(Tok::Num(value))
    }
}

// ======================================================================
// Parser (recursive descent, usual precedence, `^` binds tightest and
// associates to the right)
// ======================================================================

struct Parser {
    toks: Vec<(Tok, usize)>,
    idx: usize,
    end_pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(t, _)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.idx).map(|(_, p)| *p).unwrap_or(self.end_pos)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|(t, _)| t.clone());
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<(), ExprError> {
        if self.peek() == Some(want) {
            self.idx += 1;
            Ok(())
        } else {
            Err(ExprError::Syntax { pos: self.pos(), msg: format!("expected {what}") })
        }
    }

    fn parse_expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.parse_term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.idx += 1;
                    lhs = Node::Add(Box::new(lhs), Box::new(self.parse_term()?));
                }
                Some(Tok::Minus) => {
                    self.idx += 1;
                    lhs = Node::Sub(Box::new(lhs), Box::new(self.parse_term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.parse_unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.idx += 1;
                    lhs = Node::Mul(Box::new(lhs), Box::new(self.parse_unary()?));
                }
                Some(Tok::Slash) => {
                    self.idx += 1;
                    lhs = Node::Div(Box::new(lhs), Box::new(self.parse_unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_unary(&mut self) -> Result<Node, ExprError> {
        if self.peek() == Some(&Tok::Minus) {
            self.idx += 1;
            return Ok(Node::Neg(Box::new(self.parse_unary()?)));
        }
        self.parse_power()
    }

    fn parse_power(&mut self) -> Result<Node, ExprError> {
        let base = self.parse_atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.idx += 1;
            // Right-associative; the exponent may itself be signed or a
            // parenthesized expression.
            let exp = self.parse_unary()?;
            return Ok(Node::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn parse_atom(&mut self) -> Result<Node, ExprError> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Node::Const(v)),
            Some(Tok::LParen) => {
                let inner = self.parse_expr()?;
                self.expect(&Tok::RParen, "closing `)`")?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => {
                if self.peek() == Some(&Tok::LParen) {
                    self.idx += 1;
                    self.parse_call(&name, pos)
                } else {
                    Ok(ident_node(&name))
                }
            }
            Some(tok) => Err(ExprError::Syntax {
                pos,
                msg: format!("unexpected token {tok:?}"),
            }),
            None => Err(ExprError::Syntax { pos, msg: "unexpected end of input".into() }),
        }
    }

    fn parse_call(&mut self, name: &str, pos: usize) -> Result<Node, ExprError> {
        let mut args = vec![self.parse_expr()?];
        while self.peek() == Some(&Tok::Comma) {
            self.idx += 1;
            args.push(self.parse_expr()?);
        }
        self.expect(&Tok::RParen, "closing `)` of call")?;
        let arity_err = |want: usize| ExprError::Syntax {
            pos,
            msg: format!("`{name}` takes {want} argument(s)"),
        };
        match name {
            "sqrt" | "exp" | "ln" | "abs" => {
                if args.len() != 1 {
                    return Err(arity_err(1));
                }
                let a = Box::new(args.pop().expect("one argument"));
                Ok(match name {
                    "sqrt" => Node::Sqrt(a),
                    "exp" => Node::Exp(a),
                    "ln" => Node::Ln(a),
                    _ => Node::Abs(a),
                })
            }
            "pow" => {
                if args.len() != 2 {
                    return Err(arity_err(2));
                }
                let e = Box::new(args.pop().expect("two arguments"));
                let b = Box::new(args.pop().expect("two arguments"));
                Ok(Node::Pow(b, e))
            }
            _ => Err(ExprError::UnknownFunction { name: name.to_string(), pos }),
        }
    }
}

fn ident_node(name: &str) -> Node {
    match name {
        "x" => Node::Var(Var::X),
        "y" => Node::Var(Var::Y),
        "w" => Node::Var(Var::W),
        "z" => Node::Var(Var::Z),
        "pi" => Node::Const(std::f64::consts::PI),
        "e" => Node::Const(std::f64::consts::E),
        other => Node::Param(other.to_string()),
    }
}

// ======================================================================
// Functional
// ======================================================================

/// A parsed uncertainty functional together with its bound parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Functional {
    source: String,
    root: Node,
    params: BTreeMap<String, f64>,
    uses_abs_w: bool,
}

impl Functional {
    /// Parses `source` and binds the given named parameters. Parameters
    /// may stay unbound here; referencing one during evaluation is the
    /// error. `hbar` defaults to 1 when not bound.
    pub fn parse(source: &str, params: &BTreeMap<String, f64>) -> Result<Self, ExprError> {
        let toks = Lexer::new(source).tokens()?;
        let mut parser = Parser { toks, idx: 0, end_pos: source.len() };
        let root = parser.parse_expr()?;
        if parser.idx != parser.toks.len() {
            return Err(ExprError::Syntax {
                pos: parser.pos(),
                msg: "trailing input after expression".into(),
            });
        }
        let uses_abs_w = contains_abs_w(&root);
        Ok(Functional {
            source: source.to_string(),
            root,
            params: params.clone(),
            uses_abs_w,
        })
    }

    /// Convenience for parameter-free functionals.
    pub fn parse_simple(source: &str) -> Result<Self, ExprError> {
        Self::parse(source, &BTreeMap::new())
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    /// Whether the expression contains `abs(w)` and therefore needs the
    /// two-branch treatment around `w = 0`.
    pub fn uses_abs_w(&self) -> bool {
        self.uses_abs_w
    }

    /// Value at a moment triple.
    pub fn evaluate(&self, m: &Moments3) -> Result<f64, ExprError> {
        let ctx = EvalCtx { x: m.x, y: m.y, w: m.w, params: &self.params, lenient_abs: false };
        let v = eval_node(&self.root, &ctx)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ExprError::Domain { detail: "evaluation left the finite range".into() })
        }
    }

    /// Value and exact gradient. Fails at non-differentiable points
    /// (notably `abs(w)` at `w = 0`).
    pub fn gradient(&self, m: &Moments3) -> Result<Grad3, ExprError> {
        self.gradient_impl(m, false)
    }

    /// Like [`Functional::gradient`] but takes the right-hand subgradient
    /// at an `abs` kink instead of failing; used by descent methods that
    /// must be able to cross `w = 0`.
    pub fn gradient_lenient(&self, m: &Moments3) -> Result<Grad3, ExprError> {
        self.gradient_impl(m, true)
    }

    fn gradient_impl(&self, m: &Moments3, lenient: bool) -> Result<Grad3, ExprError> {
        let ctx = EvalCtx {
            x: Dual3::var_x(m.x),
            y: Dual3::var_y(m.y),
            w: Dual3::var_w(m.w),
            params: &self.params,
            lenient_abs: lenient,
        };
        let d = eval_node(&self.root, &ctx)?;
        if !d.is_finite() {
            return Err(ExprError::Domain { detail: "gradient left the finite range".into() });
        }
        Ok(Grad3 { value: d.v, dx: d.dx, dy: d.dy, dw: d.dw })
    }

    /// Returns a copy with every `abs(w)` replaced by the signed branch,
    /// eliminating the kink for derivative-based solvers.
    pub fn pin_abs(&self, branch: AbsBranch) -> Functional {
        let root = pin_node(&self.root, branch);
        Functional {
            source: self.source.clone(),
            root,
            params: self.params.clone(),
            uses_abs_w: false,
        }
    }
}

fn contains_abs_w(node: &Node) -> bool {
    match node {
        Node::Abs(inner) => {
            matches!(**inner, Node::Var(Var::W)) || contains_abs_w(inner)
        }
        Node::Const(_) | Node::Var(_) | Node::Param(_) => false,
        Node::Neg(a) | Node::Sqrt(a) | Node::Exp(a) | Node::Ln(a) => contains_abs_w(a),
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b)
        | Node::Pow(a, b) => contains_abs_w(a) || contains_abs_w(b),
    }
}

fn pin_node(node: &Node, branch: AbsBranch) -> Node {
    match node {
        Node::Abs(inner) if matches!(**inner, Node::Var(Var::W)) => match branch {
            AbsBranch::NonNegativeW => Node::Var(Var::W),
            AbsBranch::NonPositiveW => Node::Neg(Box::new(Node::Var(Var::W))),
        },
        Node::Const(_) | Node::Var(_) | Node::Param(_) => node.clone(),
        Node::Neg(a) => Node::Neg(Box::new(pin_node(a, branch))),
        Node::Sqrt(a) => Node::Sqrt(Box::new(pin_node(a, branch))),
        Node::Exp(a) => Node::Exp(Box::new(pin_node(a, branch))),
        Node::Ln(a) => Node::Ln(Box::new(pin_node(a, branch))),
        Node::Abs(a) => Node::Abs(Box::new(pin_node(a, branch))),
        Node::Add(a, b) => Node::Add(Box::new(pin_node(a, branch)), Box::new(pin_node(b, branch))),
        Node::Sub(a, b) => Node::Sub(Box::new(pin_node(a, branch)), Box::new(pin_node(b, branch))),
        Node::Mul(a, b) => Node::Mul(Box::new(pin_node(a, branch)), Box::new(pin_node(b, branch))),
        Node::Div(a, b) => Node::Div(Box::new(pin_node(a, branch)), Box::new(pin_node(b, branch))),
        Node::Pow(a, b) => Node::Pow(Box::new(pin_node(a, branch)), Box::new(pin_node(b, branch))),
    }
}

// ======================================================================
// Pretty-printing (fully parenthesized; re-parses to an equivalent tree)
// ======================================================================

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(&self.root, f)
    }
}

fn write_node(node: &Node, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match node {
        Node::Const(c) => {
            if *c < 0.0 {
                write!(f, "({c:?})")
            } else {
                write!(f, "{c:?}")
            }
        }
        Node::Var(Var::X) => write!(f, "x"),
        Node::Var(Var::Y) => write!(f, "y"),
        Node::Var(Var::W) => write!(f, "w"),
        Node::Var(Var::Z) => write!(f, "z"),
        Node::Param(name) => write!(f, "{name}"),
        Node::Neg(a) => {
            write!(f, "(-")?;
            write_node(a, f)?;
            write!(f, ")")
        }
        Node::Add(a, b) => write_binary(a, "+", b, f),
        Node::Sub(a, b) => write_binary(a, "-", b, f),
        Node::Mul(a, b) => write_binary(a, "*", b, f),
        Node::Div(a, b) => write_binary(a, "/", b, f),
        Node::Pow(a, b) => write_binary(a, "^", b, f),
        Node::Sqrt(a) => write_call("sqrt", a, f),
        Node::Exp(a) => write_call("exp", a, f),
        Node::Ln(a) => write_call("ln", a, f),
        Node::Abs(a) => write_call("abs", a, f),
    }
}

fn write_binary(a: &Node, op: &str, b: &Node, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    write!(f, "(")?;
    write_node(a, f)?;
    write!(f, " {op} ")?;
    write_node(b, f)?;
    write!(f, ")")
}

fn write_call(name: &str, a: &Node, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    write!(f, "{name}(")?;
    write_node(a, f)?;
    write!(f, ")")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn parse(src: &str) -> Functional {
        Functional::parse_simple(src).expect("parse")
    }

    fn m(x: f64, y: f64, w: f64) -> Moments3 {
        Moments3::new(x, y, w)
    }

    #[test]
    fn robertson_schroedinger_value_and_gradient() {
        let f = parse("x*y - w^2");
        assert_relative_eq!(f.evaluate(&m(2.0, 3.0, 1.0)).unwrap(), 5.0);
        let g = f.gradient(&m(2.0, 3.0, 1.0)).unwrap();
        assert_eq!((g.dx, g.dy, g.dw), (3.0, 2.0, -2.0));
    }

    #[test]
    fn heisenberg_gradient() {
        let f = parse("sqrt(x*y)");
        let g = f.gradient(&m(1.0, 4.0, 0.0)).unwrap();
        assert_relative_eq!(g.value, 2.0);
        assert_relative_eq!(g.dx, 1.0, max_relative = 1e-14);
        assert_relative_eq!(g.dy, 0.25, max_relative = 1e-14);
        assert_eq!(g.dw, 0.0);
    }

    #[test]
    fn z_expands_to_third_quadrature_variance() {
        let f = parse("z");
        let g = f.gradient(&m(1.0, 2.0, -0.25)).unwrap();
        assert_relative_eq!(g.value, 2.5);
        assert_eq!((g.dx, g.dy, g.dw), (1.0, 1.0, 2.0));
        // x + y + z == 2x + 2y + 2w
        let h = parse("x + y + z");
        let direct = parse("2*x + 2*y + 2*w");
        let p = m(0.7, 1.3, -0.2);
        assert_relative_eq!(h.evaluate(&p).unwrap(), direct.evaluate(&p).unwrap());
    }

    #[test]
    fn named_parameters_bind_and_report_missing() {
        let mut params = BTreeMap::new();
        params.insert("mu".to_string(), 2.0);
        let f = Functional::parse("mu*x + nu*y", &params).unwrap();
        let err = f.evaluate(&m(1.0, 1.0, 0.0)).unwrap_err();
        assert_eq!(err, ExprError::UnboundParameter { name: "nu".into() });

        params.insert("nu".to_string(), 3.0);
        let f = Functional::parse("mu*x + nu*y", &params).unwrap();
        assert_relative_eq!(f.evaluate(&m(1.0, 1.0, 0.0)).unwrap(), 5.0);
    }

    #[test]
    fn constants_and_hbar_default() {
        let f = parse("hbar/2");
        assert_relative_eq!(f.evaluate(&m(1.0, 1.0, 0.0)).unwrap(), 0.5);
        let mut params = BTreeMap::new();
        params.insert("hbar".to_string(), 2.0);
        let f2 = Functional::parse("hbar/2", &params).unwrap();
        assert_relative_eq!(f2.evaluate(&m(1.0, 1.0, 0.0)).unwrap(), 1.0);
        let g = parse("pi + e");
        assert_relative_eq!(
            g.evaluate(&m(1.0, 1.0, 0.0)).unwrap(),
            std::f64::consts::PI + std::f64::consts::E
        );
    }

    #[test]
    fn precedence_and_unary_minus() {
        let f = parse("-x^2 + 2*x*y - w");
        // -(x^2), not (-x)^2
        assert_relative_eq!(f.evaluate(&m(3.0, 1.0, 0.5)).unwrap(), -9.0 + 6.0 - 0.5);
        let g = parse("2^-2");
        assert_relative_eq!(g.evaluate(&m(1.0, 1.0, 0.0)).unwrap(), 0.25);
        let h = parse("x^(1/2)");
        assert_relative_eq!(h.evaluate(&m(9.0, 1.0, 0.0)).unwrap(), 3.0);
    }

    #[test]
    fn scientific_notation_literals() {
        let f = parse("1e-3*x + 2.5E2");
        assert_relative_eq!(f.evaluate(&m(1000.0, 1.0, 0.0)).unwrap(), 251.0);
    }

    #[test]
    fn abs_kink_and_branches() {
        let f = parse("sqrt(x*y) - 0.5*abs(w)");
        assert!(f.uses_abs_w());
        let at_kink = m(1.0, 1.0, 0.0);
        assert!(matches!(
            f.gradient(&at_kink),
            Err(ExprError::NonDifferentiable { .. })
        ));
        let g = f.gradient_lenient(&at_kink).unwrap();
        assert_relative_eq!(g.dw, -0.5);
        // Off the kink both agree with the pinned branch.
        let off = m(1.0, 1.0, -0.3);
        let strict = f.gradient(&off).unwrap();
        let pinned = f.pin_abs(AbsBranch::NonPositiveW);
        assert!(!pinned.uses_abs_w());
        let gp = pinned.gradient(&off).unwrap();
        assert_relative_eq!(strict.dw, gp.dw);
        assert_relative_eq!(strict.value, gp.value);
        // The branch predicate tracks the sign convention.
        assert!(AbsBranch::NonPositiveW.admits(-0.3, 1.0));
        assert!(!AbsBranch::NonPositiveW.admits(0.3, 1.0));
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(
            parse("ln(w)").evaluate(&m(1.0, 1.0, -1.0)),
            Err(ExprError::Domain { .. })
        ));
        assert!(matches!(
            parse("sqrt(w)").evaluate(&m(1.0, 1.0, -1.0)),
            Err(ExprError::Domain { .. })
        ));
        assert!(matches!(
            parse("w^0.5").evaluate(&m(1.0, 1.0, -1.0)),
            Err(ExprError::Domain { .. })
        ));
        assert!(matches!(
            parse("1/(x - 1)").evaluate(&m(1.0, 1.0, 0.0)),
            Err(ExprError::Domain { .. })
        ));
        assert!(matches!(
            parse("exp(1/x)").evaluate(&m(1e-9, 1.0, 0.0)),
            Err(ExprError::Domain { .. })
        ));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match Functional::parse_simple("x + * y") {
            Err(ExprError::Syntax { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("expected syntax error, got {other:?}"),
        }
        match Functional::parse_simple("foo(x)") {
            Err(ExprError::UnknownFunction { name, pos }) => {
                assert_eq!(name, "foo");
                assert_eq!(pos, 0);
            }
            other => panic!("expected unknown function, got {other:?}"),
        }
        assert!(Functional::parse_simple("x + y)").is_err());
        assert!(Functional::parse_simple("").is_err());
        assert!(Functional::parse_simple("x @ y").is_err());
    }

    #[test]
    fn pow_function_form() {
        let f = parse("pow(x, 3)");
        let g = f.gradient(&m(2.0, 1.0, 0.0)).unwrap();
        assert_relative_eq!(g.value, 8.0);
        assert_relative_eq!(g.dx, 12.0);
    }

    #[test]
    fn parameter_exponents_differentiate() {
        let mut params = BTreeMap::new();
        params.insert("m".to_string(), 3.0);
        let f = Functional::parse("x^m", &params).unwrap();
        let g = f.gradient(&m(2.0, 1.0, 0.0)).unwrap();
        assert_relative_eq!(g.value, 8.0);
        assert_relative_eq!(g.dx, 12.0, max_relative = 1e-14);
    }

    #[test]
    fn display_round_trips() {
        for src in [
            "x*y - w^2",
            "sqrt(x*y) - 0.5*abs(w)",
            "x + mu*exp(y/nu)",
            "-x^2 + 2*x*y/w - z",
            "pow(x, 0.5) + 1e-3",
        ] {
            let mut params = BTreeMap::new();
            params.insert("mu".to_string(), 1.5);
            params.insert("nu".to_string(), 0.5);
            let f = Functional::parse(src, &params).unwrap();
            let printed = f.to_string();
            let g = Functional::parse(&printed, &params)
                .unwrap_or_else(|e| panic!("reparse of `{printed}` failed: {e}"));
            let p = m(1.3, 0.8, 0.21);
            assert_relative_eq!(
                f.evaluate(&p).unwrap(),
                g.evaluate(&p).unwrap(),
                max_relative = 1e-15
            );
        }
    }
}
