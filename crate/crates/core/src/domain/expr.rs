//! Field expressions: a small recursive-descent parser, a pretty printer that
//! round-trips, symbolic differentiation, and two evaluators (a compiled
//! stack machine for the hot path and a recursive one used as a cross-check).

use std::fmt;

use super::interval::{Interval, IntervalError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Zero-based variable index (`x1` is `Var(0)`).
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("{kind} at position {position}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// Byte offset into the source; equal to its length for end of input.
    pub position: usize,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unexpected character {0:?}")]
    UnexpectedChar(char),
    #[error("unexpected {0}")]
    UnexpectedToken(String),
    #[error("unknown identifier {0:?}")]
    UnknownIdentifier(String),
    #[error("{func} takes 1 argument, found {found}")]
    Arity { func: &'static str, found: usize },
    #[error("exponent must be an integer literal")]
    BadExponent,
    #[error("malformed number {0:?}")]
    BadNumber(String),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&b) = bytes.get(self.pos) else {
            return Ok((Tok::End, start));
        };
        if b.is_ascii_digit() || b == b'.' {
            while self.pos < bytes.len()
                && (bytes[self.pos].is_ascii_digit() || bytes[self.pos] == b'.')
            {
                self.pos += 1;
            }
            if self.pos < bytes.len() && (bytes[self.pos] == b'e' || bytes[self.pos] == b'E') {
                let mut look = self.pos + 1;
                if look < bytes.len() && (bytes[look] == b'+' || bytes[look] == b'-') {
                    look += 1;
                }
                if look < bytes.len() && bytes[look].is_ascii_digit() {
                    self.pos = look;
                    while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                }
            }
            let text = &self.src[start..self.pos];
            let v: f64 = text.parse().map_err(|_| ParseError {
                kind: ParseErrorKind::BadNumber(text.to_string()),
                position: start,
            })?;
            return Ok((Tok::Num(v), start));
        }
        if b.is_ascii_alphabetic() || b == b'_' {
            while self.pos < bytes.len()
                && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_')
            {
                self.pos += 1;
            }
            return Ok((Tok::Ident(self.src[start..self.pos].to_string()), start));
        }
        if b"+-*/^(),".contains(&b) {
            self.pos += 1;
            return Ok((Tok::Op(b as char), start));
        }
        let c = self.src[start..].chars().next().unwrap();
        Err(ParseError {
            kind: ParseErrorKind::UnexpectedChar(c),
            position: start,
        })
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    tok_pos: usize,
    nvars: usize,
}

/// Parses one component expression over the variables `x1..x{nvars}`.
pub fn parse_expr(src: &str, nvars: usize) -> Result<Expr, ParseError> {
    let mut lexer = Lexer { src, pos: 0 };
    let (tok, tok_pos) = lexer.next()?;
    let mut p = Parser {
        lexer,
        tok,
        tok_pos,
        nvars,
    };
    let e = p.expr()?;
    match p.tok {
        Tok::End => Ok(e),
        _ => Err(p.unexpected()),
    }
}

impl Parser<'_> {
    fn bump(&mut self) -> Result<(), ParseError> {
        let (t, pos) = self.lexer.next()?;
        self.tok = t;
        self.tok_pos = pos;
        Ok(())
    }

    fn unexpected(&self) -> ParseError {
        let kind = match &self.tok {
            Tok::End => ParseErrorKind::UnexpectedEnd,
            Tok::Num(v) => ParseErrorKind::UnexpectedToken(format!("number {v}")),
            Tok::Ident(s) => ParseErrorKind::UnexpectedToken(format!("identifier {s:?}")),
            Tok::Op(c) => ParseErrorKind::UnexpectedToken(format!("{c:?}")),
        };
        ParseError {
            kind,
            position: self.tok_pos,
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.tok == Tok::Op(c) {
            self.bump()
        } else {
            Err(self.unexpected())
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.tok {
                Tok::Op('+') => {
                    self.bump()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Op('-') => {
                    self.bump()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.tok {
                Tok::Op('*') => {
                    self.bump()?;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Op('/') => {
                    self.bump()?;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.tok == Tok::Op('-') {
            self.bump()?;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let mut base = self.primary()?;
        while self.tok == Tok::Op('^') {
            self.bump()?;
            let negative = self.tok == Tok::Op('-');
            if negative {
                self.bump()?;
            }
            let Tok::Num(v) = self.tok else {
                return Err(match self.tok {
                    Tok::End => self.unexpected(),
                    _ => ParseError {
                        kind: ParseErrorKind::BadExponent,
                        position: self.tok_pos,
                    },
                });
            };
            if v.fract() != 0.0 || v > i32::MAX as f64 {
                return Err(ParseError {
                    kind: ParseErrorKind::BadExponent,
                    position: self.tok_pos,
                });
            }
            self.bump()?;
            let k = if negative { -(v as i32) } else { v as i32 };
            base = Expr::Pow(Box::new(base), k);
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.tok.clone() {
            Tok::Num(v) => {
                self.bump()?;
                Ok(Expr::Num(v))
            }
            Tok::Op('(') => {
                self.bump()?;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let pos = self.tok_pos;
                self.bump()?;
                if let Some(f) = Func::from_name(&name) {
                    self.expect('(')?;
                    let mut args = vec![self.expr()?];
                    while self.tok == Tok::Op(',') {
                        self.bump()?;
                        args.push(self.expr()?);
                    }
                    self.expect(')')?;
                    if args.len() != 1 {
                        return Err(ParseError {
                            kind: ParseErrorKind::Arity {
                                func: f.name(),
                                found: args.len(),
                            },
                            position: pos,
                        });
                    }
                    return Ok(Expr::Call(f, Box::new(args.pop().unwrap())));
                }
                if let Some(i) = name.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
                    if (1..=self.nvars).contains(&i) && !name[1..].starts_with('0') {
                        return Ok(Expr::Var(i - 1));
                    }
                }
                Err(ParseError {
                    kind: ParseErrorKind::UnknownIdentifier(name),
                    position: pos,
                })
            }
            _ => Err(self.unexpected()),
        }
    }
}

/// Fully parenthesized form; parsing it yields an equal tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => {
                write!(f, "(-{})", -v)
            }
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, k) => write!(f, "({a}^{k})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("square root of negative value {0}")]
    NegativeSqrt(f64),
    #[error("expression evaluated to a non-finite value")]
    NonFinite,
    #[error("point outside the sampled region")]
    OutOfBox,
}

impl Expr {
    /// Recursive evaluation, used as the reference evaluator.
    pub fn eval_tree(&self, x: &[f64]) -> Result<f64, EvalError> {
        let v = self.eval_raw(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    fn eval_raw(&self, x: &[f64]) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::Var(i) => x[*i],
            Expr::Neg(a) => -a.eval_raw(x)?,
            Expr::Add(a, b) => a.eval_raw(x)? + b.eval_raw(x)?,
            Expr::Sub(a, b) => a.eval_raw(x)? - b.eval_raw(x)?,
            Expr::Mul(a, b) => a.eval_raw(x)? * b.eval_raw(x)?,
            Expr::Div(a, b) => a.eval_raw(x)? / b.eval_raw(x)?,
            Expr::Pow(a, k) => a.eval_raw(x)?.powi(*k),
            Expr::Call(func, a) => apply(*func, a.eval_raw(x)?)?,
        })
    }

    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Num(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.max_var(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.max_var().max(b.max_var())
            }
        }
    }

    /// Partial derivative with respect to variable `j`, lightly simplified.
    pub fn derivative(&self, j: usize) -> Expr {
        use Expr::*;
        match self {
            Num(_) => Num(0.0),
            Var(i) => Num(if *i == j { 1.0 } else { 0.0 }),
            Neg(a) => neg(a.derivative(j)),
            Add(a, b) => add(a.derivative(j), b.derivative(j)),
            Sub(a, b) => sub(a.derivative(j), b.derivative(j)),
            Mul(a, b) => add(
                mul(a.derivative(j), (**b).clone()),
                mul((**a).clone(), b.derivative(j)),
            ),
            Div(a, b) => {
                let num = sub(
                    mul(a.derivative(j), (**b).clone()),
                    mul((**a).clone(), b.derivative(j)),
                );
                div(num, pow((**b).clone(), 2))
            }
            Pow(a, k) => {
                if *k == 0 {
                    Num(0.0)
                } else {
                    mul(
                        mul(Num(*k as f64), pow((**a).clone(), k - 1)),
                        a.derivative(j),
                    )
                }
            }
            Call(f, a) => {
                let inner = a.derivative(j);
                let outer = match f {
                    Func::Sin => Call(Func::Cos, a.clone()),
                    Func::Cos => neg(Call(Func::Sin, a.clone())),
                    Func::Exp => Call(Func::Exp, a.clone()),
                    Func::Sqrt => div(Num(0.5), Call(Func::Sqrt, a.clone())),
                };
                mul(outer, inner)
            }
        }
    }

    /// Interval enclosure of the expression over the box `x`.
    pub fn eval_interval(&self, x: &[Interval]) -> Result<Interval, IntervalError> {
        Ok(match self {
            Expr::Num(v) => Interval::point(*v),
            Expr::Var(i) => x[*i],
            Expr::Neg(a) => -a.eval_interval(x)?,
            Expr::Add(a, b) => a.eval_interval(x)? + b.eval_interval(x)?,
            Expr::Sub(a, b) => a.eval_interval(x)? - b.eval_interval(x)?,
            Expr::Mul(a, b) => a.eval_interval(x)? * b.eval_interval(x)?,
            Expr::Div(a, b) => a.eval_interval(x)?.div(b.eval_interval(x)?)?,
            Expr::Pow(a, k) => a.eval_interval(x)?.powi(*k)?,
            Expr::Call(f, a) => {
                let v = a.eval_interval(x)?;
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                    Func::Sqrt => v.sqrt()?,
                }
            }
        })
    }
}

fn apply(f: Func, v: f64) -> Result<f64, EvalError> {
    Ok(match f {
        Func::Sin => v.sin(),
        Func::Cos => v.cos(),
        Func::Exp => v.exp(),
        Func::Sqrt => {
            if v < 0.0 {
                return Err(EvalError::NegativeSqrt(v));
            }
            v.sqrt()
        }
    })
}

fn is_num(e: &Expr, v: f64) -> bool {
    matches!(e, Expr::Num(x) if *x == v)
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(v) => Expr::Num(-v),
        Expr::Neg(inner) => *inner,
        a => Expr::Neg(Box::new(a)),
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x + y),
        (a, b) if is_num(&a, 0.0) => b,
        (a, b) if is_num(&b, 0.0) => a,
        (a, b) => Expr::Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x - y),
        (a, b) if is_num(&b, 0.0) => a,
        (a, b) if is_num(&a, 0.0) => neg(b),
        (a, b) => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x * y),
        (a, b) if is_num(&a, 0.0) || is_num(&b, 0.0) => Expr::Num(0.0),
        (a, b) if is_num(&a, 1.0) => b,
        (a, b) if is_num(&b, 1.0) => a,
        (a, b) => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (a, b) if is_num(&a, 0.0) && !is_num(&b, 0.0) => Expr::Num(0.0),
        (a, b) if is_num(&b, 1.0) => a,
        (a, b) => Expr::Div(Box::new(a), Box::new(b)),
    }
}

fn pow(a: Expr, k: i32) -> Expr {
    match (a, k) {
        (_, 0) => Expr::Num(1.0),
        (a, 1) => a,
        (Expr::Num(v), k) => Expr::Num(v.powi(k)),
        (a, k) => Expr::Pow(Box::new(a), k),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Op {
    Num(f64),
    Var(u8),
    Neg,
    Add,
    Sub,
    Mul,
    Div,
    Pow(i32),
    Call(Func),
}

/// Postfix form of an expression, evaluated with an explicit stack.
#[derive(Clone, Debug, PartialEq)]
pub struct CompiledExpr {
    ops: Vec<Op>,
    depth: usize,
}

impl CompiledExpr {
    pub fn new(e: &Expr) -> Self {
        let mut ops = Vec::new();
        emit(e, &mut ops);
        let mut depth = 0usize;
        let mut max = 0usize;
        for op in &ops {
            match op {
                Op::Num(_) | Op::Var(_) => depth += 1,
                Op::Add | Op::Sub | Op::Mul | Op::Div => depth -= 1,
                _ => {}
            }
            max = max.max(depth);
        }
        Self { ops, depth: max }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        let mut inline = [0.0f64; 32];
        let mut heap;
        let stack: &mut [f64] = if self.depth <= inline.len() {
            &mut inline
        } else {
            heap = vec![0.0; self.depth];
            &mut heap
        };
        let mut top = 0usize;
        for op in &self.ops {
            match *op {
                Op::Num(v) => {
                    stack[top] = v;
                    top += 1;
                }
                Op::Var(i) => {
                    stack[top] = x[i as usize];
                    top += 1;
                }
                Op::Neg => stack[top - 1] = -stack[top - 1],
                Op::Pow(k) => stack[top - 1] = stack[top - 1].powi(k),
                Op::Call(f) => stack[top - 1] = apply(f, stack[top - 1])?,
                Op::Add | Op::Sub | Op::Mul | Op::Div => {
                    top -= 1;
                    let b = stack[top];
                    let a = &mut stack[top - 1];
                    match op {
                        Op::Add => *a += b,
                        Op::Sub => *a -= b,
                        Op::Mul => *a *= b,
                        _ => *a /= b,
                    }
                }
            }
        }
        let v = stack[0];
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }
}

fn emit(e: &Expr, ops: &mut Vec<Op>) {
    match e {
        Expr::Num(v) => ops.push(Op::Num(*v)),
        Expr::Var(i) => ops.push(Op::Var(*i as u8)),
        Expr::Neg(a) => {
            emit(a, ops);
            ops.push(Op::Neg);
        }
        Expr::Pow(a, k) => {
            emit(a, ops);
            ops.push(Op::Pow(*k));
        }
        Expr::Call(f, a) => {
            emit(a, ops);
            ops.push(Op::Call(*f));
        }
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
            emit(a, ops);
            emit(b, ops);
            ops.push(match e {
                Expr::Add(..) => Op::Add,
                Expr::Sub(..) => Op::Sub,
                Expr::Mul(..) => Op::Mul,
                _ => Op::Div,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn precedence_and_associativity() {
        let e = parse_expr("x1 - 2", 2).unwrap();
        assert_eq!(
            e,
            Expr::Sub(Box::new(Expr::Var(0)), Box::new(Expr::Num(2.0)))
        );
        let e = parse_expr("1 - x1^2 - x2^2", 2).unwrap();
        assert_eq!(e.eval_tree(&[0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(e.to_string(), "((1 - (x1^2)) - (x2^2))");
        // Unary minus binds looser than ^.
        assert_eq!(
            parse_expr("-x1^2", 1).unwrap().eval_tree(&[3.0]).unwrap(),
            -9.0
        );
        assert_eq!(
            parse_expr("8/4/2", 1).unwrap().eval_tree(&[0.0]).unwrap(),
            1.0
        );
        assert_eq!(
            parse_expr("2*-x1", 1).unwrap().eval_tree(&[3.0]).unwrap(),
            -6.0
        );
        assert_eq!(
            parse_expr("x1^-2", 1).unwrap().eval_tree(&[2.0]).unwrap(),
            0.25
        );
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_expr("sin(x1*x2", 2).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnexpectedEnd);
        assert_eq!(err.position, 9);
        let err = parse_expr("x1 + y", 2).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownIdentifier("y".into()));
        assert_eq!(err.position, 5);
        assert!(matches!(
            parse_expr("x3", 2).unwrap_err().kind,
            ParseErrorKind::UnknownIdentifier(_)
        ));
        assert!(matches!(
            parse_expr("sin(x1, x2)", 2).unwrap_err().kind,
            ParseErrorKind::Arity {
                func: "sin",
                found: 2
            }
        ));
        assert_eq!(
            parse_expr("x1^1.5", 1).unwrap_err().kind,
            ParseErrorKind::BadExponent
        );
        assert!(matches!(
            parse_expr("x1 $ 2", 1).unwrap_err().kind,
            ParseErrorKind::UnexpectedChar('$')
        ));
        assert!(parse_expr("(x1", 1).is_err());
        assert!(parse_expr("x1 x2", 2).is_err());
    }

    #[test]
    fn evaluation_errors() {
        let e = parse_expr("sqrt(x1)", 1).unwrap();
        assert_eq!(e.eval_tree(&[-1.0]), Err(EvalError::NegativeSqrt(-1.0)));
        assert_eq!(
            CompiledExpr::new(&e).eval(&[-1.0]),
            Err(EvalError::NegativeSqrt(-1.0))
        );
        let e = parse_expr("1/x1", 1).unwrap();
        assert_eq!(
            CompiledExpr::new(&e).eval(&[0.0]),
            Err(EvalError::NonFinite)
        );
    }

    #[test]
    fn derivatives_match_difference_quotients() {
        let e = parse_expr("sin(x1*x2) + exp(x1)/(1 + x2^2) - sqrt(x1 + 3)", 2).unwrap();
        let x = [0.7, -0.4];
        for j in 0..2 {
            let d = e.derivative(j).eval_tree(&x).unwrap();
            let h = 1e-6;
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            let fd = (e.eval_tree(&xp).unwrap() - e.eval_tree(&xm).unwrap()) / (2.0 * h);
            assert!((d - fd).abs() < 1e-7, "{d} vs {fd}");
        }
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0u32..1000).prop_map(|v| Expr::Num(v as f64 / 8.0)),
            (0usize..3).prop_map(Expr::Var),
        ];
        leaf.prop_recursive(5, 40, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Div(Box::new(a), Box::new(b))),
                (inner.clone(), -3i32..4).prop_map(|(a, k)| Expr::Pow(Box::new(a), k)),
                inner
                    .clone()
                    .prop_map(|a| Expr::Call(Func::Sin, Box::new(a))),
                inner.prop_map(|a| Expr::Call(Func::Exp, Box::new(a))),
            ]
        })
    }

    proptest! {
        #[test]
        fn pretty_print_round_trips(e in arb_expr()) {
            let text = e.to_string();
            prop_assert_eq!(parse_expr(&text, 3).unwrap(), e);
        }

        #[test]
        fn compiled_matches_tree(e in arb_expr(), x in proptest::array::uniform3(-2.0f64..2.0)) {
            let tree = e.eval_tree(&x);
            let compiled = CompiledExpr::new(&e).eval(&x);
            match (tree, compiled) {
                (Ok(a), Ok(b)) => prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs())),
                (Err(_), Err(_)) => {}
                (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
            }
        }
    }
}
