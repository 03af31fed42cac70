//! The corpus expression language.
//!
//! ```text
//! expr     = term { ( "+" | "-" ) term } ;
//! term     = unary { ( "*" | "/" ) unary } ;
//! unary    = "-" unary | power ;
//! power    = primary { "^" exponent } ;
//! exponent = [ "-" ] integer | "(" [ "-" ] integer ")" ;
//! primary  = integer | "i" | "q" | unit | ident | "(" expr ")" ;
//! unit     = "e" "(" integer "," integer ")" ;
//! ident    = letter { letter | digit | "_" } ;
//! ```
//!
//! `i`, `q` and `e` are reserved. Whitespace is insignificant and
//! multiplication is always explicit.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{ExprError, ParseError};
use crate::scalar::{Coefficient, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }
}

/// Parsed expression. Parentheses are reflected in the tree shape only.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Int(BigInt),
    I,
    Q,
    Ident(String),
    /// Matrix unit `e(i,j)`, 1-based.
    Unit(usize, usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i64),
}

impl Expr {
    pub fn int(n: i64) -> Expr {
        Expr::Int(BigInt::from(n))
    }

    pub fn ident(name: &str) -> Expr {
        Expr::Ident(name.to_string())
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn negate(a: Expr) -> Expr {
        Expr::Neg(Box::new(a))
    }

    pub fn pow(a: Expr, k: i64) -> Expr {
        Expr::Pow(Box::new(a), k)
    }

    /// Identifiers in first-occurrence order, without repeats.
    pub fn identifiers(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_idents(&mut out);
        out
    }

    fn collect_idents(&self, out: &mut Vec<String>) {
        match self {
            Expr::Ident(n) => {
                if !out.contains(n) {
                    out.push(n.clone());
                }
            }
            Expr::Neg(a) | Expr::Pow(a, _) => a.collect_idents(out),
            Expr::Bin(_, a, b) => {
                a.collect_idents(out);
                b.collect_idents(out);
            }
            Expr::Int(_) | Expr::I | Expr::Q | Expr::Unit(..) => {}
        }
    }

    pub fn has_unit(&self) -> bool {
        match self {
            Expr::Unit(..) => true,
            Expr::Neg(a) | Expr::Pow(a, _) => a.has_unit(),
            Expr::Bin(_, a, b) => a.has_unit() || b.has_unit(),
            _ => false,
        }
    }

    fn has_ident_in(&self, names: &[&str]) -> bool {
        match self {
            Expr::Ident(n) => names.contains(&n.as_str()),
            Expr::Neg(a) | Expr::Pow(a, _) => a.has_ident_in(names),
            Expr::Bin(_, a, b) => a.has_ident_in(names) || b.has_ident_in(names),
            _ => false,
        }
    }

    fn prec(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.prec() < min {
            f.write_str("(")?;
            self.write_at(f, 0)?;
            return f.write_str(")");
        }
        match self {
            Expr::Int(n) => write!(f, "{n}"),
            Expr::I => f.write_str("i"),
            Expr::Q => f.write_str("q"),
            Expr::Ident(n) => f.write_str(n),
            Expr::Unit(i, j) => write!(f, "e({i},{j})"),
            Expr::Neg(a) => {
                f.write_str("-")?;
                a.write_at(f, 3)
            }
            Expr::Bin(op, a, b) => {
                let (l, r) = match op {
                    BinOp::Add | BinOp::Sub => (1, 2),
                    BinOp::Mul | BinOp::Div => (2, 3),
                };
                a.write_at(f, l)?;
                match op {
                    BinOp::Add | BinOp::Sub => write!(f, " {} ", op.symbol())?,
                    _ => f.write_str(op.symbol())?,
                }
                b.write_at(f, r)
            }
            Expr::Pow(a, k) => {
                a.write_at(f, 4)?;
                write!(f, "^{k}")
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Int(n) => format!("integer `{n}`"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let c = bytes[pos];
        if c.is_ascii_whitespace() {
            pos += 1;
            continue;
        }
        let start = pos;
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b'0'..=b'9' => {
                while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                    pos += 1;
                }
                out.push((start, Tok::Int(text[start..pos].parse().expect("digits"))));
                continue;
            }
            b'a'..=b'z' | b'A'..=b'Z' => {
                while pos < bytes.len() && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_') {
                    pos += 1;
                }
                out.push((start, Tok::Ident(text[start..pos].to_string())));
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(ParseError {
                    offset: start,
                    expected: vec!["a token".into()],
                    found: format!("character `{ch}`"),
                });
            }
        };
        out.push((start, tok));
        pos += 1;
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if t != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &[&str]) -> Result<T, ParseError> {
        Err(ParseError {
            offset: self.offset(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(),
        })
    }

    fn expect(&mut self, t: Tok, name: &str) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.fail(&[name])
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::bin(op, lhs, self.term()?);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::bin(op, lhs, self.unary()?);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::negate(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let mut base = self.primary()?;
        while *self.peek() == Tok::Caret {
            self.bump();
            let k = self.exponent()?;
            base = Expr::pow(base, k);
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i64, ParseError> {
        let paren = *self.peek() == Tok::LParen;
        if paren {
            self.bump();
        }
        let neg = *self.peek() == Tok::Minus;
        if neg {
            self.bump();
        }
        let at = self.offset();
        let k = match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                n.to_i64().ok_or_else(|| ParseError {
                    offset: at,
                    expected: vec!["an exponent that fits in 64 bits".into()],
                    found: format!("integer `{n}`"),
                })?
            }
            _ => return self.fail(&["integer exponent"]),
        };
        if paren {
            self.expect(Tok::RParen, "`)`")?;
        }
        Ok(if neg { -k } else { k })
    }

    fn index(&mut self) -> Result<usize, ParseError> {
        let at = self.offset();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                n.to_usize().ok_or_else(|| ParseError {
                    offset: at,
                    expected: vec!["a small index".into()],
                    found: format!("integer `{n}`"),
                })
            }
            _ => self.fail(&["integer index"]),
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::Int(n))
            }
            Tok::Ident(name) => {
                self.bump();
                match name.as_str() {
                    "i" => Ok(Expr::I),
                    "q" => Ok(Expr::Q),
                    "e" => {
                        self.expect(Tok::LParen, "`(` after matrix unit `e`")?;
                        let i = self.index()?;
                        self.expect(Tok::Comma, "`,`")?;
                        let j = self.index()?;
                        self.expect(Tok::RParen, "`)`")?;
                        Ok(Expr::Unit(i, j))
                    }
                    _ => Ok(Expr::Ident(name)),
                }
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            _ => self.fail(&["integer", "identifier", "`(`", "`-`"]),
        }
    }
}

/// Parses one expression; the whole input must be consumed.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.fail(&["operator", "end of input"]);
    }
    Ok(e)
}

/// Parameter bindings.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParamEnv {
    vals: BTreeMap<String, Scalar>,
}

impl ParamEnv {
    pub fn new() -> Self {
        ParamEnv::default()
    }

    pub fn with(mut self, name: &str, v: Scalar) -> Self {
        self.insert(name, v);
        self
    }

    pub fn insert(&mut self, name: &str, v: Scalar) {
        self.vals.insert(name.to_string(), v);
    }

    pub fn get(&self, name: &str) -> Option<&Scalar> {
        self.vals.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Scalar)> {
        self.vals.iter()
    }

    pub fn len(&self) -> usize {
        self.vals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vals.is_empty()
    }
}

/// Evaluates a scalar expression.
pub fn eval(e: &Expr, env: &ParamEnv) -> Result<Scalar, ExprError> {
    Ok(match e {
        Expr::Int(n) => Scalar::constant(Coefficient::real(n.clone().into())),
        Expr::I => Scalar::i(),
        Expr::Q => Scalar::q(),
        Expr::Ident(n) => env.get(n).cloned().ok_or_else(|| ExprError::Unbound(n.clone()))?,
        Expr::Unit(..) => return Err(ExprError::UnitInScalar),
        Expr::Neg(a) => -&eval(a, env)?,
        Expr::Bin(op, a, b) => {
            let x = eval(a, env)?;
            let y = eval(b, env)?;
            match op {
                BinOp::Add => &x + &y,
                BinOp::Sub => &x - &y,
                BinOp::Mul => &x * &y,
                BinOp::Div => x.checked_div(&y)?,
            }
        }
        Expr::Pow(a, k) => eval(a, env)?.pow(*k)?,
    })
}

/// Parses and evaluates in one step.
pub fn eval_str(text: &str, env: &ParamEnv) -> Result<Scalar, ExprError> {
    eval(&parse(text)?, env)
}

/// A matrix written as a linear combination of units.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatExpr {
    pub n: usize,
    pub terms: Vec<MatTerm>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatTerm {
    pub coef: Expr,
    pub row: usize,
    pub col: usize,
}

fn times(a: Expr, b: Expr) -> Expr {
    let one = Expr::int(1);
    if a == one {
        b
    } else if b == one {
        a
    } else {
        Expr::bin(BinOp::Mul, a, b)
    }
}

fn is_zero_literal(e: &Expr) -> bool {
    matches!(e, Expr::Int(n) if n.is_zero())
}

/// Expands `e` into (coefficient, payload) terms where payload comes from
/// the leaves accepted by `leaf`; payloads multiply through `join`.
fn expand<P: Clone>(
    e: &Expr,
    leaf: &dyn Fn(&Expr) -> Option<P>,
    join: &dyn Fn(&P, &P) -> Option<P>,
    has_leaf: &dyn Fn(&Expr) -> bool,
) -> Result<Vec<(Expr, P)>, ExprError> {
    if let Some(p) = leaf(e) {
        return Ok(vec![(Expr::int(1), p)]);
    }
    let scale = |ts: Vec<(Expr, P)>, f: &dyn Fn(Expr) -> Expr| ts.into_iter().map(|(c, p)| (f(c), p)).collect();
    match e {
        Expr::Neg(a) => Ok(scale(expand(a, leaf, join, has_leaf)?, &|c| Expr::negate(c))),
        Expr::Bin(op @ (BinOp::Add | BinOp::Sub), a, b) => {
            let mut out = expand(a, leaf, join, has_leaf)?;
            let rhs = expand(b, leaf, join, has_leaf)?;
            if *op == BinOp::Sub {
                out.extend(scale(rhs, &|c| Expr::negate(c)));
            } else {
                out.extend(rhs);
            }
            Ok(out)
        }
        Expr::Bin(BinOp::Mul, a, b) => match (has_leaf(a), has_leaf(b)) {
            (false, true) => {
                let s = (**a).clone();
                Ok(scale(expand(b, leaf, join, has_leaf)?, &|c| times(s.clone(), c)))
            }
            (true, false) => {
                let s = (**b).clone();
                Ok(scale(expand(a, leaf, join, has_leaf)?, &|c| times(c, s.clone())))
            }
            (true, true) => {
                let l = expand(a, leaf, join, has_leaf)?;
                let r = expand(b, leaf, join, has_leaf)?;
                let mut out = Vec::new();
                for (ca, pa) in &l {
                    for (cb, pb) in &r {
                        let p = join(pa, pb).ok_or(ExprError::NonLinear)?;
                        out.push((times(ca.clone(), cb.clone()), p));
                    }
                }
                Ok(out)
            }
            (false, false) => Err(ExprError::MissingWord),
        },
        Expr::Bin(BinOp::Div, a, b) if has_leaf(a) && !has_leaf(b) => {
            let s = (**b).clone();
            Ok(scale(expand(a, leaf, join, has_leaf)?, &|c| Expr::bin(BinOp::Div, c, s.clone())))
        }
        _ if has_leaf(e) => Err(ExprError::NonLinear),
        _ if is_zero_literal(e) => Ok(Vec::new()),
        _ => Err(ExprError::MissingWord),
    }
}

/// Merges terms with equal payloads, keeping first-occurrence order.
fn merge<P: PartialEq>(terms: Vec<(Expr, P)>) -> Vec<(Expr, P)> {
    let mut out: Vec<(Expr, P)> = Vec::new();
    for (c, p) in terms {
        if let Some(slot) = out.iter_mut().find(|(_, q)| *q == p) {
            let prev = std::mem::replace(&mut slot.0, Expr::int(0));
            slot.0 = Expr::bin(BinOp::Add, prev, c);
        } else {
            out.push((c, p));
        }
    }
    out
}

/// Parses a 4×4 matrix expression.
pub fn parse_matrix(text: &str) -> Result<MatExpr, ExprError> {
    parse_matrix_n(text, 4)
}

/// Parses an n×n matrix expression such as `q*e(1,3) - m*e(2,4)`.
/// The literal `0` denotes the zero matrix.
pub fn parse_matrix_n(text: &str, n: usize) -> Result<MatExpr, ExprError> {
    let ast = parse(text)?;
    let leaf = |e: &Expr| match e {
        Expr::Unit(i, j) => Some((*i, *j)),
        _ => None,
    };
    let join = |_: &(usize, usize), _: &(usize, usize)| None;
    let terms = expand(&ast, &leaf, &join, &Expr::has_unit)?;
    let mut out = Vec::new();
    for (coef, (row, col)) in merge(terms) {
        if row == 0 || col == 0 || row > n || col > n {
            return Err(ExprError::IndexOutOfRange(row, col, n));
        }
        if coef.has_unit() {
            return Err(ExprError::NonLinear);
        }
        out.push(MatTerm { coef, row, col });
    }
    Ok(MatExpr { n, terms: out })
}

/// Expands a relation expression into coefficient/word terms over the
/// given generator names. Words are lists of indices into `gens`.
pub fn parse_word_sum(text: &str, gens: &[&str]) -> Result<Vec<(Expr, Vec<usize>)>, ExprError> {
    let ast = parse(text)?;
    let leaf = |e: &Expr| match e {
        Expr::Ident(n) => gens.iter().position(|g| g == n).map(|k| vec![k]),
        _ => None,
    };
    let join = |a: &Vec<usize>, b: &Vec<usize>| Some([a.as_slice(), b.as_slice()].concat());
    let has = |e: &Expr| e.has_ident_in(gens);
    if ast.has_unit() {
        return Err(ExprError::NonLinear);
    }
    let terms = expand(&ast, &leaf, &join, &has)?;
    Ok(merge(terms))
}

/// Expands `text` as a linear combination of the identifiers accepted by
/// `is_symbol`, returning (coefficient, symbol) pairs in first-occurrence
/// order. The literal `0` gives an empty list.
pub fn parse_linear(text: &str, is_symbol: &dyn Fn(&str) -> bool) -> Result<Vec<(Expr, String)>, ExprError> {
    let ast = parse(text)?;
    if ast.has_unit() {
        return Err(ExprError::UnitInScalar);
    }
    let leaf = |e: &Expr| match e {
        Expr::Ident(n) if is_symbol(n) => Some(n.clone()),
        _ => None,
    };
    let join = |_: &String, _: &String| None;
    let has = |e: &Expr| e.identifiers().iter().any(|n| is_symbol(n));
    Ok(merge(expand(&ast, &leaf, &join, &has)?))
}

impl MatExpr {
    /// Identifiers used by coefficients.
    pub fn identifiers(&self) -> Vec<String> {
        let mut out = Vec::new();
        for t in &self.terms {
            t.coef.collect_idents(&mut out);
        }
        out
    }
}

impl fmt::Display for MatExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, t) in self.terms.iter().enumerate() {
            let (neg, body) = match &t.coef {
                Expr::Neg(inner) => (true, &**inner),
                c => (false, c),
            };
            if k == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            if *body != Expr::int(1) {
                body.write_at(f, 3)?;
                f.write_str("*")?;
            }
            write!(f, "e({},{})", t.row, t.col)?;
        }
        Ok(())
    }
}

/// True when `name` is usable as a parameter identifier.
pub fn is_param_name(name: &str) -> bool {
    let mut cs = name.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic())
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !matches!(name, "i" | "q" | "e")
}

/// Exact nonnegative integer literal value, if `e` is one.
pub fn as_int(e: &Expr) -> Option<i64> {
    match e {
        Expr::Int(n) if !n.is_negative() => n.to_i64(),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(pairs: &[(&str, i64)]) -> ParamEnv {
        let mut e = ParamEnv::new();
        for (k, v) in pairs {
            e.insert(k, Scalar::from_int(*v));
        }
        e
    }

    #[test]
    fn power_of_q() {
        assert_eq!(parse("q^2").unwrap(), Expr::pow(Expr::Q, 2));
        assert_eq!(parse("q^-2").unwrap(), Expr::pow(Expr::Q, -2));
        assert_eq!(parse("q^(-2)").unwrap(), Expr::pow(Expr::Q, -2));
    }

    #[test]
    fn precedence() {
        let e = parse("-q^2").unwrap();
        assert_eq!(e, Expr::negate(Expr::pow(Expr::Q, 2)));
        let e = parse("q*l*d").unwrap();
        assert_eq!(e, Expr::bin(BinOp::Mul, Expr::bin(BinOp::Mul, Expr::Q, Expr::ident("l")), Expr::ident("d")));
        let e = parse("(1-q)*m").unwrap();
        assert_eq!(e, Expr::bin(BinOp::Mul, Expr::bin(BinOp::Sub, Expr::int(1), Expr::Q), Expr::ident("m")));
        assert_eq!(parse("a-b-c").unwrap().to_string(), "a - b - c");
        assert_eq!(parse("a-(b-c)").unwrap().to_string(), "a - (b - c)");
        assert_eq!(parse("a/(b*c)").unwrap().to_string(), "a/(b*c)");
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        let err = parse("q *").unwrap_err();
        assert_eq!(err.offset, 3);
        assert!(err.expected.iter().any(|s| s == "identifier"));
        let err = parse("2 q").unwrap_err();
        assert_eq!(err.offset, 2);
        assert!(parse("q^a").is_err());
        assert!(parse("a $ b").is_err());
    }

    #[test]
    fn evaluation() {
        let v = eval_str("q^2/a", &env(&[("a", 3)])).unwrap();
        assert_eq!(v, (&Scalar::q() * &Scalar::q()).checked_div(&Scalar::from_int(3)).unwrap());
        assert_eq!(eval_str("b", &ParamEnv::new()), Err(ExprError::Unbound("b".into())));
        let v = eval_str("q*l*d", &env(&[("l", 2), ("d", 3)])).unwrap();
        assert_eq!(v, &Scalar::from_int(6) * &Scalar::q());
        assert_eq!(eval_str("1/(q-q)", &ParamEnv::new()), Err(ExprError::DivisionByZero));
        assert_eq!(eval_str("i*i", &ParamEnv::new()).unwrap(), Scalar::from_int(-1));
    }

    #[test]
    fn matrix_terms() {
        let m = parse_matrix("a*e(1,2)+b*e(2,3)+g*e(2,4)").unwrap();
        assert_eq!(m.terms.len(), 3);
        assert_eq!((m.terms[1].row, m.terms[1].col), (2, 3));
        let m = parse_matrix("1*e(1,1)+1*e(2,2)+1*e(3,3)+1*e(4,4)").unwrap();
        assert_eq!(m.terms.len(), 4);
        let m = parse_matrix("q*e(1,3) - m*e(2,4)").unwrap();
        assert_eq!(m.terms.len(), 2);
        assert_eq!(m.terms[1].coef, Expr::negate(Expr::ident("m")));
        assert!(parse_matrix("0").unwrap().terms.is_empty());
    }

    #[test]
    fn matrix_terms_merge_and_distribute() {
        let m = parse_matrix("e(1,1) + q*e(1,1) + (1-q)*(e(2,2)+e(3,3))").unwrap();
        assert_eq!(m.terms.len(), 3);
        assert_eq!(m.terms[0].coef.to_string(), "1 + q");
        let m = parse_matrix("e(1,2)/a").unwrap();
        assert_eq!(m.terms[0].coef.to_string(), "1/a");
    }

    #[test]
    fn matrix_errors() {
        assert_eq!(parse_matrix("e(5,1)"), Err(ExprError::IndexOutOfRange(5, 1, 4)));
        assert_eq!(parse_matrix("e(1,2)*e(2,3)"), Err(ExprError::NonLinear));
        assert_eq!(parse_matrix("e(1,1) + q"), Err(ExprError::MissingWord));
        assert_eq!(parse_matrix("q/e(1,1)"), Err(ExprError::NonLinear));
    }

    #[test]
    fn word_sums() {
        let gens = ["c11", "c12", "c21", "c22"];
        let t = parse_word_sum("c11*c22 - c22*c11 - (1-q)*c12*c21", &gens).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t[0].1, vec![0, 3]);
        assert_eq!(t[2].1, vec![1, 2]);
        assert_eq!(t[2].0.to_string(), "-(1 - q)");
        assert!(parse_word_sum("q", &gens).is_err());
    }

    #[test]
    fn matexpr_display_reparses() {
        let m = parse_matrix("q*e(1,3) - m*e(2,4) + (1-q)*e(3,3)").unwrap();
        let s = m.to_string();
        assert_eq!(s, "q*e(1,3) - m*e(2,4) + (1 - q)*e(3,3)");
        assert_eq!(parse_matrix(&s).unwrap(), m);
    }
}
