//! Defining relations as data, evaluated on concrete matrix assignments.
//!
//! The relation file is line oriented:
//!
//! ```text
//! format dd-relations/1
//! generators c11 c12 c21 c22
//! R2: c21*c11 = q*c11*c21
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. A relation without
//! `=` is read as `expr = 0`.

use std::fmt;
use std::path::Path;

use crate::error::PresentationError;
use crate::expr::{eval, parse_word_sum, BinOp, Expr, ParamEnv};
use crate::matd::Mat;

pub const RELATIONS_FORMAT: &str = "dd-relations/1";

/// The relation set shipped with the crate.
pub const SHIPPED_RELATIONS: &str = include_str!("../../../relations/dipper-donkin-gl2");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GenSymbol {
    C11,
    C12,
    C21,
    C22,
}

impl GenSymbol {
    pub const ALL: [GenSymbol; 4] = [GenSymbol::C11, GenSymbol::C12, GenSymbol::C21, GenSymbol::C22];

    pub fn name(self) -> &'static str {
        match self {
            GenSymbol::C11 => "c11",
            GenSymbol::C12 => "c12",
            GenSymbol::C21 => "c21",
            GenSymbol::C22 => "c22",
        }
    }

    pub fn from_name(s: &str) -> Option<GenSymbol> {
        GenSymbol::ALL.into_iter().find(|g| g.name() == s)
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for GenSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelTerm {
    pub coef: Expr,
    pub word: Vec<GenSymbol>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub name: String,
    pub terms: Vec<RelTerm>,
}

impl Relation {
    /// Parses `lhs = rhs` (or a bare `expr`, meaning `expr = 0`).
    pub fn parse(name: &str, text: &str) -> Result<Relation, PresentationError> {
        let names: Vec<&str> = GenSymbol::ALL.iter().map(|g| g.name()).collect();
        let (lhs, rhs) = match text.split_once('=') {
            Some((l, r)) => (l, Some(r)),
            None => (text, None),
        };
        let term_err = |source| PresentationError::Term { name: name.to_string(), source };
        let mut raw = parse_word_sum(lhs, &names).map_err(term_err)?;
        if let Some(r) = rhs {
            let r = r.trim();
            if r != "0" {
                let neg = parse_word_sum(r, &names).map_err(term_err)?;
                raw.extend(neg.into_iter().map(|(c, w)| (Expr::negate(c), w)));
            }
        }
        let mut terms: Vec<RelTerm> = Vec::new();
        for (coef, word) in raw {
            if let Some(param) = coef.identifiers().into_iter().next() {
                return Err(PresentationError::ParameterInCoefficient { name: name.to_string(), param });
            }
            let word: Vec<GenSymbol> = word.into_iter().map(|k| GenSymbol::ALL[k]).collect();
            if let Some(t) = terms.iter_mut().find(|t| t.word == word) {
                let prev = std::mem::replace(&mut t.coef, Expr::int(0));
                t.coef = Expr::bin(BinOp::Add, prev, coef);
            } else {
                terms.push(RelTerm { coef, word });
            }
        }
        Ok(Relation { name: name.to_string(), terms })
    }

    /// The same relation with q replaced by q^-1 in every coefficient.
    pub fn with_q_inverted(&self) -> Relation {
        let terms = self.terms.iter().map(|t| RelTerm { coef: invert_q(&t.coef), word: t.word.clone() }).collect();
        Relation { name: self.name.clone(), terms }
    }

    /// The same relation with generators `a` and `b` exchanged.
    pub fn with_swapped(&self, a: GenSymbol, b: GenSymbol) -> Relation {
        let sw = |g: GenSymbol| {
            if g == a {
                b
            } else if g == b {
                a
            } else {
                g
            }
        };
        let terms = self
            .terms
            .iter()
            .map(|t| RelTerm { coef: t.coef.clone(), word: t.word.iter().map(|&g| sw(g)).collect() })
            .collect();
        Relation { name: self.name.clone(), terms }
    }
}

fn invert_q(e: &Expr) -> Expr {
    match e {
        Expr::Q => Expr::pow(Expr::Q, -1),
        Expr::Neg(a) => Expr::negate(invert_q(a)),
        Expr::Pow(a, k) => Expr::pow(invert_q(a), *k),
        Expr::Bin(op, a, b) => Expr::bin(*op, invert_q(a), invert_q(b)),
        other => other.clone(),
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.name)?;
        for (k, t) in self.terms.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            let word: Vec<&str> = t.word.iter().map(|g| g.name()).collect();
            write!(f, "({})*{}", t.coef, word.join("*"))?;
        }
        f.write_str(" = 0")
    }
}

/// A named, versioned list of relations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    pub format: String,
    pub relations: Vec<Relation>,
}

impl Presentation {
    pub fn parse(text: &str) -> Result<Presentation, PresentationError> {
        let mut format = None;
        let mut relations = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = k + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let syntax = |message: String| PresentationError::Syntax { line: lineno, message };
            if let Some(v) = line.strip_prefix("format ") {
                if v.trim() != RELATIONS_FORMAT {
                    return Err(syntax(format!("unsupported format `{}`", v.trim())));
                }
                format = Some(v.trim().to_string());
                continue;
            }
            if let Some(v) = line.strip_prefix("generators ") {
                let gens: Vec<&str> = v.split_whitespace().collect();
                let want: Vec<&str> = GenSymbol::ALL.iter().map(|g| g.name()).collect();
                if gens != want {
                    return Err(syntax(format!("expected generators {}", want.join(" "))));
                }
                continue;
            }
            let (name, body) = line.split_once(':').ok_or_else(|| syntax("expected `NAME: relation`".to_string()))?;
            let name = name.trim();
            if name.is_empty() || name.contains(char::is_whitespace) {
                return Err(syntax(format!("bad relation name `{name}`")));
            }
            if relations.iter().any(|r: &Relation| r.name == name) {
                return Err(syntax(format!("duplicate relation `{name}`")));
            }
            relations.push(Relation::parse(name, body)?);
        }
        let format = format.ok_or(PresentationError::Syntax { line: 0, message: "missing format line".into() })?;
        Ok(Presentation { format, relations })
    }

    pub fn load(path: &Path) -> Result<Presentation, PresentationError> {
        Presentation::parse(&std::fs::read_to_string(path)?)
    }

    /// The relation set compiled into the crate.
    pub fn shipped() -> Presentation {
        Presentation::parse(SHIPPED_RELATIONS).expect("shipped relation file parses")
    }

    pub fn with_q_inverted(&self) -> Presentation {
        Presentation {
            format: self.format.clone(),
            relations: self.relations.iter().map(Relation::with_q_inverted).collect(),
        }
    }

    pub fn with_swapped(&self, a: GenSymbol, b: GenSymbol) -> Presentation {
        Presentation {
            format: self.format.clone(),
            relations: self.relations.iter().map(|r| r.with_swapped(a, b)).collect(),
        }
    }
}

/// Matrices assigned to the four generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    mats: [Mat; 4],
}

impl Assignment {
    pub fn new(c11: Mat, c12: Mat, c21: Mat, c22: Mat) -> Assignment {
        let n = c11.n();
        assert!([&c12, &c21, &c22].iter().all(|m| m.n() == n), "generator dimensions agree");
        Assignment { mats: [c11, c12, c21, c22] }
    }

    pub fn get(&self, g: GenSymbol) -> &Mat {
        &self.mats[g.index()]
    }

    pub fn set(&mut self, g: GenSymbol, m: Mat) {
        assert_eq!(m.n(), self.n(), "generator dimension");
        self.mats[g.index()] = m;
    }

    pub fn n(&self) -> usize {
        self.mats[0].n()
    }

    pub fn as_vec(&self) -> Vec<Mat> {
        self.mats.to_vec()
    }
}

/// Residual Σ coef · Π asg(word).
pub fn eval_relation(rel: &Relation, asg: &Assignment, env: &ParamEnv) -> Result<Mat, crate::error::ExprError> {
    let n = asg.n();
    let mut acc = Mat::zeros(n);
    for t in &rel.terms {
        let c = eval(&t.coef, env)?;
        if c.is_zero() {
            continue;
        }
        let mut prod = asg.get(t.word[0]).clone();
        for g in &t.word[1..] {
            prod = &prod * asg.get(*g);
        }
        acc = &acc + &prod.scale(&c);
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationCheck {
    pub name: String,
    pub residual: Mat,
    pub is_zero: bool,
}

/// Evaluates every relation of `pres` in file order.
pub fn check_all(
    pres: &Presentation,
    asg: &Assignment,
    env: &ParamEnv,
) -> Result<Vec<RelationCheck>, crate::error::ExprError> {
    pres.relations
        .iter()
        .map(|r| {
            let residual = eval_relation(r, asg, env)?;
            let is_zero = residual.is_zero();
            Ok(RelationCheck { name: r.name.clone(), residual, is_zero })
        })
        .collect()
}
