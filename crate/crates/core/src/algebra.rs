//! Generated algebras, centralizers and shape patterns as canonical bases.

use std::fmt;

use crate::error::ExprError;
use crate::expr::{eval, parse_linear, Expr, ParamEnv};
use crate::matd::{rref, Basis, Mat, VecK};
use crate::scalar::Scalar;

/// Pattern symbols start with an uppercase letter; parameters do not.
pub fn is_pattern_symbol(name: &str) -> bool {
    name.starts_with(|c: char| c.is_ascii_uppercase())
}

/// An n×n shape whose entries are linear in named free symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern {
    pub n: usize,
    /// Symbol names in first-occurrence order; `*` entries get `*k`.
    pub symbols: Vec<String>,
    /// Row-major cells, each a list of (symbol index, coefficient).
    pub cells: Vec<Vec<(usize, Expr)>>,
}

impl Pattern {
    /// Parses a grid of entry texts. `*` is a fresh symbol, `0` is absent.
    pub fn parse(rows: &[Vec<String>]) -> Result<Pattern, ExprError> {
        let n = rows.len();
        let mut symbols: Vec<String> = Vec::new();
        let mut cells = Vec::with_capacity(n * n);
        let mut anon = 0;
        for row in rows {
            if row.len() != n {
                return Err(ExprError::Ragged(n, row.len()));
            }
            for text in row {
                let terms = if text.trim() == "*" {
                    let name = format!("*{anon}");
                    anon += 1;
                    vec![(Expr::int(1), name)]
                } else {
                    parse_linear(text, &is_pattern_symbol)?
                };
                let mut cell = Vec::new();
                for (coef, name) in terms {
                    let k = match symbols.iter().position(|s| *s == name) {
                        Some(k) => k,
                        None => {
                            symbols.push(name);
                            symbols.len() - 1
                        }
                    };
                    cell.push((k, coef));
                }
                cells.push(cell);
            }
        }
        Ok(Pattern { n, symbols, cells })
    }

    /// Number of free symbols.
    pub fn dim(&self) -> usize {
        self.symbols.len()
    }

    /// Case parameters referenced by coefficients.
    pub fn parameters(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for cell in &self.cells {
            for (_, c) in cell {
                for id in c.identifiers() {
                    if !out.contains(&id) {
                        out.push(id);
                    }
                }
            }
        }
        out
    }

    /// One matrix per symbol: that symbol set to 1, the others to 0.
    pub fn symbol_matrices(&self, env: &ParamEnv) -> Result<Vec<Mat>, ExprError> {
        let mut mats = vec![Mat::zeros(self.n); self.symbols.len()];
        for (k, cell) in self.cells.iter().enumerate() {
            for (s, coef) in cell {
                let v = eval(coef, env)?;
                let (i, j) = (k / self.n, k % self.n);
                let cur = mats[*s].get(i, j).clone();
                mats[*s].set(i, j, &cur + &v);
            }
        }
        Ok(mats)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// `kron(left, right)`.
    Standard,
    /// `kron(right, left)`.
    Swapped,
}

impl Orientation {
    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::Standard => "standard",
            Orientation::Swapped => "swapped",
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Any shape that can be compared against a computed subspace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Shape {
    /// Scalar multiples of the identity.
    Scalars,
    Grid(Pattern),
    Kron {
        left: Pattern,
        right: Pattern,
        orientation: Orientation,
    },
}

impl Shape {
    pub fn parameters(&self) -> Vec<String> {
        match self {
            Shape::Scalars => Vec::new(),
            Shape::Grid(p) => p.parameters(),
            Shape::Kron { left, right, .. } => {
                let mut out = left.parameters();
                for p in right.parameters() {
                    if !out.contains(&p) {
                        out.push(p);
                    }
                }
                out
            }
        }
    }

    /// Nominal dimension: the number of independent symbols.
    pub fn dim(&self) -> usize {
        match self {
            Shape::Scalars => 1,
            Shape::Grid(p) => p.dim(),
            Shape::Kron { left, right, .. } => left.dim() * right.dim(),
        }
    }
}

/// Basis spanned by the symbol matrices of `shape` at `env`, in n×n.
pub fn pattern_space(shape: &Shape, n: usize, env: &ParamEnv) -> Result<Basis, ExprError> {
    let mats = match shape {
        Shape::Scalars => vec![Mat::identity(n)],
        Shape::Grid(p) => p.symbol_matrices(env)?,
        Shape::Kron { left, right, orientation } => {
            let ls = left.symbol_matrices(env)?;
            let rs = right.symbol_matrices(env)?;
            let mut out = Vec::new();
            for a in &ls {
                for b in &rs {
                    out.push(match orientation {
                        Orientation::Standard => Mat::kron(a, b),
                        Orientation::Swapped => Mat::kron(b, a),
                    });
                }
            }
            out
        }
    };
    let rows: Vec<VecK> = mats.iter().map(Mat::vectorize).collect();
    Ok(rref(&rows, n * n))
}

/// Smallest unital algebra containing `gens`.
///
/// Seeds with the identity and the generators, then multiplies every newly
/// added element by every generator on both sides until the rank stops
/// growing.
pub fn unital_closure(gens: &[Mat]) -> Basis {
    assert!(!gens.is_empty(), "at least one generator");
    let n = gens[0].n();
    let mut basis = Basis::empty(n * n);
    let mut frontier = Vec::new();
    for m in std::iter::once(Mat::identity(n)).chain(gens.iter().cloned()) {
        if basis.insert(&m.vectorize()) {
            frontier.push(m);
        }
    }
    while !frontier.is_empty() && basis.rank() < n * n {
        let mut next = Vec::new();
        for x in &frontier {
            for g in gens {
                for p in [x * g, g * x] {
                    if basis.insert(&p.vectorize()) {
                        next.push(p);
                    }
                }
            }
        }
        frontier = next;
    }
    basis
}

/// Linear equations in vec(X) expressing X·b − b·X = 0.
fn commutation_rows(b: &Mat) -> Vec<VecK> {
    let n = b.n();
    let mut rows = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut row = vec![Scalar::zero(); n * n];
            for k in 0..n {
                let bkj = b.get(k, j);
                if !bkj.is_zero() {
                    row[i * n + k] = &row[i * n + k] + bkj;
                }
                let bik = b.get(i, k);
                if !bik.is_zero() {
                    row[k * n + j] = &row[k * n + j] - bik;
                }
            }
            rows.push(row);
        }
    }
    rows
}

/// The stacked commutation system for every element of `mats`, reduced.
pub fn commutation_system(mats: &[Mat], n: usize) -> Basis {
    let mut sys = Basis::empty(n * n);
    for b in mats {
        for row in commutation_rows(b) {
            sys.insert(&row);
        }
    }
    sys
}

/// Centralizer of the span of `b` in the full matrix algebra.
pub fn centralizer(b: &Basis) -> Basis {
    let n = (b.ambient() as f64).sqrt().round() as usize;
    centralizer_of(&b.matrices(), n)
}

/// Centralizer of a set of n×n matrices.
pub fn centralizer_of(mats: &[Mat], n: usize) -> Basis {
    commutation_system(mats, n).nullspace()
}

/// Canonical-form equality of two subspaces.
pub fn subspace_equal(a: &Basis, b: &Basis) -> bool {
    a == b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matd::span;

    fn u(i: usize, j: usize) -> Mat {
        Mat::unit(4, i, j).unwrap()
    }

    fn grid(rows: &[&[&str]]) -> Shape {
        let rows: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect();
        Shape::Grid(Pattern::parse(&rows).unwrap())
    }

    #[test]
    fn closure_of_nilpotent() {
        let b = unital_closure(&[u(1, 2)]);
        assert_eq!(b, span(&[Mat::identity(4), u(1, 2)], 4));
    }

    #[test]
    fn centralizer_of_regular_diagonal() {
        let d = Mat::diag((1..=4).map(Scalar::from_int).collect());
        let c = centralizer(&span(&[d], 4));
        let diag: Vec<Mat> = (1..=4).map(|k| u(k, k)).collect();
        assert_eq!(c, span(&diag, 4));
    }

    #[test]
    fn centralizer_of_everything_is_scalars() {
        let all: Vec<Mat> = (1..=4).flat_map(|i| (1..=4).map(move |j| u(i, j))).collect();
        let c = centralizer(&span(&all, 4));
        assert_eq!(c, span(&[Mat::identity(4)], 4));
        let c = centralizer(&Basis::empty(16));
        assert_eq!(c.rank(), 16);
    }

    #[test]
    fn diagonal_pattern() {
        let s = grid(&[&["*", "0", "0", "0"], &["0", "*", "0", "0"], &["0", "0", "*", "0"], &["0", "0", "0", "*"]]);
        assert_eq!(pattern_space(&s, 4, &ParamEnv::new()).unwrap().rank(), 4);
        assert_eq!(pattern_space(&Shape::Scalars, 4, &ParamEnv::new()).unwrap().rank(), 1);
    }

    #[test]
    fn tied_and_dependent_entries() {
        let s = grid(&[
            &["*", "0", "0", "0"],
            &["0", "Ep", "Ph", "0"],
            &["0", "0", "Ep", "-b*Ph/g"],
            &["0", "0", "0", "*"],
        ]);
        let env = ParamEnv::new().with("b", Scalar::from_int(2)).with("g", Scalar::from_int(3));
        let b = pattern_space(&s, 4, &env).unwrap();
        assert_eq!(b.rank(), 4);
        let ph = &u(2, 3) - &u(3, 4).scale(&Scalar::from_ratio(2, 3));
        assert!(b.contains(&ph.vectorize()));
        assert!(!b.contains(&u(2, 3).vectorize()));
        assert!(pattern_space(&s, 4, &ParamEnv::new()).is_err());
    }

    #[test]
    fn kron_orientations() {
        let upper = |_: ()| Pattern::parse(&[vec!["*".into(), "*".into()], vec!["0".into(), "*".into()]]).unwrap();
        let lower = Pattern::parse(&[vec!["*".into(), "0".into()], vec!["*".into(), "*".into()]]).unwrap();
        let s = Shape::Kron { left: upper(()), right: lower.clone(), orientation: Orientation::Standard };
        let t = Shape::Kron { left: lower, right: upper(()), orientation: Orientation::Swapped };
        let env = ParamEnv::new();
        let a = pattern_space(&s, 4, &env).unwrap();
        assert_eq!(a.rank(), 9);
        assert!(subspace_equal(&a, &pattern_space(&t, 4, &env).unwrap()));
        assert!(a.contains(&u(2, 1).vectorize()));
        assert!(!a.contains(&u(1, 2).vectorize()));
    }

    #[test]
    fn nonlinear_entries_rejected() {
        let rows = vec![vec!["Ep*Ph".to_string()]];
        assert_eq!(Pattern::parse(&rows), Err(ExprError::NonLinear));
    }
}
