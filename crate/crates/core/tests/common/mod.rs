#![allow(dead_code)]

use std::path::PathBuf;

use ddgl2_core::corpus::{self, Corpus};
use ddgl2_core::expr::{parse_matrix, ParamEnv};
use ddgl2_core::matd::Mat;
use ddgl2_core::scalar::{Coefficient, Scalar};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn shipped() -> Corpus {
    corpus::load(&corpus_dir()).expect("shipped corpus loads")
}

pub fn int(n: i64) -> Scalar {
    Scalar::from_int(n)
}

pub fn ratio(n: i64, d: i64) -> Scalar {
    Scalar::from_ratio(n, d)
}

pub fn env(pairs: &[(&str, Scalar)]) -> ParamEnv {
    let mut e = ParamEnv::new();
    for (k, v) in pairs {
        e.insert(k, v.clone());
    }
    e
}

pub fn mat(text: &str, env: &ParamEnv) -> Mat {
    Mat::eval(&parse_matrix(text).expect("matrix parses"), env).expect("matrix evaluates")
}

pub fn copy_corpus(to: &std::path::Path) {
    for f in 1..=7 {
        let sub = to.join(format!("family-{f}"));
        std::fs::create_dir_all(&sub).unwrap();
        std::fs::copy(corpus_dir().join(format!("family-{f}/cases.json")), sub.join("cases.json")).unwrap();
    }
}

// Independent oracle: q specialized to a rational number, plain dense
// BigRational matrices and textbook Gaussian elimination.

pub type R = BigRational;
pub type RMat = Vec<Vec<R>>;

pub fn r(n: i64, d: i64) -> R {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn real(c: &Coefficient) -> R {
    assert!(c.im().is_zero(), "oracle handles real entries only");
    c.re().clone()
}

/// Entries of `m` with q := q0.
pub fn specialize(m: &Mat, q0: &R) -> RMat {
    let q = Coefficient::real(q0.clone());
    (0..m.n()).map(|i| (0..m.n()).map(|j| real(&m.get(i, j).eval_at(&q).expect("no pole at q0"))).collect()).collect()
}

pub fn rmul(a: &RMat, b: &RMat) -> RMat {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).fold(R::zero(), |acc, k| acc + &a[i][k] * &b[k][j])).collect()).collect()
}

pub fn rident(n: usize) -> RMat {
    (0..n).map(|i| (0..n).map(|j| if i == j { R::one() } else { R::zero() }).collect()).collect()
}

pub fn flat(m: &RMat) -> Vec<R> {
    m.iter().flatten().cloned().collect()
}

/// Rank by Gauss-Jordan elimination on a copy.
pub fn rank(rows: &[Vec<R>]) -> usize {
    let mut a: Vec<Vec<R>> = rows.to_vec();
    let cols = a.first().map_or(0, Vec::len);
    let mut rk = 0;
    for c in 0..cols {
        let Some(p) = (rk..a.len()).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(rk, p);
        let pivot = a[rk].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != rk && !row[c].is_zero() {
                let f = &row[c] / &pivot[c];
                for (x, p) in row[c..].iter_mut().zip(&pivot[c..]) {
                    *x -= &f * p;
                }
            }
        }
        rk += 1;
    }
    rk
}

/// Dimension of the algebra generated by `gens` and I: span of all words,
/// grown by left multiplication only until the span stops growing.
pub fn closure_dim(gens: &[RMat]) -> usize {
    let n = gens[0].len();
    let mut words: Vec<RMat> = vec![rident(n)];
    let mut frontier = words.clone();
    let mut dim = 1;
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for w in &frontier {
            for g in gens {
                let cand = rmul(g, w);
                let mut trial: Vec<Vec<R>> = words.iter().map(flat).collect();
                trial.push(flat(&cand));
                let rk = rank(&trial);
                if rk > dim {
                    dim = rk;
                    words.push(cand.clone());
                    next.push(cand);
                }
            }
        }
        frontier = next;
    }
    dim
}

/// Dimension of the commutant of `gens`, via vec(XA − AX) = (I⊗Aᵀ − A⊗I) vec(X)
/// for row-major vec.
pub fn commutant_dim(gens: &[RMat]) -> usize {
    let n = gens[0].len();
    let mut rows = Vec::new();
    for a in gens {
        for i in 0..n {
            for j in 0..n {
                // Row for entry (i,j) of XA − AX, over unknowns X[k][l] at k*n+l.
                let mut row = vec![R::zero(); n * n];
                for k in 0..n {
                    row[i * n + k] += &a[k][j];
                    row[k * n + j] -= &a[i][k];
                }
                rows.push(row);
            }
        }
    }
    n * n - rank(&rows)
}
