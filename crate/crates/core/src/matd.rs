//! Dense exact matrices over [`Scalar`] and canonical row-echelon bases.
//!
//! Vectorization is row-major: entry (i,j) of an n×n matrix lands at index
//! `i*n + j` (0-based).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{ExprError, MatError};
use crate::expr::{eval, MatExpr, ParamEnv};
use crate::scalar::Scalar;

/// Row-major vectorization of a matrix.
pub type VecK = Vec<Scalar>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mat {
    n: usize,
    data: Vec<Scalar>,
}

impl Mat {
    pub fn zeros(n: usize) -> Mat {
        Mat { n, data: vec![Scalar::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Mat {
        let mut m = Mat::zeros(n);
        for k in 0..n {
            m.data[k * n + k] = Scalar::one();
        }
        m
    }

    /// Matrix unit e(i,j), 1-based.
    pub fn unit(n: usize, i: usize, j: usize) -> Result<Mat, MatError> {
        if i == 0 || j == 0 || i > n || j > n {
            return Err(MatError::IndexOutOfRange(i, j, n));
        }
        let mut m = Mat::zeros(n);
        m.data[(i - 1) * n + (j - 1)] = Scalar::one();
        Ok(m)
    }

    pub fn diag(entries: Vec<Scalar>) -> Mat {
        let n = entries.len();
        let mut m = Mat::zeros(n);
        for (k, v) in entries.into_iter().enumerate() {
            m.data[k * n + k] = v;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Result<Mat, MatError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(MatError::DimensionMismatch(n, r.len()));
            }
            data.extend(r);
        }
        Ok(Mat { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry at 0-based (i, j).
    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        self.data[i * self.n + j] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        *self == Mat::identity(self.n)
    }

    fn check(&self, o: &Mat) -> Result<(), MatError> {
        if self.n == o.n {
            Ok(())
        } else {
            Err(MatError::DimensionMismatch(self.n, o.n))
        }
    }

    pub fn try_add(&self, o: &Mat) -> Result<Mat, MatError> {
        self.check(o)?;
        Ok(Mat { n: self.n, data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect() })
    }

    pub fn try_sub(&self, o: &Mat) -> Result<Mat, MatError> {
        self.check(o)?;
        Ok(Mat { n: self.n, data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect() })
    }

    pub fn try_mul(&self, o: &Mat) -> Result<Mat, MatError> {
        self.check(o)?;
        let n = self.n;
        let mut out = Mat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = &self.data[i * n + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = &o.data[k * n + j];
                    if !b.is_zero() {
                        let cell = &mut out.data[i * n + j];
                        *cell = &*cell + &(a * b);
                    }
                }
            }
        }
        Ok(out)
    }

    /// ab − ba.
    pub fn commutator(&self, o: &Mat) -> Result<Mat, MatError> {
        self.try_mul(o)?.try_sub(&o.try_mul(self)?)
    }

    pub fn scale(&self, s: &Scalar) -> Mat {
        Mat { n: self.n, data: self.data.iter().map(|x| x * s).collect() }
    }

    /// Gauss–Jordan inverse.
    pub fn inverse(&self) -> Result<Mat, MatError> {
        let n = self.n;
        let mut a = self.clone();
        let mut inv = Mat::identity(n);
        for c in 0..n {
            let p = (c..n).find(|&r| !a.get(r, c).is_zero()).ok_or(MatError::Singular)?;
            if p != c {
                a.swap_rows(p, c);
                inv.swap_rows(p, c);
            }
            let pv = a.get(c, c).inv().map_err(|_| MatError::Singular)?;
            a.scale_row(c, &pv);
            inv.scale_row(c, &pv);
            for r in 0..n {
                if r == c || a.get(r, c).is_zero() {
                    continue;
                }
                let f = a.get(r, c).clone();
                a.axpy_row(r, c, &f);
                inv.axpy_row(r, c, &f);
            }
        }
        Ok(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        let n = self.n;
        for j in 0..n {
            self.data.swap(a * n + j, b * n + j);
        }
    }

    fn scale_row(&mut self, r: usize, s: &Scalar) {
        let n = self.n;
        for j in 0..n {
            self.data[r * n + j] = &self.data[r * n + j] * s;
        }
    }

    /// row[r] -= f * row[src]
    fn axpy_row(&mut self, r: usize, src: usize, f: &Scalar) {
        let n = self.n;
        for j in 0..n {
            let s = &self.data[src * n + j];
            if !s.is_zero() {
                self.data[r * n + j] = &self.data[r * n + j] - &(f * s);
            }
        }
    }

    /// Kronecker product: block (i,j) of the result is `a[i][j] * b`.
    pub fn kron(a: &Mat, b: &Mat) -> Mat {
        let (na, nb) = (a.n, b.n);
        let n = na * nb;
        let mut out = Mat::zeros(n);
        for i in 0..na {
            for j in 0..na {
                let x = a.get(i, j);
                if x.is_zero() {
                    continue;
                }
                for k in 0..nb {
                    for l in 0..nb {
                        out.set(i * nb + k, j * nb + l, x * b.get(k, l));
                    }
                }
            }
        }
        out
    }

    /// Kronecker product of two 2×2 matrices.
    pub fn kron2(a: &Mat, b: &Mat) -> Result<Mat, MatError> {
        if a.n != 2 {
            return Err(MatError::DimensionMismatch(2, a.n));
        }
        if b.n != 2 {
            return Err(MatError::DimensionMismatch(2, b.n));
        }
        Ok(Mat::kron(a, b))
    }

    pub fn vectorize(&self) -> VecK {
        self.data.clone()
    }

    pub fn unvectorize(v: &[Scalar]) -> Result<Mat, MatError> {
        let n = (v.len() as f64).sqrt().round() as usize;
        if n * n != v.len() {
            return Err(MatError::NotSquare(v.len()));
        }
        Ok(Mat { n, data: v.to_vec() })
    }

    /// Evaluates a matrix expression under `env`.
    pub fn eval(m: &MatExpr, env: &ParamEnv) -> Result<Mat, ExprError> {
        let mut out = Mat::zeros(m.n);
        for t in &m.terms {
            let v = eval(&t.coef, env)?;
            let cell = &mut out.data[(t.row - 1) * m.n + (t.col - 1)];
            *cell = &*cell + &v;
        }
        Ok(out)
    }

    /// Nonzero entries as `(row, col, value)`, 1-based, row-major.
    pub fn entries(&self) -> Vec<(usize, usize, &Scalar)> {
        let n = self.n;
        self.data.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(k, v)| (k / n + 1, k % n + 1, v)).collect()
    }
}

impl fmt::Display for Mat {
    /// Renders as a sum of matrix units in the corpus grammar.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let es = self.entries();
        if es.is_empty() {
            return f.write_str("0");
        }
        for (k, (i, j, v)) in es.into_iter().enumerate() {
            let s = v.to_string();
            let (neg, body) = match s.strip_prefix('-') {
                Some(rest) if v.is_atomic() => (true, rest.to_string()),
                _ => (false, s),
            };
            if k == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            if body == "1" {
                write!(f, "e({i},{j})")?;
            } else if v.is_atomic() {
                write!(f, "{body}*e({i},{j})")?;
            } else {
                write!(f, "({body})*e({i},{j})")?;
            }
        }
        Ok(())
    }
}

impl Add for &Mat {
    type Output = Mat;
    fn add(self, o: &Mat) -> Mat {
        self.try_add(o).expect("matrix dimensions agree")
    }
}

impl Sub for &Mat {
    type Output = Mat;
    fn sub(self, o: &Mat) -> Mat {
        self.try_sub(o).expect("matrix dimensions agree")
    }
}

impl Mul for &Mat {
    type Output = Mat;
    fn mul(self, o: &Mat) -> Mat {
        self.try_mul(o).expect("matrix dimensions agree")
    }
}

impl Neg for &Mat {
    type Output = Mat;
    fn neg(self) -> Mat {
        Mat { n: self.n, data: self.data.iter().map(|x| -x).collect() }
    }
}

/// A subspace of K^len in reduced row-echelon form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Basis {
    len: usize,
    rows: Vec<VecK>,
    pivots: Vec<usize>,
}

impl Basis {
    pub fn empty(len: usize) -> Basis {
        Basis { len, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn ambient(&self) -> usize {
        self.len
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[VecK] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Basis rows as n×n matrices.
    pub fn matrices(&self) -> Vec<Mat> {
        self.rows.iter().map(|r| Mat::unvectorize(r).expect("square ambient")).collect()
    }

    /// Residual of `v` after eliminating every pivot column.
    pub fn reduce(&self, v: &[Scalar]) -> VecK {
        let mut r = v.to_vec();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if r[p].is_zero() {
                continue;
            }
            let f = r[p].clone();
            for (x, y) in r.iter_mut().zip(row) {
                if !y.is_zero() {
                    *x = &*x - &(&f * y);
                }
            }
        }
        r
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        self.reduce(v).iter().all(Scalar::is_zero)
    }

    /// Adjoins `v`, keeping reduced form. Returns false if already spanned.
    pub fn insert(&mut self, v: &[Scalar]) -> bool {
        assert_eq!(v.len(), self.len, "vector length");
        let mut r = self.reduce(v);
        let Some(p) = r.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = r[p].inv().expect("nonzero pivot");
        if !inv.is_one() {
            for x in r.iter_mut() {
                if !x.is_zero() {
                    *x = &*x * &inv;
                }
            }
        }
        for row in self.rows.iter_mut() {
            if row[p].is_zero() {
                continue;
            }
            let f = row[p].clone();
            for (x, y) in row.iter_mut().zip(&r) {
                if !y.is_zero() {
                    *x = &*x - &(&f * y);
                }
            }
        }
        let at = self.pivots.partition_point(|&q| q < p);
        self.rows.insert(at, r);
        self.pivots.insert(at, p);
        true
    }

    pub fn is_subspace_of(&self, other: &Basis) -> bool {
        self.len == other.len && self.rows.iter().all(|r| other.contains(r))
    }

    /// Basis of the solution space {x : row·x = 0 for every row}.
    pub fn nullspace(&self) -> Basis {
        let free: Vec<usize> = (0..self.len).filter(|c| !self.pivots.contains(c)).collect();
        let vecs: Vec<VecK> = free
            .iter()
            .map(|&f| {
                let mut v = vec![Scalar::zero(); self.len];
                v[f] = Scalar::one();
                for (row, &p) in self.rows.iter().zip(&self.pivots) {
                    v[p] = -&row[f];
                }
                v
            })
            .collect();
        rref(&vecs, self.len)
    }
}

/// Canonical RREF of the row space of `rows` (each of length `len`).
pub fn rref(rows: &[VecK], len: usize) -> Basis {
    let mut m: Vec<VecK> = rows.iter().filter(|r| r.iter().any(|x| !x.is_zero())).cloned().collect();
    for r in &m {
        assert_eq!(r.len(), len, "vector length");
    }
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..len {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&k| !m[k][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].inv().expect("nonzero pivot");
        if !inv.is_one() {
            for x in m[r].iter_mut() {
                if !x.is_zero() {
                    *x = &*x * &inv;
                }
            }
        }
        let pivot_row = m[r].clone();
        for (k, row) in m.iter_mut().enumerate() {
            if k == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                if !y.is_zero() {
                    *x = &*x - &(&f * y);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    Basis { len, rows: m, pivots }
}

/// RREF of the vectorizations of `mats`.
pub fn span(mats: &[Mat], n: usize) -> Basis {
    let rows: Vec<VecK> = mats.iter().map(Mat::vectorize).collect();
    rref(&rows, n * n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(i: usize, j: usize) -> Mat {
        Mat::unit(4, i, j).unwrap()
    }

    fn k(n: i64) -> Scalar {
        Scalar::from_int(n)
    }

    #[test]
    fn unit_products() {
        assert_eq!(&u(1, 2) * &u(2, 3), u(1, 3));
        assert!((&u(2, 1) * &u(2, 3)).is_zero());
        assert_eq!(&u(2, 4) * &u(4, 3), u(2, 3));
        assert!(Mat::unit(4, 0, 1).is_err());
        assert!(Mat::unit(4, 1, 5).is_err());
    }

    #[test]
    fn mismatch_is_an_error() {
        assert_eq!(Mat::identity(2).try_mul(&Mat::identity(4)), Err(MatError::DimensionMismatch(2, 4)));
    }

    #[test]
    fn perturbation_product_by_hand() {
        // (q e13 − μ e24)(−μ e21 + e43) with μ = 5 gives −5 e23.
        let q = Scalar::q();
        let mu = k(5);
        let c12 = &u(1, 3).scale(&q) - &u(2, 4).scale(&mu);
        let c21 = &u(4, 3) - &u(2, 1).scale(&mu);
        assert_eq!(&c12 * &c21, u(2, 3).scale(&k(-5)));
        assert_eq!(&c21 * &c12, u(2, 3).scale(&(&k(-5) * &q)));
    }

    #[test]
    fn commutators() {
        let d1 = Mat::diag(vec![k(1), k(2), k(3), k(4)]);
        let d2 = Mat::diag(vec![Scalar::q(), k(2), k(7), k(1)]);
        assert!(d1.commutator(&d2).unwrap().is_zero());
        assert!(Mat::identity(4).commutator(&u(1, 2)).unwrap().is_zero());
        assert_eq!(u(1, 2).commutator(&u(2, 1)).unwrap(), &u(1, 1) - &u(2, 2));
    }

    #[test]
    fn inverses() {
        let q = Scalar::q();
        let d = Mat::diag(vec![&q * &q, q.clone(), k(1), k(1)]);
        let di = Mat::diag(vec![q.pow(-2).unwrap(), q.pow(-1).unwrap(), k(1), k(1)]);
        assert_eq!(d.inverse().unwrap(), di);
        let n = &Mat::identity(4) + &u(3, 4);
        assert_eq!(n.inverse().unwrap(), &Mat::identity(4) - &u(3, 4));
        assert_eq!(u(1, 2).inverse(), Err(MatError::Singular));
        let p = &u(1, 2) + &u(2, 1);
        let p = &(&p + &u(3, 3)) + &u(4, 4);
        assert_eq!(&p.inverse().unwrap() * &p, Mat::identity(4));
    }

    #[test]
    fn kronecker() {
        let i2 = Mat::identity(2);
        assert_eq!(Mat::kron2(&i2, &i2).unwrap(), Mat::identity(4));
        let e12 = Mat::unit(2, 1, 2).unwrap();
        let e11 = Mat::unit(2, 1, 1).unwrap();
        assert_eq!(Mat::kron2(&e12, &e11).unwrap(), u(1, 3));
        assert!(Mat::kron2(&Mat::identity(4), &i2).is_err());
        let upper = [(1, 1), (1, 2), (2, 2)];
        let mut prods = Vec::new();
        for &(a, b) in &upper {
            for &(c, d) in &upper {
                prods.push(Mat::kron2(&Mat::unit(2, a, b).unwrap(), &Mat::unit(2, c, d).unwrap()).unwrap());
            }
        }
        assert_eq!(span(&prods, 4).rank(), 9);
    }

    #[test]
    fn rref_basics() {
        let v: VecK = (1..=16).map(k).collect();
        let w: VecK = v.iter().map(|x| x * &k(2)).collect();
        assert_eq!(rref(&[v, w], 16).rank(), 1);
        let units: Vec<Mat> = (1..=4).flat_map(|i| (1..=4).map(move |j| u(i, j))).collect();
        let b = span(&units, 4);
        assert_eq!(b.rank(), 16);
        assert_eq!(b.pivots(), (0..16).collect::<Vec<_>>().as_slice());
    }

    #[test]
    fn insert_matches_rref() {
        let vs: Vec<VecK> =
            vec![vec![k(0), k(2), k(4)], vec![k(1), k(1), k(1)], vec![k(1), k(3), k(5)], vec![Scalar::q(), k(0), k(1)]];
        let mut b = Basis::empty(3);
        for v in &vs {
            b.insert(v);
        }
        assert_eq!(b, rref(&vs, 3));
        assert!(!b.insert(&vs[2]));
    }

    #[test]
    fn nullspace_of_rank_one() {
        let b = rref(&[vec![k(1), k(1), k(0)]], 3);
        let ns = b.nullspace();
        assert_eq!(ns.rank(), 2);
        for r in ns.rows() {
            assert!((&r[0] + &r[1]).is_zero());
        }
    }

    #[test]
    fn display_reparses() {
        use crate::expr::parse_matrix;
        let q = Scalar::q();
        let m = &u(1, 1).scale(&(&q - &k(1))) - &u(2, 3).scale(&k(5));
        let s = m.to_string();
        assert_eq!(s, "(q - 1)*e(1,1) - 5*e(2,3)");
        let back = Mat::eval(&parse_matrix(&s).unwrap(), &ParamEnv::new()).unwrap();
        assert_eq!(back, m);
    }
}
