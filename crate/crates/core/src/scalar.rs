//! Exact arithmetic in Q(i)(q).
//!
//! A [`Scalar`] is a reduced fraction of polynomials in `q` whose
//! coefficients are Gaussian rationals. Canonical form (gcd-reduced, monic
//! denominator) makes structural equality coincide with field equality.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::ScalarError;

/// A Gaussian rational `re + im*i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Coefficient {
    re: BigRational,
    im: BigRational,
}

impl Coefficient {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Coefficient { re, im }
    }

    pub fn from_int(n: i64) -> Self {
        Coefficient::real(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        Coefficient::real(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn real(re: BigRational) -> Self {
        Coefficient { re, im: BigRational::zero() }
    }

    pub fn i() -> Self {
        Coefficient { re: BigRational::zero(), im: BigRational::one() }
    }

    pub fn zero() -> Self {
        Coefficient::default()
    }

    pub fn one() -> Self {
        Coefficient::from_int(1)
    }

    pub fn re(&self) -> &BigRational {
        &self.re
    }

    pub fn im(&self) -> &BigRational {
        &self.im
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn inv(&self) -> Result<Coefficient, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        if self.im.is_zero() {
            return Ok(Coefficient::real(self.re.recip()));
        }
        let norm = &self.re * &self.re + &self.im * &self.im;
        Ok(Coefficient { re: &self.re / &norm, im: -(&self.im / &norm) })
    }

    pub fn checked_div(&self, other: &Coefficient) -> Result<Coefficient, ScalarError> {
        Ok(self * &other.inv()?)
    }

    pub fn pow(&self, k: u32) -> Coefficient {
        let mut acc = Coefficient::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }
}

impl Add for &Coefficient {
    type Output = Coefficient;
    fn add(self, o: &Coefficient) -> Coefficient {
        Coefficient { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

impl Sub for &Coefficient {
    type Output = Coefficient;
    fn sub(self, o: &Coefficient) -> Coefficient {
        Coefficient { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}

impl Mul for &Coefficient {
    type Output = Coefficient;
    fn mul(self, o: &Coefficient) -> Coefficient {
        if self.im.is_zero() && o.im.is_zero() {
            return Coefficient::real(&self.re * &o.re);
        }
        Coefficient { re: &self.re * &o.re - &self.im * &o.im, im: &self.re * &o.im + &self.im * &o.re }
    }
}

impl Neg for &Coefficient {
    type Output = Coefficient;
    fn neg(self) -> Coefficient {
        Coefficient { re: -&self.re, im: -&self.im }
    }
}

fn fmt_ratio(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Coefficient {
    /// Prints in the corpus expression grammar; compound values are parenthesized.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", fmt_ratio(&self.re)),
            (true, false) => {
                if self.im.is_one() {
                    write!(f, "i")
                } else if (-&self.im).is_one() {
                    write!(f, "-i")
                } else {
                    write!(f, "{}*i", fmt_ratio(&self.im))
                }
            }
            (false, false) => {
                let sign = if self.im.is_negative() { '-' } else { '+' };
                let mag = self.im.abs();
                if mag.is_one() {
                    write!(f, "({} {} i)", fmt_ratio(&self.re), sign)
                } else {
                    write!(f, "({} {} {}*i)", fmt_ratio(&self.re), sign, fmt_ratio(&mag))
                }
            }
        }
    }
}

/// Polynomial in `q`; index k holds the coefficient of q^k.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct QPoly {
    coeffs: Vec<Coefficient>,
}

impl QPoly {
    pub fn new(mut coeffs: Vec<Coefficient>) -> Self {
        while coeffs.last().is_some_and(Coefficient::is_zero) {
            coeffs.pop();
        }
        QPoly { coeffs }
    }

    pub fn zero() -> Self {
        QPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: Coefficient) -> Self {
        QPoly::new(vec![c])
    }

    pub fn one() -> Self {
        QPoly::constant(Coefficient::one())
    }

    /// The monomial q^k.
    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![Coefficient::zero(); k + 1];
        coeffs[k] = Coefficient::one();
        QPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[Coefficient] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> Option<&Coefficient> {
        self.coeffs.last()
    }

    pub fn scale(&self, c: &Coefficient) -> QPoly {
        if c.is_zero() {
            return QPoly::zero();
        }
        QPoly { coeffs: self.coeffs.iter().map(|x| x * c).collect() }
    }

    pub fn monic(&self) -> QPoly {
        match self.lead() {
            None => QPoly::zero(),
            Some(l) if l.is_one() => self.clone(),
            Some(l) => self.scale(&l.inv().expect("nonzero lead")),
        }
    }

    /// Quotient and remainder; panics on a zero divisor.
    pub fn div_rem(&self, b: &QPoly) -> (QPoly, QPoly) {
        let db = b.degree().expect("division by zero polynomial");
        let Some(da) = self.degree() else {
            return (QPoly::zero(), QPoly::zero());
        };
        if da < db {
            return (QPoly::zero(), self.clone());
        }
        let lead_inv = b.coeffs[db].inv().expect("nonzero lead");
        let mut rem = self.coeffs.clone();
        let mut quo = vec![Coefficient::zero(); da - db + 1];
        for k in (0..=da - db).rev() {
            let c = &rem[k + db] * &lead_inv;
            if c.is_zero() {
                continue;
            }
            for (j, bc) in b.coeffs.iter().enumerate() {
                rem[k + j] = &rem[k + j] - &(&c * bc);
            }
            quo[k] = c;
        }
        rem.truncate(db);
        (QPoly::new(quo), QPoly::new(rem))
    }

    /// Monic gcd; gcd(0, 0) = 0.
    pub fn gcd(a: &QPoly, b: &QPoly) -> QPoly {
        let mut x = a.clone();
        let mut y = b.clone();
        while !y.is_zero() {
            let (_, r) = x.div_rem(&y);
            x = y;
            y = r;
        }
        x.monic()
    }

    pub fn eval(&self, x: &Coefficient) -> Coefficient {
        let mut acc = Coefficient::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * x) + c;
        }
        acc
    }

    fn fmt_expr(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let (neg, mag) = if c.is_real() && c.re().is_negative() { (true, -c) } else { (false, c.clone()) };
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono = match k {
                0 => String::new(),
                1 => "q".into(),
                _ => format!("q^{k}"),
            };
            if mono.is_empty() {
                out.push_str(&mag.to_string());
            } else if mag.is_one() {
                out.push_str(&mono);
            } else {
                out.push_str(&format!("{mag}*{mono}"));
            }
        }
        out
    }

    fn is_single_term(&self) -> bool {
        self.coeffs.iter().filter(|c| !c.is_zero()).count() <= 1
    }
}

impl Add for &QPoly {
    type Output = QPoly;
    fn add(self, o: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let z = Coefficient::zero();
        let coeffs = (0..n).map(|k| self.coeffs.get(k).unwrap_or(&z) + o.coeffs.get(k).unwrap_or(&z)).collect();
        QPoly::new(coeffs)
    }
}

impl Sub for &QPoly {
    type Output = QPoly;
    fn sub(self, o: &QPoly) -> QPoly {
        self + &(-o)
    }
}

impl Neg for &QPoly {
    type Output = QPoly;
    fn neg(self) -> QPoly {
        QPoly { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl Mul for &QPoly {
    type Output = QPoly;
    fn mul(self, o: &QPoly) -> QPoly {
        if self.is_zero() || o.is_zero() {
            return QPoly::zero();
        }
        let mut coeffs = vec![Coefficient::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    coeffs[i + j] = &coeffs[i + j] + &(a * b);
                }
            }
        }
        QPoly::new(coeffs)
    }
}

/// An element of Q(i)(q) in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Scalar {
    num: QPoly,
    den: QPoly,
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::zero()
    }
}

impl Scalar {
    /// Builds `num/den` in canonical form.
    pub fn from_parts(num: QPoly, den: QPoly) -> Result<Scalar, ScalarError> {
        if den.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(Scalar::normalize(num, den))
    }

    fn normalize(num: QPoly, den: QPoly) -> Scalar {
        if num.is_zero() {
            return Scalar::zero();
        }
        if den.degree() == Some(0) {
            let l = den.coeffs[0].inv().expect("nonzero");
            return Scalar { num: num.scale(&l), den: QPoly::one() };
        }
        let g = QPoly::gcd(&num, &den);
        let (num, den) = if g.is_one() { (num, den) } else { (num.div_rem(&g).0, den.div_rem(&g).0) };
        let l = den.lead().expect("nonzero den").clone();
        if l.is_one() {
            Scalar { num, den }
        } else {
            let li = l.inv().expect("nonzero");
            Scalar { num: num.scale(&li), den: den.scale(&li) }
        }
    }

    pub fn zero() -> Self {
        Scalar { num: QPoly::zero(), den: QPoly::one() }
    }

    pub fn one() -> Self {
        Scalar::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::constant(Coefficient::from_int(n))
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        Scalar::constant(Coefficient::from_ratio(n, d))
    }

    pub fn constant(c: Coefficient) -> Self {
        Scalar { num: QPoly::constant(c), den: QPoly::one() }
    }

    pub fn i() -> Self {
        Scalar::constant(Coefficient::i())
    }

    /// The indeterminate `q`.
    pub fn q() -> Self {
        Scalar { num: QPoly::monomial(1), den: QPoly::one() }
    }

    pub fn from_poly(p: QPoly) -> Self {
        Scalar { num: p, den: QPoly::one() }
    }

    pub fn num(&self) -> &QPoly {
        &self.num
    }

    pub fn den(&self) -> &QPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    /// The value as a constant, if it does not depend on `q`.
    pub fn as_constant(&self) -> Option<Coefficient> {
        match (self.num.degree(), self.den.degree()) {
            (None, _) => Some(Coefficient::zero()),
            (Some(0), Some(0)) => Some(self.num.coeffs[0].clone()),
            _ => None,
        }
    }

    /// Re-establishes canonical form; a no-op on values built by this module.
    pub fn normalized(&self) -> Scalar {
        Scalar::normalize(self.num.clone(), self.den.clone())
    }

    pub fn inv(&self) -> Result<Scalar, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(Scalar::normalize(self.den.clone(), self.num.clone()))
    }

    pub fn checked_div(&self, o: &Scalar) -> Result<Scalar, ScalarError> {
        Ok(self * &o.inv()?)
    }

    pub fn pow(&self, k: i64) -> Result<Scalar, ScalarError> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let mut acc = Scalar::one();
        for _ in 0..k.unsigned_abs() {
            acc = &acc * &base;
        }
        Ok(acc)
    }

    pub fn eval_at(&self, q0: &Coefficient) -> Result<Coefficient, ScalarError> {
        let d = self.den.eval(q0);
        if d.is_zero() {
            return Err(ScalarError::Pole);
        }
        self.num.eval(q0).checked_div(&d)
    }

    /// True if printing needs parentheses when used as a factor.
    pub fn is_atomic(&self) -> bool {
        self.den.is_one()
            && self.num.is_single_term()
            && self.num.lead().is_none_or(|c| c.is_real() || c.re().is_zero())
    }
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, o: &Scalar) -> Scalar {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den.is_one() && o.den.is_one() {
            return Scalar { num: &self.num + &o.num, den: QPoly::one() };
        }
        if self.den == o.den {
            return Scalar::normalize(&self.num + &o.num, self.den.clone());
        }
        let num = &(&self.num * &o.den) + &(&o.num * &self.den);
        Scalar::normalize(num, &self.den * &o.den)
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, o: &Scalar) -> Scalar {
        self + &(-o)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar { num: -&self.num, den: self.den.clone() }
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, o: &Scalar) -> Scalar {
        if self.is_zero() || o.is_zero() {
            return Scalar::zero();
        }
        if self.den.is_one() && o.den.is_one() {
            return Scalar { num: &self.num * &o.num, den: QPoly::one() };
        }
        Scalar::normalize(&self.num * &o.num, &self.den * &o.den)
    }
}

macro_rules! owned_ops {
    ($t:ty) => {
        impl Add for $t {
            type Output = $t;
            fn add(self, o: $t) -> $t {
                &self + &o
            }
        }
        impl Sub for $t {
            type Output = $t;
            fn sub(self, o: $t) -> $t {
                &self - &o
            }
        }
        impl Mul for $t {
            type Output = $t;
            fn mul(self, o: $t) -> $t {
                &self * &o
            }
        }
        impl Neg for $t {
            type Output = $t;
            fn neg(self) -> $t {
                -&self
            }
        }
    };
}

owned_ops!(Coefficient);
owned_ops!(QPoly);
owned_ops!(Scalar);

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fmt_expr())
    }
}

impl fmt::Display for Scalar {
    /// Prints in the corpus expression grammar, e.g. `(q^2 - 1)/(q + 1)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let num = self.num.fmt_expr();
        if self.den.is_one() {
            return f.write_str(&num);
        }
        let num = if self.num.is_single_term() { num } else { format!("({num})") };
        let den = self.den.fmt_expr();
        if self.den.is_single_term() && self.den.lead().is_some_and(Coefficient::is_one) {
            write!(f, "{num}/{den}")
        } else {
            write!(f, "{num}/({den})")
        }
    }
}
