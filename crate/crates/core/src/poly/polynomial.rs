use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::Rational64;
use num_traits::{Num, Signed, ToPrimitive};

use super::Monomial;
use crate::error::{Error, Result};

/// Scalar type usable as a polynomial coefficient.
///
/// Implemented for `f64` (the default, used by the relaxation pipeline) and
/// for [`Rational64`], which gives exact arithmetic in tests.
pub trait Coefficient: Num + Signed + Clone + PartialEq + fmt::Debug + Send + Sync + 'static {
    /// Parses a decimal literal such as `2`, `0.25` or `1e-3`.
    fn from_literal(s: &str) -> Option<Self>;
    fn to_f64(&self) -> f64;
    /// Renders the absolute value in a form [`Coefficient::from_literal`]
    /// reads back exactly, possibly as a quotient `p/q`.
    fn write_literal(&self) -> String;
}

impl Coefficient for f64 {
    fn from_literal(s: &str) -> Option<Self> {
        s.parse().ok()
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn write_literal(&self) -> String {
        let s = format!("{}", self.abs());
        if s.contains("inf") || s.contains("NaN") {
            panic!("non-finite coefficient {self}");
        }
        s
    }
}

impl Coefficient for Rational64 {
    fn from_literal(s: &str) -> Option<Self> {
        let (mantissa, exp) = match s.find(['e', 'E']) {
            Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
            None => (s, 0),
        };
        let (int, frac) = match mantissa.find('.') {
            Some(i) => (&mantissa[..i], &mantissa[i + 1..]),
            None => (mantissa, ""),
        };
        let digits = format!("{int}{frac}");
        let numer: i64 = if digits.is_empty() { return None } else { digits.parse().ok()? };
        let scale = exp - frac.len() as i32;
        let ten = Rational64::from_integer(10);
        let mut value = Rational64::from_integer(numer);
        for _ in 0..scale.unsigned_abs() {
            value = if scale > 0 { value * ten } else { value / ten };
        }
        Some(value)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn write_literal(&self) -> String {
        let v = self.abs();
        if v.is_integer() {
            v.numer().to_string()
        } else {
            format!("{}/{}", v.numer(), v.denom())
        }
    }
}

/// A sparse multivariate polynomial in `nvars` variables.
///
/// Terms are kept in a map ordered by the graded monomial order and no stored
/// coefficient is zero, so structural equality is polynomial equality.
#[derive(Clone, PartialEq)]
pub struct Polynomial<C: Coefficient = f64> {
    nvars: usize,
    terms: BTreeMap<Monomial, C>,
}

/// The arithmetic operations exposed by [`Polynomial::arith`].
#[derive(Clone, Debug, PartialEq)]
pub enum ArithOp<C> {
    Add,
    Sub,
    Mul,
    /// Scales the left operand; the right operand is ignored.
    Scale(C),
}

impl<C: Coefficient> Polynomial<C> {
    /// The zero polynomial (empty term set).
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        Self::from_terms(nvars, [(Monomial::one(), c)])
    }

    /// The polynomial `x_var`.
    pub fn var(nvars: usize, var: usize) -> Self {
        Self::from_terms(nvars, [(Monomial::var(var), C::one())])
    }

    /// Builds a polynomial, combining like terms and dropping zeros.
    ///
    /// # Panics
    ///
    /// If a monomial references a variable index `>= nvars`.
    pub fn from_terms<I: IntoIterator<Item = (Monomial, C)>>(nvars: usize, terms: I) -> Self {
        let mut p = Self::zero(nvars);
        for (m, c) in terms {
            assert!(m.min_nvars() <= nvars, "monomial {m} exceeds {nvars} variables");
            p.add_term(m, c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().clone() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of stored terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Terms in ascending graded order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    /// `supp(p)`: the monomials with nonzero coefficient.
    pub fn support(&self) -> impl Iterator<Item = &Monomial> {
        self.terms.keys()
    }

    pub fn coefficient(&self, m: &Monomial) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    /// `var(p)`: indices of variables with a positive exponent somewhere.
    pub fn vars(&self) -> BTreeSet<usize> {
        self.terms.keys().flat_map(|m| m.vars()).collect()
    }

    fn check_dims(&self, other: &Self) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::DimensionMismatch { left: self.nvars, right: other.nvars });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        let mut out = Self::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca.clone() * cb.clone());
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Self {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v.clone() * c.clone())).collect(),
        }
    }

    /// Multiplies every term by a monomial.
    pub fn mul_monomial(&self, m: &Monomial) -> Self {
        Self {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(t, c)| (t.mul(m), c.clone())).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::constant(self.nvars, C::one());
        for _ in 0..e {
            out = out.try_mul(self).expect("same dimension");
        }
        out
    }

    /// Exact arithmetic dispatch.
    pub fn arith(&self, other: &Self, op: ArithOp<C>) -> Result<Self> {
        match op {
            ArithOp::Add => self.try_add(other),
            ArithOp::Sub => self.try_sub(other),
            ArithOp::Mul => self.try_mul(other),
            ArithOp::Scale(c) => Ok(self.scale(&c)),
        }
    }

    /// Same polynomial over a larger variable set.
    pub fn with_nvars(&self, nvars: usize) -> Result<Self> {
        let needed = self.terms.keys().map(Monomial::min_nvars).max().unwrap_or(0);
        if needed > nvars {
            return Err(Error::DimensionMismatch { left: needed, right: nvars });
        }
        Ok(Self { nvars, terms: self.terms.clone() })
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        self.terms.iter().map(|(m, c)| c.to_f64() * m.eval(point)).sum()
    }

    /// Converts the coefficients to `f64`.
    pub fn to_f64(&self) -> Polynomial<f64> {
        Polynomial::from_terms(self.nvars, self.terms.iter().map(|(m, c)| (m.clone(), c.to_f64())))
    }

    /// Renders the polynomial in the POP text syntax using `names`.
    pub fn display_with<'a>(&'a self, names: &'a [String]) -> impl fmt::Display + 'a {
        NamedPolynomial { poly: self, names: Some(names) }
    }
}

struct NamedPolynomial<'a, C: Coefficient> {
    poly: &'a Polynomial<C>,
    names: Option<&'a [String]>,
}

impl<C: Coefficient> fmt::Display for NamedPolynomial<'_, C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.poly.terms.iter().enumerate() {
            let neg = c.is_negative();
            match (k, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let lit = c.write_literal();
            let mono = match self.names {
                Some(n) => m.display_with(n).to_string(),
                None => m.to_string(),
            };
            if m.is_one() {
                f.write_str(&lit)?;
            } else if c.abs().is_one() {
                f.write_str(&mono)?;
            } else {
                write!(f, "{lit}*{mono}")?;
            }
        }
        Ok(())
    }
}

impl<C: Coefficient> fmt::Display for Polynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        NamedPolynomial { poly: self, names: None }.fmt(f)
    }
}

impl<C: Coefficient> fmt::Debug for Polynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial[{}]({self})", self.nvars)
    }
}
