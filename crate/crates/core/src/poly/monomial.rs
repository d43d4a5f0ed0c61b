use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A monomial `x^α` stored sparsely as `(variable, exponent)` pairs.
///
/// Pairs are sorted by variable index and never carry a zero exponent, so two
/// equal monomials always have identical representations. Variable indices are
/// 0-based.
///
/// The [`Ord`] implementation is the graded order used for every basis in the
/// crate: ascending total degree, then, scanning variables from the lowest
/// index, the monomial with the larger exponent comes first. For variables
/// `x1, x3` this gives `1, x1, x3, x1^2, x1*x3, x3^2`.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Monomial {
    exps: Vec<(usize, u32)>,
    degree: u32,
}

impl Monomial {
    /// The constant monomial `1`.
    pub fn one() -> Self {
        Self::default()
    }

    /// The monomial `x_var`.
    pub fn var(var: usize) -> Self {
        Self { exps: vec![(var, 1)], degree: 1 }
    }

    /// Builds a monomial from arbitrary `(variable, exponent)` pairs. Repeated
    /// variables are multiplied together and zero exponents dropped.
    pub fn from_pairs<I: IntoIterator<Item = (usize, u32)>>(pairs: I) -> Self {
        let mut exps: Vec<(usize, u32)> = pairs.into_iter().filter(|&(_, e)| e > 0).collect();
        exps.sort_unstable_by_key(|&(v, _)| v);
        let mut merged: Vec<(usize, u32)> = Vec::with_capacity(exps.len());
        for (v, e) in exps {
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 += e,
                _ => merged.push((v, e)),
            }
        }
        let degree = merged.iter().map(|&(_, e)| e).sum();
        Self { exps: merged, degree }
    }

    /// Builds a monomial from a dense exponent vector.
    pub fn from_dense(exponents: &[u32]) -> Self {
        Self::from_pairs(exponents.iter().copied().enumerate())
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_one(&self) -> bool {
        self.exps.is_empty()
    }

    /// Exponent of variable `var` (zero when absent).
    pub fn exponent(&self, var: usize) -> u32 {
        self.exps
            .binary_search_by_key(&var, |&(v, _)| v)
            .map(|i| self.exps[i].1)
            .unwrap_or(0)
    }

    /// The stored `(variable, exponent)` pairs, sorted by variable.
    pub fn pairs(&self) -> &[(usize, u32)] {
        &self.exps
    }

    /// Variables with a positive exponent, ascending.
    pub fn vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.exps.iter().map(|&(v, _)| v)
    }

    /// True when every exponent is even, i.e. the monomial lies in `(2N)^n`.
    pub fn is_even(&self) -> bool {
        self.exps.iter().all(|&(_, e)| e % 2 == 0)
    }

    /// Dense exponent vector of length `nvars`.
    pub fn to_dense(&self, nvars: usize) -> Vec<u32> {
        let mut out = vec![0; nvars];
        for &(v, e) in &self.exps {
            out[v] = e;
        }
        out
    }

    /// Largest variable index plus one (0 for the constant monomial).
    pub fn min_nvars(&self) -> usize {
        self.exps.last().map_or(0, |&(v, _)| v + 1)
    }

    /// Product of two monomials (exponent addition).
    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut exps = Vec::with_capacity(self.exps.len() + other.exps.len());
        let (mut i, mut j) = (0, 0);
        while i < self.exps.len() && j < other.exps.len() {
            let (a, b) = (self.exps[i], other.exps[j]);
            match a.0.cmp(&b.0) {
                Ordering::Less => {
                    exps.push(a);
                    i += 1;
                }
                Ordering::Greater => {
                    exps.push(b);
                    j += 1;
                }
                Ordering::Equal => {
                    exps.push((a.0, a.1 + b.1));
                    i += 1;
                    j += 1;
                }
            }
        }
        exps.extend_from_slice(&self.exps[i..]);
        exps.extend_from_slice(&other.exps[j..]);
        Monomial { exps, degree: self.degree + other.degree }
    }

    /// Evaluates the monomial at a point.
    pub fn eval(&self, point: &[f64]) -> f64 {
        self.exps.iter().map(|&(v, e)| point[v].powi(e as i32)).product()
    }

    /// Renders the monomial with the given variable names (`1` for the constant).
    pub fn display_with<'a>(&'a self, names: &'a [String]) -> impl fmt::Display + 'a {
        NamedMonomial { mono: self, names: Some(names) }
    }
}

struct NamedMonomial<'a> {
    mono: &'a Monomial,
    names: Option<&'a [String]>,
}

impl fmt::Display for NamedMonomial<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.mono.exps.is_empty() {
            return f.write_str("1");
        }
        for (k, &(v, e)) in self.mono.exps.iter().enumerate() {
            if k > 0 {
                f.write_str("*")?;
            }
            match self.names.and_then(|n| n.get(v)) {
                Some(name) => f.write_str(name)?,
                None => write!(f, "x{}", v + 1)?,
            }
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for Monomial {
    /// Uses the 1-based user-facing names `x1, x2, ...`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        NamedMonomial { mono: self, names: None }.fmt(f)
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Monomial({self})")
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree.cmp(&other.degree).then_with(|| {
            let (a, b) = (&self.exps, &other.exps);
            let (mut i, mut j) = (0, 0);
            loop {
                match (a.get(i), b.get(j)) {
                    (None, None) => return Ordering::Equal,
                    // Same degree, so a monomial cannot run out first while the
                    // other still has exponent mass; kept for totality.
                    (None, Some(_)) => return Ordering::Greater,
                    (Some(_), None) => return Ordering::Less,
                    (Some(&(va, ea)), Some(&(vb, eb))) => {
                        if va != vb {
                            // The monomial using the lower-index variable wins.
                            return va.cmp(&vb);
                        }
                        if ea != eb {
                            return eb.cmp(&ea);
                        }
                        i += 1;
                        j += 1;
                    }
                }
            }
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
