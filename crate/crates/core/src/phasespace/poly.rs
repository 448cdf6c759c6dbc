use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Multivariate polynomial with complex coefficients.
///
/// Variables are ordered `q_0..q_N, p_0..p_N`, matching [`PhasePoint`](super::PhasePoint).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "PolyRepr", try_from = "PolyRepr")]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Complex64>,
}

/// JSON form: `{"nvars": 2, "terms": [{"powers": [2, 0], "coeff": [0.5, 0.0]}]}`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyRepr {
    nvars: usize,
    terms: Vec<PolyTerm>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyTerm {
    powers: Vec<u32>,
    coeff: [f64; 2],
}

impl From<Polynomial> for PolyRepr {
    fn from(p: Polynomial) -> Self {
        let terms = p.terms.into_iter().map(|(powers, c)| PolyTerm { powers, coeff: [c.re, c.im] }).collect();
        PolyRepr { nvars: p.nvars, terms }
    }
}

impl TryFrom<PolyRepr> for Polynomial {
    type Error = crate::Error;

    fn try_from(r: PolyRepr) -> Result<Self> {
        let mut p = Polynomial::zero(r.nvars);
        for t in r.terms {
            if t.powers.len() != r.nvars {
                return Err(invalid(format!("term has {} powers for {} variables", t.powers.len(), r.nvars)));
            }
            p.add_term(t.powers, Complex64::new(t.coeff[0], t.coeff[1]));
        }
        Ok(p)
    }
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: impl Into<Complex64>) -> Self {
        Self::monomial(vec![0; nvars], c)
    }

    pub fn monomial(exponents: Vec<u32>, c: impl Into<Complex64>) -> Self {
        let mut p = Self::zero(exponents.len());
        p.add_term(exponents, c.into());
        p
    }

    /// The coordinate function `x_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(e, 1.0)
    }

    /// Position `q_j` in a system with `n_dof` degrees of freedom.
    pub fn q(n_dof: usize, j: usize) -> Self {
        Self::var(2 * n_dof, j)
    }

    /// Momentum `p_j` in a system with `n_dof` degrees of freedom.
    pub fn p(n_dof: usize, j: usize) -> Self {
        Self::var(2 * n_dof, n_dof + j)
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, Complex64)>) -> Result<Self> {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(invalid(format!("monomial has {} exponents, expected {nvars}", e.len())));
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    pub fn add_term(&mut self, exponents: Vec<u32>, c: Complex64) {
        debug_assert_eq!(exponents.len(), self.nvars);
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        let entry = self.terms.entry(exponents).or_insert(Complex64::new(0.0, 0.0));
        *entry += c;
        if *entry == Complex64::new(0.0, 0.0) {
            self.terms.retain(|_, v| *v != Complex64::new(0.0, 0.0));
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn n_dof(&self) -> usize {
        self.nvars / 2
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Complex64)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|e| e.iter().sum::<u32>() as usize).max().unwrap_or(0)
    }

    /// Coefficient of the monomial with the given exponents.
    pub fn coefficient(&self, exponents: &[u32]) -> Complex64 {
        self.terms.get(exponents).copied().unwrap_or_default()
    }

    pub fn scale(&self, c: impl Into<Complex64>) -> Self {
        let c = c.into();
        let mut out = Self::zero(self.nvars);
        for (e, v) in &self.terms {
            out.add_term(e.clone(), v * c);
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::constant(self.nvars, 1.0);
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    pub fn derivative(&self, var: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[var] > 0 {
                let mut d = e.clone();
                d[var] -= 1;
                out.add_term(d, c * e[var] as f64);
            }
        }
        out
    }

    /// Mixed partial derivative with multi-index `orders`.
    pub fn partial(&self, orders: &[u32]) -> Self {
        let mut out = Self::zero(self.nvars);
        'terms: for (e, c) in &self.terms {
            let mut d = e.clone();
            let mut factor = 1.0;
            for (k, &n) in orders.iter().enumerate() {
                if d[k] < n {
                    continue 'terms;
                }
                for j in 0..n {
                    factor *= (d[k] - j) as f64;
                }
                d[k] -= n;
            }
            out.add_term(d, c * factor);
        }
        out
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut m = 1.0;
            for (xi, &k) in x.iter().zip(e) {
                if k > 0 {
                    m *= xi.powi(k as i32);
                }
            }
            acc += c * m;
        }
        acc
    }

    pub fn eval_real(&self, x: &[f64]) -> f64 {
        self.eval(x).re
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.im.abs() <= tol * c.norm().max(1.0))
    }

    pub fn real_part(&self) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), Complex64::new(c.re, 0.0));
        }
        out
    }

    /// Drops coefficients with magnitude below `tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        let mut out = self.clone();
        out.terms.retain(|_, c| c.norm() > tol);
        out
    }

    /// Largest coefficient difference with another polynomial.
    pub fn max_coefficient_difference(&self, other: &Polynomial) -> f64 {
        let diff = self - other;
        diff.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// True when no monomial mixes position and momentum variables.
    pub fn is_separable(&self) -> bool {
        let n = self.n_dof();
        self.terms.keys().all(|e| {
            let has_q = e[..n].iter().any(|&k| k > 0);
            let has_p = e[n..].iter().any(|&k| k > 0);
            !(has_q && has_p)
        })
    }

    fn check_same(&self, other: &Polynomial) {
        assert_eq!(self.nvars, other.nvars, "polynomials over different variable sets");
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        self.check_same(rhs);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), *c);
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self.check_same(rhs);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -*c);
        }
        out
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        self.check_same(rhs);
        let mut out = Polynomial::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: Polynomial) -> Polynomial {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let n = self.n_dof();
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if c.im == 0.0 {
                write!(f, "{}", c.re)?;
            } else {
                write!(f, "({})", c)?;
            }
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let name = if i < n { format!("q{i}") } else { format!("p{}", i - n) };
                if k == 1 {
                    write!(f, "*{name}")?;
                } else {
                    write!(f, "*{name}^{k}")?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn products_and_derivatives() {
        let q = Polynomial::q(1, 0);
        let p = Polynomial::p(1, 0);
        let f = &q.pow(2) * &p;
        assert_eq!(f.degree(), 3);
        assert_eq!(f.derivative(0), (&q * &p).scale(2.0));
        assert_eq!(f.partial(&[2, 1]), Polynomial::constant(2, 2.0));
        assert!(f.partial(&[3, 0]).is_zero());
        assert_eq!(f.eval_real(&[2.0, 3.0]), 12.0);
    }

    #[test]
    fn cancellation_removes_terms() {
        let q = Polynomial::q(1, 0);
        assert!((&q - &q).is_zero());
    }

    #[test]
    fn separability() {
        let q = Polynomial::q(2, 0);
        let p = Polynomial::p(2, 1);
        assert!((&q.pow(4) + &p.pow(2)).is_separable());
        assert!(!(&q * &p).is_separable());
    }

    #[test]
    fn json_round_trip() {
        let h = &Polynomial::q(1, 0).pow(3).scale(Complex64::new(0.5, -1.0)) + &Polynomial::p(1, 0);
        let s = serde_json::to_string(&h).unwrap();
        assert_eq!(serde_json::from_str::<Polynomial>(&s).unwrap(), h);
        assert!(serde_json::from_str::<Polynomial>(r#"{"nvars":2,"terms":[{"powers":[1],"coeff":[1,0]}]}"#).is_err());
    }
}
