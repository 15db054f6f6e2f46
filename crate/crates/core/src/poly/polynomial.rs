use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::Complex;

/// One monomial `coeff * prod(v_i ^ exponents[i])`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coeff: Complex,
    pub exponents: Vec<u32>,
}

impl Term {
    pub fn degree(&self) -> u32 {
        self.exponents.iter().sum()
    }
}

/// A sparse polynomial in a fixed number of variables with complex coefficients.
///
/// Terms are kept sorted by exponent tuple, with no repeated tuples and no zero
/// coefficients, so structural equality is equality of polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    nvars: usize,
    terms: Vec<Term>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: Vec::new(),
        }
    }

    pub fn constant(nvars: usize, c: Complex) -> Self {
        Self::from_terms(
            nvars,
            vec![Term {
                coeff: c,
                exponents: vec![0; nvars],
            }],
        )
    }

    pub fn variable(nvars: usize, index: usize) -> Self {
        assert!(index < nvars, "variable index out of range");
        let mut exponents = vec![0; nvars];
        exponents[index] = 1;
        Polynomial {
            nvars,
            terms: vec![Term {
                coeff: Complex::one(),
                exponents,
            }],
        }
    }

    /// Builds a polynomial from arbitrary terms, merging duplicates and dropping zeros.
    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = Term>) -> Self {
        let mut acc: BTreeMap<Vec<u32>, Complex> = BTreeMap::new();
        for t in terms {
            assert_eq!(t.exponents.len(), nvars, "exponent tuple length");
            *acc.entry(t.exponents).or_insert_with(Complex::zero) += t.coeff;
        }
        Self::from_map(nvars, acc)
    }

    fn from_map(nvars: usize, acc: BTreeMap<Vec<u32>, Complex>) -> Self {
        let terms = acc
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(exponents, coeff)| Term { coeff, exponents })
            .collect();
        Polynomial { nvars, terms }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; the zero polynomial has degree -1.
    pub fn degree(&self) -> i64 {
        self.terms
            .iter()
            .map(|t| t.degree() as i64)
            .max()
            .unwrap_or(-1)
    }

    /// Total degree in the given subset of variables.
    pub fn degree_in(&self, vars: &[usize]) -> i64 {
        self.terms
            .iter()
            .map(|t| vars.iter().map(|&v| t.exponents[v] as i64).sum::<i64>())
            .max()
            .unwrap_or(-1)
    }

    pub fn max_exponent(&self, var: usize) -> u32 {
        self.terms
            .iter()
            .map(|t| t.exponents[var])
            .max()
            .unwrap_or(0)
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, other.nvars);
        Self::from_terms(
            self.nvars,
            self.terms.iter().chain(other.terms.iter()).cloned(),
        )
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Polynomial {
        self.scale(-Complex::one())
    }

    pub fn scale(&self, c: Complex) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: t.coeff * c,
                    exponents: t.exponents.clone(),
                })
                .collect(),
        }
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, other.nvars);
        let mut acc: BTreeMap<Vec<u32>, Complex> = BTreeMap::new();
        for a in &self.terms {
            for b in &other.terms {
                let e: Vec<u32> = a
                    .exponents
                    .iter()
                    .zip(&b.exponents)
                    .map(|(x, y)| x + y)
                    .collect();
                *acc.entry(e).or_insert_with(Complex::zero) += a.coeff * b.coeff;
            }
        }
        Self::from_map(self.nvars, acc)
    }

    pub fn pow(&self, mut e: u32) -> Polynomial {
        let mut result = Polynomial::constant(self.nvars, Complex::one());
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Partial derivative with respect to variable `var`.
    pub fn derivative(&self, var: usize) -> Polynomial {
        let terms = self.terms.iter().filter(|t| t.exponents[var] > 0).map(|t| {
            let mut exponents = t.exponents.clone();
            let e = exponents[var];
            exponents[var] -= 1;
            Term {
                coeff: t.coeff * e as f64,
                exponents,
            }
        });
        Self::from_terms(self.nvars, terms)
    }

    /// Evaluates at `point` (length `nvars`). Powers are tabulated once per variable and
    /// each term accumulates its product from the table.
    pub fn eval(&self, point: &[Complex]) -> Complex {
        debug_assert_eq!(point.len(), self.nvars);
        let mut sum = Complex::zero();
        for t in &self.terms {
            let mut m = t.coeff;
            for (x, &e) in point.iter().zip(&t.exponents) {
                if e > 0 {
                    m *= pow_small(*x, e);
                }
            }
            sum += m;
        }
        sum
    }

    /// Substitutes `images[i]` for variable `i`; all images share the target variable count.
    pub fn compose(&self, images: &[Polynomial]) -> Polynomial {
        assert_eq!(images.len(), self.nvars);
        let target = images.first().map(|p| p.nvars).unwrap_or(0);
        let mut powers: Vec<Vec<Polynomial>> = images
            .iter()
            .map(|p| vec![Polynomial::constant(target, Complex::one()), p.clone()])
            .collect();
        let mut acc = Polynomial::zero(target);
        for t in &self.terms {
            let mut m = Polynomial::constant(target, t.coeff);
            for (i, &e) in t.exponents.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let table = &mut powers[i];
                while table.len() <= e as usize {
                    let next = table.last().unwrap().mul(&table[1]);
                    table.push(next);
                }
                m = m.mul(&table[e as usize]);
            }
            acc = acc.add(&m);
        }
        acc
    }

    /// Re-indexes variables: old variable `i` becomes new variable `map[i]` in a space of
    /// `nvars` variables.
    pub fn remap(&self, map: &[usize], nvars: usize) -> Polynomial {
        assert_eq!(map.len(), self.nvars);
        let terms = self.terms.iter().map(|t| {
            let mut exponents = vec![0; nvars];
            for (i, &e) in t.exponents.iter().enumerate() {
                exponents[map[i]] += e;
            }
            Term {
                coeff: t.coeff,
                exponents,
            }
        });
        Self::from_terms(nvars, terms)
    }

    /// Renders the polynomial in the expression grammar accepted by the parser.
    pub fn to_expr(&self, names: &[String]) -> String {
        assert_eq!(names.len(), self.nvars);
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (n, t) in self.terms.iter().enumerate() {
            if n > 0 {
                out.push_str(" + ");
            }
            out.push_str(&format_coeff(t.coeff));
            for (name, &e) in names.iter().zip(&t.exponents) {
                match e {
                    0 => {}
                    1 => {
                        let _ = write!(out, "*{name}");
                    }
                    _ => {
                        let _ = write!(out, "*{name}^{e}");
                    }
                }
            }
        }
        out
    }

    pub fn check_finite(&self) -> Result<()> {
        if self
            .terms
            .iter()
            .all(|t| t.coeff.re.is_finite() && t.coeff.im.is_finite())
        {
            Ok(())
        } else {
            Err(Error::NonFinite("polynomial coefficients"))
        }
    }
}

fn format_coeff(c: Complex) -> String {
    if c.im == 0.0 {
        format!("{:?}", c.re)
    } else {
        format!("({:?} + {:?}*I)", c.re, c.im)
    }
}

#[inline]
pub(crate) fn pow_small(x: Complex, e: u32) -> Complex {
    match e {
        0 => Complex::one(),
        1 => x,
        2 => x * x,
        3 => x * x * x,
        _ => x.powu(e),
    }
}
