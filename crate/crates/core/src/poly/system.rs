use nalgebra::DMatrix;

use super::parse::parse_polynomial;
use super::polynomial::Polynomial;
use crate::error::{Error, Result};
use crate::Complex;

/// A list of polynomials over `variables ++ parameters`.
///
/// `variables` are the fiber unknowns, `parameters` the coordinates of the base.
/// `projective_groups` lists variable groups that are homogeneous coordinates and
/// must be dehomogenized by an [`AffineChart`](super::AffineChart) before solving.
#[derive(Debug, Clone, PartialEq)]
pub struct PolySystem {
    variables: Vec<String>,
    parameters: Vec<String>,
    equations: Vec<Polynomial>,
    projective_groups: Vec<Vec<String>>,
}

impl PolySystem {
    pub fn new(
        variables: Vec<String>,
        parameters: Vec<String>,
        equations: Vec<Polynomial>,
    ) -> Result<Self> {
        let n = variables.len() + parameters.len();
        for (i, name) in variables.iter().chain(&parameters).enumerate() {
            if variables
                .iter()
                .chain(&parameters)
                .skip(i + 1)
                .any(|other| other == name)
            {
                return Err(Error::InvalidInput(format!("identifier `{name}` declared twice")));
            }
        }
        for eq in &equations {
            if eq.nvars() != n {
                return Err(Error::DimensionMismatch {
                    what: "exponent tuple length",
                    expected: n,
                    got: eq.nvars(),
                });
            }
            eq.check_finite()?;
        }
        Ok(PolySystem {
            variables,
            parameters,
            equations,
            projective_groups: Vec::new(),
        })
    }

    /// Parses each equation string over the declared identifiers.
    pub fn parse(variables: &[&str], parameters: &[&str], equations: &[&str]) -> Result<Self> {
        let variables: Vec<String> = variables.iter().map(|s| s.to_string()).collect();
        let parameters: Vec<String> = parameters.iter().map(|s| s.to_string()).collect();
        Self::parse_owned(variables, parameters, equations)
    }

    pub fn parse_owned<S: AsRef<str>>(
        variables: Vec<String>,
        parameters: Vec<String>,
        equations: &[S],
    ) -> Result<Self> {
        let names: Vec<String> = variables.iter().chain(&parameters).cloned().collect();
        let eqs = equations
            .iter()
            .map(|e| parse_polynomial(e.as_ref(), &names))
            .collect::<Result<Vec<_>>>()?;
        Self::new(variables, parameters, eqs)
    }

    pub fn with_projective_groups(mut self, groups: Vec<Vec<String>>) -> Result<Self> {
        for g in &groups {
            if g.len() < 2 {
                return Err(Error::InvalidInput(format!(
                    "projective group {g:?} needs at least two coordinates"
                )));
            }
            for name in g {
                if !self.variables.contains(name) {
                    return Err(Error::InvalidInput(format!(
                        "projective group member `{name}` is not a variable"
                    )));
                }
            }
        }
        self.projective_groups = groups;
        Ok(self)
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn parameters(&self) -> &[String] {
        &self.parameters
    }

    pub fn equations(&self) -> &[Polynomial] {
        &self.equations
    }

    pub fn projective_groups(&self) -> &[Vec<String>] {
        &self.projective_groups
    }

    pub fn nvars(&self) -> usize {
        self.variables.len()
    }

    pub fn nparams(&self) -> usize {
        self.parameters.len()
    }

    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    pub fn is_square(&self) -> bool {
        self.equations.len() == self.variables.len()
    }

    /// All identifiers in exponent-tuple order.
    pub fn names(&self) -> Vec<String> {
        self.variables
            .iter()
            .chain(&self.parameters)
            .cloned()
            .collect()
    }

    /// Total degree of each equation.
    pub fn degrees(&self) -> Vec<i64> {
        self.equations.iter().map(|e| e.degree()).collect()
    }

    fn point(&self, x: &[Complex], u: &[Complex]) -> Result<Vec<Complex>> {
        if x.len() != self.nvars() {
            return Err(Error::DimensionMismatch {
                what: "variable point",
                expected: self.nvars(),
                got: x.len(),
            });
        }
        if u.len() != self.nparams() {
            return Err(Error::DimensionMismatch {
                what: "parameter point",
                expected: self.nparams(),
                got: u.len(),
            });
        }
        Ok(x.iter().chain(u).copied().collect())
    }

    pub fn eval(&self, x: &[Complex], u: &[Complex]) -> Result<Vec<Complex>> {
        let p = self.point(x, u)?;
        let vals: Vec<Complex> = self.equations.iter().map(|e| e.eval(&p)).collect();
        if vals.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            Ok(vals)
        } else {
            Err(Error::NonFinite("system evaluation"))
        }
    }

    /// Matrix of partial derivatives with respect to the variables (not the parameters).
    pub fn jacobian_x(&self, x: &[Complex], u: &[Complex]) -> Result<DMatrix<Complex>> {
        let p = self.point(x, u)?;
        let m = self.nvars();
        let mut jac = DMatrix::zeros(self.len(), m);
        for (i, eq) in self.equations.iter().enumerate() {
            for j in 0..m {
                jac[(i, j)] = eq.derivative(j).eval(&p);
            }
        }
        if jac.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            Ok(jac)
        } else {
            Err(Error::NonFinite("Jacobian evaluation"))
        }
    }

    /// Substitutes fixed values for all parameters, leaving a system in the variables only.
    pub fn specialize(&self, u: &[Complex]) -> Result<PolySystem> {
        if u.len() != self.nparams() {
            return Err(Error::DimensionMismatch {
                what: "parameter point",
                expected: self.nparams(),
                got: u.len(),
            });
        }
        let m = self.nvars();
        let images: Vec<Polynomial> = (0..m)
            .map(|i| Polynomial::variable(m, i))
            .chain(u.iter().map(|&c| Polynomial::constant(m, c)))
            .collect();
        let eqs = self.equations.iter().map(|e| e.compose(&images)).collect();
        let mut out = PolySystem::new(self.variables.clone(), Vec::new(), eqs)?;
        out.projective_groups = self.projective_groups.clone();
        Ok(out)
    }

    /// Treats all parameters as additional unknowns (appended after the variables).
    pub fn promote_parameters(&self) -> PolySystem {
        PolySystem {
            variables: self.names(),
            parameters: Vec::new(),
            equations: self.equations.clone(),
            projective_groups: self.projective_groups.clone(),
        }
    }

    /// Renders every equation in the parser's grammar.
    pub fn to_expressions(&self) -> Vec<String> {
        let names = self.names();
        self.equations.iter().map(|e| e.to_expr(&names)).collect()
    }

    pub(crate) fn from_parts_unchecked(
        variables: Vec<String>,
        parameters: Vec<String>,
        equations: Vec<Polynomial>,
        projective_groups: Vec<Vec<String>>,
    ) -> Self {
        PolySystem {
            variables,
            parameters,
            equations,
            projective_groups,
        }
    }
}
