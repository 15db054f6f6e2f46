use num_traits::{One, Zero};

use super::polynomial::Polynomial;
use super::system::PolySystem;
use crate::error::{Error, Result};
use crate::random::{unit_disc, RunRng};
use crate::Complex;

/// An affine line `t -> base + t * direction` in parameter space.
#[derive(Debug, Clone, PartialEq)]
pub struct LineEmbedding {
    base: Vec<Complex>,
    direction: Vec<Complex>,
}

impl LineEmbedding {
    pub fn new(base: Vec<Complex>, direction: Vec<Complex>) -> Result<Self> {
        if base.len() != direction.len() {
            return Err(Error::DimensionMismatch {
                what: "line direction",
                expected: base.len(),
                got: direction.len(),
            });
        }
        if direction.iter().all(|d| d.is_zero()) {
            return Err(Error::ZeroDirection);
        }
        Ok(LineEmbedding { base, direction })
    }

    /// The line `t -> t` in a one-dimensional parameter space.
    pub fn identity() -> Self {
        LineEmbedding {
            base: vec![Complex::zero()],
            direction: vec![Complex::one()],
        }
    }

    /// Base point and direction drawn from the unit disc, base first.
    pub fn random(dim: usize, rng: &mut RunRng) -> Self {
        let base = (0..dim).map(|_| unit_disc(rng)).collect();
        let direction = (0..dim).map(|_| unit_disc(rng)).collect();
        LineEmbedding { base, direction }
    }

    pub fn base(&self) -> &[Complex] {
        &self.base
    }

    pub fn direction(&self) -> &[Complex] {
        &self.direction
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    pub fn at(&self, t: Complex) -> Vec<Complex> {
        self.base
            .iter()
            .zip(&self.direction)
            .map(|(a, b)| a + t * b)
            .collect()
    }
}

/// Pulls the system back along `line`; the result has the single parameter `t`.
pub fn restrict_to_line(sys: &PolySystem, line: &LineEmbedding) -> Result<PolySystem> {
    if line.dim() != sys.nparams() {
        return Err(Error::DimensionMismatch {
            what: "line dimension",
            expected: sys.nparams(),
            got: line.dim(),
        });
    }
    let m = sys.nvars();
    let n = m + 1;
    let t = Polynomial::variable(n, m);
    let images: Vec<Polynomial> = (0..m)
        .map(|i| Polynomial::variable(n, i))
        .chain(line.base.iter().zip(&line.direction).map(|(&a, &b)| {
            Polynomial::constant(n, a).add(&t.scale(b))
        }))
        .collect();
    let eqs = sys.equations().iter().map(|e| e.compose(&images)).collect();
    let name = if sys.variables().iter().any(|v| v == "t") {
        "t_line".to_string()
    } else {
        "t".to_string()
    };
    Ok(PolySystem::from_parts_unchecked(
        sys.variables().to_vec(),
        vec![name],
        eqs,
        sys.projective_groups().to_vec(),
    ))
}

/// Affine parameterization `X = offset + basis * z` of one projective variable group.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartGroup {
    /// Homogeneous coordinates being replaced, `m + 1` names.
    pub projective: Vec<String>,
    /// Chart coordinates, `m` names.
    pub coordinates: Vec<String>,
    pub offset: Vec<Complex>,
    /// `(m + 1) x m`, row-major by projective coordinate.
    pub basis: Vec<Vec<Complex>>,
}

impl ChartGroup {
    /// Random chart; the chart coordinates reuse the names of the first `m` projective
    /// coordinates.
    pub fn random(projective: &[String], rng: &mut RunRng) -> Self {
        let m = projective.len() - 1;
        let offset = (0..=m).map(|_| unit_disc(rng)).collect();
        let basis = (0..=m)
            .map(|_| (0..m).map(|_| unit_disc(rng)).collect())
            .collect();
        ChartGroup {
            projective: projective.to_vec(),
            coordinates: projective[..m].to_vec(),
            offset,
            basis,
        }
    }

    /// The coordinate chart `projective[pinned] = 1`.
    pub fn coordinate(projective: &[String], pinned: usize) -> Self {
        let m = projective.len() - 1;
        let coordinates: Vec<String> = projective
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != pinned)
            .map(|(_, s)| s.clone())
            .collect();
        let mut offset = vec![Complex::zero(); m + 1];
        offset[pinned] = Complex::one();
        let mut basis = vec![vec![Complex::zero(); m]; m + 1];
        let mut col = 0;
        for (i, row) in basis.iter_mut().enumerate() {
            if i != pinned {
                row[col] = Complex::one();
                col += 1;
            }
        }
        ChartGroup {
            projective: projective.to_vec(),
            coordinates,
            offset,
            basis,
        }
    }
}

/// A collection of per-group charts.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AffineChart {
    pub groups: Vec<ChartGroup>,
}

impl AffineChart {
    /// Random charts for every projective group of `sys`, drawn in group order.
    pub fn random_for(sys: &PolySystem, rng: &mut RunRng) -> Self {
        AffineChart {
            groups: sys
                .projective_groups()
                .iter()
                .map(|g| ChartGroup::random(g, rng))
                .collect(),
        }
    }
}

/// Dehomogenizes `sys` through `chart`.
///
/// Each projective group is replaced, at the position of its first member, by the chart
/// coordinates; the result has no projective groups left.
pub fn apply_chart(sys: &PolySystem, chart: &AffineChart) -> Result<PolySystem> {
    for g in sys.projective_groups() {
        if !chart.groups.iter().any(|cg| &cg.projective == g) {
            return Err(Error::ChartMissingGroup(g.clone()));
        }
    }
    let mut new_vars: Vec<String> = Vec::new();
    // (group index, coordinate index) or kept variable
    for v in sys.variables() {
        match chart
            .groups
            .iter()
            .find(|cg| cg.projective.contains(v))
        {
            Some(cg) => {
                if &cg.projective[0] == v {
                    new_vars.extend(cg.coordinates.iter().cloned());
                }
            }
            None => new_vars.push(v.clone()),
        }
    }
    let np = sys.nparams();
    let n_new = new_vars.len() + np;
    let index_of = |name: &str| new_vars.iter().position(|v| v == name).unwrap();
    let mut images: Vec<Polynomial> = Vec::with_capacity(sys.nvars() + np);
    for v in sys.variables() {
        match chart.groups.iter().find(|cg| cg.projective.contains(v)) {
            Some(cg) => {
                let row = cg.projective.iter().position(|p| p == v).unwrap();
                let mut img = Polynomial::constant(n_new, cg.offset[row]);
                for (j, coord) in cg.coordinates.iter().enumerate() {
                    let z = Polynomial::variable(n_new, index_of(coord));
                    img = img.add(&z.scale(cg.basis[row][j]));
                }
                images.push(img);
            }
            None => images.push(Polynomial::variable(n_new, index_of(v))),
        }
    }
    for j in 0..np {
        images.push(Polynomial::variable(n_new, new_vars.len() + j));
    }
    let eqs = sys.equations().iter().map(|e| e.compose(&images)).collect();
    PolySystem::new(new_vars, sys.parameters().to_vec(), eqs)
}
