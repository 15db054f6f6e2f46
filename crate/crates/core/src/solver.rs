//! Total-degree homotopy solver for square systems at a fixed parameter value.
//!
//! The target is homogenized with an extra coordinate `x0` and tracked on a random
//! hyperplane patch `c . (x0, x) = 1`, so paths heading to infinity stay bounded and are
//! recognized by a vanishing `x0` at the end.

use std::cmp::Ordering;

use nalgebra::DMatrix;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::poly::{PolySystem, Polynomial, Term};
use crate::random::{unit_circle, unit_disc, RunRng};
use crate::tracker::{inf_dist, inf_norm, ParameterHomotopy, TrackStatus, TrackerConfig};
use crate::Complex;

/// Affine points beyond this norm are treated as solutions at infinity.
pub const DIVERGENCE_NORM: f64 = 1e8;
/// Jacobian condition estimate above which a point is flagged.
pub const SINGULAR_CONDITION: f64 = 1e10;
pub const DEFAULT_DEDUP_TOL: f64 = 1e-6;
/// Failed start paths are retracked this many times, halving the step bounds each time.
const PATH_RETRIES: usize = 2;

/// The start system `x_i^{d_i} - 1 = 0` (in homogeneous form `x_i^{d_i} - x0^{d_i}`).
#[derive(Debug, Clone, PartialEq)]
pub struct StartSystem {
    pub degrees: Vec<u32>,
    pub gamma: Complex,
    /// Affine start points: every combination of `d_i`-th roots of unity.
    pub start_points: Vec<Vec<Complex>>,
}

impl StartSystem {
    pub fn new(degrees: Vec<u32>, gamma: Complex) -> Self {
        let mut start_points: Vec<Vec<Complex>> = vec![Vec::new()];
        for &d in &degrees {
            let roots: Vec<Complex> = (0..d)
                .map(|j| Complex::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / d as f64))
                .collect();
            start_points = start_points
                .into_iter()
                .flat_map(|p| {
                    roots.iter().map(move |&r| {
                        let mut q = p.clone();
                        q.push(r);
                        q
                    })
                })
                .collect();
        }
        StartSystem {
            degrees,
            gamma,
            start_points,
        }
    }

    pub fn bezout_number(&self) -> usize {
        self.degrees.iter().map(|&d| d as usize).product()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionFlag {
    Regular,
    SuspectSingular,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionSet {
    pub points: Vec<Vec<Complex>>,
    pub residuals: Vec<f64>,
    pub condition_flags: Vec<ConditionFlag>,
    pub dedup_tol: f64,
    pub paths_tracked: usize,
    pub paths_failed: usize,
    pub paths_diverged: usize,
}

impl SolutionSet {
    /// No solutions and no paths, as for a system with a nonzero constant equation.
    pub fn empty(dedup_tol: f64) -> Self {
        SolutionSet {
            points: Vec::new(),
            residuals: Vec::new(),
            condition_flags: Vec::new(),
            dedup_tol,
            paths_tracked: 0,
            paths_failed: 0,
            paths_diverged: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points not flagged as suspect-singular.
    pub fn regular_points(&self) -> Vec<Vec<Complex>> {
        self.points
            .iter()
            .zip(&self.condition_flags)
            .filter(|(_, f)| **f == ConditionFlag::Regular)
            .map(|(p, _)| p.clone())
            .collect()
    }
}

/// Lexicographic order on coordinates, real part before imaginary part.
///
/// Coordinates are first compared on a grid of spacing `1e-8`, so that the order of a
/// solution set does not depend on rounding noise (e.g. in the real parts of a conjugate
/// pair); exact values only break ties inside a grid cell.
pub fn lex_cmp(a: &[Complex], b: &[Complex]) -> Ordering {
    let grid = |v: f64| (v * 1e8).round() + 0.0;
    let coarse = a.iter().zip(b).fold(Ordering::Equal, |o, (x, y)| {
        o.then(grid(x.re).total_cmp(&grid(y.re)))
            .then(grid(x.im).total_cmp(&grid(y.im)))
    });
    let fine = a.iter().zip(b).fold(Ordering::Equal, |o, (x, y)| {
        o.then(x.re.total_cmp(&y.re)).then(x.im.total_cmp(&y.im))
    });
    coarse.then(fine).then(a.len().cmp(&b.len()))
}

/// Appends a parameter that no equation depends on, so a parameter-free system can be
/// handled by the continuation code.
pub(crate) fn with_dummy_parameter(sys: &PolySystem) -> PolySystem {
    let n = sys.nvars() + sys.nparams();
    let map: Vec<usize> = (0..n).collect();
    let eqs = sys
        .equations()
        .iter()
        .map(|e| e.remap(&map, n + 1))
        .collect();
    let mut params = sys.parameters().to_vec();
    params.push(fresh_name(&sys.names(), "s"));
    PolySystem::from_parts_unchecked(sys.variables().to_vec(), params, eqs, Vec::new())
}

pub(crate) fn fresh_name(taken: &[String], stem: &str) -> String {
    let mut name = stem.to_string();
    let mut i = 0;
    while taken.contains(&name) {
        i += 1;
        name = format!("{stem}_{i}");
    }
    name
}

/// Homogenizes `p` (over `n` affine variables, no parameters) into `n + 2` slots:
/// `x0, x_1..x_n, s`.
fn homogenize(p: &Polynomial, d: u32) -> Polynomial {
    let n = p.nvars();
    let terms = p.terms().iter().map(|t| {
        let mut e = Vec::with_capacity(n + 2);
        e.push(d - t.degree());
        e.extend_from_slice(&t.exponents);
        e.push(0);
        Term {
            coeff: t.coeff,
            exponents: e,
        }
    });
    Polynomial::from_terms(n + 2, terms)
}

/// Random linear combinations reducing an overdetermined system to a square one.
///
/// A square system is returned unchanged and draws nothing from `rng`.
pub fn square_up(sys: &PolySystem, rng: &mut RunRng) -> Result<PolySystem> {
    let (r, m) = (sys.len(), sys.nvars());
    if r < m {
        return Err(Error::NotSquare {
            equations: r,
            variables: m,
        });
    }
    if r == m {
        return Ok(sys.clone());
    }
    let n = sys.nvars() + sys.nparams();
    let eqs = (0..m)
        .map(|_| {
            sys.equations()
                .iter()
                .fold(Polynomial::zero(n), |acc, e| acc.add(&e.scale(unit_disc(rng))))
        })
        .collect();
    Ok(PolySystem::from_parts_unchecked(
        sys.variables().to_vec(),
        sys.parameters().to_vec(),
        eqs,
        sys.projective_groups().to_vec(),
    ))
}

/// All isolated finite regular solutions of `sys` at parameter value `u`.
///
/// Draws `gamma` and then the patch coefficients from `rng`.
pub fn solve_square(
    sys: &PolySystem,
    u: &[Complex],
    cfg: &TrackerConfig,
    rng: &mut RunRng,
) -> Result<SolutionSet> {
    cfg.validate()?;
    let target = sys.specialize(u)?;
    if !target.is_square() {
        return Err(Error::NotSquare {
            equations: target.len(),
            variables: target.nvars(),
        });
    }
    let n = target.nvars();
    let mut degrees = Vec::with_capacity(n);
    for (i, e) in target.equations().iter().enumerate() {
        match e.degree() {
            d if d >= 1 => degrees.push(d as u32),
            -1 => {
                return Err(Error::NotZeroDimensional(format!(
                    "equation {i} vanishes identically"
                )))
            }
            _ => {
                return Err(Error::InvalidInput(format!(
                    "equation {i} is a nonzero constant"
                )))
            }
        }
    }
    let gamma = unit_circle(rng);
    let patch: Vec<Complex> = (0..=n).map(|_| unit_disc(rng)).collect();
    let start = StartSystem::new(degrees.clone(), gamma);

    // Homotopy over slots x0, x_1..x_n, s.
    let slots = n + 2;
    let s = Polynomial::variable(slots, n + 1);
    let one_minus_s = Polynomial::constant(slots, Complex::one()).sub(&s);
    let x0 = Polynomial::variable(slots, 0);
    let mut eqs = Vec::with_capacity(n + 1);
    for (i, f) in target.equations().iter().enumerate() {
        let d = degrees[i];
        let g = Polynomial::variable(slots, i + 1).pow(d).sub(&x0.pow(d));
        let fh = homogenize(f, d);
        eqs.push(one_minus_s.mul(&g).scale(gamma).add(&s.mul(&fh)));
    }
    let mut lin = Polynomial::constant(slots, -Complex::one());
    for (j, &c) in patch.iter().enumerate() {
        lin = lin.add(&Polynomial::variable(slots, j).scale(c));
    }
    eqs.push(lin);
    let mut vars = vec![fresh_name(target.variables(), "x0")];
    vars.extend(target.variables().iter().cloned());
    let hsys = PolySystem::from_parts_unchecked(vars, vec!["s".into()], eqs, Vec::new());
    let homotopy = ParameterHomotopy::new(&hsys)?;

    let affine = ParameterHomotopy::new(&with_dummy_parameter(&target))?;
    let zero = Complex::zero();

    let outcomes: Vec<Option<Option<Vec<Complex>>>> = start
        .start_points
        .par_iter()
        .map(|p| {
            let mut hom: Vec<Complex> = std::iter::once(Complex::one())
                .chain(p.iter().copied())
                .collect();
            let scale: Complex = hom.iter().zip(&patch).map(|(a, b)| a * b).sum();
            if scale.norm() < 1e-12 {
                return None;
            }
            for v in &mut hom {
                *v /= scale;
            }
            let mut r = homotopy.track_segment(&hom, zero, Complex::one(), cfg);
            let mut retry_cfg = *cfg;
            for _ in 0..PATH_RETRIES {
                if r.status == TrackStatus::Success {
                    break;
                }
                retry_cfg = retry_cfg.halved_steps();
                r = homotopy.track_segment(&hom, zero, Complex::one(), &retry_cfg);
            }
            if r.status != TrackStatus::Success {
                return None;
            }
            let x0 = r.endpoint[0];
            let x: Vec<Complex> = r.endpoint[1..].iter().map(|v| v / x0).collect();
            if x0.norm() == 0.0
                || !x.iter().all(|v| v.re.is_finite() && v.im.is_finite())
                || inf_norm(&x) > DIVERGENCE_NORM
            {
                return Some(None);
            }
            match affine.newton_refine(&x, zero, cfg) {
                Ok(x) if inf_norm(&x) <= DIVERGENCE_NORM => Some(Some(x)),
                Ok(_) => Some(None),
                Err(_) => None,
            }
        })
        .collect();

    let paths_tracked = outcomes.len();
    let paths_failed = outcomes.iter().filter(|o| o.is_none()).count();
    let paths_diverged = outcomes
        .iter()
        .filter(|o| matches!(o, Some(None)))
        .count();
    if paths_tracked > 0 && paths_failed == paths_tracked {
        return Err(Error::AllPathsFailed(paths_tracked));
    }
    let mut found: Vec<Vec<Complex>> = outcomes.into_iter().flatten().flatten().collect();
    found.sort_by(|a, b| lex_cmp(a, b));
    let dedup_tol = DEFAULT_DEDUP_TOL;
    let mut points: Vec<Vec<Complex>> = Vec::new();
    for p in found {
        if !points.iter().any(|q| inf_dist(q, &p) <= dedup_tol) {
            points.push(p);
        }
    }
    let residuals = points.iter().map(|p| affine.residual(p, zero)).collect();
    let condition_flags = points
        .iter()
        .map(|p| {
            let jac = target.jacobian_x(p, &[]).unwrap_or_else(|_| DMatrix::zeros(n, n));
            condition_flag(&jac)
        })
        .collect();
    Ok(SolutionSet {
        points,
        residuals,
        condition_flags,
        dedup_tol,
        paths_tracked,
        paths_failed,
        paths_diverged,
    })
}

pub(crate) fn condition_number(jac: &DMatrix<Complex>) -> f64 {
    let sv = jac.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn condition_flag(jac: &DMatrix<Complex>) -> ConditionFlag {
    if condition_number(jac) > SINGULAR_CONDITION {
        ConditionFlag::SuspectSingular
    } else {
        ConditionFlag::Regular
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::seeded;

    fn c(re: f64) -> Complex {
        Complex::new(re, 0.0)
    }

    #[test]
    fn start_points_satisfy_start_equations() {
        let st = StartSystem::new(vec![3, 2], unit_circle(&mut seeded(1)));
        assert_eq!(st.start_points.len(), 6);
        assert!((st.gamma.norm() - 1.0).abs() < 1e-15);
        for p in &st.start_points {
            assert!((p[0].powu(3) - c(1.0)).norm() < 1e-14);
            assert!((p[1].powu(2) - c(1.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn quartic_fiber_at_three() {
        let q = PolySystem::parse(&["x"], &["t"], &["x^4 - 4*x^2 + t"]).unwrap();
        let sol = solve_square(&q, &[c(3.0)], &TrackerConfig::default(), &mut seeded(3)).unwrap();
        let expected = [-(3f64.sqrt()), -1.0, 1.0, 3f64.sqrt()];
        assert_eq!(sol.len(), 4, "{sol:?}");
        for (p, e) in sol.points.iter().zip(expected) {
            assert!((p[0] - c(e)).norm() < 1e-10, "{p:?} vs {e}");
        }
        assert!(sol.residuals.iter().all(|&r| r <= 1e-10));
        assert_eq!(sol.paths_failed, 0);
    }

    #[test]
    fn product_of_quadratics() {
        let s = PolySystem::parse(&["x", "y"], &[], &["x^2 - 1", "y^2 - 1"]).unwrap();
        let sol = solve_square(&s, &[], &TrackerConfig::default(), &mut seeded(5)).unwrap();
        assert_eq!(sol.len(), 4);
        for p in &sol.points {
            assert!((p[0].norm() - 1.0).abs() < 1e-10 && p[0].im.abs() < 1e-10);
            assert!((p[1].norm() - 1.0).abs() < 1e-10 && p[1].im.abs() < 1e-10);
        }
    }

    #[test]
    fn solutions_at_infinity_are_dropped() {
        // x*y - 1 and x - 2: Bezout 2, one finite solution
        let s = PolySystem::parse(&["x", "y"], &[], &["x*y - 1", "x - 2"]).unwrap();
        let sol = solve_square(&s, &[], &TrackerConfig::default(), &mut seeded(9)).unwrap();
        assert_eq!(sol.len(), 1);
        assert!((sol.points[0][1] - c(0.5)).norm() < 1e-10);
        assert_eq!(sol.paths_tracked, 2);
    }

    #[test]
    fn square_up_identity_on_square_systems() {
        let s = PolySystem::parse(&["x"], &["t"], &["x^2 - t"]).unwrap();
        assert_eq!(square_up(&s, &mut seeded(1)).unwrap(), s);
    }

    #[test]
    fn square_up_keeps_original_solutions() {
        let s = PolySystem::parse(
            &["x", "y", "z"],
            &[],
            &["x - 1", "y - 2", "z + 1", "x*y*z + 2"],
        )
        .unwrap();
        let sq = square_up(&s, &mut seeded(2)).unwrap();
        assert_eq!(sq.len(), 3);
        let v = sq.eval(&[c(1.0), c(2.0), c(-1.0)], &[]).unwrap();
        assert!(v.iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn square_up_rejects_underdetermined() {
        let s = PolySystem::parse(&["x", "y"], &[], &["x - y"]).unwrap();
        assert!(matches!(
            square_up(&s, &mut seeded(2)),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn point_set_independent_of_seed() {
        let q = PolySystem::parse(&["x", "y"], &["t"], &["x^3 + y^2 - t", "x*y - 2 + t*x"]).unwrap();
        let cfg = TrackerConfig::default();
        let reference = solve_square(&q, &[c(0.7)], &cfg, &mut seeded(0)).unwrap();
        assert_eq!(reference.paths_failed, 0);
        for seed in 1..40 {
            let other = solve_square(&q, &[c(0.7)], &cfg, &mut seeded(seed)).unwrap();
            assert_eq!(other.len(), reference.len(), "seed {seed} {other:?}");
            for (a, b) in other.points.iter().zip(&reference.points) {
                assert!(inf_dist(a, b) < 1e-8, "seed {seed}");
            }
        }
    }
}
