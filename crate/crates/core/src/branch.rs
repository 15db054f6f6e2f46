//! Branch points of a cover restricted to a line.
//!
//! The critical locus of `x -> t` on the curve `G(x, t) = 0` is cut out by `G = 0` together
//! with a rank drop of `J_x G`. For a single equation in a single unknown this is
//! `{G, dG/dx}`; otherwise a null vector `v` is adjoined with `J_x G . v = 0` and a random
//! normalization `b . v = 1`. Projecting the critical points to `t` and clustering gives a
//! witness superset for the branch points on the line.

use num_traits::One;

use crate::error::{Error, Result};
use crate::poly::{apply_chart, restrict_to_line, AffineChart, LineEmbedding, PolySystem, Polynomial};
use crate::random::{unit_disc, RunRng};
use crate::solver::{fresh_name, lex_cmp, solve_square, square_up, ConditionFlag, SolutionSet, DEFAULT_DEDUP_TOL};
use crate::tracker::{inf_norm, ParameterHomotopy, TrackerConfig};
use crate::Complex;

pub const DEFAULT_CLUSTER_TOL: f64 = 1e-6;
/// Relative residual a point must reach on the unsquared equations to count as genuine.
const MEMBERSHIP_TOL: f64 = 1e-8;
const EXCLUSION_TOL: f64 = 1e-6;
/// Random lines tried by [`compute_branch_witness_retrying`].
pub const WITNESS_RETRIES: usize = 5;

/// A cover restricted to a line: an affine system in chart coordinates with the single
/// parameter `t`.
#[derive(Debug, Clone)]
pub struct LineCover {
    pub line: LineEmbedding,
    pub chart: AffineChart,
    /// Equations of the curve, as given (possibly more equations than unknowns).
    pub system: PolySystem,
    /// Square system with the same generic fiber, used for continuation.
    pub tracking: PolySystem,
    /// Solutions lying on a component over the whole line (such as a trivial solution);
    /// dropped from every fiber.
    pub excluded: Vec<Vec<Complex>>,
}

impl LineCover {
    /// Applies `chart`, restricts to `line` and squares the result up.
    ///
    /// Draws the squaring coefficients from `rng` when the system is overdetermined.
    pub fn new(
        sys: &PolySystem,
        line: LineEmbedding,
        chart: AffineChart,
        rng: &mut RunRng,
    ) -> Result<Self> {
        let affine = apply_chart(sys, &chart)?;
        let system = restrict_to_line(&affine, &line)?;
        let tracking = square_up(&system, rng)?;
        Ok(LineCover {
            line,
            chart,
            system,
            tracking,
            excluded: Vec::new(),
        })
    }

    pub fn with_excluded(mut self, excluded: Vec<Vec<Complex>>) -> Self {
        self.excluded = excluded;
        self
    }

    fn is_excluded(&self, x: &[Complex]) -> bool {
        self.excluded.iter().any(|e| {
            let d = x.iter().zip(e).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            d <= EXCLUSION_TOL * inf_norm(e).max(1.0)
        })
    }

    /// Like [`LineCover::new`], drawing a chart for every projective group first.
    pub fn with_random_chart(
        sys: &PolySystem,
        line: LineEmbedding,
        rng: &mut RunRng,
    ) -> Result<Self> {
        let chart = AffineChart::random_for(sys, rng);
        Self::new(sys, line, chart, rng)
    }

    pub fn homotopy(&self) -> Result<ParameterHomotopy> {
        ParameterHomotopy::new(&self.tracking)
    }

    /// True when `x` satisfies every equation of the curve at `t` up to rounding.
    pub fn contains(&self, x: &[Complex], t: Complex) -> bool {
        is_member(&self.system, x, &[t])
    }

    /// The fiber over `t`, sorted lexicographically; only regular points on the curve.
    pub fn fiber(&self, t: Complex, cfg: &TrackerConfig, rng: &mut RunRng) -> Result<Vec<Vec<Complex>>> {
        let sols = solve_square(&self.tracking, &[t], cfg, rng)?;
        Ok(sols
            .points
            .into_iter()
            .zip(sols.condition_flags)
            .filter(|(p, f)| *f == ConditionFlag::Regular && self.contains(p, t) && !self.is_excluded(p))
            .map(|(p, _)| p)
            .collect())
    }
}

fn is_member(sys: &PolySystem, x: &[Complex], u: &[Complex]) -> bool {
    let Ok(vals) = sys.eval(x, u) else {
        return false;
    };
    let scale = inf_norm(x).max(inf_norm(u)).max(1.0);
    let deg = sys.degrees().into_iter().max().unwrap_or(0).max(0) as i32;
    inf_norm(&vals) <= MEMBERSHIP_TOL * scale.powi(deg)
}

/// Critical-point system of a one-parameter curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalSystem {
    /// Variables `x ++ v` (no `v` in the hypersurface case), parameter `t`.
    pub augmented: PolySystem,
    /// Number of fiber unknowns `x`.
    pub fiber_vars: usize,
    /// Number of null-vector unknowns `v`.
    pub null_vars: usize,
    /// The normalization `b` in `b . v = 1` (empty in the hypersurface case).
    pub normalization: Vec<Complex>,
}

impl CriticalSystem {
    /// All unknowns including `t` (last), squared up for solving.
    pub fn solvable(&self, rng: &mut RunRng) -> Result<PolySystem> {
        square_up(&self.augmented.promote_parameters(), rng)
    }
}

/// Builds the critical system of `curve` (affine, single parameter `t`).
///
/// Draws the normalization `b` from `rng` when a null vector is needed.
pub fn build_critical_system(curve: &PolySystem, rng: &mut RunRng) -> Result<CriticalSystem> {
    if curve.nparams() != 1 {
        return Err(Error::DimensionMismatch {
            what: "parameter count of a curve over a line",
            expected: 1,
            got: curve.nparams(),
        });
    }
    let (m, r) = (curve.nvars(), curve.len());
    if r < m {
        return Err(Error::NotZeroDimensional(format!(
            "{r} equations in {m} unknowns"
        )));
    }
    if m == 1 && r == 1 {
        let g = &curve.equations()[0];
        let augmented = PolySystem::from_parts_unchecked(
            curve.variables().to_vec(),
            curve.parameters().to_vec(),
            vec![g.clone(), g.derivative(0)],
            Vec::new(),
        );
        return Ok(CriticalSystem {
            augmented,
            fiber_vars: 1,
            null_vars: 0,
            normalization: Vec::new(),
        });
    }
    // slots: x (m), v (m), t
    let n = 2 * m + 1;
    let lift: Vec<usize> = (0..m).chain(std::iter::once(2 * m)).collect();
    let mut eqs: Vec<Polynomial> = curve.equations().iter().map(|e| e.remap(&lift, n)).collect();
    for e in curve.equations() {
        let mut row = Polynomial::zero(n);
        for j in 0..m {
            let dj = e.derivative(j).remap(&lift, n);
            row = row.add(&dj.mul(&Polynomial::variable(n, m + j)));
        }
        eqs.push(row);
    }
    let normalization: Vec<Complex> = (0..m).map(|_| unit_disc(rng)).collect();
    let mut norm = Polynomial::constant(n, -Complex::one());
    for (j, &b) in normalization.iter().enumerate() {
        norm = norm.add(&Polynomial::variable(n, m + j).scale(b));
    }
    eqs.push(norm);
    let mut names = curve.names();
    let mut variables = curve.variables().to_vec();
    for j in 0..m {
        let v = fresh_name(&names, &format!("v{}", j + 1));
        names.push(v.clone());
        variables.push(v);
    }
    Ok(CriticalSystem {
        augmented: PolySystem::from_parts_unchecked(
            variables,
            curve.parameters().to_vec(),
            eqs,
            Vec::new(),
        ),
        fiber_vars: m,
        null_vars: m,
        normalization,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WitnessPoint {
    pub t: Complex,
    pub multiplicity: usize,
}

/// Clustered critical values on a line.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchWitness {
    /// Sorted lexicographically by `t`.
    pub points: Vec<WitnessPoint>,
    /// Critical points returned by the solver before filtering.
    pub critical_count: usize,
    /// Solver points rejected because they miss the unsquared critical equations.
    pub discarded: usize,
    /// Critical paths that left for infinity (points off this affine chart of the line).
    pub diverged: usize,
    /// Critical paths that failed to converge (typically singular critical points).
    pub failed: usize,
    /// Critical values where an excluded solution meets the rest of the fiber.
    pub excluded_crossings: usize,
    /// Minimum pairwise distance of the witness points (infinite for fewer than two).
    pub min_separation: f64,
    pub cluster_tol: f64,
    pub line: LineEmbedding,
    /// Cardinality of a generic fiber.
    pub cover_degree: usize,
}

impl BranchWitness {
    pub fn values(&self) -> Vec<Complex> {
        self.points.iter().map(|p| p.t).collect()
    }

    pub fn total_multiplicity(&self) -> usize {
        self.points.iter().map(|p| p.multiplicity).sum()
    }

    /// Distance from `t` to the nearest witness point.
    pub fn distance_to(&self, t: Complex) -> f64 {
        self.points
            .iter()
            .map(|p| (p.t - t).norm())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Single-linkage clustering of `values` within `tol`. Returns `(center, size)` sorted
/// lexicographically; two clusters closer than `10 * tol` are an ambiguity.
pub fn cluster_values(values: &[Complex], tol: f64) -> Result<Vec<WitnessPoint>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        let mut i = i;
        while parent[i] != r {
            let next = parent[i];
            parent[i] = r;
            i = next;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<(usize, Vec<Complex>)> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|(root, _)| *root == r) {
            Some((_, members)) => members.push(values[i]),
            None => groups.push((r, vec![values[i]])),
        }
    }
    let mut points: Vec<WitnessPoint> = groups
        .into_iter()
        .map(|(_, members)| WitnessPoint {
            t: members.iter().sum::<Complex>() / members.len() as f64,
            multiplicity: members.len(),
        })
        .collect();
    points.sort_by(|a, b| lex_cmp(&[a.t], &[b.t]));
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if (points[i].t - points[j].t).norm() < 10.0 * tol {
                return Err(Error::ClusterAmbiguity(points[i].t, points[j].t));
            }
        }
    }
    Ok(points)
}

fn min_separation(points: &[WitnessPoint]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            best = best.min((points[i].t - points[j].t).norm());
        }
    }
    best
}

/// A random parameter value at distance at least `margin` from every point of `avoid`,
/// drawn from a disc covering them.
pub fn random_regular_value(avoid: &[Complex], margin: f64, rng: &mut RunRng) -> Result<Complex> {
    let center = if avoid.is_empty() {
        Complex::new(0.0, 0.0)
    } else {
        avoid.iter().sum::<Complex>() / avoid.len() as f64
    };
    let radius = avoid
        .iter()
        .map(|w| (w - center).norm())
        .fold(1.0, f64::max)
        * 1.5;
    for _ in 0..100 {
        let t = center + unit_disc(rng) * radius;
        if avoid.iter().all(|w| (w - t).norm() > margin) {
            return Ok(t);
        }
    }
    Err(Error::BasePointRetriesExhausted(100))
}

/// Branch witness for `cover`.
///
/// Draws, in order: the critical-system normalization, its squaring coefficients, the
/// solver constants for the critical system, then two regular values with their fiber
/// solves for the degree check.
pub fn compute_branch_witness(
    cover: &LineCover,
    cfg: &TrackerConfig,
    cluster_tol: f64,
    rng: &mut RunRng,
) -> Result<BranchWitness> {
    let crit = build_critical_system(&cover.system, rng)?;
    let square = crit.solvable(rng)?;
    // a constant derivative (degree-one cover) has no critical points
    let sols = if square.equations().iter().any(|e| e.degree() == 0) {
        SolutionSet::empty(DEFAULT_DEDUP_TOL)
    } else {
        solve_square(&square, &[], cfg, rng)?
    };
    let full = crit.augmented.promote_parameters();
    let tpos = full.nvars() - 1;
    let mut values = Vec::new();
    let mut discarded = 0;
    for p in &sols.points {
        if is_member(&full, p, &[]) {
            values.push(p[tpos]);
        } else {
            discarded += 1;
        }
    }
    let crossings = excluded_crossings(cover, &crit, cfg, rng)?;
    let excluded_crossings = crossings.len();
    values.extend(crossings);
    let points = cluster_values(&values, cluster_tol)?;
    let ts: Vec<Complex> = points.iter().map(|p| p.t).collect();
    let sep = min_separation(&points);
    let margin = if sep.is_finite() { 0.1 * sep } else { 0.1 };
    let mut degree = None;
    for _ in 0..2 {
        let t = random_regular_value(&ts, margin, rng)?;
        let k = cover.fiber(t, cfg, rng)?.len();
        match degree {
            None => degree = Some(k),
            Some(d) if d != k => return Err(Error::DegreeMismatch { expected: d, got: k }),
            _ => {}
        }
    }
    Ok(BranchWitness {
        points,
        critical_count: sols.len(),
        discarded,
        diverged: sols.paths_diverged,
        failed: sols.paths_failed,
        excluded_crossings,
        min_separation: sep,
        cluster_tol,
        line: cover.line.clone(),
        cover_degree: degree.unwrap_or(0),
    })
}

/// Values of `t` where an excluded solution `e` is a critical point: the critical system with
/// `x = e` substituted, solved for the null vector and `t`. Other fiber points pass through
/// `e` there, so these belong to the branch locus of the remaining cover.
fn excluded_crossings(
    cover: &LineCover,
    crit: &CriticalSystem,
    cfg: &TrackerConfig,
    rng: &mut RunRng,
) -> Result<Vec<Complex>> {
    let (m, r) = (crit.fiber_vars, cover.system.len());
    let mut out = Vec::new();
    for e in &cover.excluded {
        for t in [Complex::new(0.0, 0.0), Complex::new(1.0, 0.0)] {
            if !cover.contains(e, t) {
                return Err(Error::InvalidInput(format!("excluded point {e:?} is not a solution over the whole line")));
            }
        }
        let rest = crit.null_vars + 1;
        let images: Vec<Polynomial> = e
            .iter()
            .map(|&c| Polynomial::constant(rest, c))
            .chain((0..rest).map(|j| Polynomial::variable(rest, j)))
            .collect();
        let eqs: Vec<Polynomial> = crit.augmented.equations()[r..]
            .iter()
            .map(|q| q.compose(&images))
            .collect();
        let mut names: Vec<String> = crit.augmented.variables()[m..].to_vec();
        names.extend(crit.augmented.parameters().iter().cloned());
        let sys = PolySystem::new(names, Vec::new(), eqs)?;
        let square = square_up(&sys, rng)?;
        let sols = solve_square(&square, &[], cfg, rng)?;
        out.extend(
            sols.points
                .iter()
                .filter(|p| is_member(&sys, p, &[]))
                .map(|p| p[rest - 1]),
        );
    }
    Ok(out)
}

/// Retries [`compute_branch_witness`] on fresh random lines (and charts) while clustering is
/// ambiguous. Each attempt draws the line, then the chart, from `rng`.
pub fn compute_branch_witness_retrying(
    sys: &PolySystem,
    cfg: &TrackerConfig,
    cluster_tol: f64,
    rng: &mut RunRng,
) -> Result<(LineCover, BranchWitness)> {
    for _ in 0..WITNESS_RETRIES {
        let line = LineEmbedding::random(sys.nparams(), rng);
        let cover = LineCover::with_random_chart(sys, line, rng)?;
        match compute_branch_witness(&cover, cfg, cluster_tol, rng) {
            Ok(bw) => return Ok((cover, bw)),
            Err(Error::ClusterAmbiguity(..)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::WitnessRetriesExhausted(WITNESS_RETRIES))
}

/// True iff the number of distinct witness points equals `expected`.
///
/// A nongeneric line meets the branch locus in fewer, higher-multiplicity points, which this
/// check reports even when the multiplicities still add up.
pub fn witness_degree_check(bw: &BranchWitness, expected: usize) -> bool {
    bw.points.len() == expected
}

/// Compares a witness with one computed on an independent random line. The first line is
/// declared nongeneric when it has a cluster larger than any cluster of the second and the
/// two point counts differ.
pub fn is_nongeneric_line(first: &BranchWitness, second: &BranchWitness) -> bool {
    let max2 = second.points.iter().map(|p| p.multiplicity).max().unwrap_or(0);
    first.points.iter().any(|p| p.multiplicity > max2) && first.points.len() != second.points.len()
        || first.points.len() < second.points.len()
}
