//! Monodromy permutations from loops in the parameter line.
//!
//! Loops are based at a point `p` off the branch locus. Around each witness point `w` the
//! loop is a square with vertices `w ± eps`, `w ± eps i` traversed anti-clockwise and joined
//! to `p` by a straight connector. Transporting the base fiber around a loop and matching the
//! endpoints back to the start points gives a permutation of the fiber labels.

use std::f64::consts::TAU;

use rayon::prelude::*;

use crate::branch::{BranchWitness, LineCover};
use crate::error::{Error, Result};
use crate::group::Permutation;
use crate::random::{unit_disc, RunRng};
use crate::tracker::{inf_dist, segment_distance, ParameterHomotopy, PathPolygon, TrackerConfig};
use crate::Complex;

/// Fraction of the minimum witness separation used as the loop radius.
pub const EPSILON_FRACTION: f64 = 0.4;
pub const BASE_POINT_RETRIES: usize = 100;
pub const EPSILON_HALVINGS: usize = 4;
const AMBIGUITY_RATIO: f64 = 10.0;
const ENCLOSING_SIDES: usize = 64;

/// Loop radius for a witness set: `0.4` times the smallest pairwise distance, or `0.4` when
/// there are fewer than two points.
pub fn loop_epsilon(witness: &[Complex]) -> f64 {
    let mut sep = f64::INFINITY;
    for i in 0..witness.len() {
        for j in i + 1..witness.len() {
            sep = sep.min((witness[i] - witness[j]).norm());
        }
    }
    if sep.is_finite() {
        EPSILON_FRACTION * sep
    } else {
        EPSILON_FRACTION
    }
}

/// Loop radius used from base point `p`: [`loop_epsilon`], shrunk to `0.4 * dist(p, W)` when
/// `p` is closer than that allows.
pub fn loop_epsilon_at(witness: &[Complex], p: Complex) -> f64 {
    let d = witness
        .iter()
        .map(|w| (w - p).norm())
        .fold(f64::INFINITY, f64::min);
    loop_epsilon(witness).min(EPSILON_FRACTION * d)
}

/// Vertex of the square around `w` where the connector from `p` arrives.
///
/// `w + eps i` when `Im(w - p) <= 0`, otherwise `w - eps i`.
pub fn entry_vertex(w: Complex, p: Complex, epsilon: f64) -> Complex {
    if (w - p).im <= 0.0 {
        w + Complex::new(0.0, epsilon)
    } else {
        w - Complex::new(0.0, epsilon)
    }
}

/// True when `p` is more than `2 eps` from every witness point and each connector stays at
/// least `eps / 2` away from the other witness points.
pub fn is_valid_base_point(p: Complex, witness: &[Complex], epsilon: f64) -> bool {
    if witness.iter().any(|w| (w - p).norm() <= 2.0 * epsilon) {
        return false;
    }
    witness.iter().enumerate().all(|(i, &w)| {
        let entry = entry_vertex(w, p, epsilon);
        witness
            .iter()
            .enumerate()
            .all(|(j, &o)| i == j || segment_distance(p, entry, o) >= epsilon / 2.0)
    })
}

/// Random base point sampled from a disc around the witness centroid, with the loop radius
/// it is valid for.
///
/// Tries [`BASE_POINT_RETRIES`] draws with `eps = loop_epsilon(witness)`; when none is valid
/// `eps` is halved (up to [`EPSILON_HALVINGS`] times), which thins the clearance tubes
/// around the connectors.
pub fn choose_base_point(witness: &[Complex], rng: &mut RunRng) -> Result<(Complex, f64)> {
    if witness.is_empty() {
        return Err(Error::InvalidInput("empty witness set".into()));
    }
    let mut eps = loop_epsilon(witness);
    let center = witness.iter().sum::<Complex>() / witness.len() as f64;
    let radius = 1.5
        * witness
            .iter()
            .map(|w| (w - center).norm())
            .fold(1.0, f64::max)
        + 2.0 * eps;
    for _ in 0..=EPSILON_HALVINGS {
        for _ in 0..BASE_POINT_RETRIES {
            let p = center + unit_disc(rng) * radius;
            if is_valid_base_point(p, witness, eps) {
                return Ok((p, eps));
            }
        }
        eps /= 2.0;
    }
    Err(Error::BasePointRetriesExhausted(BASE_POINT_RETRIES * (EPSILON_HALVINGS + 1)))
}

/// Largest of `loop_epsilon_at(witness, p) / 2^j`, `j <= EPSILON_HALVINGS`, for which `p`
/// is a valid base point.
pub fn epsilon_for_base_point(witness: &[Complex], p: Complex) -> Option<f64> {
    let mut eps = loop_epsilon_at(witness, p);
    for _ in 0..=EPSILON_HALVINGS {
        if is_valid_base_point(p, witness, eps) {
            return Some(eps);
        }
        eps /= 2.0;
    }
    None
}

/// The base point with its fiber, labelled `0..k` for the whole run.
#[derive(Debug, Clone, PartialEq)]
pub struct BasePointFiber {
    pub p: Complex,
    pub fiber: Vec<Vec<Complex>>,
}

impl BasePointFiber {
    /// Checks that fiber points are pairwise farther apart than `2 * endpoint_match_tol` and
    /// satisfy the tracking system at `p`.
    pub fn new(
        h: &ParameterHomotopy,
        p: Complex,
        fiber: Vec<Vec<Complex>>,
        cfg: &TrackerConfig,
    ) -> Result<Self> {
        for (i, x) in fiber.iter().enumerate() {
            for (j, y) in fiber.iter().enumerate().skip(i + 1) {
                if inf_dist(x, y) <= 2.0 * cfg.endpoint_match_tol {
                    return Err(Error::PathCollision {
                        first: i,
                        second: j,
                        t: p,
                    });
                }
            }
            if h.residual(x, p) > h.residual_tol(x, cfg) {
                return Err(Error::NewtonDivergence {
                    t: p,
                    residual: h.residual(x, p),
                });
            }
        }
        Ok(BasePointFiber { p, fiber })
    }

    /// Solves for the fiber of `cover` over `p`.
    pub fn solve(cover: &LineCover, p: Complex, cfg: &TrackerConfig, rng: &mut RunRng) -> Result<Self> {
        let fiber = cover.fiber(p, cfg, rng)?;
        Self::new(&cover.homotopy()?, p, fiber, cfg)
    }

    pub fn k(&self) -> usize {
        self.fiber.len()
    }
}

/// A based loop around a single witness point.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopPath {
    pub target: Complex,
    pub polygon: PathPolygon,
    pub epsilon: f64,
}

impl LoopPath {
    /// The same loop traversed `n` times.
    pub fn repeated(&self, n: usize) -> PathPolygon {
        let a = self.polygon.anchors();
        let mut anchors = a.to_vec();
        for _ in 1..n {
            anchors.extend_from_slice(&a[1..]);
        }
        PathPolygon::new(anchors).expect("repeated loop keeps distinct consecutive anchors")
    }
}

/// `p -> entry -> ` four anti-clockwise edges of the square around `w` ` -> entry -> p`.
pub fn build_diamond_loop(w: Complex, p: Complex, epsilon: f64) -> Result<LoopPath> {
    let distance = (w - p).norm();
    if !(epsilon > 0.0 && epsilon < distance) {
        return Err(Error::EpsilonTooLarge { epsilon, distance });
    }
    let e = epsilon;
    let ring = [
        w + Complex::new(e, 0.0),
        w + Complex::new(0.0, e),
        w - Complex::new(e, 0.0),
        w - Complex::new(0.0, e),
    ];
    let start = if (w - p).im <= 0.0 { 1 } else { 3 };
    let mut anchors = vec![p];
    for i in 0..=4 {
        anchors.push(ring[(start + i) % 4]);
    }
    anchors.push(p);
    Ok(LoopPath {
        target: w,
        polygon: PathPolygon::new(anchors)?,
        epsilon,
    })
}

/// Where a monodromy loop came from.
#[derive(Debug, Clone, PartialEq)]
pub enum LoopSource {
    /// Square loop around witness point `index` (in anti-clockwise order) at `t`.
    Witness { index: usize, t: Complex, epsilon: f64 },
    /// Random polygon through the listed anchors.
    Random { anchors: Vec<Complex> },
    /// Large circle around every witness point.
    Enclosing { radius: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonodromyPermutation {
    pub sigma: Permutation,
    pub source: LoopSource,
    /// Largest distance between a transported point and its matched start point.
    pub max_match_residual: f64,
}

impl MonodromyPermutation {
    /// Identity permutation from a witness loop, as produced by superset points.
    pub fn is_artifact(&self) -> bool {
        matches!(self.source, LoopSource::Witness { .. }) && self.sigma.is_identity()
    }
}

/// Matches every transported point to the nearest start point.
///
/// `sigma[i]` is the start index matched by transported point `i`. Each nearest distance
/// must be below `tol / 2`, the second nearest must be ten times farther, and the result must
/// be a bijection.
pub fn match_endpoints(
    start: &[Vec<Complex>],
    end: &[Vec<Complex>],
    tol: f64,
) -> Result<(Permutation, f64)> {
    if start.len() != end.len() {
        return Err(Error::MatchingFailure(format!(
            "{} endpoints for {} start points",
            end.len(),
            start.len()
        )));
    }
    let mut images = Vec::with_capacity(end.len());
    let mut worst: f64 = 0.0;
    for (i, y) in end.iter().enumerate() {
        let mut d1 = f64::INFINITY;
        let mut d2 = f64::INFINITY;
        let mut best = 0;
        for (j, x) in start.iter().enumerate() {
            let d = inf_dist(x, y);
            if d < d1 {
                d2 = d1;
                d1 = d;
                best = j;
            } else if d < d2 {
                d2 = d;
            }
        }
        if d1 >= tol / 2.0 {
            return Err(Error::MatchingFailure(format!(
                "endpoint {i} is {d1:e} from the nearest start point"
            )));
        }
        if d2 <= AMBIGUITY_RATIO * d1 {
            return Err(Error::MatchingFailure(format!("endpoint {i} matches ambiguously")));
        }
        worst = worst.max(d1);
        images.push(best);
    }
    let sigma = Permutation::new(images)
        .map_err(|_| Error::MatchingFailure("endpoints do not match bijectively".into()))?;
    Ok((sigma, worst))
}

/// Transports the base fiber along a closed polygon and reads off the permutation.
pub fn permutation_along(
    h: &ParameterHomotopy,
    bpf: &BasePointFiber,
    anchors: &[Complex],
    cfg: &TrackerConfig,
) -> Result<(Permutation, f64)> {
    let end = h.transport_along(&bpf.fiber, anchors, cfg)?;
    match_endpoints(&bpf.fiber, &end, cfg.endpoint_match_tol)
}

fn is_retryable(e: &Error) -> bool {
    matches!(e, Error::MatchingFailure(_) | Error::PathCollision { .. })
}

/// Monodromy around a square loop. On ambiguous matching the loop is retried with halved
/// step sizes, then with halved `eps`.
pub fn monodromy_around(
    h: &ParameterHomotopy,
    bpf: &BasePointFiber,
    lp: &LoopPath,
    index: usize,
    cfg: &TrackerConfig,
) -> Result<MonodromyPermutation> {
    if lp.polygon.start() != bpf.p || !lp.polygon.is_closed() {
        return Err(Error::InvalidInput("loop is not based at the base point".into()));
    }
    let halved = cfg.halved_steps();
    let attempts = [(cfg.clone(), lp.clone()), (halved.clone(), lp.clone())];
    let mut last = None;
    for (c, l) in attempts {
        match permutation_along(h, bpf, l.polygon.anchors(), &c) {
            Ok(r) => return Ok(witness_result(r, &l, index)),
            Err(e) if is_retryable(&e) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    let smaller = build_diamond_loop(lp.target, bpf.p, lp.epsilon / 2.0)?;
    match permutation_along(h, bpf, smaller.polygon.anchors(), &halved) {
        Ok(r) => Ok(witness_result(r, &smaller, index)),
        Err(e) if is_retryable(&e) => Err(last.unwrap_or(e)),
        Err(e) => Err(e),
    }
}

fn witness_result((sigma, res): (Permutation, f64), lp: &LoopPath, index: usize) -> MonodromyPermutation {
    MonodromyPermutation {
        sigma,
        source: LoopSource::Witness {
            index,
            t: lp.target,
            epsilon: lp.epsilon,
        },
        max_match_residual: res,
    }
}

/// Witness points ordered anti-clockwise by `arg(w - p)`, starting just after the middle of
/// the widest angular gap. Returns the ordered indices and the direction of that gap.
pub fn anticlockwise_order(witness: &[Complex], p: Complex) -> (Vec<usize>, f64) {
    if witness.is_empty() {
        return (Vec::new(), 0.0);
    }
    let mut by_angle: Vec<(f64, usize)> = witness
        .iter()
        .enumerate()
        .map(|(i, w)| ((w - p).arg().rem_euclid(TAU), i))
        .collect();
    by_angle.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let n = by_angle.len();
    let mut gap_at = n - 1;
    let mut widest = by_angle[0].0 + TAU - by_angle[n - 1].0;
    for i in 0..n - 1 {
        let g = by_angle[i + 1].0 - by_angle[i].0;
        if g > widest {
            widest = g;
            gap_at = i;
        }
    }
    let gap_dir = by_angle[gap_at].0 + widest / 2.0;
    let order = (0..n).map(|j| by_angle[(gap_at + 1 + j) % n].1).collect();
    (order, gap_dir.rem_euclid(TAU))
}

/// Closed polygon from `p` out along the widest angular gap to a circle enclosing every
/// witness point, once around it anti-clockwise, and back.
pub fn enclosing_loop(witness: &[Complex], p: Complex) -> (PathPolygon, f64) {
    let (_, dir) = anticlockwise_order(witness, p);
    let reach = witness.iter().map(|w| (w - p).norm()).fold(0.0, f64::max);
    let radius = 2.0 * reach + 1.0;
    let mut anchors = vec![p];
    for j in 0..=ENCLOSING_SIDES {
        let theta = dir + TAU * j as f64 / ENCLOSING_SIDES as f64;
        anchors.push(p + Complex::from_polar(radius, theta));
    }
    anchors.push(p);
    (PathPolygon::new(anchors).expect("distinct anchors"), radius)
}

/// Permutation of the loop around every witness point at once.
pub fn enclosing_permutation(
    h: &ParameterHomotopy,
    bpf: &BasePointFiber,
    witness: &[Complex],
    cfg: &TrackerConfig,
) -> Result<MonodromyPermutation> {
    let (poly, radius) = enclosing_loop(witness, bpf.p);
    let (sigma, res) = permutation_along(h, bpf, poly.anchors(), cfg)?;
    Ok(MonodromyPermutation {
        sigma,
        source: LoopSource::Enclosing { radius },
        max_match_residual: res,
    })
}

/// Random closed polygon `p -> a_1 -> ... -> a_m -> p` with `m` in `3..=5`, every segment at
/// least `margin` from every witness point.
pub fn random_loop(witness: &[Complex], p: Complex, margin: f64, rng: &mut RunRng) -> Result<Vec<Complex>> {
    let center = if witness.is_empty() {
        p
    } else {
        witness.iter().sum::<Complex>() / witness.len() as f64
    };
    let radius = 1.5
        * witness
            .iter()
            .chain(std::iter::once(&p))
            .map(|w| (w - center).norm())
            .fold(1.0, f64::max);
    for _ in 0..BASE_POINT_RETRIES {
        let m = 3 + (unit_disc(rng).norm() * 3.0).floor().min(2.0) as usize;
        let mut anchors = vec![p];
        anchors.extend((0..m).map(|_| center + unit_disc(rng) * radius));
        anchors.push(p);
        let clear = anchors.windows(2).all(|s| {
            witness
                .iter()
                .all(|&w| segment_distance(s[0], s[1], w) >= margin)
        });
        if clear {
            return Ok(anchors);
        }
    }
    Err(Error::BasePointRetriesExhausted(BASE_POINT_RETRIES))
}

/// Permutation of one random loop avoiding the witness points by `eps / 2`.
pub fn random_loop_permutation(
    h: &ParameterHomotopy,
    bpf: &BasePointFiber,
    witness: &[Complex],
    cfg: &TrackerConfig,
    rng: &mut RunRng,
) -> Result<MonodromyPermutation> {
    let margin = loop_epsilon_at(witness, bpf.p) / 2.0;
    let anchors = random_loop(witness, bpf.p, margin, rng)?;
    let (sigma, res) = match permutation_along(h, bpf, &anchors, cfg) {
        Err(e) if is_retryable(&e) => permutation_along(h, bpf, &anchors, &cfg.halved_steps())?,
        r => r?,
    };
    Ok(MonodromyPermutation {
        sigma,
        source: LoopSource::Random { anchors },
        max_match_residual: res,
    })
}

/// Base point, fiber and one permutation per witness point.
#[derive(Debug, Clone)]
pub struct GeneratorSet {
    pub base: BasePointFiber,
    pub epsilon: f64,
    /// Witness points in the order the permutations are listed.
    pub ordered_witness: Vec<Complex>,
    pub loops: Vec<LoopPath>,
    pub permutations: Vec<MonodromyPermutation>,
}

impl GeneratorSet {
    pub fn degree(&self) -> usize {
        self.base.k()
    }

    /// Permutations that are not identity artifacts.
    pub fn generators(&self) -> Vec<Permutation> {
        self.permutations
            .iter()
            .filter(|m| !m.is_artifact())
            .map(|m| m.sigma.clone())
            .collect()
    }

    /// Left-to-right product of all permutations in listed order.
    pub fn product(&self) -> Permutation {
        self.permutations
            .iter()
            .fold(Permutation::identity(self.degree()), |acc, m| acc.then(&m.sigma))
    }
}

/// Monodromy generators of `cover` from the witness `bw`.
///
/// When `base_point` is `None` one is drawn with [`choose_base_point`]; then the fiber over it
/// is solved. A supplied base point uses [`epsilon_for_base_point`]. Loops run concurrently against the frozen fiber; results are
/// listed anti-clockwise as seen from the base point.
pub fn branch_point_generators(
    cover: &LineCover,
    bw: &BranchWitness,
    base_point: Option<Complex>,
    cfg: &TrackerConfig,
    rng: &mut RunRng,
) -> Result<GeneratorSet> {
    let witness = bw.values();
    let (p, epsilon) = match base_point {
        Some(p) if witness.is_empty() => (p, loop_epsilon(&witness)),
        Some(p) => match epsilon_for_base_point(&witness, p) {
            Some(eps) => (p, eps),
            None => {
                return Err(Error::InvalidInput(format!("base point {p} is too close to the branch locus")))
            }
        },
        None if witness.is_empty() => (unit_disc(rng), loop_epsilon(&witness)),
        None => choose_base_point(&witness, rng)?,
    };
    let base = BasePointFiber::solve(cover, p, cfg, rng)?;
    if bw.cover_degree != 0 && base.k() != bw.cover_degree {
        return Err(Error::DegreeMismatch {
            expected: bw.cover_degree,
            got: base.k(),
        });
    }
    let h = cover.homotopy()?;
    let (order, _) = anticlockwise_order(&witness, p);
    let ordered_witness: Vec<Complex> = order.iter().map(|&i| witness[i]).collect();
    let loops = ordered_witness
        .iter()
        .map(|&w| build_diamond_loop(w, p, epsilon))
        .collect::<Result<Vec<_>>>()?;
    let permutations = loops
        .par_iter()
        .enumerate()
        .map(|(i, lp)| monodromy_around(&h, &base, lp, i, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(GeneratorSet {
        base,
        epsilon,
        ordered_witness,
        loops,
        permutations,
    })
}
