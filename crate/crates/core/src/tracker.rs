//! Predictor-corrector continuation of solutions of a one-parameter square system.
//!
//! A segment `t_from -> t_to` is parameterized by `tau` in `[0, 1]`. Each step predicts with
//! the Euler tangent `dx/dtau = -J_x^{-1} * dF/dt * (t_to - t_from)` and corrects with Newton
//! at the new `t`. Steps shrink by `step_cut` on corrector failure and grow by `step_expand`
//! after four consecutive successes, never exceeding `initial_step`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::poly::{PolySystem, Polynomial};
use crate::Complex;

/// Newton iterations allowed per predictor step; a prediction that needs more is treated
/// as a failed step, which keeps the corrector inside the basin of the tracked path.
const CORRECTOR_ITERS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerConfig {
    /// Threshold on the Newton step norm (relative to `max(1, |x|)`) and on the residual.
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    /// Largest step, as a fraction of the segment being tracked.
    pub initial_step: f64,
    pub min_step: f64,
    pub step_expand: f64,
    pub step_cut: f64,
    /// Distance under which two points of a fiber are considered the same.
    pub endpoint_match_tol: f64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            newton_tol: 1e-10,
            max_newton_iters: 10,
            initial_step: 0.05,
            min_step: 1e-7,
            step_expand: 1.5,
            step_cut: 0.5,
            endpoint_match_tol: 1e-6,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.newton_tol > 0.0
            && self.endpoint_match_tol > 0.0
            && self.min_step > 0.0
            && self.min_step <= self.initial_step
            && self.initial_step <= 1.0
            && self.step_cut > 0.0
            && self.step_cut < 1.0
            && self.step_expand > 1.0
            && self.max_newton_iters > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("{self:?}")))
        }
    }

    /// Same configuration with every step bound halved.
    pub fn halved_steps(&self) -> Self {
        TrackerConfig {
            initial_step: self.initial_step / 2.0,
            min_step: (self.min_step / 2.0).min(self.initial_step / 2.0),
            ..*self
        }
    }
}

/// A piecewise-linear path `anchors[0] -> anchors[1] -> ...` in the parameter line.
#[derive(Debug, Clone, PartialEq)]
pub struct PathPolygon {
    anchors: Vec<Complex>,
}

impl PathPolygon {
    pub fn new(anchors: Vec<Complex>) -> Result<Self> {
        if anchors.len() < 2 {
            return Err(Error::InvalidInput("a path needs at least two anchors".into()));
        }
        if anchors.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("consecutive path anchors coincide".into()));
        }
        Ok(PathPolygon { anchors })
    }

    /// Drops consecutive duplicate anchors; `None` when the path is constant.
    pub fn collapsed(anchors: &[Complex]) -> Option<Self> {
        let mut out: Vec<Complex> = Vec::with_capacity(anchors.len());
        for &a in anchors {
            if out.last() != Some(&a) {
                out.push(a);
            }
        }
        (out.len() >= 2).then_some(PathPolygon { anchors: out })
    }

    pub fn anchors(&self) -> &[Complex] {
        &self.anchors
    }

    pub fn start(&self) -> Complex {
        self.anchors[0]
    }

    pub fn end(&self) -> Complex {
        *self.anchors.last().unwrap()
    }

    pub fn is_closed(&self) -> bool {
        self.start() == self.end()
    }

    pub fn reversed(&self) -> Self {
        let mut anchors = self.anchors.clone();
        anchors.reverse();
        PathPolygon { anchors }
    }

    /// Smallest distance from `w` to any segment of the polygon.
    pub fn distance_to(&self, w: Complex) -> f64 {
        self.anchors
            .windows(2)
            .map(|s| segment_distance(s[0], s[1], w))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Euclidean distance from `w` to the segment `[a, b]` of the complex plane.
pub fn segment_distance(a: Complex, b: Complex, w: Complex) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (w - a).norm();
    }
    let s = ((w - a) * d.conj()).re / len2;
    let s = s.clamp(0.0, 1.0);
    (a + d * s - w).norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackStatus {
    Success,
    StepUnderflow,
    NewtonDivergence,
    SingularJacobian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackResult {
    pub endpoint: Vec<Complex>,
    pub status: TrackStatus,
    pub steps_taken: usize,
    pub final_residual: f64,
    /// Parameter value reached (equals the segment end on success).
    pub t_reached: Complex,
}

/// A square system in `x` with one parameter `t`, with derivatives precomputed.
#[derive(Debug, Clone)]
pub struct ParameterHomotopy {
    nvars: usize,
    /// Per equation: the terms as (coeff, exponents over x ++ [t]).
    equations: Vec<Polynomial>,
    max_exp: Vec<usize>,
    degree: i32,
}

/// Values of `F`, `J_x F` and `dF/dt` at one point.
struct Evaluation {
    f: DVector<Complex>,
    jac: DMatrix<Complex>,
    dt: DVector<Complex>,
}

impl ParameterHomotopy {
    pub fn new(sys: &PolySystem) -> Result<Self> {
        if sys.nparams() != 1 {
            return Err(Error::DimensionMismatch {
                what: "parameter count for continuation",
                expected: 1,
                got: sys.nparams(),
            });
        }
        if !sys.is_square() {
            return Err(Error::NotSquare {
                equations: sys.len(),
                variables: sys.nvars(),
            });
        }
        let n = sys.nvars() + 1;
        let max_exp = (0..n)
            .map(|v| {
                sys.equations()
                    .iter()
                    .map(|e| e.max_exponent(v) as usize)
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let degree = sys
            .equations()
            .iter()
            .map(|e| e.degree_in(&(0..sys.nvars()).collect::<Vec<_>>()))
            .max()
            .unwrap_or(0)
            .max(0) as i32;
        Ok(ParameterHomotopy {
            degree,
            nvars: sys.nvars(),
            equations: sys.equations().to_vec(),
            max_exp,
        })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    fn evaluate(&self, x: &[Complex], t: Complex, want_dt: bool) -> Evaluation {
        let m = self.nvars;
        let mut point: Vec<Complex> = x.to_vec();
        point.push(t);
        let powers: Vec<Vec<Complex>> = point
            .iter()
            .zip(&self.max_exp)
            .map(|(&p, &e)| {
                let mut row = Vec::with_capacity(e + 1);
                row.push(Complex::new(1.0, 0.0));
                for k in 1..=e {
                    row.push(row[k - 1] * p);
                }
                row
            })
            .collect();
        let mut f = DVector::zeros(self.equations.len());
        let mut jac = DMatrix::zeros(self.equations.len(), m);
        let mut dt = DVector::zeros(self.equations.len());
        let vars = if want_dt { m + 1 } else { m };
        for (i, eq) in self.equations.iter().enumerate() {
            for term in eq.terms() {
                let e = &term.exponents;
                let mut mono = term.coeff;
                for (k, &ek) in e.iter().enumerate() {
                    if ek > 0 {
                        mono *= powers[k][ek as usize];
                    }
                }
                f[i] += mono;
                for j in 0..vars {
                    let ej = e[j];
                    if ej == 0 {
                        continue;
                    }
                    let mut d = term.coeff * ej as f64 * powers[j][ej as usize - 1];
                    for (k, &ek) in e.iter().enumerate() {
                        if k != j && ek > 0 {
                            d *= powers[k][ek as usize];
                        }
                    }
                    if j < m {
                        jac[(i, j)] += d;
                    } else {
                        dt[i] += d;
                    }
                }
            }
        }
        Evaluation { f, jac, dt }
    }

    pub fn residual(&self, x: &[Complex], t: Complex) -> f64 {
        let mut point = x.to_vec();
        point.push(t);
        self.equations
            .iter()
            .map(|e| e.eval(&point).norm())
            .fold(0.0, f64::max)
    }

    /// Residual threshold at `x`: `newton_tol` for points in the unit box, growing like
    /// `|x|^deg` beyond it to track the rounding error of evaluation.
    pub fn residual_tol(&self, x: &[Complex], cfg: &TrackerConfig) -> f64 {
        cfg.newton_tol * scale(x).powi(self.degree)
    }

    /// One Newton step `x - J_x^{-1} F` at fixed `t`.
    pub fn newton_step(&self, x: &[Complex], t: Complex) -> Result<Vec<Complex>> {
        let ev = self.evaluate(x, t, false);
        let dx = ev.jac.lu().solve(&ev.f).ok_or(Error::SingularJacobian { t })?;
        let next: Vec<Complex> = x.iter().zip(dx.iter()).map(|(a, d)| a - d).collect();
        if next.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            Ok(next)
        } else {
            Err(Error::SingularJacobian { t })
        }
    }

    /// Newton iteration until both the step and the residual are below `newton_tol`.
    pub fn newton_refine(
        &self,
        x: &[Complex],
        t: Complex,
        cfg: &TrackerConfig,
    ) -> Result<Vec<Complex>> {
        let mut x = x.to_vec();
        for _ in 0..cfg.max_newton_iters {
            let next = self.newton_step(&x, t)?;
            let step = inf_dist(&next, &x);
            x = next;
            if step <= cfg.newton_tol * scale(&x) && self.residual(&x, t) <= self.residual_tol(&x, cfg) {
                return Ok(x);
            }
        }
        let residual = self.residual(&x, t);
        Err(Error::NewtonDivergence { t, residual })
    }

    /// Corrector used inside continuation; also rejects non-contracting iterations.
    fn correct(&self, x: &[Complex], t: Complex, cfg: &TrackerConfig) -> Option<Vec<Complex>> {
        let mut x = x.to_vec();
        let mut prev = f64::INFINITY;
        for _ in 0..cfg.max_newton_iters.min(CORRECTOR_ITERS) {
            let next = self.newton_step(&x, t).ok()?;
            let step = inf_dist(&next, &x);
            let s = scale(&next);
            if step > 0.5 * prev && step > 10.0 * cfg.newton_tol * s {
                return None;
            }
            prev = step;
            x = next;
            if step <= cfg.newton_tol * s {
                return (self.residual(&x, t) <= self.residual_tol(&x, cfg)).then_some(x);
            }
        }
        None
    }

    pub fn track_segment(
        &self,
        x: &[Complex],
        t_from: Complex,
        t_to: Complex,
        cfg: &TrackerConfig,
    ) -> TrackResult {
        let delta = t_to - t_from;
        if delta == Complex::new(0.0, 0.0) {
            return TrackResult {
                endpoint: x.to_vec(),
                status: TrackStatus::Success,
                steps_taken: 0,
                final_residual: self.residual(x, t_from),
                t_reached: t_from,
            };
        }
        let mut x = x.to_vec();
        let mut tau = 0.0f64;
        let mut h = cfg.initial_step;
        let mut streak = 0;
        let mut steps = 0;
        let fail = |x: Vec<Complex>, tau: f64, status, steps| {
            let t = t_from + delta * tau;
            TrackResult {
                final_residual: self.residual(&x, t),
                endpoint: x,
                status,
                steps_taken: steps,
                t_reached: t,
            }
        };
        while tau < 1.0 {
            let h_eff = h.min(1.0 - tau);
            let t = t_from + delta * tau;
            let ev = self.evaluate(&x, t, true);
            let rhs = -ev.dt * delta;
            let tangent = match ev.jac.lu().solve(&rhs) {
                Some(v) => v,
                None => return fail(x, tau, TrackStatus::SingularJacobian, steps),
            };
            let predicted: Vec<Complex> = x
                .iter()
                .zip(tangent.iter())
                .map(|(a, d)| a + d * h_eff)
                .collect();
            let next_tau = if tau + h_eff >= 1.0 - 1e-15 {
                1.0
            } else {
                tau + h_eff
            };
            let t_next = if next_tau == 1.0 {
                t_to
            } else {
                t_from + delta * next_tau
            };
            match self.correct(&predicted, t_next, cfg) {
                Some(corrected) => {
                    x = corrected;
                    tau = next_tau;
                    steps += 1;
                    streak += 1;
                    if streak >= 4 {
                        h = (h * cfg.step_expand).min(cfg.initial_step);
                        streak = 0;
                    }
                }
                None => {
                    h *= cfg.step_cut;
                    streak = 0;
                    if h < cfg.min_step {
                        return fail(x, tau, TrackStatus::StepUnderflow, steps);
                    }
                }
            }
        }
        match self.newton_refine(&x, t_to, cfg) {
            Ok(end) => TrackResult {
                final_residual: self.residual(&end, t_to),
                endpoint: end,
                status: TrackStatus::Success,
                steps_taken: steps,
                t_reached: t_to,
            },
            Err(Error::SingularJacobian { .. }) => {
                fail(x, 1.0, TrackStatus::SingularJacobian, steps)
            }
            Err(_) => fail(x, 1.0, TrackStatus::NewtonDivergence, steps),
        }
    }

    /// Continues every fiber point along `path`. Points are checked for pairwise
    /// separation at each anchor.
    pub fn transport_fiber(
        &self,
        fiber: &[Vec<Complex>],
        path: &PathPolygon,
        cfg: &TrackerConfig,
    ) -> Result<Vec<Vec<Complex>>> {
        check_separated(fiber, cfg.endpoint_match_tol, path.start())?;
        let mut current = fiber.to_vec();
        for seg in path.anchors().windows(2) {
            let (a, b) = (seg[0], seg[1]);
            let results: Vec<TrackResult> = current
                .par_iter()
                .map(|x| self.track_segment(x, a, b, cfg))
                .collect();
            let mut next = Vec::with_capacity(results.len());
            for (index, r) in results.into_iter().enumerate() {
                if r.status != TrackStatus::Success {
                    return Err(Error::PathFailure {
                        index,
                        source: Box::new(status_error(r.status, r.t_reached, r.final_residual)),
                    });
                }
                next.push(r.endpoint);
            }
            check_separated(&next, cfg.endpoint_match_tol, b)?;
            current = next;
        }
        Ok(current)
    }

    /// Like [`transport_fiber`](Self::transport_fiber) but accepts degenerate anchor lists;
    /// a constant path transports every point to itself.
    pub fn transport_along(
        &self,
        fiber: &[Vec<Complex>],
        anchors: &[Complex],
        cfg: &TrackerConfig,
    ) -> Result<Vec<Vec<Complex>>> {
        match PathPolygon::collapsed(anchors) {
            Some(path) => self.transport_fiber(fiber, &path, cfg),
            None => Ok(fiber.to_vec()),
        }
    }
}

fn status_error(status: TrackStatus, t: Complex, residual: f64) -> Error {
    match status {
        TrackStatus::StepUnderflow => Error::StepUnderflow { t },
        TrackStatus::SingularJacobian => Error::SingularJacobian { t },
        _ => Error::NewtonDivergence { t, residual },
    }
}

fn check_separated(points: &[Vec<Complex>], tol: f64, t: Complex) -> Result<()> {
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if inf_dist(&points[i], &points[j]) < tol {
                return Err(Error::PathCollision {
                    first: i,
                    second: j,
                    t,
                });
            }
        }
    }
    Ok(())
}

pub(crate) fn inf_dist(a: &[Complex], b: &[Complex]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub(crate) fn inf_norm(a: &[Complex]) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

fn scale(x: &[Complex]) -> f64 {
    inf_norm(x).max(1.0)
}

/// Newton refinement on a one-parameter square system.
pub fn newton_refine(
    sys: &PolySystem,
    x: &[Complex],
    t: Complex,
    cfg: &TrackerConfig,
) -> Result<Vec<Complex>> {
    ParameterHomotopy::new(sys)?.newton_refine(x, t, cfg)
}

pub fn track_segment(
    sys: &PolySystem,
    x: &[Complex],
    t_from: Complex,
    t_to: Complex,
    cfg: &TrackerConfig,
) -> Result<TrackResult> {
    Ok(ParameterHomotopy::new(sys)?.track_segment(x, t_from, t_to, cfg))
}

pub fn transport_fiber(
    sys: &PolySystem,
    fiber: &[Vec<Complex>],
    path: &PathPolygon,
    cfg: &TrackerConfig,
) -> Result<Vec<Vec<Complex>>> {
    ParameterHomotopy::new(sys)?.transport_fiber(fiber, path, cfg)
}
