//! Fiber powers of a cover over a line and their decomposition into components.
//!
//! Points of the fiber power over `t` are `s`-tuples of fiber points. Tuples with distinct
//! entries are represented by tuples of fiber labels, so the action of a monodromy
//! permutation on them is read off from its action on the labels. Orbits found this way are
//! certified as components with the trace test: the coordinate sum over a union of
//! components moves affinely in `t`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::group::{Permutation, PermutationGroup};
use crate::monodromy::{loop_epsilon_at, random_loop_permutation, BasePointFiber};
use crate::poly::{PolySystem, Polynomial};
use crate::random::{unit_circle, RunRng};
use crate::solver::{fresh_name, solve_square, ConditionFlag};
use crate::tracker::{inf_dist, segment_distance, ParameterHomotopy, TrackerConfig};
use crate::Complex;

/// Largest `k^s` for which fiber powers are built numerically.
pub const FIBER_POWER_LIMIT: u128 = 100_000;
pub const DEFAULT_TRACE_TOL: f64 = 1e-6;
/// Consecutive non-refining random permutations after which the partition is accepted.
pub const STABLE_SAMPLES: usize = 5;
const MAX_SAMPLES: usize = 100;
const MAX_SAMPLE_FAILURES: usize = 10;
/// Largest cover degree accepted by [`galois_from_fiber_power`].
pub const MAX_GALOIS_DEGREE: usize = 6;

fn check_power(k: usize, s: usize) -> Result<()> {
    let states = (k as u128).checked_pow(s as u32).unwrap_or(u128::MAX);
    if states > FIBER_POWER_LIMIT {
        return Err(Error::Infeasible(states));
    }
    Ok(())
}

/// The `s`-fold fiber power of a square one-parameter system.
#[derive(Debug, Clone)]
pub struct FiberPowerSystem {
    pub s: usize,
    pub system: PolySystem,
    pub diagonal_tol: f64,
}

/// Copies the equations of `curve` on `s` disjoint sets of unknowns sharing the parameter.
/// Copy `j` of unknown `x` is named `x_j`.
pub fn build_fiber_power(curve: &PolySystem, s: usize, k: usize) -> Result<FiberPowerSystem> {
    if s < 2 {
        return Err(Error::InvalidInput("fiber powers need s >= 2".into()));
    }
    check_power(k, s)?;
    let n = curve.nvars();
    let np = curve.nparams();
    let mut taken: Vec<String> = curve.parameters().to_vec();
    let mut vars = Vec::with_capacity(n * s);
    for j in 1..=s {
        for v in curve.variables() {
            let name = fresh_name(&taken, &format!("{v}_{j}"));
            taken.push(name.clone());
            vars.push(name);
        }
    }
    let slots = n * s + np;
    let mut eqs: Vec<Polynomial> = Vec::with_capacity(curve.len() * s);
    for j in 0..s {
        let map: Vec<usize> = (0..n).map(|i| j * n + i).chain((0..np).map(|p| n * s + p)).collect();
        eqs.extend(curve.equations().iter().map(|e| e.remap(&map, slots)));
    }
    Ok(FiberPowerSystem {
        s,
        system: PolySystem::new(vars, curve.parameters().to_vec(), eqs)?,
        diagonal_tol: 1e-6,
    })
}

impl FiberPowerSystem {
    /// Solves the product system over `t`: all regular points.
    pub fn fiber(&self, t: Complex, cfg: &TrackerConfig, rng: &mut RunRng) -> Result<Vec<Vec<Complex>>> {
        let sols = solve_square(&self.system, &[t], cfg, rng)?;
        Ok(sols
            .points
            .into_iter()
            .zip(sols.condition_flags)
            .filter(|(_, f)| *f == ConditionFlag::Regular)
            .map(|(p, _)| p)
            .collect())
    }

    /// Drops points with two coordinate blocks within `diagonal_tol`.
    pub fn off_diagonal(&self, points: Vec<Vec<Complex>>) -> Vec<Vec<Complex>> {
        let n = self.system.nvars() / self.s;
        points
            .into_iter()
            .filter(|p| {
                let blocks: Vec<&[Complex]> = p.chunks(n).collect();
                (0..self.s).all(|i| (i + 1..self.s).all(|j| inf_dist(blocks[i], blocks[j]) > self.diagonal_tol))
            })
            .collect()
    }
}

/// All `s`-tuples of distinct labels in `0..k`, lexicographically.
pub fn distinct_tuples(k: usize, s: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(s);
    fn rec(k: usize, s: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == s {
            out.push(cur.clone());
            return;
        }
        for a in 0..k {
            if !cur.contains(&a) {
                cur.push(a);
                rec(k, s, cur, out);
                cur.pop();
            }
        }
    }
    rec(k, s, &mut cur, &mut out);
    out
}

/// Partition of the distinct `s`-tuples into orbits under a growing set of permutations.
#[derive(Debug, Clone)]
pub struct TuplePartition {
    pub k: usize,
    pub s: usize,
    pub tuples: Vec<Vec<usize>>,
    parent: Vec<usize>,
    parts: usize,
}

impl TuplePartition {
    pub fn new(k: usize, s: usize) -> Result<Self> {
        check_power(k, s)?;
        let tuples = distinct_tuples(k, s);
        let n = tuples.len();
        Ok(TuplePartition {
            k,
            s,
            tuples,
            parent: (0..n).collect(),
            parts: n,
        })
    }

    fn index(&self, t: &[usize]) -> usize {
        // position of t among lexicographically ordered distinct tuples
        let mut idx = 0;
        let mut used = vec![false; self.k];
        for (pos, &a) in t.iter().enumerate() {
            let smaller = (0..a).filter(|&b| !used[b]).count();
            let rest = self.k - pos - 1;
            let block: usize = (0..self.s - pos - 1).map(|i| rest - i).product();
            idx += smaller * block;
            used[a] = true;
        }
        idx
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
            self.parts -= 1;
        }
    }

    /// Merges every tuple with its image under `sigma`; returns true if parts were merged.
    pub fn absorb(&mut self, sigma: &Permutation) -> bool {
        let before = self.parts;
        for i in 0..self.tuples.len() {
            let img: Vec<usize> = self.tuples[i].iter().map(|&a| sigma.apply(a)).collect();
            let j = self.index(&img);
            self.union(i, j);
        }
        self.parts < before
    }

    pub fn merge_parts(&mut self, a: usize, b: usize) {
        self.union(a, b);
    }

    pub fn part_count(&self) -> usize {
        self.parts
    }

    /// Parts as lists of tuple indices, ordered by their smallest member.
    pub fn parts(&mut self) -> Vec<Vec<usize>> {
        let n = self.tuples.len();
        let mut slot = vec![usize::MAX; n];
        let mut out: Vec<Vec<usize>> = Vec::new();
        for i in 0..n {
            let r = self.find(i);
            if slot[r] == usize::MAX {
                slot[r] = out.len();
                out.push(Vec::new());
            }
            out[slot[r]].push(i);
        }
        out
    }
}

/// Fibers over three collinear parameter values, with labels inherited from the base fiber.
#[derive(Debug, Clone)]
pub struct TraceData {
    pub t: [Complex; 3],
    pub fibers: [Vec<Vec<Complex>>; 3],
}

impl TraceData {
    /// Transports the base fiber along straight segments to `t1` and `t2`.
    pub fn new(
        h: &ParameterHomotopy,
        bpf: &BasePointFiber,
        t1: Complex,
        t2: Complex,
        cfg: &TrackerConfig,
    ) -> Result<Self> {
        let t0 = bpf.p;
        if t1 == t0 || t2 == t0 || t1 == t2 {
            return Err(Error::InvalidInput("trace test values must be distinct".into()));
        }
        let cross = (t1 - t0) * (t2 - t0).conj();
        if cross.im.abs() > 1e-12 * (t1 - t0).norm() * (t2 - t0).norm() {
            return Err(Error::InvalidInput("trace test values must be collinear".into()));
        }
        let f1 = h.transport_along(&bpf.fiber, &[t0, t1], cfg)?;
        let f2 = h.transport_along(&bpf.fiber, &[t0, t2], cfg)?;
        Ok(TraceData {
            t: [t0, t1, t2],
            fibers: [bpf.fiber.clone(), f1, f2],
        })
    }

    /// Draws `t1 = p + d u`, `t2 = p - d u` with `d = 0.1 * sep` and a random unit `u`, keeping
    /// both segments `margin` away from every witness point.
    pub fn random(
        h: &ParameterHomotopy,
        bpf: &BasePointFiber,
        witness: &[Complex],
        cfg: &TrackerConfig,
        rng: &mut RunRng,
    ) -> Result<Self> {
        let margin = loop_epsilon_at(witness, bpf.p) / 2.0;
        let sep = min_separation(witness);
        let d = 0.1 * if sep.is_finite() { sep } else { 1.0 };
        for _ in 0..100 {
            let u = unit_circle(rng);
            let (t1, t2) = (bpf.p + u * d, bpf.p - u * d);
            if witness
                .iter()
                .all(|&w| segment_distance(t2, t1, w) >= margin)
            {
                return Self::new(h, bpf, t1, t2, cfg);
            }
        }
        Err(Error::BasePointRetriesExhausted(100))
    }

    fn trace(&self, which: usize, tuples: &[&[usize]]) -> (Vec<Complex>, f64) {
        let fiber = &self.fibers[which];
        let n = fiber.first().map_or(0, |x| x.len());
        let s = tuples.first().map_or(0, |t| t.len());
        let mut sum = vec![Complex::new(0.0, 0.0); n * s];
        let mut mass = 0.0;
        for t in tuples {
            for (j, &a) in t.iter().enumerate() {
                for (i, x) in fiber[a].iter().enumerate() {
                    sum[j * n + i] += x;
                    mass += x.norm();
                }
            }
        }
        (sum, mass)
    }

    /// True iff the traces of `tuples` at the three values are affinely collinear in `t`:
    /// `(S1 - S0)/(t1 - t0)` and `(S2 - S0)/(t2 - t0)` agree to `tol` relative to the total
    /// coordinate mass.
    pub fn is_linear(&self, tuples: &[&[usize]], tol: f64) -> bool {
        let (s0, m0) = self.trace(0, tuples);
        let (s1, m1) = self.trace(1, tuples);
        let (s2, m2) = self.trace(2, tuples);
        let d1 = self.t[1] - self.t[0];
        let d2 = self.t[2] - self.t[0];
        let scale = m0.max(m1).max(m2).max(1.0);
        let err = s0
            .iter()
            .zip(&s1)
            .zip(&s2)
            .map(|((a, b), c)| ((b - a) / d1 - (c - a) / d2).norm())
            .fold(0.0, f64::max);
        err <= tol * scale
    }
}

fn min_separation(witness: &[Complex]) -> f64 {
    let mut sep = f64::INFINITY;
    for i in 0..witness.len() {
        for j in i + 1..witness.len() {
            sep = sep.min((witness[i] - witness[j]).norm());
        }
    }
    sep
}

/// Trace test of a set of label tuples between `t0 = bpf.p`, `t1` and `t2`.
pub fn trace_test(
    h: &ParameterHomotopy,
    bpf: &BasePointFiber,
    part: &[Vec<usize>],
    t1: Complex,
    t2: Complex,
    cfg: &TrackerConfig,
    tol: f64,
) -> Result<bool> {
    let data = TraceData::new(h, bpf, t1, t2, cfg)?;
    let refs: Vec<&[usize]> = part.iter().map(|t| t.as_slice()).collect();
    Ok(data.is_linear(&refs, tol))
}

/// Decomposition of the distinct-tuple fiber of the `s`-th fiber power over `base_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessDecomposition {
    pub base_t: Complex,
    pub k: usize,
    pub s: usize,
    pub tuples: Vec<Vec<usize>>,
    /// Parts as indices into `tuples`, ordered by smallest member.
    pub parts: Vec<Vec<usize>>,
    pub certified: Vec<bool>,
    pub degrees: Vec<usize>,
    /// Number of tuples on the big diagonal, `k^s - k!/(k-s)!`.
    pub diagonal_size: usize,
    /// Random permutations drawn before the partition stabilized.
    pub samples: usize,
}

impl WitnessDecomposition {
    pub fn all_certified(&self) -> bool {
        self.certified.iter().all(|&c| c)
    }

    pub fn part_tuples(&self, part: usize) -> Vec<Vec<usize>> {
        self.parts[part].iter().map(|&i| self.tuples[i].clone()).collect()
    }

    /// Index of the part containing `tuple`.
    pub fn part_of(&self, tuple: &[usize]) -> Option<usize> {
        let i = self.tuples.iter().position(|t| t == tuple)?;
        self.parts.iter().position(|p| p.contains(&i))
    }

    pub fn sorted_degrees(&self) -> Vec<usize> {
        let mut d = self.degrees.clone();
        d.sort_unstable();
        d
    }
}

/// Orbit partition of distinct `s`-tuples under the given permutations alone.
pub fn decompose_by_generators(k: usize, s: usize, generators: &[Permutation]) -> Result<Vec<Vec<Vec<usize>>>> {
    let mut tp = TuplePartition::new(k, s)?;
    for g in generators {
        tp.absorb(g);
    }
    let tuples = tp.tuples.clone();
    Ok(tp
        .parts()
        .into_iter()
        .map(|p| p.into_iter().map(|i| tuples[i].clone()).collect())
        .collect())
}

/// Breaks the distinct `s`-tuples of the base fiber into orbits of the given generators and
/// of random loops, then certifies each part with the trace test.
///
/// Random loops are drawn until [`STABLE_SAMPLES`] consecutive ones merge nothing. Parts that
/// fail the trace test are merged pairwise with other failing parts whose union passes. A
/// single part holding every distinct tuple is certified without a trace computation.
pub fn decompose_by_monodromy(
    h: &ParameterHomotopy,
    bpf: &BasePointFiber,
    witness: &[Complex],
    generators: &[Permutation],
    s: usize,
    cfg: &TrackerConfig,
    trace_tol: f64,
    rng: &mut RunRng,
) -> Result<WitnessDecomposition> {
    let k = bpf.k();
    let mut tp = TuplePartition::new(k, s)?;
    for g in generators {
        tp.absorb(g);
    }
    let mut stable = 0;
    let mut samples = 0;
    let mut failures = 0;
    while tp.part_count() > 1 && stable < STABLE_SAMPLES && samples < MAX_SAMPLES {
        match random_loop_permutation(h, bpf, witness, cfg, rng) {
            Ok(m) => {
                samples += 1;
                if tp.absorb(&m.sigma) {
                    stable = 0;
                } else {
                    stable += 1;
                }
            }
            Err(e) => {
                failures += 1;
                if failures > MAX_SAMPLE_FAILURES {
                    return Err(e);
                }
            }
        }
    }
    let data = TraceData::random(h, bpf, witness, cfg, rng)?;
    let tuples = tp.tuples.clone();
    let passes = |tp: &mut TuplePartition| -> Vec<(Vec<usize>, bool)> {
        tp.parts()
            .into_par_iter()
            .map(|p| {
                let refs: Vec<&[usize]> = p.iter().map(|&i| tuples[i].as_slice()).collect();
                // the whole distinct-tuple fiber is a union of components by definition
                let ok = p.len() == tuples.len() || data.is_linear(&refs, trace_tol);
                (p, ok)
            })
            .collect()
    };
    let mut current = passes(&mut tp);
    loop {
        let failing: Vec<usize> = (0..current.len()).filter(|&i| !current[i].1).collect();
        let mut merged = false;
        'outer: for (n, &a) in failing.iter().enumerate() {
            for &b in &failing[n + 1..] {
                let refs: Vec<&[usize]> = current[a]
                    .0
                    .iter()
                    .chain(&current[b].0)
                    .map(|&i| tuples[i].as_slice())
                    .collect();
                if data.is_linear(&refs, trace_tol) {
                    tp.merge_parts(current[a].0[0], current[b].0[0]);
                    merged = true;
                    break 'outer;
                }
            }
        }
        if !merged {
            break;
        }
        current = passes(&mut tp);
    }
    let parts: Vec<Vec<usize>> = current.iter().map(|(p, _)| p.clone()).collect();
    let certified = current.iter().map(|(_, c)| *c).collect();
    let degrees = parts.iter().map(|p| p.len()).collect();
    Ok(WitnessDecomposition {
        base_t: bpf.p,
        k,
        s,
        tuples,
        parts,
        certified,
        degrees,
        diagonal_size: k.pow(s as u32) - distinct_count(k, s),
        samples,
    })
}

fn distinct_count(k: usize, s: usize) -> usize {
    (0..s).map(|i| k - i).product()
}

/// The monodromy group recovered from the component of `C^(k-1)` through the reference tuple
/// `(0, 1, .., k-2)`: every `sigma` whose relabelled tuple lies in that component.
pub fn galois_from_fiber_power(
    h: &ParameterHomotopy,
    bpf: &BasePointFiber,
    witness: &[Complex],
    generators: &[Permutation],
    cfg: &TrackerConfig,
    trace_tol: f64,
    rng: &mut RunRng,
) -> Result<(PermutationGroup, WitnessDecomposition)> {
    let k = bpf.k();
    if k > MAX_GALOIS_DEGREE {
        return Err(Error::Infeasible(distinct_count(k, k.saturating_sub(1)) as u128));
    }
    if k == 0 {
        return Err(Error::InvalidInput("empty fiber".into()));
    }
    let s = (k - 1).max(1);
    let dec = decompose_by_monodromy(h, bpf, witness, generators, s, cfg, trace_tol, rng)?;
    let uncertified = dec.certified.iter().filter(|&&c| !c).count();
    if uncertified > 0 {
        return Err(Error::Uncertified(uncertified));
    }
    let reference: Vec<usize> = (0..s).collect();
    let part = dec.part_of(&reference).expect("reference tuple is a distinct tuple");
    let members: Vec<Permutation> = dec.parts[part]
        .iter()
        .map(|&i| {
            let t = &dec.tuples[i];
            let mut images = t.clone();
            if images.len() < k {
                let missing = (0..k).find(|a| !t.contains(a)).expect("one label is missing");
                images.push(missing);
            }
            Permutation::new(images).expect("distinct labels")
        })
        .collect();
    let group = PermutationGroup::from_generators(k, members)?;
    Ok((group, dec))
}
