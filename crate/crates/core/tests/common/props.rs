//! Property checks shared by the `properties` suite and the acceptance run.

use std::sync::OnceLock;

use galoscope::group::{classify, falling_factorial, orbit_sizes, orbits_on_tuples, GroupReport, Permutation, PermutationGroup};
use galoscope::monodromy::{enclosing_permutation, loop_epsilon_at, permutation_along, random_loop, GeneratorSet};
use galoscope::pipeline::{cmd_galois, cmd_group, run_monodromy, InputDocument, Prepared, RunConfig};
use galoscope::poly::{PolySystem, Polynomial};
use galoscope::random::seeded;
use galoscope::tracker::{ParameterHomotopy, TrackerConfig};
use galoscope::Complex;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use super::{document, fixture_text, point_set_distance};

pub fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn complex_in(r: f64) -> impl Strategy<Value = Complex> {
    (-r..r, -r..r).prop_map(|(a, b)| Complex::new(a, b))
}

fn polar_in(lo: f64, hi: f64) -> impl Strategy<Value = Complex> {
    (lo..hi, 0.0..std::f64::consts::TAU).prop_map(|(r, th)| Complex::from_polar(r, th))
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

fn err(e: galoscope::Error) -> TestCaseError {
    TestCaseError::fail(e.to_string())
}

fn inf_dist(a: &[Complex], b: &[Complex]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

// Newton -------------------------------------------------------------------------------

/// `(x_i - a_i)(x_i - b_i) + c_i (x_{i+1} - a_{i+1})`: `a` is a regular root.
#[derive(Debug, Clone)]
pub struct CoupledQuadratics {
    pub a: Vec<Complex>,
    pub gap: Vec<Complex>,
    pub coupling: Vec<Complex>,
    pub offset: Vec<Complex>,
}

pub fn coupled_quadratics() -> impl Strategy<Value = CoupledQuadratics> {
    (1usize..=3).prop_flat_map(|n| {
        (
            prop::collection::vec(complex_in(2.0), n),
            prop::collection::vec(polar_in(0.5, 2.0), n),
            prop::collection::vec(complex_in(0.3), n),
            prop::collection::vec(polar_in(1e-3, 1e-2), n),
        )
            .prop_map(|(a, gap, coupling, offset)| CoupledQuadratics {
                a,
                gap,
                coupling,
                offset,
            })
    })
}

impl CoupledQuadratics {
    fn system(&self) -> PolySystem {
        let n = self.a.len();
        let slots = n + 1;
        let x = |i: usize| Polynomial::variable(slots, i);
        let k = |z: Complex| Polynomial::constant(slots, z);
        let eqs = (0..n)
            .map(|i| {
                let mut e = x(i).sub(&k(self.a[i])).mul(&x(i).sub(&k(self.a[i] + self.gap[i])));
                if i + 1 < n {
                    e = e.add(&x(i + 1).sub(&k(self.a[i + 1])).scale(self.coupling[i]));
                }
                e
            })
            .collect();
        let vars = (0..n).map(|i| format!("x{i}")).collect();
        PolySystem::new(vars, vec!["t".into()], eqs).unwrap()
    }
}

pub const NEWTON_RATIO_BOUND: f64 = 100.0;

/// Errors shrink quadratically: `e_{k+1} <= C e_k^2` until rounding level.
pub fn newton_quadratic(q: CoupledQuadratics) -> Result<(), TestCaseError> {
    let h = ParameterHomotopy::new(&q.system()).map_err(err)?;
    let t = Complex::new(0.0, 0.0);
    let mut x: Vec<Complex> = q.a.iter().zip(&q.offset).map(|(a, d)| a + d).collect();
    let mut e = inf_dist(&x, &q.a);
    for _ in 0..8 {
        x = h.newton_step(&x, t).map_err(err)?;
        let next = inf_dist(&x, &q.a);
        if e > 1e-9 {
            check(next <= NEWTON_RATIO_BOUND * e * e + 1e-14, || {
                format!("error {e:e} -> {next:e}, ratio {:e}", next / (e * e))
            })?;
        }
        e = next;
    }
    check(e < 1e-12, || format!("final error {e:e}"))
}

// Jacobian -----------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct RandomSystem {
    pub n: usize,
    pub terms: Vec<Vec<(Complex, Vec<u32>)>>,
    pub x: Vec<Complex>,
    pub t: Complex,
}

pub fn random_system() -> impl Strategy<Value = RandomSystem> {
    (1usize..=3).prop_flat_map(|n| {
        let term = (complex_in(2.0), prop::collection::vec(0u32..=3, n + 1));
        (
            prop::collection::vec(prop::collection::vec(term, 1..=6), n),
            prop::collection::vec(complex_in(1.0), n),
            complex_in(1.0),
        )
            .prop_map(move |(terms, x, t)| RandomSystem { n, terms, x, t })
    })
}

pub const JACOBIAN_REL_TOL: f64 = 1e-6;

/// Analytic `J_x` against central differences, relative to `max(1, max |J|)`.
pub fn jacobian_matches_differences(r: RandomSystem) -> Result<(), TestCaseError> {
    let slots = r.n + 1;
    let eqs = r
        .terms
        .iter()
        .map(|ts| {
            ts.iter().fold(Polynomial::zero(slots), |acc, (c, e)| {
                let mono = e
                    .iter()
                    .enumerate()
                    .fold(Polynomial::constant(slots, *c), |m, (i, &p)| m.mul(&Polynomial::variable(slots, i).pow(p)));
                acc.add(&mono)
            })
        })
        .collect();
    let vars = (0..r.n).map(|i| format!("x{i}")).collect();
    let sys = PolySystem::new(vars, vec!["t".into()], eqs).map_err(err)?;
    let jac = sys.jacobian_x(&r.x, &[r.t]).map_err(err)?;
    let scale = jac.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let h = 1e-5;
    for j in 0..r.n {
        let mut plus = r.x.clone();
        let mut minus = r.x.clone();
        plus[j] += h;
        minus[j] -= h;
        let fp = sys.eval(&plus, &[r.t]).map_err(err)?;
        let fm = sys.eval(&minus, &[r.t]).map_err(err)?;
        for i in 0..r.n {
            let fd = (fp[i] - fm[i]) / (2.0 * h);
            let diff = (fd - jac[(i, j)]).norm() / scale;
            check(diff <= JACOBIAN_REL_TOL, || format!("entry ({i},{j}): relative difference {diff:e}"))?;
        }
    }
    Ok(())
}

// Loops --------------------------------------------------------------------------------

pub struct LoopSetup {
    pub prepared: Prepared,
    pub generators: GeneratorSet,
    pub group: PermutationGroup,
    pub homotopy: ParameterHomotopy,
    pub tracker: TrackerConfig,
}

fn loop_setup(name: &str, seed: u64) -> LoopSetup {
    let doc = document(name);
    let cfg = RunConfig {
        seed,
        ..RunConfig::default()
    };
    let (prepared, generators) = run_monodromy(&doc, &cfg, &mut seeded(seed)).unwrap();
    let group = PermutationGroup::from_generators(generators.degree(), generators.generators()).unwrap();
    let homotopy = prepared.cover.homotopy().unwrap();
    LoopSetup {
        prepared,
        generators,
        group,
        homotopy,
        tracker: cfg.tracker,
    }
}

pub fn quartic_setup() -> &'static LoopSetup {
    static CELL: OnceLock<LoopSetup> = OnceLock::new();
    CELL.get_or_init(|| loop_setup("quartic.json", 1))
}

pub fn cubic_setup() -> &'static LoopSetup {
    static CELL: OnceLock<LoopSetup> = OnceLock::new();
    CELL.get_or_init(|| loop_setup("cubic-family.json", 1))
}

/// A random closed loop maps the base fiber onto itself, and the induced permutation lies in
/// the group generated by the branch-point loops.
pub fn closed_loop_invariance(setup: &LoopSetup, seed: u64) -> Result<(), TestCaseError> {
    let base = &setup.generators.base;
    let witness = setup.prepared.witness.values();
    let margin = loop_epsilon_at(&witness, base.p) / 2.0;
    let anchors = random_loop(&witness, base.p, margin, &mut seeded(seed)).map_err(err)?;
    let end = setup
        .homotopy
        .transport_along(&base.fiber, &anchors, &setup.tracker)
        .map_err(err)?;
    let d = point_set_distance(&end, &base.fiber);
    check(d <= 1e-6, || format!("fiber moved by {d:e}"))?;
    let (sigma, residual) = permutation_along(&setup.homotopy, base, &anchors, &setup.tracker).map_err(err)?;
    check(residual <= setup.tracker.endpoint_match_tol, || format!("match residual {residual:e}"))?;
    check(setup.group.contains(&sigma), || format!("{sigma} is outside the group"))
}

/// The product of the branch-point loops in anti-clockwise order equals the loop around
/// all of them.
pub fn loop_product_law(name: &str, seed: u64) -> Result<(), TestCaseError> {
    let mut doc: InputDocument = document(name);
    doc.base_point = None;
    let cfg = RunConfig {
        seed,
        ..RunConfig::default()
    };
    let (prep, gens) = run_monodromy(&doc, &cfg, &mut seeded(seed)).map_err(err)?;
    let h = prep.cover.homotopy().map_err(err)?;
    let big = enclosing_permutation(&h, &gens.base, &prep.witness.values(), &cfg.tracker).map_err(err)?;
    let product = gens.product();
    check(product == big.sigma, || format!("product {product} but enclosing loop {}", big.sigma))
}

// Determinism --------------------------------------------------------------------------

pub const NUMERIC_FIXTURES: [&str; 3] = ["quartic.json", "cubic-family.json", "x2-t.json"];
pub const PERMUTATION_FIXTURES: [&str; 3] = ["e6-lines.perms", "burmester.perms", "ml-degree6.perms"];

pub fn deterministic_rerun(name: &str, seed: u64) -> Result<(), TestCaseError> {
    let doc = document(name);
    let cfg = RunConfig {
        seed,
        ..RunConfig::default()
    };
    let first = cmd_galois(&doc, &cfg).map_err(err)?.to_json();
    let second = cmd_galois(&doc, &cfg).map_err(err)?.to_json();
    check(first == second, || format!("{name} differs between runs with seed {seed}"))
}

pub fn deterministic_group(name: &str) -> Result<(), TestCaseError> {
    let text = fixture_text(name);
    let first = cmd_group(&text).map_err(err)?.to_json();
    let second = cmd_group(&text).map_err(err)?.to_json();
    check(first == second, || format!("{name} differs between runs"))
}

// Groups -------------------------------------------------------------------------------

fn permutation_of(k: usize) -> impl Strategy<Value = Permutation> {
    Just((0..k).collect::<Vec<usize>>())
        .prop_shuffle()
        .prop_map(|images| Permutation::new(images).unwrap())
}

#[derive(Debug, Clone)]
pub struct GroupCase {
    pub k: usize,
    pub generators: Vec<Permutation>,
    pub conjugator: Permutation,
}

pub fn group_case(max_k: usize) -> impl Strategy<Value = GroupCase> {
    (2usize..=max_k).prop_flat_map(|k| {
        (prop::collection::vec(permutation_of(k), 1..=3), permutation_of(k)).prop_map(move |(generators, conjugator)| {
            GroupCase {
                k,
                generators,
                conjugator,
            }
        })
    })
}

fn invariants(r: &GroupReport) -> impl PartialEq + std::fmt::Debug {
    let mut orbits: Vec<usize> = r.orbits.iter().map(|o| o.len()).collect();
    orbits.sort_unstable();
    let blocks = r.blocks.as_ref().map(|b| (b.len(), b[0].len()));
    let mut graphs: Vec<(usize, usize, Option<usize>)> = r
        .orbit_graphs
        .iter()
        .map(|g| (g.orbit_size, g.components, g.diameter))
        .collect();
    graphs.sort_unstable();
    (
        r.degree,
        r.order.clone(),
        orbits,
        r.transitivity_degree,
        r.primitive,
        blocks,
        graphs,
        r.classification,
    )
}

/// Conjugating every generator by the same permutation leaves the report's invariants fixed.
pub fn conjugation_invariance(case: GroupCase) -> Result<(), TestCaseError> {
    let g = PermutationGroup::from_generators(case.k, case.generators).map_err(err)?;
    let h = g.conjugate_by(&case.conjugator).map_err(err)?;
    let (a, b) = (classify(&g).map_err(err)?, classify(&h).map_err(err)?);
    check(invariants(&a) == invariants(&b), || format!("{:?} vs {:?}", invariants(&a), invariants(&b)))
}

/// Orbits on distinct `s`-tuples partition all `k!/(k-s)!` of them.
pub fn orbit_sum_conservation(case: GroupCase, s: usize) -> Result<(), TestCaseError> {
    let s = s.min(case.k);
    let g = PermutationGroup::from_generators(case.k, case.generators).map_err(err)?;
    let total: usize = orbit_sizes(&orbits_on_tuples(&g, s).map_err(err)?).iter().sum();
    let expected: usize = (case.k - s + 1..=case.k).product();
    check(total == expected, || format!("k={} s={s}: {total} tuples, expected {expected}", case.k))?;
    check(falling_factorial(case.k, s) == expected as u128, || "falling_factorial disagrees".into())
}
