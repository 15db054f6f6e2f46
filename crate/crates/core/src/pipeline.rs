//! End-to-end runs driven by an input document, producing JSON reports.

use std::fmt::Write as _;
use std::time::Instant;

use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::branch::{compute_branch_witness, BranchWitness, LineCover, DEFAULT_CLUSTER_TOL, WITNESS_RETRIES};
use crate::error::{Error, Result};
use crate::fiber::{decompose_by_monodromy, WitnessDecomposition, DEFAULT_TRACE_TOL};
use crate::group::{
    classify, is_primitive_higman, orbit_sizes, orbits_on_tuples, parse_permutation_list, GroupReport,
    Permutation, PermutationGroup,
};
use crate::monodromy::{branch_point_generators, GeneratorSet, LoopSource, MonodromyPermutation};
use crate::poly::{parse_complex, AffineChart, ChartGroup, LineEmbedding, PolySystem};
use crate::random::{seeded, RunRng};
use crate::tracker::TrackerConfig;
use crate::Complex;

/// A complex number in an input document: a real number, an expression string such as
/// `"0.4+0.3*I"`, or a `[re, im]` pair.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Real(f64),
    Pair([f64; 2]),
    Text(String),
}

impl ComplexValue {
    pub fn value(&self) -> Result<Complex> {
        match self {
            ComplexValue::Real(r) => Ok(Complex::new(*r, 0.0)),
            ComplexValue::Pair([re, im]) => Ok(Complex::new(*re, *im)),
            ComplexValue::Text(s) => parse_complex(s),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineSpec {
    pub base: Vec<ComplexValue>,
    pub direction: Vec<ComplexValue>,
}

impl LineSpec {
    pub fn embedding(&self) -> Result<LineEmbedding> {
        let base = self.base.iter().map(|c| c.value()).collect::<Result<Vec<_>>>()?;
        let dir = self.direction.iter().map(|c| c.value()).collect::<Result<Vec<_>>>()?;
        LineEmbedding::new(base, dir)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputDocument {
    #[serde(default)]
    pub description: Option<String>,
    pub variables: Vec<String>,
    #[serde(default)]
    pub parameters: Vec<String>,
    pub equations: Vec<String>,
    #[serde(default)]
    pub projective_groups: Vec<Vec<String>>,
    /// Line in parameter space; defaults to the parameter itself for one parameter and to a
    /// random line otherwise.
    #[serde(default)]
    pub line: Option<LineSpec>,
    /// For each projective group, the coordinate set to one; random charts otherwise.
    #[serde(default)]
    pub chart: Option<Vec<String>>,
    #[serde(default)]
    pub base_point: Option<ComplexValue>,
    /// Solutions present over every parameter value, removed from all fibers.
    #[serde(default)]
    pub exclude: Vec<Vec<ComplexValue>>,
    /// Only run with `--extended`.
    #[serde(default)]
    pub extended: bool,
    /// Reference values; carried through untouched.
    #[serde(default)]
    pub expect: Option<Value>,
}

impl InputDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(e.to_string()))
    }

    pub fn system(&self) -> Result<PolySystem> {
        let sys = PolySystem::parse_owned(self.variables.clone(), self.parameters.clone(), &self.equations)?;
        if self.projective_groups.is_empty() {
            Ok(sys)
        } else {
            sys.with_projective_groups(self.projective_groups.clone())
        }
    }

    fn pinned_chart(&self, sys: &PolySystem) -> Result<Option<AffineChart>> {
        let Some(pins) = &self.chart else {
            return Ok(None);
        };
        if pins.len() != sys.projective_groups().len() {
            return Err(Error::DimensionMismatch {
                what: "chart pins",
                expected: sys.projective_groups().len(),
                got: pins.len(),
            });
        }
        let groups = sys
            .projective_groups()
            .iter()
            .zip(pins)
            .map(|(g, pin)| match g.iter().position(|v| v == pin) {
                Some(i) => Ok(ChartGroup::coordinate(g, i)),
                None => Err(Error::InvalidInput(format!("chart pin `{pin}` is not in group {g:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Some(AffineChart { groups }))
    }

    fn excluded_points(&self, sys: &PolySystem) -> Result<Vec<Vec<Complex>>> {
        if !self.exclude.is_empty() && !sys.projective_groups().is_empty() {
            return Err(Error::InvalidInput("`exclude` needs an affine system".into()));
        }
        self.exclude
            .iter()
            .map(|pt| {
                if pt.len() != sys.nvars() {
                    return Err(Error::DimensionMismatch {
                        what: "excluded point",
                        expected: sys.nvars(),
                        got: pt.len(),
                    });
                }
                pt.iter().map(|c| c.value()).collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub tracker: TrackerConfig,
    /// Overrides the document's line.
    pub line: Option<LineEmbedding>,
    /// Overrides the document's base point.
    pub base_point: Option<Complex>,
    pub cluster_tol: f64,
    pub trace_tol: f64,
    /// Fiber power for `orbits`.
    pub s: usize,
    pub allow_extended: bool,
    /// Adds wall-clock timings, which makes reports differ between runs.
    pub timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            tracker: TrackerConfig::default(),
            line: None,
            base_point: None,
            cluster_tol: DEFAULT_CLUSTER_TOL,
            trace_tol: DEFAULT_TRACE_TOL,
            s: 2,
            allow_extended: false,
            timing: false,
        }
    }
}

/// A finished report and whether every certification in it passed.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub value: Value,
    pub certified: bool,
}

impl Report {
    pub fn to_json(&self) -> String {
        to_json_string(&self.value)
    }
}

/// Cover, line and branch witness shared by the numeric commands.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub system: PolySystem,
    pub cover: LineCover,
    pub witness: BranchWitness,
}

/// Resolves line and chart and computes the branch witness.
///
/// Random draws, in order: the line (when not fixed), the charts (when not pinned), then the
/// witness computation; repeated while a random line gives ambiguous clusters.
pub fn prepare(doc: &InputDocument, cfg: &RunConfig, rng: &mut RunRng) -> Result<Prepared> {
    if doc.extended && !cfg.allow_extended {
        return Err(Error::InvalidInput("extended input; pass --extended to run it".into()));
    }
    cfg.tracker.validate()?;
    let system = doc.system()?;
    let fixed_line = match (&cfg.line, &doc.line) {
        (Some(l), _) => Some(l.clone()),
        (None, Some(spec)) => Some(spec.embedding()?),
        (None, None) if system.nparams() == 1 => Some(LineEmbedding::identity()),
        _ => None,
    };
    let pinned = doc.pinned_chart(&system)?;
    let excluded = doc.excluded_points(&system)?;
    let attempts = if fixed_line.is_some() { 1 } else { WITNESS_RETRIES };
    for _ in 0..attempts {
        let line = match &fixed_line {
            Some(l) => l.clone(),
            None => LineEmbedding::random(system.nparams(), rng),
        };
        let chart = match &pinned {
            Some(c) => c.clone(),
            None => AffineChart::random_for(&system, rng),
        };
        let cover = LineCover::new(&system, line, chart, rng)?.with_excluded(excluded.clone());
        match compute_branch_witness(&cover, &cfg.tracker, cfg.cluster_tol, rng) {
            Ok(witness) => {
                return Ok(Prepared {
                    system,
                    cover,
                    witness,
                })
            }
            Err(Error::ClusterAmbiguity(..)) if fixed_line.is_none() => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::WitnessRetriesExhausted(attempts))
}

fn base_point(doc: &InputDocument, cfg: &RunConfig) -> Result<Option<Complex>> {
    match (cfg.base_point, &doc.base_point) {
        (Some(p), _) => Ok(Some(p)),
        (None, Some(c)) => Ok(Some(c.value()?)),
        _ => Ok(None),
    }
}

/// Witness, base fiber and monodromy permutations.
pub fn run_monodromy(doc: &InputDocument, cfg: &RunConfig, rng: &mut RunRng) -> Result<(Prepared, GeneratorSet)> {
    let prep = prepare(doc, cfg, rng)?;
    let p = base_point(doc, cfg)?;
    let gens = branch_point_generators(&prep.cover, &prep.witness, p, &cfg.tracker, rng)?;
    Ok((prep, gens))
}

fn timed<F: FnOnce(&mut RunRng) -> Result<Report>>(cfg: &RunConfig, f: F) -> Result<Report> {
    let start = Instant::now();
    let mut rng = seeded(cfg.seed);
    let mut report = f(&mut rng)?;
    if cfg.timing {
        if let Value::Object(m) = &mut report.value {
            m.insert("timing_seconds".into(), json!(start.elapsed().as_secs_f64()));
        }
    }
    Ok(report)
}

pub fn cmd_branch(doc: &InputDocument, cfg: &RunConfig) -> Result<Report> {
    timed(cfg, |rng| {
        let prep = prepare(doc, cfg, rng)?;
        let mut m = Map::new();
        m.insert("command".into(), json!("branch"));
        m.insert("seed".into(), json!(cfg.seed));
        m.insert("witness".into(), witness_json(&prep.witness));
        Ok(Report {
            value: Value::Object(m),
            certified: true,
        })
    })
}

pub fn cmd_monodromy(doc: &InputDocument, cfg: &RunConfig) -> Result<Report> {
    timed(cfg, |rng| {
        let (prep, gens) = run_monodromy(doc, cfg, rng)?;
        let mut m = monodromy_map(&prep, &gens);
        m.insert("command".into(), json!("monodromy"));
        m.insert("seed".into(), json!(cfg.seed));
        Ok(Report {
            value: Value::Object(m),
            certified: true,
        })
    })
}

pub fn cmd_galois(doc: &InputDocument, cfg: &RunConfig) -> Result<Report> {
    timed(cfg, |rng| {
        let (prep, gens) = run_monodromy(doc, cfg, rng)?;
        let group = PermutationGroup::from_generators(gens.degree(), gens.generators())?;
        let report = classify(&group)?;
        let mut m = monodromy_map(&prep, &gens);
        m.insert("command".into(), json!("galois"));
        m.insert("seed".into(), json!(cfg.seed));
        m.insert("group".into(), group_json(&group, &report));
        Ok(Report {
            value: Value::Object(m),
            certified: true,
        })
    })
}

/// Decomposition of the `cfg.s`-th fiber power, compared with the orbits of the group
/// generated by the branch-point permutations.
pub fn cmd_orbits(doc: &InputDocument, cfg: &RunConfig) -> Result<Report> {
    timed(cfg, |rng| {
        let (prep, gens, dec) = run_decomposition(doc, cfg, cfg.s, rng)?;
        let group = PermutationGroup::from_generators(gens.degree(), gens.generators())?;
        let mut from_group = orbit_sizes(&orbits_on_tuples(&group, cfg.s)?);
        from_group.sort_unstable();
        let agrees = from_group == dec.sorted_degrees();
        let mut m = Map::new();
        m.insert("command".into(), json!("orbits"));
        m.insert("seed".into(), json!(cfg.seed));
        m.insert("witness".into(), witness_json(&prep.witness));
        m.insert("base_point".into(), complex_json(gens.base.p));
        m.insert("decomposition".into(), decomposition_json(&dec));
        m.insert("group_orbit_sizes".into(), json!(from_group));
        m.insert("agrees_with_group".into(), json!(agrees));
        Ok(Report {
            value: Value::Object(m),
            certified: dec.all_certified() && agrees,
        })
    })
}

/// Primitivity from the pair decomposition (orbit graphs of the numeric parts), checked
/// against the group engine.
pub fn cmd_primitivity(doc: &InputDocument, cfg: &RunConfig) -> Result<Report> {
    timed(cfg, |rng| {
        let (_, gens, dec) = run_decomposition(doc, cfg, 2, rng)?;
        let k = gens.degree();
        let group = PermutationGroup::from_generators(k, gens.generators())?;
        let transitive = group.is_transitive();
        let graphs: Vec<(usize, usize)> = (0..dec.parts.len())
            .map(|i| (dec.degrees[i], pair_graph_components(k, &dec.part_tuples(i))))
            .collect();
        let numeric = transitive && graphs.iter().all(|&(_, c)| c == 1);
        let engine = if transitive {
            Some(is_primitive_higman(&group)?.0)
        } else {
            None
        };
        let mut m = Map::new();
        m.insert("command".into(), json!("primitivity"));
        m.insert("seed".into(), json!(cfg.seed));
        m.insert("degree".into(), json!(k));
        m.insert("transitive".into(), json!(transitive));
        m.insert("two_transitive".into(), json!(transitive && dec.parts.len() == 1));
        m.insert("primitive".into(), json!(numeric));
        m.insert("primitive_group_engine".into(), json!(engine));
        m.insert(
            "part_graphs".into(),
            Value::Array(
                graphs
                    .iter()
                    .map(|&(size, components)| json!({"size": size, "components": components}))
                    .collect(),
            ),
        );
        m.insert("decomposition".into(), decomposition_json(&dec));
        Ok(Report {
            value: Value::Object(m),
            certified: dec.all_certified() && engine.is_none_or(|e| e == numeric),
        })
    })
}

fn run_decomposition(
    doc: &InputDocument,
    cfg: &RunConfig,
    s: usize,
    rng: &mut RunRng,
) -> Result<(Prepared, GeneratorSet, WitnessDecomposition)> {
    let (prep, gens) = run_monodromy(doc, cfg, rng)?;
    let h = prep.cover.homotopy()?;
    let dec = decompose_by_monodromy(
        &h,
        &gens.base,
        &prep.witness.values(),
        &gens.generators(),
        s,
        &cfg.tracker,
        cfg.trace_tol,
        rng,
    )?;
    Ok((prep, gens, dec))
}

fn pair_graph_components(k: usize, pairs: &[Vec<usize>]) -> usize {
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for t in pairs {
        let (a, b) = (find(&mut parent, t[0]), find(&mut parent, t[1]));
        parent[a.max(b)] = a.min(b);
    }
    (0..k).filter(|&i| find(&mut parent, i) == i).count()
}

/// Group report for a permutation list file.
pub fn cmd_group(text: &str) -> Result<Report> {
    let perms = parse_permutation_list(text)?;
    let group = PermutationGroup::from_list(perms)?;
    let report = classify(&group)?;
    let mut m = Map::new();
    m.insert("command".into(), json!("group"));
    m.insert("group".into(), group_json(&group, &report));
    Ok(Report {
        value: Value::Object(m),
        certified: true,
    })
}

pub fn complex_json(z: Complex) -> Value {
    json!([z.re + 0.0, z.im + 0.0])
}

fn point_json(x: &[Complex]) -> Value {
    Value::Array(x.iter().map(|&z| complex_json(z)).collect())
}

pub fn witness_json(bw: &BranchWitness) -> Value {
    json!({
        "points": bw.points.iter().map(|p| json!({"t": complex_json(p.t), "multiplicity": p.multiplicity})).collect::<Vec<_>>(),
        "critical_count": bw.critical_count,
        "discarded": bw.discarded,
        "excluded_crossings": bw.excluded_crossings,
        "diverged": bw.diverged,
        "failed": bw.failed,
        "min_separation": if bw.min_separation.is_finite() { json!(bw.min_separation) } else { Value::Null },
        "cluster_tol": bw.cluster_tol,
        "cover_degree": bw.cover_degree,
        "line": {
            "base": point_json(bw.line.base()),
            "direction": point_json(bw.line.direction()),
        },
    })
}

pub fn permutation_json(p: &Permutation) -> Value {
    json!({
        "cycles": p.to_string(),
        "images": p.images().iter().map(|i| i + 1).collect::<Vec<_>>(),
    })
}

fn monodromy_json(m: &MonodromyPermutation) -> Value {
    let mut v = permutation_json(&m.sigma);
    let source = match &m.source {
        LoopSource::Witness { index, t, epsilon } => json!({
            "kind": "witness", "index": index, "t": complex_json(*t), "epsilon": epsilon,
        }),
        LoopSource::Random { anchors } => json!({
            "kind": "random", "anchors": point_json(anchors),
        }),
        LoopSource::Enclosing { radius } => json!({"kind": "enclosing", "radius": radius}),
    };
    if let Value::Object(o) = &mut v {
        o.insert("source".into(), source);
        o.insert("max_match_residual".into(), json!(m.max_match_residual));
        o.insert("artifact".into(), json!(m.is_artifact()));
    }
    v
}

fn monodromy_map(prep: &Prepared, gens: &GeneratorSet) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("witness".into(), witness_json(&prep.witness));
    m.insert("base_point".into(), complex_json(gens.base.p));
    m.insert("epsilon".into(), json!(gens.epsilon));
    m.insert("fiber".into(), Value::Array(gens.base.fiber.iter().map(|x| point_json(x)).collect()));
    m.insert(
        "fiber_variables".into(),
        json!(prep.cover.tracking.variables()),
    );
    m.insert(
        "permutations".into(),
        Value::Array(gens.permutations.iter().map(monodromy_json).collect()),
    );
    m.insert(
        "loops".into(),
        Value::Array(gens.loops.iter().map(|l| point_json(l.polygon.anchors())).collect()),
    );
    m
}

fn one_based(sets: &[Vec<usize>]) -> Value {
    json!(sets
        .iter()
        .map(|s| s.iter().map(|i| i + 1).collect::<Vec<_>>())
        .collect::<Vec<_>>())
}

pub fn group_json(group: &PermutationGroup, r: &GroupReport) -> Value {
    json!({
        "degree": r.degree,
        "order": r.order.to_string(),
        "generators": group.generators().iter().map(|g| g.to_string()).collect::<Vec<_>>(),
        "orbits": one_based(&r.orbits),
        "transitivity_degree": r.transitivity_degree,
        "primitive": r.primitive,
        "blocks": r.blocks.as_ref().map(|b| one_based(b)),
        "orbit_graphs": r.orbit_graphs.iter().map(|o| json!({
            "size": o.orbit_size,
            "representative": [o.representative.0 + 1, o.representative.1 + 1],
            "components": o.components,
            "diameter": o.diameter,
        })).collect::<Vec<_>>(),
        "classification": r.classification.tag(),
    })
}

pub fn decomposition_json(d: &WitnessDecomposition) -> Value {
    json!({
        "s": d.s,
        "base_t": complex_json(d.base_t),
        "part_sizes": d.degrees,
        "certified": d.certified,
        "representatives": d.parts.iter().map(|p| d.tuples[p[0]].iter().map(|i| i + 1).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "distinct_tuples": d.tuples.len(),
        "diagonal_size": d.diagonal_size,
        "random_loops": d.samples,
    })
}

/// Formats a float with 17 significant digits.
pub fn format_float(x: f64) -> String {
    if !x.is_finite() {
        return "null".into();
    }
    format!("{:.16e}", x + 0.0)
}

/// Pretty JSON with two-space indentation, object keys in sorted order and floats printed by
/// [`format_float`].
pub fn to_json_string(v: &Value) -> String {
    let mut out = String::new();
    write_value(v, 0, &mut out);
    out.push('\n');
    out
}

fn write_value(v: &Value, depth: usize, out: &mut String) {
    let pad = |d: usize| "  ".repeat(d);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&format_float(n.as_f64().unwrap()));
            } else {
                let _ = write!(out, "{n}");
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).unwrap()),
        Value::Array(a) => {
            if a.is_empty() {
                out.push_str("[]");
                return;
            }
            let flat = a.iter().all(|x| !x.is_array() && !x.is_object());
            if flat {
                out.push('[');
                for (i, x) in a.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(x, depth, out);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                write_value(x, depth + 1, out);
                out.push_str(if i + 1 < a.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push(']');
        }
        Value::Object(m) => {
            if m.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                out.push_str(&serde_json::to_string(k).unwrap());
                out.push_str(": ");
                write_value(&m[*k], depth + 1, out);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push('}');
        }
    }
}
