use std::collections::VecDeque;

use super::chain::PermutationGroup;
use crate::error::{Error, Result};

/// Largest `k^s` state space enumerated for tuple actions.
pub const TUPLE_STATE_LIMIT: u128 = 1_000_000;

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

fn encode(t: &[usize], k: usize) -> usize {
    t.iter().fold(0, |acc, &a| acc * k + a)
}

fn decode(mut code: usize, k: usize, s: usize) -> Vec<usize> {
    let mut t = vec![0; s];
    for i in (0..s).rev() {
        t[i] = code % k;
        code /= k;
    }
    t
}

fn is_distinct(t: &[usize]) -> bool {
    (0..t.len()).all(|i| (i + 1..t.len()).all(|j| t[i] != t[j]))
}

pub fn check_tuple_feasible(k: usize, s: usize) -> Result<()> {
    let states = (k as u128).checked_pow(s as u32).unwrap_or(u128::MAX);
    if states > TUPLE_STATE_LIMIT {
        return Err(Error::Infeasible(states));
    }
    Ok(())
}

/// Orbits of the group on ordered `s`-tuples of distinct symbols (0-based).
///
/// Each orbit is sorted lexicographically and orbits are ordered by their first tuple.
pub fn orbits_on_tuples(g: &PermutationGroup, s: usize) -> Result<Vec<Vec<Vec<usize>>>> {
    let k = g.degree();
    check_tuple_feasible(k, s)?;
    if s == 0 {
        return Ok(vec![vec![Vec::new()]]);
    }
    let n = k.pow(s as u32);
    let mut uf = UnionFind::new(n);
    let mut img = vec![0usize; s];
    for code in 0..n {
        let t = decode(code, k, s);
        if !is_distinct(&t) {
            continue;
        }
        for h in g.generators() {
            for (x, &a) in img.iter_mut().zip(&t) {
                *x = h.apply(a);
            }
            uf.union(code, encode(&img, k));
        }
    }
    let mut index = vec![usize::MAX; n];
    let mut out: Vec<Vec<Vec<usize>>> = Vec::new();
    for code in 0..n {
        let t = decode(code, k, s);
        if !is_distinct(&t) {
            continue;
        }
        let r = uf.find(code);
        if index[r] == usize::MAX {
            index[r] = out.len();
            out.push(Vec::new());
        }
        out[index[r]].push(t);
    }
    Ok(out)
}

pub fn orbit_sizes(orbits: &[Vec<Vec<usize>>]) -> Vec<usize> {
    orbits.iter().map(|o| o.len()).collect()
}

/// `k (k-1) ... (k-s+1)`.
pub fn falling_factorial(k: usize, s: usize) -> u128 {
    (0..s).map(|i| k.saturating_sub(i) as u128).product()
}

pub fn is_s_transitive(g: &PermutationGroup, s: usize) -> Result<bool> {
    if s > g.degree() {
        return Ok(false);
    }
    Ok(orbits_on_tuples(g, s)?.len() == 1)
}

/// Connectivity data for the graph `Gamma_O` of one orbit `O` on distinct pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitGraph {
    /// Size of the pair orbit.
    pub orbit_size: usize,
    /// A representative pair (0-based).
    pub representative: (usize, usize),
    pub components: usize,
    /// Graph diameter; `None` when disconnected.
    pub diameter: Option<usize>,
}

impl OrbitGraph {
    pub fn is_connected(&self) -> bool {
        self.components == 1
    }
}

/// Builds the undirected graph of every orbit on distinct pairs.
pub fn orbit_graphs(g: &PermutationGroup) -> Result<Vec<OrbitGraph>> {
    let k = g.degree();
    let orbits = orbits_on_tuples(g, 2)?;
    Ok(orbits
        .iter()
        .map(|orbit| {
            let mut adj = vec![Vec::new(); k];
            let mut uf = UnionFind::new(k);
            for t in orbit {
                let (a, b) = (t[0], t[1]);
                if !adj[a].contains(&b) {
                    adj[a].push(b);
                    adj[b].push(a);
                }
                uf.union(a, b);
            }
            let components = (0..k).filter(|&i| uf.find(i) == i).count();
            let diameter = (components == 1).then(|| {
                (0..k)
                    .map(|src| {
                        let mut dist = vec![usize::MAX; k];
                        dist[src] = 0;
                        let mut q = VecDeque::from([src]);
                        while let Some(a) = q.pop_front() {
                            for &b in &adj[a] {
                                if dist[b] == usize::MAX {
                                    dist[b] = dist[a] + 1;
                                    q.push_back(b);
                                }
                            }
                        }
                        dist.into_iter().max().unwrap_or(0)
                    })
                    .max()
                    .unwrap_or(0)
            });
            OrbitGraph {
                orbit_size: orbit.len(),
                representative: (orbit[0][0], orbit[0][1]),
                components,
                diameter,
            }
        })
        .collect())
}

/// Higman's criterion: a transitive group is primitive iff every orbit graph on distinct
/// pairs is connected.
pub fn is_primitive_higman(g: &PermutationGroup) -> Result<(bool, Vec<OrbitGraph>)> {
    if !g.is_transitive() {
        return Err(Error::Intransitive);
    }
    let graphs = orbit_graphs(g)?;
    Ok((graphs.iter().all(|o| o.is_connected()), graphs))
}

/// The finest block system in which `a` and `b` share a block, as a class label per symbol.
fn finest_blocks(g: &PermutationGroup, a: usize, b: usize) -> Vec<Vec<usize>> {
    let k = g.degree();
    let mut uf = UnionFind::new(k);
    let mut queue = VecDeque::from([(a, b)]);
    while let Some((x, y)) = queue.pop_front() {
        if !uf.union(x, y) {
            continue;
        }
        for h in g.generators() {
            queue.push_back((h.apply(x), h.apply(y)));
        }
    }
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut index = vec![usize::MAX; k];
    for i in 0..k {
        let r = uf.find(i);
        if index[r] == usize::MAX {
            index[r] = blocks.len();
            blocks.push(Vec::new());
        }
        blocks[index[r]].push(i);
    }
    blocks
}

/// Every nontrivial block system obtained as the finest system joining symbol 0 with some
/// other symbol, without repeats, in order of that symbol.
pub fn all_minimal_candidates(g: &PermutationGroup) -> Result<Vec<Vec<Vec<usize>>>> {
    if !g.is_transitive() {
        return Err(Error::Intransitive);
    }
    let k = g.degree();
    let mut out: Vec<Vec<Vec<usize>>> = Vec::new();
    for i in 1..k {
        let blocks = finest_blocks(g, 0, i);
        if blocks.len() > 1 && !out.contains(&blocks) {
            out.push(blocks);
        }
    }
    Ok(out)
}

/// A minimal nontrivial block system (smallest blocks), or `None` when primitive.
pub fn block_systems(g: &PermutationGroup) -> Result<Option<Vec<Vec<usize>>>> {
    let candidates = all_minimal_candidates(g)?;
    Ok(candidates.into_iter().min_by_key(|b| b[0].len()))
}
