use num_bigint::BigUint;

use super::permutation::Permutation;
use crate::error::{Error, Result};

/// One level of a stabilizer chain: the basic orbit of `base` under the strong generators
/// that fix all earlier base points, with a transversal.
#[derive(Debug, Clone)]
struct Level {
    base: usize,
    generators: Vec<Permutation>,
    /// `transversal[b]` maps `base` to `b` for every `b` in the orbit.
    transversal: Vec<Option<Permutation>>,
    orbit: Vec<usize>,
}

impl Level {
    fn new(base: usize, k: usize) -> Self {
        let mut transversal = vec![None; k];
        transversal[base] = Some(Permutation::identity(k));
        Level {
            base,
            generators: Vec::new(),
            transversal,
            orbit: vec![base],
        }
    }

    /// Extends the orbit breadth-first under the current generators.
    fn close_orbit(&mut self) {
        let mut i = 0;
        // Re-scan from the start so new generators act on old orbit points too.
        while i < self.orbit.len() {
            let b = self.orbit[i];
            let ub = self.transversal[b].clone().unwrap();
            for g in &self.generators {
                let c = g.apply(b);
                if self.transversal[c].is_none() {
                    self.transversal[c] = Some(ub.then(g));
                    self.orbit.push(c);
                }
            }
            i += 1;
        }
    }
}

/// Stabilizer chain built by deterministic Schreier-Sims.
///
/// The first base point is a point of largest orbit under the input generators; each later
/// base point is chosen on a longest cycle of the element that forces the new level. Ties
/// go to the smallest symbol.
#[derive(Debug, Clone)]
pub struct StabilizerChain {
    k: usize,
    levels: Vec<Level>,
}

impl StabilizerChain {
    pub fn new(k: usize, generators: &[Permutation]) -> Self {
        let mut chain = StabilizerChain {
            k,
            levels: Vec::new(),
        };
        let gens: Vec<&Permutation> = generators.iter().filter(|g| !g.is_identity()).collect();
        if let Some(first) = first_base_point(k, &gens) {
            chain.levels.push(Level::new(first, k));
        }
        for g in gens {
            chain.extend(0, g.clone());
        }
        chain
    }

    /// Sifts `g` from level `start`; returns the residue and the level where sifting stopped.
    fn strip(&self, g: &Permutation, start: usize) -> (Permutation, usize) {
        let mut h = g.clone();
        for (i, level) in self.levels.iter().enumerate().skip(start) {
            let b = h.apply(level.base);
            match &level.transversal[b] {
                Some(u) => h = h.then(&u.inverse()),
                None => return (h, i),
            }
        }
        let n = self.levels.len();
        (h, n)
    }

    fn extend(&mut self, level: usize, g: Permutation) {
        let (residue, _) = self.strip(&g, level);
        if residue.is_identity() {
            return;
        }
        if level == self.levels.len() {
            let base = longest_cycle_point(&g);
            self.levels.push(Level::new(base, self.k));
        }
        self.levels[level].generators.push(g);
        self.levels[level].close_orbit();
        let orbit = self.levels[level].orbit.clone();
        let gens = self.levels[level].generators.clone();
        for &b in &orbit {
            for s in &gens {
                let ub = self.levels[level].transversal[b].clone().unwrap();
                let c = s.apply(b);
                let uc = self.levels[level].transversal[c].clone().unwrap();
                let schreier = ub.then(s).then(&uc.inverse());
                if !schreier.is_identity() {
                    self.extend(level + 1, schreier);
                }
            }
        }
    }

    pub fn contains(&self, g: &Permutation) -> bool {
        g.degree() == self.k && self.strip(g, 0).0.is_identity()
    }

    pub fn base(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.base).collect()
    }

    pub fn orbit_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.orbit.len()).collect()
    }

    pub fn order(&self) -> BigUint {
        self.levels
            .iter()
            .fold(BigUint::from(1u32), |acc, l| acc * BigUint::from(l.orbit.len()))
    }

    pub fn strong_generators(&self) -> Vec<Permutation> {
        self.levels.iter().flat_map(|l| l.generators.clone()).collect()
    }
}

fn first_base_point(k: usize, gens: &[&Permutation]) -> Option<usize> {
    if gens.is_empty() {
        return None;
    }
    let orbits = point_orbits(k, gens.iter().copied());
    let mut best: Option<(usize, usize)> = None;
    for orbit in orbits {
        let moved = orbit.iter().any(|&i| gens.iter().any(|g| g.apply(i) != i));
        if moved && best.is_none_or(|(size, _)| orbit.len() > size) {
            best = Some((orbit.len(), orbit[0]));
        }
    }
    best.map(|(_, p)| p)
}

fn longest_cycle_point(g: &Permutation) -> usize {
    g.cycles()
        .into_iter()
        .max_by(|a, b| a.len().cmp(&b.len()).then(b[0].cmp(&a[0])))
        .map(|c| c[0])
        .expect("nonidentity permutation has a cycle")
}

/// Orbits of the group generated by `gens` on `{0..k}`, each sorted, ordered by smallest
/// element.
pub fn point_orbits<'a>(k: usize, gens: impl IntoIterator<Item = &'a Permutation>) -> Vec<Vec<usize>> {
    let gens: Vec<&Permutation> = gens.into_iter().collect();
    let mut label = vec![usize::MAX; k];
    let mut out = Vec::new();
    for s in 0..k {
        if label[s] != usize::MAX {
            continue;
        }
        let id = out.len();
        label[s] = id;
        let mut orbit = vec![s];
        let mut i = 0;
        while i < orbit.len() {
            let a = orbit[i];
            for g in &gens {
                let b = g.apply(a);
                if label[b] == usize::MAX {
                    label[b] = id;
                    orbit.push(b);
                }
            }
            i += 1;
        }
        orbit.sort_unstable();
        out.push(orbit);
    }
    out
}

/// A permutation group of degree `k` given by generators, with its stabilizer chain.
#[derive(Debug, Clone)]
pub struct PermutationGroup {
    k: usize,
    generators: Vec<Permutation>,
    chain: StabilizerChain,
}

impl PermutationGroup {
    pub fn from_generators(k: usize, generators: Vec<Permutation>) -> Result<Self> {
        for g in &generators {
            if g.degree() != k {
                return Err(Error::DegreeMismatch {
                    expected: k,
                    got: g.degree(),
                });
            }
        }
        let chain = StabilizerChain::new(k, &generators);
        Ok(PermutationGroup {
            k,
            generators,
            chain,
        })
    }

    /// Degree taken from the first generator; at least one generator is required.
    pub fn from_list(generators: Vec<Permutation>) -> Result<Self> {
        let k = generators
            .first()
            .map(|g| g.degree())
            .ok_or_else(|| Error::InvalidPermutation("empty generator list".into()))?;
        Self::from_generators(k, generators)
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    pub fn chain(&self) -> &StabilizerChain {
        &self.chain
    }

    pub fn order(&self) -> BigUint {
        self.chain.order()
    }

    pub fn contains(&self, g: &Permutation) -> bool {
        self.chain.contains(g)
    }

    pub fn orbits(&self) -> Vec<Vec<usize>> {
        point_orbits(self.k, &self.generators)
    }

    pub fn is_transitive(&self) -> bool {
        self.k <= 1 || self.orbits().len() == 1
    }

    /// Every generator conjugated by `g`.
    pub fn conjugate_by(&self, g: &Permutation) -> Result<Self> {
        Self::from_generators(
            self.k,
            self.generators.iter().map(|s| s.conjugate_by(g)).collect(),
        )
    }

    /// All elements, for groups of order at most `limit`.
    pub fn elements(&self, limit: usize) -> Result<Vec<Permutation>> {
        let order = self.order();
        if order > BigUint::from(limit) {
            return Err(Error::Infeasible(u128::try_from(&order).unwrap_or(u128::MAX)));
        }
        let mut out = vec![Permutation::identity(self.k)];
        for level in self.chain.levels.iter().rev() {
            let reps: Vec<&Permutation> = level.orbit.iter().map(|&b| level.transversal[b].as_ref().unwrap()).collect();
            out = out
                .iter()
                .flat_map(|h| reps.iter().map(move |u| h.then(u)))
                .collect();
        }
        out.sort();
        Ok(out)
    }
}

/// `2^m * m!`, the order of the wreath product `S_2 wr S_m`.
pub fn wreath_s2_order(m: u64) -> BigUint {
    let mut v = BigUint::from(1u32) << m;
    for i in 2..=m {
        v *= BigUint::from(i);
    }
    v
}

pub fn factorial(n: u64) -> BigUint {
    (2..=n).fold(BigUint::from(1u32), |acc, i| acc * BigUint::from(i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn p(s: &str, k: usize) -> Permutation {
        Permutation::parse(s, Some(k)).unwrap()
    }

    /// Breadth-first closure of the generators, independent of the chain.
    fn closure(k: usize, gens: &[Permutation]) -> BTreeSet<Permutation> {
        let mut seen = BTreeSet::new();
        let id = Permutation::identity(k);
        seen.insert(id.clone());
        let mut queue = vec![id];
        while let Some(x) = queue.pop() {
            for g in gens {
                let y = x.then(g);
                if seen.insert(y.clone()) {
                    queue.push(y);
                }
            }
        }
        seen
    }

    #[test]
    fn s4_from_standard_generators() {
        let g = PermutationGroup::from_generators(4, vec![p("(1,2)", 4), p("(1,2,3,4)", 4)]).unwrap();
        assert_eq!(g.order(), BigUint::from(24u32));
        assert!(g.contains(&p("(1,3)", 4)));
    }

    #[test]
    fn d4_order_and_membership() {
        let gens = vec![p("(1,2,3,4)", 4), p("(1,3)", 4)];
        let g = PermutationGroup::from_generators(4, gens.clone()).unwrap();
        assert_eq!(g.order(), BigUint::from(8u32));
        assert!(!g.contains(&p("(1,2)", 4)));
        let all = closure(4, &gens);
        let elems: BTreeSet<Permutation> = g.elements(100).unwrap().into_iter().collect();
        assert_eq!(all, elems);
    }

    #[test]
    fn order_matches_closure_on_small_groups() {
        let cases: Vec<(usize, Vec<&str>)> = vec![
            (5, vec!["(1,2,3)", "(3,4,5)"]),
            (6, vec!["(1,2)(3,4)", "(2,6)(4,5)", "(1,4)(2,3)", "(1,5)(3,6)", "(1,6)(3,5)", "(1,2,6)(3,4,5)"]),
            (7, vec!["(1,2,3,4,5,6,7)", "(2,3,5)(4,7,6)"]),
            (6, vec!["(1,2)", "(3,4)", "(5,6)", "(1,3,5)(2,4,6)", "(1,3)(2,4)"]),
        ];
        for (k, gens) in cases {
            let gens: Vec<Permutation> = gens.iter().map(|s| p(s, k)).collect();
            let g = PermutationGroup::from_generators(k, gens.clone()).unwrap();
            let n = closure(k, &gens).len();
            assert_eq!(g.order(), BigUint::from(n), "{gens:?}");
            for s in &gens {
                assert!(g.contains(s));
            }
        }
    }

    #[test]
    fn trivial_group() {
        let g = PermutationGroup::from_generators(3, vec![Permutation::identity(3)]).unwrap();
        assert_eq!(g.order(), BigUint::from(1u32));
        let g = PermutationGroup::from_generators(3, vec![]).unwrap();
        assert_eq!(g.order(), BigUint::from(1u32));
    }

    #[test]
    fn degree_mismatch() {
        assert!(matches!(
            PermutationGroup::from_generators(4, vec![p("(1,2)", 3)]),
            Err(Error::DegreeMismatch { .. })
        ));
    }

    #[test]
    fn wreath_orders() {
        assert_eq!(wreath_s2_order(2), BigUint::from(8u32));
        assert_eq!(wreath_s2_order(13), BigUint::from(51_011_754_393_600u64));
        assert_eq!(factorial(5), BigUint::from(120u32));
    }
}
