use num_bigint::BigUint;

use super::action::{block_systems, check_tuple_feasible, is_primitive_higman, orbits_on_tuples, OrbitGraph};
use super::chain::{factorial, wreath_s2_order, PermutationGroup};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Symmetric,
    Alternating,
    WreathS2,
    MathieuCandidate,
    Other,
}

impl Classification {
    pub fn tag(&self) -> &'static str {
        match self {
            Classification::Symmetric => "symmetric",
            Classification::Alternating => "alternating",
            Classification::WreathS2 => "wreath-S2",
            Classification::MathieuCandidate => "mathieu-candidate",
            Classification::Other => "other",
        }
    }
}

/// Summary of a permutation group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupReport {
    pub degree: usize,
    pub order: BigUint,
    /// Orbits on symbols (0-based).
    pub orbits: Vec<Vec<usize>>,
    /// Largest `s <= 5` (and `<= k`) for which the action on distinct `s`-tuples is
    /// transitive, among the values that were feasible to test.
    pub transitivity_degree: usize,
    pub primitive: bool,
    /// Minimal nontrivial block system when transitive and imprimitive.
    pub blocks: Option<Vec<Vec<usize>>>,
    /// Orbit graphs on distinct pairs (transitive groups only).
    pub orbit_graphs: Vec<OrbitGraph>,
    pub classification: Classification,
}

/// Orders of M11, M12, M23, M24 with their degrees.
const MATHIEU: [(usize, u64); 4] = [(11, 7920), (12, 95040), (23, 10_200_960), (24, 244_823_040)];

/// Highest tuple length tested for transitivity.
pub const MAX_TRANSITIVITY: usize = 5;
/// Tuple lengths 4 and 5 are only tested up to this degree.
pub const HIGH_TRANSITIVITY_DEGREE: usize = 12;

pub fn transitivity_degree(g: &PermutationGroup) -> Result<usize> {
    let k = g.degree();
    let mut best = 0;
    for s in 1..=MAX_TRANSITIVITY.min(k) {
        if s >= 4 && k > HIGH_TRANSITIVITY_DEGREE {
            break;
        }
        if check_tuple_feasible(k, s).is_err() {
            break;
        }
        if orbits_on_tuples(g, s)?.len() == 1 {
            best = s;
        } else {
            break;
        }
    }
    Ok(best)
}

pub fn classify(g: &PermutationGroup) -> Result<GroupReport> {
    let k = g.degree();
    let order = g.order();
    let orbits = g.orbits();
    let transitive = orbits.len() == 1;
    let transitivity = transitivity_degree(g)?;
    let (primitive, blocks, graphs) = if transitive {
        match is_primitive_higman(g) {
            Ok((prim, graphs)) => {
                let blocks = if prim { None } else { block_systems(g)? };
                (prim, blocks, graphs)
            }
            // Too large for the pair enumeration: fall back to block search alone.
            Err(crate::Error::Infeasible(_)) => {
                let blocks = block_systems(g)?;
                (blocks.is_none(), blocks, Vec::new())
            }
            Err(e) => return Err(e),
        }
    } else {
        (false, None, Vec::new())
    };
    let full = factorial(k as u64);
    let classification = if order == full {
        Classification::Symmetric
    } else if k > 1 && order.clone() * 2u32 == full && g.generators().iter().all(|s| s.is_even()) {
        Classification::Alternating
    } else if k % 2 == 0
        && k > 0
        && has_pair_blocks(g, &blocks)?
        && order == wreath_s2_order((k / 2) as u64)
    {
        Classification::WreathS2
    } else if is_mathieu_candidate(k, &order, transitivity) {
        Classification::MathieuCandidate
    } else {
        Classification::Other
    };
    Ok(GroupReport {
        degree: k,
        order,
        orbits,
        transitivity_degree: transitivity,
        primitive,
        blocks,
        orbit_graphs: graphs,
        classification,
    })
}

fn has_pair_blocks(g: &PermutationGroup, minimal: &Option<Vec<Vec<usize>>>) -> Result<bool> {
    if let Some(b) = minimal {
        if b[0].len() == 2 {
            return Ok(true);
        }
    }
    if !g.is_transitive() {
        return Ok(false);
    }
    Ok(super::action::all_minimal_candidates(g)?
        .iter()
        .any(|b| b[0].len() == 2))
}

/// 4- or 5-transitivity is only tested for degree at most 12; for the large Mathieu degrees
/// 3-transitivity together with the order is accepted.
fn is_mathieu_candidate(k: usize, order: &BigUint, transitivity: usize) -> bool {
    MATHIEU.iter().any(|&(deg, ord)| {
        let needed = if deg <= HIGH_TRANSITIVITY_DEGREE { 4 } else { 3 };
        deg == k && *order == BigUint::from(ord) && transitivity >= needed
    })
}
