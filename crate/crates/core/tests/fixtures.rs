mod common;

use galoscope::group::{Permutation, PermutationGroup};
use galoscope::pipeline::{cmd_branch, cmd_galois, cmd_group, cmd_orbits, cmd_primitivity, run_monodromy, RunConfig};
use galoscope::random::seeded;
use galoscope::{Error, ErrorKind};
use num_bigint::BigUint;
use serde_json::Value;

use common::{c, document, fixture_text};

fn cfg(seed: u64) -> RunConfig {
    RunConfig {
        seed,
        ..RunConfig::default()
    }
}

fn parse(p: &str) -> Permutation {
    Permutation::parse(p, Some(3)).unwrap()
}

#[test]
fn cubic_loops_match_the_reference_sequence_up_to_labels() {
    let doc = document("cubic-family.json");
    let (prep, gens) = run_monodromy(&doc, &cfg(1), &mut seeded(1)).unwrap();
    // listed clockwise from the rightmost branch point 1
    let reference: Vec<Permutation> = ["(2,3)", "(1,3)", "(1,2)", "(1,3)"].iter().map(|p| parse(p)).collect();
    let mut ours: Vec<(galoscope::Complex, Permutation)> = gens
        .ordered_witness
        .iter()
        .copied()
        .zip(gens.permutations.iter().map(|m| m.sigma.clone()))
        .collect();
    ours.reverse();
    let first = ours.iter().position(|(w, _)| (w - c(1.0, 0.0)).norm() < 1e-4).unwrap();
    ours.rotate_left(first);
    assert_eq!(prep.witness.points.len(), 4);
    let relabelings = PermutationGroup::from_list(vec![parse("(1,2)"), parse("(1,2,3)")])
        .unwrap()
        .elements(6)
        .unwrap();
    let found = relabelings.iter().any(|g| {
        ours.iter()
            .zip(&reference)
            .all(|((_, s), p)| s.conjugate_by(g) == *p)
    });
    assert!(found, "{:?}", ours.iter().map(|(_, s)| s.to_string()).collect::<Vec<_>>());
}

#[test]
fn square_root_cover_has_order_two() {
    let report = cmd_galois(&document("x2-t.json"), &cfg(3)).unwrap();
    assert!(report.certified);
    assert_eq!(report.value["group"]["order"], Value::from("2"));
    let pts = report.value["witness"]["points"].as_array().unwrap();
    assert_eq!(pts.len(), 1);
}

#[test]
fn quartic_branch_command_reports_zero_and_four() {
    let report = cmd_branch(&document("quartic.json"), &cfg(0)).unwrap();
    let pts: Vec<f64> = report.value["witness"]["points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["t"][0].as_f64().unwrap())
        .collect();
    assert_eq!(pts.len(), 2);
    assert!(pts[0].abs() < 1e-8 && (pts[1] - 4.0).abs() < 1e-8, "{pts:?}");
}

#[test]
fn quartic_orbits_command_certifies_four_and_eight() {
    let report = cmd_orbits(&document("quartic.json"), &cfg(2)).unwrap();
    assert!(report.certified);
    assert_eq!(report.value["group_orbit_sizes"], serde_json::json!([4, 8]));
}

#[test]
fn cubic_primitivity_agrees_with_brute_force() {
    let doc = document("cubic-family.json");
    let report = cmd_primitivity(&doc, &cfg(1)).unwrap();
    assert!(report.certified);
    assert_eq!(report.value["primitive"], Value::Bool(true));
    assert_eq!(report.value["two_transitive"], Value::Bool(true));
    let (_, gens) = run_monodromy(&doc, &cfg(1), &mut seeded(1)).unwrap();
    let g = PermutationGroup::from_generators(3, gens.generators()).unwrap();
    let elements = g.elements(6).unwrap();
    for mask in 1u32..7 {
        let block: Vec<usize> = (0..3).filter(|i| mask >> i & 1 == 1).collect();
        if block.len() < 2 || block.len() == 3 {
            continue;
        }
        let is_block = elements.iter().all(|e| {
            let image: Vec<usize> = block.iter().map(|&i| e.apply(i)).collect();
            let hits = image.iter().filter(|i| block.contains(i)).count();
            hits == 0 || hits == block.len()
        });
        assert!(!is_block, "{block:?} is a block");
    }
}

#[test]
fn group_command_on_e6_lines() {
    let report = cmd_group(&fixture_text("e6-lines.perms")).unwrap();
    assert_eq!(report.value["group"]["order"], Value::from("51840"));
    assert_eq!(report.value["group"]["degree"], Value::from(27));
}

#[test]
fn extended_fixtures_need_the_flag() {
    for name in ["lines27.json", "formation-control.json"] {
        let doc = document(name);
        assert!(doc.extended);
        let e: Error = cmd_branch(&doc, &cfg(0)).unwrap_err();
        assert_eq!(e.kind(), ErrorKind::Input);
    }
}

#[test]
fn fixture_expectations_are_consistent() {
    let fc = document("formation-control.json");
    let order: BigUint = fc.expect.as_ref().unwrap()["order"].as_str().unwrap().parse().unwrap();
    assert_eq!(order, galoscope::group::wreath_s2_order(13));
    let lines = document("lines27.json");
    assert_eq!(lines.parameters.len(), 20);
    assert_eq!(lines.equations.len(), 4);
    lines.system().unwrap();
}
