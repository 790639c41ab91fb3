//! Pipeline-level integration checks built on the independent oracles.

mod common;

use common::*;
use mv_core::navgraph::NavGraph;
use mv_core::partition::build_all_cells;
use mv_core::rules::{rules_for, PropositionSet};
use mv_core::scenario::Scenario;
use mv_core::verify::{run_pipeline, PipelineOptions};

const S1_SCENARIO: &str = include_str!("../../../scenarios/s1_two_vehicles.yaml");
const OVERTAKE_SCENARIO: &str = include_str!("../../../scenarios/overtake.yaml");
const CROSSWALK_SCENARIO: &str = include_str!("../../../scenarios/crosswalk.yaml");

/// The shipped scenarios themselves satisfy the partition oracles.
#[test]
fn shipped_scenarios_pass_the_grid_oracle() {
    for text in [S1_SCENARIO, OVERTAKE_SCENARIO, CROSSWALK_SCENARIO] {
        let scenario = Scenario::from_yaml(text).unwrap();
        let cells_by_step = build_all_cells(&scenario).unwrap();
        for (p, cells) in cells_by_step.iter().enumerate() {
            check_collision_freeness(&scenario, p, cells).unwrap();
            check_area_conservation(&scenario, p, cells).unwrap();
            check_partition_against_grid(&scenario, p, cells).unwrap();
        }
    }
}

#[test]
fn enumerated_totals_match_matrix_path_counts() {
    let scenario = Scenario::from_yaml(S1_SCENARIO).unwrap();
    let graph = NavGraph::from_cells(&scenario, build_all_cells(&scenario).unwrap());
    let root = graph.root_vertex(scenario.ego.s0, scenario.ego.d0).unwrap();
    let by_matrix: u64 = graph
        .goal_candidates()
        .into_iter()
        .map(|g| matrix_path_count(&graph, root, g))
        .sum();
    let report = run_pipeline(&scenario, &PipelineOptions::default()).unwrap();
    assert_eq!(report.traces.enumerated as u64, by_matrix);
}

#[test]
fn satisfying_traces_pass_the_unrolling_oracle() {
    for text in [OVERTAKE_SCENARIO, CROSSWALK_SCENARIO] {
        let scenario = Scenario::from_yaml(text).unwrap();
        let graph = NavGraph::from_cells(&scenario, build_all_cells(&scenario).unwrap());
        let rules = rules_for(&scenario);
        let props = PropositionSet::for_scenario(&scenario);
        let report = run_pipeline(&scenario, &PipelineOptions::default()).unwrap();
        assert!(report.traces.satisfying > 0);
        assert!(report.traces.satisfying <= report.traces.enumerated);
        for record in &report.results {
            let cells = graph.path_cells(&record.path);
            let trace = props.trace_of(&cells, scenario.congested).unwrap();
            let oracle_satisfied = rules
                .iter()
                .all(|rule| oracle_evaluate_all(&rule.formula, &trace)[0]);
            assert_eq!(
                record.satisfied, oracle_satisfied,
                "oracle disagrees on {:?}",
                record.signatures
            );
        }
    }
}

#[test]
fn every_path_stays_collision_free_per_step() {
    let scenario = Scenario::from_yaml(CROSSWALK_SCENARIO).unwrap();
    let graph = NavGraph::from_cells(&scenario, build_all_cells(&scenario).unwrap());
    let report = run_pipeline(&scenario, &PipelineOptions::default()).unwrap();
    for record in &report.results {
        for cell in graph.path_cells(&record.path) {
            for b in scenario.obstacle_boxes(cell.step) {
                assert!(cell
                    .region
                    .intersect(&mv_core::Region::from_rect(b))
                    .is_empty());
            }
        }
    }
}

/// Reports for identical inputs are byte-identical apart from the wall-clock
/// timing block.
#[test]
fn reports_are_bitwise_identical_modulo_timings() {
    let scenario = Scenario::from_yaml(CROSSWALK_SCENARIO).unwrap();
    let opts = PipelineOptions::default();
    let strip = |yaml: &str| -> String {
        let mut out = String::new();
        let mut in_timings = false;
        for line in yaml.lines() {
            if line.starts_with("timings:") {
                in_timings = true;
                continue;
            }
            if in_timings && line.starts_with("  ") {
                continue;
            }
            in_timings = false;
            out.push_str(line);
            out.push('\n');
        }
        out
    };
    let a = run_pipeline(&scenario, &opts).unwrap().to_yaml();
    let b = run_pipeline(&scenario, &opts).unwrap().to_yaml();
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn crosswalk_scene_rejects_r2_and_r3_violations() {
    let scenario = Scenario::from_yaml(CROSSWALK_SCENARIO).unwrap();
    let report = run_pipeline(&scenario, &PipelineOptions::default()).unwrap();
    let violated: std::collections::BTreeSet<String> = report
        .results
        .iter()
        .filter_map(|r| r.violation.as_ref().map(|v| v.rule.clone()))
        .collect();
    assert!(violated.iter().any(|r| r.starts_with("R2") || r.starts_with("R3")),
        "crosswalk scene never exercised R2/R3: {violated:?}");
    // Violation instants are 1-based and within the trace.
    let n = scenario.step_count();
    for record in &report.results {
        if let Some(v) = &record.violation {
            assert!(v.instant >= 1 && v.instant <= n + 1, "instant {} out of range", v.instant);
        }
    }
}
