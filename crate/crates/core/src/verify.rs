//! End-to-end maneuver verification: partition the scene, build the
//! navigation graph, enumerate and cost-sort candidate traces, check every
//! trace against the rule set, and emit the satisfying traces with their
//! maneuver envelopes.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::ltl::{Formula, LtlError, SemanticTrace};
use crate::navgraph::{NavGraph, Path, DEFAULT_TRACE_LIMIT};
use crate::partition::{build_all_cells, Cell, PartitionError};
use crate::rules::{PropositionSet, RuleSpec};
use crate::scenario::Scenario;
use crate::Region;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Graph(#[from] crate::navgraph::GraphError),
    #[error(transparent)]
    Ltl(#[from] LtlError),
    #[error("failed to build verification thread pool: {0}")]
    ThreadPool(String),
}

/// Per-step drivable bounds of one trace: the s-extent of the step's cell and
/// the lateral bounds sampled along s. Samples fall only where the region has
/// coverage (a cell split by a road inset skips the uncovered band).
#[derive(Debug, Clone, Serialize)]
pub struct ManeuverEnvelope {
    pub step: usize,
    pub s_min: f64,
    pub s_max: f64,
    pub samples: Vec<EnvelopeSample>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnvelopeSample {
    pub s: f64,
    pub d_left: f64,
    pub d_right: f64,
}

/// Envelope of one cell region sampled at spacing `ds` (final sample clamped
/// to the s-extent's end).
pub fn envelope_of_region(region: &Region, step: usize, ds: f64) -> ManeuverEnvelope {
    assert!(ds > 0.0, "sample spacing must be positive");
    let (s_min, s_max) = region.s_extent().expect("cell regions are non-empty");
    let mut stations = Vec::new();
    let mut k = 0usize;
    loop {
        let s = s_min + k as f64 * ds;
        if s >= s_max - 1e-12 {
            break;
        }
        stations.push(s);
        k += 1;
    }
    stations.push(s_max);
    let samples = stations
        .into_iter()
        .filter_map(|s| {
            region
                .lateral_extent_at(s)
                .map(|(d_right, d_left)| EnvelopeSample { s, d_left, d_right })
        })
        .collect();
    ManeuverEnvelope { step, s_min, s_max, samples }
}

/// Envelopes for every step of a path.
pub fn envelope_of(graph: &NavGraph, path: &Path, ds: f64) -> Vec<ManeuverEnvelope> {
    graph
        .path_cells(path)
        .iter()
        .map(|cell| envelope_of_region(&cell.region, cell.step, ds))
        .collect()
}

/// Verdict of one rule on one trace.
#[derive(Debug, Clone, Serialize)]
pub struct RuleVerdict {
    pub rule: String,
    pub satisfied: bool,
}

/// Where a rejected trace first goes wrong: the violated rule and the
/// earliest instant (printed 1-based) at which the body of its `G` fails.
#[derive(Debug, Clone, Serialize)]
pub struct ViolationInfo {
    pub rule: String,
    pub instant: usize,
}

/// Evaluates every rule on the semantic trace of `cells` at instant 0.
pub fn verify_trace(
    props: &PropositionSet,
    cells: &[&Cell],
    rules: &[RuleSpec],
    congested: bool,
) -> Result<Vec<RuleVerdict>, LtlError> {
    let trace = props.trace_of(cells, congested)?;
    rules
        .iter()
        .map(|rule| {
            Ok(RuleVerdict {
                rule: rule.name.clone(),
                satisfied: rule.formula.evaluate(&trace, 0)?,
            })
        })
        .collect()
}

/// First `Globally` subformula in preorder, if any.
fn first_globally(formula: &Formula) -> Option<&Formula> {
    match formula {
        Formula::Globally(body) => Some(body),
        Formula::Atom(_) | Formula::True | Formula::False => None,
        Formula::Not(f) | Formula::Next(f) | Formula::Finally(f) => first_globally(f),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Until(a, b) => {
            first_globally(a).or_else(|| first_globally(b))
        }
    }
}

/// Diagnostic for a violated rule: earliest instant (1-based) where the
/// G-body fails, from the evaluator's position table; falls back to the
/// earliest instant the whole formula is false.
fn violation_instant(rule: &RuleSpec, trace: &SemanticTrace) -> Result<usize, LtlError> {
    let table = match first_globally(&rule.formula) {
        Some(body) => body.evaluate_all(trace)?,
        None => rule.formula.evaluate_all(trace)?,
    };
    let zero_based = table.iter().position(|&v| !v).unwrap_or(0);
    Ok(zero_based + 1)
}

fn round3<S: Serializer>(value: &f64, serializer: S) -> Result<S::Ok, S::Error> {
    serializer.serialize_f64((value * 1000.0).round() / 1000.0)
}

/// Wall-clock stage durations in seconds (reported to 3 decimals).
#[derive(Debug, Clone, Default, Serialize)]
pub struct StageTimings {
    #[serde(serialize_with = "round3")]
    pub partitioning: f64,
    #[serde(serialize_with = "round3")]
    pub graph_generation: f64,
    #[serde(serialize_with = "round3")]
    pub dijkstra_search: f64,
    #[serde(serialize_with = "round3")]
    pub calculating_costs: f64,
    #[serde(serialize_with = "round3")]
    pub verification: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioDigest {
    pub road_s: (f64, f64),
    pub road_d: (f64, f64),
    pub road_types: usize,
    pub obstacles: Vec<String>,
    pub horizon: f64,
    pub step: f64,
    pub steps: usize,
    pub congested: bool,
}

impl ScenarioDigest {
    fn of(s: &Scenario) -> Self {
        Self {
            road_s: (s.road.s_begin, s.road.s_end),
            road_d: (s.road.d_min, s.road.d_max),
            road_types: s.road.road_types.len(),
            obstacles: s.obstacles.iter().map(|o| format!("{} ({:?})", o.id, o.kind)).collect(),
            horizon: s.horizon,
            step: s.step,
            steps: s.step_count(),
            congested: s.congested,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GraphSummary {
    pub nodes: usize,
    pub edges: usize,
    pub cells_per_step: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceSummary {
    pub enumerated: usize,
    pub truncated: bool,
    pub checked: usize,
    pub satisfying: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BestTrace {
    pub signatures: Vec<String>,
    pub cost: f64,
}

/// One checked trace: signature sequence, cost, verdicts, and (for satisfying
/// traces up to the envelope cap) the maneuver envelopes.
#[derive(Debug, Clone, Serialize)]
pub struct TraceRecord {
    pub index: usize,
    pub signatures: Vec<String>,
    pub cost: f64,
    pub satisfied: bool,
    pub verdicts: Vec<RuleVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<ViolationInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub envelopes: Option<Vec<ManeuverEnvelope>>,
    #[serde(skip)]
    pub path: Path,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub scenario: ScenarioDigest,
    pub timings: StageTimings,
    pub graph: GraphSummary,
    pub traces: TraceSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_trace: Option<BestTrace>,
    pub results: Vec<TraceRecord>,
}

impl VerificationReport {
    pub fn to_yaml(&self) -> String {
        serde_yaml::to_string(self).expect("report serialization cannot fail")
    }

    pub fn satisfying(&self) -> impl Iterator<Item = &TraceRecord> {
        self.results.iter().filter(|r| r.satisfied)
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOptions {
    /// Cap on exhaustive trace enumeration (explicitly flagged when hit).
    pub max_traces: usize,
    /// How many sorted traces to verify (`None` = all enumerated).
    pub max_checked: Option<usize>,
    /// Envelope sample spacing Δs in meters.
    pub ds: f64,
    /// Envelopes are attached to at most this many satisfying traces.
    pub max_envelopes: usize,
    /// Verification worker threads; 0 picks the rayon default.
    pub threads: usize,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            max_traces: DEFAULT_TRACE_LIMIT,
            max_checked: None,
            ds: 0.5,
            max_envelopes: 16,
            threads: 0,
        }
    }
}

/// Runs the full pipeline on a validated scenario.
pub fn run_pipeline(
    scenario: &Scenario,
    options: &PipelineOptions,
) -> Result<VerificationReport, VerifyError> {
    let rules = crate::rules::rules_for(scenario);
    run_pipeline_with_rules(scenario, options, &rules)
}

/// Runs the full pipeline with an explicit rule set.
pub fn run_pipeline_with_rules(
    scenario: &Scenario,
    options: &PipelineOptions,
    rules: &[RuleSpec],
) -> Result<VerificationReport, VerifyError> {
    let mut timings = StageTimings::default();

    let t0 = Instant::now();
    let cells = build_all_cells(scenario)?;
    timings.partitioning = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let graph = NavGraph::from_cells(scenario, cells);
    timings.graph_generation = t1.elapsed().as_secs_f64();

    let root = graph.root_vertex(scenario.ego.s0, scenario.ego.d0)?;
    let goals = graph.goal_candidates();

    // Exhaustive enumeration per goal candidate, lexicographic goal order.
    let mut paths: Vec<Path> = Vec::new();
    let mut truncated = false;
    for goal in &goals {
        let remaining = options.max_traces.saturating_sub(paths.len());
        let mut enumerated = graph.enumerate_traces(root, *goal, remaining)?;
        paths.append(&mut enumerated.paths);
        truncated |= enumerated.truncated;
        if truncated {
            break;
        }
    }

    // A single search run mirrors how a planner would pull one maneuver.
    let t2 = Instant::now();
    let best_trace = goals
        .iter()
        .filter_map(|goal| graph.dijkstra(root, *goal))
        .min_by(|a, b| {
            a.1.total_cmp(&b.1)
                .then_with(|| graph.path_signatures(&a.0).cmp(&graph.path_signatures(&b.0)))
        })
        .map(|(path, cost)| BestTrace { signatures: graph.path_signatures(&path), cost });
    timings.dijkstra_search = t2.elapsed().as_secs_f64();

    let t3 = Instant::now();
    let mut costed: Vec<(Path, f64)> =
        paths.into_iter().map(|p| (graph.path_cost(&p), p)).map(|(c, p)| (p, c)).collect();
    costed.sort_by(|(pa, ca), (pb, cb)| {
        ca.total_cmp(cb).then_with(|| graph.path_signatures(pa).cmp(&graph.path_signatures(pb)))
    });
    timings.calculating_costs = t3.elapsed().as_secs_f64();

    let enumerated = costed.len();
    let checked_count = options.max_checked.map_or(enumerated, |m| m.min(enumerated));
    let props = PropositionSet::for_scenario(scenario);

    let t4 = Instant::now();
    let verify_one = |(index, (path, cost)): (usize, &(Path, f64))| -> Result<TraceRecord, VerifyError> {
        let cells = graph.path_cells(path);
        let trace = props.trace_of(&cells, scenario.congested)?;
        let mut verdicts = Vec::with_capacity(rules.len());
        let mut violation = None;
        for rule in rules {
            let satisfied = rule.formula.evaluate(&trace, 0)?;
            if !satisfied && violation.is_none() {
                violation = Some(ViolationInfo {
                    rule: rule.name.clone(),
                    instant: violation_instant(rule, &trace)?,
                });
            }
            verdicts.push(RuleVerdict { rule: rule.name.clone(), satisfied });
        }
        let satisfied = verdicts.iter().all(|v| v.satisfied);
        Ok(TraceRecord {
            index,
            signatures: graph.path_signatures(path),
            cost: *cost,
            satisfied,
            verdicts,
            violation,
            envelopes: None,
            path: path.clone(),
        })
    };

    let to_check: Vec<(usize, &(Path, f64))> =
        costed[..checked_count].iter().enumerate().collect();
    let mut results: Vec<TraceRecord> = if options.threads == 1 {
        to_check.into_iter().map(verify_one).collect::<Result<_, _>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.threads)
            .build()
            .map_err(|e| VerifyError::ThreadPool(e.to_string()))?;
        pool.install(|| {
            to_check
                .into_par_iter()
                .map(verify_one)
                .collect::<Result<Vec<_>, _>>()
        })?
    };
    timings.verification = t4.elapsed().as_secs_f64();

    let mut with_envelopes = 0;
    for record in &mut results {
        if record.satisfied && with_envelopes < options.max_envelopes {
            record.envelopes = Some(envelope_of(&graph, &record.path, options.ds));
            with_envelopes += 1;
        }
    }

    let satisfying = results.iter().filter(|r| r.satisfied).count();
    Ok(VerificationReport {
        scenario: ScenarioDigest::of(scenario),
        timings,
        graph: GraphSummary {
            nodes: graph.vertex_count(),
            edges: graph.edge_count(),
            cells_per_step: graph.layers().iter().map(Vec::len).collect(),
        },
        traces: TraceSummary { enumerated, truncated, checked: checked_count, satisfying },
        best_trace,
        results,
    })
}
