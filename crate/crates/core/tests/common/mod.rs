//! Shared test support: a seeded random-scenario generator, a grid-membership
//! oracle for the partition, and an independent unrolling oracle for the LTL
//! evaluator.

#![allow(dead_code)]

use rand::Rng;

use mv_core::ltl::{Formula, SemanticTrace};
use mv_core::partition::{Cell, Relation, Signature};
use mv_core::scenario::{
    EgoSeed, Obstacle, ObstacleKind, RoadModel, RoadType, RoadTypeInterval, Scenario,
};
use mv_core::Region;

/// Snap to the 0.1 m lattice the generator uses for static coordinates.
fn snap(v: f64) -> f64 {
    (v * 10.0).round() / 10.0
}

/// Random scenario within the oracle-friendly envelope: ≤3 obstacles, ≤2 road
/// types, ≤5 steps, static coordinates on a 0.1 m lattice.
pub fn random_scenario(rng: &mut impl Rng) -> Scenario {
    'retry: for _ in 0..1000 {
        let s_len = snap(rng.gen_range(12.0..24.0));
        let width = snap(rng.gen_range(4.0..8.0));
        let (d_min, d_max) = (-width / 2.0, width / 2.0);

        let road_types = match rng.gen_range(0..3) {
            0 => vec![RoadTypeInterval { s_lo: 0.0, s_hi: s_len, road_type: RoadType::Carriageway }],
            1 => {
                let cut = snap(rng.gen_range(s_len * 0.3..s_len * 0.7));
                vec![
                    RoadTypeInterval { s_lo: 0.0, s_hi: cut, road_type: RoadType::Carriageway },
                    RoadTypeInterval { s_lo: cut, s_hi: s_len, road_type: RoadType::PedestrianCrosswalk },
                ]
            }
            _ => {
                let a = snap(rng.gen_range(s_len * 0.25..s_len * 0.5));
                let b = snap(rng.gen_range(s_len * 0.55..s_len * 0.8));
                vec![
                    RoadTypeInterval { s_lo: 0.0, s_hi: a, road_type: RoadType::Carriageway },
                    RoadTypeInterval { s_lo: a, s_hi: b, road_type: RoadType::PedestrianCrosswalk },
                    RoadTypeInterval { s_lo: b, s_hi: s_len, road_type: RoadType::Carriageway },
                ]
            }
        };
        let road = RoadModel { s_begin: 0.0, s_end: s_len, d_min, d_max, road_types };

        let step = if rng.gen_bool(0.5) { 0.5 } else { 1.0 };
        let n = rng.gen_range(1..=5usize);
        let horizon = step * n as f64;

        let kinds = [ObstacleKind::Vehicle, ObstacleKind::Pedestrian, ObstacleKind::Cyclist];
        let count = rng.gen_range(0..=3usize);
        let mut obstacles = Vec::with_capacity(count);
        for i in 0..count {
            let half_width = snap(rng.gen_range(0.3..(width / 2.0 - 0.4).min(1.6)));
            let d_vel = if rng.gen_bool(0.6) {
                0.0
            } else {
                snap(rng.gen_range(-0.2..0.2))
            };
            let drift = d_vel.abs() * horizon + 0.1;
            let lo = d_min + half_width + drift;
            let hi = d_max - half_width - drift;
            if lo >= hi {
                continue 'retry;
            }
            obstacles.push(Obstacle {
                id: format!("o{}", i + 1),
                kind: kinds[rng.gen_range(0..kinds.len())],
                half_length: snap(rng.gen_range(0.4..2.0)),
                half_width,
                s0: snap(rng.gen_range(0.0..s_len)),
                d0: snap(rng.gen_range(lo..hi)),
                s_vel: snap(rng.gen_range(-3.0..3.0)),
                d_vel,
                s_acc: snap(rng.gen_range(-1.0..1.0)),
                d_acc: 0.0,
            });
        }

        // Find a seed clearly inside the free space at step 0.
        let boxes: Vec<mv_core::FrenetRect> = obstacles
            .iter()
            .map(|o| {
                if n > 0 {
                    o.swept_box(0.0, step)
                } else {
                    o.footprint_at(0.0)
                }
            })
            .collect();
        let mut ego = None;
        for _ in 0..200 {
            let s = snap(rng.gen_range(0.1..s_len - 0.1)) + 0.05;
            let d = snap(rng.gen_range(d_min + 0.1..d_max - 0.1)) + 0.05;
            if s <= 0.0 || s >= s_len || d <= d_min || d >= d_max {
                continue;
            }
            let clear = boxes.iter().all(|b| {
                s < b.s_lo - 1e-3 || s > b.s_hi + 1e-3 || d < b.d_lo - 1e-3 || d > b.d_hi + 1e-3
            });
            if clear {
                ego = Some(EgoSeed { s0: s, d0: d });
                break;
            }
        }
        let Some(ego) = ego else { continue 'retry };

        match Scenario::new(road, obstacles, ego, horizon, step, rng.gen_bool(0.2)) {
            Ok(s) => return s,
            Err(_) => continue 'retry,
        }
    }
    panic!("failed to generate a valid random scenario");
}

/// Grid-membership check of one step's partition at 0.1 m resolution. Probe
/// points sit at lattice offsets of 0.05 so they never coincide with static
/// cut lines; points within 1e-6 of a (possibly off-lattice) obstacle-box
/// edge are skipped as ambiguous.
pub fn check_partition_against_grid(
    scenario: &Scenario,
    p: usize,
    cells: &[Cell],
) -> Result<(), String> {
    let road = &scenario.road;
    let boxes = scenario.obstacle_boxes(p);
    let res = 0.1;
    let eps = 1e-6;

    let mut by_signature = std::collections::BTreeMap::new();
    for cell in cells {
        by_signature.insert(cell.signature.clone(), &cell.region);
    }

    let mut s = road.s_begin + res / 2.0;
    while s < road.s_end {
        let mut d = road.d_min + res / 2.0;
        'point: while d < road.d_max {
            for b in &boxes {
                let near_edge = (s - b.s_lo).abs() < eps
                    || (s - b.s_hi).abs() < eps
                    || (d - b.d_lo).abs() < eps
                    || (d - b.d_hi).abs() < eps;
                if near_edge {
                    d += res;
                    continue 'point;
                }
            }
            let occupied = boxes
                .iter()
                .any(|b| b.s_lo < s && s < b.s_hi && b.d_lo < d && d < b.d_hi);
            if occupied {
                for cell in cells {
                    if cell.region.contains(s, d) {
                        return Err(format!(
                            "occupied point ({s}, {d}) at step {p} lies in cell {}",
                            cell.signature
                        ));
                    }
                }
            } else {
                let mut relations = Vec::with_capacity(boxes.len());
                for b in &boxes {
                    let rel = if s > b.s_hi {
                        Relation::Front
                    } else if s < b.s_lo {
                        Relation::Behind
                    } else if d > b.d_hi {
                        Relation::Left
                    } else {
                        Relation::Right
                    };
                    relations.push(rel);
                }
                let road_type = road
                    .road_type_at(s)
                    .ok_or_else(|| format!("no road type at s={s}"))?;
                let signature = Signature { road_type, relations };
                match by_signature.get(&signature) {
                    Some(region) if region.contains(s, d) => {}
                    Some(_) => {
                        return Err(format!(
                            "free point ({s}, {d}) at step {p} not inside its cell {signature}"
                        ))
                    }
                    None => {
                        return Err(format!(
                            "free point ({s}, {d}) at step {p} has no cell {signature}"
                        ))
                    }
                }
            }
            d += res;
        }
        s += res;
    }
    Ok(())
}

/// Area conservation at one step: cells plus (the road-clipped union of)
/// obstacle boxes account for the whole road extent.
pub fn check_area_conservation(scenario: &Scenario, p: usize, cells: &[Cell]) -> Result<(), String> {
    let road_region = Region::from_rect(scenario.road.extent());
    let boxes = Region::from_rects(scenario.obstacle_boxes(p)).intersect(&road_region);
    let cell_area: f64 = cells.iter().map(|c| c.region.area()).sum();
    let total = cell_area + boxes.area();
    let expected = road_region.area();
    if (total - expected).abs() > 1e-6 {
        return Err(format!(
            "area mismatch at step {p}: cells {cell_area} + boxes {} = {total}, road {expected}",
            boxes.area()
        ));
    }
    Ok(())
}

/// Collision-freeness at one step: every cell region has empty intersection
/// with every obstacle box.
pub fn check_collision_freeness(scenario: &Scenario, p: usize, cells: &[Cell]) -> Result<(), String> {
    for b in scenario.obstacle_boxes(p) {
        let box_region = Region::from_rect(b);
        for cell in cells {
            if !cell.region.intersect(&box_region).is_empty() {
                return Err(format!(
                    "cell {} at step {p} overlaps an obstacle box",
                    cell.signature
                ));
            }
        }
    }
    Ok(())
}

const UNROLL: usize = 64;

/// Independent LTL oracle: explicitly unrolls the stuttered trace to 64
/// states and evaluates `G`/`F`/`U` by bounded suffix scans (the constant
/// suffix makes the bounded scan exact for traces up to length 8 and formula
/// depth up to 5).
pub fn oracle_evaluate_all(formula: &Formula, trace: &SemanticTrace) -> Vec<bool> {
    let mut states: Vec<Vec<bool>> = trace.states().to_vec();
    while states.len() < UNROLL {
        states.push(states.last().unwrap().clone());
    }
    let full = oracle_vec(formula, &states, trace);
    full[..trace.len()].to_vec()
}

fn oracle_vec(formula: &Formula, states: &[Vec<bool>], trace: &SemanticTrace) -> Vec<bool> {
    let len = states.len();
    match formula {
        Formula::Atom(name) => {
            let idx = trace.atom_index(name).expect("oracle atoms are declared");
            states.iter().map(|st| st[idx]).collect()
        }
        Formula::True => vec![true; len],
        Formula::False => vec![false; len],
        Formula::Not(f) => oracle_vec(f, states, trace).iter().map(|v| !v).collect(),
        Formula::And(a, b) => {
            let (x, y) = (oracle_vec(a, states, trace), oracle_vec(b, states, trace));
            x.iter().zip(y).map(|(p, q)| *p && q).collect()
        }
        Formula::Or(a, b) => {
            let (x, y) = (oracle_vec(a, states, trace), oracle_vec(b, states, trace));
            x.iter().zip(y).map(|(p, q)| *p || q).collect()
        }
        Formula::Implies(a, b) => {
            let (x, y) = (oracle_vec(a, states, trace), oracle_vec(b, states, trace));
            x.iter().zip(y).map(|(p, q)| !*p || q).collect()
        }
        Formula::Next(f) => {
            let sub = oracle_vec(f, states, trace);
            (0..len).map(|i| if i + 1 < len { sub[i + 1] } else { sub[i] }).collect()
        }
        Formula::Globally(f) => {
            let sub = oracle_vec(f, states, trace);
            (0..len).map(|i| (i..len).all(|j| sub[j])).collect()
        }
        Formula::Finally(f) => {
            let sub = oracle_vec(f, states, trace);
            (0..len).map(|i| (i..len).any(|j| sub[j])).collect()
        }
        Formula::Until(a, b) => {
            let x = oracle_vec(a, states, trace);
            let y = oracle_vec(b, states, trace);
            (0..len)
                .map(|i| (i..len).any(|j| y[j] && (i..j).all(|k| x[k])))
                .collect()
        }
    }
}

/// Random formula of bounded depth over atoms `a`, `b`, `c`.
pub fn random_formula(rng: &mut impl Rng, depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..8) {
            0 => Formula::True,
            1 => Formula::False,
            n => Formula::atom(["a", "b", "c"][n % 3]),
        };
    }
    let sub = |rng: &mut _| random_formula(rng, depth - 1);
    match rng.gen_range(0..9) {
        0 => Formula::not(sub(rng)),
        1 => Formula::next(sub(rng)),
        2 => Formula::globally(sub(rng)),
        3 => Formula::finally(sub(rng)),
        4 => Formula::and(sub(rng), sub(rng)),
        5 => Formula::or(sub(rng), sub(rng)),
        6 => Formula::implies(sub(rng), sub(rng)),
        _ => Formula::until(sub(rng), sub(rng)),
    }
}

/// Random trace over atoms `a`, `b`, `c` with 1..=8 states.
pub fn random_trace(rng: &mut impl Rng) -> SemanticTrace {
    let len = rng.gen_range(1..=8usize);
    let states = (0..len)
        .map(|_| (0..3).map(|_| rng.gen_bool(0.5)).collect())
        .collect();
    SemanticTrace::new(vec!["a".into(), "b".into(), "c".into()], states).unwrap()
}

/// Cell stub carrying only a signature (for letter-trace construction).
pub fn letter_cell(road_type: RoadType, relations: Vec<Relation>, step: usize) -> Cell {
    Cell { signature: Signature { road_type, relations }, step, region: Region::empty() }
}

/// Path-count oracle: product of the per-layer 0/1 transition matrices.
pub fn matrix_path_count(
    graph: &mv_core::NavGraph,
    root: mv_core::navgraph::VertexId,
    goal: mv_core::navgraph::VertexId,
) -> u64 {
    let mut counts: Vec<u64> = vec![0; graph.layers()[0].len()];
    counts[root.index] = 1;
    for p in 0..graph.layer_count() - 1 {
        let mut next = vec![0u64; graph.layers()[p + 1].len()];
        for (i, c) in counts.iter().enumerate() {
            if *c == 0 {
                continue;
            }
            for &(j, _) in graph.outgoing(mv_core::navgraph::VertexId { step: p, index: i }) {
                next[j] += c;
            }
        }
        counts = next;
    }
    counts[goal.index]
}
