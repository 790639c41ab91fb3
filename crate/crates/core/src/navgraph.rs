//! Directed navigation graph over free space-time cells.
//!
//! Vertices are the cells of steps 0..=n; edges connect consecutive steps
//! only and exist when the two signatures' regions touch at both endpoint
//! steps (single-point corner contact counts). Edge weights default to the
//! reciprocal-gap margin cost and are pluggable.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::partition::{Cell, Signature};
use crate::scenario::Scenario;
use crate::Region;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("no step-0 cell contains the ego seed ({s0}, {d0})")]
    RootNotFound { s0: f64, d0: f64 },
    #[error("vertex {0:?} does not belong to this graph")]
    InvalidVertex(VertexId),
    #[error("path enumeration requires a step-0 root and a final-step goal")]
    BadEndpoints,
}

/// Vertex address: layer (time step) and index within the layer's
/// signature-sorted cell list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VertexId {
    pub step: usize,
    pub index: usize,
}

/// A root-to-goal path: one cell index per layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub indices: Vec<usize>,
}

/// Result of exhaustive trace enumeration; `truncated` flags that the
/// configured limit cut the search short.
#[derive(Debug, Clone)]
pub struct EnumeratedTraces {
    pub paths: Vec<Path>,
    pub truncated: bool,
}

/// Default cap on exhaustive enumeration; combinatorial scenes explode
/// quickly, so truncation is explicit rather than silent.
pub const DEFAULT_TRACE_LIMIT: usize = 100_000;

/// Edge weight from the planning interval length and the minimum s-gap
/// between the destination cell and any obstacle box at the destination step
/// (`None` when the scene has no obstacles). Lower cost means larger margins.
pub fn default_edge_weight(step_len: f64, gap: Option<f64>) -> f64 {
    match gap {
        Some(g) => step_len / (1.0 + g),
        None => 0.0,
    }
}

pub struct NavGraph {
    layers: Vec<Vec<Cell>>,
    /// edges[p][i] = sorted list of (destination index at p+1, edge cost).
    edges: Vec<Vec<Vec<(usize, f64)>>>,
}

impl NavGraph {
    /// Builds the graph for a scenario with the default margin weight.
    pub fn from_cells(scenario: &Scenario, layers: Vec<Vec<Cell>>) -> Self {
        Self::from_cells_with_weight(scenario, layers, default_edge_weight)
    }

    /// Builds the graph with a custom edge-weight function.
    pub fn from_cells_with_weight(
        scenario: &Scenario,
        layers: Vec<Vec<Cell>>,
        weight: impl Fn(f64, Option<f64>) -> f64,
    ) -> Self {
        let step_len = scenario.step;
        let mut edges = Vec::with_capacity(layers.len().saturating_sub(1));
        for p in 0..layers.len().saturating_sub(1) {
            let here = &layers[p];
            let next = &layers[p + 1];
            let boxes_next = scenario.obstacle_boxes(p + 1);
            // Region of a signature at a given layer; absent signatures
            // contribute an empty region and therefore no edge.
            let region_at = |layer: &[Cell], sig: &Signature| -> Option<Region> {
                layer
                    .iter()
                    .find(|c| &c.signature == sig)
                    .map(|c| c.region.clone())
            };
            let mut layer_edges = Vec::with_capacity(here.len());
            for src in here {
                let mut out = Vec::new();
                for (j, dst) in next.iter().enumerate() {
                    let touch_here = match region_at(here, &dst.signature) {
                        Some(dst_here) => src.region.closures_touch(&dst_here),
                        None => false,
                    };
                    if !touch_here {
                        continue;
                    }
                    let touch_next = match region_at(next, &src.signature) {
                        Some(src_next) => src_next.closures_touch(&dst.region),
                        None => false,
                    };
                    if !touch_next {
                        continue;
                    }
                    let gap = boxes_next
                        .iter()
                        .filter_map(|b| dst.region.s_distance_to(b))
                        .fold(None, |acc: Option<f64>, g| Some(acc.map_or(g, |a| a.min(g))));
                    out.push((j, weight(step_len, gap)));
                }
                layer_edges.push(out);
            }
            edges.push(layer_edges);
        }
        Self { layers, edges }
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[Vec<Cell>] {
        &self.layers
    }

    pub fn cell(&self, v: VertexId) -> &Cell {
        &self.layers[v.step][v.index]
    }

    pub fn vertex_count(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().flatten().map(Vec::len).sum()
    }

    pub fn outgoing(&self, v: VertexId) -> &[(usize, f64)] {
        &self.edges[v.step][v.index]
    }

    /// The unique step-0 cell containing the ego seed; boundary ties resolve
    /// to the lexicographically smallest signature (layers are sorted).
    pub fn root_vertex(&self, s0: f64, d0: f64) -> Result<VertexId, GraphError> {
        self.layers
            .first()
            .and_then(|layer| layer.iter().position(|c| c.region.contains(s0, d0)))
            .map(|index| VertexId { step: 0, index })
            .ok_or(GraphError::RootNotFound { s0, d0 })
    }

    /// All final-step vertices in signature-lexicographic order.
    pub fn goal_candidates(&self) -> Vec<VertexId> {
        let last = self.layers.len() - 1;
        (0..self.layers[last].len()).map(|index| VertexId { step: last, index }).collect()
    }

    /// Every directed root→goal path (one vertex per layer), depth-first with
    /// children in signature-lexicographic order, capped at `limit`.
    pub fn enumerate_traces(
        &self,
        root: VertexId,
        goal: VertexId,
        limit: usize,
    ) -> Result<EnumeratedTraces, GraphError> {
        let last = self.layers.len() - 1;
        if root.step != 0 || goal.step != last {
            return Err(GraphError::BadEndpoints);
        }
        self.check(root)?;
        self.check(goal)?;

        // Backward reachability prune: can this vertex still reach the goal?
        let mut reaches: Vec<Vec<bool>> =
            self.layers.iter().map(|l| vec![false; l.len()]).collect();
        reaches[last][goal.index] = true;
        for p in (0..last).rev() {
            for i in 0..self.layers[p].len() {
                reaches[p][i] = self.edges[p][i].iter().any(|&(j, _)| reaches[p + 1][j]);
            }
        }

        let mut paths = Vec::new();
        let mut truncated = false;
        let mut stack = vec![root.index];
        self.dfs(&reaches, goal.index, last, &mut stack, &mut paths, limit, &mut truncated);
        Ok(EnumeratedTraces { paths, truncated })
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &self,
        reaches: &[Vec<bool>],
        goal_index: usize,
        last: usize,
        stack: &mut Vec<usize>,
        paths: &mut Vec<Path>,
        limit: usize,
        truncated: &mut bool,
    ) {
        let p = stack.len() - 1;
        let i = *stack.last().expect("non-empty stack");
        if p == last {
            if i == goal_index {
                if paths.len() >= limit {
                    *truncated = true;
                    return;
                }
                paths.push(Path { indices: stack.clone() });
            }
            return;
        }
        if !reaches[p][i] {
            return;
        }
        for &(j, _) in &self.edges[p][i] {
            if *truncated {
                return;
            }
            stack.push(j);
            self.dfs(reaches, goal_index, last, stack, paths, limit, truncated);
            stack.pop();
        }
    }

    /// Sum of edge weights along a path.
    pub fn path_cost(&self, path: &Path) -> f64 {
        let mut cost = 0.0;
        for (p, w) in path.indices.windows(2).enumerate() {
            let (i, j) = (w[0], w[1]);
            let edge = self.edges[p][i]
                .iter()
                .find(|&&(dst, _)| dst == j)
                .expect("path uses a non-existent edge");
            cost += edge.1;
        }
        cost
    }

    /// Minimum-cost root→goal path (Dijkstra); equal-cost ties resolve to the
    /// signature-lexicographically smallest index sequence. `None` when the
    /// goal is unreachable.
    pub fn dijkstra(&self, root: VertexId, goal: VertexId) -> Option<(Path, f64)> {
        #[derive(PartialEq)]
        struct Entry {
            cost: f64,
            indices: Vec<usize>,
        }
        impl Eq for Entry {}
        impl Ord for Entry {
            fn cmp(&self, other: &Self) -> Ordering {
                // Reverse: BinaryHeap is a max-heap, we want the smallest
                // (cost, index sequence) first. Both orderings are monotone
                // under path extension, so the first settle is optimal.
                other
                    .cost
                    .total_cmp(&self.cost)
                    .then_with(|| other.indices.cmp(&self.indices))
            }
        }
        impl PartialOrd for Entry {
            fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                Some(self.cmp(other))
            }
        }

        let last = self.layers.len() - 1;
        let mut settled: Vec<Vec<bool>> =
            self.layers.iter().map(|l| vec![false; l.len()]).collect();
        let mut heap = BinaryHeap::new();
        heap.push(Entry { cost: 0.0, indices: vec![root.index] });
        while let Some(Entry { cost, indices }) = heap.pop() {
            let p = indices.len() - 1;
            let i = *indices.last().expect("non-empty");
            if settled[p][i] {
                continue;
            }
            settled[p][i] = true;
            if p == last {
                if i == goal.index {
                    return Some((Path { indices }, cost));
                }
                continue;
            }
            for &(j, w) in &self.edges[p][i] {
                if !settled[p + 1][j] {
                    let mut next = indices.clone();
                    next.push(j);
                    heap.push(Entry { cost: cost + w, indices: next });
                }
            }
        }
        None
    }

    /// Cells along a path, in step order.
    pub fn path_cells(&self, path: &Path) -> Vec<&Cell> {
        path.indices
            .iter()
            .enumerate()
            .map(|(p, &i)| &self.layers[p][i])
            .collect()
    }

    /// Signature strings along a path.
    pub fn path_signatures(&self, path: &Path) -> Vec<String> {
        self.path_cells(path).iter().map(|c| c.signature.to_string()).collect()
    }

    /// DOT rendering: vertices as `p:signature`, edges labeled with cost.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph navgraph {\n  rankdir=LR;\n");
        for (p, layer) in self.layers.iter().enumerate() {
            for cell in layer {
                let _ = writeln!(out, "  \"{}:{}\";", p, cell.signature);
            }
        }
        for (p, layer_edges) in self.edges.iter().enumerate() {
            for (i, out_edges) in layer_edges.iter().enumerate() {
                for &(j, w) in out_edges {
                    let _ = writeln!(
                        out,
                        "  \"{}:{}\" -> \"{}:{}\" [label=\"{:.3}\"];",
                        p,
                        self.layers[p][i].signature,
                        p + 1,
                        self.layers[p + 1][j].signature,
                        w
                    );
                }
            }
        }
        out.push_str("}\n");
        out
    }

    fn check(&self, v: VertexId) -> Result<(), GraphError> {
        if v.step < self.layers.len() && v.index < self.layers[v.step].len() {
            Ok(())
        } else {
            Err(GraphError::InvalidVertex(v))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::build_all_cells;
    use crate::scenario::{EgoSeed, Obstacle, ObstacleKind, RoadModel, RoadType, RoadTypeInterval};

    fn two_lane_road() -> RoadModel {
        RoadModel {
            s_begin: 0.0,
            s_end: 100.0,
            d_min: -4.0,
            d_max: 4.0,
            road_types: vec![RoadTypeInterval {
                s_lo: 0.0,
                s_hi: 100.0,
                road_type: RoadType::Carriageway,
            }],
        }
    }

    fn vehicle(id: &str, s0: f64, d0: f64, half_width: f64) -> Obstacle {
        Obstacle {
            id: id.into(),
            kind: ObstacleKind::Vehicle,
            half_length: 2.0,
            half_width,
            s0,
            d0,
            s_vel: 0.0,
            d_vel: 0.0,
            s_acc: 0.0,
            d_acc: 0.0,
        }
    }

    fn graph_for(scenario: &Scenario) -> NavGraph {
        NavGraph::from_cells(scenario, build_all_cells(scenario).unwrap())
    }

    #[test]
    fn empty_scene_is_a_chain() {
        let s = Scenario::new(two_lane_road(), vec![], EgoSeed { s0: 5.0, d0: 0.0 }, 4.0, 1.0, false)
            .unwrap();
        let g = graph_for(&s);
        assert_eq!(g.vertex_count(), 5);
        assert_eq!(g.edge_count(), 4);
        let root = g.root_vertex(5.0, 0.0).unwrap();
        let goals = g.goal_candidates();
        assert_eq!(goals.len(), 1);
        let traces = g.enumerate_traces(root, goals[0], DEFAULT_TRACE_LIMIT).unwrap();
        assert_eq!(traces.paths.len(), 1);
        assert!(!traces.truncated);
        // No obstacles: every edge weighs zero.
        assert_eq!(g.path_cost(&traces.paths[0]), 0.0);
        let (best, cost) = g.dijkstra(root, goals[0]).unwrap();
        assert_eq!(best, traces.paths[0]);
        assert_eq!(cost, 0.0);
    }

    #[test]
    fn static_mid_road_obstacle_edges_match_hand_enumeration() {
        let s = Scenario::new(
            two_lane_road(),
            vec![vehicle("o1", 30.0, 0.0, 1.0)],
            EgoSeed { s0: 5.0, d0: 0.0 },
            4.0,
            1.0,
            false,
        )
        .unwrap();
        let g = graph_for(&s);
        // Four cells per layer, signatures sorted: b, f, l, r.
        assert_eq!(g.layers()[0].len(), 4);
        let names: Vec<String> =
            g.layers()[0].iter().map(|c| c.signature.to_string()).collect();
        assert_eq!(names, vec!["cw:b", "cw:f", "cw:l", "cw:r"]);
        // Geometry is static, so the same adjacency repeats per layer pair:
        // b-l, b-r, l-f, r-f (both directions) plus all self-loops; b and f
        // never touch, nor do l and r.
        let idx = |tag: &str| names.iter().position(|n| n == tag).unwrap();
        let (b, f, l, r) = (idx("cw:b"), idx("cw:f"), idx("cw:l"), idx("cw:r"));
        let mut expected: Vec<Vec<usize>> = vec![Vec::new(); 4];
        expected[b] = {
            let mut v = vec![b, l, r];
            v.sort();
            v
        };
        expected[f] = {
            let mut v = vec![f, l, r];
            v.sort();
            v
        };
        expected[l] = {
            let mut v = vec![l, b, f];
            v.sort();
            v
        };
        expected[r] = {
            let mut v = vec![r, b, f];
            v.sort();
            v
        };
        for p in 0..4 {
            for (i, want) in expected.iter().enumerate() {
                let dests: Vec<usize> =
                    g.edges[p][i].iter().map(|&(j, _)| j).collect();
                assert_eq!(&dests, want, "layer {p} vertex {i}");
            }
        }
    }

    #[test]
    fn faster_rear_vehicle_breaks_adjacency_at_the_catch_up_step() {
        // o1 cruises in the right lane; o2 accelerates in the left lane and
        // catches up. The cells "behind o1, right of o2" (br) and "left of
        // o1, front of o2" (lf) share a corner at θ1 and θ2 but separate at
        // θ3, so the last br→lf edge must be missing.
        let o1 = Obstacle {
            id: "o1".into(),
            kind: ObstacleKind::Vehicle,
            half_length: 1.0,
            half_width: 2.0,
            s0: 20.0,
            d0: -2.0,
            s_vel: 1.0,
            d_vel: 0.0,
            s_acc: 0.0,
            d_acc: 0.0,
        };
        let o2 = Obstacle {
            id: "o2".into(),
            kind: ObstacleKind::Vehicle,
            half_length: 1.0,
            half_width: 2.0,
            s0: 17.6,
            d0: 2.0,
            s_vel: 0.5,
            d_vel: 0.0,
            s_acc: 0.2,
            d_acc: 0.0,
        };
        let s = Scenario::new(
            two_lane_road(),
            vec![o1, o2],
            EgoSeed { s0: 2.0, d0: -2.0 },
            4.0,
            1.0,
            false,
        )
        .unwrap();
        let g = graph_for(&s);
        let find = |p: usize, sig: &str| -> Option<usize> {
            g.layers()[p].iter().position(|c| c.signature.to_string() == sig)
        };
        let br1 = find(1, "cw:br").expect("br exists at step 1");
        let br2 = find(2, "cw:br").expect("br exists at step 2");
        let lf2 = find(2, "cw:lf").expect("lf exists at step 2");
        let lf3 = find(3, "cw:lf").expect("lf exists at step 3");
        // Corner contact at θ1 and θ2 creates the edge br@1 → lf@2 ...
        assert!(
            g.edges[1][br1].iter().any(|&(j, _)| j == lf2),
            "br@1 → lf@2 edge expected"
        );
        // ... but once o2 has drawn level at θ3, the cells are no longer
        // adjacent and the edge br@2 → lf@3 disappears.
        assert!(
            !g.edges[2][br2].iter().any(|&(j, _)| j == lf3),
            "br@2 → lf@3 edge must be absent"
        );
    }

    #[test]
    fn root_and_goal_selection() {
        let s = Scenario::new(
            two_lane_road(),
            vec![vehicle("o1", 30.0, 0.0, 1.0)],
            EgoSeed { s0: 5.0, d0: 0.0 },
            4.0,
            1.0,
            false,
        )
        .unwrap();
        let g = graph_for(&s);
        // Ego behind the vehicle.
        let root = g.root_vertex(5.0, 0.0).unwrap();
        assert_eq!(g.cell(root).signature.to_string(), "cw:b");
        // Boundary point shared by l and f resolves to f (lexicographic).
        let shared = g.root_vertex(32.0, 2.0).unwrap();
        assert_eq!(g.cell(shared).signature.to_string(), "cw:f");
        // Inside the obstacle box: no cell contains the seed.
        assert!(matches!(g.root_vertex(30.0, 0.0), Err(GraphError::RootNotFound { .. })));
        // Static scene: four goal candidates.
        assert_eq!(g.goal_candidates().len(), 4);
    }

    #[test]
    fn trace_enumeration_and_dijkstra_agree_on_diamond() {
        let s = Scenario::new(
            two_lane_road(),
            vec![vehicle("o1", 30.0, 0.0, 1.0)],
            EgoSeed { s0: 5.0, d0: 0.0 },
            2.0,
            1.0,
            false,
        )
        .unwrap();
        let g = graph_for(&s);
        let root = g.root_vertex(5.0, 0.0).unwrap();
        // Two-step horizon: reaching the front cell goes via l or via r, the
        // classic diamond.
        let front_goal = g
            .goal_candidates()
            .into_iter()
            .find(|&v| g.cell(v).signature.to_string() == "cw:f")
            .unwrap();
        assert_eq!(
            g.enumerate_traces(root, front_goal, DEFAULT_TRACE_LIMIT).unwrap().paths.len(),
            2
        );
        for goal in g.goal_candidates() {
            let traces = g.enumerate_traces(root, goal, DEFAULT_TRACE_LIMIT).unwrap();
            match g.dijkstra(root, goal) {
                Some((path, cost)) => {
                    let min = traces
                        .paths
                        .iter()
                        .map(|p| g.path_cost(p))
                        .fold(f64::INFINITY, f64::min);
                    assert!((cost - min).abs() < 1e-12);
                    assert!(traces.paths.iter().all(|p| g.path_cost(p) + 1e-12 >= cost));
                    assert!(traces.paths.contains(&path));
                }
                None => assert!(traces.paths.is_empty()),
            }
        }
    }

    #[test]
    fn enumeration_truncates_at_limit() {
        let s = Scenario::new(
            two_lane_road(),
            vec![vehicle("o1", 30.0, 0.0, 1.0)],
            EgoSeed { s0: 5.0, d0: 0.0 },
            4.0,
            1.0,
            false,
        )
        .unwrap();
        let g = graph_for(&s);
        let root = g.root_vertex(5.0, 0.0).unwrap();
        let goal = g.goal_candidates()[0];
        let full = g.enumerate_traces(root, goal, DEFAULT_TRACE_LIMIT).unwrap();
        assert!(!full.truncated);
        assert!(full.paths.len() > 2);
        let cut = g.enumerate_traces(root, goal, 2).unwrap();
        assert!(cut.truncated);
        assert_eq!(cut.paths.len(), 2);
        // The prefix is stable: DFS order is deterministic.
        assert_eq!(cut.paths[..], full.paths[..2]);
    }

    #[test]
    fn edge_weight_uses_reciprocal_gap() {
        assert_eq!(default_edge_weight(1.0, Some(0.0)), 1.0);
        assert_eq!(default_edge_weight(1.0, None), 0.0);
        assert!(default_edge_weight(1.0, Some(9.0)) - 0.1 < 1e-12);
        // Monotone: larger gaps never cost more.
        assert!(default_edge_weight(0.5, Some(3.0)) <= default_edge_weight(0.5, Some(1.0)));
    }

    #[test]
    fn moving_an_obstacle_farther_never_raises_the_cost() {
        // The obstacle sits beyond the road end, so the single free cell has
        // a positive s-gap to it; pushing it farther shrinks every edge
        // weight. Validation is bypassed deliberately (the box is off-road).
        let build = |s0: f64| -> (NavGraph, Path) {
            let mut s = Scenario::new(
                two_lane_road(),
                vec![],
                EgoSeed { s0: 5.0, d0: 0.0 },
                4.0,
                1.0,
                false,
            )
            .unwrap();
            s.obstacles.push(vehicle("o1", s0, 0.0, 1.0));
            let g = graph_for(&s);
            let root = g.root_vertex(5.0, 0.0).unwrap();
            let goal = g.goal_candidates()[0];
            let traces = g.enumerate_traces(root, goal, 10).unwrap();
            (g, traces.paths[0].clone())
        };
        let (g_near, p_near) = build(110.0);
        let (g_far, p_far) = build(115.0);
        assert_eq!(p_near, p_far);
        assert!(g_far.path_cost(&p_far) < g_near.path_cost(&p_near));
    }

    #[test]
    fn dot_dump_lists_vertices_and_edges() {
        let s = Scenario::new(two_lane_road(), vec![], EgoSeed { s0: 5.0, d0: 0.0 }, 2.0, 1.0, false)
            .unwrap();
        let g = graph_for(&s);
        let dot = g.to_dot();
        assert!(dot.contains("\"0:cw:\""));
        assert!(dot.contains("\"0:cw:\" -> \"1:cw:\" [label=\"0.000\"]"));
        assert!(dot.starts_with("digraph navgraph {"));
    }
}
