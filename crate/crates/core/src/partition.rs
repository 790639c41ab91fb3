//! Per-time-step semantic decomposition of the drivable space: road-type
//! regions first, then refinement by each obstacle's four-way split. The
//! output cells are the collision-free building blocks of the navigation
//! graph; each carries a signature naming its relation to every obstacle plus
//! its road type.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::scenario::{RoadModel, RoadType, Scenario};
use crate::{FrenetRect, Region};

#[derive(Debug, Error)]
pub enum PartitionError {
    #[error("ego seed ({s0}, {d0}) lies in no free cell at step 0")]
    SeedNotInFreeSpace { s0: f64, d0: f64 },
}

/// Relation of a free-space region to one obstacle. Variant order is the
/// letter order (`b` < `f` < `l` < `r`) so derived `Ord` matches the
/// lexicographic order of signature strings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Relation {
    Behind,
    Front,
    Left,
    Right,
}

impl Relation {
    pub fn letter(self) -> char {
        match self {
            Relation::Behind => 'b',
            Relation::Front => 'f',
            Relation::Left => 'l',
            Relation::Right => 'r',
        }
    }
}

/// Names one free-space cell: road type plus one relation letter per obstacle
/// (index i = relation to obstacle o_i, in the scenario-wide obstacle order).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Signature {
    pub road_type: RoadType,
    pub relations: Vec<Relation>,
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.road_type.tag())?;
        for r in &self.relations {
            write!(f, "{}", r.letter())?;
        }
        Ok(())
    }
}

impl Serialize for Signature {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Free space-time cell: signature σ at time step p with its region. The
/// region is non-empty and disjoint from every obstacle box at that step by
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub signature: Signature,
    pub step: usize,
    pub region: Region,
}

/// One region per road-type interval, spanning the full road width. The
/// regions tile the road extent.
pub fn partition_road_types(road: &RoadModel) -> Vec<(RoadType, Region)> {
    road.road_types
        .iter()
        .map(|iv| {
            (
                iv.road_type,
                Region::from_rect(FrenetRect::new(iv.s_lo, iv.s_hi, road.d_min, road.d_max)),
            )
        })
        .collect()
}

/// Four-way split of the road extent around an obstacle box: front and behind
/// take the full road width; left and right are limited to the box's s-span.
/// Any of the four may be empty (an obstacle flush against a road edge has no
/// lateral gap on that side), and the four regions plus the box tile the road
/// up to boundaries.
pub fn partition_obstacle(
    obstacle_box: &FrenetRect,
    road: &RoadModel,
) -> [(Relation, Region); 4] {
    let q = road.extent();
    let clip = |s_lo: f64, s_hi: f64, d_lo: f64, d_hi: f64| -> Region {
        let (s_lo, s_hi) = (s_lo.max(q.s_lo), s_hi.min(q.s_hi));
        let (d_lo, d_hi) = (d_lo.max(q.d_lo), d_hi.min(q.d_hi));
        if s_lo < s_hi && d_lo < d_hi {
            Region::from_rect(FrenetRect::new(s_lo, s_hi, d_lo, d_hi))
        } else {
            Region::empty()
        }
    };
    [
        (
            Relation::Front,
            clip(obstacle_box.s_hi, f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY),
        ),
        (
            Relation::Behind,
            clip(f64::NEG_INFINITY, obstacle_box.s_lo, f64::NEG_INFINITY, f64::INFINITY),
        ),
        (
            Relation::Left,
            clip(obstacle_box.s_lo, obstacle_box.s_hi, obstacle_box.d_hi, f64::INFINITY),
        ),
        (
            Relation::Right,
            clip(obstacle_box.s_lo, obstacle_box.s_hi, f64::NEG_INFINITY, obstacle_box.d_lo),
        ),
    ]
}

/// Builds the free-space cells at step `p` (0 ≤ p ≤ n). Starting from the
/// road-type regions, each obstacle in turn replaces every working region by
/// its non-empty intersections with the obstacle's four-way split, appending
/// the relation letter. Fragments that end up with the same signature (same
/// relation letters and road type, e.g. across a crosswalk inset) are merged
/// into a single cell, so signatures are unique per step.
pub fn build_cells(scenario: &Scenario, p: usize) -> Result<Vec<Cell>, PartitionError> {
    let mut working: Vec<(Vec<Relation>, RoadType, Region)> = partition_road_types(&scenario.road)
        .into_iter()
        .map(|(rt, region)| (Vec::new(), rt, region))
        .collect();

    for obstacle in &scenario.obstacles {
        let split = partition_obstacle(&scenario.obstacle_box(obstacle, p), &scenario.road);
        let mut next = Vec::with_capacity(working.len() * 2);
        for (relations, road_type, region) in &working {
            for (relation, quadrant) in &split {
                let refined = region.intersect(quadrant);
                if !refined.is_empty() {
                    let mut relations = relations.clone();
                    relations.push(*relation);
                    next.push((relations, *road_type, refined));
                }
            }
        }
        working = next;
    }

    let mut by_signature: BTreeMap<Signature, Vec<FrenetRect>> = BTreeMap::new();
    for (relations, road_type, region) in working {
        by_signature
            .entry(Signature { road_type, relations })
            .or_default()
            .extend_from_slice(region.rects());
    }

    let cells: Vec<Cell> = by_signature
        .into_iter()
        .map(|(signature, rects)| Cell { signature, step: p, region: Region::from_rects(rects) })
        .collect();

    if p == 0 && !cells.iter().any(|c| c.region.contains(scenario.ego.s0, scenario.ego.d0)) {
        return Err(PartitionError::SeedNotInFreeSpace {
            s0: scenario.ego.s0,
            d0: scenario.ego.d0,
        });
    }
    Ok(cells)
}

/// Cells for every step 0..=n, indexed by step.
pub fn build_all_cells(scenario: &Scenario) -> Result<Vec<Vec<Cell>>, PartitionError> {
    (0..=scenario.step_count()).map(|p| build_cells(scenario, p)).collect()
}

/// Serializable per-step cell listing for debugging and visualization.
#[derive(Debug, Serialize)]
pub struct PartitionDump {
    pub steps: Vec<PartitionStepDump>,
}

#[derive(Debug, Serialize)]
pub struct PartitionStepDump {
    pub step: usize,
    pub cells: Vec<CellDump>,
}

#[derive(Debug, Serialize)]
pub struct CellDump {
    pub signature: String,
    pub rects: Vec<RectDump>,
}

#[derive(Debug, Serialize)]
pub struct RectDump {
    pub s_lo: f64,
    pub s_hi: f64,
    pub d_lo: f64,
    pub d_hi: f64,
}

pub fn dump_cells(cells_by_step: &[Vec<Cell>]) -> PartitionDump {
    PartitionDump {
        steps: cells_by_step
            .iter()
            .enumerate()
            .map(|(step, cells)| PartitionStepDump {
                step,
                cells: cells
                    .iter()
                    .map(|c| CellDump {
                        signature: c.signature.to_string(),
                        rects: c
                            .region
                            .rects()
                            .iter()
                            .map(|r| RectDump { s_lo: r.s_lo, s_hi: r.s_hi, d_lo: r.d_lo, d_hi: r.d_hi })
                            .collect(),
                    })
                    .collect(),
            })
            .collect(),
    }
}
