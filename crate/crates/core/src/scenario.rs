//! Scene data model: road, obstacles with constant-acceleration predictions,
//! ego seed, and the discrete planning horizon. Scenario files are YAML with
//! the exact field names documented in the README; everything is immutable
//! after validation and safe to share across workers.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::parabola_extent;
use crate::FrenetRect;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario parse error: {0}")]
    Parse(#[from] serde_yaml::Error),
    #[error("validation error: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid(msg.into())
}

/// The two road types the semantic state space distinguishes. Ordering is the
/// signature-prefix order used everywhere downstream (`cw` < `pc`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RoadType {
    #[serde(rename = "carriageway")]
    Carriageway,
    #[serde(rename = "pedestrian_crosswalk")]
    PedestrianCrosswalk,
}

impl RoadType {
    /// Short signature prefix (`cw` / `pc`).
    pub fn tag(self) -> &'static str {
        match self {
            RoadType::Carriageway => "cw",
            RoadType::PedestrianCrosswalk => "pc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoadTypeInterval {
    pub s_lo: f64,
    pub s_hi: f64,
    #[serde(rename = "type")]
    pub road_type: RoadType,
}

/// Road extent in Frenet coordinates with a road-type tiling along s. The
/// width is constant: curvature is absorbed by the Frenet transform upstream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoadModel {
    pub s_begin: f64,
    pub s_end: f64,
    pub d_min: f64,
    pub d_max: f64,
    pub road_types: Vec<RoadTypeInterval>,
}

impl RoadModel {
    /// Full road extent as a single rectangle.
    pub fn extent(&self) -> FrenetRect {
        FrenetRect::new(self.s_begin, self.s_end, self.d_min, self.d_max)
    }

    /// Road type at arc length `s`; boundary points resolve to the interval
    /// starting there (half-open tiling), the final end point to the last.
    pub fn road_type_at(&self, s: f64) -> Option<RoadType> {
        self.road_types
            .iter()
            .find(|iv| (iv.s_lo <= s && s < iv.s_hi) || (s == iv.s_hi && s == self.s_end))
            .map(|iv| iv.road_type)
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        let finite = [self.s_begin, self.s_end, self.d_min, self.d_max];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(invalid("road extents must be finite"));
        }
        if self.s_begin >= self.s_end {
            return Err(invalid("road s_begin must be < s_end"));
        }
        if self.d_min >= self.d_max {
            return Err(invalid("road d_min must be < d_max"));
        }
        if self.road_types.is_empty() {
            return Err(invalid("road_types must not be empty"));
        }
        let mut cursor = self.s_begin;
        for iv in &self.road_types {
            if !iv.s_lo.is_finite() || !iv.s_hi.is_finite() || iv.s_lo >= iv.s_hi {
                return Err(invalid(format!(
                    "road_types interval [{}, {}] must have s_lo < s_hi",
                    iv.s_lo, iv.s_hi
                )));
            }
            if iv.s_lo < cursor {
                return Err(invalid("road_type_intervals overlap"));
            }
            if iv.s_lo > cursor {
                return Err(invalid(format!(
                    "road_type_intervals leave a gap at s = {cursor}"
                )));
            }
            cursor = iv.s_hi;
        }
        if cursor != self.s_end {
            return Err(invalid(format!(
                "road_type_intervals do not reach s_end (stop at {cursor})"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObstacleKind {
    Vehicle,
    Pedestrian,
    Cyclist,
    Railborne,
}

/// Traffic participant with an axis-aligned footprint and a
/// constant-acceleration motion prediction in Frenet coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Obstacle {
    pub id: String,
    pub kind: ObstacleKind,
    pub half_length: f64,
    pub half_width: f64,
    pub s0: f64,
    pub d0: f64,
    pub s_vel: f64,
    pub d_vel: f64,
    pub s_acc: f64,
    pub d_acc: f64,
}

impl Obstacle {
    /// Instantaneous footprint box at absolute time `t`.
    pub fn footprint_at(&self, t: f64) -> FrenetRect {
        let s = self.s0 + self.s_vel * t + 0.5 * self.s_acc * t * t;
        let d = self.d0 + self.d_vel * t + 0.5 * self.d_acc * t * t;
        FrenetRect::new(
            s - self.half_length,
            s + self.half_length,
            d - self.half_width,
            d + self.half_width,
        )
    }

    /// Bounding box of the swept footprint over `[t0, t1]`: the hull of the
    /// footprint at the extremal center positions, including the interior
    /// parabola vertex when the velocity changes sign inside the interval.
    pub fn swept_box(&self, t0: f64, t1: f64) -> FrenetRect {
        let (s_lo, s_hi) = parabola_extent(self.s0, self.s_vel, self.s_acc, t0, t1);
        let (d_lo, d_hi) = parabola_extent(self.d0, self.d_vel, self.d_acc, t0, t1);
        FrenetRect::new(
            s_lo - self.half_length,
            s_hi + self.half_length,
            d_lo - self.half_width,
            d_hi + self.half_width,
        )
    }
}

/// Predicted occupancy of `o` over the interval `[θ_p, θ_{p+1}]`.
pub fn predict_occupancy(o: &Obstacle, p: usize, step: f64) -> FrenetRect {
    o.swept_box(p as f64 * step, (p + 1) as f64 * step)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EgoSeed {
    pub s0: f64,
    pub d0: f64,
}

/// A validated scene: road, obstacles, ego seed, horizon discretization and
/// the scene-wide congestion flag (provided by scene interpretation; constant
/// over the trace).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub road: RoadModel,
    #[serde(default)]
    pub obstacles: Vec<Obstacle>,
    pub ego: EgoSeed,
    pub horizon: f64,
    pub step: f64,
    #[serde(default)]
    pub congested: bool,
}

impl Scenario {
    pub fn new(
        road: RoadModel,
        obstacles: Vec<Obstacle>,
        ego: EgoSeed,
        horizon: f64,
        step: f64,
        congested: bool,
    ) -> Result<Self, ScenarioError> {
        let scenario = Self { road, obstacles, ego, horizon, step, congested };
        scenario.validate()?;
        Ok(scenario)
    }

    /// Parses and validates a scenario document.
    pub fn from_yaml(text: &str) -> Result<Self, ScenarioError> {
        let scenario: Scenario = serde_yaml::from_str(text)?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_yaml(&self) -> String {
        serde_yaml::to_string(self).expect("scenario serialization cannot fail")
    }

    /// Returns a copy with a different planning step, revalidated.
    pub fn with_step(&self, step: f64) -> Result<Self, ScenarioError> {
        let mut s = self.clone();
        s.step = step;
        s.validate()?;
        Ok(s)
    }

    /// Returns a copy with the congestion flag overridden.
    pub fn with_congested(&self, congested: bool) -> Self {
        let mut s = self.clone();
        s.congested = congested;
        s
    }

    /// Number of planning intervals n; there are n+1 time points θ_0..θ_n.
    pub fn step_count(&self) -> usize {
        (self.horizon / self.step).round() as usize
    }

    /// Time point θ_p in seconds.
    pub fn time_at(&self, p: usize) -> f64 {
        p as f64 * self.step
    }

    /// Occupancy box used for partitioning at step `p`: the swept box over
    /// `[θ_p, θ_{p+1}]` for interior steps, the instantaneous footprint at the
    /// final time point (no interval follows it).
    pub fn obstacle_box(&self, obstacle: &Obstacle, p: usize) -> FrenetRect {
        if p < self.step_count() {
            predict_occupancy(obstacle, p, self.step)
        } else {
            obstacle.footprint_at(self.time_at(p))
        }
    }

    /// All obstacle boxes at step `p`, in obstacle order.
    pub fn obstacle_boxes(&self, p: usize) -> Vec<FrenetRect> {
        self.obstacles.iter().map(|o| self.obstacle_box(o, p)).collect()
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        self.road.validate()?;
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.step) || !positive(self.horizon) {
            return Err(invalid("horizon and step must be positive"));
        }
        let ratio = self.horizon / self.step;
        let n = ratio.round();
        if n < 1.0 || (ratio - n).abs() > 1e-9 {
            return Err(invalid(format!(
                "horizon / step must be a positive integer (got {ratio})"
            )));
        }
        let n = n as usize;

        let mut seen = std::collections::HashSet::new();
        for o in &self.obstacles {
            if !positive(o.half_length) || !positive(o.half_width) {
                return Err(invalid(format!(
                    "obstacle {}: half_length and half_width must be positive",
                    o.id
                )));
            }
            if !seen.insert(o.id.clone()) {
                return Err(invalid(format!("duplicate obstacle id {}", o.id)));
            }
            for p in 0..=n {
                let b = self.obstacle_box(o, p);
                if b.d_lo < self.road.d_min - 1e-9 || b.d_hi > self.road.d_max + 1e-9 {
                    return Err(invalid(format!(
                        "obstacle {} leaves the road laterally at step {p}",
                        o.id
                    )));
                }
            }
        }

        let (s, d) = (self.ego.s0, self.ego.d0);
        if !self.road.extent().contains(s, d) {
            return Err(invalid("ego seed lies outside the road extent"));
        }
        for o in &self.obstacles {
            if self.obstacle_box(o, 0).contains(s, d) {
                return Err(invalid(format!(
                    "ego seed is not strictly inside the free space at θ_0 (occupied by {})",
                    o.id
                )));
            }
        }
        Ok(())
    }
}

/// Loads a scenario from document text (see the README for the schema).
pub fn load_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    Scenario::from_yaml(text)
}
