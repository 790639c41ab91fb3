//! Semantic maneuver verification for on-road behavior planning.
//!
//! The pipeline abstracts a predicted traffic scene into a free space-time
//! navigation graph, enumerates candidate high-level maneuvers as semantic
//! traces, checks every trace against traffic rules formalized in linear
//! temporal logic, and emits the rule-satisfying maneuver envelopes for a
//! downstream trajectory planner.
//!
//! - [`scenario`]: scene data model, scenario files, occupancy prediction.
//! - [`geometry`]: rectangle-union region algebra (generic over the scalar).
//! - [`partition`]: per-step semantic decomposition into signed cells.
//! - [`navgraph`]: the navigation graph, trace enumeration and search.
//! - [`ltl`]: formula parsing and exact finite-trace evaluation.
//! - [`rules`]: atomic propositions, valuations and the rule catalog.
//! - [`verify`]: the end-to-end pipeline and its report.
//! - [`smv`]: model export for cross-validation with external checkers.
//! - [`plot`]: deterministic SVG rendering of partitions and traces.

pub mod geometry;
pub mod ltl;
pub mod navgraph;
pub mod partition;
pub mod plot;
pub mod rules;
pub mod scenario;
pub mod smv;
pub mod verify;

/// Concrete scalar used by the pipeline. The geometry core is generic; the
/// scenario format and everything above it fix `f64`.
pub type Scalar = f64;

/// Frenet rectangle at pipeline precision.
pub type FrenetRect = geometry::FrenetRect<Scalar>;

/// Canonical rectangle-union region at pipeline precision.
pub type Region = geometry::Region<Scalar>;

pub use navgraph::NavGraph;
pub use scenario::{load_scenario, Scenario};
pub use verify::{run_pipeline, PipelineOptions, VerificationReport};
